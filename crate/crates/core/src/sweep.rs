//! Threshold sweeps and source calibration.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_2_PI, FRAC_PI_2};

use serde::{Deserialize, Serialize};

use crate::analysis::{chsh, ChshSettings};
use crate::detection::ThresholdConfig;
use crate::experiment::{run_tally, Detector, RunConfig};
use crate::polarization::PairSource;
use crate::rng::derive_seed;
use crate::theory::{self, ThresholdSide};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub success_probability: f64,
    pub sigma_success: f64,
    pub s: f64,
    pub sigma_s: f64,
    pub trials: u64,
    pub conclusive: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

pub const DEFAULT_SWEEP_POINTS: usize = 21;
pub const DEFAULT_MIN_SUCCESS: f64 = 0.05;

/// Success probabilities uniform in `[min_success, 1]`.
pub fn success_grid(points: usize, min_success: f64) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => alloc::vec![1.0],
        _ => (0..points)
            .map(|i| min_success + (1.0 - min_success) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Thresholds giving [`success_grid`] on one side of the balanced point,
/// in ascending order.
pub fn threshold_grid(points: usize, min_success: f64, side: ThresholdSide) -> Vec<f64> {
    let mut t: Vec<f64> = success_grid(points, min_success)
        .into_iter()
        .map(|p| theory::threshold_for_success(p, side))
        .collect();
    t.sort_by(|a, b| a.total_cmp(b));
    t
}

/// One CHSH run at `threshold`, seeded with the `index`-th derived seed.
pub fn sweep_point(cfg: &RunConfig, settings: &ChshSettings, index: usize, threshold: f64) -> Result<SweepRow> {
    let point_cfg = RunConfig {
        seed: derive_seed(cfg.seed, index as u64),
        detector: Detector::Threshold(ThresholdConfig::new(threshold, cfg.detector.noise_sigma())?),
        ..cfg.clone()
    };
    let tally = run_tally(&point_cfg)?;
    let est = chsh(&tally.table, settings)?;
    let trials = tally.table.total_trials();
    let conclusive = tally.table.total_conclusive();
    let p = conclusive as f64 / trials as f64;
    Ok(SweepRow {
        threshold,
        success_probability: p,
        sigma_success: libm::sqrt(p * (1.0 - p) / trials as f64),
        s: est.s,
        sigma_s: est.sigma_s,
        trials,
        conclusive,
    })
}

/// One full CHSH experiment per threshold; rows sorted by threshold.
pub fn threshold_sweep(cfg: &RunConfig, settings: &ChshSettings, thresholds: &[f64]) -> Result<SweepResult> {
    if thresholds.is_empty() {
        return Err(Error::invalid("thresholds", "empty sweep"));
    }
    let mut rows = thresholds
        .iter()
        .enumerate()
        .map(|(i, &t)| sweep_point(cfg, settings, i, t))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.threshold.total_cmp(&b.threshold));
    Ok(SweepResult { rows })
}

/// Source correlations that reproduce the given no-postselection
/// visibilities through the amplifier, whose transfer factor is 2/π.
pub fn calibrate_source(target_hv: f64, target_pm: f64) -> Result<PairSource> {
    let invert = |v: f64| -> Result<f64> {
        if !(v > 0.0) {
            return Err(Error::invalid("target visibility", alloc::format!("{v} must be > 0")));
        }
        if v > FRAC_2_PI * (1.0 + 1e-12) {
            return Err(Error::Unreachable { target: v });
        }
        Ok((v * FRAC_PI_2).min(1.0))
    };
    PairSource::new(invert(target_hv)?, invert(target_pm)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloner::ClonerConfig;
    use crate::experiment::Schedule;
    use core::f64::consts::{PI, SQRT_2};

    #[test]
    fn calibration_examples() {
        let src = calibrate_source(0.536, 0.602).unwrap();
        assert!((src.t_z - 0.8419).abs() < 1e-4);
        assert!((src.t_x - 0.9456).abs() < 1e-4);
        assert_eq!(calibrate_source(2.0 / PI, 2.0 / PI).unwrap(), PairSource::ideal());
        assert_eq!(calibrate_source(0.7, 0.6), Err(Error::Unreachable { target: 0.7 }));
        assert!(calibrate_source(0.0, 0.5).is_err());
    }

    #[test]
    fn grid_shape() {
        let ps = success_grid(21, 0.05);
        assert_eq!(ps.len(), 21);
        assert!((ps[0] - 0.05).abs() < 1e-15 && ps[20] == 1.0);
        let t = threshold_grid(21, 0.05, ThresholdSide::Low);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert!((t[20] - 0.5).abs() < 1e-15);
        let hi = threshold_grid(5, 0.05, ThresholdSide::High);
        assert!(hi.iter().all(|&x| x >= 0.5));
    }

    fn cfg(trials: u64) -> RunConfig {
        RunConfig {
            trials_per_setting: trials,
            schedule: Schedule::sequential(ChshSettings::standard().settings().to_vec()),
            seed: 99,
            source: PairSource::ideal(),
            cloner: ClonerConfig::default(),
            detector: Detector::Threshold(ThresholdConfig::new(0.5, 0.0).unwrap()),
            a_efficiency: 1.0,
        }
    }

    #[test]
    fn small_sweep_tracks_oracle() {
        let thresholds = [
            theory::threshold_for_success(0.2, ThresholdSide::Low),
            0.5,
            theory::threshold_for_success(0.2, ThresholdSide::High),
        ];
        let sweep = threshold_sweep(&cfg(20_000), &ChshSettings::standard(), &thresholds).unwrap();
        assert_eq!(sweep.rows.len(), 3);
        let at_half = &sweep.rows[1];
        assert_eq!(at_half.success_probability, 1.0);
        assert!((at_half.s - 4.0 * SQRT_2 / PI).abs() < 3.0 * at_half.sigma_s);
        for row in [&sweep.rows[0], &sweep.rows[2]] {
            assert!((row.success_probability - 0.2).abs() < 3.0 * row.sigma_success);
            let oracle = 2.0 * SQRT_2 * theory::gain_for_success(0.2);
            assert!((row.s - oracle).abs() < 3.0 * row.sigma_s, "{row:?}");
            assert!(row.sigma_s > at_half.sigma_s);
        }
    }

    #[test]
    fn empty_sweep_is_rejected() {
        assert!(threshold_sweep(&cfg(10), &ChshSettings::standard(), &[]).is_err());
    }
}
