//! Multi-threaded runs. Trials draw from their own streams, so any split of
//! the trial ids gives the same counts as a sequential run.

use bellamp_core::analysis::ChshSettings;
use bellamp_core::experiment::{
    fringe_scan_point, simulate_trial, CoincidenceTable, RunConfig, RunOutput, RunTally, ScanPoint,
};
use bellamp_core::polarization::{Basis, PolAngle};
use bellamp_core::sweep::{sweep_point, SweepResult};
use bellamp_core::Result;
use rayon::prelude::*;

const CHUNK: u64 = 1 << 14;

pub fn run_tally(cfg: &RunConfig) -> Result<RunTally> {
    cfg.validate()?;
    let total = cfg.total_trials();
    let chunks = total.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut t = RunTally::new(cfg);
            t.run_range(cfg, k * CHUNK..((k + 1) * CHUNK).min(total));
            t
        })
        .reduce(
            || RunTally::new(cfg),
            |mut a, b| {
                a.merge(&b);
                a
            },
        );
    Ok(tally)
}

/// Same as the sequential `run_experiment`, records in trial order.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let results: Vec<_> = (0..cfg.total_trials())
        .into_par_iter()
        .map(|id| simulate_trial(cfg, id))
        .collect();
    let mut table = CoincidenceTable::for_settings(&cfg.schedule.settings);
    let mut pairs_attempted = 0;
    let mut records = Vec::with_capacity(results.len());
    for (record, pairs) in results {
        table.entries[cfg.setting_index(record.trial_id)]
            .1
            .record(record.a_click, record.verdict);
        pairs_attempted += pairs;
        records.push(record);
    }
    Ok(RunOutput {
        records,
        table,
        pairs_attempted,
    })
}

/// Threshold sweep with the points run concurrently; same rows as the
/// sequential sweep.
pub fn threshold_sweep(cfg: &RunConfig, settings: &ChshSettings, thresholds: &[f64]) -> Result<SweepResult> {
    if thresholds.is_empty() {
        return bellamp_core::sweep::threshold_sweep(cfg, settings, thresholds);
    }
    let mut rows = thresholds
        .par_iter()
        .enumerate()
        .map(|(i, &t)| sweep_point(cfg, settings, i, t))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.threshold.total_cmp(&b.threshold));
    Ok(SweepResult { rows })
}

pub fn fringe_scan(cfg: &RunConfig, b: Basis, alphas: &[PolAngle]) -> Result<Vec<ScanPoint>> {
    alphas
        .par_iter()
        .enumerate()
        .map(|(i, &a)| fringe_scan_point(cfg, b, i, a))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use bellamp_core::cloner::ClonerConfig;
    use bellamp_core::detection::ThresholdConfig;
    use bellamp_core::experiment::{self, Detector, Schedule};
    use bellamp_core::polarization::PairSource;

    fn cfg() -> RunConfig {
        RunConfig {
            trials_per_setting: 10_000,
            schedule: Schedule::blocks(ChshSettings::standard().settings().to_vec(), 250),
            seed: 5,
            source: PairSource::new(0.8, 0.9).unwrap(),
            cloner: ClonerConfig::default(),
            detector: Detector::Threshold(ThresholdConfig::new(0.1, 0.02).unwrap()),
            a_efficiency: 0.9,
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let c = cfg();
        assert_eq!(run_tally(&c).unwrap(), experiment::run_tally(&c).unwrap());
        let seq = experiment::run_experiment(&c).unwrap();
        let par = run_experiment(&c).unwrap();
        assert_eq!(par, seq);
        assert_eq!(par.table, run_tally(&c).unwrap().table);
    }

    #[test]
    fn parallel_sweep_and_scan_match() {
        let mut c = cfg();
        c.trials_per_setting = 1000;
        let s = ChshSettings::standard();
        let t = [0.3, 0.05, 0.5];
        assert_eq!(
            threshold_sweep(&c, &s, &t).unwrap(),
            bellamp_core::sweep::threshold_sweep(&c, &s, &t).unwrap()
        );
        let alphas: Vec<PolAngle> = (0..8).map(|i| PolAngle::from_degrees(22.5 * i as f64)).collect();
        let b = Basis::from_degrees(0.0);
        assert_eq!(
            fringe_scan(&c, b, &alphas).unwrap(),
            experiment::fringe_scan(&c, b, &alphas).unwrap()
        );
    }
}
