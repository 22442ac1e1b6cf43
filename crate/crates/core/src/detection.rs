//! B-side readout of the macroscopic pulse and A-side photon counting.
//!
//! The pulse is split on the B basis into two intensities. A conclusive
//! result needs exactly one of the two threshold detectors to fire; both or
//! neither firing rejects the trial. A human observer is modelled as an
//! intensity-difference discriminator whose gap drifts slowly in time.

use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cloner::MacroPulse;
use crate::polarization::{Basis, Outcome};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    /// Firing level in units of the nominal pulse peak.
    pub threshold: f64,
    /// Std-dev of additive Gaussian noise on each photodiode signal.
    pub analog_noise_sigma: f64,
}

impl ThresholdConfig {
    pub fn new(threshold: f64, analog_noise_sigma: f64) -> Result<Self> {
        let cfg = ThresholdConfig {
            threshold,
            analog_noise_sigma,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(Error::invalid("threshold", alloc::format!("{} must be > 0", self.threshold)));
        }
        if !(self.analog_noise_sigma >= 0.0) || !self.analog_noise_sigma.is_finite() {
            return Err(Error::invalid(
                "analog_noise_sigma",
                alloc::format!("{} must be finite and >= 0", self.analog_noise_sigma),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Plus,
    Minus,
    Inconclusive,
}

impl Verdict {
    pub fn outcome(self) -> Option<Outcome> {
        match self {
            Verdict::Plus => Some(Outcome::Plus),
            Verdict::Minus => Some(Outcome::Minus),
            Verdict::Inconclusive => None,
        }
    }

    pub fn is_conclusive(self) -> bool {
        self != Verdict::Inconclusive
    }

    fn from_fired(plus: bool, minus: bool) -> Self {
        match (plus, minus) {
            (true, false) => Verdict::Plus,
            (false, true) => Verdict::Minus,
            _ => Verdict::Inconclusive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BSideResult {
    pub i_plus: f64,
    pub i_minus: f64,
    pub fired_plus: bool,
    pub fired_minus: bool,
    pub verdict: Verdict,
}

/// Malus-law split of the pulse on `beta`, with optional Gaussian noise on
/// each arm (clamped at zero). Noise is drawn only when `noise_sigma > 0`.
pub fn split_intensities<R: Rng + ?Sized>(
    pulse: &MacroPulse,
    beta: Basis,
    noise_sigma: f64,
    rng: &mut R,
) -> (f64, f64) {
    let c = libm::cos(pulse.polarization.radians() - beta.primary.radians());
    let i_plus = c * c * pulse.peak_intensity;
    let i_minus = pulse.peak_intensity - i_plus;
    add_analog_noise(i_plus, i_minus, noise_sigma, rng)
}

/// Independent zero-mean Gaussian noise on both arms, clamped at zero.
pub fn add_analog_noise<R: Rng + ?Sized>(i_plus: f64, i_minus: f64, noise_sigma: f64, rng: &mut R) -> (f64, f64) {
    if noise_sigma > 0.0 {
        let normal = Normal::new(0.0, noise_sigma).expect("sigma validated finite and positive");
        let n_plus = normal.sample(rng);
        let n_minus = normal.sample(rng);
        ((i_plus + n_plus).max(0.0), (i_minus + n_minus).max(0.0))
    } else {
        (i_plus, i_minus)
    }
}

/// Threshold photodiodes with the exactly-one-fires rule. Firing is strict:
/// a signal equal to the threshold does not fire.
pub fn classify(i_plus: f64, i_minus: f64, cfg: &ThresholdConfig) -> BSideResult {
    let fired_plus = i_plus > cfg.threshold;
    let fired_minus = i_minus > cfg.threshold;
    BSideResult {
        i_plus,
        i_minus,
        fired_plus,
        fired_minus,
        verdict: Verdict::from_fired(fired_plus, fired_minus),
    }
}

/// Slowly drifting discrimination level of a human observer.
///
/// `level(k) = discrimination_gap + drift_amplitude · sin(2πk/drift_period + drift_phase)`,
/// clamped to `[0, 1]`. A zero or non-finite period disables drift.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObserverModel {
    pub discrimination_gap: f64,
    #[serde(default)]
    pub drift_amplitude: f64,
    #[serde(default)]
    pub drift_period: f64,
    /// Radians.
    #[serde(default)]
    pub drift_phase: f64,
}

impl ObserverModel {
    pub fn steady(discrimination_gap: f64) -> Self {
        ObserverModel {
            discrimination_gap,
            drift_amplitude: 0.0,
            drift_period: 0.0,
            drift_phase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.discrimination_gap.is_nan() || self.discrimination_gap < 0.0 {
            return Err(Error::invalid(
                "discrimination_gap",
                alloc::format!("{} must be >= 0", self.discrimination_gap),
            ));
        }
        if !self.drift_amplitude.is_finite() || self.drift_amplitude < 0.0 {
            return Err(Error::invalid(
                "drift_amplitude",
                alloc::format!("{} must be finite and >= 0", self.drift_amplitude),
            ));
        }
        Ok(())
    }

    pub fn level(&self, trial_index: u64) -> f64 {
        let drift = if self.drift_amplitude > 0.0 && self.drift_period.is_finite() && self.drift_period > 0.0 {
            self.drift_amplitude * libm::sin(2.0 * PI * trial_index as f64 / self.drift_period + self.drift_phase)
        } else {
            0.0
        };
        (self.discrimination_gap + drift).clamp(0.0, 1.0)
    }

    /// Whether a single spot of the given brightness is seen, using the
    /// current level as a visibility threshold.
    pub fn sees(&self, intensity: f64, trial_index: u64) -> bool {
        intensity > self.level(trial_index)
    }
}

/// One observer comparing two spots: a call is made only when the brightness
/// difference exceeds the current gap.
pub fn observe_human(i_plus: f64, i_minus: f64, model: &ObserverModel, trial_index: u64) -> Verdict {
    let gap = model.level(trial_index);
    if i_plus - i_minus > gap {
        Verdict::Plus
    } else if i_minus - i_plus > gap {
        Verdict::Minus
    } else {
        Verdict::Inconclusive
    }
}

/// Two observers, one per output; conclusive iff exactly one sees their spot.
pub fn observe_pair(
    i_plus: f64,
    i_minus: f64,
    plus: &ObserverModel,
    minus: &ObserverModel,
    trial_index: u64,
) -> Verdict {
    Verdict::from_fired(plus.sees(i_plus, trial_index), minus.sees(i_minus, trial_index))
}

/// Which A-side avalanche photodiode clicked, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AClick {
    A1,
    A2,
    #[serde(rename = "none")]
    None,
}

/// Maps the A outcome onto the two APDs behind the A analyzer, each with
/// efficiency `efficiency_a`. No draw is made at efficiency 1.
pub fn detect_a<R: Rng + ?Sized>(a_outcome: Outcome, efficiency_a: f64, rng: &mut R) -> AClick {
    if efficiency_a < 1.0 && rng.random::<f64>() >= efficiency_a {
        return AClick::None;
    }
    match a_outcome {
        Outcome::Plus => AClick::A1,
        Outcome::Minus => AClick::A2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarization::PolAngle;
    use crate::rng::trial_stream;
    use crate::theory;
    use proptest::prelude::*;
    use rand::Rng;

    fn pulse(deg: f64) -> MacroPulse {
        MacroPulse {
            polarization: PolAngle::from_degrees(deg),
            peak_intensity: 1.0,
        }
    }

    fn split(theta_deg: f64, beta_deg: f64) -> (f64, f64) {
        split_intensities(&pulse(theta_deg), Basis::from_degrees(beta_deg), 0.0, &mut trial_stream(0, 0))
    }

    #[test]
    fn malus_split() {
        let (p, m) = split(10.0, 10.0);
        assert!((p - 1.0).abs() < 1e-15 && m.abs() < 1e-15);
        let (p, m) = split(45.0, 0.0);
        assert!((p - 0.5).abs() < 1e-15 && (m - 0.5).abs() < 1e-15);
        let (p, m) = split(30.0, 0.0);
        assert!((p - 0.75).abs() < 1e-15 && (m - 0.25).abs() < 1e-15);
    }

    #[test]
    fn noisy_split_is_clamped() {
        let mut rng = trial_stream(1, 1);
        for _ in 0..10_000 {
            let (p, m) = split_intensities(&pulse(0.0), Basis::from_degrees(0.0), 0.3, &mut rng);
            assert!(p >= 0.0 && m >= 0.0);
        }
    }

    #[test]
    fn classify_examples() {
        let cfg = ThresholdConfig::new(0.5, 0.0).unwrap();
        assert_eq!(classify(0.9, 0.1, &cfg).verdict, Verdict::Plus);
        assert_eq!(classify(0.1, 0.9, &cfg).verdict, Verdict::Minus);
        let both = classify(0.6, 0.55, &cfg);
        assert!(both.fired_plus && both.fired_minus);
        assert_eq!(both.verdict, Verdict::Inconclusive);
        let none = classify(0.3, 0.2, &cfg);
        assert!(!none.fired_plus && !none.fired_minus);
        assert_eq!(none.verdict, Verdict::Inconclusive);
        // strict inequality
        assert_eq!(classify(0.5, 0.5, &cfg).verdict, Verdict::Inconclusive);
        assert_eq!(classify(0.5, 0.2, &cfg).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn threshold_must_be_positive() {
        assert!(ThresholdConfig::new(0.0, 0.0).is_err());
        assert!(ThresholdConfig::new(f64::NAN, 0.0).is_err());
        assert!(ThresholdConfig::new(0.2, -1.0).is_err());
    }

    #[test]
    fn observer_examples() {
        let m = ObserverModel::steady(0.3);
        assert_eq!(observe_human(1.0, 0.0, &m, 0), Verdict::Plus);
        assert_eq!(observe_human(0.0, 1.0, &m, 0), Verdict::Minus);
        assert_eq!(observe_human(0.55, 0.45, &m, 0), Verdict::Inconclusive);
    }

    #[test]
    fn observer_gap_for_one_third_success() {
        // Acceptance over uniform φ = θ − β is P(|cos 2φ| > g). Invert by
        // bisection on a midpoint-rule quadrature of the indicator.
        let acceptance = |g: f64| {
            let n = 200_000;
            (0..n)
                .filter(|&i| {
                    let phi = (i as f64 + 0.5) / n as f64 * PI;
                    libm::cos(2.0 * phi).abs() > g
                })
                .count() as f64
                / n as f64
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if acceptance(mid) > 0.335 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let g = 0.5 * (lo + hi);
        assert!((g - 0.864_7).abs() < 1e-3, "{g}");
        assert!((theory::gap_for_success(0.335) - g).abs() < 1e-4);
    }

    #[test]
    fn drifting_level_is_clamped_and_replayable() {
        let m = ObserverModel {
            discrimination_gap: 0.9,
            drift_amplitude: 0.5,
            drift_period: 37.0,
            drift_phase: 0.0,
        };
        for k in 0..200 {
            let l = m.level(k);
            assert!((0.0..=1.0).contains(&l));
            assert_eq!(l, m.level(k));
        }
        let off = ObserverModel::steady(f64::INFINITY);
        assert_eq!(off.level(3), 1.0);
        assert!(!off.sees(1.0, 3));
    }

    #[test]
    fn a_side_detection() {
        let mut rng = trial_stream(2, 0);
        assert_eq!(detect_a(Outcome::Plus, 1.0, &mut rng), AClick::A1);
        assert_eq!(detect_a(Outcome::Minus, 1.0, &mut rng), AClick::A2);
        let n = 100_000;
        let clicks = (0..n)
            .filter(|_| detect_a(Outcome::Plus, 0.5, &mut rng) != AClick::None)
            .count() as f64;
        let sigma = libm::sqrt(0.25 / n as f64);
        assert!((clicks / n as f64 - 0.5).abs() < 3.0 * sigma);
        assert_eq!(detect_a(Outcome::Plus, 0.0, &mut rng), AClick::None);
    }

    #[test]
    fn success_probability_matches_monte_carlo() {
        let mut rng = trial_stream(3, 0);
        let n = 200_000;
        for t in [0.02, 0.1, 0.3, 0.5, 0.7, 0.95] {
            let cfg = ThresholdConfig::new(t, 0.0).unwrap();
            let hits = (0..n)
                .filter(|_| {
                    let theta = rng.random::<f64>() * 180.0;
                    let (p, m) = split(theta, 0.0);
                    classify(p, m, &cfg).verdict.is_conclusive()
                })
                .count() as f64;
            let ps = theory::success_probability(t);
            let sigma = libm::sqrt(ps * (1.0 - ps) / n as f64).max(1e-9);
            assert!((hits / n as f64 - ps).abs() <= 3.0 * sigma, "t = {t}");
        }
    }

    proptest! {
        #[test]
        fn conclusive_iff_outside_window(theta in 0.0..180.0f64, beta in 0.0..180.0f64, t in 0.001..0.999f64) {
            let (p, m) = split(theta, beta);
            let v = classify(p, m, &ThresholdConfig::new(t, 0.0).unwrap()).verdict;
            let hi = t.max(1.0 - t);
            let lo = t.min(1.0 - t);
            // skip points within rounding distance of a window edge
            prop_assume!((p - hi).abs() > 1e-9 && (p - lo).abs() > 1e-9);
            prop_assume!((p - t).abs() > 1e-9 && (m - t).abs() > 1e-9);
            prop_assert_eq!(v.is_conclusive(), p > hi || p < lo);
        }

        #[test]
        fn noiseless_split_conserves_intensity(theta in 0.0..180.0f64, beta in 0.0..180.0f64) {
            let (p, m) = split(theta, beta);
            prop_assert!((p + m - 1.0).abs() < 1e-12);
        }

        #[test]
        fn classify_is_total(p in 0.0..10.0f64, m in 0.0..10.0f64, t in 0.001..5.0f64) {
            let r = classify(p, m, &ThresholdConfig::new(t, 0.0).unwrap());
            let expected = match (p > t, m > t) {
                (true, false) => Verdict::Plus,
                (false, true) => Verdict::Minus,
                _ => Verdict::Inconclusive,
            };
            prop_assert_eq!(r.verdict, expected);
        }
    }
}
