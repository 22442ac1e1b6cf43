//! Measure-and-prepare amplifier.
//!
//! Photon B meets a linear polarizer at a random angle θ followed by a
//! single-photon detector. A click fires a laser pulse polarized along θ.
//! The pulse depends on the pair only through the classical pair (θ, click),
//! so the photon-A / pulse state is separable by construction.

use core::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::polarization::{Outcome, PairSource, PolAngle};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClonerConfig {
    /// Click probability for a photon that passes the polarizer.
    pub detector_efficiency: f64,
    /// Click probability per pair from noise alone.
    pub dark_click_rate: f64,
}

impl ClonerConfig {
    pub fn new(detector_efficiency: f64, dark_click_rate: f64) -> Result<Self> {
        let cfg = ClonerConfig {
            detector_efficiency,
            dark_click_rate,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("detector_efficiency", self.detector_efficiency),
            ("dark_click_rate", self.dark_click_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(name, alloc::format!("{v} not in [0, 1]")));
            }
        }
        if self.detector_efficiency == 0.0 && self.dark_click_rate == 0.0 {
            return Err(Error::invalid(
                "detector_efficiency",
                "the amplifier never fires with zero efficiency and no dark clicks",
            ));
        }
        Ok(())
    }

    /// Probability that one pair produces a flash.
    pub fn trial_probability(&self) -> f64 {
        let pass_click = self.detector_efficiency + (1.0 - self.detector_efficiency) * self.dark_click_rate;
        0.5 * pass_click + 0.5 * self.dark_click_rate
    }
}

impl Default for ClonerConfig {
    fn default() -> Self {
        ClonerConfig {
            detector_efficiency: 0.07,
            dark_click_rate: 0.0,
        }
    }
}

/// The macroscopic pulse leaving the amplifier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroPulse {
    pub polarization: PolAngle,
    /// Normalized peak intensity; 1.0 is the nominal pulse.
    pub peak_intensity: f64,
}

/// A pair that made the amplifier fire: the A outcome it carried, the pulse,
/// and the polarizer angle (ground truth, never visible to estimators).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Amplification {
    pub a_outcome: Outcome,
    pub pulse: MacroPulse,
    pub hidden_theta: PolAngle,
}

pub fn sample_cloner_angle<R: Rng + ?Sized>(rng: &mut R) -> PolAngle {
    PolAngle::from_radians(rng.random::<f64>() * PI)
}

/// Sends one pair through the amplifier. `None` means the detector stayed
/// dark and no trial happened.
///
/// Photon B passes the polarizer with probability ½ whatever θ is, so the
/// click is decided first and θ and the A outcome are drawn only for pairs
/// that fire.
pub fn attempt_amplification<R: Rng + ?Sized>(
    src: &PairSource,
    alpha: PolAngle,
    cfg: &ClonerConfig,
    rng: &mut R,
) -> Option<Amplification> {
    let pass_click = cfg.detector_efficiency + (1.0 - cfg.detector_efficiency) * cfg.dark_click_rate;
    let v: f64 = rng.random();
    let passed = if v < 0.5 * pass_click {
        true
    } else if v < 0.5 * pass_click + 0.5 * cfg.dark_click_rate {
        false
    } else {
        return None;
    };

    let theta = sample_cloner_angle(rng);
    // b = +1 is "photon passes the polarizer at θ"
    let b = if passed { Outcome::Plus } else { Outcome::Minus };
    let p_plus = src.joint_outcome_probability(alpha, theta, Outcome::Plus, b);
    let p_minus = src.joint_outcome_probability(alpha, theta, Outcome::Minus, b);
    let a = if rng.random::<f64>() * (p_plus + p_minus) < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    };

    Some(Amplification {
        a_outcome: a,
        pulse: MacroPulse {
            polarization: theta,
            peak_intensity: 1.0,
        },
        hidden_theta: theta,
    })
}
