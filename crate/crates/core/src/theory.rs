//! Closed-form predictions for the amplify-then-postselect chain.
//!
//! With a uniformly distributed amplifier angle, the B readout depends only
//! on `φ = θ − β`. Zero-noise threshold detection at level `t` accepts the
//! trial iff `|cos 2φ| > c` with `c = |2t − 1|`, and the readout sign is
//! `sign(cos 2φ)`. Averaging over the accepted window multiplies the pair
//! correlation by the gain `K(c) = sin(x₀)/x₀`, `x₀ = arccos c`, so that
//!
//! ```text
//! E(α, β; c) = −K(c) · (t_z cos2α cos2β + t_x sin2α sin2β)
//! P_s(c)     = 2·x₀ / π
//! ```
//!
//! Without postselection (`c = 0`) the gain is `2/π`.

use core::f64::consts::{FRAC_2_PI, FRAC_PI_2, SQRT_2};

use crate::analysis::ChshSettings;
use crate::polarization::{PairSource, PolAngle};

/// Correlation transfer of the amplifier with no postselection.
pub const NO_POSTSELECTION_GAIN: f64 = FRAC_2_PI;

/// Which side of the balanced point `t = 0.5` a threshold lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdSide {
    /// `t < 0.5`: trials where both detectors fire are rejected.
    Low,
    /// `t > 0.5`: trials where neither detector fires are rejected.
    High,
}

pub fn acceptance_cut(threshold: f64) -> f64 {
    (2.0 * threshold - 1.0).abs().min(1.0)
}

pub fn success_probability_for_cut(cut: f64) -> f64 {
    libm::acos(cut.clamp(0.0, 1.0)) / FRAC_PI_2
}

/// `P_s(t) = (2/π)·arccos|2t − 1|`, equal to `(4/π)·arccos√max(t, 1−t)`.
pub fn success_probability(threshold: f64) -> f64 {
    success_probability_for_cut(acceptance_cut(threshold))
}

pub fn cut_for_success(p: f64) -> f64 {
    libm::cos(p.clamp(0.0, 1.0) * FRAC_PI_2)
}

pub fn threshold_for_success(p: f64, side: ThresholdSide) -> f64 {
    let c = cut_for_success(p);
    match side {
        ThresholdSide::Low => 0.5 * (1.0 - c),
        ThresholdSide::High => 0.5 * (1.0 + c),
    }
}

/// Brightness-difference gap at which a steady observer accepts a
/// fraction `p` of uniformly polarized pulses (`i₊ − i₋ = cos 2φ`).
pub fn gap_for_success(p: f64) -> f64 {
    cut_for_success(p)
}

/// `K(c) = sin(x₀)/x₀` with `x₀ = arccos c`; tends to 1 as `c → 1`.
pub fn postselection_gain(cut: f64) -> f64 {
    let x0 = libm::acos(cut.clamp(0.0, 1.0));
    if x0 < 1e-6 {
        1.0 - x0 * x0 / 6.0
    } else {
        libm::sin(x0) / x0
    }
}

pub fn gain_for_success(p: f64) -> f64 {
    postselection_gain(cut_for_success(p))
}

pub fn predicted_correlation(src: &PairSource, alpha: PolAngle, beta: PolAngle, cut: f64) -> f64 {
    postselection_gain(cut) * src.pair_correlation(alpha, beta)
}

/// Predicted Bell parameter for the given settings and acceptance cut.
pub fn predicted_chsh(src: &PairSource, settings: &ChshSettings, cut: f64) -> f64 {
    let e = |a, b| predicted_correlation(src, a, b, cut);
    settings.combine([
        e(settings.a1, settings.b1),
        e(settings.a1, settings.b2),
        e(settings.a2, settings.b1),
        e(settings.a2, settings.b2),
    ])
}

/// Upper cap on `S` for any postselection: `2√2 · max(t_z, t_x) · K`.
pub fn chsh_cap(src: &PairSource, cut: f64) -> f64 {
    2.0 * SQRT_2 * src.t_z.max(src.t_x) * postselection_gain(cut)
}
