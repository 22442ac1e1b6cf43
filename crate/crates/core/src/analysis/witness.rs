//! Visibility witnesses and the separable-state bound behind them.
//!
//! For a product state the collective-spin expectations of the two sides
//! are classical vectors, so any partial scalar product is bounded by the
//! product of the projected lengths, then by the full lengths, then by the
//! photon numbers:
//!
//! ```text
//! |JxA·JxB + JyA·JyB| ≤ |P_xy J_A|·|P_xy J_B| ≤ |J_A|·|J_B| ≤ N_A·N_B
//! ```
//!
//! Normalized by `N_A·N_B` this is `|V_x + V_y| ≤ 1` (and `|V_x+V_y+V_z| ≤ 1`
//! for the full vectors).

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::VisibilityEstimate;
use crate::{Error, Result};

pub const WITNESS_BOUND: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessResult {
    pub components: Vec<(String, f64)>,
    pub total: f64,
    pub bound: f64,
    pub violated: bool,
    pub sigma_total: f64,
}

impl WitnessResult {
    fn from_estimates(estimates: &[&VisibilityEstimate]) -> Self {
        let total = estimates.iter().map(|v| v.value).sum::<f64>().abs();
        WitnessResult {
            components: estimates.iter().map(|v| (v.label.clone(), v.value)).collect(),
            total,
            bound: WITNESS_BOUND,
            violated: total - WITNESS_BOUND > 0.0,
            sigma_total: libm::sqrt(estimates.iter().map(|v| v.sigma * v.sigma).sum()),
        }
    }

    /// `(total − 1)/σ_total`; infinite for an exact violation with no error.
    pub fn significance(&self) -> f64 {
        (self.total - self.bound) / self.sigma_total
    }
}

/// `|V₁ + V₂| ≤ 1` for two mutually unbiased bases on the linear great circle.
pub fn witness_two_visibilities(v1: &VisibilityEstimate, v2: &VisibilityEstimate) -> WitnessResult {
    WitnessResult::from_estimates(&[v1, v2])
}

/// `|V_x + V_y + V_z| ≤ 1` over three mutually unbiased bases.
pub fn witness_three_visibilities(
    v1: &VisibilityEstimate,
    v2: &VisibilityEstimate,
    v3: &VisibilityEstimate,
) -> WitnessResult {
    WitnessResult::from_estimates(&[v1, v2, v3])
}

/// Collective-spin expectations `⟨J^x⟩, ⟨J^y⟩, ⟨J^z⟩` and photon number `⟨N⟩`
/// of one side of a product state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroStateSummary {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub n: f64,
}

impl MacroStateSummary {
    pub fn new(jx: f64, jy: f64, jz: f64, n: f64) -> Result<Self> {
        let s = MacroStateSummary { jx, jy, jz, n };
        if !(n > 0.0) {
            return Err(Error::invalid("n", alloc::format!("{n} must be > 0")));
        }
        if s.length() > n * (1.0 + 1e-12) {
            return Err(Error::invalid("j", alloc::format!("|J| = {} exceeds N = {n}", s.length())));
        }
        Ok(s)
    }

    pub fn length(&self) -> f64 {
        libm::sqrt(self.jx * self.jx + self.jy * self.jy + self.jz * self.jz)
    }

    pub fn in_plane_length(&self) -> f64 {
        libm::hypot(self.jx, self.jy)
    }

    /// Uniform direction, length uniform in `[0, n]`, `n` log-uniform in
    /// `[0.1, 10⁴]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let n = libm::pow(10.0, rng.random_range(-1.0..4.0));
        let len = n * rng.random::<f64>();
        let cos_polar = rng.random_range(-1.0..=1.0f64);
        let sin_polar = libm::sqrt((1.0 - cos_polar * cos_polar).max(0.0));
        let azimuth = rng.random::<f64>() * 2.0 * PI;
        MacroStateSummary {
            jx: len * sin_polar * libm::cos(azimuth),
            jy: len * sin_polar * libm::sin(azimuth),
            jz: len * cos_polar,
            n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableBoundReport {
    pub samples: u64,
    pub violations: u64,
    /// Largest ratio of a link in the chain to the next one.
    pub worst_ratio: f64,
    pub first_violation: Option<(MacroStateSummary, MacroStateSummary)>,
}

impl SeparableBoundReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// The four links of the chain for one product pair, in order.
fn chain(a: &MacroStateSummary, b: &MacroStateSummary) -> [f64; 4] {
    [
        (a.jx * b.jx + a.jy * b.jy).abs(),
        a.in_plane_length() * b.in_plane_length(),
        a.length() * b.length(),
        a.n * b.n,
    ]
}

/// Checks the inequality chain for one pair at relative tolerance `rel_tol`.
/// Returns the worst link ratio and whether every link holds.
pub fn check_separable_pair(a: &MacroStateSummary, b: &MacroStateSummary, rel_tol: f64) -> (f64, bool) {
    let links = chain(a, b);
    let mut worst = 0.0f64;
    let mut ok = true;
    for w in links.windows(2) {
        if w[1] > 0.0 {
            worst = worst.max(w[0] / w[1]);
        }
        if w[0] > w[1] * (1.0 + rel_tol) + f64::MIN_POSITIVE {
            ok = false;
        }
    }
    (worst, ok)
}

/// Samples `sample_count` random product states and verifies the chain on
/// each at relative tolerance 1e−9.
pub fn check_separable_bound<R: Rng + ?Sized>(sample_count: u64, rng: &mut R) -> Result<SeparableBoundReport> {
    if sample_count == 0 {
        return Err(Error::invalid("sample_count", "must be >= 1".to_string()));
    }
    let mut report = SeparableBoundReport {
        samples: sample_count,
        violations: 0,
        worst_ratio: 0.0,
        first_violation: None,
    };
    for _ in 0..sample_count {
        let a = MacroStateSummary::random(rng);
        let b = MacroStateSummary::random(rng);
        let (worst, ok) = check_separable_pair(&a, &b, 1e-9);
        report.worst_ratio = report.worst_ratio.max(worst);
        if !ok {
            report.violations += 1;
            report.first_violation.get_or_insert((a, b));
        }
    }
    Ok(report)
}
