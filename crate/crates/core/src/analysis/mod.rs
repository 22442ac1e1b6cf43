//! Estimators over coincidence tables: correlation terms with Poisson
//! errors, the CHSH parameter, visibilities and entanglement witnesses.

mod fringe;
mod witness;

use alloc::format;
use alloc::string::{String, ToString};
use core::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::experiment::{CoincidenceTable, Counts, Setting};
use crate::polarization::{Basis, PolAngle};
use crate::{Error, Result};

pub use fringe::{visibility_fringe_fit, FringeFit, MIN_SCAN_POINTS};
pub use witness::{
    check_separable_bound, check_separable_pair, witness_three_visibilities, witness_two_visibilities,
    MacroStateSummary, SeparableBoundReport, WitnessResult, WITNESS_BOUND,
};

/// The four analyzer angles of a CHSH test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub a1: PolAngle,
    pub a2: PolAngle,
    pub b1: PolAngle,
    pub b2: PolAngle,
}

impl ChshSettings {
    pub fn from_degrees(a1: f64, a2: f64, b1: f64, b2: f64) -> Self {
        ChshSettings {
            a1: PolAngle::from_degrees(a1),
            a2: PolAngle::from_degrees(a2),
            b1: PolAngle::from_degrees(b1),
            b2: PolAngle::from_degrees(b2),
        }
    }

    /// a₁ = 22.5°, a₂ = 67.5°, b₁ = 0° (H,V), b₂ = 45° (+,−).
    pub fn standard() -> Self {
        Self::from_degrees(22.5, 67.5, 0.0, 45.0)
    }

    /// Settings in term order: (a₁,b₁), (a₁,b₂), (a₂,b₁), (a₂,b₂).
    pub fn settings(&self) -> [Setting; 4] {
        let s = |a, b| Setting::new(Basis::new(a), Basis::new(b));
        [s(self.a1, self.b1), s(self.a1, self.b2), s(self.a2, self.b1), s(self.a2, self.b2)]
    }

    /// `|E(a₁,b₁) + E(a₁,b₂) − E(a₂,b₁) + E(a₂,b₂)|`, terms in
    /// [`settings`](Self::settings) order.
    ///
    /// For these angles the singlet gives E(a₂,b₁) the opposite sign of the
    /// other three terms, so the minus sign sits on (a₂,b₁).
    pub fn combine(&self, e: [f64; 4]) -> f64 {
        (e[0] + e[1] - e[2] + e[3]).abs()
    }

    pub const TERM_LABELS: [&'static str; 4] = ["a1b1", "a1b2", "a2b1", "a2b2"];
}

impl Default for ChshSettings {
    fn default() -> Self {
        Self::standard()
    }
}

/// A correlation estimate with its one-sigma Poisson error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub value: f64,
    pub sigma: f64,
}

/// `E = (N₁₊ + N₂₋ − N₁₋ − N₂₊)/T` with
/// `σ_E = 2·√(N_same·N_diff / T³)`.
pub fn correlation_term(counts: &Counts) -> Result<Correlation> {
    let same = counts.same() as f64;
    let diff = counts.different() as f64;
    let total = same + diff;
    if total == 0.0 {
        return Err(Error::InsufficientData("no conclusive coincidences".to_string()));
    }
    Ok(Correlation {
        value: (same - diff) / total,
        sigma: 2.0 * libm::sqrt(same * diff / (total * total * total)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    pub setting: Setting,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellEstimate {
    pub terms: [Term; 4],
    pub s: f64,
    pub sigma_s: f64,
    /// Conclusive trials over all trials; unknown for counts-only input.
    pub success_probability: Option<f64>,
    /// `S` above Tsirelson's bound, which no physical source reaches.
    pub super_quantum: bool,
}

impl BellEstimate {
    pub fn violates_local_bound(&self) -> bool {
        self.s > 2.0
    }

    pub fn term(&self, label: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.label == label)
    }
}

pub fn chsh(table: &CoincidenceTable, settings: &ChshSettings) -> Result<BellEstimate> {
    let mut terms = [(); 4].map(|_| None);
    let mut trials = 0;
    let mut conclusive = 0;
    for (i, setting) in settings.settings().iter().enumerate() {
        let label = ChshSettings::TERM_LABELS[i];
        let counts = table.get(setting).ok_or_else(|| {
            Error::MissingSetting(format!(
                "{label} (A {} deg, B {} deg)",
                setting.a.primary.degrees(),
                setting.b.primary.degrees()
            ))
        })?;
        let c = correlation_term(counts)
            .map_err(|_| Error::InsufficientData(format!("no conclusive coincidences at {label}")))?;
        trials += counts.trials;
        conclusive += counts.conclusive;
        terms[i] = Some(Term {
            label: label.to_string(),
            setting: *setting,
            value: c.value,
            sigma: c.sigma,
        });
    }
    let terms = terms.map(|t| t.expect("all four filled"));
    let s = settings.combine([terms[0].value, terms[1].value, terms[2].value, terms[3].value]);
    let sigma_s = libm::sqrt(terms.iter().map(|t| t.sigma * t.sigma).sum());
    Ok(BellEstimate {
        s,
        sigma_s,
        success_probability: (trials > 0).then(|| conclusive as f64 / trials as f64),
        super_quantum: s > 2.0 * SQRT_2 + 1e-12,
        terms,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisibilityMethod {
    Direct,
    FringeFit,
}

/// Correlation visibility in one basis. Positive for anticorrelation, so
/// a singlet-like source reports `V > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilityEstimate {
    pub label: String,
    pub value: f64,
    pub sigma: f64,
    pub method: VisibilityMethod,
}

/// Visibility from counts at matched A and B bases: `V = −E`.
pub fn visibility_direct(label: &str, setting: &Setting, counts: &Counts) -> Result<VisibilityEstimate> {
    if !setting.a.approx_eq(setting.b) {
        return Err(Error::MismatchedBases {
            a_deg: setting.a.primary.degrees(),
            b_deg: setting.b.primary.degrees(),
        });
    }
    visibility_from_counts(label, counts)
}

/// Same as [`visibility_direct`] for a matched axis that has no linear
/// basis representation (the circular axis).
pub fn visibility_from_counts(label: &str, counts: &Counts) -> Result<VisibilityEstimate> {
    let c = correlation_term(counts)?;
    Ok(VisibilityEstimate {
        label: label.to_string(),
        value: -c.value,
        sigma: c.sigma,
        method: VisibilityMethod::Direct,
    })
}
