//! Linear polarization angles and the two-photon correlation model.

use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A linear polarization direction in radians, normalized to `[0, π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(into = "f64", from = "f64")]
pub struct PolAngle(f64);

impl PolAngle {
    pub const HORIZONTAL: PolAngle = PolAngle(0.0);

    pub fn from_radians(rad: f64) -> Self {
        let mut v = rad % PI;
        if v < 0.0 {
            v += PI;
        }
        // -tiny % π + π rounds up to π
        if v >= PI {
            v = 0.0;
        }
        PolAngle(v)
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self::from_radians(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    pub fn orthogonal(self) -> Self {
        Self::from_radians(self.0 + FRAC_PI_2)
    }

    /// Angle difference `self - other` reduced to `[0, π)`.
    pub fn minus(self, other: PolAngle) -> f64 {
        Self::from_radians(self.0 - other.0).0
    }

    /// Same direction up to `tol` radians, treating 0 and π as equal.
    pub fn approx_eq(self, other: PolAngle, tol: f64) -> bool {
        let d = self.minus(other);
        d <= tol || PI - d <= tol
    }
}

impl From<PolAngle> for f64 {
    fn from(a: PolAngle) -> f64 {
        a.0
    }
}

impl From<f64> for PolAngle {
    fn from(rad: f64) -> Self {
        PolAngle::from_radians(rad)
    }
}

impl fmt::Display for PolAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.degrees())
    }
}

/// A two-channel linear analyzer. `+` is the primary angle, `-` its orthogonal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub primary: PolAngle,
}

impl Basis {
    pub fn new(primary: PolAngle) -> Self {
        Basis { primary }
    }

    pub fn from_degrees(deg: f64) -> Self {
        Basis::new(PolAngle::from_degrees(deg))
    }

    pub fn orthogonal(self) -> PolAngle {
        self.primary.orthogonal()
    }

    pub fn approx_eq(self, other: Basis) -> bool {
        self.primary.approx_eq(other.primary, ANGLE_TOLERANCE)
    }
}

/// Tolerance used when matching bases read back from files.
pub const ANGLE_TOLERANCE: f64 = 1e-9;

/// A `±1` measurement outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];
}

/// Polarization correlations of the (possibly imperfect) singlet pair.
///
/// The state is described by a diagonal correlation tensor restricted to the
/// linear great circle: `t_z` along the (H,V) axis and `t_x` along the (+,−)
/// axis. The ideal singlet has `t_z = t_x = 1`. Single-side marginals are
/// always unbiased.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSource {
    pub t_z: f64,
    pub t_x: f64,
}

impl PairSource {
    pub fn new(t_z: f64, t_x: f64) -> Result<Self> {
        for (name, v) in [("t_z", t_z), ("t_x", t_x)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(name, alloc::format!("{v} not in [0, 1]")));
            }
        }
        Ok(PairSource { t_z, t_x })
    }

    pub const fn ideal() -> Self {
        PairSource { t_z: 1.0, t_x: 1.0 }
    }

    /// `E(α, β) = −(t_z cos2α cos2β + t_x sin2α sin2β)`.
    pub fn pair_correlation(&self, alpha: PolAngle, beta: PolAngle) -> f64 {
        let (sa, ca) = libm::sincos(2.0 * alpha.radians());
        let (sb, cb) = libm::sincos(2.0 * beta.radians());
        -(self.t_z * ca * cb + self.t_x * sa * sb)
    }

    /// Probability of outcome `a` on photon A (analyzed at `alpha`) together
    /// with outcome `b` on photon B (analyzed at `theta`).
    pub fn joint_outcome_probability(
        &self,
        alpha: PolAngle,
        theta: PolAngle,
        a: Outcome,
        b: Outcome,
    ) -> f64 {
        0.25 * (1.0 + a.sign() * b.sign() * self.pair_correlation(alpha, theta))
    }
}

impl Default for PairSource {
    fn default() -> Self {
        PairSource::ideal()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_4, FRAC_PI_8};
    use proptest::prelude::*;

    #[test]
    fn angle_normalization() {
        assert_eq!(PolAngle::from_degrees(180.0).radians(), 0.0);
        assert!((PolAngle::from_degrees(-45.0).degrees() - 135.0).abs() < 1e-12);
        assert!((PolAngle::from_degrees(112.5).degrees() - 112.5).abs() < 1e-12);
        let o = PolAngle::from_degrees(22.5).orthogonal();
        assert!((o.degrees() - 112.5).abs() < 1e-12);
        assert!(PolAngle::from_radians(-1e-18).radians() < PI);
    }

    #[test]
    fn correlation_examples() {
        let ideal = PairSource::ideal();
        let h = PolAngle::HORIZONTAL;
        assert_eq!(ideal.pair_correlation(h, h), -1.0);
        assert!(ideal.pair_correlation(h, PolAngle::from_radians(FRAC_PI_4)).abs() < 1e-15);

        let calibrated = PairSource::new(0.8419, 0.9456).unwrap();
        assert!((calibrated.pair_correlation(h, h) + 0.8419).abs() < 1e-15);
    }

    #[test]
    fn joint_probability_examples() {
        let ideal = PairSource::ideal();
        let h = PolAngle::HORIZONTAL;
        let p = |theta, a, b| ideal.joint_outcome_probability(h, theta, a, b);
        assert!((p(h, Outcome::Plus, Outcome::Minus) - 0.5).abs() < 1e-15);
        assert!(p(h, Outcome::Plus, Outcome::Plus).abs() < 1e-15);
        let eighth = PolAngle::from_radians(FRAC_PI_8);
        let expected = 0.25 * (1.0 - core::f64::consts::SQRT_2 / 2.0);
        assert!((p(eighth, Outcome::Plus, Outcome::Plus) - expected).abs() < 1e-15);
        let total: f64 = Outcome::BOTH
            .iter()
            .flat_map(|&a| Outcome::BOTH.iter().map(move |&b| (a, b)))
            .map(|(a, b)| p(eighth, a, b))
            .sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range_source() {
        assert!(PairSource::new(1.1, 0.5).is_err());
        assert!(PairSource::new(0.5, -0.1).is_err());
    }

    fn source() -> impl Strategy<Value = PairSource> {
        (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(z, x)| PairSource::new(z, x).unwrap())
    }

    fn angle() -> impl Strategy<Value = f64> {
        -10.0..10.0f64
    }

    proptest! {
        #[test]
        fn correlation_bounded(src in source(), a in angle(), b in angle()) {
            let e = src.pair_correlation(PolAngle::from_radians(a), PolAngle::from_radians(b));
            prop_assert!(e.abs() <= src.t_z.max(src.t_x) + 1e-12);
        }

        #[test]
        fn probabilities_sum_to_one_with_flat_marginals(src in source(), a in angle(), t in angle()) {
            let (a, t) = (PolAngle::from_radians(a), PolAngle::from_radians(t));
            let mut total = 0.0;
            for oa in Outcome::BOTH {
                let marginal: f64 = Outcome::BOTH
                    .iter()
                    .map(|&ob| src.joint_outcome_probability(a, t, oa, ob))
                    .sum();
                prop_assert!((marginal - 0.5).abs() < 1e-12);
                total += marginal;
            }
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn pi_periodic(src in source(), a in angle(), b in angle()) {
            let e = |x: f64, y: f64| src.pair_correlation(PolAngle::from_radians(x), PolAngle::from_radians(y));
            prop_assert!((e(a, b) - e(a + PI, b)).abs() < 1e-12);
            prop_assert!((e(a, b) - e(a, b + PI)).abs() < 1e-12);
        }

        #[test]
        fn ideal_singlet_rotation_invariant(a in angle(), b in angle(), phi in angle()) {
            let src = PairSource::ideal();
            let e = |x: f64, y: f64| src.pair_correlation(PolAngle::from_radians(x), PolAngle::from_radians(y));
            prop_assert!((e(a, b) - e(a + phi, b + phi)).abs() < 1e-12);
        }

        #[test]
        fn orthogonal_is_an_involution(a in angle()) {
            let angle = PolAngle::from_radians(a);
            prop_assert!(angle.orthogonal().orthogonal().approx_eq(angle, 1e-12));
            prop_assert!(angle.radians() >= 0.0 && angle.radians() < PI);
        }
    }
}
