use alloc::format;
use alloc::string::ToString;

use super::{VisibilityEstimate, VisibilityMethod};
use crate::polarization::PolAngle;
use crate::{Error, Result};

pub const MIN_SCAN_POINTS: usize = 8;
/// Widest allowed hole in the scan, reduced onto the 180° fringe period.
const MAX_GAP_DEG: f64 = 45.0;
const MAX_ABS_VISIBILITY: f64 = 1.05;

#[derive(Clone, Debug, PartialEq)]
pub struct FringeFit {
    pub visibility: VisibilityEstimate,
    /// Mean count `C`.
    pub offset: f64,
    /// Angle of the fringe maximum.
    pub phase: PolAngle,
}

/// Weighted linear least squares of `N(α) = C·[1 + V·cos 2(α − α₀)]` on the
/// `(1, cos 2α, sin 2α)` design with Poisson weights `1/max(N, 1)`.
///
/// `scan` holds `(α in degrees, count)`. The points must cover the 180°
/// fringe period with no gap wider than 45°.
pub fn visibility_fringe_fit(label: &str, scan: &[(f64, f64)]) -> Result<FringeFit> {
    if scan.len() < MIN_SCAN_POINTS {
        return Err(Error::FitFailure(format!(
            "need at least {MIN_SCAN_POINTS} scan points, got {}",
            scan.len()
        )));
    }
    check_coverage(scan)?;

    let mut normal = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for &(deg, n) in scan {
        if !(n >= 0.0) || !n.is_finite() {
            return Err(Error::FitFailure(format!("invalid count {n} at {deg} deg")));
        }
        let (s, c) = libm::sincos(2.0 * deg.to_radians());
        let row = [1.0, c, s];
        let w = 1.0 / n.max(1.0);
        for i in 0..3 {
            rhs[i] += w * row[i] * n;
            for j in 0..3 {
                normal[i][j] += w * row[i] * row[j];
            }
        }
    }
    let cov = invert3(normal).ok_or_else(|| Error::FitFailure("singular design".to_string()))?;
    let coef: [f64; 3] = core::array::from_fn(|i| (0..3).map(|j| cov[i][j] * rhs[j]).sum());

    let [c0, c1, c2] = coef;
    if !(c0 > 0.0) {
        return Err(Error::FitFailure(format!("non-positive mean count {c0}")));
    }
    let amp = libm::hypot(c1, c2);
    let v = amp / c0;
    if !(v <= MAX_ABS_VISIBILITY) {
        return Err(Error::FitFailure(format!("visibility {v} out of range")));
    }

    let var = if amp > 1e-12 * c0 {
        let grad = [-v / c0, c1 / (c0 * amp), c2 / (c0 * amp)];
        (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| grad[i] * cov[i][j] * grad[j])
            .sum::<f64>()
    } else {
        // no preferred phase; use the mean amplitude variance
        0.5 * (cov[1][1] + cov[2][2]) / (c0 * c0)
    };

    Ok(FringeFit {
        visibility: VisibilityEstimate {
            label: label.to_string(),
            value: v,
            sigma: libm::sqrt(var.max(0.0)),
            method: VisibilityMethod::FringeFit,
        },
        offset: c0,
        phase: PolAngle::from_radians(0.5 * libm::atan2(c2, c1)),
    })
}

fn check_coverage(scan: &[(f64, f64)]) -> Result<()> {
    let mut reduced: alloc::vec::Vec<f64> = scan.iter().map(|&(d, _)| PolAngle::from_degrees(d).degrees()).collect();
    reduced.sort_by(|a, b| a.total_cmp(b));
    let wrap = reduced[0] + 180.0 - reduced[reduced.len() - 1];
    let widest = reduced.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max);
    if widest > MAX_GAP_DEG {
        return Err(Error::FitFailure(format!(
            "scan leaves a {widest:.1} deg gap in the fringe period"
        )));
    }
    Ok(())
}

fn invert3(m: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    if !(det.abs() > 1e-12 * scale * scale * scale) {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn synthetic(v: f64, phase_deg: f64, points: usize) -> Vec<(f64, f64)> {
        (0..points)
            .map(|i| {
                let a = 180.0 * i as f64 / points as f64;
                (a, 100.0 * (1.0 + v * libm::cos(2.0 * (a - phase_deg).to_radians())))
            })
            .collect()
    }

    #[test]
    fn recovers_noiseless_model() {
        let fit = visibility_fringe_fit("HV", &synthetic(0.6, 0.0, 12)).unwrap();
        assert!((fit.visibility.value - 0.6).abs() < 1e-9);
        assert!(fit.visibility.sigma < 0.1);
        assert!((fit.offset - 100.0).abs() < 1e-9);
        assert!(fit.phase.approx_eq(PolAngle::HORIZONTAL, 1e-9));

        let fit = visibility_fringe_fit("HV", &synthetic(0.3, 70.0, 9)).unwrap();
        assert!((fit.visibility.value - 0.3).abs() < 1e-9);
        assert!((fit.phase.degrees() - 70.0).abs() < 1e-6);
    }

    #[test]
    fn constant_scan_has_zero_visibility() {
        let scan: Vec<(f64, f64)> = (0..12).map(|i| (15.0 * i as f64, 100.0)).collect();
        let fit = visibility_fringe_fit("HV", &scan).unwrap();
        assert!(fit.visibility.value.abs() < 1e-12);
    }

    #[test]
    fn inverse_is_correct() {
        let m = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        let inv = invert3(m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let x: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((x - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_sparse_or_narrow_scans() {
        assert!(visibility_fringe_fit("x", &synthetic(0.5, 0.0, 6)).is_err());
        let narrow: Vec<(f64, f64)> = (0..10).map(|i| (5.0 * i as f64, 100.0)).collect();
        assert!(visibility_fringe_fit("x", &narrow).is_err());
    }

    #[test]
    fn rejects_unphysical_visibility() {
        let scan: Vec<(f64, f64)> = (0..12)
            .map(|i| {
                let a = 15.0 * i as f64;
                (a, 100.0 * (1.0 + 1.5 * libm::cos(2.0 * a.to_radians())))
            })
            .collect();
        assert!(matches!(visibility_fringe_fit("x", &scan), Err(Error::FitFailure(_))));
    }
}
