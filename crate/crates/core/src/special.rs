//! Principal-branch complex arctangent.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Minimum distance to a branch cut of arctan before we refuse to evaluate.
pub const BRANCH_CUT_TOL: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Distance from `w` to the cuts i[1, inf) and -i[1, inf).
pub fn arctan_cut_distance(w: Complex64) -> f64 {
    if w.im.abs() >= 1.0 {
        w.re.abs()
    } else {
        w.re.hypot(1.0 - w.im.abs())
    }
}

/// arctan(w) = (i/2)[ln(1 - iw) - ln(1 + iw)] with principal logarithms.
///
/// Continuous everywhere off the two cuts on the imaginary axis with
/// |Im w| >= 1.
pub fn arctan(w: Complex64) -> Result<Complex64> {
    if arctan_cut_distance(w) < BRANCH_CUT_TOL {
        return Err(Error::BranchCutProximity(w));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(I / 2.0 * ((one - I * w).ln() - (one + I * w).ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn agrees_with_real_atan() {
        for &t in &[-1e6, -3.0, -1.0, -0.2, 0.0, 1e-9, 0.5, 1.0, 40.0, 1e8] {
            let z = arctan(Complex64::new(t, 0.0)).unwrap();
            assert!((z.re - t.atan()).abs() <= 1e-15 * (1.0 + t.atan().abs()));
            assert_eq!(z.im, 0.0);
        }
        assert!((arctan(Complex64::new(1.0, 0.0)).unwrap().re - FRAC_PI_4).abs() < 1e-16);
    }

    #[test]
    fn imaginary_argument_gives_artanh() {
        let z = arctan(Complex64::new(0.0, 1.0 / 2f64.sqrt())).unwrap();
        assert!(z.re.abs() < 1e-16);
        assert!((z.im - (1.0 / 2f64.sqrt()).atanh()).abs() < 1e-15);
    }

    #[test]
    fn matches_library_principal_branch() {
        for &(re, im) in &[(0.3, 0.4), (-2.0, 0.9), (5.0, -0.99), (0.01, -0.5), (-0.7, 3.0)] {
            let w = Complex64::new(re, im);
            assert!((arctan(w).unwrap() - w.atan()).norm() < 1e-14, "w = {w}");
        }
    }

    #[test]
    fn derivative_is_one_over_one_plus_square() {
        let w = Complex64::new(0.8, 0.45);
        let h = 1e-5;
        let num = (arctan(w + h).unwrap() - arctan(w - h).unwrap()) / (2.0 * h);
        assert!((num - 1.0 / (1.0 + w * w)).norm() < 1e-9);
    }

    #[test]
    fn refuses_points_near_cuts() {
        assert!(matches!(arctan(Complex64::new(0.0, 1.0)), Err(Error::BranchCutProximity(_))));
        assert!(matches!(arctan(Complex64::new(1e-9, -2.5)), Err(Error::BranchCutProximity(_))));
        assert!(arctan(Complex64::new(1e-6, -2.5)).is_ok());
    }
}
