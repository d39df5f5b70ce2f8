//! Domain types shared by every operator: the complex polynomial that
//! carries the auxiliary function, physical constants, the quasi-free
//! parameter set and horizontal integration contours.

use std::fmt;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default absolute tolerance for coefficient-wise PT tests.
pub const PT_COEFF_TOL: f64 = 1e-12;

/// Contours on which |1 + mu| drops below this are rejected.
pub const SINGULAR_TOL: f64 = 1e-8;

pub(crate) fn ensure_finite(z: Complex64, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} is not finite: {z}")))
    }
}

/// Polynomial with complex coefficients, index = power of x.
///
/// Trailing zeros are trimmed so that the zero polynomial is the empty
/// coefficient list and structural equality matches value equality.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        for c in &coeffs {
            ensure_finite(*c, "polynomial coefficient")?;
        }
        Ok(Self::from_trusted(coeffs))
    }

    fn from_trusted(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| c.re == 0.0 && c.im == 0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_trusted(vec![c])
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn derive(&self) -> Self {
        Self::from_trusted(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// PT image: coefficient k becomes (-1)^k conj(c_k), i.e. p*(-x).
    pub fn pt_reflect(&self) -> Self {
        Self::from_trusted(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 0 { c.conj() } else { -c.conj() })
                .collect(),
        )
    }

    /// True iff the coefficients of p - PT(p) are all within `tol`.
    pub fn is_pt_symmetric(&self, tol: f64) -> bool {
        let reflected = self.pt_reflect();
        let n = self.coeffs.len().max(reflected.coeffs.len());
        (0..n).all(|k| (self.coeff(k) - reflected.coeff(k)).norm() <= tol)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_trusted((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_trusted((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_trusted(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_trusted(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Largest coefficient modulus; used to scale comparisons.
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `1 + self`, the factor that multiplies d/dx in the momentum.
    pub fn one_plus(&self) -> Self {
        self.add(&Self::constant(Complex64::new(1.0, 0.0)))
    }
}

impl fmt::Display for ComplexPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})x"),
                _ => format!("({c})x^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl Serialize for ComplexPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexPolynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        Self::new(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())
            .map_err(D::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter("hbar must be positive".into()));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParameter("mass must be positive".into()));
        }
        Ok(Self { hbar, mass })
    }

    /// hbar^2 / 2m, the kinetic prefactor.
    pub fn kinetic(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

/// Parameters of the quasi-free family mu(x) = alpha^2 x^2 + 2i beta x.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuasiFreeParams {
    alpha: f64,
    beta: f64,
    omega: f64,
}

impl QuasiFreeParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        if !beta.is_finite() {
            return Err(Error::InvalidParameter("beta must be finite".into()));
        }
        Ok(Self { alpha, beta, omega: alpha.hypot(beta) })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// omega = sqrt(alpha^2 + beta^2).
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Imaginary offset -beta/alpha^2 of the contour on which 1 + mu is real.
    pub fn shifted_offset(&self) -> f64 {
        -self.beta / (self.alpha * self.alpha)
    }

    /// Map a real shifted coordinate xi to x = xi - i beta/alpha^2.
    pub fn x_from_xi(&self, xi: f64) -> Complex64 {
        Complex64::new(xi, self.shifted_offset())
    }

    pub fn mu(&self) -> ComplexPolynomial {
        make_quasi_free_mu(self)
    }

    /// Recognise a polynomial of the form [0, 2i beta, alpha^2].
    pub fn from_mu(mu: &ComplexPolynomial, tol: f64) -> Option<Self> {
        if mu.degree() != Some(2) {
            return None;
        }
        let (c0, c1, c2) = (mu.coeff(0), mu.coeff(1), mu.coeff(2));
        if c0.norm() > tol || c1.re.abs() > tol || c2.im.abs() > tol || c2.re <= 0.0 {
            return None;
        }
        Self::new(c2.re.sqrt(), c1.im / 2.0).ok()
    }
}

pub fn make_quasi_free_mu(params: &QuasiFreeParams) -> ComplexPolynomial {
    ComplexPolynomial::from_trusted(vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 2.0 * params.beta),
        Complex64::new(params.alpha * params.alpha, 0.0),
    ])
}

/// Uniform grid on the horizontal line Im(x) = b, symmetric about Re(x) = 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    offset_b: f64,
    half_length: f64,
    n_points: usize,
}

impl Contour {
    pub fn new(offset_b: f64, half_length: f64, n_points: usize) -> Result<Self> {
        if !offset_b.is_finite() {
            return Err(Error::InvalidParameter("contour offset must be finite".into()));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidParameter("contour half-length must be positive".into()));
        }
        if n_points < 3 {
            return Err(Error::InvalidParameter("contour needs at least 3 points".into()));
        }
        Ok(Self { offset_b, half_length, n_points })
    }

    pub fn real_axis(half_length: f64, n_points: usize) -> Result<Self> {
        Self::new(0.0, half_length, n_points)
    }

    /// The real-xi line of the quasi-free family.
    pub fn shifted(params: &QuasiFreeParams, half_length: f64, n_points: usize) -> Result<Self> {
        Self::new(params.shifted_offset(), half_length, n_points)
    }

    pub fn offset(&self) -> f64 {
        self.offset_b
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / (self.n_points - 1) as f64
    }

    /// Real part of grid point j.
    pub fn re_at(&self, j: usize) -> f64 {
        // Mirror the upper half so the grid is exactly symmetric in floating point.
        let n = self.n_points - 1;
        if 2 * j > n {
            -self.re_at(n - j)
        } else {
            -self.half_length + j as f64 * self.spacing()
        }
    }

    /// Grid point x_j; indices past either end extrapolate the uniform grid.
    pub fn point(&self, j: isize) -> Complex64 {
        let re = if j >= 0 && (j as usize) < self.n_points {
            self.re_at(j as usize)
        } else {
            -self.half_length + j as f64 * self.spacing()
        };
        Complex64::new(re, self.offset_b)
    }

    pub fn points(&self) -> Vec<Complex64> {
        (0..self.n_points).map(|j| Complex64::new(self.re_at(j), self.offset_b)).collect()
    }

    /// Same line and length with spacing halved (2N - 1 points).
    pub fn refined(&self) -> Self {
        Self { n_points: 2 * self.n_points - 1, ..*self }
    }

    /// Intersection of the contour with the imaginary axis.
    pub fn midpoint(&self) -> Complex64 {
        Complex64::new(0.0, self.offset_b)
    }

    /// Reject contours that pass within `SINGULAR_TOL` of a zero of 1 + mu.
    pub fn check_nonsingular(&self, mu: &ComplexPolynomial) -> Result<()> {
        let one_plus = mu.one_plus();
        for x in self.points() {
            let modulus = one_plus.eval(x).norm();
            if modulus < SINGULAR_TOL {
                return Err(Error::SingularMomentum { x, modulus });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(pairs: &[(f64, f64)]) -> ComplexPolynomial {
        ComplexPolynomial::new(pairs.iter().map(|&(r, i)| c(r, i)).collect()).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(poly(&[(0.0, 0.0)]).eval(c(3.0, 2.0)), c(0.0, 0.0));
        assert!(poly(&[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]).eval(c(0.0, 1.0)).norm() < 1e-15);
        let mu = QuasiFreeParams::new(1.0, 1.0).unwrap().mu();
        assert!((mu.eval(c(1.0, 0.0)) - c(1.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_polynomial_is_empty() {
        assert!(poly(&[(0.0, 0.0), (0.0, 0.0)]).is_zero());
        assert_eq!(poly(&[(1.0, 0.0), (0.0, 0.0)]).coeffs().len(), 1);
    }

    #[test]
    fn derive_examples() {
        assert!(poly(&[(5.0, 0.0)]).derive().is_zero());
        let mu = QuasiFreeParams::new(1.0, 1.0).unwrap().mu();
        assert_eq!(mu.derive(), poly(&[(0.0, 2.0), (2.0, 0.0)]));
        let p = QuasiFreeParams::new(0.7, -0.3).unwrap();
        assert_eq!(p.mu().derive().derive(), poly(&[(2.0 * 0.7 * 0.7, 0.0)]));
    }

    #[test]
    fn pt_reflect_examples() {
        assert_eq!(poly(&[(0.0, 0.0), (1.0, 0.0)]).pt_reflect(), poly(&[(0.0, 0.0), (-1.0, 0.0)]));
        let mu = QuasiFreeParams::new(1.0, 0.5).unwrap().mu();
        assert_eq!(mu.pt_reflect(), mu);
        assert_eq!(
            poly(&[(0.0, 0.0), (0.0, 0.0), (0.0, 1.0)]).pt_reflect(),
            poly(&[(0.0, 0.0), (0.0, 0.0), (0.0, -1.0)])
        );
    }

    #[test]
    fn pt_symmetry_examples() {
        assert!(QuasiFreeParams::new(1.0, 1.0).unwrap().mu().is_pt_symmetric(PT_COEFF_TOL));
        assert!(!poly(&[(0.0, 0.0), (1.0, 0.0)]).is_pt_symmetric(PT_COEFF_TOL));
        assert!(!poly(&[(0.0, 0.0), (0.0, 0.0), (0.0, 1.0)]).is_pt_symmetric(PT_COEFF_TOL));
    }

    #[test]
    fn quasi_free_mu_examples() {
        let mu = |a, b| QuasiFreeParams::new(a, b).unwrap().mu();
        assert_eq!(mu(1.0, 0.0), poly(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]));
        assert_eq!(mu(1.0, 1.0), poly(&[(0.0, 0.0), (0.0, 2.0), (1.0, 0.0)]));
        assert_eq!(mu(0.5, 0.25), poly(&[(0.0, 0.0), (0.0, 0.5), (0.25, 0.0)]));
    }

    #[test]
    fn quasi_free_round_trip_through_mu() {
        let p = QuasiFreeParams::new(0.5, 0.25).unwrap();
        let back = QuasiFreeParams::from_mu(&p.mu(), 1e-14).unwrap();
        assert!((back.alpha() - 0.5).abs() < 1e-15 && (back.beta() - 0.25).abs() < 1e-15);
        assert!(QuasiFreeParams::from_mu(&poly(&[(0.0, 0.0), (1.0, 0.0)]), 1e-14).is_none());
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(QuasiFreeParams::new(0.0, 1.0).is_err());
        assert!(QuasiFreeParams::new(1.0, f64::NAN).is_err());
        assert!(PhysicalConstants::new(0.0, 1.0).is_err());
        assert!(Contour::new(0.0, 1.0, 2).is_err());
        assert!(ComplexPolynomial::new(vec![c(f64::INFINITY, 0.0)]).is_err());
    }

    #[test]
    fn contour_grid_is_symmetric() {
        let contour = Contour::new(-0.5, 3.0, 8).unwrap();
        let pts = contour.points();
        for j in 0..pts.len() {
            assert_eq!(pts[j].re, -pts[pts.len() - 1 - j].re);
            assert_eq!(pts[j].im, -0.5);
        }
        assert_eq!(pts[0].re, -3.0);
        let refined = contour.refined();
        assert_eq!(refined.len(), 15);
        assert!((refined.spacing() * 2.0 - contour.spacing()).abs() < 1e-15);
    }

    #[test]
    fn serializes_as_pairs() {
        let mu = QuasiFreeParams::new(1.0, 0.5).unwrap().mu();
        let json = serde_json::to_string(&mu).unwrap();
        assert_eq!(json, "[[0.0,0.0],[0.0,1.0],[1.0,0.0]]");
        let back: ComplexPolynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(back, mu);
    }

    #[test]
    fn singular_contour_rejected() {
        // 1 + mu = 1 - x^2 vanishes at x = 1, a grid point of this contour.
        let mu = poly(&[(0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)]);
        let contour = Contour::real_axis(2.0, 5).unwrap();
        assert!(matches!(contour.check_nonsingular(&mu), Err(Error::SingularMomentum { .. })));
    }
}
