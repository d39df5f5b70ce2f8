//! Matrix discretizations of the Hamiltonian.
//!
//! Tridiagonal: the self-adjoint form -(hbar^2/2m)[(A phi')' + Q phi] + V phi
//! with A = (1+mu)^2 and Q = (1+mu)mu''/2 + mu'^2/4, valid because
//! 2(1+mu)mu' = A'. Dense: the operator as written, with the full stencil.
//! Both treat nodes past the grid ends as ghosts given by [`GhostRatios`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{DenseComplexMatrix, SymTridiagMatrix};
use crate::model::{ComplexPolynomial, Contour, PhysicalConstants};
use crate::operators::{PotentialSpec, StencilScheme};

use super::tail::GhostRatios;

const REALITY_TOL: f64 = 1e-10;

fn real_part(what: &'static str, x: Complex64, v: Complex64) -> Result<f64> {
    if v.im.abs() > REALITY_TOL * v.re.abs().max(1.0) {
        return Err(Error::NonRealCoefficients { what, x, imag: v.im });
    }
    Ok(v.re)
}

/// Guard for the self-adjoint rewrite: d/dx (1+mu)^2 == 2(1+mu)mu'.
fn check_flux_identity(mu: &ComplexPolynomial) -> Result<()> {
    let a = mu.one_plus();
    let lhs = a.mul(&a).derive();
    let rhs = a.mul(&mu.derive()).scale(Complex64::new(2.0, 0.0));
    let defect = lhs.sub(&rhs).max_coeff_norm();
    if defect > 1e-12 * (1.0 + lhs.max_coeff_norm()) {
        return Err(Error::InvalidParameter(format!("flux identity violated by {defect:.3e}")));
    }
    Ok(())
}

/// Symmetric tridiagonal matrix with zero ghosts (Dirichlet one step past ±L).
pub fn assemble_sturm_liouville(
    mu: &ComplexPolynomial,
    v: &PotentialSpec,
    contour: &Contour,
    c: &PhysicalConstants,
) -> Result<SymTridiagMatrix> {
    assemble_sturm_liouville_with(mu, v, contour, c, &GhostRatios::dirichlet(1))
}

pub fn assemble_sturm_liouville_with(
    mu: &ComplexPolynomial,
    v: &PotentialSpec,
    contour: &Contour,
    c: &PhysicalConstants,
    ghosts: &GhostRatios,
) -> Result<SymTridiagMatrix> {
    check_flux_identity(mu)?;
    contour.check_nonsingular(mu)?;
    let n = contour.len();
    let h = contour.spacing();
    let k = c.kinetic();
    let one_plus = mu.one_plus();
    let dmu = mu.derive();
    let ddmu = dmu.derive();

    // A at the n + 1 midpoints x_{j-1/2}, j = 0..=n.
    let mut flux = Vec::with_capacity(n + 1);
    for j in 0..=n as isize {
        let x = (contour.point(j - 1) + contour.point(j)) / 2.0;
        let a = one_plus.eval(x);
        flux.push(real_part("(1+mu)^2", x, a * a)?);
    }
    let mut diag = Vec::with_capacity(n);
    for j in 0..n {
        let x = contour.point(j as isize);
        let a = one_plus.eval(x);
        let d1 = dmu.eval(x);
        let w = -k * (a * ddmu.eval(x) / 2.0 + d1 * d1 / 4.0) + v.eval(x);
        let w = real_part("W", x, w)?;
        diag.push(k * (flux[j] + flux[j + 1]) / (h * h) + w);
    }
    let offdiag = (1..n).map(|j| -k * flux[j] / (h * h)).collect();

    let left = ghosts.left.first().copied().unwrap_or_default();
    let right = ghosts.right.first().copied().unwrap_or_default();
    diag[0] -= k * flux[0] * real_part("ghost ratio", contour.point(-1), left)? / (h * h);
    diag[n - 1] -= k * flux[n] * real_part("ghost ratio", contour.point(n as isize), right)? / (h * h);

    SymTridiagMatrix::new(diag, offdiag)
}

/// Dense complex matrix of the stencil Hamiltonian with zero ghosts.
pub fn assemble_dense(
    mu: &ComplexPolynomial,
    v: &PotentialSpec,
    contour: &Contour,
    c: &PhysicalConstants,
    s: &StencilScheme,
) -> Result<DenseComplexMatrix> {
    assemble_dense_with(mu, v, contour, c, s, &GhostRatios::dirichlet(s.half_width()))
}

/// Per-row coefficient of phi'' and phi' (after the -hbar^2/2m factor).
struct RowCoefficients {
    second: Vec<Complex64>,
    first: Vec<Complex64>,
    local: Vec<Complex64>,
}

fn row_coefficients(
    mu: &ComplexPolynomial,
    v: &PotentialSpec,
    contour: &Contour,
    c: &PhysicalConstants,
) -> RowCoefficients {
    let k = c.kinetic();
    let h = contour.spacing();
    let one_plus = mu.one_plus();
    let dmu = mu.derive();
    let ddmu = dmu.derive();
    let n = contour.len();
    let mut rc = RowCoefficients {
        second: Vec::with_capacity(n),
        first: Vec::with_capacity(n),
        local: Vec::with_capacity(n),
    };
    for x in contour.points() {
        let a = one_plus.eval(x);
        let d1 = dmu.eval(x);
        rc.second.push(-k * a * a / (h * h));
        rc.first.push(-k * 2.0 * a * d1 / h);
        rc.local.push(-k * (a * ddmu.eval(x) / 2.0 + d1 * d1 / 4.0) + v.eval(x));
    }
    rc
}

pub fn assemble_dense_with(
    mu: &ComplexPolynomial,
    v: &PotentialSpec,
    contour: &Contour,
    c: &PhysicalConstants,
    s: &StencilScheme,
    ghosts: &GhostRatios,
) -> Result<DenseComplexMatrix> {
    contour.check_nonsingular(mu)?;
    let n = contour.len();
    let w = s.half_width();
    if ghosts.left.len() < w || ghosts.right.len() < w {
        return Err(Error::InvalidParameter(format!("stencil needs {w} ghost ratios per side")));
    }
    let rc = row_coefficients(mu, v, contour, c);
    let d1 = s.weights(1);
    let d2 = s.weights(2);
    let mut m = DenseComplexMatrix::zeros(n);
    for j in 0..n {
        m.add_to(j, j, rc.local[j]);
        let stencil = d2
            .iter()
            .map(|&(o, wt)| (o, rc.second[j] * wt))
            .chain(d1.iter().map(|&(o, wt)| (o, rc.first[j] * wt)));
        for (o, coef) in stencil {
            let idx = j as isize + o;
            if idx < 0 {
                m.add_to(j, 0, coef * ghosts.left[(-idx - 1) as usize]);
            } else if idx >= n as isize {
                m.add_to(j, n - 1, coef * ghosts.right[(idx - n as isize) as usize]);
            } else {
                m.add_to(j, idx as usize, coef);
            }
        }
    }
    Ok(m)
}
