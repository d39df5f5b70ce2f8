//! Numerical point canonical transformation z = ∫dx/(1+mu) + z0 and the
//! wavefunction rescaling phi = chi / sqrt(1+mu) that turns the deformed
//! Hamiltonian into the ordinary one in z.

use std::cell::RefCell;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ComplexPolynomial, Contour, PhysicalConstants, QuasiFreeParams, SINGULAR_TOL};
use crate::operators::{PotentialSpec, WavefunctionTable};
use crate::quadrature::{integrate_real_line, quadrature, QuadratureRule};
use crate::spectral::{solve_bound_states, ContourChoice, SolveOptions};

/// z sampled on the nodes of a contour.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PCTMap {
    pub contour: Contour,
    pub z_values: Vec<Complex64>,
    pub z0: Complex64,
}

impl PCTMap {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re_x,im_x,re_z,im_z\n");
        for (x, z) in self.contour.points().iter().zip(&self.z_values) {
            out.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e}\n", x.re, x.im, z.re, z.im));
        }
        out
    }

    /// Same map under another gauge constant.
    pub fn regauged(&self, z0: Complex64) -> Self {
        let shift = z0 - self.z0;
        Self { contour: self.contour, z_values: self.z_values.iter().map(|z| z + shift).collect(), z0 }
    }
}

fn segment(
    inv: &impl Fn(Complex64) -> Result<Complex64>,
    from: Complex64,
    length: f64,
    rule: &QuadratureRule,
) -> Result<Complex64> {
    if length == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (a, b, sign) = if length > 0.0 { (0.0, length, 1.0) } else { (length, 0.0, -1.0) };
    let failure = RefCell::new(None);
    let value = quadrature(
        |t| match inv(from + t) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        a,
        b,
        rule,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(sign * value?)
}

/// z_j = z0 + ∫ dx/(1+mu) from the contour midpoint to x_j, one adaptive
/// quadrature per grid segment.
pub fn numeric_z_map(mu: &ComplexPolynomial, contour: &Contour, z0: Complex64, rule: &QuadratureRule) -> Result<PCTMap> {
    contour.check_nonsingular(mu)?;
    let one_plus = mu.one_plus();
    let inv = |x: Complex64| -> Result<Complex64> {
        let d = one_plus.eval(x);
        if d.norm() < SINGULAR_TOL {
            return Err(Error::SingularMomentum { x, modulus: d.norm() });
        }
        Ok(1.0 / d)
    };
    let n = contour.len();
    let h = contour.spacing();
    let anchor = n / 2;
    let mid = contour.midpoint();
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    z[anchor] = z0 + segment(&inv, mid, contour.point(anchor as isize).re - mid.re, rule)?;
    for j in anchor + 1..n {
        z[j] = z[j - 1] + segment(&inv, contour.point(j as isize - 1), h, rule)?;
    }
    for j in (0..anchor).rev() {
        z[j] = z[j + 1] + segment(&inv, contour.point(j as isize + 1), -h, rule)?;
    }
    Ok(PCTMap { contour: *contour, z_values: z, z0 })
}

/// chi sampled on the (non-uniform) z grid of a map, with the x nodes kept
/// for evaluating V(x(z)).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZTable {
    pub x: Vec<Complex64>,
    pub z: Vec<Complex64>,
    pub chi: Vec<Complex64>,
}

/// sqrt(1+mu) at every node, continued from the principal root at the
/// contour middle.
fn continuous_sqrt(mu: &ComplexPolynomial, contour: &Contour) -> Result<Vec<Complex64>> {
    let one_plus = mu.one_plus();
    let n = contour.len();
    let mut roots = Vec::with_capacity(n);
    for x in contour.points() {
        let v = one_plus.eval(x);
        if v.norm() < SINGULAR_TOL {
            return Err(Error::SingularMomentum { x, modulus: v.norm() });
        }
        roots.push(v.sqrt());
    }
    let anchor = n / 2;
    for j in anchor + 1..n {
        if (roots[j] - roots[j - 1]).norm() > (roots[j] + roots[j - 1]).norm() {
            roots[j] = -roots[j];
        }
    }
    for j in (0..anchor).rev() {
        if (roots[j] - roots[j + 1]).norm() > (roots[j] + roots[j + 1]).norm() {
            roots[j] = -roots[j];
        }
    }
    Ok(roots)
}

fn check_same_contour(phi: &WavefunctionTable, map: &PCTMap) -> Result<()> {
    if phi.contour() != &map.contour {
        return Err(Error::InvalidParameter("wavefunction and z-map live on different contours".into()));
    }
    Ok(())
}

/// chi_j = phi_j sqrt(1 + mu(x_j)).
pub fn decompose_wavefunction(mu: &ComplexPolynomial, phi: &WavefunctionTable, map: &PCTMap) -> Result<ZTable> {
    check_same_contour(phi, map)?;
    let roots = continuous_sqrt(mu, &map.contour)?;
    Ok(ZTable {
        x: map.contour.points(),
        z: map.z_values.clone(),
        chi: phi.values().iter().zip(&roots).map(|(f, r)| f * r).collect(),
    })
}

/// Inverse of [`decompose_wavefunction`].
pub fn recompose_wavefunction(mu: &ComplexPolynomial, chi: &ZTable, map: &PCTMap) -> Result<WavefunctionTable> {
    if chi.chi.len() != map.contour.len() {
        return Err(Error::LengthMismatch { expected: map.contour.len(), got: chi.chi.len() });
    }
    let roots = continuous_sqrt(mu, &map.contour)?;
    let values = chi.chi.iter().zip(&roots).map(|(c, r)| c / r).collect();
    WavefunctionTable::new(map.contour, values, "recomposed")
}

/// sup over interior nodes of |-(hbar^2/2m) chi'' + (V - E) chi|, with
/// chi'' from three-point differences on the unequal z spacing.
pub fn zspace_residual(chi: &ZTable, energy: f64, v: &PotentialSpec, c: &PhysicalConstants) -> Result<f64> {
    let n = chi.z.len();
    if chi.chi.len() != n || chi.x.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: chi.chi.len().min(chi.x.len()) });
    }
    let k = c.kinetic();
    let mut worst = 0.0f64;
    for j in 1..n.saturating_sub(1) {
        let h1 = chi.z[j] - chi.z[j - 1];
        let h2 = chi.z[j + 1] - chi.z[j];
        let second = 2.0 * (chi.chi[j + 1] * h1 - chi.chi[j] * (h1 + h2) + chi.chi[j - 1] * h2) / (h1 * h2 * (h1 + h2));
        let r = -k * second + (v.eval(chi.x[j]) - energy) * chi.chi[j];
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceLevel {
    pub n: usize,
    /// Two-grid extrapolated x-space eigenvalue.
    pub x_space: f64,
    /// Box energy from the numerically integrated z-width.
    pub z_space: f64,
    pub deviation: f64,
    pub convergence_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub z_width: f64,
    pub levels: Vec<InvarianceLevel>,
    pub accuracy: f64,
    pub pass: bool,
}

/// Width of the z-box, ∫ dx/(1+mu) over the whole shifted line.
pub fn z_width(params: &QuasiFreeParams, rule: &QuadratureRule) -> Result<f64> {
    let mu = params.mu().one_plus();
    let scale = params.omega() / (params.alpha() * params.alpha());
    Ok(integrate_real_line(|xi| 1.0 / mu.eval(params.x_from_xi(xi)), scale, rule)?.re)
}

/// Compare x-space eigenvalues with hbar^2 n^2 pi^2 / (2 m W^2), W the
/// z-width of the mapped line.
pub fn energy_invariance_check(
    params: &QuasiFreeParams,
    n_levels: usize,
    c: &PhysicalConstants,
    accuracy: f64,
) -> Result<InvarianceReport> {
    if n_levels == 0 {
        return Err(Error::InvalidParameter("n_levels must be at least 1".into()));
    }
    let width = z_width(params, &QuadratureRule::default())?;
    let states = solve_bound_states(
        &params.mu(),
        &PotentialSpec::Zero,
        c,
        ContourChoice::Shifted,
        n_levels,
        accuracy.max(0.0),
        &SolveOptions::default(),
    )?;
    let levels: Vec<InvarianceLevel> = (0..n_levels)
        .map(|k| {
            let n = k + 1;
            let z_space = c.hbar * c.hbar * (n as f64 * std::f64::consts::PI / width).powi(2) / (2.0 * c.mass);
            let x_space = states.report.extrapolated[k].re;
            InvarianceLevel {
                n,
                x_space,
                z_space,
                deviation: (x_space - z_space).abs() / z_space,
                convergence_estimate: states.report.convergence_estimate[k],
            }
        })
        .collect();
    let pass = accuracy > 0.0 && levels.iter().all(|l| l.deviation < accuracy);
    Ok(InvarianceReport { z_width: width, levels, accuracy, pass })
}
