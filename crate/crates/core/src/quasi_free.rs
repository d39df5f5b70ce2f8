//! Closed forms for the quasi-free particle, mu(x) = alpha^2 x^2 + 2i beta x,
//! V = 0.
//!
//! Everything here is evaluated directly from the analytic expressions and
//! serves as the reference the numerical modules are tested against.

use std::cell::{Cell, RefCell};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{PhysicalConstants, QuasiFreeParams};
use crate::quadrature::{integrate_real_line, QuadratureRule};
use crate::special::{arctan, BRANCH_CUT_TOL};

const RECONSTRUCTION_TOL: f64 = 1e-10;

/// Real and imaginary parts of z(x) = zeta + i eta.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZComponents {
    pub zeta: f64,
    pub eta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormalizationConstants {
    pub c1: f64,
    pub c2: f64,
}

/// z(x) = arctan((alpha^2 x + i beta)/omega) / omega.
pub fn z_closed_form(params: &QuasiFreeParams, x: Complex64) -> Result<Complex64> {
    let w = params.omega();
    let a2 = params.alpha() * params.alpha();
    Ok(arctan((a2 * x + Complex64::new(0.0, params.beta())) / w)? / w)
}

/// Split z(x) for real x and check it against
/// tan(omega z) = alpha^2 x/omega + i beta/omega written out in real terms.
pub fn z_components(params: &QuasiFreeParams, x: f64) -> Result<ZComponents> {
    if !x.is_finite() {
        return Err(Error::InvalidParameter("x must be finite".into()));
    }
    let z = z_closed_form(params, Complex64::new(x, 0.0))?;
    let w = params.omega();
    let (a, b) = (w * z.re, w * z.im);
    let denom = (a.cos() * b.cosh()).powi(2) + (a.sin() * b.sinh()).powi(2);
    let re_target = params.alpha() * params.alpha() * x / w;
    let im_target = params.beta() / w;
    let re_back = a.sin() * a.cos() / denom;
    let im_back = b.sinh() * b.cosh() / denom;
    // Near omega*zeta = ±pi/2 the reconstruction amplifies rounding in zeta
    // by ~ (alpha^2 x/omega)^2; allow for that on top of the fixed tolerance.
    let conditioning = 8.0 * f64::EPSILON * (1.0 + re_target * re_target);
    for (back, target) in [(re_back, re_target), (im_back, im_target)] {
        let tol = (RECONSTRUCTION_TOL + conditioning) * (1.0 + target.abs());
        if !((back - target).abs() <= tol) {
            return Err(Error::InvalidParameter(format!(
                "z decomposition failed to reconstruct {target} (got {back}) at x = {x}"
            )));
        }
    }
    Ok(ZComponents { zeta: z.re, eta: z.im })
}

/// E_n = n^2 hbar^2 omega^2 / 2m.
pub fn energy_level(params: &QuasiFreeParams, n: usize, c: &PhysicalConstants) -> f64 {
    let n = n as f64;
    n * n * c.hbar * c.hbar * params.omega() * params.omega() / (2.0 * c.mass)
}

/// C1 = C2 = sqrt(2 omega / pi).
pub fn normalization_constant(params: &QuasiFreeParams) -> NormalizationConstants {
    let c = (2.0 * params.omega() / PI).sqrt();
    NormalizationConstants { c1: c, c2: c }
}

fn check_level(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("level index n starts at 1".into()));
    }
    Ok(())
}

/// chi_n(z): C2 cos(n omega z) for odd n, C1 sin(n omega z) for even n.
pub fn box_eigenfunction(
    params: &QuasiFreeParams,
    n: usize,
    z: Complex64,
    consts: &NormalizationConstants,
) -> Result<Complex64> {
    check_level(n)?;
    let arg = n as f64 * params.omega() * z;
    Ok(if n % 2 == 1 { consts.c2 * arg.cos() } else { consts.c1 * arg.sin() })
}

/// sqrt(1 + mu(x)) on the horizontal line through x.
///
/// Re(1 + mu) is smallest where the line crosses the imaginary axis; when it
/// is positive there the principal root is continuous along the whole line
/// and positive at that crossing.
fn sqrt_one_plus_mu(params: &QuasiFreeParams, x: Complex64) -> Result<Complex64> {
    let a2 = params.alpha() * params.alpha();
    let b = x.im;
    let floor = 1.0 - a2 * b * b - 2.0 * params.beta() * b;
    if floor <= BRANCH_CUT_TOL {
        return Err(Error::BranchCutProximity(x));
    }
    let one_plus = 1.0 + a2 * x * x + Complex64::new(0.0, 2.0 * params.beta()) * x;
    Ok(one_plus.sqrt())
}

/// phi_n(x) = chi_n(z(x)) / sqrt(1 + mu(x)).
pub fn position_eigenfunction(
    params: &QuasiFreeParams,
    n: usize,
    x: Complex64,
    consts: &NormalizationConstants,
) -> Result<Complex64> {
    let root = sqrt_one_plus_mu(params, x)?;
    Ok(box_eigenfunction(params, n, z_closed_form(params, x)?, consts)? / root)
}

/// Momentum eigenfunction with eigenvalue p_eig, unit-normalized on the
/// shifted line: sqrt(omega/pi) (1+mu)^(-1/2) exp(i p_eig z(x) / hbar).
///
/// The phase sign is the one that solves p Phi = p_eig Phi, i.e.
/// (1+mu) Phi' + (alpha^2 x + i beta - i p_eig/hbar) Phi = 0.
pub fn momentum_eigenfunction(
    params: &QuasiFreeParams,
    p_eig: f64,
    x: Complex64,
    c: &PhysicalConstants,
) -> Result<Complex64> {
    let w = params.omega();
    let root = sqrt_one_plus_mu(params, x)?;
    let phase = Complex64::new(0.0, p_eig / c.hbar) * z_closed_form(params, x)?;
    Ok((w / PI).sqrt() / root * phase.exp())
}

/// Scale of the xi = scale * tan(theta) substitution that turns the
/// quasi-free integrands into trigonometric polynomials.
fn xi_scale(params: &QuasiFreeParams) -> f64 {
    params.omega() / (params.alpha() * params.alpha())
}

/// Integrate g(xi, phi_n(xi)) over the shifted line, surfacing the first
/// evaluation error.
fn integrate_shifted<G>(params: &QuasiFreeParams, rule: &QuadratureRule, g: G) -> Result<Complex64>
where
    G: Fn(f64) -> Result<Complex64>,
{
    let failure = RefCell::new(None);
    let value = integrate_real_line(
        |xi| match g(xi) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        xi_scale(params),
        rule,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    value
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CptNorm {
    pub value: Complex64,
    /// sup |Im phi^2| over the quadrature nodes.
    pub cond_i: f64,
    /// -min(0, inf Re phi^2) over the quadrature nodes.
    pub cond_ii: f64,
}

/// Contour norm of phi_n^2 on Im(x) = -beta/alpha^2, plus the reality and
/// positivity defects of the integrand.
pub fn cpt_norm(
    params: &QuasiFreeParams,
    n: usize,
    consts: &NormalizationConstants,
    rule: &QuadratureRule,
) -> Result<CptNorm> {
    check_level(n)?;
    let max_imag = Cell::new(0.0f64);
    let min_real = Cell::new(0.0f64);
    let value = integrate_shifted(params, rule, |xi| {
        let phi = position_eigenfunction(params, n, params.x_from_xi(xi), consts)?;
        let sq = phi * phi;
        max_imag.set(max_imag.get().max(sq.im.abs()));
        min_real.set(min_real.get().min(sq.re));
        Ok(sq)
    })?;
    Ok(CptNorm { value, cond_i: max_imag.get(), cond_ii: -min_real.get() })
}

/// Integral of |Phi_p|^2 along the shifted line.
pub fn momentum_norm(params: &QuasiFreeParams, p_eig: f64, c: &PhysicalConstants, rule: &QuadratureRule) -> Result<f64> {
    let value = integrate_shifted(params, rule, |xi| {
        let phi = momentum_eigenfunction(params, p_eig, params.x_from_xi(xi), c)?;
        Ok(Complex64::new(phi.norm_sqr(), 0.0))
    })?;
    Ok(value.re)
}

/// Overlap of phi_m and phi_n along the shifted line (bilinear, no conjugation).
pub fn overlap(params: &QuasiFreeParams, m: usize, n: usize, rule: &QuadratureRule) -> Result<Complex64> {
    let consts = normalization_constant(params);
    integrate_shifted(params, rule, |xi| {
        let x = params.x_from_xi(xi);
        Ok(position_eigenfunction(params, m, x, &consts)? * position_eigenfunction(params, n, x, &consts)?)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityProfile {
    pub densities: Vec<f64>,
    pub variance: f64,
}

/// |phi_n(xi)|^2 on a symmetric xi grid and the second moment over the
/// whole line.
pub fn density_profile(params: &QuasiFreeParams, n: usize, xi_grid: &[f64]) -> Result<DensityProfile> {
    check_level(n)?;
    let len = xi_grid.len();
    for j in 0..len {
        let (a, b) = (xi_grid[j], xi_grid[len - 1 - j]);
        if !(a.is_finite() && (a + b).abs() <= 1e-12 * (1.0 + a.abs())) {
            return Err(Error::InvalidParameter("xi grid must be finite and symmetric about 0".into()));
        }
    }
    let consts = normalization_constant(params);
    let densities = xi_grid
        .iter()
        .map(|&xi| position_eigenfunction(params, n, params.x_from_xi(xi), &consts).map(|p| p.norm_sqr()))
        .collect::<Result<Vec<f64>>>()?;
    let rule = QuadratureRule::default();
    let variance = integrate_shifted(params, &rule, |xi| {
        let phi = position_eigenfunction(params, n, params.x_from_xi(xi), &consts)?;
        Ok(Complex64::new(xi * xi * phi.norm_sqr(), 0.0))
    })?
    .re;
    Ok(DensityProfile { densities, variance })
}

/// The beta/alpha ratios shown in the confinement figure.
pub const FIG1_RATIOS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
pub const FIG1_LEVELS: [usize; 2] = [1, 2];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig1Curve {
    pub beta_over_alpha: f64,
    pub n: usize,
    pub alpha_xi: Vec<f64>,
    pub density_over_alpha: Vec<f64>,
    /// Second moment in xi.
    pub variance: f64,
}

impl Fig1Curve {
    /// (1/alpha)|phi_n|^2 at xi = 0, or the nearest grid point.
    pub fn peak(&self) -> f64 {
        let j = self
            .alpha_xi
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map_or(0, |(j, _)| j);
        self.density_over_alpha[j]
    }
}

/// `points` samples of alpha*xi on [-extent, extent].
pub fn fig1_grid(extent: f64, points: usize) -> Result<Vec<f64>> {
    if !(extent > 0.0 && extent.is_finite()) || points < 2 {
        return Err(Error::InvalidParameter("figure grid needs extent > 0 and at least 2 points".into()));
    }
    let step = 2.0 * extent / (points - 1) as f64;
    Ok((0..points)
        .map(|j| if 2 * j + 1 == points { 0.0 } else { -extent + j as f64 * step })
        .collect())
}

/// One curve per (beta/alpha, n) in figure order.
pub fn fig1_curves(alpha: f64, alpha_xi: &[f64]) -> Result<Vec<Fig1Curve>> {
    let xi: Vec<f64> = alpha_xi.iter().map(|t| t / alpha).collect();
    let mut curves = Vec::new();
    for &n in &FIG1_LEVELS {
        for &ratio in &FIG1_RATIOS {
            let params = QuasiFreeParams::new(alpha, ratio * alpha)?;
            let profile = density_profile(&params, n, &xi)?;
            curves.push(Fig1Curve {
                beta_over_alpha: ratio,
                n,
                alpha_xi: alpha_xi.to_vec(),
                density_over_alpha: profile.densities.iter().map(|d| d / alpha).collect(),
                variance: profile.variance,
            });
        }
    }
    Ok(curves)
}

pub fn fig1_csv(curves: &[Fig1Curve]) -> String {
    let mut out = String::from("alpha_xi,density_over_alpha,beta_over_alpha,n\n");
    for c in curves {
        for (t, d) in c.alpha_xi.iter().zip(&c.density_over_alpha) {
            out.push_str(&format!("{t:.12e},{d:.12e},{},{}\n", c.beta_over_alpha, c.n));
        }
    }
    out
}
