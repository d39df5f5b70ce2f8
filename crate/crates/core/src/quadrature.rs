//! Composite quadrature with panel doubling.
//!
//! Panel rules are registered by name behind [`QuadratureScheme`]; a
//! [`QuadratureRule`] picks one and sets the starting panel count and the
//! convergence tolerance.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DOUBLINGS: usize = 20;

/// Gauss-Legendre points per panel.
const GL_POINTS: usize = 16;

/// Closed rules never evaluate exactly at a compactified infinity.
const ENDPOINT_PULLBACK: f64 = 1e-12;

/// A panel rule: estimate of the integral over [a, b] split in `panels`.
pub trait QuadratureScheme: Send + Sync {
    fn name(&self) -> &'static str;

    fn composite(&self, f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, panels: usize) -> Complex64;
}

pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [-1, 1] by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

impl QuadratureScheme for GaussLegendre {
    fn name(&self) -> &'static str {
        "gauss_legendre"
    }

    fn composite(&self, f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, panels: usize) -> Complex64 {
        let width = (b - a) / panels as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..panels {
            let mid = a + (k as f64 + 0.5) * width;
            let half = width / 2.0;
            let panel: Complex64 = self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(&t, &w)| f(mid + half * t) * w)
                .sum();
            total += panel * half;
        }
        total
    }
}

pub struct Simpson;

impl QuadratureScheme for Simpson {
    fn name(&self) -> &'static str {
        "simpson"
    }

    fn composite(&self, f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, panels: usize) -> Complex64 {
        let h = (b - a) / panels as f64;
        let mut total = f(a) + f(b);
        for k in 0..panels {
            let x0 = a + k as f64 * h;
            total += 4.0 * f(x0 + h / 2.0);
            if k > 0 {
                total += 2.0 * f(x0);
            }
        }
        total * (h / 6.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureKind {
    #[default]
    GaussLegendre,
    Simpson,
}

impl QuadratureKind {
    pub fn name(&self) -> &'static str {
        match self {
            QuadratureKind::GaussLegendre => "gauss_legendre",
            QuadratureKind::Simpson => "simpson",
        }
    }
}

fn registry() -> &'static [Box<dyn QuadratureScheme>] {
    static SCHEMES: OnceLock<Vec<Box<dyn QuadratureScheme>>> = OnceLock::new();
    SCHEMES.get_or_init(|| vec![Box::new(GaussLegendre::new(GL_POINTS)), Box::new(Simpson)])
}

/// Look a scheme up by its registered name.
pub fn lookup(name: &str) -> Option<&'static dyn QuadratureScheme> {
    registry().iter().find(|s| s.name() == name).map(|s| s.as_ref())
}

pub fn scheme_names() -> Vec<&'static str> {
    registry().iter().map(|s| s.name()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub panels: usize,
    pub adaptive_tol: f64,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self { kind: QuadratureKind::GaussLegendre, panels: 4, adaptive_tol: 1e-13 }
    }
}

impl QuadratureRule {
    pub fn new(kind: QuadratureKind, panels: usize, adaptive_tol: f64) -> Result<Self> {
        if panels == 0 {
            return Err(Error::InvalidParameter("quadrature needs at least one panel".into()));
        }
        if !(adaptive_tol.is_finite() && adaptive_tol > 0.0) {
            return Err(Error::InvalidParameter("quadrature tolerance must be positive".into()));
        }
        Ok(Self { kind, panels, adaptive_tol })
    }

    pub fn scheme(&self) -> &'static dyn QuadratureScheme {
        lookup(self.kind.name()).expect("every QuadratureKind is registered")
    }
}

/// Integrate over [a, b], doubling panels until two successive estimates
/// differ by less than `tol * (1 + |estimate|)`.
pub fn quadrature<F>(f: F, a: f64, b: f64, rule: &QuadratureRule) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if !(a < b) {
        return Err(Error::InvalidParameter(format!("quadrature interval [{a}, {b}] is empty")));
    }
    let scheme = rule.scheme();
    let mut panels = rule.panels.max(1);
    let mut previous = scheme.composite(&f, a, b, panels);
    let mut last_change = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        panels *= 2;
        let current = scheme.composite(&f, a, b, panels);
        last_change = (current - previous).norm();
        if last_change < rule.adaptive_tol * (1.0 + current.norm()) {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::NoQuadratureConvergence { doublings: MAX_DOUBLINGS, last_change })
}

/// Integral over the whole real line through xi = scale * tan(theta).
pub fn integrate_real_line<F>(f: F, scale: f64, rule: &QuadratureRule) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let edge = FRAC_PI_2 * (1.0 - ENDPOINT_PULLBACK);
    quadrature(
        |theta: f64| {
            let theta = theta.clamp(-edge, edge);
            let c = theta.cos();
            f(scale * theta.tan()) * (scale / (c * c))
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        rule,
    )
}

/// Integral over [0, inf) through t = scale * tan(theta).
pub fn integrate_half_line<F>(f: F, scale: f64, rule: &QuadratureRule) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let edge = FRAC_PI_2 * (1.0 - ENDPOINT_PULLBACK);
    quadrature(
        |theta: f64| {
            let theta = theta.min(edge);
            let c = theta.cos();
            f(scale * theta.tan()) * (scale / (c * c))
        },
        0.0,
        FRAC_PI_2,
        rule,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn gauss_legendre_nodes() {
        let gl = GaussLegendre::new(GL_POINTS);
        let wsum: f64 = gl.weights().iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // exact for x^30
        let m: f64 = gl.nodes().iter().zip(gl.weights()).map(|(x, w)| w * x.powi(30)).sum();
        assert!((m - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn sine_integral() {
        for kind in [QuadratureKind::GaussLegendre, QuadratureKind::Simpson] {
            let rule = QuadratureRule { kind, ..Default::default() };
            let v = quadrature(|x| re(x.sin()), 0.0, PI, &rule).unwrap();
            assert!((v.re - 2.0).abs() < 1e-12, "{kind:?}: {v}");
        }
    }

    #[test]
    fn lorentzian_over_real_line() {
        let (alpha, beta) = (1.0f64, 0.5f64);
        let omega = alpha.hypot(beta);
        let f = |xi: f64| re((omega / PI) / (1.0 + beta * beta / (alpha * alpha) + alpha * alpha * xi * xi));
        let v = integrate_real_line(f, 1.0 / alpha, &QuadratureRule::default()).unwrap();
        assert!((v.re - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn odd_integrand_vanishes() {
        let v = quadrature(|x| re(x * (x * x).cos()), -1.0, 1.0, &QuadratureRule::default()).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(scheme_names(), vec!["gauss_legendre", "simpson"]);
        assert!(lookup("trapezoid").is_none());
        assert_eq!(QuadratureRule::default().scheme().name(), "gauss_legendre");
    }

    #[test]
    fn non_convergent_integrand_reported() {
        // Oscillates on a scale no panel count here resolves.
        let rule = QuadratureRule { kind: QuadratureKind::Simpson, panels: 1, adaptive_tol: 1e-300 };
        let err = quadrature(|x| re((1e9 * x).sin()), 0.0, 1.0, &rule).unwrap_err();
        assert!(matches!(err, Error::NoQuadratureConvergence { .. }));
    }

    #[test]
    fn empty_interval_rejected() {
        assert!(quadrature(|x| re(x), 1.0, 1.0, &QuadratureRule::default()).is_err());
    }
}
