//! Boundary closures for truncated contours.
//!
//! Beyond ±L the free (V = 0) problem is solved exactly through the point
//! canonical map: with z(x) = ∫dx/(1+mu) and a finite distance
//! d(x) = |z(±inf) - z(x)|, the decaying solution is
//! phi(x) = sin(K d(x)) / (K sqrt(1 + mu(x))), K^2 = 2mE/hbar^2.
//! Ghost nodes past the grid ends are tied to the boundary node through
//! that exterior solution, which removes the O(1/L) truncation error a
//! plain Dirichlet cut leaves behind.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ComplexPolynomial, Contour, PhysicalConstants};
use crate::operators::PotentialSpec;
use crate::quadrature::{integrate_half_line, QuadratureRule};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Free-tail matching when the problem allows it, Dirichlet otherwise.
    #[default]
    Auto,
    /// Zero ghost values past both ends.
    Dirichlet,
    /// Ghost values from the exact exterior free solution.
    FreeTail,
}

impl BoundaryCondition {
    /// Resolve `Auto` for a given problem; errors if `FreeTail` is requested
    /// where it is invalid.
    pub fn resolve(self, mu: &ComplexPolynomial, v: &PotentialSpec) -> Result<Self> {
        let tail_ok = free_tail_applies(mu, v);
        match self {
            BoundaryCondition::Auto if tail_ok => Ok(BoundaryCondition::FreeTail),
            BoundaryCondition::Auto => Ok(BoundaryCondition::Dirichlet),
            BoundaryCondition::FreeTail if !tail_ok => Err(Error::InvalidParameter(
                "free-tail boundary needs V = 0 and deg(mu) >= 2".into(),
            )),
            other => Ok(other),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundaryCondition::Auto => "auto",
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::FreeTail => "free_tail",
        }
    }
}

/// The exterior map converges only if 1/(1+mu) is integrable at infinity.
pub fn free_tail_applies(mu: &ComplexPolynomial, v: &PotentialSpec) -> bool {
    v.is_zero() && mu.degree().is_some_and(|d| d >= 2)
}

/// phi(ghost) / phi(boundary node) for ghosts 1, 2, ... past each end.
#[derive(Clone, Debug, PartialEq)]
pub struct GhostRatios {
    pub left: Vec<Complex64>,
    pub right: Vec<Complex64>,
}

impl GhostRatios {
    pub fn dirichlet(ghosts: usize) -> Self {
        Self { left: vec![Complex64::new(0.0, 0.0); ghosts], right: vec![Complex64::new(0.0, 0.0); ghosts] }
    }
}

/// Distances from the grid ends (and ghost nodes) to z(±inf).
#[derive(Clone, Debug)]
pub struct TailGeometry {
    one_plus_left: Vec<Complex64>,
    one_plus_right: Vec<Complex64>,
    dist_left: Vec<Complex64>,
    dist_right: Vec<Complex64>,
}

impl TailGeometry {
    /// Index 0 is the boundary node, index k the k-th ghost.
    pub fn new(mu: &ComplexPolynomial, contour: &Contour, ghosts: usize) -> Result<Self> {
        let n = contour.len() as isize;
        let one_plus = mu.one_plus();
        let rule = QuadratureRule::default();
        let to_infinity = |x: Complex64, direction: f64| -> Result<Complex64> {
            let scale = 1.0 + x.norm();
            integrate_half_line(|t| 1.0 / one_plus.eval(x + direction * t), scale, &rule)
        };
        let mut g = Self {
            one_plus_left: Vec::with_capacity(ghosts + 1),
            one_plus_right: Vec::with_capacity(ghosts + 1),
            dist_left: Vec::with_capacity(ghosts + 1),
            dist_right: Vec::with_capacity(ghosts + 1),
        };
        for k in 0..=ghosts as isize {
            let xl = contour.point(-k);
            let xr = contour.point(n - 1 + k);
            g.one_plus_left.push(one_plus.eval(xl));
            g.one_plus_right.push(one_plus.eval(xr));
            g.dist_left.push(to_infinity(xl, -1.0)?);
            g.dist_right.push(to_infinity(xr, 1.0)?);
        }
        Ok(g)
    }

    pub fn ghosts(&self) -> usize {
        self.dist_left.len() - 1
    }

    /// Distance in z from the right boundary node to z(+inf).
    pub fn right_distance(&self) -> Complex64 {
        self.dist_right[0]
    }

    pub fn left_distance(&self) -> Complex64 {
        self.dist_left[0]
    }

    pub fn ratios(&self, energy: Complex64, c: &PhysicalConstants) -> GhostRatios {
        let k = (2.0 * c.mass * energy).sqrt() / c.hbar;
        let side = |dist: &[Complex64], one_plus: &[Complex64]| -> Vec<Complex64> {
            let base = dist[0] * sinc(k * dist[0]);
            (1..dist.len())
                .map(|j| (dist[j] * sinc(k * dist[j])) / base * (one_plus[0] / one_plus[j]).sqrt())
                .collect()
        };
        GhostRatios {
            left: side(&self.dist_left, &self.one_plus_left),
            right: side(&self.dist_right, &self.one_plus_right),
        }
    }
}

fn sinc(w: Complex64) -> Complex64 {
    if w.norm() < 1e-4 {
        let w2 = w * w;
        1.0 - w2 / 6.0 + w2 * w2 / 120.0
    } else {
        w.sin() / w
    }
}
