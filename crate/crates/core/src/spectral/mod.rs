//! Bound-state spectra of the complexified Hamiltonian.
//!
//! Two interchangeable discretization paths sit behind [`SpectralPath`] and
//! are looked up by name in a [`PathRegistry`]:
//!
//! - `shifted`: the quasi-free family on Im(x) = -beta/alpha^2, where the
//!   operator is a real Sturm-Liouville problem and the matrix is symmetric
//!   tridiagonal;
//! - `real_axis`: any PT-symmetric mu on the real axis, dense complex
//!   stencil matrix, non-Hermitian.
//!
//! Every solve runs on two nested grids (h and h/2) and reports the
//! Richardson-extrapolated values alongside the raw ones.

mod assemble;
mod paths;
mod tail;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ComplexPolynomial, PhysicalConstants};
use crate::operators::{PotentialSpec, WavefunctionTable};

pub use assemble::{assemble_dense, assemble_dense_with, assemble_sturm_liouville, assemble_sturm_liouville_with};
pub use paths::{default_registry, Grid, Level, PathRegistry, Problem, RealAxisPath, ShiftedPath, SpectralPath};
pub use tail::{free_tail_applies, BoundaryCondition, GhostRatios, TailGeometry};

pub const TRIDIAG_REALITY_TOL: f64 = 1e-8;
pub const DENSE_REALITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourChoice {
    Shifted,
    RealAxis,
}

impl ContourChoice {
    pub fn name(&self) -> &'static str {
        match self {
            ContourChoice::Shifted => "shifted",
            ContourChoice::RealAxis => "real_axis",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub offset: f64,
    pub half_length: f64,
    pub n_points: usize,
    pub order: u8,
    pub boundary: BoundaryCondition,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub path: String,
    /// Sorted by real part, ties by imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub is_real: Vec<bool>,
    pub n_real: usize,
    pub broken: bool,
    pub reality_tol: f64,
    pub grid_meta: GridMeta,
    /// Two-grid Richardson values, same order as `eigenvalues`.
    pub extrapolated: Vec<Complex64>,
    /// Relative error estimate of each raw eigenvalue.
    pub convergence_estimate: Vec<f64>,
    pub accuracy_target: f64,
    pub accuracy_reached: bool,
}

impl SpectrumReport {
    pub fn max_imag(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Surface an unmet two-grid accuracy target as an error.
    pub fn require_accuracy(&self) -> Result<()> {
        for (level, &estimate) in self.convergence_estimate.iter().enumerate() {
            if !(estimate <= self.accuracy_target) {
                return Err(Error::AccuracyNotReached { level, estimate, target: self.accuracy_target });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: WavefunctionTable,
}

fn is_real(z: Complex64, tol: f64) -> bool {
    z.im.abs() <= tol * z.re.abs().max(1.0)
}

fn cmp_spectral(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Label eigenvalues real/complex and check that complex ones come in
/// conjugate pairs.
pub fn classify_spectrum(eigs: &[Complex64], reality_tol: f64, grid_meta: GridMeta) -> Result<SpectrumReport> {
    if !(reality_tol > 0.0) {
        return Err(Error::InvalidParameter("reality tolerance must be positive".into()));
    }
    let mut sorted = eigs.to_vec();
    sorted.sort_by(cmp_spectral);
    let flags: Vec<bool> = sorted.iter().map(|&z| is_real(z, reality_tol)).collect();

    let complex: Vec<usize> = (0..sorted.len()).filter(|&i| !flags[i]).collect();
    let mut used = vec![false; sorted.len()];
    for &i in &complex {
        if used[i] {
            continue;
        }
        let target = sorted[i].conj();
        let tol = reality_tol * sorted[i].norm().max(1.0);
        let partner = complex
            .iter()
            .copied()
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| (sorted[a] - target).norm().total_cmp(&(sorted[b] - target).norm()))
            .filter(|&j| (sorted[j] - target).norm() <= tol);
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => return Err(Error::PairingViolation(sorted[i])),
        }
    }

    let n_real = flags.iter().filter(|&&r| r).count();
    Ok(SpectrumReport {
        path: String::new(),
        n_real,
        broken: n_real < sorted.len(),
        is_real: flags,
        eigenvalues: sorted,
        reality_tol,
        grid_meta,
        extrapolated: Vec::new(),
        convergence_estimate: Vec::new(),
        accuracy_target: f64::INFINITY,
        accuracy_reached: true,
    })
}

/// Grid and solver overrides; `None` picks the path's defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub half_length: Option<f64>,
    pub n_points: Option<usize>,
    pub order: Option<u8>,
    pub stencil_richardson: bool,
    pub boundary: BoundaryCondition,
    pub reality_tol: Option<f64>,
    pub eig_tol: f64,
    pub max_iter: usize,
    pub two_grid: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            half_length: None,
            n_points: None,
            order: None,
            stencil_richardson: false,
            boundary: BoundaryCondition::Auto,
            reality_tol: None,
            eig_tol: 1e-15,
            max_iter: 60,
            two_grid: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoundStates {
    pub pairs: Vec<EigenPair>,
    pub report: SpectrumReport,
}

/// Lowest `n_levels` eigenpairs of the Hamiltonian on the chosen contour,
/// with a two-grid convergence estimate checked against `accuracy_target`.
///
/// An unmet target does not fail the call; it is flagged in the report
/// (see [`SpectrumReport::require_accuracy`]).
pub fn solve_bound_states(
    mu: &ComplexPolynomial,
    v: &PotentialSpec,
    c: &PhysicalConstants,
    choice: ContourChoice,
    n_levels: usize,
    accuracy_target: f64,
    opts: &SolveOptions,
) -> Result<BoundStates> {
    let path = default_registry()
        .get(choice.name())
        .ok_or_else(|| Error::InvalidParameter(format!("no spectral path named {}", choice.name())))?;
    solve_with_path(path, mu, v, c, n_levels, accuracy_target, opts)
}

pub fn solve_with_path(
    path: &dyn SpectralPath,
    mu: &ComplexPolynomial,
    v: &PotentialSpec,
    c: &PhysicalConstants,
    n_levels: usize,
    accuracy_target: f64,
    opts: &SolveOptions,
) -> Result<BoundStates> {
    if n_levels == 0 {
        return Err(Error::InvalidParameter("n_levels must be at least 1".into()));
    }
    if !(accuracy_target >= 0.0) {
        return Err(Error::InvalidParameter("accuracy target must be non-negative".into()));
    }
    let problem = Problem { mu, v, c, eig_tol: opts.eig_tol, max_iter: opts.max_iter };
    let grid = path.grid(&problem, opts)?;
    if n_levels > grid.contour.len() {
        return Err(Error::InvalidParameter(format!(
            "{n_levels} levels requested from a {}-point grid",
            grid.contour.len()
        )));
    }
    let coarse = path.levels(&problem, &grid, n_levels, None, true)?;
    let values: Vec<Complex64> = coarse.iter().map(|l| l.value).collect();

    let (extrapolated, estimates) = if opts.two_grid {
        let fine_grid = Grid { contour: grid.contour.refined(), ..grid };
        let fine = path.levels(&problem, &fine_grid, n_levels, Some(&values), false)?;
        let w = f64::from(1u32 << grid.convergence_order());
        let extrapolated: Vec<Complex64> =
            values.iter().zip(&fine).map(|(&coarse, f)| (w * f.value - coarse) / (w - 1.0)).collect();
        let estimates = values
            .iter()
            .zip(&extrapolated)
            .map(|(raw, ext)| (raw - ext).norm() / ext.norm().max(f64::MIN_POSITIVE))
            .collect();
        (extrapolated, estimates)
    } else {
        (values.clone(), vec![f64::INFINITY; n_levels])
    };

    let meta = GridMeta {
        offset: grid.contour.offset(),
        half_length: grid.contour.half_length(),
        n_points: grid.contour.len(),
        order: grid.stencil.order(),
        boundary: grid.boundary,
    };
    let reality_tol = opts.reality_tol.unwrap_or(path.default_reality_tol());
    let mut report = classify_spectrum(&values, reality_tol, meta)?;
    // classify sorts; keep the per-level arrays aligned with it.
    let mut order: Vec<usize> = (0..n_levels).collect();
    order.sort_by(|&a, &b| cmp_spectral(&values[a], &values[b]));
    report.path = path.name().to_string();
    report.extrapolated = order.iter().map(|&i| extrapolated[i]).collect();
    report.convergence_estimate = order.iter().map(|&i| estimates[i]).collect();
    report.accuracy_target = accuracy_target;
    report.accuracy_reached = report.convergence_estimate.iter().all(|&e| e <= accuracy_target);

    let mut pairs = Vec::with_capacity(n_levels);
    for &i in &order {
        let level = &coarse[i];
        let vector = level.vector.clone().ok_or_else(|| Error::InvalidParameter("path returned no eigenvector".into()))?;
        pairs.push(EigenPair {
            value: level.value,
            vector: WavefunctionTable::new(grid.contour, vector, format!("{}#{i}", path.name()))?,
        });
    }
    Ok(BoundStates { pairs, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> GridMeta {
        GridMeta { offset: 0.0, half_length: 1.0, n_points: 3, order: 2, boundary: BoundaryCondition::Dirichlet }
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn all_real_spectrum_is_unbroken() {
        let r = classify_spectrum(&[c(2.0, 0.0), c(0.5, 0.0), c(4.5, 0.0)], 1e-8, meta()).unwrap();
        assert!(!r.broken);
        assert_eq!(r.n_real, 3);
        assert_eq!(r.eigenvalues[0], c(0.5, 0.0));
    }

    #[test]
    fn conjugate_pair_is_broken() {
        let r = classify_spectrum(&[c(1.0, 0.1), c(1.0, -0.1)], 1e-8, meta()).unwrap();
        assert!(r.broken);
        assert_eq!(r.n_real, 0);
        assert_eq!(r.eigenvalues[0], c(1.0, -0.1));
    }

    #[test]
    fn unpaired_complex_value_rejected() {
        let err = classify_spectrum(&[c(1.0, 0.1), c(2.0, 0.0)], 1e-8, meta()).unwrap_err();
        assert!(matches!(err, Error::PairingViolation(_)));
    }

    #[test]
    fn reality_threshold_is_relative_to_magnitude() {
        let r = classify_spectrum(&[c(1e4, 1e-5)], 1e-8, meta());
        assert!(!r.unwrap().broken);
    }

    #[test]
    fn require_accuracy_flags_levels() {
        let mut r = classify_spectrum(&[c(1.0, 0.0)], 1e-8, meta()).unwrap();
        r.convergence_estimate = vec![1e-2];
        r.accuracy_target = 1e-3;
        assert!(matches!(r.require_accuracy(), Err(Error::AccuracyNotReached { level: 0, .. })));
    }
}
