//! Spectral paths and their registry.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eig_dense_complex, eig_sym_tridiag, BandLu, DenseComplexMatrix, SymTridiagMatrix};
use crate::model::{ComplexPolynomial, Contour, PhysicalConstants, QuasiFreeParams, PT_COEFF_TOL};
use crate::operators::{PotentialSpec, StencilScheme};

use super::assemble::{assemble_dense_with, assemble_sturm_liouville_with};
use super::tail::{BoundaryCondition, GhostRatios, TailGeometry};
use super::{SolveOptions, DENSE_REALITY_TOL, TRIDIAG_REALITY_TOL};

// Sturm bisection on the graded matrices jitters at the 1e-13 level.
const FIXED_POINT_TOL: f64 = 1e-11;
const FIXED_POINT_MAX: usize = 100;
const INVERSE_ITERATIONS: usize = 8;

pub struct Problem<'a> {
    pub mu: &'a ComplexPolynomial,
    pub v: &'a PotentialSpec,
    pub c: &'a PhysicalConstants,
    pub eig_tol: f64,
    pub max_iter: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub contour: Contour,
    pub stencil: StencilScheme,
    /// Already resolved; never `Auto`.
    pub boundary: BoundaryCondition,
}

impl Grid {
    /// Power of h in the leading eigenvalue error.
    pub fn convergence_order(&self) -> u32 {
        let base = u32::from(self.stencil.order());
        if self.stencil.richardson() {
            base + 2
        } else {
            base
        }
    }
}

#[derive(Clone, Debug)]
pub struct Level {
    pub value: Complex64,
    pub vector: Option<Vec<Complex64>>,
}

pub trait SpectralPath: Send + Sync {
    fn name(&self) -> &'static str;

    fn default_reality_tol(&self) -> f64;

    fn grid(&self, problem: &Problem, opts: &SolveOptions) -> Result<Grid>;

    /// Lowest `n_levels` eigenvalues on `grid`. With `guesses`, level k is
    /// the eigenvalue reached from `guesses[k]` instead of a full solve.
    fn levels(
        &self,
        problem: &Problem,
        grid: &Grid,
        n_levels: usize,
        guesses: Option<&[Complex64]>,
        with_vectors: bool,
    ) -> Result<Vec<Level>>;
}

pub struct PathRegistry {
    paths: Vec<Box<dyn SpectralPath>>,
}

impl PathRegistry {
    pub fn empty() -> Self {
        Self { paths: Vec::new() }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(ShiftedPath));
        r.register(Box::new(RealAxisPath));
        r
    }

    /// Later registrations shadow earlier ones with the same name.
    pub fn register(&mut self, path: Box<dyn SpectralPath>) {
        self.paths.retain(|p| p.name() != path.name());
        self.paths.push(path);
    }

    pub fn get(&self, name: &str) -> Option<&dyn SpectralPath> {
        self.paths.iter().find(|p| p.name() == name).map(|p| p.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.paths.iter().map(|p| p.name()).collect()
    }
}

pub fn default_registry() -> &'static PathRegistry {
    static REGISTRY: OnceLock<PathRegistry> = OnceLock::new();
    REGISTRY.get_or_init(PathRegistry::with_defaults)
}

fn ratio_source(problem: &Problem, grid: &Grid) -> Result<Option<TailGeometry>> {
    match grid.boundary {
        BoundaryCondition::FreeTail => Ok(Some(TailGeometry::new(problem.mu, &grid.contour, grid.stencil.half_width())?)),
        _ => Ok(None),
    }
}

fn ratios_at(tail: &Option<TailGeometry>, ghosts: usize, e: Complex64, c: &PhysicalConstants) -> GhostRatios {
    match tail {
        Some(t) => t.ratios(e, c),
        None => GhostRatios::dirichlet(ghosts),
    }
}

fn converged(old: Complex64, new: Complex64) -> bool {
    (new - old).norm() <= FIXED_POINT_TOL * new.norm().max(1.0)
}

/// Bilinear normalization sum phi^2 h = 1, falling back to the L2 norm when
/// the bilinear one degenerates; the largest entry gets a positive real part.
fn normalize(v: &mut [Complex64], h: f64) {
    let bilinear: Complex64 = v.iter().map(|z| z * z).sum::<Complex64>() * h;
    let l2: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() * h;
    let scale = if bilinear.norm() > 1e-12 * l2 { bilinear.sqrt() } else { Complex64::new(l2.sqrt(), 0.0) };
    for z in v.iter_mut() {
        *z /= scale;
    }
    let peak = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or_default();
    if peak.re < 0.0 {
        for z in v.iter_mut() {
            *z = -*z;
        }
    }
}

fn start_vector(n: usize) -> Vec<f64> {
    (0..n).map(|j| 1.0 + 0.3 * (0.7 * j as f64).sin()).collect()
}

/// Quasi-free family on Im(x) = -beta/alpha^2: symmetric tridiagonal,
/// implicit QL for the whole spectrum, Sturm bisection per level.
pub struct ShiftedPath;

impl ShiftedPath {
    fn tridiagonal(problem: &Problem, grid: &Grid, tail: &Option<TailGeometry>, e: f64) -> Result<SymTridiagMatrix> {
        let r = ratios_at(tail, 1, Complex64::new(e, 0.0), problem.c);
        assemble_sturm_liouville_with(problem.mu, problem.v, &grid.contour, problem.c, &r)
    }

    fn eigenvector(m: &SymTridiagMatrix, e: f64, previous: &[(f64, Vec<f64>)]) -> Result<Vec<f64>> {
        let scale = e.abs().max(1.0);
        let mut v = start_vector(m.len());
        for _ in 0..2 {
            v = m.solve_shifted(e + 1e-10 * scale, &v)?;
            // Keep clustered levels apart.
            for (pe, pv) in previous {
                if (pe - e).abs() < 1e-8 * scale {
                    let dot: f64 = v.iter().zip(pv).map(|(a, b)| a * b).sum();
                    let nn: f64 = pv.iter().map(|b| b * b).sum();
                    v.iter_mut().zip(pv).for_each(|(a, b)| *a -= dot / nn * b);
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(v)
    }
}

impl SpectralPath for ShiftedPath {
    fn name(&self) -> &'static str {
        "shifted"
    }

    fn default_reality_tol(&self) -> f64 {
        TRIDIAG_REALITY_TOL
    }

    fn grid(&self, problem: &Problem, opts: &SolveOptions) -> Result<Grid> {
        let params = QuasiFreeParams::from_mu(problem.mu, PT_COEFF_TOL).ok_or_else(|| {
            Error::InvalidParameter("shifted contour needs mu = alpha^2 x^2 + 2 i beta x".into())
        })?;
        if opts.order.is_some_and(|o| o != 2) || opts.stencil_richardson {
            return Err(Error::InvalidParameter("the tridiagonal path is plain second order".into()));
        }
        let half_length = opts.half_length.unwrap_or(40.0 / params.alpha());
        let n_points = opts.n_points.unwrap_or(4000);
        Ok(Grid {
            contour: Contour::shifted(&params, half_length, n_points)?,
            stencil: StencilScheme::new(2, false)?,
            boundary: opts.boundary.resolve(problem.mu, problem.v)?,
        })
    }

    fn levels(
        &self,
        problem: &Problem,
        grid: &Grid,
        n_levels: usize,
        guesses: Option<&[Complex64]>,
        with_vectors: bool,
    ) -> Result<Vec<Level>> {
        let tail = ratio_source(problem, grid)?;
        let starts: Vec<f64> = match guesses {
            Some(g) => g.iter().map(|z| z.re).collect(),
            None => {
                let base = Self::tridiagonal(problem, grid, &tail, 0.0)?;
                eig_sym_tridiag(&base, problem.eig_tol, problem.max_iter)?
            }
        };
        let mut out = Vec::with_capacity(n_levels);
        let mut previous: Vec<(f64, Vec<f64>)> = Vec::new();
        for k in 0..n_levels {
            let mut e = starts[k];
            let mut m = Self::tridiagonal(problem, grid, &tail, e)?;
            let mut done = tail.is_none();
            if done {
                e = m.bisect_eigenvalue(k, problem.eig_tol)?;
            }
            for _ in 0..FIXED_POINT_MAX {
                if done {
                    break;
                }
                let next = m.bisect_eigenvalue(k, problem.eig_tol)?;
                done = converged(Complex64::new(e, 0.0), Complex64::new(next, 0.0));
                e = next;
                m = Self::tridiagonal(problem, grid, &tail, e)?;
            }
            if !done {
                return Err(Error::NoConvergence { solver: "free-tail matching", iterations: FIXED_POINT_MAX });
            }
            let vector = if with_vectors {
                let v = Self::eigenvector(&m, e, &previous)?;
                previous.push((e, v.clone()));
                let mut v: Vec<Complex64> = v.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
                normalize(&mut v, grid.contour.spacing());
                Some(v)
            } else {
                None
            };
            out.push(Level { value: Complex64::new(e, 0.0), vector });
        }
        Ok(out)
    }
}

/// Any PT-symmetric mu on the real axis: dense stencil matrix, Hessenberg
/// QR for the spectrum, banded inverse iteration per level.
pub struct RealAxisPath;

impl RealAxisPath {
    fn dense(problem: &Problem, grid: &Grid, tail: &Option<TailGeometry>, e: Complex64) -> Result<DenseComplexMatrix> {
        let r = ratios_at(tail, grid.stencil.half_width(), e, problem.c);
        assemble_dense_with(problem.mu, problem.v, &grid.contour, problem.c, &grid.stencil, &r)
    }

    /// Eigenvalue nearest `sigma` and its eigenvector.
    fn inverse_iteration(m: &DenseComplexMatrix, sigma: Complex64, band: usize) -> (Complex64, Vec<Complex64>) {
        let scale = sigma.norm().max(1.0);
        let shift = sigma + Complex64::new(1e-10 * scale, 0.0);
        let lu = BandLu::new(&m.shifted(shift), band, band);
        let floor = f64::EPSILON * scale;
        let mut v: Vec<Complex64> = start_vector(m.n()).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        let mut lambda = sigma;
        for _ in 0..INVERSE_ITERATIONS {
            let y = lu.solve(&v, floor);
            // y ≈ v / (lambda - shift)
            let yy: f64 = y.iter().map(|z| z.norm_sqr()).sum();
            let yv: Complex64 = y.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            let next = shift + yv / yy;
            let norm = yy.sqrt();
            v = y.into_iter().map(|z| z / norm).collect();
            let settled = (next - lambda).norm() <= 1e-15 * scale;
            lambda = next;
            if settled {
                break;
            }
        }
        (lambda, v)
    }
}

fn effective_alpha(mu: &ComplexPolynomial) -> f64 {
    match mu.degree() {
        Some(d) if d >= 2 => mu.coeff(2).norm().sqrt().max(f64::MIN_POSITIVE),
        _ => 1.0,
    }
}

impl SpectralPath for RealAxisPath {
    fn name(&self) -> &'static str {
        "real_axis"
    }

    fn default_reality_tol(&self) -> f64 {
        DENSE_REALITY_TOL
    }

    fn grid(&self, problem: &Problem, opts: &SolveOptions) -> Result<Grid> {
        if !problem.mu.is_pt_symmetric(PT_COEFF_TOL) {
            return Err(Error::InvalidParameter("mu is not PT-symmetric".into()));
        }
        if !problem.v.is_pt_symmetric(PT_COEFF_TOL) {
            return Err(Error::InvalidParameter("V is not PT-symmetric".into()));
        }
        let half_length = opts.half_length.unwrap_or(30.0 / effective_alpha(problem.mu));
        let n_points = opts.n_points.unwrap_or(800);
        Ok(Grid {
            contour: Contour::real_axis(half_length, n_points)?,
            stencil: StencilScheme::new(opts.order.unwrap_or(4), opts.stencil_richardson)?,
            boundary: opts.boundary.resolve(problem.mu, problem.v)?,
        })
    }

    fn levels(
        &self,
        problem: &Problem,
        grid: &Grid,
        n_levels: usize,
        guesses: Option<&[Complex64]>,
        with_vectors: bool,
    ) -> Result<Vec<Level>> {
        let tail = ratio_source(problem, grid)?;
        let band = grid.stencil.half_width();
        let starts: Vec<Complex64> = match guesses {
            Some(g) => g.to_vec(),
            None => {
                let base = Self::dense(problem, grid, &tail, Complex64::new(0.0, 0.0))?;
                let mut eigs = eig_dense_complex(&base, problem.eig_tol, problem.max_iter)?;
                // Under-resolved grids carry spurious modes with |E| ~ 1/h^2 and
                // Re E < 0 when 1+mu nearly vanishes near the axis; the bound
                // states are the ones closest to the origin.
                eigs.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.re.total_cmp(&b.re)));
                eigs
            }
        };
        let mut out = Vec::with_capacity(n_levels);
        for &start in starts.iter().take(n_levels) {
            let mut e = start;
            let mut m = Self::dense(problem, grid, &tail, e)?;
            let mut result = Self::inverse_iteration(&m, e, band);
            let mut done = tail.is_none();
            for _ in 0..FIXED_POINT_MAX {
                if done {
                    break;
                }
                let next = result.0;
                done = converged(e, next);
                e = next;
                m = Self::dense(problem, grid, &tail, e)?;
                result = Self::inverse_iteration(&m, e, band);
            }
            if !done {
                return Err(Error::NoConvergence { solver: "free-tail matching", iterations: FIXED_POINT_MAX });
            }
            let (value, mut v) = result;
            let vector = if with_vectors {
                normalize(&mut v, grid.contour.spacing());
                Some(v)
            } else {
                None
            };
            out.push(Level { value, vector });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lookup_and_shadowing() {
        let mut r = PathRegistry::with_defaults();
        assert_eq!(r.names(), vec!["shifted", "real_axis"]);
        assert!(r.get("nope").is_none());
        r.register(Box::new(ShiftedPath));
        assert_eq!(r.names().len(), 2);
        assert_eq!(default_registry().get("real_axis").unwrap().name(), "real_axis");
    }

    #[test]
    fn shifted_path_rejects_other_mu() {
        let mu = ComplexPolynomial::from_real(&[0.0, 0.0, 1.0, 0.0, 0.1]).unwrap();
        let c = PhysicalConstants::default();
        let p = Problem { mu: &mu, v: &PotentialSpec::Zero, c: &c, eig_tol: 1e-15, max_iter: 60 };
        assert!(ShiftedPath.grid(&p, &SolveOptions::default()).is_err());
    }

    #[test]
    fn normalization_is_bilinear() {
        let mut v = vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0)];
        normalize(&mut v, 0.5);
        let s: Complex64 = v.iter().map(|z| z * z).sum::<Complex64>() * 0.5;
        assert!((s - 1.0).norm() < 1e-14);
        assert!(v[1].re > 0.0);
    }
}
