//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Reference values are computed here, independently of the
//! library code under test.

use std::f64::consts::PI;
use std::process::ExitCode;

use eup_core::linalg::{eig_dense_complex, eig_sym_tridiag, DenseComplexMatrix, SymTridiagMatrix};
use eup_core::operators::{commutator_residual, momentum_ode_residual, pt_symmetry_residual};
use eup_core::pct::{energy_invariance_check, numeric_z_map};
use eup_core::quadrature::QuadratureRule;
use eup_core::quasi_free::{
    cpt_norm, fig1_curves, fig1_grid, momentum_eigenfunction, momentum_norm, normalization_constant, z_closed_form,
    z_components,
};
use eup_core::{
    classify_spectrum, solve_bound_states, ComplexPolynomial, Contour, ContourChoice, PhysicalConstants,
    PotentialSpec, QuasiFreeParams, SolveOptions, StencilScheme, WavefunctionTable,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PARAM_SETS: [(f64, f64); 5] = [(1.0, 0.0), (1.0, 0.25), (1.0, 0.5), (1.0, 1.0), (0.5, 0.25)];

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn qf(a: f64, b: f64) -> QuasiFreeParams {
    QuasiFreeParams::new(a, b).expect("valid parameters")
}

/// n^2 (alpha^2 + beta^2) / 2 with hbar = m = 1, straight from the level formula.
fn reference_energy(a: f64, b: f64, n: usize) -> f64 {
    (n * n) as f64 * (a * a + b * b) / 2.0
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lib<T>(r: eup_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("error: {e}"))
}

fn spectrum_reproduction() -> Outcome {
    let one = PhysicalConstants::default();
    let (mut worst_raw, mut worst_ext) = (0.0f64, 0.0f64);
    for (a, b) in PARAM_SETS {
        let p = qf(a, b);
        let s = lib(solve_bound_states(&p.mu(), &PotentialSpec::Zero, &one, ContourChoice::Shifted, 3, 1e-3, &SolveOptions::default()))?;
        for n in 1..=3 {
            let e = reference_energy(a, b, n);
            worst_raw = worst_raw.max((s.report.eigenvalues[n - 1].re - e).abs() / e);
            worst_ext = worst_ext.max((s.report.extrapolated[n - 1].re - e).abs() / e);
        }
    }
    check(
        worst_raw <= 1e-3 && worst_ext <= 1e-5,
        format!("max rel err raw {worst_raw:.3e} (<= 1e-3), extrapolated {worst_ext:.3e} (<= 1e-5)"),
    )
}

fn spectrum_reality() -> Outcome {
    let one = PhysicalConstants::default();
    let p = qf(1.0, 0.5);
    let opts = SolveOptions { half_length: Some(30.0), n_points: Some(800), order: Some(4), ..Default::default() };
    let s = lib(solve_bound_states(&p.mu(), &PotentialSpec::Zero, &one, ContourChoice::RealAxis, 3, 1e-3, &opts))?;
    let mut worst_imag = 0.0f64;
    let mut worst_rel = 0.0f64;
    for (k, lam) in s.report.eigenvalues.iter().enumerate() {
        worst_imag = worst_imag.max(lam.im.abs() / (1.0 + lam.re.abs()));
        let e = reference_energy(1.0, 0.5, k + 1);
        worst_rel = worst_rel.max((lam.re - e).abs() / e);
    }
    check(
        worst_imag <= 1e-6 && worst_rel <= 1e-3 && !s.report.broken,
        format!("max |Im|/(1+|Re|) {worst_imag:.3e} (<= 1e-6), max rel err {worst_rel:.3e} (<= 1e-3)"),
    )
}

fn test_functions(contour: Contour) -> Vec<WavefunctionTable> {
    vec![
        WavefunctionTable::from_fn(contour, "gauss", |x| (-x * x / 2.0).exp()).unwrap(),
        WavefunctionTable::from_fn(contour, "gauss*poly", |x| (x * x * x - 2.0 * x + 0.5) * (-x * x / 2.0).exp()).unwrap(),
    ]
}

fn eup_commutator() -> Outcome {
    let one = PhysicalConstants::default();
    let s = StencilScheme::new(4, true).unwrap();
    let mut worst = 0.0f64;
    for (a, b) in PARAM_SETS {
        let p = qf(a, b);
        for contour in [Contour::real_axis(8.0, 1601).unwrap(), Contour::shifted(&p, 8.0, 1601).unwrap()] {
            for f in test_functions(contour) {
                worst = worst.max(lib(commutator_residual(&p.mu(), &f, &one, &s))?);
            }
        }
    }
    check(worst <= 1e-9, format!("max commutator residual {worst:.3e} (<= 1e-9)"))
}

fn pt_commutation() -> Outcome {
    let one = PhysicalConstants::default();
    let s = StencilScheme::new(4, true).unwrap();
    // Even point count keeps x = -1, where 1 + x vanishes, off the grid.
    let contour = Contour::real_axis(6.0, 600).unwrap();
    let f = WavefunctionTable::from_fn(contour, "probe", |x| (1.0 + x + c(0.0, 0.3) * x * x) * (-x * x / 2.0 + c(0.0, 0.2) * x).exp()).unwrap();
    let mut mus: Vec<ComplexPolynomial> = PARAM_SETS.iter().map(|&(a, b)| qf(a, b).mu()).collect();
    mus.push(ComplexPolynomial::new(vec![c(0.1, 0.0), c(0.0, 0.4), c(0.3, 0.0), c(0.0, 0.05), c(0.02, 0.0)]).unwrap());
    let cubic = PotentialSpec::Polynomial(ComplexPolynomial::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]).unwrap());
    let mut worst = 0.0f64;
    for mu in &mus {
        for v in [PotentialSpec::Zero, cubic.clone()] {
            worst = worst.max(lib(pt_symmetry_residual(mu, &v, &f, &one, &s))?);
        }
    }
    let control = lib(pt_symmetry_residual(&ComplexPolynomial::from_real(&[0.0, 1.0]).unwrap(), &PotentialSpec::Zero, &f, &one, &s))?;
    check(
        worst <= 1e-9 && control >= 1e-3,
        format!("max residual {worst:.3e} (<= 1e-9), control mu = x {control:.3e} (>= 1e-3)"),
    )
}

fn momentum_eigenfunctions() -> Outcome {
    let one = PhysicalConstants::default();
    let p = qf(1.0, 0.5);
    let s = StencilScheme::new(4, true).unwrap();
    let contour = Contour::shifted(&p, 10.0, 2001).unwrap();
    let rule = QuadratureRule::default();
    let mut worst_ode = 0.0f64;
    let mut worst_norm = 0.0f64;
    let mut worst_dependence = 0.0f64;
    for pe in [0.0, 1.7, -3.2] {
        let f = lib(WavefunctionTable::try_from_fn(contour, "Phi", |x| momentum_eigenfunction(&p, pe, x, &one)))?;
        worst_ode = worst_ode.max(lib(momentum_ode_residual(&p, pe, &f, &one, &s))?);
        worst_norm = worst_norm.max((lib(momentum_norm(&p, pe, &one, &rule))? - 1.0).abs());
        for xi in [-7.0, -0.3, 0.0, 2.5, 40.0] {
            let expected = (p.omega() / PI) / (1.0 + 0.25 + xi * xi);
            let got = lib(momentum_eigenfunction(&p, pe, p.x_from_xi(xi), &one))?.norm_sqr();
            worst_dependence = worst_dependence.max((got - expected).abs() / expected);
        }
    }
    check(
        worst_ode <= 1e-8 && worst_norm <= 1e-10 && worst_dependence <= 1e-13,
        format!("ODE residual {worst_ode:.3e} (<= 1e-8), |norm - 1| {worst_norm:.3e} (<= 1e-10), |Phi|^2 vs p-free form {worst_dependence:.1e}"),
    )
}

fn pct_consistency() -> Outcome {
    let rule = QuadratureRule::default();
    let mut worst_map = 0.0f64;
    for (a, b) in PARAM_SETS {
        let p = qf(a, b);
        let contour = Contour::shifted(&p, 20.0 / a, 4001).unwrap();
        // z(xi = 0) = arctan(0)/omega = 0 fixes the gauge.
        let map = lib(numeric_z_map(&p.mu(), &contour, c(0.0, 0.0), &rule))?;
        for (x, z) in contour.points().iter().zip(&map.z_values) {
            worst_map = worst_map.max((lib(z_closed_form(&p, *x))? - z).norm());
        }
    }
    let p = qf(1.0, 0.5);
    let w = p.omega();
    let mut worst_limit = 0.0f64;
    for sign in [1.0, -1.0] {
        let zc = lib(z_components(&p, sign * 1e6))?;
        worst_limit = worst_limit.max((w * zc.zeta - sign * PI / 2.0).abs()).max((w * zc.eta).abs());
    }
    check(
        worst_map <= 1e-10 && worst_limit <= 1e-5,
        format!("z-map sup error {worst_map:.3e} (<= 1e-10), limit defect at |x| = 1e6 {worst_limit:.3e} (<= 1e-5)"),
    )
}

fn cpt_normalization() -> Outcome {
    let rule = QuadratureRule::default();
    let (mut worst, mut worst_i, mut worst_ii) = (0.0f64, 0.0f64, 0.0f64);
    for (a, b) in PARAM_SETS {
        let p = qf(a, b);
        let consts = normalization_constant(&p);
        let expected = (2.0 * (a * a + b * b).sqrt() / PI).sqrt();
        if (consts.c1 - expected).abs() > 1e-15 || consts.c1 != consts.c2 {
            return Err(format!("normalization constants {consts:?} != {expected}"));
        }
        for n in 1..=4 {
            let r = lib(cpt_norm(&p, n, &consts, &rule))?;
            worst = worst.max((r.value - 1.0).norm());
            worst_i = worst_i.max(r.cond_i);
            worst_ii = worst_ii.max(r.cond_ii);
        }
    }
    check(
        worst <= 1e-8 && worst_i <= 1e-12 && worst_ii <= 1e-12,
        format!("|norm - 1| {worst:.3e} (<= 1e-8), cond (i) {worst_i:.1e}, cond (ii) {worst_ii:.1e} (<= 1e-12)"),
    )
}

fn fig1_reproduction() -> Outcome {
    let alpha = 1.0;
    let grid = lib(fig1_grid(6.0, 241))?;
    let curves = lib(fig1_curves(alpha, &grid))?;
    let mut peak_err = 0.0f64;
    let mut monotone = true;
    for n in [1, 2] {
        let of_n: Vec<_> = curves.iter().filter(|cv| cv.n == n).collect();
        monotone &= of_n.windows(2).all(|w| w[1].variance > w[0].variance);
        if n == 1 {
            for cv in of_n {
                let beta = cv.beta_over_alpha * alpha;
                let omega = (alpha * alpha + beta * beta).sqrt();
                peak_err = peak_err.max((cv.peak() - 2.0 * alpha / (PI * omega)).abs());
            }
        }
    }
    let p0 = curves[0].peak();
    let p1 = curves[3].peak();
    check(
        peak_err <= 1e-6 && monotone && (p0 - 0.6366).abs() < 1e-4 && (p1 - 0.4502).abs() < 1e-4,
        format!("peaks {p0:.6} / {p1:.6}, max peak error {peak_err:.1e} (<= 1e-6), variances increasing: {monotone}"),
    )
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DenseComplexMatrix {
    DenseComplexMatrix::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap()
}

/// Leibniz-free determinant oracle: plain Gaussian elimination written here.
fn oracle_determinant(m: &DenseComplexMatrix) -> Complex64 {
    let n = m.n();
    let mut a: Vec<Vec<Complex64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect();
    let mut det = c(1.0, 0.0);
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| a[x][k].norm().total_cmp(&a[y][k].norm())).unwrap();
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let t = a[k][j];
                a[i][j] -= f * t;
            }
        }
    }
    det
}

fn eigensolver_oracles() -> Outcome {
    let lap = SymTridiagMatrix::new(vec![2.0; 3], vec![-1.0; 2]).unwrap();
    let got = lib(eig_sym_tridiag(&lap, 1e-15, 50))?;
    let want = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
    let lap_err = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst_trace = 0.0f64;
    let mut worst_det = 0.0f64;
    for n in [6, 8, 6, 8] {
        let m = random_matrix(&mut rng, n);
        let eigs = lib(eig_dense_complex(&m, 1e-15, 60))?;
        let trace: Complex64 = (0..n).map(|i| m.get(i, i)).sum();
        let sum: Complex64 = eigs.iter().sum();
        let prod: Complex64 = eigs.iter().product();
        let det = oracle_determinant(&m);
        worst_trace = worst_trace.max((sum - trace).norm() / trace.norm().max(1.0));
        worst_det = worst_det.max((prod - det).norm() / det.norm());
    }

    let mut pairing_ok = true;
    for n in [6, 7, 8] {
        let a = random_matrix(&mut rng, n);
        // Discrete PT: M = conj(J M J) with J the index reversal.
        let m = DenseComplexMatrix::from_fn(n, |i, j| (a.get(i, j) + a.get(n - 1 - i, n - 1 - j).conj()) / 2.0).unwrap();
        let eigs = lib(eig_dense_complex(&m, 1e-15, 60))?;
        pairing_ok &= eigs.iter().all(|l| eigs.iter().any(|k| (k - l.conj()).norm() <= 1e-8 * l.norm().max(1.0)));
        let meta = eup_core::spectral::GridMeta {
            offset: 0.0,
            half_length: 1.0,
            n_points: n,
            order: 2,
            boundary: eup_core::BoundaryCondition::Dirichlet,
        };
        pairing_ok &= classify_spectrum(&eigs, 1e-8, meta).is_ok();
    }
    check(
        lap_err <= 1e-12 && worst_trace <= 1e-8 && worst_det <= 1e-8 && pairing_ok,
        format!("Laplacian {lap_err:.1e} (<= 1e-12), trace {worst_trace:.1e}, det {worst_det:.1e} (<= 1e-8), PT pairing: {pairing_ok}"),
    )
}

fn energy_invariance() -> Outcome {
    let one = PhysicalConstants::default();
    let mut worst = 0.0f64;
    let mut all_pass = true;
    for (a, b) in PARAM_SETS {
        let r = lib(energy_invariance_check(&qf(a, b), 3, &one, 1e-3))?;
        all_pass &= r.pass;
        worst = r.levels.iter().map(|l| l.deviation).fold(worst, f64::max);
    }
    check(all_pass, format!("max x/z-space deviation {worst:.3e} (< 1e-3)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("spectrum reproduction", spectrum_reproduction),
        ("spectrum reality (dense real axis)", spectrum_reality),
        ("deformed commutator", eup_commutator),
        ("PT commutation", pt_commutation),
        ("momentum eigenfunctions", momentum_eigenfunctions),
        ("PCT map consistency", pct_consistency),
        ("CPT normalization", cpt_normalization),
        ("confinement figure", fig1_reproduction),
        ("eigensolver oracles", eigensolver_oracles),
        ("energy invariance under PCT", energy_invariance),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail}", k + 1);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
