use eup_core::pct::energy_invariance_check;
use eup_core::spectral::{
    assemble_sturm_liouville_with, solve_bound_states, BoundaryCondition, ContourChoice, SolveOptions, TailGeometry,
};
use eup_core::{ComplexPolynomial, Contour, Error, PhysicalConstants, PotentialSpec, QuasiFreeParams, WavefunctionTable};
use num_complex::Complex64;

fn one() -> PhysicalConstants {
    PhysicalConstants::default()
}

fn exact(q: &QuasiFreeParams, n: usize) -> f64 {
    (n * n) as f64 * q.omega() * q.omega() / 2.0
}

fn shifted(q: &QuasiFreeParams, levels: usize, opts: &SolveOptions) -> eup_core::spectral::BoundStates {
    solve_bound_states(&q.mu(), &PotentialSpec::Zero, &one(), ContourChoice::Shifted, levels, 1e-3, opts).unwrap()
}

#[test]
fn eigenvectors_are_orthonormal_and_have_the_right_nodes() {
    let q = QuasiFreeParams::new(1.0, 0.5).unwrap();
    let s = shifted(&q, 4, &SolveOptions { n_points: Some(2000), two_grid: false, ..Default::default() });
    let h = s.pairs[0].vector.contour().spacing();
    for (m, a) in s.pairs.iter().enumerate() {
        for (n, b) in s.pairs.iter().enumerate() {
            let dot: Complex64 = a.vector.values().iter().zip(b.vector.values()).map(|(x, y)| x * y).sum::<Complex64>() * h;
            let want = if m == n { 1.0 } else { 0.0 };
            // Tails beyond ±L (phi ~ 1/xi^2) carry overlap of order 1/L^3.
            assert!((dot - want).norm() < 1e-4, "<{m}|{n}> = {dot}");
        }
        // Ignore the exponentially small tail when counting sign changes.
        let floor = 1e-8 * a.vector.sup_norm();
        let signs: Vec<f64> = a.vector.values().iter().filter(|v| v.norm() > floor).map(|v| v.re.signum()).collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, m, "level {m}");
    }
}

#[test]
fn eigenpairs_satisfy_the_discrete_equation() {
    let q = QuasiFreeParams::new(1.0, 0.25).unwrap();
    let s = shifted(&q, 3, &SolveOptions { n_points: Some(2000), two_grid: false, ..Default::default() });
    let contour = *s.pairs[0].vector.contour();
    let tail = TailGeometry::new(&q.mu(), &contour, 1).unwrap();
    for pair in &s.pairs {
        // The free-tail closure depends on E; rebuild the matrix at the eigenvalue.
        let ratios = tail.ratios(pair.value, &one());
        let m = assemble_sturm_liouville_with(&q.mu(), &PotentialSpec::Zero, &contour, &one(), &ratios).unwrap();
        let v: Vec<f64> = pair.vector.values().iter().map(|z| z.re).collect();
        let mv = m.mul_vec(&v);
        let vmax = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let r = mv.iter().zip(&v).map(|(a, b)| (a - pair.value.re * b).abs()).fold(0.0, f64::max);
        assert!(r <= 1e-10 * m.norm_scale() * vmax, "residual {r}");
    }
}

#[test]
fn second_order_convergence() {
    let q = QuasiFreeParams::new(1.0, 0.5).unwrap();
    let errors: Vec<f64> = [1000usize, 1999, 3997]
        .iter()
        .map(|&n| {
            let s = shifted(&q, 2, &SolveOptions { n_points: Some(n), two_grid: false, ..Default::default() });
            (s.report.eigenvalues[1].re - exact(&q, 2)).abs()
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.3, "observed order {order}");
    }
}

#[test]
fn dense_path_is_fourth_order() {
    let q = QuasiFreeParams::new(1.0, 0.5).unwrap();
    let errors: Vec<f64> = [200usize, 399]
        .iter()
        .map(|&n| {
            let opts = SolveOptions { n_points: Some(n), half_length: Some(15.0), two_grid: false, ..Default::default() };
            let s = solve_bound_states(&q.mu(), &PotentialSpec::Zero, &one(), ContourChoice::RealAxis, 2, 1e-3, &opts).unwrap();
            (s.report.eigenvalues[1] - exact(&q, 2)).norm()
        })
        .collect();
    let order = (errors[0] / errors[1]).log2();
    assert!((order - 4.0).abs() < 0.3, "observed order {order}, errors {errors:?}");
}

#[test]
fn dirichlet_truncation_error_shrinks_with_length() {
    let q = QuasiFreeParams::new(1.0, 0.5).unwrap();
    let mut previous = f64::INFINITY;
    for l in [10.0, 20.0, 40.0] {
        let opts = SolveOptions {
            half_length: Some(l),
            n_points: Some((400.0 * l) as usize),
            boundary: BoundaryCondition::Dirichlet,
            two_grid: false,
            ..Default::default()
        };
        let err = (shifted(&q, 1, &opts).report.eigenvalues[0].re - exact(&q, 1)).abs();
        assert!(err < previous, "L = {l}: {err} !< {previous}");
        previous = err;
    }
    // A hard wall at finite L always raises the level.
    assert!(previous > 1e-3 * exact(&q, 1));
}

#[test]
fn the_two_paths_agree() {
    let q = QuasiFreeParams::new(1.0, 0.5).unwrap();
    let t = shifted(&q, 3, &SolveOptions::default());
    let d = solve_bound_states(&q.mu(), &PotentialSpec::Zero, &one(), ContourChoice::RealAxis, 3, 1e-3, &SolveOptions::default()).unwrap();
    for k in 0..3 {
        let a = t.report.extrapolated[k];
        let b = d.report.extrapolated[k];
        assert!((a - b).norm() < 1e-6 * a.norm(), "level {k}: {a} vs {b}");
    }
}

#[test]
fn accuracy_target_is_reported() {
    let q = QuasiFreeParams::new(1.0, 0.0).unwrap();
    let coarse = SolveOptions { n_points: Some(200), ..Default::default() };
    let s = solve_bound_states(&q.mu(), &PotentialSpec::Zero, &one(), ContourChoice::Shifted, 3, 1e-9, &coarse).unwrap();
    assert!(!s.report.accuracy_reached);
    assert!(matches!(s.report.require_accuracy(), Err(Error::AccuracyNotReached { .. })));
}

#[test]
fn general_pt_symmetric_mu_on_the_real_axis() {
    // Not in the quasi-free family: only the dense path applies.
    let mu = ComplexPolynomial::new(vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.4),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.05, 0.0),
    ])
    .unwrap();
    let err = solve_bound_states(&mu, &PotentialSpec::Zero, &one(), ContourChoice::Shifted, 2, 1e-3, &SolveOptions::default());
    assert!(err.is_err());
    let opts = SolveOptions { n_points: Some(400), half_length: Some(20.0), ..Default::default() };
    let s = solve_bound_states(&mu, &PotentialSpec::Zero, &one(), ContourChoice::RealAxis, 3, 1e-3, &opts).unwrap();
    assert!(!s.report.broken, "{:?}", s.report.eigenvalues);
    assert!(s.report.eigenvalues.windows(2).all(|w| w[0].re < w[1].re));
}

#[test]
fn non_pt_symmetric_mu_is_rejected_on_the_real_axis() {
    let mu = ComplexPolynomial::from_real(&[0.0, 1.0, 1.0]).unwrap();
    let r = solve_bound_states(&mu, &PotentialSpec::Zero, &one(), ContourChoice::RealAxis, 1, 1e-3, &SolveOptions::default());
    assert!(matches!(r, Err(Error::InvalidParameter(_))));
}

#[test]
fn energy_invariance_examples() {
    let q = QuasiFreeParams::new(1.0, 0.0).unwrap();
    let r = energy_invariance_check(&q, 1, &one(), 1e-3).unwrap();
    assert!(r.pass);
    assert!(r.levels[0].deviation <= r.levels[0].convergence_estimate.max(1e-8));
    assert!(!energy_invariance_check(&q, 1, &one(), 0.0).unwrap().pass);
}

#[test]
fn wavefunction_table_from_solver_round_trips_through_csv() {
    let q = QuasiFreeParams::new(1.0, 0.5).unwrap();
    let s = shifted(&q, 1, &SolveOptions { n_points: Some(101), half_length: Some(5.0), two_grid: false, ..Default::default() });
    let table = &s.pairs[0].vector;
    let back = WavefunctionTable::from_csv(&table.to_csv(), "back").unwrap();
    assert_eq!(back.contour().len(), 101);
    assert_eq!(back.contour(), &Contour::shifted(&q, 5.0, 101).unwrap());
    for (a, b) in back.values().iter().zip(table.values()) {
        assert!((a - b).norm() < 1e-15);
    }
}

#[test]
fn real_axis_path_skips_spurious_modes_near_a_close_singularity() {
    // 1 + mu vanishes at x = 0.47i, close enough to the axis that the dense
    // matrix has far-off modes with negative real part.
    let q = QuasiFreeParams::new(0.5, 1.0).unwrap();
    let d = solve_bound_states(&q.mu(), &PotentialSpec::Zero, &one(), ContourChoice::RealAxis, 2, 1e-3, &SolveOptions::default()).unwrap();
    for k in 0..2 {
        let e = exact(&q, k + 1);
        assert!((d.report.extrapolated[k] - e).norm() < 1e-4 * e, "level {k}: {}", d.report.extrapolated[k]);
    }
}
