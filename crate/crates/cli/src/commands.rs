//! The sub-commands, looked up by name in a registry of trait objects.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use eup_core::operators::{commutator_residual, momentum_ode_residual, pt_symmetry_residual};
use eup_core::pct::{energy_invariance_check, numeric_z_map, z_width};
use eup_core::quadrature::QuadratureRule;
use eup_core::quasi_free::{
    energy_level, fig1_csv, fig1_curves, fig1_grid, momentum_eigenfunction, momentum_norm, z_closed_form,
    z_components,
};
use eup_core::{
    solve_bound_states, Contour, PotentialSpec, QuasiFreeParams, SolveOptions,
    StencilScheme, WavefunctionTable,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::report::Check;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{op} failed: {source}")]
    Numeric { op: String, source: eup_core::Error },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

trait Op<T> {
    fn op(self, name: &str) -> Result<T, CommandError>;
}

impl<T> Op<T> for eup_core::Result<T> {
    fn op(self, name: &str) -> Result<T, CommandError> {
        self.map_err(|source| CommandError::Numeric { op: name.to_string(), source })
    }
}

pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub out_dir: &'a Path,
}

impl Context<'_> {
    fn write(&self, name: &str, contents: &str, artifacts: &mut Vec<String>) -> Result<(), CommandError> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents).map_err(|source| CommandError::Io { path, source })?;
        artifacts.push(name.to_string());
        Ok(())
    }

    fn solve_options(&self) -> SolveOptions {
        let g = &self.config.grid;
        SolveOptions {
            half_length: g.half_length,
            n_points: g.n_points,
            order: g.order,
            stencil_richardson: g.stencil_richardson,
            boundary: g.boundary,
            reality_tol: self.config.tolerances.reality,
            ..SolveOptions::default()
        }
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Value,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
}

pub trait Command: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, ctx: &Context) -> Result<Outcome, CommandError>;
}

pub struct Registry {
    commands: Vec<Box<dyn Command>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self { commands: Vec::new() }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(CheckCommand));
        r.register(Box::new(SpectrumCommand));
        r.register(Box::new(MomentumCommand));
        r.register(Box::new(PctCommand));
        r.register(Box::new(Fig1Command));
        r.register(Box::new(SweepCommand));
        r
    }

    /// A later registration under the same name replaces the earlier one.
    pub fn register(&mut self, command: Box<dyn Command>) {
        self.commands.retain(|c| c.name() != command.name());
        self.commands.push(command);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Command> {
        self.commands.iter().find(|c| c.name() == name).map(|c| c.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.commands.iter().map(|c| c.name()).collect()
    }
}

pub fn registry() -> &'static Registry {
    static REGISTRY: OnceLock<Registry> = OnceLock::new();
    REGISTRY.get_or_init(Registry::with_defaults)
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn probes(contour: Contour) -> eup_core::Result<Vec<WavefunctionTable>> {
    Ok(vec![
        WavefunctionTable::from_fn(contour, "gauss", |x| (-x * x / 2.0).exp())?,
        WavefunctionTable::from_fn(contour, "gauss_poly", |x| (x * x * x - 2.0 * x + 0.5) * (-x * x / 2.0).exp())?,
    ])
}

fn fine_stencil() -> StencilScheme {
    StencilScheme::new(4, true).expect("order 4 with extrapolation is a valid scheme")
}

/// Momentum eigenfunctions sampled on the shifted line, checked against
/// their first-order equation and their unit norm.
fn momentum_rows(cfg: &RunConfig, q: &QuasiFreeParams) -> Result<(Vec<Value>, f64, f64), CommandError> {
    let c = &cfg.constants;
    let contour = Contour::shifted(q, 10.0 / q.alpha(), 2001).op("momentum grid")?;
    let rule = QuadratureRule::default();
    let mut rows = Vec::new();
    let (mut worst_ode, mut worst_norm) = (0.0f64, 0.0f64);
    for &p in &cfg.momentum_values {
        let f = WavefunctionTable::try_from_fn(contour, "Phi", |x| momentum_eigenfunction(q, p, x, c))
            .op("momentum eigenfunction")?;
        let ode = momentum_ode_residual(q, p, &f, c, &fine_stencil()).op("momentum ODE residual")?;
        let norm = momentum_norm(q, p, c, &rule).op("momentum norm")?;
        worst_ode = worst_ode.max(ode);
        worst_norm = worst_norm.max((norm - 1.0).abs());
        rows.push(json!({"p": p, "ode_residual": ode, "norm": norm}));
    }
    Ok((rows, worst_ode, worst_norm))
}

struct CheckCommand;

impl Command for CheckCommand {
    fn name(&self) -> &'static str {
        "check"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, CommandError> {
        let cfg = ctx.config;
        let c = &cfg.constants;
        let s = fine_stencil();
        let t = &cfg.tolerances;

        let mut contours = vec![Contour::real_axis(8.0, 1601).op("commutator grid")?];
        if let Some(q) = &cfg.quasi_free {
            contours.push(Contour::shifted(q, 8.0, 1601).op("commutator grid")?);
        }
        let mut commutator = 0.0f64;
        for contour in contours {
            for f in probes(contour).op("probe functions")? {
                commutator = commutator.max(commutator_residual(&cfg.mu, &f, c, &s).op("commutator residual")?);
            }
        }

        // An even point count keeps x = 0 and x = -1 off the grid.
        let grid = Contour::real_axis(6.0, 600).op("PT grid")?;
        let probe = WavefunctionTable::from_fn(grid, "probe", |x| {
            (1.0 + x + c64(0.0, 0.3) * x * x) * (-x * x / 2.0 + c64(0.0, 0.2) * x).exp()
        })
        .op("PT probe")?;
        let pt = pt_symmetry_residual(&cfg.mu, &cfg.potential, &probe, c, &s).op("PT residual")?;

        let mut checks = vec![
            Check::at_most("commutator_residual", commutator, t.commutator),
            Check::at_most("pt_residual", pt, t.pt),
        ];
        let mut results = json!({"commutator_residual": commutator, "pt_residual": pt});
        if let Some(q) = &cfg.quasi_free {
            let (rows, ode, norm) = momentum_rows(cfg, q)?;
            checks.push(Check::at_most("momentum_ode_residual", ode, t.momentum_ode));
            checks.push(Check::at_most("momentum_norm_error", norm, t.quadrature));
            results["momentum"] = Value::Array(rows);
        }
        Ok(Outcome { results, checks, artifacts: Vec::new() })
    }
}

struct SpectrumCommand;

impl Command for SpectrumCommand {
    fn name(&self) -> &'static str {
        "spectrum"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, CommandError> {
        let cfg = ctx.config;
        let t = &cfg.tolerances;
        let states = solve_bound_states(
            &cfg.mu,
            &cfg.potential,
            &cfg.constants,
            cfg.contour,
            cfg.n_levels,
            t.accuracy,
            &ctx.solve_options(),
        )
        .op("spectrum solve")?;
        let r = &states.report;
        let exact = match (&cfg.quasi_free, cfg.potential.is_zero()) {
            (Some(q), true) => Some(*q),
            _ => None,
        };

        let mut levels = Vec::new();
        let mut worst_closed_form = 0.0f64;
        let mut worst_imag = 0.0f64;
        for (k, value) in r.eigenvalues.iter().enumerate() {
            let n = k + 1;
            let ext = r.extrapolated[k];
            worst_imag = worst_imag.max(value.im.abs() / value.re.abs().max(1.0));
            let mut row = json!({
                "n": n,
                "re": value.re,
                "im": value.im,
                "extrapolated_re": ext.re,
                "extrapolated_im": ext.im,
                "convergence_estimate": r.convergence_estimate[k],
                "is_real": r.is_real[k],
            });
            if let Some(q) = &exact {
                let e = energy_level(q, n, &cfg.constants);
                let err = (ext - e).norm() / e;
                worst_closed_form = worst_closed_form.max(err);
                row["closed_form"] = json!(e);
                row["relative_error"] = json!(err);
            }
            levels.push(row);
        }

        let mut artifacts = Vec::new();
        for (k, pair) in states.pairs.iter().enumerate() {
            ctx.write(&format!("eigenfunction_{}.csv", k + 1), &pair.vector.to_csv(), &mut artifacts)?;
        }

        let worst_estimate = r.convergence_estimate.iter().copied().fold(0.0, f64::max);
        let mut checks = vec![
            Check::at_most("max_relative_imaginary_part", worst_imag, r.reality_tol),
            Check::at_most("max_convergence_estimate", worst_estimate, t.accuracy),
        ];
        if exact.is_some() {
            checks.push(Check::at_most("max_relative_error_vs_closed_form", worst_closed_form, t.accuracy));
        }
        let results = json!({
            "path": r.path,
            "boundary": r.grid_meta.boundary,
            "half_length": r.grid_meta.half_length,
            "n_points": r.grid_meta.n_points,
            "order": r.grid_meta.order,
            "broken": r.broken,
            "n_real": r.n_real,
            "reality_tol": r.reality_tol,
            "levels": levels,
        });
        Ok(Outcome { results, checks, artifacts })
    }
}

struct MomentumCommand;

impl Command for MomentumCommand {
    fn name(&self) -> &'static str {
        "momentum"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, CommandError> {
        let cfg = ctx.config;
        let q = cfg.require_quasi_free(self.name())?;
        let (rows, ode, norm) = momentum_rows(cfg, &q)?;
        let mut artifacts = Vec::new();
        let contour = Contour::shifted(&q, 10.0 / q.alpha(), 401).op("momentum grid")?;
        for (k, &p) in cfg.momentum_values.iter().enumerate() {
            let f = WavefunctionTable::try_from_fn(contour, "Phi", |x| momentum_eigenfunction(&q, p, x, &cfg.constants))
                .op("momentum eigenfunction")?;
            ctx.write(&format!("momentum_{k}.csv"), &f.to_csv(), &mut artifacts)?;
        }
        Ok(Outcome {
            results: json!({"eigenfunctions": rows}),
            checks: vec![
                Check::at_most("momentum_ode_residual", ode, cfg.tolerances.momentum_ode),
                Check::at_most("momentum_norm_error", norm, cfg.tolerances.quadrature),
            ],
            artifacts,
        })
    }
}

struct PctCommand;

impl Command for PctCommand {
    fn name(&self) -> &'static str {
        "pct"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, CommandError> {
        let cfg = ctx.config;
        let q = cfg.require_quasi_free(self.name())?;
        let t = &cfg.tolerances;
        let rule = QuadratureRule::default();
        let w = q.omega();

        let contour = Contour::shifted(&q, 20.0 / q.alpha(), 4001).op("z-map grid")?;
        let map = numeric_z_map(&cfg.mu, &contour, c64(0.0, 0.0), &rule).op("z-map")?;
        let mut map_error = 0.0f64;
        for (x, z) in contour.points().iter().zip(&map.z_values) {
            map_error = map_error.max((z_closed_form(&q, *x).op("closed-form z")? - z).norm());
        }

        let mut limit = 0.0f64;
        for sign in [1.0, -1.0] {
            let zc = z_components(&q, sign * 1e6).op("z components")?;
            limit = limit.max((w * zc.zeta - sign * PI / 2.0).abs()).max((w * zc.eta).abs());
        }
        let width = z_width(&q, &rule).op("z width")?;
        let width_error = (width - PI / w).abs() / (PI / w);

        let inv = energy_invariance_check(&q, cfg.n_levels, &cfg.constants, t.accuracy).op("energy invariance")?;
        let worst_dev = inv.levels.iter().map(|l| l.deviation).fold(0.0, f64::max);

        let mut artifacts = Vec::new();
        ctx.write("z_map.csv", &map.to_csv(), &mut artifacts)?;
        let levels: Vec<Value> = inv
            .levels
            .iter()
            .map(|l| json!({"n": l.n, "x_space": l.x_space, "z_space": l.z_space, "deviation": l.deviation}))
            .collect();
        Ok(Outcome {
            results: json!({
                "z_map_error": map_error,
                "limit_defect": limit,
                "z_width": width,
                "z_width_relative_error": width_error,
                "levels": levels,
            }),
            checks: vec![
                Check::at_most("z_map_error", map_error, t.z_map),
                // At |x| = 1e6 the arctan tail is still ~ omega/(alpha^2 x).
                Check::at_most("limit_defect", limit, 1e-5),
                Check::at_most("z_width_relative_error", width_error, t.quadrature),
                Check::at_most("energy_invariance_deviation", worst_dev, t.accuracy),
            ],
            artifacts,
        })
    }
}

struct Fig1Command;

impl Command for Fig1Command {
    fn name(&self) -> &'static str {
        "fig1"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, CommandError> {
        let cfg = ctx.config;
        let alpha = cfg.require_quasi_free(self.name())?.alpha();
        let grid = fig1_grid(cfg.fig1.extent, cfg.fig1.points).op("figure grid")?;
        let curves = fig1_curves(alpha, &grid).op("figure curves")?;

        let mut peak_error = 0.0f64;
        let mut violations = 0usize;
        let mut rows = Vec::new();
        for (k, cv) in curves.iter().enumerate() {
            if k > 0 && curves[k - 1].n == cv.n && cv.variance <= curves[k - 1].variance {
                violations += 1;
            }
            let omega = alpha.hypot(cv.beta_over_alpha * alpha);
            if cv.n == 1 {
                peak_error = peak_error.max((cv.peak() - 2.0 * alpha / (PI * omega)).abs());
            }
            rows.push(json!({
                "n": cv.n,
                "beta_over_alpha": cv.beta_over_alpha,
                "peak": cv.peak(),
                "variance": cv.variance,
            }));
        }
        let mut artifacts = Vec::new();
        ctx.write("fig1.csv", &fig1_csv(&curves), &mut artifacts)?;
        Ok(Outcome {
            results: json!({"alpha": alpha, "curves": rows}),
            checks: vec![
                Check::at_most("ground_state_peak_error", peak_error, 1e-6),
                Check::at_most("variance_order_violations", violations as f64, 0.0),
            ],
            artifacts,
        })
    }
}

struct SweepCommand;

impl Command for SweepCommand {
    fn name(&self) -> &'static str {
        "sweep"
    }

    fn run(&self, ctx: &Context) -> Result<Outcome, CommandError> {
        let cfg = ctx.config;
        let opts = ctx.solve_options();
        let cells: Vec<(f64, f64)> = cfg
            .sweep
            .alpha
            .values()
            .into_iter()
            .flat_map(|a| cfg.sweep.beta.values().into_iter().map(move |b| (a, b)))
            .collect();
        // par_iter over a Vec keeps the cell order in the collected output.
        let rows: Vec<SweepRow> = cells.par_iter().map(|&(a, b)| sweep_cell(cfg, &opts, a, b)).collect();

        let broken = rows.iter().filter(|r| r.broken == Some(true)).count();
        let failed = rows.iter().filter(|r| r.error.is_some()).count();
        let worst_err = rows.iter().filter_map(|r| r.max_relative_error).fold(0.0, f64::max);
        let json_rows: Vec<Value> = rows
            .iter()
            .map(|r| {
                json!({
                    "alpha": r.alpha,
                    "beta": r.beta,
                    "broken": r.broken,
                    "max_imag": r.max_imag,
                    "max_relative_error": r.max_relative_error,
                    "eigenvalues": r.eigenvalues.iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
                    "error": r.error,
                })
            })
            .collect();
        Ok(Outcome {
            results: json!({
                "contour": cfg.contour.name(),
                "cells": json_rows,
                "broken_cells": broken,
                "failed_cells": failed,
            }),
            checks: vec![
                Check::at_most("failed_cells", failed as f64, 0.0),
                Check::at_most("broken_cells", broken as f64, 0.0),
                Check::at_most("max_relative_error_vs_closed_form", worst_err, cfg.tolerances.accuracy),
            ],
            artifacts: Vec::new(),
        })
    }
}

struct SweepRow {
    alpha: f64,
    beta: f64,
    broken: Option<bool>,
    max_imag: Option<f64>,
    max_relative_error: Option<f64>,
    eigenvalues: Vec<Complex64>,
    error: Option<String>,
}

/// A failing cell is recorded, not propagated, so one bad corner of the
/// parameter plane does not hide the rest.
fn sweep_cell(cfg: &RunConfig, opts: &SolveOptions, alpha: f64, beta: f64) -> SweepRow {
    let mut row = SweepRow {
        alpha,
        beta,
        broken: None,
        max_imag: None,
        max_relative_error: None,
        eigenvalues: Vec::new(),
        error: None,
    };
    let solved = QuasiFreeParams::new(alpha, beta).and_then(|q| {
        let states = solve_bound_states(
            &q.mu(),
            &PotentialSpec::Zero,
            &cfg.constants,
            cfg.contour,
            cfg.n_levels,
            cfg.tolerances.accuracy,
            opts,
        )?;
        Ok((q, states.report))
    });
    match solved {
        Ok((q, r)) => {
            let err = r
                .extrapolated
                .iter()
                .enumerate()
                .map(|(k, z)| {
                    let e = energy_level(&q, k + 1, &cfg.constants);
                    (z - e).norm() / e
                })
                .fold(0.0, f64::max);
            row.broken = Some(r.broken);
            row.max_imag = Some(r.max_imag());
            row.max_relative_error = Some(err);
            row.eigenvalues = r.eigenvalues;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}
