//! Run configuration: JSON on disk, validated into [`RunConfig`] before any
//! computation starts.

use std::path::{Path, PathBuf};

use eup_core::model::PT_COEFF_TOL;
use eup_core::spectral::{BoundaryCondition, ContourChoice};
use eup_core::{ComplexPolynomial, PhysicalConstants, PotentialSpec, QuasiFreeParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid JSON in {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Field(String),
}

fn field(msg: impl Into<String>) -> ConfigError {
    ConfigError::Field(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MuSpec {
    QuasiFree { alpha: f64, beta: f64 },
    Polynomial(ComplexPolynomial),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    half_length: Option<f64>,
    n_points: Option<usize>,
    order: Option<u8>,
    stencil_richardson: Option<bool>,
    boundary: Option<BoundaryCondition>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    accuracy: Option<f64>,
    reality: Option<f64>,
    commutator: Option<f64>,
    pt: Option<f64>,
    momentum_ode: Option<f64>,
    quadrature: Option<f64>,
    z_map: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    min: f64,
    max: f64,
    count: usize,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    alpha: Option<RawRange>,
    beta: Option<RawRange>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFig1 {
    extent: Option<f64>,
    points: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mu: MuSpec,
    #[serde(default)]
    potential: Option<PotentialSpec>,
    #[serde(default)]
    constants: Option<PhysicalConstants>,
    #[serde(default)]
    contour: Option<ContourChoice>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    n_levels: Option<usize>,
    #[serde(default)]
    tolerances: RawTolerances,
    #[serde(default)]
    momentum_values: Option<Vec<f64>>,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    fig1: RawFig1,
    #[serde(default)]
    output_path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub half_length: Option<f64>,
    pub n_points: Option<usize>,
    pub order: Option<u8>,
    pub stencil_richardson: bool,
    pub boundary: BoundaryCondition,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub accuracy: f64,
    pub reality: Option<f64>,
    pub commutator: f64,
    pub pt: f64,
    pub momentum_ode: f64,
    pub quadrature: f64,
    pub z_map: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.min + k as f64 * step).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub alpha: Range,
    pub beta: Range,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig1 {
    pub extent: f64,
    pub points: usize,
}

/// Validated configuration with every default made explicit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub mu_spec: MuSpec,
    #[serde(skip)]
    pub mu: ComplexPolynomial,
    #[serde(skip)]
    pub quasi_free: Option<QuasiFreeParams>,
    pub potential: PotentialSpec,
    pub constants: PhysicalConstants,
    pub contour: ContourChoice,
    pub grid: Grid,
    pub n_levels: usize,
    pub tolerances: Tolerances,
    pub momentum_values: Vec<f64>,
    pub sweep: Sweep,
    pub fig1: Fig1,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn require_quasi_free(&self, command: &str) -> Result<QuasiFreeParams, ConfigError> {
        self.quasi_free
            .ok_or_else(|| field(format!("mu: the {command} command needs a quasi_free mu")))
    }
}

fn core_field(e: eup_core::Error) -> ConfigError {
    match e {
        eup_core::Error::InvalidParameter(msg) => ConfigError::Field(msg),
        other => ConfigError::Field(other.to_string()),
    }
}

fn positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(field(format!("{name} must be positive")))
    }
}

fn range(name: &str, raw: Option<RawRange>, default: Range) -> Result<Range, ConfigError> {
    let r = raw.map_or(default, |r| Range { min: r.min, max: r.max, count: r.count });
    if !(r.min.is_finite() && r.max.is_finite() && r.min <= r.max) || r.count == 0 {
        return Err(field(format!("sweep.{name} needs finite min <= max and count >= 1")));
    }
    Ok(r)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    parse_config_str(&text).map_err(|e| match e {
        ConfigError::Json { source, .. } => ConfigError::Json { path: path.to_path_buf(), source },
        other => other,
    })
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig =
        serde_json::from_str(text).map_err(|source| ConfigError::Json { path: PathBuf::new(), source })?;

    let (mu, quasi_free) = match &raw.mu {
        MuSpec::QuasiFree { alpha, beta } => {
            let params = QuasiFreeParams::new(*alpha, *beta).map_err(core_field)?;
            (params.mu(), Some(params))
        }
        MuSpec::Polynomial(p) => (p.clone(), QuasiFreeParams::from_mu(p, PT_COEFF_TOL)),
    };
    if !mu.is_pt_symmetric(PT_COEFF_TOL) {
        return Err(field("mu is not PT-symmetric"));
    }
    let potential = raw.potential.unwrap_or(PotentialSpec::Zero);
    if !potential.is_pt_symmetric(PT_COEFF_TOL) {
        return Err(field("potential is not PT-symmetric"));
    }
    let constants = match raw.constants {
        Some(c) => PhysicalConstants::new(c.hbar, c.mass).map_err(core_field)?,
        None => PhysicalConstants::default(),
    };
    let contour = match raw.contour {
        Some(ContourChoice::Shifted) if quasi_free.is_none() => {
            return Err(field("contour: shifted needs a quasi_free mu"));
        }
        Some(c) => c,
        None if quasi_free.is_some() => ContourChoice::Shifted,
        None => ContourChoice::RealAxis,
    };

    let g = raw.grid;
    if let Some(l) = g.half_length {
        positive("grid.half_length", l)?;
    }
    if g.n_points.is_some_and(|n| n < 3) {
        return Err(field("grid.n_points must be at least 3"));
    }
    if let Some(o) = g.order {
        if o != 2 && o != 4 {
            return Err(field("grid.order must be 2 or 4"));
        }
        if o != 2 && contour == ContourChoice::Shifted {
            return Err(field("grid.order: the shifted contour solver is second order"));
        }
    }
    let grid = Grid {
        half_length: g.half_length,
        n_points: g.n_points,
        order: g.order,
        stencil_richardson: g.stencil_richardson.unwrap_or(false),
        boundary: g.boundary.unwrap_or_default(),
    };
    if grid.stencil_richardson && contour == ContourChoice::Shifted {
        return Err(field("grid.stencil_richardson: not available on the shifted contour"));
    }

    let n_levels = raw.n_levels.unwrap_or(3);
    if n_levels == 0 {
        return Err(field("n_levels must be at least 1"));
    }

    let t = raw.tolerances;
    let tolerances = Tolerances {
        accuracy: positive("tolerances.accuracy", t.accuracy.unwrap_or(1e-3))?,
        reality: t.reality.map(|r| positive("tolerances.reality", r)).transpose()?,
        commutator: positive("tolerances.commutator", t.commutator.unwrap_or(1e-9))?,
        pt: positive("tolerances.pt", t.pt.unwrap_or(1e-9))?,
        momentum_ode: positive("tolerances.momentum_ode", t.momentum_ode.unwrap_or(1e-8))?,
        quadrature: positive("tolerances.quadrature", t.quadrature.unwrap_or(1e-10))?,
        z_map: positive("tolerances.z_map", t.z_map.unwrap_or(1e-10))?,
    };

    let momentum_values = raw.momentum_values.unwrap_or_else(|| vec![0.0, 1.7, -3.2]);
    if momentum_values.iter().any(|p| !p.is_finite()) {
        return Err(field("momentum_values must be finite"));
    }

    let sweep = Sweep {
        alpha: range("alpha", raw.sweep.alpha, Range { min: 0.5, max: 2.0, count: 5 })?,
        beta: range("beta", raw.sweep.beta, Range { min: 0.0, max: 2.0, count: 5 })?,
    };
    if sweep.alpha.min <= 0.0 {
        return Err(field("sweep.alpha: alpha must be positive"));
    }

    let fig1 = Fig1 {
        extent: positive("fig1.extent", raw.fig1.extent.unwrap_or(6.0))?,
        points: raw.fig1.points.unwrap_or(241),
    };
    if fig1.points < 2 {
        return Err(field("fig1.points must be at least 2"));
    }

    Ok(RunConfig {
        mu_spec: raw.mu,
        mu,
        quasi_free,
        potential,
        constants,
        contour,
        grid,
        n_levels,
        tolerances,
        momentum_values,
        sweep,
        fig1,
        output_path: raw.output_path,
    })
}
