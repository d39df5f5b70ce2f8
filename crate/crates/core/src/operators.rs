//! Application of the complexified momentum and Hamiltonian to sampled
//! wavefunctions, plus the residuals of the operator identities they obey.
//!
//! Derivatives of mu are taken exactly on the polynomial; only the
//! wavefunction is differentiated by finite differences. Residuals are
//! absolute sup-norms over the trusted interior, i.e. the points whose
//! stencil stays inside the table.

use std::fmt::Write as _;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ensure_finite, ComplexPolynomial, Contour, PhysicalConstants, QuasiFreeParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex samples of a function on a contour grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WavefunctionTable {
    contour: Contour,
    values: Vec<Complex64>,
    label: String,
}

impl WavefunctionTable {
    pub fn new(contour: Contour, values: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        if values.len() != contour.len() {
            return Err(Error::LengthMismatch { expected: contour.len(), got: values.len() });
        }
        for v in &values {
            ensure_finite(*v, "wavefunction sample")?;
        }
        Ok(Self { contour, values, label: label.into() })
    }

    /// Sample `f` at every grid point.
    pub fn from_fn<F>(contour: Contour, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let values = contour.points().into_iter().map(f).collect();
        Self::new(contour, values, label)
    }

    /// Fallible sampling, for closed forms that can hit a branch cut.
    pub fn try_from_fn<F>(contour: Contour, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Result<Complex64>,
    {
        let values = contour.points().into_iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(contour, values, label)
    }

    pub fn contour(&self) -> &Contour {
        &self.contour
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }

    /// Pointwise product with a function of x.
    pub fn map_with_x<F>(&self, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        let values = self.contour.points().into_iter().zip(&self.values).map(|(x, &v)| f(x, v)).collect();
        Self::new(self.contour, values, label)
    }

    /// a * self + b * other on the same contour.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if other.contour != self.contour {
            return Err(Error::InvalidParameter("tables live on different contours".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(u, v)| a * u + b * v).collect();
        Self::new(self.contour, values, format!("{}+{}", self.label, other.label))
    }

    /// PT image on a real-axis grid: (PT f)_j = conj(f_{N-1-j}).
    pub fn pt_image(&self) -> Self {
        Self {
            contour: self.contour,
            values: self.values.iter().rev().map(|v| v.conj()).collect(),
            label: format!("PT[{}]", self.label),
        }
    }

    /// CSV with header `re_x,im_x,re_f,im_f`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re_x,im_x,re_f,im_f\n");
        for (x, v) in self.contour.points().iter().zip(&self.values) {
            let _ = writeln!(out, "{},{},{},{}", x.re, x.im, v.re, v.im);
        }
        out
    }

    /// Parse the CSV written by [`to_csv`](Self::to_csv); the grid must be
    /// uniform, horizontal and symmetric.
    pub fn from_csv(text: &str, label: impl Into<String>) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "re_x,im_x,re_f,im_f" => {}
            other => return Err(Error::Parse(format!("bad header: {other:?}"))),
        }
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (row, line) in lines.enumerate() {
            let fields = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
            if fields.len() != 4 {
                return Err(Error::Parse(format!("row {row}: expected 4 columns, got {}", fields.len())));
            }
            xs.push(Complex64::new(fields[0], fields[1]));
            values.push(Complex64::new(fields[2], fields[3]));
        }
        if xs.len() < 3 {
            return Err(Error::Parse("need at least 3 rows".into()));
        }
        let half_length = -xs[0].re;
        let contour = Contour::new(xs[0].im, half_length, xs.len())?;
        for (x, expected) in xs.iter().zip(contour.points()) {
            if (x - expected).norm() > 1e-9 * (1.0 + half_length) {
                return Err(Error::Parse(format!("grid point {x} is not on a uniform symmetric contour")));
            }
        }
        Self::new(contour, values, label)
    }
}

pub fn sup_norm(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Output of an operator application; only `interior` is trusted.
#[derive(Clone, Debug)]
pub struct AppliedTable {
    pub table: WavefunctionTable,
    pub interior: Range<usize>,
}

impl AppliedTable {
    pub fn interior_values(&self) -> &[Complex64] {
        &self.table.values()[self.interior.clone()]
    }
}

/// External potential V(x).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialSpec {
    #[default]
    Zero,
    Polynomial(ComplexPolynomial),
}

impl PotentialSpec {
    pub fn eval(&self, x: Complex64) -> Complex64 {
        match self {
            PotentialSpec::Zero => Complex64::new(0.0, 0.0),
            PotentialSpec::Polynomial(p) => p.eval(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PotentialSpec::Zero => true,
            PotentialSpec::Polynomial(p) => p.is_zero(),
        }
    }

    pub fn is_pt_symmetric(&self, tol: f64) -> bool {
        match self {
            PotentialSpec::Zero => true,
            PotentialSpec::Polynomial(p) => p.is_pt_symmetric(tol),
        }
    }
}

/// Central-difference scheme for wavefunction derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StencilScheme {
    order: u8,
    richardson: bool,
}

impl Default for StencilScheme {
    fn default() -> Self {
        Self { order: 4, richardson: true }
    }
}

impl StencilScheme {
    pub fn new(order: u8, richardson: bool) -> Result<Self> {
        match order {
            2 | 4 => Ok(Self { order, richardson }),
            _ => Err(Error::InvalidParameter(format!("stencil order must be 2 or 4, got {order}"))),
        }
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn richardson(&self) -> bool {
        self.richardson
    }

    /// Points needed on each side of a node.
    pub fn half_width(&self) -> usize {
        let base = (self.order / 2) as usize;
        if self.richardson {
            2 * base
        } else {
            base
        }
    }

    pub fn interior(&self, n: usize) -> Range<usize> {
        let w = self.half_width();
        w..n.saturating_sub(w).max(w)
    }

    fn base_weights(&self, derivative: u8) -> &'static [(isize, f64)] {
        match (self.order, derivative) {
            (2, 1) => &[(-1, -0.5), (1, 0.5)],
            (2, _) => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
            (_, 1) => &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
            (_, _) => &[(-2, -1.0 / 12.0), (-1, 16.0 / 12.0), (0, -30.0 / 12.0), (1, 16.0 / 12.0), (2, -1.0 / 12.0)],
        }
    }

    /// Offsets and weights of the derivative stencil, to be divided by
    /// h (first derivative) or h^2 (second).
    pub fn weights(&self, derivative: u8) -> Vec<(isize, f64)> {
        let base = self.base_weights(derivative);
        if !self.richardson {
            return base.to_vec();
        }
        let w = f64::from(1u32 << self.order);
        let coarse_scale = 1.0 / f64::from(1u32 << derivative);
        let mut out: Vec<(isize, f64)> = Vec::new();
        let mut push = |off: isize, val: f64| match out.iter_mut().find(|(o, _)| *o == off) {
            Some(entry) => entry.1 += val,
            None => out.push((off, val)),
        };
        for &(o, c) in base {
            push(o, w * c / (w - 1.0));
        }
        for &(o, c) in base {
            push(2 * o, -c * coarse_scale / (w - 1.0));
        }
        out.sort_by_key(|(o, _)| *o);
        out.retain(|(_, c)| *c != 0.0);
        out
    }

    fn raw_first(&self, f: &[Complex64], j: usize, step: usize, h: f64) -> Complex64 {
        let s = step;
        let sh = s as f64 * h;
        match self.order {
            2 => (f[j + s] - f[j - s]) / (2.0 * sh),
            _ => (-f[j + 2 * s] + 8.0 * f[j + s] - 8.0 * f[j - s] + f[j - 2 * s]) / (12.0 * sh),
        }
    }

    fn raw_second(&self, f: &[Complex64], j: usize, step: usize, h: f64) -> Complex64 {
        let s = step;
        let sh2 = (s as f64 * h).powi(2);
        match self.order {
            2 => (f[j + s] - 2.0 * f[j] + f[j - s]) / sh2,
            _ => {
                (-f[j + 2 * s] + 16.0 * f[j + s] - 30.0 * f[j] + 16.0 * f[j - s] - f[j - 2 * s])
                    / (12.0 * sh2)
            }
        }
    }

    fn extrapolate(&self, fine: Complex64, coarse: Complex64) -> Complex64 {
        let w = f64::from(1u32 << self.order);
        (w * fine - coarse) / (w - 1.0)
    }

    /// f'(x_j); caller guarantees j is interior.
    pub fn first(&self, f: &[Complex64], j: usize, h: f64) -> Complex64 {
        if self.richardson {
            self.extrapolate(self.raw_first(f, j, 1, h), self.raw_first(f, j, 2, h))
        } else {
            self.raw_first(f, j, 1, h)
        }
    }

    /// f''(x_j); caller guarantees j is interior.
    pub fn second(&self, f: &[Complex64], j: usize, h: f64) -> Complex64 {
        if self.richardson {
            self.extrapolate(self.raw_second(f, j, 1, h), self.raw_second(f, j, 2, h))
        } else {
            self.raw_second(f, j, 1, h)
        }
    }
}

fn interior_or_err(s: &StencilScheme, contour: &Contour) -> Result<Range<usize>> {
    let range = s.interior(contour.len());
    if range.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{} points leave no interior for a stencil of half-width {}",
            contour.len(),
            s.half_width()
        )));
    }
    Ok(range)
}

fn applied(f: &WavefunctionTable, label: String, interior: Range<usize>, values: Vec<(usize, Complex64)>) -> Result<AppliedTable> {
    let mut out = vec![Complex64::new(0.0, 0.0); f.contour.len()];
    for (j, v) in values {
        out[j] = v;
    }
    Ok(AppliedTable { table: WavefunctionTable::new(f.contour, out, label)?, interior })
}

/// p f = -i hbar (1 + mu) f' - (i hbar / 2) mu' f.
pub fn apply_momentum(
    mu: &ComplexPolynomial,
    f: &WavefunctionTable,
    c: &PhysicalConstants,
    s: &StencilScheme,
) -> Result<AppliedTable> {
    f.contour.check_nonsingular(mu)?;
    let interior = interior_or_err(s, &f.contour)?;
    let one_plus = mu.one_plus();
    let dmu = mu.derive();
    let h = f.contour.spacing();
    let values = interior
        .clone()
        .map(|j| {
            let x = f.contour.point(j as isize);
            let df = s.first(&f.values, j, h);
            (j, -I * c.hbar * one_plus.eval(x) * df - I * (c.hbar / 2.0) * dmu.eval(x) * f.values[j])
        })
        .collect();
    applied(f, format!("p[{}]", f.label), interior, values)
}

/// H f = -(hbar^2/2m)[(1+mu)^2 f'' + 2(1+mu)mu' f' + ((1+mu)mu''/2 + mu'^2/4) f] + V f.
pub fn apply_hamiltonian(
    mu: &ComplexPolynomial,
    v: &PotentialSpec,
    f: &WavefunctionTable,
    c: &PhysicalConstants,
    s: &StencilScheme,
) -> Result<AppliedTable> {
    f.contour.check_nonsingular(mu)?;
    let interior = interior_or_err(s, &f.contour)?;
    let one_plus = mu.one_plus();
    let dmu = mu.derive();
    let ddmu = dmu.derive();
    let k = c.kinetic();
    let h = f.contour.spacing();
    let values = interior
        .clone()
        .map(|j| {
            let x = f.contour.point(j as isize);
            let a = one_plus.eval(x);
            let d1 = dmu.eval(x);
            let d2 = ddmu.eval(x);
            let fj = f.values[j];
            let kinetic = a * a * s.second(&f.values, j, h)
                + 2.0 * a * d1 * s.first(&f.values, j, h)
                + (a * d2 / 2.0 + d1 * d1 / 4.0) * fj;
            (j, -k * kinetic + v.eval(x) * fj)
        })
        .collect();
    applied(f, format!("H[{}]", f.label), interior, values)
}

/// sup | x(p f) - p(x f) - i hbar (1 + mu) f | over the interior.
pub fn commutator_residual(
    mu: &ComplexPolynomial,
    f: &WavefunctionTable,
    c: &PhysicalConstants,
    s: &StencilScheme,
) -> Result<f64> {
    let xf = f.map_with_x(format!("x*{}", f.label), |x, v| x * v)?;
    let pf = apply_momentum(mu, f, c, s)?;
    let pxf = apply_momentum(mu, &xf, c, s)?;
    let one_plus = mu.one_plus();
    let residual = pf
        .interior
        .clone()
        .map(|j| {
            let x = f.contour.point(j as isize);
            let lhs = x * pf.table.values[j] - pxf.table.values[j];
            (lhs - I * c.hbar * one_plus.eval(x) * f.values[j]).norm()
        })
        .fold(0.0, f64::max);
    Ok(residual)
}

/// sup | H(PT f) - PT(H f) | over the interior of a real-axis grid.
pub fn pt_symmetry_residual(
    mu: &ComplexPolynomial,
    v: &PotentialSpec,
    f: &WavefunctionTable,
    c: &PhysicalConstants,
    s: &StencilScheme,
) -> Result<f64> {
    if f.contour.offset() != 0.0 {
        return Err(Error::ContourNotReflectionInvariant { offset: f.contour.offset() });
    }
    let h_of_pt = apply_hamiltonian(mu, v, &f.pt_image(), c, s)?;
    let hf = apply_hamiltonian(mu, v, f, c, s)?;
    let pt_of_h = hf.table.pt_image();
    let residual = h_of_pt
        .interior
        .clone()
        .map(|j| (h_of_pt.table.values[j] - pt_of_h.values[j]).norm())
        .fold(0.0, f64::max);
    Ok(residual)
}

/// sup | (1 + alpha^2 x^2 + 2i beta x) f' + (alpha^2 x + i beta - i p/hbar) f |.
pub fn momentum_ode_residual(
    params: &QuasiFreeParams,
    p_eig: f64,
    f: &WavefunctionTable,
    c: &PhysicalConstants,
    s: &StencilScheme,
) -> Result<f64> {
    let mu = params.mu();
    f.contour.check_nonsingular(&mu)?;
    let interior = interior_or_err(s, &f.contour)?;
    let one_plus = mu.one_plus();
    let a2 = params.alpha() * params.alpha();
    let h = f.contour.spacing();
    let residual = interior
        .map(|j| {
            let x = f.contour.point(j as isize);
            let lin = a2 * x + I * params.beta() - I * (p_eig / c.hbar);
            (one_plus.eval(x) * s.first(&f.values, j, h) + lin * f.values[j]).norm()
        })
        .fold(0.0, f64::max);
    Ok(residual)
}
