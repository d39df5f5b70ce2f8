use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseComplexMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl DenseComplexMatrix {
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        if entries.len() != n * n {
            return Err(Error::LengthMismatch { expected: n * n, got: entries.len() });
        }
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(Self { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![ZERO; n * n] }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(n: usize, mut f: F) -> Result<Self> {
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self::new(n, entries)
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: r.len() });
            }
            entries.extend_from_slice(r);
        }
        Self::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.n + j] += v;
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn conj_transpose(&self) -> Self {
        let n = self.n;
        Self { n, entries: (0..n * n).map(|k| self.get(k % n, k / n).conj()).collect() }
    }

    /// conj(J M J) with J the exchange matrix: the discrete PT image.
    pub fn pt_image(&self) -> Self {
        let n = self.n;
        Self {
            n,
            entries: (0..n * n).map(|k| self.get(n - 1 - k / n, n - 1 - k % n).conj()).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| self.entries[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn shifted(&self, shift: Complex64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.add_to(i, i, -shift);
        }
        out
    }

    pub fn lu(&self) -> LuDecomposition {
        LuDecomposition::new(self)
    }

    pub fn determinant(&self) -> Complex64 {
        self.lu().determinant()
    }

    /// Upper Hessenberg form by Householder reflections (similarity).
    pub fn hessenberg(&self) -> Self {
        let n = self.n;
        let mut a = self.clone();
        let mut v = vec![ZERO; n];
        for k in 0..n.saturating_sub(2) {
            let norm = (k + 1..n).map(|i| a.get(i, k).norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let x0 = a.get(k + 1, k);
            let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
            for i in k + 1..n {
                v[i] = a.get(i, k);
            }
            v[k + 1] += phase * norm;
            let vnorm2: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum();
            if vnorm2 == 0.0 {
                continue;
            }
            let beta = 2.0 / vnorm2;
            // A <- (I - beta v v^H) A
            for j in k..n {
                let s: Complex64 = (k + 1..n).map(|i| v[i].conj() * a.get(i, j)).sum();
                let s = s * beta;
                for i in k + 1..n {
                    let t = v[i] * s;
                    a.add_to(i, j, -t);
                }
            }
            // A <- A (I - beta v v^H)
            for i in 0..n {
                let row = &mut a.entries[i * n..(i + 1) * n];
                let s: Complex64 = (k + 1..n).map(|j| row[j] * v[j]).sum();
                let s = s * beta;
                for j in k + 1..n {
                    row[j] -= s * v[j].conj();
                }
            }
            for i in k + 2..n {
                a.set(i, k, ZERO);
            }
        }
        a
    }
}

/// PA = LU with partial pivoting.
#[derive(Clone, Debug)]
pub struct LuDecomposition {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    sign: f64,
}

impl LuDecomposition {
    fn new(m: &DenseComplexMatrix) -> Self {
        let n = m.n;
        let mut lu = m.entries.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (p, _) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            if pivot.norm() == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                if factor.norm() == 0.0 {
                    continue;
                }
                lu[i * n + k] = factor;
                let (upper, lower) = lu.split_at_mut(i * n);
                let pivot_row = &upper[k * n + k + 1..k * n + n];
                for (dst, src) in lower[k + 1..n].iter_mut().zip(pivot_row) {
                    *dst -= factor * src;
                }
            }
        }
        Self { n, lu, perm, sign }
    }

    pub fn determinant(&self) -> Complex64 {
        (0..self.n).fold(Complex64::new(self.sign, 0.0), |acc, i| acc * self.lu[i * self.n + i])
    }

    /// Smallest pivot modulus; zero means singular.
    pub fn min_pivot(&self) -> f64 {
        (0..self.n).map(|i| self.lu[i * self.n + i].norm()).fold(f64::INFINITY, f64::min)
    }

    /// Solve A x = b; zero pivots are nudged to `floor` (inverse iteration).
    pub fn solve(&self, b: &[Complex64], floor: f64) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            let mut pivot = self.lu[i * n + i];
            if pivot.norm() < floor {
                pivot = Complex64::new(floor, 0.0);
            }
            x[i] = acc / pivot;
        }
        x
    }
}

impl DenseComplexMatrix {
    /// (lower, upper) bandwidths: largest i - j and j - i with a nonzero entry.
    pub fn bandwidths(&self) -> (usize, usize) {
        let n = self.n;
        let (mut kl, mut ku) = (0, 0);
        for i in 0..n {
            for j in 0..n {
                if self.entries[i * n + j].norm() != 0.0 {
                    if i > j {
                        kl = kl.max(i - j);
                    } else {
                        ku = ku.max(j - i);
                    }
                }
            }
        }
        (kl, ku)
    }
}

/// LU with partial pivoting restricted to a band (LAPACK gbtrf layout:
/// multipliers kept per elimination step, U widened to kl + ku).
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    width: usize,
    // row i holds columns i - kl ..= i + kl + ku
    band: Vec<Complex64>,
    mult: Vec<Complex64>,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn new(m: &DenseComplexMatrix, kl: usize, ku: usize) -> Self {
        let n = m.n;
        let width = 2 * kl + ku + 1;
        let mut band = vec![ZERO; n * width];
        let idx = |i: usize, j: usize| i * width + (j + kl - i);
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                band[idx(i, j)] = m.get(i, j);
            }
        }
        let mut mult = vec![ZERO; n * kl.max(1)];
        let mut piv = vec![0; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = band[idx(k, k)].norm();
            for i in k + 1..=last_row {
                let v = band[idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    band.swap(idx(k, j), idx(p, j));
                }
            }
            let pivot = band[idx(k, k)];
            for i in k + 1..=last_row {
                let factor = if pivot.norm() == 0.0 { ZERO } else { band[idx(i, k)] / pivot };
                mult[k * kl.max(1) + (i - k - 1)] = factor;
                band[idx(i, k)] = ZERO;
                if factor.norm() != 0.0 {
                    for j in k + 1..=last_col {
                        let u = band[idx(k, j)];
                        band[idx(i, j)] -= factor * u;
                    }
                }
            }
        }
        Self { n, kl, width, band, mult, piv }
    }

    pub fn solve(&self, b: &[Complex64], floor: f64) -> Vec<Complex64> {
        let (n, kl, width) = (self.n, self.kl, self.width);
        let idx = |i: usize, j: usize| i * width + (j + kl - i);
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let last_row = (k + kl).min(n - 1);
            for i in k + 1..=last_row {
                let t = self.mult[k * kl.max(1) + (i - k - 1)] * x[k];
                x[i] -= t;
            }
        }
        let reach = width - kl - 1;
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..=(i + reach).min(n - 1) {
                acc -= self.band[idx(i, j)] * x[j];
            }
            let mut pivot = self.band[idx(i, i)];
            if pivot.norm() < floor {
                pivot = Complex64::new(floor, 0.0);
            }
            x[i] = acc / pivot;
        }
        x
    }
}

/// Eigenvalue of [[a, b], [c, d]] closest to d.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let (l1, l2) = eig2(a, b, c, d);
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let half_tr = (a + d) / 2.0;
    let disc = ((a - d) / 2.0).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    // Recover the smaller root from the determinant to avoid cancellation.
    let det = a * d - b * c;
    if l1.norm() >= l2.norm() && l1.norm() > 0.0 {
        (l1, det / l1)
    } else if l2.norm() > 0.0 {
        (det / l2, l2)
    } else {
        (l1, l2)
    }
}

/// All eigenvalues of a complex matrix: Householder reduction to Hessenberg
/// form followed by single-shift QR with Wilkinson shifts.
///
/// A subdiagonal entry deflates once it falls below `tol` times its two
/// diagonal neighbours; `max_iter` caps the QR sweeps spent on one eigenvalue.
pub fn eig_dense_complex(m: &DenseComplexMatrix, tol: f64, max_iter: usize) -> Result<Vec<Complex64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("eigensolver tolerance must be positive".into()));
    }
    let tol = tol.max(f64::EPSILON);
    let n = m.n;
    let mut h = m.hessenberg();
    let norm = h.frobenius().max(f64::MIN_POSITIVE);
    let mut eigs = Vec::with_capacity(n);
    let mut rot: Vec<(Complex64, Complex64)> = vec![(ONE, ZERO); n];

    let mut hi = n - 1;
    let mut its = 0;
    loop {
        if hi == 0 {
            eigs.push(h.get(0, 0));
            break;
        }
        let mut l = hi;
        while l > 0 {
            let mut s = h.get(l - 1, l - 1).norm() + h.get(l, l).norm();
            if s == 0.0 {
                s = norm;
            }
            if h.get(l, l - 1).norm() <= tol * s {
                h.set(l, l - 1, ZERO);
                break;
            }
            l -= 1;
        }
        if l == hi {
            eigs.push(h.get(hi, hi));
            hi -= 1;
            its = 0;
            continue;
        }
        if l + 1 == hi {
            let (l1, l2) = eig2(h.get(l, l), h.get(l, hi), h.get(hi, l), h.get(hi, hi));
            eigs.push(l1);
            eigs.push(l2);
            if l == 0 {
                break;
            }
            hi = l - 1;
            its = 0;
            continue;
        }
        its += 1;
        if its > max_iter {
            return Err(Error::NoConvergence { solver: "eig_dense_complex", iterations: its - 1 });
        }
        let shift = if its % 10 == 0 {
            // exceptional shift to break cycles
            h.get(hi, hi) + Complex64::new(h.get(hi, hi - 1).norm(), h.get(hi - 1, hi - 2).norm())
        } else {
            wilkinson_shift(h.get(hi - 1, hi - 1), h.get(hi - 1, hi), h.get(hi, hi - 1), h.get(hi, hi))
        };
        for k in l..=hi {
            h.add_to(k, k, -shift);
        }
        // H - sI = QR
        for k in l..hi {
            let x = h.get(k, k);
            let y = h.get(k + 1, k);
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (x / r, y / r) };
            rot[k] = (c, s);
            for j in k..=hi {
                let a = h.get(k, j);
                let b = h.get(k + 1, j);
                h.set(k, j, c.conj() * a + s.conj() * b);
                h.set(k + 1, j, -s * a + c * b);
            }
        }
        // RQ + sI
        for k in l..hi {
            let (c, s) = rot[k];
            for i in l..=(k + 1).min(hi) {
                let a = h.get(i, k);
                let b = h.get(i, k + 1);
                h.set(i, k, a * c + b * s);
                h.set(i, k + 1, -a * s.conj() + b * c.conj());
            }
        }
        for k in l..=hi {
            h.add_to(k, k, shift);
        }
    }
    Ok(eigs)
}
