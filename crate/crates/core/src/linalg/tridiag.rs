use serde::Serialize;

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymTridiagMatrix {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl SymTridiagMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidParameter("empty tridiagonal matrix".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::LengthMismatch { expected: diag.len() - 1, got: offdiag.len() });
        }
        if diag.iter().chain(&offdiag).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite tridiagonal entry".into()));
        }
        Ok(Self { diag, offdiag })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Infinity norm, the scale used by eigenvalue tolerances.
    pub fn norm_scale(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.offdiag[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Number of eigenvalues strictly below `lambda` (LDL^T pivots).
    pub fn sturm_count(&self, lambda: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - lambda;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let q_safe = if q.abs() < 1e-300 { 1e-300_f64.copysign(q) } else { q };
            let e = self.offdiag[i - 1];
            q = (self.diag[i] - lambda) - e * e / q_safe;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// k-th smallest eigenvalue (0-based) by Sturm bisection.
    pub fn bisect_eigenvalue(&self, k: usize, tol: f64) -> Result<f64> {
        if k >= self.len() {
            return Err(Error::InvalidParameter(format!("level {k} out of range for n = {}", self.len())));
        }
        let (lo, hi) = self.gershgorin();
        let (mut a, mut b) = (lo - 1.0, hi + 1.0);
        // Relative to the eigenvalue, not the matrix norm: graded matrices
        // resolve small eigenvalues far better than eps * ||T||.
        let rel_tol = tol.max(f64::EPSILON);
        for _ in 0..300 {
            let mid = 0.5 * (a + b);
            if b - a <= rel_tol * a.abs().max(b.abs()) || mid <= a || mid >= b {
                return Ok(mid);
            }
            if self.sturm_count(mid) <= k {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Solve (T - shift I) x = rhs with partial pivoting.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: rhs.len() });
        }
        // Row i of U has entries at columns i, i+1, i+2.
        let mut u0: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
        let mut u1: Vec<f64> = self.offdiag.clone();
        u1.push(0.0);
        let mut u2 = vec![0.0; n];
        let mut lower = self.offdiag.clone();
        let mut b = rhs.to_vec();
        let tiny = f64::EPSILON * self.norm_scale();
        for i in 0..n.saturating_sub(1) {
            // Candidate rows i (u0[i], u1[i], u2[i]) and i+1 (lower[i], u0[i+1], u1[i+1]).
            if lower[i].abs() > u0[i].abs() {
                let (a0, a1, a2) = (lower[i], u0[i + 1], u1[i + 1]);
                let (r0, r1, r2) = (u0[i], u1[i], u2[i]);
                u0[i] = a0;
                u1[i] = a1;
                u2[i] = a2;
                b.swap(i, i + 1);
                let m = r0 / a0;
                u0[i + 1] = r1 - m * a1;
                u1[i + 1] = r2 - m * a2;
                b[i + 1] -= m * b[i];
            } else {
                if u0[i] == 0.0 {
                    u0[i] = tiny;
                }
                let m = lower[i] / u0[i];
                u0[i + 1] -= m * u1[i];
                u1[i + 1] -= m * u2[i];
                b[i + 1] -= m * b[i];
            }
            lower[i] = 0.0;
        }
        if u0[n - 1] == 0.0 {
            u0[n - 1] = tiny;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = b[i];
            if i + 1 < n {
                acc -= u1[i] * x[i + 1];
            }
            if i + 2 < n {
                acc -= u2[i] * x[i + 2];
            }
            x[i] = acc / u0[i];
        }
        Ok(x)
    }
}

/// All eigenvalues, ascending, by implicitly shifted QL.
///
/// An off-diagonal element deflates once it is below `tol` times the sum of
/// its neighbouring diagonal entries; `max_iter` bounds the sweeps spent on
/// any one eigenvalue.
pub fn eig_sym_tridiag(m: &SymTridiagMatrix, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("eigensolver tolerance must be positive".into()));
    }
    let tol = tol.max(f64::EPSILON);
    let n = m.len();
    let mut d = m.diag.clone();
    let mut e = m.offdiag.clone();
    e.push(0.0);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < n {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= tol * dd || e[mm] == 0.0 {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > max_iter {
                return Err(Error::NoConvergence { solver: "eig_sym_tridiag", iterations: iter - 1 });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = mm;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_laplacian_3x3() {
        let m = SymTridiagMatrix::new(vec![2.0; 3], vec![-1.0; 2]).unwrap();
        let eig = eig_sym_tridiag(&m, 1e-15, 30).unwrap();
        let s2 = 2f64.sqrt();
        for (got, want) in eig.iter().zip([2.0 - s2, 2.0, 2.0 + s2]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn one_by_one() {
        let m = SymTridiagMatrix::new(vec![5.0], vec![]).unwrap();
        assert_eq!(eig_sym_tridiag(&m, 1e-14, 30).unwrap(), vec![5.0]);
    }

    #[test]
    fn two_by_two() {
        let m = SymTridiagMatrix::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        let eig = eig_sym_tridiag(&m, 1e-14, 30).unwrap();
        assert!((eig[0] + 1.0).abs() < 1e-15 && (eig[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn large_laplacian_matches_closed_form() {
        let n = 200;
        let m = SymTridiagMatrix::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap();
        let eig = eig_sym_tridiag(&m, 1e-15, 50).unwrap();
        for (k, got) in eig.iter().enumerate() {
            let theta = (k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
            assert!((got - (2.0 - 2.0 * theta.cos())).abs() < 1e-12);
        }
        for k in [0, 17, 199] {
            assert!((m.bisect_eigenvalue(k, 1e-15).unwrap() - eig[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn shifted_solve_inverts() {
        let m = SymTridiagMatrix::new(vec![1.0, -3.0, 2.5, 0.1, 4.0], vec![0.5, -2.0, 1.0, 3.0]).unwrap();
        let rhs = vec![1.0, 2.0, -1.0, 0.5, 3.0];
        let x = m.solve_shifted(0.3, &rhs).unwrap();
        let back = m.mul_vec(&x);
        for i in 0..5 {
            assert!((back[i] - 0.3 * x[i] - rhs[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn iteration_cap_reported() {
        let m = SymTridiagMatrix::new(vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(eig_sym_tridiag(&m, 1e-15, 0), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn shape_validated() {
        assert!(SymTridiagMatrix::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiagMatrix::new(vec![f64::NAN], vec![]).is_err());
    }
}
