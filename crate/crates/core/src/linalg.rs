//! Small direct solvers: constant-coefficient tridiagonal, dense LU with
//! partial pivoting, and block-tridiagonal elimination built on the dense LU.

use crate::{Error, Real, Result};

/// Factorization of the tridiagonal Toeplitz matrix `tridiag(off, diag, off)`
/// of size `n` (Thomas algorithm, no pivoting).
#[derive(Clone, Debug)]
pub(crate) struct Tridiagonal<T> {
    off: T,
    upper: Vec<T>,
    inv_pivot: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn new(off: T, diag: T, n: usize) -> Result<Self> {
        let mut upper = vec![T::zero(); n];
        let mut inv_pivot = vec![T::zero(); n];
        let mut prev = T::zero();
        for i in 0..n {
            let pivot = diag - off * prev;
            if pivot == T::zero() || !pivot.is_finite() {
                return Err(Error::Singular(format!("tridiagonal pivot {i} vanished")));
            }
            inv_pivot[i] = T::one() / pivot;
            prev = off * inv_pivot[i];
            upper[i] = prev;
        }
        Ok(Self { off, upper, inv_pivot })
    }

    pub fn solve(&self, rhs: &mut [T]) {
        let n = self.upper.len();
        let mut prev = T::zero();
        for i in 0..n {
            rhs[i] = (rhs[i] - self.off * prev) * self.inv_pivot[i];
            prev = rhs[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            rhs[i] = rhs[i] - self.upper[i] * rhs[i + 1];
        }
    }
}

/// Dense LU with partial pivoting, row-major storage.
#[derive(Clone, Debug)]
pub(crate) struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> DenseLu<T> {
    pub fn new(mut a: Vec<T>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tiny = scale * T::epsilon() * T::from_usize_lossy(n.max(1)) * T::lit(1e-3);
        for col in 0..n {
            let (piv, best) = (col..n)
                .map(|r| (r, a[r * n + col].abs()))
                .fold((col, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(best > tiny) {
                return Err(Error::Singular(format!("zero pivot in column {col}")));
            }
            if piv != col {
                for c in 0..n {
                    a.swap(piv * n + c, col * n + c);
                }
                perm.swap(piv, col);
                sign = -sign;
            }
            let inv = T::one() / a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] * inv;
                a[r * n + col] = f;
                if f != T::zero() {
                    for c in col + 1..n {
                        a[r * n + c] = a[r * n + c] - f * a[col * n + c];
                    }
                }
            }
        }
        Ok(Self { n, lu: a, perm, sign })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut acc = x[r];
            for c in 0..r {
                acc = acc - self.lu[r * n + c] * x[c];
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in r + 1..n {
                acc = acc - self.lu[r * n + c] * x[c];
            }
            x[r] = acc / self.lu[r * n + r];
        }
        x
    }

    /// Solves for every column of the row-major `n x m` matrix `b` in place.
    pub fn solve_columns(&self, b: &mut [T], m: usize) {
        let n = self.n;
        let mut col = vec![T::zero(); n];
        for j in 0..m {
            for i in 0..n {
                col[i] = b[i * m + j];
            }
            let x = self.solve(&col);
            for i in 0..n {
                b[i * m + j] = x[i];
            }
        }
    }

    /// Sign and natural log of `|det|`.
    pub fn log_det(&self) -> (T, T) {
        let mut sign = self.sign;
        let mut log = T::zero();
        for i in 0..self.n {
            let d = self.lu[i * self.n + i];
            if d < T::zero() {
                sign = -sign;
            }
            log = log + d.abs().ln();
        }
        (sign, log)
    }

    /// Ratio of smallest to largest pivot magnitude, a cheap conditioning hint.
    pub fn pivot_ratio(&self) -> T {
        let mut lo = T::infinity();
        let mut hi = T::zero();
        for i in 0..self.n {
            let d = self.lu[i * self.n + i].abs();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        lo / hi
    }
}

/// `c = a * b` for row-major square `n x n` matrices.
fn matmul<T: Real>(a: &[T], b: &[T], n: usize) -> Vec<T> {
    let mut c = vec![T::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let f = a[i * n + k];
            if f == T::zero() {
                continue;
            }
            for j in 0..n {
                c[i * n + j] = c[i * n + j] + f * b[k * n + j];
            }
        }
    }
    c
}

fn matvec<T: Real>(a: &[T], x: &[T], n: usize, out: &mut [T]) {
    for i in 0..n {
        out[i] = a[i * n..(i + 1) * n].iter().zip(x).fold(T::zero(), |s, (p, q)| s + *p * *q);
    }
}

/// Block-tridiagonal system with `rows` block rows of size `n`: block row `r`
/// reads `sub[r] x[r-1] + diag[r] x[r] + sup[r] x[r+1] = b[r]`.
pub(crate) struct BlockTridiagonal<T> {
    n: usize,
    pivots: Vec<DenseLu<T>>,
    // pivots[r]^{-1} sup[r], kept for back substitution.
    upper: Vec<Vec<T>>,
    sub: Vec<Vec<T>>,
}

impl<T: Real> BlockTridiagonal<T> {
    pub fn new(sub: Vec<Vec<T>>, diag: Vec<Vec<T>>, sup: Vec<Vec<T>>, n: usize) -> Result<Self> {
        let rows = diag.len();
        let mut pivots: Vec<DenseLu<T>> = Vec::with_capacity(rows);
        let mut upper: Vec<Vec<T>> = Vec::with_capacity(rows);
        for r in 0..rows {
            let mut d = diag[r].clone();
            if r > 0 {
                // d -= sub[r] * upper[r-1]
                let prod = matmul(&sub[r], &upper[r - 1], n);
                for (a, b) in d.iter_mut().zip(&prod) {
                    *a = *a - *b;
                }
            }
            let lu = DenseLu::new(d, n)?;
            let mut u = sup[r].clone();
            if r + 1 < rows {
                lu.solve_columns(&mut u, n);
            }
            pivots.push(lu);
            upper.push(u);
        }
        Ok(Self { n, pivots, upper, sub })
    }

    /// Solves in place; `b` is block-row-major (`rows * n`).
    pub fn solve(&self, b: &mut [T]) {
        let n = self.n;
        let rows = self.pivots.len();
        let mut tmp = vec![T::zero(); n];
        for r in 0..rows {
            if r > 0 {
                let (prev, cur) = b.split_at_mut(r * n);
                matvec(&self.sub[r], &prev[(r - 1) * n..], n, &mut tmp);
                for (a, t) in cur[..n].iter_mut().zip(&tmp) {
                    *a = *a - *t;
                }
            }
            let x = self.pivots[r].solve(&b[r * n..(r + 1) * n]);
            b[r * n..(r + 1) * n].copy_from_slice(&x);
        }
        for r in (0..rows.saturating_sub(1)).rev() {
            let (cur, next) = b.split_at_mut((r + 1) * n);
            matvec(&self.upper[r], &next[..n], n, &mut tmp);
            for (a, t) in cur[r * n..].iter_mut().zip(&tmp) {
                *a = *a - *t;
            }
        }
    }

    pub fn log_det(&self) -> (T, T) {
        self.pivots.iter().fold((T::one(), T::zero()), |(s, l), p| {
            let (ps, pl) = p.log_det();
            (s * ps, l + pl)
        })
    }
}
