use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// LU factorization with partial pivoting of a banded matrix.
///
/// Row `i` is stored densely over columns `i - kl ..= i + kl + ku`, which
/// leaves room for the fill created by row interchanges.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<c64>,
    piv: Vec<usize>,
}

impl BandedLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    pub fn factor(a: &CsrMatrix<c64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension { expected: n, got: a.ncols(), context: "direct solve" });
        }
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut lu = Self { n, kl, ku, width, data: vec![c64::default(); n * width], piv: vec![0; n] };
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let idx = lu.at(i, j as usize);
                lu.data[idx] = v;
            }
        }
        let scale = lu.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.data[lu.at(k, k)].norm();
            for r in k + 1..=last {
                let v = lu.data[lu.at(r, k)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= 1e-300 || best <= f64::EPSILON * 1e-4 * scale {
                return Err(Error::SingularMatrix(k));
            }
            lu.piv[k] = p;
            let hi = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=hi {
                    let (ik, ip) = (lu.at(k, j), lu.at(p, j));
                    lu.data.swap(ik, ip);
                }
            }
            let pivot = lu.data[lu.at(k, k)];
            for r in k + 1..=last {
                let irk = lu.at(r, k);
                let f = lu.data[irk] / pivot;
                lu.data[irk] = f;
                if f == c64::default() {
                    continue;
                }
                let (rb, kb) = (lu.at(r, k + 1), lu.at(k, k + 1));
                for off in 0..hi - k {
                    let v = lu.data[kb + off];
                    lu.data[rb + off] -= f * v;
                }
            }
        }
        Ok(lu)
    }

    pub fn solve(&self, b: &[c64]) -> Vec<c64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            if xk != c64::default() {
                for r in k + 1..=(k + self.kl).min(n - 1) {
                    x[r] -= self.data[self.at(r, k)] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let hi = (k + self.kl + self.ku).min(n - 1);
            let mut s = x[k];
            for j in k + 1..=hi {
                s -= self.data[self.at(k, j)] * x[j];
            }
            x[k] = s / self.data[self.at(k, k)];
        }
        x
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }
}

/// Solves `A x = b` by banded LU.
pub fn direct_solve(a: &CsrMatrix<c64>, b: &[c64]) -> Result<Vec<c64>> {
    Ok(BandedLu::factor(a)?.solve(b))
}
