//! Dense row-major matrices and a pivoted-QR least-squares solver.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// A single-column matrix.
    pub fn column(values: &[f64]) -> Self {
        Matrix {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn col_to_vec(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Rows selected by index, in the given order (duplicates allowed).
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// `self · v`.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| crate::stats::dot(self.row(i), v))
            .collect())
    }

    pub fn is_finite(&self) -> bool {
        crate::stats::all_finite(&self.data)
    }
}

/// Result of a least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub solution: Vec<f64>,
    pub rank: usize,
}

impl LeastSquares {
    pub fn rank_deficient(&self) -> bool {
        self.rank < self.solution.len()
    }
}

/// Minimum-norm least-squares solution of `a · x ≈ b`.
///
/// Uses Householder QR with column pivoting; when the numerical rank `r` is
/// below the column count, the trailing block is eliminated with a second QR
/// (a complete orthogonal decomposition) so the returned `x` has minimum norm.
pub fn least_squares(a: &Matrix, b: &[f64]) -> Result<LeastSquares> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: b.len(),
        });
    }
    if n == 0 {
        return Ok(LeastSquares {
            solution: Vec::new(),
            rank: 0,
        });
    }
    // column-major working copy
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col_to_vec(j)).collect();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut norms: Vec<f64> = cols.iter().map(|c| crate::stats::dot(c, c)).collect();
    let steps = m.min(n);
    let mut diag = vec![0.0; steps];

    for k in 0..steps {
        // pivot on the largest remaining column norm
        let mut best = k;
        for j in k + 1..n {
            if norms[j] > norms[best] {
                best = j;
            }
        }
        if best != k {
            cols.swap(k, best);
            norms.swap(k, best);
            perm.swap(k, best);
        }
        let col = &mut cols[k];
        let alpha_sq: f64 = col[k..].iter().map(|x| x * x).sum();
        let alpha = libm::sqrt(alpha_sq);
        if alpha == 0.0 {
            diag[k] = 0.0;
            continue;
        }
        let sign = if col[k] >= 0.0 { 1.0 } else { -1.0 };
        let r_kk = -sign * alpha;
        // Householder vector v = x - r_kk e_k, stored in col[k..]
        col[k] -= r_kk;
        let vnorm_sq: f64 = col[k..].iter().map(|x| x * x).sum();
        let v: Vec<f64> = col[k..].to_vec();
        col[k] = r_kk;
        for x in col[k + 1..].iter_mut() {
            *x = 0.0;
        }
        diag[k] = r_kk;
        if vnorm_sq == 0.0 {
            continue;
        }
        let apply = |target: &mut [f64]| {
            let s: f64 = v.iter().zip(&target[k..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * s / vnorm_sq;
            for (t, vi) in target[k..].iter_mut().zip(&v) {
                *t -= f * vi;
            }
        };
        for c in cols.iter_mut().skip(k + 1) {
            apply(c);
        }
        apply(&mut rhs);
        for j in k + 1..n {
            norms[j] = cols[j][k + 1..].iter().map(|x| x * x).sum();
        }
    }

    let max_diag = diag.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    let tol = max_diag * (m.max(n) as f64) * f64::EPSILON;
    let rank = diag.iter().take_while(|d| d.abs() > tol).count();

    // R is stored in cols[j][i] for i <= j; take the leading rank rows.
    let r = rank;
    let c = &rhs[..r];
    let mut y = vec![0.0; n];
    if r == n {
        back_substitute(|i, j| cols[j][i], c, &mut y[..r]);
    } else if r > 0 {
        // T = [R11 R12] is r×n. Factor Tᵀ = Q2 R2 (n×r), then x = Q2 R2⁻ᵀ c.
        let mut tcols: Vec<Vec<f64>> = (0..r)
            .map(|i| (0..n).map(|j| if i <= j { cols[j][i] } else { 0.0 }).collect())
            .collect();
        let mut reflectors: Vec<(usize, Vec<f64>, f64)> = Vec::with_capacity(r);
        for k in 0..r {
            let col = &mut tcols[k];
            let alpha = libm::sqrt(col[k..].iter().map(|x| x * x).sum::<f64>());
            let sign = if col[k] >= 0.0 { 1.0 } else { -1.0 };
            let r_kk = -sign * alpha;
            col[k] -= r_kk;
            let v: Vec<f64> = col[k..].to_vec();
            let vn: f64 = v.iter().map(|x| x * x).sum();
            col[k] = r_kk;
            for x in col[k + 1..].iter_mut() {
                *x = 0.0;
            }
            if vn > 0.0 {
                for c2 in tcols.iter_mut().skip(k + 1) {
                    let s: f64 = v.iter().zip(&c2[k..]).map(|(a, b)| a * b).sum();
                    let f = 2.0 * s / vn;
                    for (t, vi) in c2[k..].iter_mut().zip(&v) {
                        *t -= f * vi;
                    }
                }
            }
            reflectors.push((k, v, vn));
        }
        // Solve R2ᵀ w = c (forward substitution), R2 upper r×r in tcols[j][i].
        let mut w = vec![0.0; r];
        for i in 0..r {
            let mut s = c[i];
            for (k, wk) in w.iter().enumerate().take(i) {
                s -= tcols[i][k] * wk;
            }
            w[i] = s / tcols[i][i];
        }
        // x = Q2 [w; 0]: apply reflectors in reverse.
        y[..r].copy_from_slice(&w);
        for (k, v, vn) in reflectors.iter().rev() {
            if *vn == 0.0 {
                continue;
            }
            let s: f64 = v.iter().zip(&y[*k..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * s / vn;
            for (t, vi) in y[*k..].iter_mut().zip(v) {
                *t -= f * vi;
            }
        }
    }
    let mut solution = vec![0.0; n];
    for (pos, &orig) in perm.iter().enumerate() {
        solution[orig] = y[pos];
    }
    Ok(LeastSquares { solution, rank })
}

fn back_substitute(r: impl Fn(usize, usize) -> f64, c: &[f64], out: &mut [f64]) {
    let n = out.len();
    for i in (0..n).rev() {
        let mut s = c[i];
        for j in i + 1..n {
            s -= r(i, j) * out[j];
        }
        out[i] = s / r(i, i);
    }
}
