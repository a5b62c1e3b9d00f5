//! Small dense and banded linear algebra used by the solvers.
//!
//! The discrete Laplacian is stored as a symmetric band (lower half) and
//! factored once by banded Cholesky; Newton systems are dense and go through
//! LU with partial pivoting. The kernel scan needs singular values of a
//! nonsymmetric block matrix, which one-sided Jacobi computes without squaring
//! the condition number.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, sqrt};
use crate::{Error, Result};

/// Symmetric matrix with `kd` sub-diagonals, lower half stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kd: usize,
    // row i holds entries (i, i-kd) ..= (i, i); out-of-range slots stay zero
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kd: usize) -> Self {
        Self { n, kd, data: vec![0.0; n * (kd + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.kd {
            None
        } else {
            Some(i * (self.kd + 1) + self.kd - (i - j))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Sets `(i, j)` and, by symmetry, `(j, i)`.
    ///
    /// Panics if the entry lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] = value;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn add_diagonal(&mut self, d: &[f64]) {
        debug_assert_eq!(d.len(), self.n);
        for (i, di) in d.iter().enumerate() {
            let s = i * (self.kd + 1) + self.kd;
            self.data[s] += di;
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        let w = self.kd + 1;
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let row = &self.data[i * w..(i + 1) * w];
            let j0 = i.saturating_sub(self.kd);
            let mut acc = row[self.kd] * x[i];
            for j in j0..i {
                let a = row[self.kd - (i - j)];
                if a != 0.0 {
                    acc += a * x[j];
                    y[j] += a * x[i];
                }
            }
            y[i] += acc;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// `⟨Ax, x⟩`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        crate::math::dot(&self.mul(x), x)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kd);
                let hi = (i + self.kd + 1).min(self.n);
                (lo..hi).map(|j| abs(self.get(i, j))).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kd);
            let hi = (i + self.kd + 1).min(self.n);
            for j in lo..hi {
                m[(i, j)] = self.get(i, j);
            }
        }
        m
    }

    pub fn cholesky(&self) -> Result<BandCholesky> {
        let n = self.n;
        let kd = self.kd;
        let w = kd + 1;
        let mut l = self.data.clone();
        for j in 0..n {
            let k0 = j.saturating_sub(kd);
            let mut d = l[j * w + kd];
            for k in k0..j {
                let ljk = l[j * w + kd - (j - k)];
                d -= ljk * ljk;
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { row: j, pivot: d });
            }
            let djj = sqrt(d);
            l[j * w + kd] = djj;
            for i in (j + 1)..(j + kd + 1).min(n) {
                let k0 = i.saturating_sub(kd);
                let mut s = l[i * w + kd - (i - j)];
                for k in k0..j {
                    s -= l[i * w + kd - (i - k)] * l[j * w + kd - (j - k)];
                }
                l[i * w + kd - (i - j)] = s / djj;
            }
        }
        Ok(BandCholesky { n, kd, l })
    }
}

/// `A = L Lᵀ` for a [`BandMatrix`], reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    kd: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let w = self.kd + 1;
        let kd = self.kd;
        for i in 0..self.n {
            let mut s = b[i];
            for k in i.saturating_sub(kd)..i {
                s -= self.l[i * w + kd - (i - k)] * b[k];
            }
            b[i] = s / self.l[i * w + kd];
        }
        for i in (0..self.n).rev() {
            let mut s = b[i];
            for k in (i + 1)..(i + kd + 1).min(self.n) {
                s -= self.l[k * w + kd - (k - i)] * b[k];
            }
            b[i] = s / self.l[i * w + kd];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl core::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn set_column(&mut self, j: usize, col: &[f64]) {
        for (i, v) in col.iter().enumerate() {
            self[(i, j)] = *v;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| crate::math::dot(self.row(i), x)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        crate::math::sup_norm(&self.data)
    }

    pub fn lu(&self) -> Result<DenseLu> {
        assert_eq!(self.rows, self.cols, "LU needs a square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let mut p = k;
            let mut best = abs(a[k * n + k]);
            for i in (k + 1)..n {
                let v = abs(a[i * n + k]);
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= scale * 1e-300 || best == 0.0 {
                return Err(Error::Singular { column: k });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                if f != 0.0 {
                    let (top, bottom) = a.split_at_mut(i * n);
                    let rk = &top[k * n + k + 1..k * n + n];
                    let ri = &mut bottom[k + 1..n];
                    for (x, y) in ri.iter_mut().zip(rk) {
                        *x -= f * y;
                    }
                }
            }
        }
        Ok(DenseLu { n, lu: a, perm })
    }

    /// Singular values (descending) and right singular vectors by one-sided
    /// Jacobi. Column `k` of the returned matrix pairs with `sigma[k]`.
    pub fn svd_right(&self) -> (Vec<f64>, DenseMatrix) {
        let m = self.rows;
        let n = self.cols;
        // work on columns: store transposed so columns are contiguous
        let mut u: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| self[(i, j)]).collect()).collect();
        let mut v: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect();
        let tol = 1e-15;
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let alpha = crate::math::dot(&u[p], &u[p]);
                    let beta = crate::math::dot(&u[q], &u[q]);
                    let gamma = crate::math::dot(&u[p], &u[q]);
                    if gamma == 0.0 || abs(gamma) <= tol * sqrt(alpha * beta) {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (abs(zeta) + sqrt(1.0 + zeta * zeta));
                    let t = if zeta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / sqrt(1.0 + t * t);
                    let s = c * t;
                    let (lo, hi) = u.split_at_mut(q);
                    rotate(&mut lo[p], &mut hi[0], c, s);
                    let (lo, hi) = v.split_at_mut(q);
                    rotate(&mut lo[p], &mut hi[0], c, s);
                }
            }
            if !rotated {
                break;
            }
        }
        let mut order: Vec<(f64, usize)> = u.iter().enumerate().map(|(j, col)| (crate::math::norm2(col), j)).collect();
        order.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
        let sigma: Vec<f64> = order.iter().map(|(s, _)| *s).collect();
        let mut vm = DenseMatrix::zeros(n, n);
        for (k, (_, j)) in order.iter().enumerate() {
            vm.set_column(k, &v[*j]);
        }
        (sigma, vm)
    }
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let xa = *a;
        let yb = *b;
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }
}
