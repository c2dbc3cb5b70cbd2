//! Sparse linear algebra for the lattice Laplacians.
//!
//! Systems are factored with a banded LU when the band fits in memory and
//! otherwise solved with conjugate gradients (symmetric) or BiCGSTAB.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Duplicate entries are summed.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last = None;
        for (i, j, v) in t {
            assert!(i < n && j < n, "triplet out of range");
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            last = Some((i, j));
            cols.push(j);
            vals.push(v);
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let t = (0..self.n).flat_map(|i| self.row(i).map(move |(j, v)| (j, i, v))).collect();
        CsrMatrix::from_triplets(self.n, t)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let t = self.transpose();
        t.cols == self.cols && t.vals.iter().zip(&self.vals).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut lo = 0;
        let mut up = 0;
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if j < i {
                    lo = lo.max(i - j);
                } else {
                    up = up.max(j - i);
                }
            }
        }
        (lo, up)
    }
}

/// LU factors of a banded matrix, computed without pivoting. Adequate for
/// the diagonally dominant M-matrices arising from killed random walks.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    lo: usize,
    up: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n();
        let (lo, up) = a.bandwidths();
        let width = lo + up + 1;
        let mut data = vec![0.0; n * width];
        for i in 0..n {
            for (j, v) in a.row(i) {
                data[i * width + j + lo - i] += v;
            }
        }
        for k in 0..n {
            let pivot = data[k * width + lo];
            if pivot.abs() < 1e-300 {
                return Err(Error::Solver(format!("zero pivot at row {k}")));
            }
            let jmax = (k + up).min(n - 1);
            for i in k + 1..=(k + lo).min(n - 1) {
                let ik = i * width + k + lo - i;
                let l = data[ik] / pivot;
                if l == 0.0 {
                    continue;
                }
                data[ik] = l;
                let (head, tail) = data.split_at_mut(i * width);
                let krow = &head[k * width..k * width + width];
                let irow = &mut tail[..width];
                for j in k + 1..=jmax {
                    irow[j + lo - i] -= l * krow[j + lo - k];
                }
            }
        }
        Ok(BandedLu { n, lo, up, width, data })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, lo, up, w) = (self.n, self.lo, self.up, self.width);
        for i in 0..n {
            let mut s = b[i];
            for j in i.saturating_sub(lo)..i {
                s -= self.data[i * w + j + lo - i] * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + up).min(n - 1) {
                s -= self.data[i * w + j + lo - i] * b[j];
            }
            b[i] = s / self.data[i * w + lo];
        }
    }

    pub fn storage(n: usize, lo: usize, up: usize) -> usize {
        n * (lo + up + 1)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IterStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, IterStats)> {
    let n = a.n();
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], IterStats::default()));
    }
    let mut r = vec![0.0; n];
    a.matvec(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for it in 0..max_iter {
        if rr.sqrt() <= tol * bnorm {
            return Ok((x, IterStats { iterations: it, relative_residual: rr.sqrt() / bnorm }));
        }
        a.matvec(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::Solver(format!("CG did not converge: residual {:e}", rr.sqrt() / bnorm)))
}

pub fn bicgstab(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, IterStats)> {
    let n = a.n();
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], IterStats::default()));
    }
    let mut r = vec![0.0; n];
    a.matvec(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 0..max_iter {
        let res = norm(&r);
        if res <= tol * bnorm {
            return Ok((x, IterStats { iterations: it, relative_residual: res / bnorm }));
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        a.matvec(&p, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) <= tol * bnorm {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            return Ok((x, IterStats { iterations: it + 1, relative_residual: norm(&s) / bnorm }));
        }
        a.matvec(&s, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
    }
    Err(Error::Solver(format!("BiCGSTAB did not converge: residual {:e}", norm(&r) / bnorm)))
}

/// Largest band storage (in f64 entries) for which a direct factorization
/// is attempted.
pub const DIRECT_STORAGE_LIMIT: usize = 30_000_000;
const DIRECT_WORK_LIMIT: f64 = 4e9;
pub const ITERATIVE_TOL: f64 = 1e-12;

/// A square system with a solver chosen from its size and symmetry.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    matrix: CsrMatrix,
    transpose: Option<CsrMatrix>,
    factor: Option<BandedLu>,
    transpose_factor: Option<BandedLu>,
    symmetric: bool,
}

impl LinearSystem {
    pub fn new(matrix: CsrMatrix) -> Result<Self> {
        let symmetric = matrix.is_symmetric(1e-14);
        let (lo, up) = matrix.bandwidths();
        let n = matrix.n();
        let direct = BandedLu::storage(n, lo, up) <= DIRECT_STORAGE_LIMIT
            && (n as f64) * (lo as f64) * (up as f64) <= DIRECT_WORK_LIMIT;
        let factor = if direct { Some(BandedLu::factor(&matrix)?) } else { None };
        Ok(LinearSystem { matrix, transpose: None, factor, transpose_factor: None, symmetric })
    }

    /// Forces the iterative path; used to cross-check the direct one.
    pub fn iterative(matrix: CsrMatrix) -> Self {
        let symmetric = matrix.is_symmetric(1e-14);
        LinearSystem { matrix, transpose: None, factor: None, transpose_factor: None, symmetric }
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn is_direct(&self) -> bool {
        self.factor.is_some()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_from(b, None)
    }

    pub fn solve_from(&self, b: &[f64], x0: Option<&[f64]>) -> Result<Vec<f64>> {
        if let Some(f) = &self.factor {
            let mut x = b.to_vec();
            f.solve_in_place(&mut x);
            return Ok(x);
        }
        let max_iter = 20 * self.matrix.n() + 1000;
        let (x, _) = if self.symmetric {
            conjugate_gradient(&self.matrix, b, x0, ITERATIVE_TOL, max_iter)?
        } else {
            bicgstab(&self.matrix, b, x0, ITERATIVE_TOL, max_iter)?
        };
        Ok(x)
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&mut self, b: &[f64]) -> Result<Vec<f64>> {
        if self.symmetric {
            return self.solve(b);
        }
        if self.transpose.is_none() {
            self.transpose = Some(self.matrix.transpose());
        }
        let t = self.transpose.as_ref().unwrap();
        if self.factor.is_some() {
            if self.transpose_factor.is_none() {
                self.transpose_factor = Some(BandedLu::factor(t)?);
            }
            let mut x = b.to_vec();
            self.transpose_factor.as_ref().unwrap().solve_in_place(&mut x);
            return Ok(x);
        }
        let (x, _) = bicgstab(t, b, None, ITERATIVE_TOL, 20 * t.n() + 1000)?;
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn solvers_agree_on_1d_laplacian() {
        // Inverse of the path Laplacian: G(i,j) = min(i+1,j+1)(n-max(i,j))/(n+1).
        let n = 30;
        let a = laplacian_1d(n);
        let mut b = vec![0.0; n];
        b[7] = 1.0;
        let exact: Vec<f64> = (0..n)
            .map(|i| ((i.min(7) + 1) * (n - i.max(7))) as f64 / (n + 1) as f64)
            .collect();
        let direct = LinearSystem::new(a.clone()).unwrap();
        assert!(direct.is_direct());
        let x = direct.solve(&b).unwrap();
        let (y, _) = conjugate_gradient(&a, &b, None, 1e-13, 1000).unwrap();
        let (z, _) = bicgstab(&a, &b, None, 1e-13, 1000).unwrap();
        for i in 0..n {
            assert!((x[i] - exact[i]).abs() < 1e-12);
            assert!((y[i] - exact[i]).abs() < 1e-10);
            assert!((z[i] - exact[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn nonsymmetric_transpose_solve() {
        let t = vec![(0, 0, 2.0), (0, 1, -1.5), (1, 0, -0.2), (1, 1, 1.0), (2, 1, -0.3), (2, 2, 1.0), (1, 2, -0.1)];
        let a = CsrMatrix::from_triplets(3, t);
        let mut sys = LinearSystem::new(a.clone()).unwrap();
        assert!(!sys.is_symmetric());
        let b = [1.0, 2.0, 3.0];
        let x = sys.solve_transpose(&b).unwrap();
        let at = a.transpose();
        let mut y = [0.0; 3];
        at.matvec(&x, &mut y);
        for i in 0..3 {
            assert!((y[i] - b[i]).abs() < 1e-12);
        }
        let x = sys.solve(&b).unwrap();
        a.matvec(&x, &mut y);
        for i in 0..3 {
            assert!((y[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0), (0, 1, 0.5)]);
        assert_eq!(a.row(0).collect::<Vec<_>>(), vec![(0, 3.0), (1, 0.5)]);
        assert_eq!(a.bandwidths(), (0, 1));
    }
}
