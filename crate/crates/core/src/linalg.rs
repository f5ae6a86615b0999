//! Dense linear algebra at desk scale (n up to a few hundred).
//!
//! Straightforward O(n^2)/O(n^3) routines, no external solver: row-major
//! dense matrices, Cholesky, cyclic Jacobi eigendecomposition and power
//! iteration. Everything here is deterministic.

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[i] = acc;
        }
        y
    }

    /// y = A^T x
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "matvec_t dimension mismatch");
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (yj, a) in y.iter_mut().zip(row) {
                *yj += a * xi;
            }
        }
        y
    }

    /// C = A B
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut c = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    c[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        c
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// A^T A, symmetrized against rounding.
    pub fn gram(&self) -> DenseMatrix {
        let mut g = self.transpose().matmul(self);
        for i in 0..g.rows {
            for j in 0..i {
                let s = 0.5 * (g[(i, j)] + g[(j, i)]);
                g[(i, j)] = s;
                g[(j, i)] = s;
            }
        }
        g
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> DenseMatrix {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| c * v).collect() }
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Upper bound on the largest eigenvalue of a symmetric matrix.
    pub fn gershgorin_upper(&self) -> f64 {
        assert!(self.is_square());
        let mut bound = f64::NEG_INFINITY;
        for i in 0..self.rows {
            let mut radius = 0.0;
            for j in 0..self.cols {
                if i != j {
                    radius += self[(i, j)].abs();
                }
            }
            bound = bound.max(self[(i, i)] + radius);
        }
        bound
    }

    /// Cholesky factor L with A = L L^T; None if not positive definite.
    pub fn cholesky(&self) -> Option<Cholesky> {
        assert!(self.is_square());
        let n = self.rows;
        let mut l = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self[(i, j)];
                for k in 0..j {
                    sum -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return None;
                    }
                    l[(i, j)] = sum.sqrt();
                } else {
                    l[(i, j)] = sum / l[(j, j)];
                }
            }
        }
        Some(Cholesky { l })
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor of an SPD matrix.
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    /// Solve A x = b given A = L L^T.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows;
        assert_eq!(b.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut sum = b[i];
            for k in 0..i {
                sum -= self.l[(i, k)] * y[k];
            }
            y[i] = sum / self.l[(i, i)];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in i + 1..n {
                sum -= self.l[(k, i)] * x[k];
            }
            x[i] = sum / self.l[(i, i)];
        }
        x
    }

    /// Dense inverse of A, column by column.
    pub fn inverse(&self) -> DenseMatrix {
        let n = self.l.rows;
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e);
            e[j] = 0.0;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        // symmetrize: the inverse of an SPD matrix is symmetric
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = s;
                inv[(j, i)] = s;
            }
        }
        inv
    }
}

/// Eigendecomposition of a symmetric matrix: values ascending, vectors as columns.
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

/// Cyclic Jacobi eigendecomposition for symmetric matrices.
pub fn sym_eigen(a: &DenseMatrix) -> SymEigen {
    assert!(a.is_square());
    let n = a.rows;
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    let scale = a.frobenius_norm().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, col)] = v[(k, i)];
        }
    }
    SymEigen { values, vectors }
}

/// Symmetric square root of an SPD matrix via eigendecomposition.
pub fn sym_sqrt(a: &DenseMatrix) -> Option<DenseMatrix> {
    let eig = sym_eigen(a);
    if eig.values.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let n = a.rows;
    let mut out = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let s = eig.values[k].sqrt();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += s * eig.vectors[(i, k)] * eig.vectors[(j, k)];
            }
        }
    }
    Some(out)
}

/// Result of a power-iteration run.
pub struct PowerIteration {
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    pub converged: bool,
}

/// Power iteration for the dominant eigenpair of a symmetric operator.
///
/// Runs to relative tolerance `tol` on the Rayleigh quotient, at most
/// `max_iters` iterations. `start` allows warm-starting.
pub fn power_iteration<F>(n: usize, mut op: F, start: Option<&[f64]>, tol: f64, max_iters: usize) -> PowerIteration
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let mut v: Vec<f64> = match start {
        Some(s) => s.to_vec(),
        // fixed deterministic start with decaying components so it is
        // non-orthogonal to any eigenvector in practice
        None => (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect(),
    };
    normalize(&mut v);
    let mut lambda = 0.0;
    let mut converged = false;
    for _ in 0..max_iters {
        let mut w = op(&v);
        let new_lambda = dot(&v, &w);
        let norm = norm2(&w);
        if norm <= 1e-300 {
            // operator annihilates the iterate; eigenvalue 0
            return PowerIteration { eigenvalue: 0.0, eigenvector: v, converged: true };
        }
        for x in w.iter_mut() {
            *x /= norm;
        }
        let rel = (new_lambda - lambda).abs() / new_lambda.abs().max(1e-300);
        v = w;
        lambda = new_lambda;
        if rel <= tol {
            converged = true;
            break;
        }
    }
    PowerIteration { eigenvalue: lambda, eigenvector: v, converged }
}

/// Extremal eigenvalue of a symmetric matrix via shifted power iteration.
///
/// For `largest = false` the iteration runs on `cI - A` with a Gershgorin
/// shift, recovering the smallest eigenvalue.
pub fn extremal_eigen(a: &DenseMatrix, largest: bool, start: Option<&[f64]>, tol: f64, max_iters: usize) -> PowerIteration {
    let n = a.rows;
    if largest {
        // Shift so the dominant eigenvalue of A + cI is the algebraically
        // largest one even when A is indefinite.
        let c = a.gershgorin_upper().abs().max(1.0);
        let mut r = power_iteration(n, |v| {
            let mut w = a.matvec(v);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi += c * vi;
            }
            w
        }, start, tol, max_iters);
        r.eigenvalue -= c;
        r
    } else {
        let c = a.gershgorin_upper();
        let mut r = power_iteration(n, |v| {
            let mut w = a.matvec(v);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi = c * vi - *wi;
            }
            w
        }, start, tol, max_iters);
        r.eigenvalue = c - r.eigenvalue;
        r
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: &mut [f64]) {
    let n = norm2(a);
    if n > 0.0 {
        for x in a.iter_mut() {
            *x /= n;
        }
    }
}

/// y = a + c*b
pub fn axpy(a: &[f64], c: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + c * y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let chol = a.cholesky().unwrap();
        let x = chol.solve(&[1.0, 2.0]);
        let back = a.matvec(&x);
        assert!((back[0] - 1.0).abs() < 1e-12);
        assert!((back[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(a.cholesky().is_none());
    }

    #[test]
    fn jacobi_eigen_recovers_spectrum() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let eig = sym_eigen(&a);
        assert!((eig.values[0] - 1.0).abs() < 1e-12);
        assert!((eig.values[1] - 3.0).abs() < 1e-12);
        // vectors diagonalize
        for k in 0..2 {
            let v: Vec<f64> = (0..2).map(|i| eig.vectors[(i, k)]).collect();
            let av = a.matvec(&v);
            for i in 0..2 {
                assert!((av[i] - eig.values[k] * v[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn power_iteration_dominant_pair() {
        let a = DenseMatrix::diag(&[1.0, 4.0, 2.0]);
        let r = extremal_eigen(&a, true, None, 1e-12, 1000);
        assert!(r.converged);
        assert!((r.eigenvalue - 4.0).abs() < 1e-9);
        let r = extremal_eigen(&a, false, None, 1e-12, 1000);
        assert!((r.eigenvalue - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sqrt_of_spd() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let s = sym_sqrt(&a).unwrap();
        let back = s.matmul(&s);
        assert!(back.max_abs_diff(&a) < 1e-12);
    }
}
