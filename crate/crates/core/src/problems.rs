//! Differentiable objective oracles with smoothness and strong-convexity
//! metadata: convex quadratics / least squares and the l2-regularized
//! squared-hinge SVM.

use crate::dataio::SparseDataset;
use crate::linalg::{self, DenseMatrix};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("hvp unavailable")]
    HvpUnavailable,
}

/// Evaluation oracle bundle. Objectives are immutable after construction and
/// safe to evaluate concurrently.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn grad(&self, x: &[f64]) -> Vec<f64>;
    /// Hessian-vector product; None when the objective is not twice
    /// differentiable (the gradient-norm surrogate then refuses it).
    fn hvp(&self, x: &[f64], v: &[f64]) -> Option<Vec<f64>>;
    /// Smoothness constant L.
    fn smoothness(&self) -> f64;
    /// Strong convexity mu (0 when only convex).
    fn strong_convexity(&self) -> f64;
    /// Hessian Lipschitz constant H; None when unknown.
    fn hessian_lipschitz(&self) -> Option<f64>;
    /// Optimal value; None when unknown.
    fn opt_value(&self) -> Option<f64>;
    fn hessian_constant(&self) -> bool;
}

fn check_input(obj: &dyn Objective, x: &[f64]) -> Result<(), ProblemError> {
    if x.len() != obj.dim() {
        return Err(ProblemError::DimensionMismatch { expected: obj.dim(), got: x.len() });
    }
    if !linalg::all_finite(x) {
        return Err(ProblemError::NonFiniteInput);
    }
    Ok(())
}

/// Checked f(x).
pub fn eval_value(obj: &dyn Objective, x: &[f64]) -> Result<f64, ProblemError> {
    check_input(obj, x)?;
    Ok(obj.value(x))
}

/// Checked gradient.
pub fn eval_grad(obj: &dyn Objective, x: &[f64]) -> Result<Vec<f64>, ProblemError> {
    check_input(obj, x)?;
    Ok(obj.grad(x))
}

/// Checked Hessian-vector product.
pub fn eval_hvp(obj: &dyn Objective, x: &[f64], v: &[f64]) -> Result<Vec<f64>, ProblemError> {
    check_input(obj, x)?;
    check_input(obj, v)?;
    obj.hvp(x, v).ok_or(ProblemError::HvpUnavailable)
}

/// (L, mu) estimate plus a convergence flag for the power iterations.
#[derive(Debug, Clone, Copy)]
pub struct ConstantsEstimate {
    pub smoothness: f64,
    pub strong_convexity: f64,
    pub converged: bool,
}

// ---------------------------------------------------------------------------
// Least squares f(x) = 1/2 ||Ax - b||^2
// ---------------------------------------------------------------------------

/// Least squares instance with cached Gram matrix, solved optimum, and
/// eigenvalue-based constants.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    a: DenseMatrix,
    b: Vec<f64>,
    hess: DenseMatrix, // A^T A, the constant Hessian
    atb: Vec<f64>,
    x_star: Option<Vec<f64>>,
    f_star: Option<f64>,
    constants: ConstantsEstimate,
}

impl LeastSquares {
    pub fn new(a: DenseMatrix, b: Vec<f64>) -> Self {
        assert!(a.is_square(), "instance matrix must be square");
        assert_eq!(a.rows, b.len(), "rhs length must match matrix dimension");
        let hess = a.gram();
        let atb = a.matvec_t(&b);
        let (x_star, f_star, mu, mu_conv) = match hess.cholesky() {
            Some(chol) => {
                let xs = chol.solve(&atb);
                let r = linalg::sub(&a.matvec(&xs), &b);
                let fs = 0.5 * linalg::dot(&r, &r);
                // inverse power iteration: dominant eigenvalue of H^{-1} is 1/mu
                let n = hess.rows;
                let it = linalg::power_iteration(
                    n,
                    |v| chol.solve(v),
                    None,
                    1e-8,
                    10 * n.max(10),
                );
                let mu = if it.eigenvalue > 0.0 { 1.0 / it.eigenvalue } else { 0.0 };
                (Some(xs), Some(fs), mu, it.converged)
            }
            None => (None, None, 0.0, true),
        };
        let n = hess.rows;
        let it = linalg::extremal_eigen(&hess, true, None, 1e-8, 10 * n.max(10));
        let constants = ConstantsEstimate {
            smoothness: it.eigenvalue.max(0.0),
            strong_convexity: mu,
            converged: it.converged && mu_conv,
        };
        Self { a, b, hess, atb, x_star, f_star, constants }
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// The constant Hessian A^T A.
    pub fn hessian(&self) -> &DenseMatrix {
        &self.hess
    }

    pub fn x_star(&self) -> Option<&[f64]> {
        self.x_star.as_deref()
    }

    /// Dense inverse of the Hessian (used by superlinear-bound checks).
    pub fn hessian_inverse(&self) -> Option<DenseMatrix> {
        self.hess.cholesky().map(|c| c.inverse())
    }

    pub fn estimate_constants(&self) -> ConstantsEstimate {
        self.constants
    }
}

impl Objective for LeastSquares {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = linalg::sub(&self.a.matvec(x), &self.b);
        0.5 * linalg::dot(&r, &r)
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        // A^T A x - A^T b via the cached Gram matrix
        let mut g = self.hess.matvec(x);
        for (gi, ai) in g.iter_mut().zip(&self.atb) {
            *gi -= ai;
        }
        g
    }

    fn hvp(&self, _x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        Some(self.hess.matvec(v))
    }

    fn smoothness(&self) -> f64 {
        self.constants.smoothness
    }

    fn strong_convexity(&self) -> f64 {
        self.constants.strong_convexity
    }

    fn hessian_lipschitz(&self) -> Option<f64> {
        Some(0.0)
    }

    fn opt_value(&self) -> Option<f64> {
        self.f_star
    }

    fn hessian_constant(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------
// Squared-hinge SVM f(x) = 1/m sum max(0, 1 - y_i <x_i, x>)^2 + lambda/2 ||x||^2
// ---------------------------------------------------------------------------

/// L2-regularized squared-hinge SVM over sparse rows.
///
/// Once but not twice differentiable on the margin boundary, so the HVP
/// oracle is unavailable and gradient-norm methods refuse this objective.
#[derive(Debug, Clone)]
pub struct SvmSquaredHinge {
    rows: Vec<Vec<(usize, f64)>>, // 0-based indices
    labels: Vec<f64>,
    dim: usize,
    lambda: f64,
    constants: ConstantsEstimate,
}

impl SvmSquaredHinge {
    /// Build from a parsed dataset; `lambda` defaults to 5/n.
    pub fn from_dataset(d: &SparseDataset, lambda: Option<f64>) -> Self {
        assert!(d.num_rows() > 0, "dataset must have at least one row");
        assert!(d.num_features > 0, "dataset must have at least one feature");
        let dim = d.num_features;
        let lambda = lambda.unwrap_or(5.0 / dim as f64);
        let rows: Vec<Vec<(usize, f64)>> = d
            .rows
            .iter()
            .map(|r| r.iter().map(|&(i, v)| (i - 1, v)).collect())
            .collect();
        let labels = d.labels.clone();
        let m = rows.len();
        // L <= lambda + (2/m) sigma_max(X)^2 via power iteration on X^T X
        let it = linalg::power_iteration(
            dim,
            |v| {
                let mut xv = vec![0.0; m];
                for (i, row) in rows.iter().enumerate() {
                    xv[i] = row.iter().map(|&(j, a)| a * v[j]).sum();
                }
                let mut out = vec![0.0; dim];
                for (i, row) in rows.iter().enumerate() {
                    let c = xv[i];
                    if c == 0.0 {
                        continue;
                    }
                    for &(j, a) in row {
                        out[j] += a * c;
                    }
                }
                out
            },
            None,
            1e-8,
            10 * dim.max(10),
        );
        let constants = ConstantsEstimate {
            smoothness: lambda + 2.0 / m as f64 * it.eigenvalue.max(0.0),
            strong_convexity: lambda,
            converged: it.converged,
        };
        Self { rows, labels, dim, lambda, constants }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn num_samples(&self) -> usize {
        self.rows.len()
    }

    pub fn estimate_constants(&self) -> ConstantsEstimate {
        self.constants
    }
}

impl Objective for SvmSquaredHinge {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        let m = self.rows.len() as f64;
        let mut loss = 0.0;
        for (row, &y) in self.rows.iter().zip(&self.labels) {
            let margin = 1.0 - y * row.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
            if margin > 0.0 {
                loss += margin * margin;
            }
        }
        loss / m + 0.5 * self.lambda * linalg::dot(x, x)
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let m = self.rows.len() as f64;
        let mut g: Vec<f64> = x.iter().map(|v| self.lambda * v).collect();
        for (row, &y) in self.rows.iter().zip(&self.labels) {
            let margin = 1.0 - y * row.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
            if margin > 0.0 {
                let c = -2.0 * margin * y / m;
                for &(j, a) in row {
                    g[j] += c * a;
                }
            }
        }
        g
    }

    fn hvp(&self, _x: &[f64], _v: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn smoothness(&self) -> f64 {
        self.constants.smoothness
    }

    fn strong_convexity(&self) -> f64 {
        self.constants.strong_convexity
    }

    fn hessian_lipschitz(&self) -> Option<f64> {
        None
    }

    fn opt_value(&self) -> Option<f64> {
        None
    }

    fn hessian_constant(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{parse_libsvm, Rng};
    use crate::fdiff::fd_gradient;

    fn identity_quadratic(n: usize) -> LeastSquares {
        LeastSquares::new(DenseMatrix::identity(n), vec![0.0; n])
    }

    #[test]
    fn value_of_identity_quadratic() {
        let q = identity_quadratic(2);
        assert_eq!(eval_value(&q, &[3.0, 4.0]).unwrap(), 12.5);
        assert_eq!(eval_value(&q, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn value_at_exact_solution() {
        let ls = LeastSquares::new(DenseMatrix::diag(&[1.0, 2.0]), vec![1.0, 2.0]);
        assert_eq!(eval_value(&ls, &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(ls.opt_value().unwrap(), 0.0);
    }

    #[test]
    fn grad_examples() {
        let q = identity_quadratic(2);
        assert_eq!(eval_grad(&q, &[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);

        let ls = LeastSquares::new(DenseMatrix::diag(&[1.0, 2.0]), vec![0.0, 0.0]);
        assert_eq!(eval_grad(&ls, &[1.0, 1.0]).unwrap(), vec![1.0, 4.0]);

        // inactive hinge: margin 1 - 2 < 0 contributes nothing
        let data = parse_libsvm("+1 1:1\n").unwrap();
        let mut data = data;
        data.num_features = 2;
        let svm = SvmSquaredHinge::from_dataset(&data, Some(0.0));
        let g = eval_grad(&svm, &[2.0, 0.0]).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn hvp_examples() {
        let q = identity_quadratic(2);
        assert_eq!(eval_hvp(&q, &[5.0, -1.0], &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);

        let ls = LeastSquares::new(DenseMatrix::diag(&[1.0, 2.0]), vec![0.0, 0.0]);
        assert_eq!(eval_hvp(&ls, &[0.0, 0.0], &[1.0, 1.0]).unwrap(), vec![1.0, 4.0]);

        let data = parse_libsvm("+1 1:1\n").unwrap();
        let svm = SvmSquaredHinge::from_dataset(&data, None);
        assert!(matches!(eval_hvp(&svm, &[0.0], &[1.0]), Err(ProblemError::HvpUnavailable)));
    }

    #[test]
    fn checked_ops_reject_bad_input() {
        let q = identity_quadratic(2);
        assert!(matches!(
            eval_value(&q, &[1.0]),
            Err(ProblemError::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(matches!(eval_grad(&q, &[f64::NAN, 0.0]), Err(ProblemError::NonFiniteInput)));
    }

    #[test]
    fn constants_examples() {
        let q = identity_quadratic(3);
        let c = q.estimate_constants();
        assert!((c.smoothness - 1.0).abs() < 1e-8);
        assert!((c.strong_convexity - 1.0).abs() < 1e-8);
        assert!(c.converged);

        let ls = LeastSquares::new(DenseMatrix::diag(&[1.0, 2.0]), vec![0.0, 0.0]);
        let c = ls.estimate_constants();
        assert!((c.smoothness - 4.0).abs() < 1e-7);
        assert!((c.strong_convexity - 1.0).abs() < 1e-7);

        // pure ridge: X = 0 rows
        let data = parse_libsvm("+1 2:0\n-1 1:0\n").unwrap();
        let svm = SvmSquaredHinge::from_dataset(&data, None);
        let c = svm.estimate_constants();
        assert!((c.smoothness - svm.lambda()).abs() < 1e-12);
        assert!((c.strong_convexity - svm.lambda()).abs() < 1e-12);
    }

    #[test]
    fn finite_difference_gradients() {
        let mut rng = Rng::new(2024);
        let ls = crate::dataio::gen_least_squares(6, 1e-2, 9);
        let data = parse_libsvm(
            "+1 1:0.4 3:-1.2\n-1 2:0.7 4:0.3\n+1 1:-0.5 4:1.1\n-1 3:2.0\n",
        )
        .unwrap();
        let svm = SvmSquaredHinge::from_dataset(&data, None);
        for _ in 0..50 {
            let x: Vec<f64> = (0..6).map(|_| 2.0 * rng.gaussian()).collect();
            let g = ls.grad(&x);
            let fd = fd_gradient(&ls, &x, 1e-6);
            let num: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            assert!(num / (1.0 + linalg::norm2(&g)) <= 1e-6);

            let xs: Vec<f64> = (0..4).map(|_| rng.gaussian()).collect();
            let g = svm.grad(&xs);
            let fd = fd_gradient(&svm, &xs, 1e-6);
            let num: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            assert!(num / (1.0 + linalg::norm2(&g)) <= 1e-6);
        }
    }

    #[test]
    fn hvp_matches_finite_difference() {
        let ls = crate::dataio::gen_least_squares(5, 1e-1, 21);
        let mut rng = Rng::new(5);
        let eps = 1e-5;
        for _ in 0..20 {
            let x: Vec<f64> = (0..5).map(|_| rng.gaussian()).collect();
            let v: Vec<f64> = (0..5).map(|_| rng.gaussian()).collect();
            let hv = ls.hvp(&x, &v).unwrap();
            let gp = ls.grad(&linalg::axpy(&x, eps, &v));
            let gm = ls.grad(&linalg::axpy(&x, -eps, &v));
            for i in 0..5 {
                let fd = (gp[i] - gm[i]) / (2.0 * eps);
                assert!((hv[i] - fd).abs() / (1.0 + linalg::norm2(&v)) <= 1e-5);
            }
        }
    }

    #[test]
    fn midpoint_convexity_and_curvature_bounds() {
        let ls = crate::dataio::gen_least_squares(6, 1e-2, 3);
        let data = parse_libsvm("+1 1:0.4 3:-1.2\n-1 2:0.7\n+1 1:-0.5 2:1.1\n").unwrap();
        let svm = SvmSquaredHinge::from_dataset(&data, None);
        let mut rng = Rng::new(77);
        let objs: [&dyn Objective; 2] = [&ls, &svm];
        for obj in objs {
            let n = obj.dim();
            let mu = obj.strong_convexity();
            let l = obj.smoothness();
            for _ in 0..40 {
                let x: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
                let y: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
                let fx = obj.value(&x);
                let fy = obj.value(&y);
                let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
                assert!(obj.value(&mid) <= 0.5 * (fx + fy) + 1e-12 * (1.0 + fx.abs() + fy.abs()));
                // A1/A2 sandwich
                let gx = obj.grad(&x);
                let d = linalg::sub(&y, &x);
                let lin = fx + linalg::dot(&gx, &d);
                let dist2 = linalg::dot(&d, &d);
                assert!(fy >= lin + 0.5 * mu * dist2 - 1e-9 * (1.0 + fy.abs()));
                assert!((fy - lin).abs() <= 0.5 * l * dist2 + 1e-9 * (1.0 + fy.abs()));
            }
        }
    }

    #[test]
    fn gap_identity_for_least_squares() {
        let ls = crate::dataio::gen_least_squares(5, 1e-1, 8);
        let xs = ls.x_star().unwrap().to_vec();
        let fs = ls.opt_value().unwrap();
        let mut rng = Rng::new(1);
        for _ in 0..20 {
            let x: Vec<f64> = (0..5).map(|_| rng.gaussian()).collect();
            let gap = ls.value(&x) - fs;
            let ax = ls.a().matvec(&linalg::sub(&x, &xs));
            let expect = 0.5 * linalg::dot(&ax, &ax);
            assert!(gap >= 0.0);
            assert!((gap - expect).abs() <= 1e-9 * (1.0 + gap.abs()));
        }
    }
}
