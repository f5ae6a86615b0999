//! Baseline first-order methods sharing the solver trace schema: gradient
//! descent with 1/L stepsize, accelerated gradient descent for convex and
//! strongly convex problems, coordinate-wise adaptive gradient descent, and
//! gradient descent with a fixed preconditioner.

use super::trace::{RunSummary, StopReason, TraceRecord};
use super::{SolverConfig, SolverError, SolverRun, Variant};
use crate::learners::LearnerRule;
use crate::linalg;
use crate::problems::Objective;
use std::time::Instant;

pub fn run_baseline(cfg: &SolverConfig, obj: &dyn Objective, x1: &[f64]) -> Result<SolverRun, SolverError> {
    cfg.validate(obj, x1)?;
    let l = obj.smoothness();
    let reference = obj.opt_value().unwrap_or(0.0);
    let start = Instant::now();

    let mut x = x1.to_vec();
    let mut fx = obj.value(&x);
    let mut gx = obj.grad(&x);
    let mut grad_evals = 1usize;
    let mut best_f = fx;
    let mut x_best = x.clone();
    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut stop = StopReason::MaxIters;
    let mut iterations = 0usize;

    // momentum state
    let mut x_prev = x.clone();
    // adaptive per-coordinate accumulator
    let mut accum = vec![0.0; x.len()];
    let adegrad_eta = match (cfg.variant, &cfg.learner) {
        (Variant::AdaGrad, LearnerRule::AdaGrad { eta }) => *eta,
        (Variant::AdaGrad, LearnerRule::Ogd { eta }) => *eta,
        _ => 1.0,
    };
    let sagd_momentum = {
        let mu = obj.strong_convexity();
        if mu > 0.0 {
            let rk = (l / mu).sqrt();
            (rk - 1.0) / (rk + 1.0)
        } else {
            0.0
        }
    };

    while iterations < cfg.max_iters {
        let k = iterations + 1;
        let gnorm = linalg::norm2(&gx);
        if gnorm <= cfg.grad_tol {
            stop = StopReason::GradTol;
            break;
        }
        let (x_next, new_grad_evals) = match cfg.variant {
            Variant::Gd => (linalg::axpy(&x, -1.0 / l, &gx), 0),
            Variant::Agd => {
                // y_k = x_k + (k-1)/(k+2) (x_k - x_{k-1}); x_{k+1} = y_k - grad f(y_k)/L
                let beta = (k as f64 - 1.0) / (k as f64 + 2.0);
                let y: Vec<f64> = x.iter().zip(&x_prev).map(|(a, b)| a + beta * (a - b)).collect();
                let (gy, evals) = if beta == 0.0 { (gx.clone(), 0) } else { (obj.grad(&y), 1) };
                (linalg::axpy(&y, -1.0 / l, &gy), evals)
            }
            Variant::Sagd => {
                let beta = sagd_momentum;
                let y: Vec<f64> = x.iter().zip(&x_prev).map(|(a, b)| a + beta * (a - b)).collect();
                let (gy, evals) = if beta == 0.0 || k == 1 {
                    (gx.clone(), 0)
                } else {
                    (obj.grad(&y), 1)
                };
                (linalg::axpy(&y, -1.0 / l, &gy), evals)
            }
            Variant::AdaGrad => {
                let mut next = x.clone();
                for i in 0..next.len() {
                    accum[i] += gx[i] * gx[i];
                    if gx[i] != 0.0 {
                        next[i] -= adegrad_eta * gx[i] / (accum[i] + 1e-12).sqrt();
                    }
                }
                (next, 0)
            }
            Variant::PrecondGd => {
                let p = cfg.precond.as_ref().unwrap();
                (linalg::sub(&x, &p.apply(&gx)), 0)
            }
            _ => unreachable!("run_baseline called with an online-scaled variant"),
        };
        grad_evals += new_grad_evals;

        iterations = k;
        trace.push(TraceRecord {
            iter: k,
            f_gap: fx - reference,
            grad_norm: gnorm,
            surrogate: f64::NAN,
            oracle_accepted: true,
            cum_grad_evals: grad_evals,
            wall_time_ns: start.elapsed().as_nanos(),
        });

        if !linalg::all_finite(&x_next) {
            return Err(SolverError::NonFinite { what: "iterate", iter: k, trace });
        }
        x_prev = x;
        x = x_next;
        fx = obj.value(&x);
        gx = obj.grad(&x);
        grad_evals += 1;
        if !fx.is_finite() {
            return Err(SolverError::NonFinite { what: "objective value", iter: k, trace });
        }
        if fx < best_f {
            best_f = fx;
            x_best = x.clone();
        }
    }

    trace.push(TraceRecord {
        iter: iterations + 1,
        f_gap: fx - reference,
        grad_norm: linalg::norm2(&gx),
        surrogate: f64::NAN,
        oracle_accepted: true,
        cum_grad_evals: grad_evals,
        wall_time_ns: start.elapsed().as_nanos(),
    });
    Ok(SolverRun {
        x_best,
        summary: RunSummary {
            solver: cfg.variant.label().to_string(),
            iterations,
            stop,
            best_f,
            final_grad_norm: linalg::norm2(&gx),
            grad_evals,
            hvp_evals: 0,
            wall_time_ns: start.elapsed().as_nanos(),
        },
        trace,
        frozen: None,
        final_scaling: None,
        final_x: x,
        final_z: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::problems::LeastSquares;
    use crate::scaling::{ScalingMatrix, ScalingPattern};
    use std::sync::Arc;

    fn cfg_for(variant: Variant, dim: usize) -> SolverConfig {
        SolverConfig::new(variant, ScalingPattern::diagonal(dim))
    }

    #[test]
    fn gd_one_step_on_identity_quadratic() {
        let obj = LeastSquares::new(DenseMatrix::identity(1), vec![0.0]);
        let run = run_baseline(&cfg_for(Variant::Gd, 1), &obj, &[1.0]).unwrap();
        assert_eq!(run.summary.stop, StopReason::GradTol);
        assert_eq!(run.summary.iterations, 1);
        assert!(run.final_x[0].abs() < 1e-15);
    }

    #[test]
    fn gd_step_arithmetic() {
        // Hessian diag(1,4), L = 4: x2 = (1 - 1/4, 1 - 1) = (0.75, 0)
        let obj = LeastSquares::new(DenseMatrix::diag(&[1.0, 2.0]), vec![0.0, 0.0]);
        let mut cfg = cfg_for(Variant::Gd, 2);
        cfg.max_iters = 1;
        let run = run_baseline(&cfg, &obj, &[1.0, 1.0]).unwrap();
        assert!((run.final_x[0] - 0.75).abs() < 1e-9);
        assert!(run.final_x[1].abs() < 1e-9);
    }

    #[test]
    fn sagd_with_unit_condition_number_matches_gd() {
        let obj = LeastSquares::new(DenseMatrix::identity(3), vec![0.5, -0.5, 1.0]);
        let gd = run_baseline(&cfg_for(Variant::Gd, 3), &obj, &[1.0, 2.0, 3.0]).unwrap();
        let sagd = run_baseline(&cfg_for(Variant::Sagd, 3), &obj, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(gd.summary.iterations, sagd.summary.iterations);
        for (a, b) in gd.final_x.iter().zip(&sagd.final_x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sagd_requires_strong_convexity() {
        // a singular quadratic has mu = 0
        let obj = LeastSquares::new(DenseMatrix::diag(&[1.0, 0.0]), vec![0.0, 0.0]);
        let err = run_baseline(&cfg_for(Variant::Sagd, 2), &obj, &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, SolverError::Incompatible(_)));
    }

    #[test]
    fn baselines_converge_on_well_conditioned_quadratic() {
        let obj = crate::dataio::gen_least_squares(10, 1e-1, 4);
        let x1 = crate::dataio::init_point(10, 5);
        for variant in [Variant::Gd, Variant::Agd, Variant::Sagd, Variant::AdaGrad] {
            let mut cfg = cfg_for(variant, 10);
            cfg.max_iters = 60_000;
            if variant == Variant::AdaGrad {
                cfg.learner = LearnerRule::AdaGrad { eta: 0.1 };
                cfg.max_iters = 200_000;
            }
            let run = run_baseline(&cfg, &obj, &x1).unwrap();
            assert_eq!(run.summary.stop, StopReason::GradTol, "{variant:?}");
        }
    }

    #[test]
    fn preconditioned_descent_with_inverse_hessian_is_exact() {
        let obj = LeastSquares::new(DenseMatrix::diag(&[1.0, 2.0]), vec![0.7, -0.1]);
        let pat = Arc::new(ScalingPattern::diagonal(2));
        // Hessian diag(1,4): inverse diagonal (1, 0.25)
        let p = ScalingMatrix::from_coeffs(pat, vec![1.0, 0.25]).unwrap();
        let mut cfg = cfg_for(Variant::PrecondGd, 2);
        cfg.precond = Some(p);
        let run = run_baseline(&cfg, &obj, &[5.0, 5.0]).unwrap();
        assert_eq!(run.summary.iterations, 1);
        assert_eq!(run.summary.stop, StopReason::GradTol);
    }

    #[test]
    fn precond_requires_matrix() {
        let obj = LeastSquares::new(DenseMatrix::identity(2), vec![0.0, 0.0]);
        let err = run_baseline(&cfg_for(Variant::PrecondGd, 2), &obj, &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, SolverError::Incompatible(_)));
    }
}
