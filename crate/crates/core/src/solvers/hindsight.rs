//! Hindsight analysis over a recorded trajectory: re-evaluate the frozen
//! per-iteration losses at arbitrary scaling matrices and find the best
//! fixed comparator by deterministic multi-pass projected gradient descent.

use crate::linalg;
use crate::problems::Objective;
use crate::scaling::{ScalingMatrix, ScalingPattern};
use crate::surrogates::SurrogateKind;
use std::sync::Arc;

/// One frozen loss: everything needed to evaluate ell_{x^k} at any P.
#[derive(Debug, Clone)]
pub struct FrozenPoint {
    pub x: Vec<f64>,
    pub fx: f64,
    pub gx: Vec<f64>,
    /// Reference value the ratio loss was run with (optimum or bound).
    pub ref_value: f64,
}

/// The loss sequence of a recorded run.
#[derive(Debug, Clone)]
pub struct FrozenTrajectory {
    pub kind: SurrogateKind,
    pub points: Vec<FrozenPoint>,
}

impl FrozenTrajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Value of the k-th loss at P. Fresh objective evaluations are made at
    /// x - P grad f(x); the frozen (x, f, grad) stay fixed.
    pub fn loss_value(&self, k: usize, obj: &dyn Objective, p: &ScalingMatrix) -> f64 {
        let pt = &self.points[k];
        let x_plus = linalg::sub(&pt.x, &p.apply(&pt.gx));
        let f_plus = obj.value(&x_plus);
        match self.kind {
            SurrogateKind::Ratio => (f_plus - pt.ref_value) / (pt.fx - pt.ref_value),
            SurrogateKind::GradNorm => {
                let g_plus = obj.grad(&x_plus);
                linalg::norm2(&g_plus) / linalg::norm2(&pt.gx)
            }
            SurrogateKind::Hyper => (f_plus - pt.fx) / linalg::dot(&pt.gx, &pt.gx),
        }
    }

    /// Average loss over the trajectory at P.
    pub fn avg_value(&self, obj: &dyn Objective, p: &ScalingMatrix) -> f64 {
        assert!(!self.is_empty());
        let sum: f64 = (0..self.len()).map(|k| self.loss_value(k, obj, p)).sum();
        sum / self.len() as f64
    }

    /// Average loss and its pattern-coordinate gradient at P in one sweep.
    pub fn avg_value_and_grad(
        &self,
        obj: &dyn Objective,
        p: &ScalingMatrix,
        pattern: &ScalingPattern,
    ) -> (f64, Vec<f64>) {
        assert!(!self.is_empty());
        let mut value = 0.0;
        let mut grad = vec![0.0; pattern.coeff_len()];
        let inv_k = 1.0 / self.len() as f64;
        for pt in &self.points {
            let x_plus = linalg::sub(&pt.x, &p.apply(&pt.gx));
            let f_plus = obj.value(&x_plus);
            let g_plus = obj.grad(&x_plus);
            let (v, coeffs) = match self.kind {
                SurrogateKind::Ratio => {
                    let gap = pt.fx - pt.ref_value;
                    ((f_plus - pt.ref_value) / gap, pattern.restrict_outer(&g_plus, &pt.gx, -1.0 / gap))
                }
                SurrogateKind::GradNorm => {
                    let gn = linalg::norm2(&pt.gx);
                    let gn_plus = linalg::norm2(&g_plus);
                    if gn_plus == 0.0 {
                        (0.0, vec![0.0; pattern.coeff_len()])
                    } else {
                        let w = obj
                            .hvp(&x_plus, &g_plus)
                            .expect("gradient-norm losses need an HVP oracle");
                        (gn_plus / gn, pattern.restrict_outer(&w, &pt.gx, -1.0 / (gn * gn_plus)))
                    }
                }
                SurrogateKind::Hyper => {
                    let gn2 = linalg::dot(&pt.gx, &pt.gx);
                    ((f_plus - pt.fx) / gn2, pattern.restrict_outer(&g_plus, &pt.gx, -1.0 / gn2))
                }
            };
            value += inv_k * v;
            for (gi, ci) in grad.iter_mut().zip(&coeffs) {
                *gi += inv_k * ci;
            }
        }
        (value, grad)
    }
}

/// Result of the hindsight search: the best fixed scaling matrix found and
/// its average loss over the trajectory.
#[derive(Debug, Clone)]
pub struct HindsightOutcome {
    pub minimizer: ScalingMatrix,
    pub theta: f64,
    pub passes: usize,
}

/// Minimize the average frozen loss over the pattern by projected gradient
/// descent: up to 10^4 passes at stepsize 1/(4 L^2), stopping once the
/// coefficients move less than 1e-12. The best average seen is reported, so
/// the outcome is meaningful even if the final passes stall.
pub fn hindsight_best(
    frozen: &FrozenTrajectory,
    obj: &dyn Objective,
    pattern: &ScalingPattern,
) -> HindsightOutcome {
    assert!(!frozen.is_empty(), "hindsight needs a recorded trajectory");
    let pattern_arc = Arc::new(pattern.clone());
    let l = obj.smoothness();
    let eta = 1.0 / (4.0 * l * l);
    let mut p = ScalingMatrix::zeros(pattern_arc.clone());
    let mut best_theta = f64::INFINITY;
    let mut best_p = p.clone();
    let mut passes = 0;
    for _ in 0..10_000 {
        passes += 1;
        let (value, grad) = frozen.avg_value_and_grad(obj, &p, pattern);
        if value < best_theta {
            best_theta = value;
            best_p = p.clone();
        }
        let coeffs = p.coeffs_mut();
        let mut max_change = 0.0f64;
        for (c, g) in coeffs.iter_mut().zip(&grad) {
            let step = eta * g;
            max_change = max_change.max(step.abs());
            *c -= step;
        }
        let projected = pattern_arc.project(std::mem::take(coeffs));
        *coeffs = projected;
        if max_change < 1e-12 {
            break;
        }
    }
    // final candidate may beat the best recorded one
    let final_theta = frozen.avg_value(obj, &p);
    if final_theta < best_theta {
        best_theta = final_theta;
        best_p = p;
    }
    HindsightOutcome { minimizer: best_p, theta: best_theta, passes }
}
