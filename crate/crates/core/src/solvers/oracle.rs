//! Monotone descent oracles: post-step selectors guaranteeing the chosen
//! measure never increases.

use crate::linalg;
use crate::problems::Objective;
use crate::surrogates::StepCache;

/// Measure the oracle guards: function value gap or gradient norm.
/// Gap comparisons use raw f values; the optimum cancels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    FGap,
    GNorm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleKind {
    None,
    SimpleComparison,
    LineSearch { beta: f64, max_halvings: usize },
    /// Exact minimizing step along the proposed direction; constant-Hessian
    /// objectives only.
    SteepestDescent,
}

impl OracleKind {
    pub fn line_search_default() -> Self {
        OracleKind::LineSearch { beta: 0.5, max_halvings: 50 }
    }

    pub fn label(&self) -> &'static str {
        match self {
            OracleKind::None => "none",
            OracleKind::SimpleComparison => "simple_comparison",
            OracleKind::LineSearch { .. } => "line_search",
            OracleKind::SteepestDescent => "steepest_descent",
        }
    }
}

/// The point the oracle picked. `g` is None when the gradient at the chosen
/// point has not been evaluated yet; the solver computes (and counts) it.
#[derive(Debug, Clone)]
pub struct OracleDecision {
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Option<Vec<f64>>,
    pub accepted: bool,
    pub grad_evals: usize,
    pub hvp_evals: usize,
}

fn keep_current(cache: &StepCache) -> OracleDecision {
    OracleDecision {
        x: cache.x.clone(),
        f: cache.fx,
        g: Some(cache.gx.clone()),
        accepted: false,
        grad_evals: 0,
        hvp_evals: 0,
    }
}

fn take_proposed(cache: &StepCache) -> OracleDecision {
    OracleDecision {
        x: cache.x_plus.clone(),
        f: cache.f_plus,
        g: cache.g_plus.clone(),
        accepted: true,
        grad_evals: 0,
        hvp_evals: 0,
    }
}

/// Apply the oracle to a proposed step. For the gradient-norm measure the
/// cache must already hold the gradient at the proposed point.
pub fn monotone_oracle(
    kind: &OracleKind,
    measure: Measure,
    cache: &StepCache,
    obj: &dyn Objective,
) -> OracleDecision {
    match kind {
        OracleKind::None => take_proposed(cache),
        OracleKind::SimpleComparison => {
            // ties accept the proposed point, preserving gradient reuse
            let take = match measure {
                Measure::FGap => cache.f_plus <= cache.fx,
                Measure::GNorm => {
                    let g_plus = cache.g_plus.as_deref().expect("g_plus needed for gnorm oracle");
                    linalg::norm2(g_plus) <= linalg::norm2(&cache.gx)
                }
            };
            if take {
                take_proposed(cache)
            } else {
                keep_current(cache)
            }
        }
        OracleKind::LineSearch { beta, max_halvings } => {
            let d = linalg::sub(&cache.x_plus, &cache.x);
            let current = match measure {
                Measure::FGap => cache.fx,
                Measure::GNorm => linalg::norm2(&cache.gx),
            };
            let mut alpha = 1.0;
            let mut grad_evals = 0;
            for _ in 0..=*max_halvings {
                let (trial, f_trial, mut g_trial) = if alpha == 1.0 {
                    (cache.x_plus.clone(), cache.f_plus, cache.g_plus.clone())
                } else {
                    let t = linalg::axpy(&cache.x, alpha, &d);
                    let f = obj.value(&t);
                    (t, f, None)
                };
                let trial_measure = match measure {
                    Measure::FGap => f_trial,
                    Measure::GNorm => {
                        if g_trial.is_none() {
                            grad_evals += 1;
                            g_trial = Some(obj.grad(&trial));
                        }
                        linalg::norm2(g_trial.as_deref().unwrap())
                    }
                };
                if trial_measure <= current {
                    return OracleDecision {
                        x: trial,
                        f: f_trial,
                        g: g_trial,
                        accepted: true,
                        grad_evals,
                        hvp_evals: 0,
                    };
                }
                alpha *= beta;
            }
            let mut dec = keep_current(cache);
            dec.grad_evals = grad_evals;
            dec
        }
        OracleKind::SteepestDescent => {
            let d = linalg::sub(&cache.x_plus, &cache.x);
            let hd = obj
                .hvp(&cache.x, &d)
                .expect("steepest descent oracle requires a constant Hessian");
            let alpha = match measure {
                // exact minimizer of f along the line, clamped when the
                // direction carries no positive curvature
                Measure::FGap => {
                    let dhd = linalg::dot(&d, &hd);
                    if dhd <= 0.0 {
                        0.0
                    } else {
                        -linalg::dot(&cache.gx, &d) / dhd
                    }
                }
                // exact minimizer of ||grad f|| along the line
                Measure::GNorm => {
                    let hd2 = linalg::dot(&hd, &hd);
                    if hd2 <= 0.0 {
                        0.0
                    } else {
                        -linalg::dot(&cache.gx, &hd) / hd2
                    }
                }
            };
            let mut dec = if alpha == 0.0 {
                keep_current(cache)
            } else if alpha == 1.0 {
                take_proposed(cache)
            } else {
                let x = linalg::axpy(&cache.x, alpha, &d);
                let f = obj.value(&x);
                OracleDecision { x, f, g: None, accepted: true, grad_evals: 0, hvp_evals: 0 }
            };
            dec.hvp_evals += 1;
            dec
        }
    }
}
