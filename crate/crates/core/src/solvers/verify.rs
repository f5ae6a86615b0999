//! Numeric verification of the convergence inequalities along recorded
//! traces: the arithmetic-geometric mean bound, the hypergradient bounds
//! for strongly convex and general convex problems, and the superlinear
//! quadratic bound.

use super::oracle::Measure;
use super::trace::TraceRecord;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("bound not applicable: {0}")]
    NotApplicable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// phi(x^{K+1}) <= phi(x^1) (mean contraction ratio)^K for every K.
    AmGm,
    /// Gap bound (1 - 2 mu max{avg -h, 0})^K for strongly convex runs.
    HyperStrongCvx,
    /// Gap bound Delta^2 / (K max{avg -h, 0}).
    HyperCvxFval,
    /// min_k ||grad||^2 <= gap_1 / (K max{avg -h, 0}).
    HyperCvxGnorm,
    /// gap_{K+1} <= gap_1 (c/K)^K with c = 4 L^2 ||P_1 - A^{-1}||_F^2.
    Superlinear,
}

impl BoundKind {
    pub fn label(&self) -> &'static str {
        match self {
            BoundKind::AmGm => "amgm",
            BoundKind::HyperStrongCvx => "hyper_strongcvx",
            BoundKind::HyperCvxFval => "hyper_cvx_fval",
            BoundKind::HyperCvxGnorm => "hyper_cvx_gnorm",
            BoundKind::Superlinear => "superlinear",
        }
    }

    pub fn parse(s: &str) -> Option<BoundKind> {
        Some(match s.trim().to_ascii_lowercase().as_str() {
            "amgm" => BoundKind::AmGm,
            "hyper_strongcvx" => BoundKind::HyperStrongCvx,
            "hyper_cvx_fval" => BoundKind::HyperCvxFval,
            "hyper_cvx_gnorm" => BoundKind::HyperCvxGnorm,
            "superlinear" => BoundKind::Superlinear,
            _ => return None,
        })
    }
}

/// Constants a bound may need beyond the trace itself. The f_gap column
/// must be measured against the true optimum for the gap bounds.
#[derive(Debug, Clone)]
pub struct VerifyContext {
    /// Which column the AM-GM bound reads.
    pub measure: Measure,
    pub mu: Option<f64>,
    /// 4 L^2 ||P_1 - A^{-1}||_F^2 for the superlinear bound.
    pub superlin_coeff: Option<f64>,
    /// Stop checking the superlinear bound once the gap falls below this.
    pub gap_stop: f64,
}

impl Default for VerifyContext {
    fn default() -> Self {
        Self { measure: Measure::FGap, mu: None, superlin_coeff: None, gap_stop: 0.0 }
    }
}

/// Worst relative violation over all prefix lengths K.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub bound: BoundKind,
    pub checked: usize,
    /// max over K of lhs/rhs - 1; negative values mean slack everywhere.
    pub max_rel_violation: f64,
    pub worst_k: usize,
}

impl BoundReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_violation <= tol
    }
}

fn ln_pos(v: f64) -> Option<f64> {
    (v > 0.0 && v.is_finite()).then(|| v.ln())
}

/// Relative violation from a log-space difference.
fn rel_from_log(log_diff: f64) -> f64 {
    if log_diff < 30.0 {
        log_diff.exp_m1()
    } else {
        f64::INFINITY
    }
}

/// Evaluate the cited inequality at every prefix of the trace and report
/// the maximum relative violation.
pub fn verify_trace(
    trace: &[TraceRecord],
    bound: BoundKind,
    ctx: &VerifyContext,
) -> Result<BoundReport, VerifyError> {
    if trace.len() < 2 {
        return Err(VerifyError::NotApplicable("trace needs at least two iterates".into()));
    }
    let mut report = BoundReport { bound, checked: 0, max_rel_violation: f64::NEG_INFINITY, worst_k: 0 };
    let mut record = |k: usize, rel: f64, report: &mut BoundReport| {
        report.checked += 1;
        if rel > report.max_rel_violation {
            report.max_rel_violation = rel;
            report.worst_k = k;
        }
    };

    match bound {
        BoundKind::AmGm => {
            let phi: Vec<f64> = trace
                .iter()
                .map(|r| match ctx.measure {
                    Measure::FGap => r.f_gap,
                    Measure::GNorm => r.grad_norm,
                })
                .collect();
            let ln_phi1 = match ln_pos(phi[0]) {
                Some(v) => v,
                None => {
                    return Err(VerifyError::NotApplicable(
                        "initial measure is zero; nothing to contract".into(),
                    ))
                }
            };
            let mut ratio_sum = 0.0;
            for k in 1..phi.len() {
                if phi[k - 1] <= 0.0 {
                    break; // reached the optimum exactly; later ratios undefined
                }
                ratio_sum += phi[k] / phi[k - 1];
                let kf = k as f64;
                let mean = ratio_sum / kf;
                let Some(ln_lhs) = ln_pos(phi[k]) else {
                    record(k, f64::NEG_INFINITY, &mut report);
                    continue; // lhs is zero: bound holds with infinite slack
                };
                let rel = match ln_pos(mean) {
                    Some(ln_mean) => rel_from_log(ln_lhs - ln_phi1 - kf * ln_mean),
                    None => f64::INFINITY, // rhs zero but lhs positive
                };
                record(k, rel, &mut report);
            }
        }
        BoundKind::HyperStrongCvx | BoundKind::HyperCvxFval | BoundKind::HyperCvxGnorm => {
            let mu = ctx.mu;
            if matches!(bound, BoundKind::HyperStrongCvx | BoundKind::HyperCvxFval) {
                match mu {
                    Some(m) if m > 0.0 => {}
                    _ => return Err(VerifyError::NotApplicable("needs mu > 0".into())),
                }
            }
            let h: Vec<f64> = trace
                .iter()
                .map(|r| r.surrogate)
                .take_while(|s| s.is_finite())
                .collect();
            if h.is_empty() {
                return Err(VerifyError::NotApplicable("trace has no surrogate values".into()));
            }
            let gap1 = trace[0].f_gap;
            let ln_gap1 = match ln_pos(gap1) {
                Some(v) => v,
                None => return Err(VerifyError::NotApplicable("initial gap is not positive".into())),
            };
            let mut neg_h_sum = 0.0;
            let mut min_gnorm_sq = f64::INFINITY;
            for (k, hk) in h.iter().enumerate() {
                let kk = k + 1; // prefix length
                neg_h_sum += -hk;
                let m_k = (neg_h_sum / kk as f64).max(0.0);
                let next = &trace[kk];
                let gn = trace[k].grad_norm;
                min_gnorm_sq = min_gnorm_sq.min(gn * gn);
                match bound {
                    BoundKind::HyperStrongCvx => {
                        let base = (1.0 - 2.0 * mu.unwrap() * m_k).max(0.0);
                        let Some(ln_lhs) = ln_pos(next.f_gap) else {
                            record(kk, f64::NEG_INFINITY, &mut report);
                            continue;
                        };
                        let rel = match ln_pos(base) {
                            Some(ln_base) => rel_from_log(ln_lhs - ln_gap1 - kk as f64 * ln_base),
                            None => f64::INFINITY,
                        };
                        record(kk, rel, &mut report);
                    }
                    BoundKind::HyperCvxFval => {
                        if m_k <= 0.0 {
                            continue; // right-hand side is infinite
                        }
                        let delta_sq = 2.0 * gap1 / mu.unwrap();
                        let rhs = delta_sq / (kk as f64 * m_k);
                        let Some(ln_lhs) = ln_pos(next.f_gap) else {
                            record(kk, f64::NEG_INFINITY, &mut report);
                            continue;
                        };
                        record(kk, rel_from_log(ln_lhs - rhs.ln()), &mut report);
                    }
                    BoundKind::HyperCvxGnorm => {
                        if m_k <= 0.0 {
                            continue;
                        }
                        let rhs = gap1 / (kk as f64 * m_k);
                        let Some(ln_lhs) = ln_pos(min_gnorm_sq) else {
                            record(kk, f64::NEG_INFINITY, &mut report);
                            continue;
                        };
                        record(kk, rel_from_log(ln_lhs - rhs.ln()), &mut report);
                    }
                    _ => unreachable!(),
                }
            }
        }
        BoundKind::Superlinear => {
            let c = ctx
                .superlin_coeff
                .ok_or_else(|| VerifyError::NotApplicable("needs the 4 L^2 ||P1 - Ainv||_F^2 coefficient".into()))?;
            let gap1 = trace[0].f_gap;
            let ln_gap1 = match ln_pos(gap1) {
                Some(v) => v,
                None => return Err(VerifyError::NotApplicable("initial gap is not positive".into())),
            };
            let ln_c = match ln_pos(c) {
                Some(v) => v,
                None => return Err(VerifyError::NotApplicable("coefficient must be positive".into())),
            };
            for k in 1..trace.len() {
                let gap_next = trace[k].f_gap;
                if gap_next <= ctx.gap_stop {
                    break;
                }
                let kf = k as f64;
                let ln_rhs = ln_gap1 + kf * (ln_c - kf.ln());
                if ln_rhs < -690.0 {
                    break; // right-hand side below the machine floor
                }
                let Some(ln_lhs) = ln_pos(gap_next) else {
                    record(k, f64::NEG_INFINITY, &mut report);
                    continue;
                };
                record(k, rel_from_log(ln_lhs - ln_rhs), &mut report);
            }
        }
    }

    Ok(report)
}
