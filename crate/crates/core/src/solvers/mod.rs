//! Solver loops: the online scaled gradient driver and its surrogate
//! realizations, the lower-bound double loop, monotone oracles, baseline
//! methods, hindsight analysis, and trajectory-inequality verification.

mod baselines;
mod hindsight;
mod oracle;
mod osgm;
mod trace;
mod verify;

pub use baselines::run_baseline;
pub use hindsight::{hindsight_best, FrozenPoint, FrozenTrajectory, HindsightOutcome};
pub use oracle::{monotone_oracle, Measure, OracleDecision, OracleKind};
pub use osgm::{run_double_loop, run_osgm, run_osgm_rz, DoubleLoopRun, LowerBoundState, OuterCase, OuterRound};
pub use trace::{trace_from_csv, trace_to_csv, RunSummary, StopReason, TraceCsvError, TraceRecord, TRACE_CSV_HEADER};
pub use verify::{verify_trace, BoundKind, BoundReport, VerifyContext};

use crate::learners::LearnerRule;
use crate::problems::Objective;
use crate::scaling::{ScalingMatrix, ScalingPattern};
use crate::surrogates::SurrogateKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("incompatible configuration: {0}")]
    Incompatible(String),
    #[error("non-finite {what} at iteration {iter}")]
    NonFinite { what: &'static str, iter: usize, trace: Vec<TraceRecord> },
    #[error("invalid lower bound at iteration {iter}: z >= f(x)")]
    InvalidLowerBound { iter: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    OsgmR,
    OsgmG,
    OsgmH,
    OsgmRz,
    DoubleLoop,
    Gd,
    Agd,
    Sagd,
    AdaGrad,
    PrecondGd,
}

impl Variant {
    pub fn label(&self) -> &'static str {
        match self {
            Variant::OsgmR => "osgm_r",
            Variant::OsgmG => "osgm_g",
            Variant::OsgmH => "osgm_h",
            Variant::OsgmRz => "osgm_rz",
            Variant::DoubleLoop => "double_loop",
            Variant::Gd => "gd",
            Variant::Agd => "agd",
            Variant::Sagd => "sagd",
            Variant::AdaGrad => "adagrad",
            Variant::PrecondGd => "precond_gd",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Some(match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "osgm_r" => Variant::OsgmR,
            "osgm_g" => Variant::OsgmG,
            "osgm_h" => Variant::OsgmH,
            "osgm_rz" => Variant::OsgmRz,
            "double_loop" => Variant::DoubleLoop,
            "gd" => Variant::Gd,
            "agd" => Variant::Agd,
            "sagd" => Variant::Sagd,
            "adagrad" => Variant::AdaGrad,
            "precond_gd" | "optdiag_gd" => Variant::PrecondGd,
            _ => return None,
        })
    }

    pub fn is_osgm(&self) -> bool {
        matches!(self, Variant::OsgmR | Variant::OsgmG | Variant::OsgmH | Variant::OsgmRz | Variant::DoubleLoop)
    }

    pub fn surrogate_kind(&self) -> Option<SurrogateKind> {
        match self {
            Variant::OsgmR | Variant::OsgmRz | Variant::DoubleLoop => Some(SurrogateKind::Ratio),
            Variant::OsgmG => Some(SurrogateKind::GradNorm),
            Variant::OsgmH => Some(SurrogateKind::Hyper),
            _ => None,
        }
    }

    /// Measure the monotone oracle guards by default for this variant.
    pub fn default_measure(&self) -> Measure {
        match self {
            Variant::OsgmG => Measure::GNorm,
            _ => Measure::FGap,
        }
    }
}

/// Full description of one solver run.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub variant: Variant,
    pub pattern: ScalingPattern,
    pub learner: LearnerRule,
    pub oracle: OracleKind,
    /// Defaults to the variant's natural measure when None.
    pub oracle_measure: Option<Measure>,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub seed: u64,
    /// Lower bound for the z-relaxed ratio modes.
    pub z_init: Option<f64>,
    /// Adjust an invalidated lower bound instead of aborting.
    pub heuristic_z: bool,
    /// Two-stage start for the gradient-norm method: plain gradient
    /// descent until the warm-start threshold, then online scaling.
    pub warm_start_gd: bool,
    pub warm_start_tol: Option<f64>,
    /// Record the (x, f, grad) caches needed to re-evaluate the loss
    /// sequence at arbitrary comparators.
    pub record_frozen: bool,
    /// Fixed scaling matrix for the preconditioned baseline.
    pub precond: Option<ScalingMatrix>,
    /// Outer-round budget of the double loop.
    pub outer_rounds: usize,
    /// Double loop stops once f_best - z falls below this (0 disables).
    pub outer_tol: f64,
}

impl SolverConfig {
    pub fn new(variant: Variant, pattern: ScalingPattern) -> Self {
        Self {
            variant,
            pattern,
            learner: LearnerRule::AdaGrad { eta: 1.0 },
            oracle: OracleKind::SimpleComparison,
            oracle_measure: None,
            max_iters: 10_000,
            grad_tol: 1e-10,
            seed: 0,
            z_init: None,
            heuristic_z: false,
            warm_start_gd: false,
            warm_start_tol: None,
            record_frozen: false,
            precond: None,
            outer_rounds: 30,
            outer_tol: 0.0,
        }
    }

    pub fn measure(&self) -> Measure {
        self.oracle_measure.unwrap_or_else(|| self.variant.default_measure())
    }

    pub(crate) fn validate(&self, obj: &dyn Objective, x1: &[f64]) -> Result<(), SolverError> {
        let fail = |msg: String| Err(SolverError::Incompatible(msg));
        if x1.len() != obj.dim() {
            return fail(format!("initial point has dimension {}, objective needs {}", x1.len(), obj.dim()));
        }
        if !crate::linalg::all_finite(x1) {
            return fail("initial point has non-finite entries".into());
        }
        if self.variant.is_osgm() && self.pattern.dim != obj.dim() {
            return fail(format!(
                "scaling pattern dimension {} does not match objective dimension {}",
                self.pattern.dim,
                obj.dim()
            ));
        }
        let has_hvp = obj.hvp(x1, &vec![0.0; x1.len()]).is_some();
        match self.variant {
            Variant::OsgmR => {
                if obj.opt_value().is_none() {
                    return fail("ratio surrogate needs the optimal value; use the lower-bound mode".into());
                }
            }
            Variant::OsgmRz | Variant::DoubleLoop => {
                let z = match self.z_init {
                    Some(z) => z,
                    None => return fail("lower-bound mode needs z_init".into()),
                };
                if z >= obj.value(x1) {
                    return fail(format!("z_init = {z} is not below f(x1)"));
                }
            }
            Variant::OsgmG => {
                if self.oracle == OracleKind::None {
                    return fail("gradient-norm method requires a monotone oracle".into());
                }
                if !has_hvp {
                    return fail("gradient-norm method needs a Hessian-vector product oracle".into());
                }
            }
            Variant::OsgmH => {
                if self.oracle == OracleKind::None {
                    return fail("hypergradient method requires a monotone oracle".into());
                }
            }
            Variant::Sagd => {
                if obj.strong_convexity() <= 0.0 {
                    return fail("strongly convex accelerated descent needs mu > 0".into());
                }
            }
            Variant::PrecondGd => match &self.precond {
                None => return fail("preconditioned descent needs a fixed scaling matrix".into()),
                Some(p) => {
                    if p.pattern().dim != obj.dim() {
                        return fail("preconditioner dimension does not match objective".into());
                    }
                }
            },
            Variant::Gd | Variant::Agd | Variant::AdaGrad => {}
        }
        if self.oracle == OracleKind::SteepestDescent && !(obj.hessian_constant() && has_hvp) {
            return fail("steepest-descent oracle applies to constant-Hessian objectives only".into());
        }
        Ok(())
    }
}

/// A finished run: the best-objective iterate, summary, trace, and the
/// optional frozen loss sequence and final learner state.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub x_best: Vec<f64>,
    pub summary: RunSummary,
    pub trace: Vec<TraceRecord>,
    pub frozen: Option<FrozenTrajectory>,
    pub final_scaling: Option<ScalingMatrix>,
    pub final_x: Vec<f64>,
    /// Final lower bound for the z-relaxed modes.
    pub final_z: Option<f64>,
}

/// Entry point: dispatch a config to the matching loop.
pub fn run_solver(cfg: &SolverConfig, obj: &dyn Objective, x1: &[f64]) -> Result<SolverRun, SolverError> {
    match cfg.variant {
        Variant::OsgmR | Variant::OsgmG | Variant::OsgmH => run_osgm(cfg, obj, x1),
        Variant::OsgmRz => {
            let z = cfg.z_init.ok_or_else(|| SolverError::Incompatible("lower-bound mode needs z_init".into()))?;
            run_osgm_rz(cfg, obj, x1, z)
        }
        Variant::DoubleLoop => {
            let z = cfg.z_init.ok_or_else(|| SolverError::Incompatible("double loop needs z_init".into()))?;
            run_double_loop(cfg, obj, x1, z).map(|d| d.into_solver_run())
        }
        Variant::Gd | Variant::Agd | Variant::Sagd | Variant::AdaGrad | Variant::PrecondGd => {
            run_baseline(cfg, obj, x1)
        }
    }
}
