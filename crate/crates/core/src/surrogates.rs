//! Per-step surrogate losses in the scaling matrix: the function value
//! ratio (with known optimum or a lower bound), the gradient-norm ratio,
//! and the hypergradient surrogate, with analytic gradients in pattern
//! coordinates.

use crate::linalg;
use crate::problems::Objective;
use crate::scaling::{ScalingMatrix, ScalingPattern};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SurrogateError {
    /// The value or gradient gap is below the numeric floor: the solver
    /// should stop and report convergence.
    #[error("converged: {0}")]
    Converged(&'static str),
    #[error("hvp unavailable: objective unsupported by the gradient-norm surrogate")]
    HvpUnavailable,
}

/// Below this gap the ratio surrogates are numerically meaningless.
pub fn gap_floor(ref_value: f64) -> f64 {
    1e-14 * (1.0 + ref_value.abs())
}

/// Per-iteration bundle around one proposed step x+ = x - P grad f(x).
///
/// `g_plus` is filled lazily and shared between the surrogate gradient, the
/// monotone oracle, and the next iteration's cache, so one new gradient is
/// evaluated per iteration under the simple-comparison oracle.
#[derive(Debug, Clone)]
pub struct StepCache {
    pub x: Vec<f64>,
    pub fx: f64,
    pub gx: Vec<f64>,
    pub x_plus: Vec<f64>,
    pub f_plus: f64,
    pub g_plus: Option<Vec<f64>>,
    /// f(x*) for the ratio surrogate, the lower bound z for its relaxation,
    /// unused by the gradient-norm and hypergradient surrogates.
    pub ref_value: f64,
}

impl StepCache {
    /// Evaluate the proposed step and fill everything except `g_plus`.
    pub fn propose(obj: &dyn Objective, x: Vec<f64>, fx: f64, gx: Vec<f64>, p: &ScalingMatrix, ref_value: f64) -> Self {
        let step = p.apply(&gx);
        let x_plus = linalg::sub(&x, &step);
        let f_plus = obj.value(&x_plus);
        StepCache { x, fx, gx, x_plus, f_plus, g_plus: None, ref_value }
    }

    /// Gradient at the proposed point, computed once and cached.
    pub fn ensure_g_plus(&mut self, obj: &dyn Objective) -> &[f64] {
        if self.g_plus.is_none() {
            self.g_plus = Some(obj.grad(&self.x_plus));
        }
        self.g_plus.as_deref().unwrap()
    }

    fn g_plus_ref(&self) -> &[f64] {
        self.g_plus.as_deref().expect("g_plus must be filled before surrogate gradients")
    }
}

/// (f(x+) - ref) / (f(x) - ref); with ref = f(x*) this is the contraction
/// factor of the function value gap.
pub fn ratio_value(c: &StepCache) -> Result<f64, SurrogateError> {
    let gap = c.fx - c.ref_value;
    if gap <= gap_floor(c.ref_value) {
        return Err(SurrogateError::Converged("function value gap underflow"));
    }
    Ok((c.f_plus - c.ref_value) / gap)
}

/// Pattern coordinates of -grad f(x+) grad f(x)^T / (f(x) - ref).
pub fn ratio_grad(c: &StepCache, pattern: &ScalingPattern) -> Result<Vec<f64>, SurrogateError> {
    let gap = c.fx - c.ref_value;
    if gap <= gap_floor(c.ref_value) {
        return Err(SurrogateError::Converged("function value gap underflow"));
    }
    Ok(pattern.restrict_outer(c.g_plus_ref(), &c.gx, -1.0 / gap))
}

/// ||grad f(x+)|| / ||grad f(x)||.
pub fn gnorm_value(c: &StepCache) -> Result<f64, SurrogateError> {
    let gn = linalg::norm2(&c.gx);
    if gn == 0.0 {
        return Err(SurrogateError::Converged("zero gradient"));
    }
    Ok(linalg::norm2(c.g_plus_ref()) / gn)
}

/// Pattern coordinates of
/// -hess f(x+) grad f(x+) grad f(x)^T / (||grad f(x)|| ||grad f(x+)||).
///
/// Needs one Hessian-vector product at the proposed point. A vanishing
/// gradient there certifies optimality and is reported as convergence
/// rather than a Clarke subgradient.
pub fn gnorm_grad(c: &StepCache, obj: &dyn Objective, pattern: &ScalingPattern) -> Result<Vec<f64>, SurrogateError> {
    let gn = linalg::norm2(&c.gx);
    if gn == 0.0 {
        return Err(SurrogateError::Converged("zero gradient"));
    }
    let g_plus = c.g_plus_ref();
    let gn_plus = linalg::norm2(g_plus);
    if gn_plus == 0.0 {
        return Err(SurrogateError::Converged("proposed point is optimal"));
    }
    let w = obj.hvp(&c.x_plus, g_plus).ok_or(SurrogateError::HvpUnavailable)?;
    Ok(pattern.restrict_outer(&w, &c.gx, -1.0 / (gn * gn_plus)))
}

/// (f(x+) - f(x)) / ||grad f(x)||^2, the one-step progress per squared
/// gradient norm.
pub fn hyper_value(c: &StepCache) -> Result<f64, SurrogateError> {
    let gn2 = linalg::dot(&c.gx, &c.gx);
    if gn2 == 0.0 {
        return Err(SurrogateError::Converged("zero gradient"));
    }
    Ok((c.f_plus - c.fx) / gn2)
}

/// Pattern coordinates of -grad f(x+) grad f(x)^T / ||grad f(x)||^2.
pub fn hyper_grad(c: &StepCache, pattern: &ScalingPattern) -> Result<Vec<f64>, SurrogateError> {
    let gn2 = linalg::dot(&c.gx, &c.gx);
    if gn2 == 0.0 {
        return Err(SurrogateError::Converged("zero gradient"));
    }
    Ok(pattern.restrict_outer(c.g_plus_ref(), &c.gx, -1.0 / gn2))
}

/// Which surrogate loss a solver is learning against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurrogateKind {
    /// Ratio with ref = f(x*) or a lower bound z.
    Ratio,
    GradNorm,
    Hyper,
}

impl SurrogateKind {
    pub fn value(&self, c: &StepCache) -> Result<f64, SurrogateError> {
        match self {
            SurrogateKind::Ratio => ratio_value(c),
            SurrogateKind::GradNorm => gnorm_value(c),
            SurrogateKind::Hyper => hyper_value(c),
        }
    }

    pub fn grad(
        &self,
        c: &StepCache,
        obj: &dyn Objective,
        pattern: &ScalingPattern,
    ) -> Result<Vec<f64>, SurrogateError> {
        match self {
            SurrogateKind::Ratio => ratio_grad(c, pattern),
            SurrogateKind::GradNorm => gnorm_grad(c, obj, pattern),
            SurrogateKind::Hyper => hyper_grad(c, pattern),
        }
    }
}
