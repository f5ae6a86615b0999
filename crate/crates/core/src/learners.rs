//! Online learners over pattern coordinates: projected online (sub)gradient
//! descent and diagonal AdaGrad, plus the theory-derived stepsizes.

use crate::scaling::ScalingMatrix;
use crate::surrogates::SurrogateKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("non-finite surrogate gradient at step {step}")]
    NonFiniteGradient { step: usize },
    #[error("theory stepsize for this surrogate needs a bounded candidate set")]
    NeedsBoundedSet,
}

const ADAGRAD_EPS: f64 = 1e-12;

/// Update rule and its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum LearnerRule {
    Ogd { eta: f64 },
    AdaGrad { eta: f64 },
}

/// Online-learner state: the current scaling matrix plus per-rule
/// accumulators.
#[derive(Debug, Clone)]
pub struct LearnerState {
    current: ScalingMatrix,
    rule: LearnerRule,
    accum: Vec<f64>,
    step_count: usize,
}

impl LearnerState {
    pub fn new(initial: ScalingMatrix, rule: LearnerRule) -> Self {
        let accum = match rule {
            LearnerRule::AdaGrad { .. } => vec![0.0; initial.coeffs().len()],
            LearnerRule::Ogd { .. } => Vec::new(),
        };
        Self { current: initial, rule, accum, step_count: 0 }
    }

    pub fn current(&self) -> &ScalingMatrix {
        &self.current
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn rule(&self) -> &LearnerRule {
        &self.rule
    }

    /// One projected online-learning step on the surrogate gradient.
    pub fn update(&mut self, grad: &[f64]) -> Result<(), LearnerError> {
        assert_eq!(grad.len(), self.current.coeffs().len());
        if !crate::linalg::all_finite(grad) {
            return Err(LearnerError::NonFiniteGradient { step: self.step_count + 1 });
        }
        let pattern = self.current.pattern().clone();
        let coeffs = self.current.coeffs_mut();
        match self.rule {
            LearnerRule::Ogd { eta } => {
                for (c, g) in coeffs.iter_mut().zip(grad) {
                    *c -= eta * g;
                }
            }
            LearnerRule::AdaGrad { eta } => {
                for ((c, g), a) in coeffs.iter_mut().zip(grad).zip(&mut self.accum) {
                    *a += g * g;
                    if *g != 0.0 {
                        *c -= eta * g / (*a + ADAGRAD_EPS).sqrt();
                    }
                }
            }
        }
        let projected = pattern.project(std::mem::take(coeffs));
        *coeffs = projected;
        self.step_count += 1;
        Ok(())
    }
}

/// The stepsizes the regret analyses pin down, per surrogate.
///
/// `ball_radius` is the Frobenius radius of the candidate set; the ratio
/// surrogate also admits a radius-free rule given an estimate of the
/// distance from the initial scaling matrix to the hindsight optimum.
pub fn theory_stepsize(
    kind: SurrogateKind,
    smoothness: f64,
    ball_radius: Option<f64>,
    horizon: usize,
    dist_estimate: Option<f64>,
) -> Result<f64, LearnerError> {
    assert!(smoothness > 0.0);
    assert!(horizon >= 1);
    let l = smoothness;
    let k = horizon as f64;
    match kind {
        SurrogateKind::Ratio => {
            let cap = 1.0 / (4.0 * l * l);
            match (ball_radius, dist_estimate) {
                (Some(d), _) => Ok(cap.min(d / (2.0 * l * (1.0 + l * d) * k.sqrt()))),
                (None, Some(dist)) => Ok(cap.min(dist / (2.0 * l * k.sqrt()))),
                (None, None) => Err(LearnerError::NeedsBoundedSet),
            }
        }
        SurrogateKind::GradNorm => {
            let d = ball_radius.ok_or(LearnerError::NeedsBoundedSet)?;
            Ok(2.0 * d / (l * k.sqrt()))
        }
        SurrogateKind::Hyper => {
            let d = ball_radius.ok_or(LearnerError::NeedsBoundedSet)?;
            Ok(2.0 * d / ((l * d + 1.0) * k.sqrt()))
        }
    }
}
