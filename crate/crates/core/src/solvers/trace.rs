//! Per-iteration diagnostics records, run summaries, and the trace CSV
//! schema shared by the solver loops and the CLI.

use std::fmt::Write as _;
use thiserror::Error;

/// One diagnostics row. `f_gap` is measured against the known optimum when
/// available, against the current lower bound z in the lower-bound ratio
/// mode, and against zero otherwise. `surrogate` is NaN on rows where no
/// surrogate was evaluated (baselines and the final iterate).
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub iter: usize,
    pub f_gap: f64,
    pub grad_norm: f64,
    pub surrogate: f64,
    pub oracle_accepted: bool,
    pub cum_grad_evals: usize,
    pub wall_time_ns: u128,
}

impl TraceRecord {
    /// Field-wise equality ignoring wall time, used by determinism checks.
    pub fn same_modulo_time(&self, other: &TraceRecord) -> bool {
        self.iter == other.iter
            && self.f_gap.to_bits() == other.f_gap.to_bits()
            && self.grad_norm.to_bits() == other.grad_norm.to_bits()
            && (self.surrogate.to_bits() == other.surrogate.to_bits()
                || (self.surrogate.is_nan() && other.surrogate.is_nan()))
            && self.oracle_accepted == other.oracle_accepted
            && self.cum_grad_evals == other.cum_grad_evals
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Gradient norm fell below the tolerance.
    GradTol,
    /// Surrogate reported convergence (gap underflow or a stationary
    /// proposed point).
    Converged,
    MaxIters,
    /// Aborted: diagnostics carried by the error.
    Aborted,
}

impl StopReason {
    pub fn label(&self) -> &'static str {
        match self {
            StopReason::GradTol => "grad_tol",
            StopReason::Converged => "converged",
            StopReason::MaxIters => "max_iters",
            StopReason::Aborted => "aborted",
        }
    }
}

/// End-of-run statistics next to the full trace.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub solver: String,
    pub iterations: usize,
    pub stop: StopReason,
    pub best_f: f64,
    pub final_grad_norm: f64,
    pub grad_evals: usize,
    pub hvp_evals: usize,
    pub wall_time_ns: u128,
}

pub const TRACE_CSV_HEADER: &str = "iter,f_gap,grad_norm,surrogate,oracle_accepted,grad_evals,time_ns";

#[derive(Debug, Error)]
pub enum TraceCsvError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("missing or wrong header; expected `{TRACE_CSV_HEADER}`")]
    Header,
}

pub fn trace_to_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(TRACE_CSV_HEADER);
    out.push('\n');
    for r in trace {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iter, r.f_gap, r.grad_norm, r.surrogate, r.oracle_accepted, r.cum_grad_evals, r.wall_time_ns
        )
        .unwrap();
    }
    out
}

pub fn trace_from_csv(text: &str) -> Result<Vec<TraceRecord>, TraceCsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_CSV_HEADER => {}
        _ => return Err(TraceCsvError::Header),
    }
    let mut trace = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(TraceCsvError::Malformed {
                line: lineno + 1,
                msg: format!("expected 7 fields, found {}", fields.len()),
            });
        }
        let bad = |what: &str| TraceCsvError::Malformed { line: lineno + 1, msg: format!("bad {what}") };
        trace.push(TraceRecord {
            iter: fields[0].trim().parse().map_err(|_| bad("iter"))?,
            f_gap: fields[1].trim().parse().map_err(|_| bad("f_gap"))?,
            grad_norm: fields[2].trim().parse().map_err(|_| bad("grad_norm"))?,
            surrogate: fields[3].trim().parse().map_err(|_| bad("surrogate"))?,
            oracle_accepted: fields[4].trim().parse().map_err(|_| bad("oracle_accepted"))?,
            cum_grad_evals: fields[5].trim().parse().map_err(|_| bad("grad_evals"))?,
            wall_time_ns: fields[6].trim().parse().map_err(|_| bad("time_ns"))?,
        });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_including_nan() {
        let trace = vec![
            TraceRecord {
                iter: 1,
                f_gap: 0.5,
                grad_norm: 1.0,
                surrogate: 0.25,
                oracle_accepted: true,
                cum_grad_evals: 2,
                wall_time_ns: 1234,
            },
            TraceRecord {
                iter: 2,
                f_gap: 1e-17,
                grad_norm: 0.0,
                surrogate: f64::NAN,
                oracle_accepted: false,
                cum_grad_evals: 3,
                wall_time_ns: 5678,
            },
        ];
        let text = trace_to_csv(&trace);
        assert!(text.starts_with(TRACE_CSV_HEADER));
        let back = trace_from_csv(&text).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in trace.iter().zip(&back) {
            assert!(a.same_modulo_time(b));
            assert_eq!(a.wall_time_ns, b.wall_time_ns);
        }
    }

    #[test]
    fn csv_rejects_bad_header_and_rows() {
        assert!(matches!(trace_from_csv("nope\n1,2\n"), Err(TraceCsvError::Header)));
        let text = format!("{TRACE_CSV_HEADER}\n1,2,3\n");
        assert!(matches!(trace_from_csv(&text), Err(TraceCsvError::Malformed { line: 2, .. })));
    }
}
