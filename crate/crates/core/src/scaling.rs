//! Structured scaling-matrix sets: full, diagonal, fixed sparsity pattern,
//! and diagonal plus low-rank, with pattern-restricted rank-one gradients
//! and Euclidean projection onto an optional Frobenius ball.
//!
//! A scaling matrix is stored as a coefficient vector in its pattern's
//! coordinate system: n^2 entries row-major for Full, n for Diagonal, one
//! per mask entry for Sparse, and (d, alpha) for DiagPlusLowRank. The
//! matrix is never required to be symmetric or positive definite.

use crate::linalg::DenseMatrix;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("coefficient length {got} does not match pattern ({expected})")]
    CoeffLength { expected: usize, got: usize },
    #[error("vector length {got} does not match pattern dimension {expected}")]
    VecLength { expected: usize, got: usize },
    #[error("bad pattern spec: {0}")]
    Spec(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PatternKind {
    Full,
    Diagonal,
    /// Sorted, deduplicated row-major (i, j) index pairs.
    Sparse(Vec<(usize, usize)>),
    /// Candidate set { diag(d) + alpha * M }.
    DiagPlusLowRank(DenseMatrix),
}

/// A pattern subspace with an optional Frobenius-ball radius.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPattern {
    pub kind: PatternKind,
    pub dim: usize,
    /// None means the feasible set is unbounded (the default in experiments).
    pub ball_radius: Option<f64>,
}

impl ScalingPattern {
    pub fn full(dim: usize) -> Self {
        Self { kind: PatternKind::Full, dim, ball_radius: None }
    }

    pub fn diagonal(dim: usize) -> Self {
        Self { kind: PatternKind::Diagonal, dim, ball_radius: None }
    }

    pub fn sparse(dim: usize, mut mask: Vec<(usize, usize)>) -> Self {
        mask.sort_unstable();
        mask.dedup();
        assert!(mask.iter().all(|&(i, j)| i < dim && j < dim), "mask index out of range");
        Self { kind: PatternKind::Sparse(mask), dim, ball_radius: None }
    }

    pub fn diag_plus_low_rank(m: DenseMatrix) -> Self {
        assert!(m.is_square());
        let dim = m.rows;
        Self { kind: PatternKind::DiagPlusLowRank(m), dim, ball_radius: None }
    }

    pub fn with_ball(mut self, radius: f64) -> Self {
        assert!(radius > 0.0);
        self.ball_radius = Some(radius);
        self
    }

    /// Number of coefficients parameterizing the pattern.
    pub fn coeff_len(&self) -> usize {
        match &self.kind {
            PatternKind::Full => self.dim * self.dim,
            PatternKind::Diagonal => self.dim,
            PatternKind::Sparse(mask) => mask.len(),
            PatternKind::DiagPlusLowRank(_) => self.dim + 1,
        }
    }

    /// Pattern-subspace coordinates of the rank-one matrix scale * u v^T.
    ///
    /// For the non-orthogonal DiagPlusLowRank parameterization the alpha
    /// coordinate is the exact partial derivative <u, M v>, not an
    /// orthogonal Frobenius projection.
    pub fn restrict_outer(&self, u: &[f64], v: &[f64], scale: f64) -> Vec<f64> {
        assert_eq!(u.len(), self.dim);
        assert_eq!(v.len(), self.dim);
        match &self.kind {
            PatternKind::Full => {
                let n = self.dim;
                let mut out = vec![0.0; n * n];
                for i in 0..n {
                    let su = scale * u[i];
                    for j in 0..n {
                        out[i * n + j] = su * v[j];
                    }
                }
                out
            }
            PatternKind::Diagonal => u.iter().zip(v).map(|(a, b)| scale * a * b).collect(),
            PatternKind::Sparse(mask) => mask.iter().map(|&(i, j)| scale * u[i] * v[j]).collect(),
            PatternKind::DiagPlusLowRank(m) => {
                let mut out: Vec<f64> = u.iter().zip(v).map(|(a, b)| scale * a * b).collect();
                let mv = m.matvec(v);
                out.push(scale * crate::linalg::dot(u, &mv));
                out
            }
        }
    }

    /// Euclidean projection onto the feasible set in pattern coordinates:
    /// identity when unbounded, otherwise rescaling onto the radius-D ball.
    pub fn project(&self, mut coeffs: Vec<f64>) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.coeff_len());
        if let Some(radius) = self.ball_radius {
            let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > radius {
                let s = radius / norm;
                for c in coeffs.iter_mut() {
                    *c *= s;
                }
            }
        }
        coeffs
    }

    /// Text form used by run-config files: kind tag plus mask/factor payload.
    pub fn spec_string(&self) -> String {
        match &self.kind {
            PatternKind::Full => "full".into(),
            PatternKind::Diagonal => "diagonal".into(),
            PatternKind::Sparse(mask) => {
                let pairs: Vec<String> = mask.iter().map(|(i, j)| format!("{i},{j}")).collect();
                format!("sparse:{}", pairs.join(";"))
            }
            PatternKind::DiagPlusLowRank(m) => {
                let rows: Vec<String> = (0..m.rows)
                    .map(|i| {
                        (0..m.cols)
                            .map(|j| format!("{}", m[(i, j)]))
                            .collect::<Vec<_>>()
                            .join(",")
                    })
                    .collect();
                format!("diag_plus_lowrank:{}", rows.join(";"))
            }
        }
    }

    /// Parse the `spec_string` form. `dim` fixes the dimension for the
    /// payload-free kinds.
    pub fn parse_spec(spec: &str, dim: usize) -> Result<Self, PatternError> {
        let spec = spec.trim();
        if spec == "full" {
            return Ok(Self::full(dim));
        }
        if spec == "diagonal" {
            return Ok(Self::diagonal(dim));
        }
        if let Some(body) = spec.strip_prefix("sparse:") {
            let mut mask = Vec::new();
            for pair in body.split(';').filter(|s| !s.is_empty()) {
                let (i, j) = pair
                    .split_once(',')
                    .ok_or_else(|| PatternError::Spec(format!("bad mask pair `{pair}`")))?;
                let i: usize = i
                    .trim()
                    .parse()
                    .map_err(|_| PatternError::Spec(format!("bad mask index `{i}`")))?;
                let j: usize = j
                    .trim()
                    .parse()
                    .map_err(|_| PatternError::Spec(format!("bad mask index `{j}`")))?;
                if i >= dim || j >= dim {
                    return Err(PatternError::Spec(format!("mask index ({i},{j}) out of range")));
                }
                mask.push((i, j));
            }
            return Ok(Self::sparse(dim, mask));
        }
        if let Some(body) = spec.strip_prefix("diag_plus_lowrank:") {
            let rows: Vec<&str> = body.split(';').collect();
            if rows.len() != dim {
                return Err(PatternError::Spec(format!(
                    "factor needs {dim} rows, found {}",
                    rows.len()
                )));
            }
            let mut m = DenseMatrix::zeros(dim, dim);
            for (i, row) in rows.iter().enumerate() {
                let vals: Vec<&str> = row.split(',').collect();
                if vals.len() != dim {
                    return Err(PatternError::Spec(format!("factor row {i} needs {dim} values")));
                }
                for (j, v) in vals.iter().enumerate() {
                    m[(i, j)] = v
                        .trim()
                        .parse()
                        .map_err(|_| PatternError::Spec(format!("bad factor value `{v}`")))?;
                }
            }
            return Ok(Self::diag_plus_low_rank(m));
        }
        Err(PatternError::Spec(format!("unknown pattern kind `{spec}`")))
    }
}

impl fmt::Display for ScalingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec_string())
    }
}

/// A scaling matrix: a pattern plus coefficients in its coordinate system.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingMatrix {
    pattern: Arc<ScalingPattern>,
    coeffs: Vec<f64>,
}

impl ScalingMatrix {
    pub fn zeros(pattern: Arc<ScalingPattern>) -> Self {
        let coeffs = vec![0.0; pattern.coeff_len()];
        Self { pattern, coeffs }
    }

    pub fn from_coeffs(pattern: Arc<ScalingPattern>, coeffs: Vec<f64>) -> Result<Self, PatternError> {
        if coeffs.len() != pattern.coeff_len() {
            return Err(PatternError::CoeffLength {
                expected: pattern.coeff_len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { pattern, coeffs })
    }

    /// Scaled identity alpha*I expressed in the pattern's coordinates; None
    /// when the identity direction is outside the pattern.
    pub fn scaled_identity(pattern: Arc<ScalingPattern>, alpha: f64) -> Option<Self> {
        let n = pattern.dim;
        let coeffs = match &pattern.kind {
            PatternKind::Full => {
                let mut c = vec![0.0; n * n];
                for i in 0..n {
                    c[i * n + i] = alpha;
                }
                c
            }
            PatternKind::Diagonal => vec![alpha; n],
            PatternKind::Sparse(mask) => {
                let has_all_diag = (0..n).all(|i| mask.binary_search(&(i, i)).is_ok());
                if !has_all_diag {
                    return None;
                }
                mask.iter().map(|&(i, j)| if i == j { alpha } else { 0.0 }).collect()
            }
            PatternKind::DiagPlusLowRank(_) => {
                let mut c = vec![alpha; n];
                c.push(0.0);
                c
            }
        };
        Some(Self { pattern, coeffs })
    }

    pub fn pattern(&self) -> &Arc<ScalingPattern> {
        &self.pattern
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Vec<f64> {
        &mut self.coeffs
    }

    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// P g in O(nnz) for sparse patterns and O(n^2) for the dense ones.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.pattern.dim, "apply dimension mismatch");
        let n = self.pattern.dim;
        match &self.pattern.kind {
            PatternKind::Full => {
                let mut out = vec![0.0; n];
                for i in 0..n {
                    let row = &self.coeffs[i * n..(i + 1) * n];
                    out[i] = row.iter().zip(g).map(|(a, b)| a * b).sum();
                }
                out
            }
            PatternKind::Diagonal => self.coeffs.iter().zip(g).map(|(d, gi)| d * gi).collect(),
            PatternKind::Sparse(mask) => {
                let mut out = vec![0.0; n];
                for (&(i, j), c) in mask.iter().zip(&self.coeffs) {
                    out[i] += c * g[j];
                }
                out
            }
            PatternKind::DiagPlusLowRank(m) => {
                let (d, alpha) = self.coeffs.split_at(n);
                let alpha = alpha[0];
                let mut out: Vec<f64> = d.iter().zip(g).map(|(di, gi)| di * gi).collect();
                if alpha != 0.0 {
                    let mg = m.matvec(g);
                    for (oi, mi) in out.iter_mut().zip(&mg) {
                        *oi += alpha * mi;
                    }
                }
                out
            }
        }
    }

    /// Dense form of the scaling matrix.
    pub fn materialize(&self) -> DenseMatrix {
        let n = self.pattern.dim;
        let mut p = DenseMatrix::zeros(n, n);
        match &self.pattern.kind {
            PatternKind::Full => p.data.copy_from_slice(&self.coeffs),
            PatternKind::Diagonal => {
                for i in 0..n {
                    p[(i, i)] = self.coeffs[i];
                }
            }
            PatternKind::Sparse(mask) => {
                for (&(i, j), c) in mask.iter().zip(&self.coeffs) {
                    p[(i, j)] = *c;
                }
            }
            PatternKind::DiagPlusLowRank(m) => {
                let (d, alpha) = self.coeffs.split_at(n);
                let alpha = alpha[0];
                for i in 0..n {
                    for j in 0..n {
                        p[(i, j)] = alpha * m[(i, j)];
                    }
                    p[(i, i)] += d[i];
                }
            }
        }
        p
    }
}
