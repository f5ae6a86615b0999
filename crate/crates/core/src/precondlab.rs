//! Preconditioner analysis for quadratics: condition numbers under a
//! scaling, a certified-feasible approximation of the optimal diagonal
//! preconditioner, extremal-eigenvector sparsity scoring, and a brute-force
//! check that the conditioning and worst-case-ratio problems pick the same
//! diagonal on 2x2 instances.

use crate::linalg::{self, extremal_eigen, sym_eigen, sym_sqrt, DenseMatrix};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PrecondError {
    #[error("matrix is not symmetric positive definite")]
    NotSpd,
    #[error("dimension {0} too large for dense preconditioner search (max 500)")]
    TooLarge(usize),
}

/// Condition number of P^{1/2} A P^{1/2} for SPD A and P; scale-invariant
/// in P.
pub fn kappa_of(a: &DenseMatrix, p: &DenseMatrix) -> Result<f64, PrecondError> {
    if a.cholesky().is_none() || p.cholesky().is_none() {
        return Err(PrecondError::NotSpd);
    }
    let s = sym_sqrt(p).ok_or(PrecondError::NotSpd)?;
    let m = s.matmul(a).matmul(&s);
    let eig = sym_eigen(&m);
    let min = eig.values[0];
    let max = eig.values[eig.values.len() - 1];
    if min <= 0.0 {
        return Err(PrecondError::NotSpd);
    }
    Ok(max / min)
}

/// `kappa_of` for a diagonal P given by its entries.
pub fn kappa_of_diagonal(a: &DenseMatrix, d: &[f64]) -> Result<f64, PrecondError> {
    if d.iter().any(|&v| v <= 0.0) {
        return Err(PrecondError::NotSpd);
    }
    let (min, max) = diag_scaled_extremes(a, d)?;
    Ok(max / min)
}

/// Extremal eigenvalues of D^{1/2} A D^{1/2}.
fn diag_scaled_extremes(a: &DenseMatrix, d: &[f64]) -> Result<(f64, f64), PrecondError> {
    let n = a.rows;
    let sqrt_d: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = sqrt_d[i] * a[(i, j)] * sqrt_d[j];
        }
    }
    let eig = sym_eigen(&m);
    let min = eig.values[0];
    let max = eig.values[n - 1];
    if min <= 0.0 || !max.is_finite() {
        return Err(PrecondError::NotSpd);
    }
    Ok((min, max))
}

/// Certified-feasible approximation of the optimal diagonal preconditioner.
#[derive(Debug, Clone)]
pub struct DiagonalPrecond {
    pub d: Vec<f64>,
    /// 1/tau for the certified feasibility level tau.
    pub kappa_star_ub: f64,
    /// Smallest eigenvalue slack of the two feasibility constraints.
    pub feasibility_margin: f64,
    /// Certified level: tau A^{-1} <= diag(d) <= A^{-1}.
    pub tau: f64,
}

/// Heuristic search for the optimal diagonal preconditioner: Jacobi start,
/// bisection on the feasibility level with projected-subgradient
/// refinement, then a rescale that certifies feasibility of the winner.
/// The returned d is feasible; optimality is not guaranteed.
pub fn approx_optimal_diagonal(a: &DenseMatrix) -> Result<DiagonalPrecond, PrecondError> {
    let n = a.rows;
    if n > 500 {
        return Err(PrecondError::TooLarge(n));
    }
    let chol = a.cholesky().ok_or(PrecondError::NotSpd)?;
    let a_inv = chol.inverse();

    let jacobi: Vec<f64> = (0..n).map(|i| 1.0 / a[(i, i)]).collect();
    let kappa_jacobi = kappa_of_diagonal(a, &jacobi)?;
    let kappa_uniform = kappa_of_diagonal(a, &vec![1.0; n])?;

    // Bisection on tau with subgradient refinement of
    // F(d) = lambda_min(diag(d) - tau A^{-1}) subject to diag(d) <= A^{-1}.
    // The constraint is restored by a uniform spectral shift, which is exact.
    let feasible_scale = |d: &[f64]| -> Vec<f64> {
        // scale so that lambda_max(A^{1/2} D A^{1/2}) = 1 (boundary of the
        // upper constraint)
        match diag_scaled_extremes(a, d) {
            Ok((_, max)) => d.iter().map(|v| v / max).collect(),
            Err(_) => d.to_vec(),
        }
    };
    let mut best_d = feasible_scale(&jacobi);
    let mut tau_lo = 1.0 / kappa_jacobi;
    let mut tau_hi = 1.0;
    let mut eig_warm: Option<Vec<f64>> = None;
    for _level in 0..30 {
        let tau = 0.5 * (tau_lo + tau_hi);
        let mut d = best_d.clone();
        let mut found = false;
        for _step in 0..200 {
            // S = diag(d) - tau A^{-1}
            let mut s = a_inv.scale(-tau);
            for i in 0..n {
                s[(i, i)] += d[i];
            }
            let it = extremal_eigen(&s, false, eig_warm.as_deref(), 1e-8, 10 * n.max(10));
            eig_warm = Some(it.eigenvector.clone());
            if it.eigenvalue >= 0.0 {
                found = true;
                break;
            }
            // subgradient of lambda_min wrt d is v .* v
            let step = 2.0 * it.eigenvalue.abs() + 1e-6;
            for (di, vi) in d.iter_mut().zip(&it.eigenvector) {
                *di += step * vi * vi;
            }
            // restore diag(d) <= A^{-1} exactly by a uniform shift
            let mut upper = a_inv.clone();
            for i in 0..n {
                upper[(i, i)] -= d[i];
            }
            let slack = extremal_eigen(&upper, false, None, 1e-8, 10 * n.max(10)).eigenvalue;
            if slack < 0.0 {
                for di in d.iter_mut() {
                    *di += slack;
                }
            }
        }
        if found && d.iter().all(|&v| v > 0.0) {
            best_d = d;
            tau_lo = tau;
        } else {
            tau_hi = tau;
        }
    }

    // Winner among the refined direction and the two closed-form anchors;
    // only improvements over the Jacobi start are accepted.
    let mut d = best_d;
    let mut kappa_best = kappa_of_diagonal(a, &d).unwrap_or(f64::INFINITY);
    if kappa_jacobi <= kappa_best {
        d = jacobi.clone();
        kappa_best = kappa_jacobi;
    }
    if kappa_uniform < kappa_best {
        d = vec![1.0; n];
    }

    // Certify: rescale to sit just inside the upper constraint and read
    // tau off the smallest eigenvalue.
    let (min, max) = diag_scaled_extremes(a, &d)?;
    let scale = (1.0 - 1e-12) / max;
    let d: Vec<f64> = d.iter().map(|v| v * scale).collect();
    let tau = (min / max) * (1.0 - 1e-12) * (1.0 - 1e-12);
    let kappa_star_ub = 1.0 / tau;

    // Margin via the accurate symmetric eigensolver on both constraints.
    let mut upper = a_inv.clone();
    let mut lower = a_inv.scale(-tau);
    for i in 0..n {
        upper[(i, i)] -= d[i];
        lower[(i, i)] += d[i];
    }
    let margin_upper = sym_eigen(&upper).values[0];
    let margin_lower = sym_eigen(&lower).values[0];
    let feasibility_margin = margin_upper.min(margin_lower);

    Ok(DiagonalPrecond { d, kappa_star_ub, feasibility_margin, tau })
}

/// Entrywise score |v_max v_max^T - v_min v_min^T| over the extremal
/// eigenvectors, plus the mask of its k largest entries.
#[derive(Debug, Clone)]
pub struct PatternScore {
    pub score: DenseMatrix,
    pub mask: Vec<(usize, usize)>,
    pub converged: bool,
}

pub fn pattern_score(a: &DenseMatrix, k: usize) -> Result<PatternScore, PrecondError> {
    if a.cholesky().is_none() {
        return Err(PrecondError::NotSpd);
    }
    let n = a.rows;
    let it_max = extremal_eigen(a, true, None, 1e-10, 100 * n.max(10));
    let it_min = extremal_eigen(a, false, None, 1e-10, 100 * n.max(10));
    let vmax = it_max.eigenvector;
    let vmin = it_min.eigenvector;
    let mut score = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            score[(i, j)] = (vmax[i] * vmax[j] - vmin[i] * vmin[j]).abs();
        }
    }
    // k largest entries, ties broken by row-major order
    let mut order: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    order.sort_by(|&(i1, j1), &(i2, j2)| {
        score[(i2, j2)]
            .partial_cmp(&score[(i1, j1)])
            .unwrap()
            .then((i1 * n + j1).cmp(&(i2 * n + j2)))
    });
    let mask: Vec<(usize, usize)> = order.into_iter().take(k.min(n * n)).collect();
    Ok(PatternScore { score, mask, converged: it_max.converged && it_min.converged })
}

/// Brute-force comparison of the two diagonal-preconditioner objectives on
/// a 2x2 SPD matrix: the condition number of D^{1/2} A D^{1/2} and the
/// worst-case one-step ratio max_x r_x(D), whose value at a candidate is
/// max_i (1 - m_i)^2 over the eigenvalues m_i of D^{1/2} A D^{1/2}.
#[derive(Debug, Clone)]
pub struct MinimaxCheck {
    pub sdp_argmin: (f64, f64),
    pub minimax_argmin: (f64, f64),
    /// Distance between the two argmin rays in units of grid cells of
    /// log(d_2/d_1); the conditioning objective is scale-invariant, so the
    /// ray is what the problems share.
    pub ratio_distance_cells: f64,
    pub kappa_at_sdp: f64,
    pub worst_ratio_at_minimax: f64,
    pub grid: usize,
}

pub fn minimax_check_2x2(a: &DenseMatrix) -> Result<MinimaxCheck, PrecondError> {
    assert_eq!(a.rows, 2, "brute-force check is for 2x2 instances");
    if a.cholesky().is_none() {
        return Err(PrecondError::NotSpd);
    }
    let eig = sym_eigen(a);
    let (lmin, lmax) = (eig.values[0], eig.values[1]);
    let grid = 200usize;
    let lo = 1e-2 / lmax;
    let hi = 1e2 / lmin;
    let log_lo = lo.ln();
    let step = (hi.ln() - log_lo) / (grid as f64 - 1.0);
    let d_at = |idx: usize| (log_lo + step * idx as f64).exp();

    // closed-form eigenvalues of the 2x2 symmetric scaled matrix
    let scaled_eigs = |d1: f64, d2: f64| {
        let m11 = d1 * a[(0, 0)];
        let m22 = d2 * a[(1, 1)];
        let m12 = (d1 * d2).sqrt() * a[(0, 1)];
        let mid = 0.5 * (m11 + m22);
        let rad = (0.25 * (m11 - m22) * (m11 - m22) + m12 * m12).sqrt();
        (mid - rad, mid + rad)
    };

    let mut best_kappa = f64::INFINITY;
    let mut best_kappa_idx = (0usize, 0usize);
    let mut best_ratio = f64::INFINITY;
    let mut best_ratio_idx = (0usize, 0usize);
    for i in 0..grid {
        let d1 = d_at(i);
        for j in 0..grid {
            let d2 = d_at(j);
            let (emin, emax) = scaled_eigs(d1, d2);
            if emin <= 0.0 {
                continue;
            }
            let kappa = emax / emin;
            if kappa < best_kappa {
                best_kappa = kappa;
                best_kappa_idx = (i, j);
            }
            let r = (1.0 - emin).powi(2).max((1.0 - emax).powi(2));
            if r < best_ratio {
                best_ratio = r;
                best_ratio_idx = (i, j);
            }
        }
    }
    // both objectives fix the same ray; compare the log-ratio coordinates
    let ratio_cells = ((best_kappa_idx.1 as f64 - best_kappa_idx.0 as f64)
        - (best_ratio_idx.1 as f64 - best_ratio_idx.0 as f64))
        .abs();
    Ok(MinimaxCheck {
        sdp_argmin: (d_at(best_kappa_idx.0), d_at(best_kappa_idx.1)),
        minimax_argmin: (d_at(best_ratio_idx.0), d_at(best_ratio_idx.1)),
        ratio_distance_cells: ratio_cells,
        kappa_at_sdp: best_kappa,
        worst_ratio_at_minimax: best_ratio,
        grid,
    })
}

/// Key-value report the `precond` CLI subcommand prints.
#[derive(Debug, Clone)]
pub struct HindsightReport {
    pub kappa: f64,
    pub kappa_star_ub: f64,
    pub diag_precond: Vec<f64>,
    pub feasibility_margin: f64,
    /// max_i |1 - m_i| for the reported candidate, and 1/(1 - omega).
    pub omega_star: f64,
    pub lambda_star: f64,
    pub score_mask: Vec<(usize, usize)>,
    pub score_converged: bool,
}

/// Full hindsight analysis of one SPD matrix.
pub fn hindsight_report(a: &DenseMatrix, mask_size: usize) -> Result<HindsightReport, PrecondError> {
    let eig = sym_eigen(a);
    let kappa = eig.values[a.rows - 1] / eig.values[0];
    if eig.values[0] <= 0.0 {
        return Err(PrecondError::NotSpd);
    }
    let diag = approx_optimal_diagonal(a)?;
    let (min, max) = diag_scaled_extremes(a, &diag.d)?;
    let omega_star = (1.0 - min).abs().max((1.0 - max).abs());
    let lambda_star = if omega_star < 1.0 { 1.0 / (1.0 - omega_star) } else { f64::INFINITY };
    let score = pattern_score(a, mask_size)?;
    Ok(HindsightReport {
        kappa,
        kappa_star_ub: diag.kappa_star_ub,
        diag_precond: diag.d,
        feasibility_margin: diag.feasibility_margin,
        omega_star,
        lambda_star,
        score_mask: score.mask,
        score_converged: score.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_examples() {
        let a = DenseMatrix::diag(&[1.0, 4.0]);
        assert!((kappa_of_diagonal(&a, &[1.0, 0.25]).unwrap() - 1.0).abs() < 1e-12);
        assert!((kappa_of_diagonal(&a, &[1.0, 1.0]).unwrap() - 4.0).abs() < 1e-12);
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((kappa_of(&a, &DenseMatrix::identity(2)).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn kappa_is_scale_invariant() {
        let a = crate::dataio::gen_least_squares(6, 1e-2, 11);
        let a = a.a().clone();
        let d = vec![0.3, 1.0, 2.0, 0.7, 0.1, 5.0];
        let k1 = kappa_of_diagonal(&a, &d).unwrap();
        for c in [1e-3, 0.5, 7.0, 1e3] {
            let scaled: Vec<f64> = d.iter().map(|v| c * v).collect();
            let k2 = kappa_of_diagonal(&a, &scaled).unwrap();
            assert!((k1 - k2).abs() <= 1e-10 * k1);
        }
    }

    #[test]
    fn kappa_rejects_non_spd() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(kappa_of(&a, &DenseMatrix::identity(2)).is_err());
        let spd = DenseMatrix::diag(&[1.0, 2.0]);
        assert!(kappa_of_diagonal(&spd, &[1.0, -1.0]).is_err());
    }

    #[test]
    fn diagonal_matrix_gets_exact_inverse() {
        let a = DenseMatrix::diag(&[2.0, 5.0, 0.5]);
        let out = approx_optimal_diagonal(&a).unwrap();
        assert!((out.kappa_star_ub - 1.0).abs() < 1e-9);
        for (di, aii) in out.d.iter().zip([2.0, 5.0, 0.5]) {
            assert!((di - 1.0 / aii).abs() < 1e-9 * (1.0 + 1.0 / aii));
        }
        assert!(out.feasibility_margin >= -1e-9);

        let id = DenseMatrix::identity(4);
        let out = approx_optimal_diagonal(&id).unwrap();
        assert!((out.kappa_star_ub - 1.0).abs() < 1e-9);
    }

    #[test]
    fn off_diagonal_2x2_matches_grid_oracle() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let out = approx_optimal_diagonal(&a).unwrap();
        // brute-force oracle over the d1/d2 ratio confirms 3 is optimal
        let mut oracle_best = f64::INFINITY;
        for i in 0..2000 {
            let t = 10f64.powf(-2.0 + 4.0 * i as f64 / 1999.0);
            oracle_best = oracle_best.min(kappa_of_diagonal(&a, &[1.0, t]).unwrap());
        }
        assert!((oracle_best - 3.0).abs() < 1e-6);
        assert!(out.kappa_star_ub >= oracle_best * (1.0 - 1e-9));
        assert!((out.kappa_star_ub - 3.0).abs() < 1e-6);
        assert!((out.d[0] - out.d[1]).abs() < 1e-6 * out.d[0]);
    }

    #[test]
    fn search_never_loses_to_jacobi_or_identity() {
        for seed in 0..5u64 {
            let inst = crate::dataio::gen_least_squares(12, 1e-3, seed);
            let a = inst.a().clone();
            let out = approx_optimal_diagonal(&a).unwrap();
            let jacobi: Vec<f64> = (0..12).map(|i| 1.0 / a[(i, i)]).collect();
            let kappa_jacobi = kappa_of_diagonal(&a, &jacobi).unwrap();
            let eig = sym_eigen(&a);
            let kappa = eig.values[11] / eig.values[0];
            assert!(out.kappa_star_ub <= kappa_jacobi + 1e-9 + 1e-9 * kappa_jacobi);
            assert!(out.kappa_star_ub <= kappa * (1.0 + 1e-9));
            assert!(out.feasibility_margin >= -1e-9);
        }
    }

    #[test]
    fn pattern_score_axis_aligned() {
        let a = DenseMatrix::diag(&[1.0, 4.0]);
        let out = pattern_score(&a, 2).unwrap();
        assert!(out.converged);
        assert!((out.score[(0, 0)] - 1.0).abs() < 1e-8);
        assert!((out.score[(1, 1)] - 1.0).abs() < 1e-8);
        assert!(out.score[(0, 1)].abs() < 1e-8);
        assert_eq!(out.mask, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn pattern_score_mask_sizes() {
        let a = DenseMatrix::identity(3);
        // degenerate spectrum: mask is still the requested size and
        // deterministic
        let out1 = pattern_score(&a, 9).unwrap();
        assert_eq!(out1.mask.len(), 9);
        let out2 = pattern_score(&a, 9).unwrap();
        assert_eq!(out1.mask, out2.mask);
        assert_eq!(pattern_score(&a, 100).unwrap().mask.len(), 9);
    }

    #[test]
    fn minimax_examples() {
        let a = DenseMatrix::diag(&[1.0, 4.0]);
        let out = minimax_check_2x2(&a).unwrap();
        assert!(out.ratio_distance_cells <= 2.0);
        let ratio = out.sdp_argmin.1 / out.sdp_argmin.0;
        assert!((ratio - 0.25).abs() < 0.02, "ratio {ratio}");

        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let out = minimax_check_2x2(&a).unwrap();
        assert!(out.ratio_distance_cells <= 2.0);
        let ratio = out.minimax_argmin.1 / out.minimax_argmin.0;
        assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");

        let id = DenseMatrix::identity(2);
        let out = minimax_check_2x2(&id).unwrap();
        assert!((out.kappa_at_sdp - 1.0).abs() < 1e-9);
        assert!(out.ratio_distance_cells <= 2.0);
    }

    #[test]
    fn minimax_agreement_on_random_instances() {
        let mut rng = crate::dataio::Rng::new(40);
        for _ in 0..50 {
            // random SPD 2x2: B^T B + small ridge
            let b = DenseMatrix::from_rows(&[
                vec![rng.gaussian(), rng.gaussian()],
                vec![rng.gaussian(), rng.gaussian()],
            ]);
            let mut a = b.gram();
            a[(0, 0)] += 0.1;
            a[(1, 1)] += 0.1;
            let out = minimax_check_2x2(&a).unwrap();
            assert!(
                out.ratio_distance_cells <= 2.0,
                "distance {} on {:?}",
                out.ratio_distance_cells,
                a.data
            );
        }
    }
}
