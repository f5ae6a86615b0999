//! Central finite-difference oracles used by the verification suites.

use crate::problems::Objective;

/// Central-difference gradient of an objective.
pub fn fd_gradient(obj: &dyn Objective, x: &[f64], eps: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = eps * (1.0 + x[i].abs());
        xp[i] = x[i] + h;
        let fp = obj.value(&xp);
        xp[i] = x[i] - h;
        let fm = obj.value(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Central-difference gradient of a scalar function over coefficient space.
pub fn fd_coeff_gradient<F>(mut f: F, coeffs: &[f64], eps: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut g = vec![0.0; coeffs.len()];
    let mut c = coeffs.to_vec();
    for i in 0..coeffs.len() {
        let h = eps * (1.0 + coeffs[i].abs());
        c[i] = coeffs[i] + h;
        let fp = f(&c);
        c[i] = coeffs[i] - h;
        let fm = f(&c);
        c[i] = coeffs[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}
