//! Central finite-difference checks for analytic gradients and
//! Hessian-vector products.

use crate::oracle::Objective;

fn max_rel_err(estimate: &[f64], analytic: &[f64]) -> f64 {
    estimate
        .iter()
        .zip(analytic)
        .map(|(e, a)| (e - a).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// Largest componentwise error between `∇f(x)` and its central-difference
/// estimate, relative to `max(1, |∇f(x)ᵢ|)`.
pub fn fd_check_grad<O: Objective + ?Sized>(oracle: &O, x: &[f64], h: f64) -> f64 {
    assert!(h > 0.0, "step must be positive");
    let g = oracle.gradient(x);
    let mut xp = x.to_vec();
    let estimate: Vec<f64> = (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let fp = oracle.value(&xp);
            xp[i] = x[i] - h;
            let fm = oracle.value(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect();
    max_rel_err(&estimate, &g)
}

/// Compares `H(x)v` against `(∇f(x+hv) − ∇f(x−hv)) / 2h`.
pub fn fd_check_hvp<O: Objective + ?Sized>(oracle: &O, x: &[f64], v: &[f64], h: f64) -> f64 {
    assert!(h > 0.0, "step must be positive");
    let hv = oracle.hessian_vec(x, v);
    let xp: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let xm: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
    let gp = oracle.gradient(&xp);
    let gm = oracle.gradient(&xm);
    let estimate: Vec<f64> = gp
        .iter()
        .zip(&gm)
        .map(|(p, m)| (p - m) / (2.0 * h))
        .collect();
    max_rel_err(&estimate, &hv)
}
