//! MINRES with nonpositive-curvature detection.
//!
//! Solves `min ‖Hs + g‖` over the growing Krylov subspaces `K_t(H, g)` for a
//! symmetric, possibly indefinite operator `H`, available only through
//! matrix-vector products. Two tests run at every iteration, both computed from
//! scalar recurrences with no extra operator applications:
//!
//! * curvature: `⟨r_{t−1}, H r_{t−1}⟩ = −c_{t−1} γ_t ‖r_{t−1}‖² ≤ ϑ ‖r_{t−1}‖²`
//!   returns the residual `r_{t−1}` as a nonpositive-curvature (NPC) direction;
//! * inexactness: `‖H r_{t−1}‖ = φ_{t−1} √(γ_t² + δ_{t+1}²) ≤ η ‖H s_{t−1}‖`
//!   with `‖H s_{t−1}‖ = √(φ₀² − φ_{t−1}²)` returns the iterate `s_{t−1}` (SOL).
//!
//! The curvature test is checked first. The direction update uses
//! `w_t = (v_t − δ_t⁽²⁾ w_{t−1} − ε_t w_{t−2}) / γ_t⁽²⁾`, read off `W_t R_t = V_t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, Matrix};

/// A symmetric linear operator accessed through products.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[f64]) -> Vec<f64>;
}

impl LinearOperator for Matrix {
    fn dim(&self) -> usize {
        self.rows()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matvec(v)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        (**self).apply(v)
    }
}

/// Operator backed by a closure.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64>> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64>> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        (self.f)(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinresConfig {
    /// Inexactness tolerance η > 0.
    pub eta: f64,
    /// NPC tolerance ϑ ≥ 0.
    pub vartheta: f64,
    /// Iteration cap; `None` means subproblem dimension + 5.
    pub max_iters: Option<usize>,
    /// Lanczos breakdown threshold, relative to ‖g‖.
    pub breakdown_tol: f64,
}

impl Default for MinresConfig {
    fn default() -> Self {
        Self {
            eta: 1e-2,
            vartheta: 0.0,
            max_iters: None,
            breakdown_tol: 1e-13,
        }
    }
}

impl MinresConfig {
    pub fn new(eta: f64, vartheta: f64) -> Self {
        Self {
            eta,
            vartheta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "eta must be > 0, got {}",
                self.eta
            )));
        }
        if !(self.vartheta >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "vartheta must be >= 0, got {}",
                self.vartheta
            )));
        }
        if self.max_iters == Some(0) {
            return Err(Error::InvalidInput("max_iters must be >= 1".into()));
        }
        if !(self.breakdown_tol >= 0.0) {
            return Err(Error::InvalidInput("breakdown_tol must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DirectionType {
    /// Inexact Newton direction `s`.
    Sol,
    /// Nonpositive-curvature direction `r`.
    Npc,
    /// `‖g‖` vanished or underflowed; the direction is zero.
    ZeroCurvature,
    /// Iteration cap hit before either test fired; direction is the current `s`.
    MaxIters,
}

/// Scalars evaluated at the test point of one iteration `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinresDiagnostics {
    /// `φ_{t−1} = ‖r_{t−1}‖`
    pub residual_norm: f64,
    /// `−c_{t−1} γ_t = ⟨r, Hr⟩ / ‖r‖²`
    pub curvature: f64,
    /// `φ_{t−1} √(γ_t² + δ_{t+1}²) = ‖H r_{t−1}‖`
    pub normal_residual: f64,
    /// `√(φ₀² − φ_{t−1}²) = ‖H s_{t−1}‖`
    pub hs_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinresOutcome {
    pub direction: Vec<f64>,
    pub dtype: DirectionType,
    /// Operator applications performed.
    pub iterations: usize,
    pub diagnostics: Vec<MinresDiagnostics>,
    /// `‖r‖` for the returned iterate (for NPC, the norm of the direction itself).
    pub residual_norm: f64,
}

/// State visible at the test point of iteration `t`, before either test runs.
pub(crate) struct TestPoint<'a> {
    pub t: usize,
    pub r: &'a [f64],
    pub s: &'a [f64],
    pub diag: MinresDiagnostics,
}

/// Run MINRES on `H s ≈ −g`.
pub fn minres_solve<Op: LinearOperator + ?Sized>(
    op: &Op,
    g: &[f64],
    config: &MinresConfig,
) -> Result<MinresOutcome> {
    run(op, g, config, |_| {})
}

pub(crate) fn run<Op, Obs>(
    op: &Op,
    g: &[f64],
    config: &MinresConfig,
    mut observe: Obs,
) -> Result<MinresOutcome>
where
    Op: LinearOperator + ?Sized,
    Obs: FnMut(&TestPoint<'_>),
{
    config.validate()?;
    let n = g.len();
    if op.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: n,
        });
    }
    let phi0 = norm(g);
    if !phi0.is_finite() {
        return Err(Error::NumericalFailure("non-finite right-hand side".into()));
    }
    if phi0 == 0.0 || !phi0.is_normal() {
        return Ok(MinresOutcome {
            direction: vec![0.0; n],
            dtype: DirectionType::ZeroCurvature,
            iterations: 0,
            diagnostics: Vec::new(),
            residual_norm: phi0,
        });
    }

    let max_iters = config.max_iters.unwrap_or(n + 5);
    let tiny = config.breakdown_tol * phi0;

    let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut v: Vec<f64> = r.iter().map(|x| x / phi0).collect();
    let mut v_prev = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut w = vec![0.0; n]; // w_{t−1}
    let mut w_prev = vec![0.0; n]; // w_{t−2}

    let (mut c, mut sn) = (-1.0_f64, 0.0_f64);
    let mut delta = 0.0_f64; // δ_t
    let mut eps = 0.0_f64; // ε_t
    let mut beta = phi0; // β̃_t
    let mut phi = phi0; // φ_{t−1}
    let mut diagnostics = Vec::new();

    let outcome = |direction: Vec<f64>, dtype, iterations, diagnostics, residual_norm| {
        Ok(MinresOutcome {
            direction,
            dtype,
            iterations,
            diagnostics,
            residual_norm,
        })
    };

    for t in 1.. {
        if t > max_iters {
            return outcome(s, DirectionType::MaxIters, t - 1, diagnostics, phi);
        }

        // Lanczos step.
        let mut q = op.apply(&v);
        if q.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: q.len(),
            });
        }
        axpy(-beta, &v_prev, &mut q);
        let alpha = dot(&v, &q);
        axpy(-alpha, &v, &mut q);
        let beta_next = norm(&q);
        if !alpha.is_finite() || !beta_next.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "non-finite Lanczos scalars at iteration {t}"
            )));
        }

        // Apply the previous reflection to the new column of the tridiagonal.
        let delta2 = c * delta + sn * alpha; // δ_t⁽²⁾
        let eps_next = sn * beta_next; // ε_{t+1}
        let gamma = sn * delta - c * alpha; // γ_t
        let delta_next = -c * beta_next; // δ_{t+1}
        let gamma2 = gamma.hypot(beta_next); // γ_t⁽²⁾

        // A vanishing column means v_t is (numerically) a null direction.
        let curvature = if gamma2 <= tiny { 0.0 } else { -c * gamma };
        let diag = MinresDiagnostics {
            residual_norm: phi,
            curvature,
            normal_residual: phi * gamma.hypot(delta_next),
            hs_norm: (phi0 * phi0 - phi * phi).max(0.0).sqrt(),
        };
        diagnostics.push(diag);
        observe(&TestPoint {
            t,
            r: &r,
            s: &s,
            diag,
        });

        if curvature <= config.vartheta {
            return outcome(r, DirectionType::Npc, t, diagnostics, phi);
        }
        if diag.normal_residual <= config.eta * diag.hs_norm {
            return outcome(s, DirectionType::Sol, t, diagnostics, phi);
        }

        // gamma2 > tiny here, otherwise the curvature test would have fired.
        let c_new = gamma / gamma2;
        let sn_new = beta_next / gamma2;
        let tau = c_new * phi;
        let phi_new = sn_new * phi;

        let mut w_new = v.clone();
        axpy(-delta2, &w, &mut w_new);
        axpy(-eps, &w_prev, &mut w_new);
        w_new.iter_mut().for_each(|x| *x /= gamma2);
        axpy(tau, &w_new, &mut s);
        w_prev = std::mem::replace(&mut w, w_new);

        if beta_next <= tiny {
            // Krylov subspace is invariant: s_t solves the least-squares problem.
            return outcome(s, DirectionType::Sol, t, diagnostics, phi_new);
        }

        q.iter_mut().for_each(|x| *x /= beta_next);
        let v_next = q;
        // r_t = s_t² r_{t−1} − φ_t c_t v_{t+1}
        r.iter_mut().for_each(|x| *x *= sn_new * sn_new);
        axpy(-phi_new * c_new, &v_next, &mut r);

        if !phi_new.is_finite() || !s.iter().all(|x| x.is_finite()) {
            return Err(Error::NumericalFailure(format!(
                "non-finite MINRES iterate at iteration {t}"
            )));
        }

        v_prev = std::mem::replace(&mut v, v_next);
        beta = beta_next;
        delta = delta_next;
        eps = eps_next;
        c = c_new;
        sn = sn_new;
        phi = phi_new;
    }
    unreachable!("loop exits through returns")
}

/// Re-run MINRES while materialising `r_{t−1} = −g − H s_{t−1}` explicitly at
/// every test point, and return the worst discrepancy among
///
/// * `‖r_{t−1}‖ = φ_{t−1}` (and the recursive residual against the explicit one),
/// * `⟨r_{t−1}, H r_{t−1}⟩ = −c_{t−1} γ_t ‖r_{t−1}‖²`,
/// * `‖H s_{t−1}‖ = √(φ₀² − φ_{t−1}²)`,
/// * `‖H r_{t−1}‖ = φ_{t−1} √(γ_t² + δ_{t+1}²)`.
///
/// Discrepancies are scaled by their natural bounds: `φ₀` for residual and
/// `Hs` norms, `‖H‖φ₀` for `‖Hr‖`, and `‖H‖φ₀²` for the curvature, with `‖H‖`
/// estimated from the largest product seen.
pub fn verify_scalar_identities<Op: LinearOperator + ?Sized>(
    op: &Op,
    g: &[f64],
    config: &MinresConfig,
) -> Result<f64> {
    let phi0 = norm(g);
    let mut worst = 0.0_f64;
    let mut h_scale = 0.0_f64;
    run(op, g, config, |tp| {
        let hs = op.apply(tp.s);
        let r_exp: Vec<f64> = g.iter().zip(&hs).map(|(gi, hi)| -gi - hi).collect();
        let hr = op.apply(&r_exp);
        let hg = op.apply(g);
        h_scale = h_scale.max(norm(&hr) / norm(&r_exp).max(f64::MIN_POSITIVE));
        h_scale = h_scale.max(norm(&hg) / phi0);
        let h_ref = h_scale.max(f64::MIN_POSITIVE);

        let r_norm = norm(&r_exp);
        let rec_gap = norm(&crate::linalg::sub(tp.r, &r_exp));
        let checks = [
            (r_norm - tp.diag.residual_norm).abs() / phi0,
            rec_gap / phi0,
            (dot(&r_exp, &hr) - tp.diag.curvature * r_norm * r_norm).abs() / (h_ref * phi0 * phi0),
            (norm(&hs) - tp.diag.hs_norm).abs() / phi0,
            (norm(&hr) - tp.diag.normal_residual).abs() / (h_ref * phi0),
        ];
        for c in checks {
            worst = worst.max(c);
        }
        let _ = tp.t;
    })?;
    Ok(worst)
}
