//! Geometry of the nonnegative orthant: projection, δ-active/δ-inactive index
//! sets, and the approximate first-order optimality test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::oracle::Objective;

/// Euclidean projection onto `{x ≥ 0}`: clamps negative entries to zero.
pub fn project(x: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "cannot project non-finite entry x[{i}] = {}",
            x[i]
        )));
    }
    Ok(x.iter().map(|&v| v.max(0.0)).collect())
}

pub(crate) fn check_feasible(x: &[f64]) -> Result<()> {
    match x.iter().position(|&v| !(v >= 0.0)) {
        Some(index) => Err(Error::InfeasiblePoint {
            index,
            value: x[index],
        }),
        None => Ok(()),
    }
}

/// The δ-active set `{i : 0 ≤ xᵢ ≤ δ}` and δ-inactive set `{i : xᵢ > δ}`.
///
/// A coordinate sitting exactly at `δ` is active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexPartition {
    pub active: Vec<usize>,
    pub inactive: Vec<usize>,
    pub delta: f64,
}

impl IndexPartition {
    pub fn dim(&self) -> usize {
        self.active.len() + self.inactive.len()
    }

    /// Gather `v` restricted to the inactive indices.
    pub fn gather_inactive(&self, v: &[f64]) -> Vec<f64> {
        self.inactive.iter().map(|&i| v[i]).collect()
    }

    pub fn gather_active(&self, v: &[f64]) -> Vec<f64> {
        self.active.iter().map(|&i| v[i]).collect()
    }

    /// Scatter a subproblem vector into a zero vector of full dimension.
    pub fn scatter_inactive(&self, sub: &[f64], full_dim: usize) -> Vec<f64> {
        debug_assert_eq!(sub.len(), self.inactive.len());
        let mut out = vec![0.0; full_dim];
        for (&i, &v) in self.inactive.iter().zip(sub) {
            out[i] = v;
        }
        out
    }
}

/// Split `0..d` into δ-active and δ-inactive indices at `x`.
pub fn partition_indices(x: &[f64], delta: f64) -> Result<IndexPartition> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "delta must be >= 0, got {delta}"
        )));
    }
    check_feasible(x)?;
    let (mut active, mut inactive) = (Vec::new(), Vec::new());
    for (i, &v) in x.iter().enumerate() {
        if v <= delta {
            active.push(i);
        } else {
            inactive.push(i);
        }
    }
    Ok(IndexPartition {
        active,
        inactive,
        delta,
    })
}

/// The three approximate first-order optimality measures at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalityMeasures {
    /// `min_{i∈A} gᵢ`, or `None` when the active set is empty.
    pub min_g_active: Option<f64>,
    /// `‖diag(x_A) g_A‖`
    pub norm_diag_x_g_active: f64,
    /// `‖g_I‖`
    pub norm_g_inactive: f64,
}

impl OptimalityMeasures {
    pub fn compute(x: &[f64], g: &[f64], partition: &IndexPartition) -> Self {
        let min_g_active = partition
            .active
            .iter()
            .map(|&i| g[i])
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
        let norm_diag_x_g_active = partition
            .active
            .iter()
            .map(|&i| (x[i] * g[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm_g_inactive = norm(&partition.gather_inactive(g));
        Self {
            min_g_active,
            norm_diag_x_g_active,
            norm_g_inactive,
        }
    }
}

/// Outcome of the ε-FO test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsFoReport {
    pub satisfied: bool,
    /// `gᵢ ≥ −√ε` on the active set.
    pub cond_a: bool,
    /// `‖diag(x_A) g_A‖ ≤ ε`.
    pub cond_b: bool,
    /// `‖g_I‖ ≤ ε`.
    pub cond_c: bool,
    pub values: OptimalityMeasures,
    pub partition: IndexPartition,
}

/// Evaluate the ε-FO conditions from an already computed gradient, with the
/// sets taken at radius `delta` and the negativity threshold `−√ε`.
pub fn eps_fo_from_gradient(x: &[f64], g: &[f64], eps: f64, delta: f64) -> Result<EpsFoReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }
    if g.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: g.len(),
        });
    }
    let partition = partition_indices(x, delta)?;
    let values = OptimalityMeasures::compute(x, g, &partition);
    // Empty sets satisfy their conditions trivially.
    let cond_a = values.min_g_active.is_none_or(|m| m >= -eps.sqrt());
    let cond_b = values.norm_diag_x_g_active <= eps;
    let cond_c = values.norm_g_inactive <= eps;
    Ok(EpsFoReport {
        satisfied: cond_a && cond_b && cond_c,
        cond_a,
        cond_b,
        cond_c,
        values,
        partition,
    })
}

/// Check whether `x` is an ε-approximate first-order point, with the index sets
/// taken at radius `√ε`. Evaluates the gradient once.
pub fn check_eps_fo<O: Objective + ?Sized>(oracle: &O, x: &[f64], eps: f64) -> Result<EpsFoReport> {
    check_feasible(x)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }
    let g = oracle.gradient(x);
    eps_fo_from_gradient(x, &g, eps, eps.sqrt())
}
