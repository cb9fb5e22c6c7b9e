use crate::error::{Error, Result};
use crate::oracle::Objective;

/// Smooth reformulation of `min f(x) + λ‖x‖₁` over `z = [x₊, x₋] ≥ 0`:
///
/// ```text
/// F(z) = f(x₊ − x₋) + λ Σ_{i penalized} (x₊ⁱ + x₋ⁱ)
/// ```
///
/// Coordinates flagged in `exempt` (bias terms, typically) carry no penalty.
#[derive(Debug, Clone)]
pub struct L1Reformulation<O> {
    inner: O,
    lambda: f64,
    exempt: Vec<bool>,
}

/// Wraps `inner` (dimension `d`) into the `2d`-dimensional reformulation.
/// `exempt[i] = true` removes coordinate `i` from the penalty; an empty
/// slice penalizes everything.
pub fn l1_reformulate<O: Objective>(
    inner: O,
    lambda: f64,
    exempt: &[bool],
) -> Result<L1Reformulation<O>> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    let d = inner.dim();
    let exempt = if exempt.is_empty() {
        vec![false; d]
    } else if exempt.len() == d {
        exempt.to_vec()
    } else {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: exempt.len(),
        });
    };
    Ok(L1Reformulation {
        inner,
        lambda,
        exempt,
    })
}

impl<O: Objective> L1Reformulation<O> {
    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn exempt(&self) -> &[bool] {
        &self.exempt
    }

    /// `x = x₊ − x₋`.
    pub fn recover(&self, z: &[f64]) -> Vec<f64> {
        let d = self.inner.dim();
        (0..d).map(|i| z[i] - z[d + i]).collect()
    }

    fn weight(&self, i: usize) -> f64 {
        if self.exempt[i] {
            0.0
        } else {
            self.lambda
        }
    }

    /// `f(x) + λ‖x‖₁` over the penalized coordinates.
    pub fn l1_objective(&self, x: &[f64]) -> f64 {
        let pen: f64 = x
            .iter()
            .enumerate()
            .map(|(i, v)| self.weight(i) * v.abs())
            .sum();
        self.inner.value(x) + pen
    }

    /// Largest violation of the Clarke conditions of the nonsmooth problem
    /// at `x`, given `g = ∇f(x)`. Coordinates with `|xⁱ| ≤ zero_tol` count as
    /// zero, where `|gⁱ| ≤ λ` is required; elsewhere `gⁱ = −λ·sign(xⁱ)`.
    pub fn clarke_violation(&self, x: &[f64], g: &[f64], zero_tol: f64) -> f64 {
        x.iter()
            .zip(g)
            .enumerate()
            .map(|(i, (&xi, &gi))| {
                let w = self.weight(i);
                if xi.abs() <= zero_tol {
                    (gi.abs() - w).max(0.0)
                } else {
                    (gi + w * xi.signum()).abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

impl<O: Objective> Objective for L1Reformulation<O> {
    fn dim(&self) -> usize {
        2 * self.inner.dim()
    }

    fn value(&self, z: &[f64]) -> f64 {
        let d = self.inner.dim();
        let pen: f64 = (0..d).map(|i| self.weight(i) * (z[i] + z[d + i])).sum();
        self.inner.value(&self.recover(z)) + pen
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let d = self.inner.dim();
        let g = self.inner.gradient(&self.recover(z));
        let mut out = vec![0.0; 2 * d];
        for i in 0..d {
            let w = self.weight(i);
            out[i] = g[i] + w;
            out[d + i] = -g[i] + w;
        }
        out
    }

    /// One inner product: both blocks apply `∇²f(x)` to `v₊ − v₋`.
    fn hessian_vec(&self, z: &[f64], v: &[f64]) -> Vec<f64> {
        let d = self.inner.dim();
        let dv: Vec<f64> = (0..d).map(|i| v[i] - v[d + i]).collect();
        let hv = self.inner.hessian_vec(&self.recover(z), &dv);
        let mut out = Vec::with_capacity(2 * d);
        out.extend_from_slice(&hv);
        out.extend(hv.iter().map(|h| -h));
        out
    }
}
