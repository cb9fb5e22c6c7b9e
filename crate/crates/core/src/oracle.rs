//! The problem-oracle interface used by every solver.
//!
//! An [`Objective`] supplies `f`, `∇f` and Hessian-vector products over ℝᵈ.
//! Solvers never call an objective directly; they go through a
//! [`CountedOracle`], which tallies every call so that runs can be compared in
//! equivalent function evaluations.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

/// A twice-differentiable objective over ℝᵈ, accessed only through first- and
/// second-order oracles.
///
/// `hessian_vec(x, ·)` must be linear and symmetric.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn hessian_vec(&self, x: &[f64], v: &[f64]) -> Vec<f64>;
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
    fn hessian_vec(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        (**self).hessian_vec(x, v)
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
    fn hessian_vec(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        (**self).hessian_vec(x, v)
    }
}

/// Unit costs of the three oracles, in equivalent function evaluations.
///
/// The default `(1, 2, 4)` counts a gradient as one extra pass over a function
/// evaluation and a Hessian-vector product as two extra passes over a gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleWeights {
    pub function: f64,
    pub gradient: f64,
    pub hessian_vec: f64,
}

impl Default for OracleWeights {
    fn default() -> Self {
        Self {
            function: 1.0,
            gradient: 2.0,
            hessian_vec: 4.0,
        }
    }
}

/// Snapshot of oracle call counts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OracleCounters {
    pub n_f: u64,
    pub n_g: u64,
    pub n_hvp: u64,
    pub weights: OracleWeights,
}

impl OracleCounters {
    /// `w_f·n_f + w_g·n_g + w_hvp·n_hvp`
    pub fn weighted_total(&self) -> f64 {
        self.weights.function * self.n_f as f64
            + self.weights.gradient * self.n_g as f64
            + self.weights.hessian_vec * self.n_hvp as f64
    }

    /// Calls made since an earlier snapshot of the same oracle.
    pub fn since(&self, start: &OracleCounters) -> OracleCounters {
        OracleCounters {
            n_f: self.n_f - start.n_f,
            n_g: self.n_g - start.n_g,
            n_hvp: self.n_hvp - start.n_hvp,
            weights: self.weights,
        }
    }
}

/// Wraps an objective and counts every oracle call.
///
/// Returned values are exactly those of the inner objective.
#[derive(Debug)]
pub struct CountedOracle<O> {
    inner: O,
    weights: OracleWeights,
    n_f: AtomicU64,
    n_g: AtomicU64,
    n_hvp: AtomicU64,
}

impl<O: Objective> CountedOracle<O> {
    pub fn new(inner: O) -> Self {
        Self::with_weights(inner, OracleWeights::default())
    }

    /// # Panics
    /// If any weight is not strictly positive.
    pub fn with_weights(inner: O, weights: OracleWeights) -> Self {
        assert!(
            weights.function > 0.0 && weights.gradient > 0.0 && weights.hessian_vec > 0.0,
            "oracle weights must be positive"
        );
        Self {
            inner,
            weights,
            n_f: AtomicU64::new(0),
            n_g: AtomicU64::new(0),
            n_hvp: AtomicU64::new(0),
        }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn into_inner(self) -> O {
        self.inner
    }

    pub fn counters(&self) -> OracleCounters {
        OracleCounters {
            n_f: self.n_f.load(Ordering::Relaxed),
            n_g: self.n_g.load(Ordering::Relaxed),
            n_hvp: self.n_hvp.load(Ordering::Relaxed),
            weights: self.weights,
        }
    }

    pub fn weighted_total(&self) -> f64 {
        self.counters().weighted_total()
    }

    pub fn reset(&self) {
        self.n_f.store(0, Ordering::Relaxed);
        self.n_g.store(0, Ordering::Relaxed);
        self.n_hvp.store(0, Ordering::Relaxed);
    }
}

impl<O: Objective> Objective for CountedOracle<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.n_f.fetch_add(1, Ordering::Relaxed);
        self.inner.value(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.n_g.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(x)
    }

    fn hessian_vec(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        self.n_hvp.fetch_add(1, Ordering::Relaxed);
        self.inner.hessian_vec(x, v)
    }
}

/// An objective assembled from closures; handy for tests and one-off problems.
pub struct FnObjective<F, G, H> {
    dim: usize,
    f: F,
    g: G,
    h: H,
}

impl<F, G, H> FnObjective<F, G, H>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
    H: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim: usize, f: F, g: G, h: H) -> Self {
        Self { dim, f, g, h }
    }
}

impl<F, G, H> Objective for FnObjective<F, G, H>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
    H: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.g)(x)
    }
    fn hessian_vec(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        (self.h)(x, v)
    }
}
