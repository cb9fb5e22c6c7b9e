use crate::error::{Error, Result};
use crate::minres::LinearOperator;
use crate::oracle::Objective;
use crate::orthant::IndexPartition;

/// The principal submatrix `H^I` of the Hessian at `x` on the inactive
/// indices, applied matrix-free: zero-pad, one full Hessian-vector product,
/// restrict.
pub struct MaskedHessian<'a, O: ?Sized> {
    oracle: &'a O,
    x: &'a [f64],
    inactive: &'a [usize],
}

pub fn masked_hvp<'a, O: Objective + ?Sized>(
    oracle: &'a O,
    x: &'a [f64],
    partition: &'a IndexPartition,
) -> Result<MaskedHessian<'a, O>> {
    if partition.inactive.is_empty() {
        return Err(Error::EmptyInactiveSet);
    }
    if partition.dim() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: partition.dim(),
        });
    }
    Ok(MaskedHessian {
        oracle,
        x,
        inactive: &partition.inactive,
    })
}

impl<O: Objective + ?Sized> LinearOperator for MaskedHessian<'_, O> {
    fn dim(&self) -> usize {
        self.inactive.len()
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.x.len()];
        for (&i, &ui) in self.inactive.iter().zip(u) {
            full[i] = ui;
        }
        let hv = self.oracle.hessian_vec(self.x, &full);
        self.inactive.iter().map(|&i| hv[i]).collect()
    }
}
