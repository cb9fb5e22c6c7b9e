use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::oracle::Objective;

/// Multinomial (softmax) regression with the last class as reference.
///
/// Labels are 0-based, `0 ≤ b_i < C`. The decision variable stacks the
/// weight vectors of classes `0..C−1` (each of length `p`, the feature count
/// including the optional bias column) as `x[c·p + j]`; class `C−1` has
/// weights fixed at zero. The objective is the mean cross-entropy
///
/// ```text
/// f(x) = (1/n) Σ_i [ log Σ_c exp⟨x_c, a_i⟩ − ⟨x_{b_i}, a_i⟩ ]
/// ```
///
/// so `C = 2` is binary logistic regression. Convex.
#[derive(Debug, Clone)]
pub struct MultinomialProblem {
    features: Matrix,
    labels: Vec<usize>,
    classes: usize,
    has_bias: bool,
}

/// Builds the objective. With `include_bias` a constant-one column is
/// appended to the features; it is the last coordinate of each class block.
pub fn make_multinomial(
    features: &Matrix,
    labels: &[usize],
    classes: usize,
    include_bias: bool,
) -> Result<MultinomialProblem> {
    let n = features.rows();
    if n == 0 {
        return Err(Error::InvalidInput(
            "at least one sample is required".into(),
        ));
    }
    if classes < 2 {
        return Err(Error::InvalidInput(format!(
            "classes must be >= 2, got {classes}"
        )));
    }
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: labels.len(),
        });
    }
    if let Some((sample, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= classes) {
        return Err(Error::LabelOutOfRange {
            sample,
            label,
            classes,
        });
    }
    let features = if include_bias {
        let p = features.cols();
        Matrix::from_fn(n, p + 1, |i, j| if j < p { features[(i, j)] } else { 1.0 })
    } else {
        features.clone()
    };
    if features.cols() == 0 {
        return Err(Error::InvalidInput(
            "at least one feature is required".into(),
        ));
    }
    Ok(MultinomialProblem {
        features,
        labels: labels.to_vec(),
        classes,
        has_bias: include_bias,
    })
}

impl MultinomialProblem {
    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Features per class block, bias included.
    pub fn block_len(&self) -> usize {
        self.features.cols()
    }

    /// `true` at every bias coordinate; used to exempt biases from an ℓ1 penalty.
    pub fn bias_mask(&self) -> Vec<bool> {
        let p = self.block_len();
        (0..self.dim())
            .map(|k| self.has_bias && k % p == p - 1)
            .collect()
    }

    fn weights(&self, x: &[f64]) -> Matrix {
        Matrix::from_row_major(self.classes - 1, self.block_len(), x.to_vec())
            .expect("dimension checked by caller")
    }

    /// Logits `⟨x_c, a_i⟩` for the free classes: n × (C−1).
    fn logits(&self, x: &[f64]) -> Matrix {
        self.features.matmul_bt(&self.weights(x))
    }

    /// Softmax probabilities of the free classes (n × (C−1)) and the per-sample
    /// log-partition.
    fn probabilities(&self, z: &Matrix) -> (Matrix, Vec<f64>) {
        let n = z.rows();
        let k = z.cols();
        let mut probs = Matrix::zeros(n, k);
        let mut lse = vec![0.0; n];
        for i in 0..n {
            let row = z.row(i);
            let m = row.iter().copied().fold(0.0_f64, f64::max);
            let mut total = (-m).exp();
            for &v in row {
                total += (v - m).exp();
            }
            lse[i] = m + total.ln();
            for (c, &v) in row.iter().enumerate() {
                probs[(i, c)] = (v - lse[i]).exp();
            }
        }
        (probs, lse)
    }
}

impl Objective for MultinomialProblem {
    fn dim(&self) -> usize {
        (self.classes - 1) * self.block_len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let z = self.logits(x);
        let (_, lse) = self.probabilities(&z);
        let n = self.features.rows();
        let total: f64 = (0..n)
            .map(|i| {
                let b = self.labels[i];
                let zb = if b + 1 == self.classes {
                    0.0
                } else {
                    z[(i, b)]
                };
                lse[i] - zb
            })
            .sum();
        total / n as f64
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let z = self.logits(x);
        let (mut resid, _) = self.probabilities(&z);
        let n = self.features.rows();
        for i in 0..n {
            let b = self.labels[i];
            if b + 1 < self.classes {
                resid[(i, b)] -= 1.0;
            }
        }
        let mut g = resid.tmatmul(&self.features).into_vec();
        let inv_n = 1.0 / n as f64;
        g.iter_mut().for_each(|v| *v *= inv_n);
        g
    }

    /// Exact Hessian: per sample `(diag(π) − ππᵀ) ⊗ a_i a_iᵀ` on the free classes.
    fn hessian_vec(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let z = self.logits(x);
        let (probs, _) = self.probabilities(&z);
        let zv = self.features.matmul_bt(&self.weights(v));
        let n = self.features.rows();
        let k = self.classes - 1;
        let mut u = Matrix::zeros(n, k);
        for i in 0..n {
            let mean: f64 = (0..k).map(|c| probs[(i, c)] * zv[(i, c)]).sum();
            for c in 0..k {
                u[(i, c)] = probs[(i, c)] * (zv[(i, c)] - mean);
            }
        }
        let mut hv = u.tmatmul(&self.features).into_vec();
        let inv_n = 1.0 / n as f64;
        hv.iter_mut().for_each(|v| *v *= inv_n);
        hv
    }
}
