use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::oracle::Objective;

use super::tscad::Tscad;

/// Floor on predicted row norms in the cosine loss.
pub const COSINE_ROW_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    /// `‖Y − WH‖²_F / (nm)`
    Euclidean,
    /// `(1/n) Σ_i (1 − cos∠(y_i, (WH)_i))`
    Cosine,
}

/// Nonnegative matrix factorization `Y ≈ WH` solved jointly in `(W, H)`.
///
/// The decision variable is `z = [vec(W), vec(H)]`, both row-major, with
/// `W: n×r` and `H: r×m`, so `d = r(n + m)`. An optional TSCAD penalty is
/// added to every entry of `W` and `H`.
///
/// The cosine loss replaces `‖(WH)_i‖` by `√(‖(WH)_i‖² + 1e-24)` so that it
/// stays smooth at zero predicted rows. Zero rows of `Y` contribute the
/// constant 1.
#[derive(Debug, Clone)]
pub struct NnmfProblem {
    y: Matrix,
    /// Row-normalized `Y` (cosine only).
    y_unit: Matrix,
    rank: usize,
    distance: Distance,
    regularizer: Option<Tscad>,
}

pub fn make_nnmf(
    y: Matrix,
    rank: usize,
    distance: Distance,
    regularizer: Option<Tscad>,
) -> Result<NnmfProblem> {
    if rank == 0 {
        return Err(Error::InvalidInput("rank must be >= 1".into()));
    }
    if y.rows() == 0 || y.cols() == 0 {
        return Err(Error::InvalidInput("Y must be non-empty".into()));
    }
    if let Some(v) = y.as_slice().iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput(format!(
            "Y must be finite and nonnegative, found {v}"
        )));
    }
    if let Some(t) = &regularizer {
        t.validate()?;
    }
    if rank > y.rows().min(y.cols()) {
        log::warn!(
            "rank {rank} exceeds min(n, m) = {}; the factorization is rank-deficient",
            y.rows().min(y.cols())
        );
    }
    let mut y_unit = y.clone();
    if distance == Distance::Cosine {
        for i in 0..y.rows() {
            let row = y_unit.row_mut(i);
            let nrm = dot(row, row).sqrt();
            if nrm > 0.0 {
                row.iter_mut().for_each(|v| *v /= nrm);
            }
        }
    }
    Ok(NnmfProblem {
        y,
        y_unit,
        rank,
        distance,
        regularizer,
    })
}

impl NnmfProblem {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &Matrix {
        &self.y
    }

    pub fn distance(&self) -> Distance {
        self.distance
    }

    /// `(W, H)` from the flattened variable.
    pub fn split(&self, z: &[f64]) -> (Matrix, Matrix) {
        let (n, m, r) = (self.y.rows(), self.y.cols(), self.rank);
        let w = Matrix::from_row_major(n, r, z[..n * r].to_vec()).expect("length checked");
        let h = Matrix::from_row_major(r, m, z[n * r..].to_vec()).expect("length checked");
        (w, h)
    }

    /// Flattens `(W, H)` into the decision variable.
    pub fn join(w: &Matrix, h: &Matrix) -> Vec<f64> {
        let mut z = Vec::with_capacity(w.as_slice().len() + h.as_slice().len());
        z.extend_from_slice(w.as_slice());
        z.extend_from_slice(h.as_slice());
        z
    }

    /// The distance term alone, without the penalty.
    pub fn distance_value(&self, z: &[f64]) -> f64 {
        let (w, h) = self.split(z);
        self.loss(&w.matmul(&h))
    }

    /// `(1/n) Σ_i ‖y_i/‖y_i‖ − p_i/‖p_i‖‖²`, rows of `Y` and `WH` nonzero.
    /// Equals twice the cosine loss.
    pub fn normalized_euclidean(&self, z: &[f64]) -> f64 {
        let (w, h) = self.split(z);
        let p = w.matmul(&h);
        let n = self.y.rows();
        let mut total = 0.0;
        for i in 0..n {
            let y = self.y.row(i);
            let pi = p.row(i);
            let ny = dot(y, y).sqrt();
            let np = dot(pi, pi).sqrt();
            total += y
                .iter()
                .zip(pi)
                .map(|(a, b)| (a / ny - b / np).powi(2))
                .sum::<f64>();
        }
        total / n as f64
    }

    fn loss(&self, p: &Matrix) -> f64 {
        let (n, m) = (self.y.rows(), self.y.cols());
        match self.distance {
            Distance::Euclidean => {
                let s: f64 = p
                    .as_slice()
                    .iter()
                    .zip(self.y.as_slice())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                s / (n * m) as f64
            }
            Distance::Cosine => {
                let mut total = 0.0;
                for i in 0..n {
                    let pi = p.row(i);
                    let nu = (dot(pi, pi) + COSINE_ROW_FLOOR * COSINE_ROW_FLOOR).sqrt();
                    total += 1.0 - dot(self.y_unit.row(i), pi) / nu;
                }
                total / n as f64
            }
        }
    }

    /// `∂D/∂P` at `P = WH`.
    fn loss_gradient(&self, p: &Matrix) -> Matrix {
        let (n, m) = (self.y.rows(), self.y.cols());
        match self.distance {
            Distance::Euclidean => {
                let c = 2.0 / (n * m) as f64;
                Matrix::from_fn(n, m, |i, j| c * (p[(i, j)] - self.y[(i, j)]))
            }
            Distance::Cosine => {
                let mut g = Matrix::zeros(n, m);
                for i in 0..n {
                    let pi = p.row(i);
                    let yi = self.y_unit.row(i);
                    let nu = (dot(pi, pi) + COSINE_ROW_FLOOR * COSINE_ROW_FLOOR).sqrt();
                    let s = dot(yi, pi);
                    let nu3 = nu * nu * nu;
                    for (j, gij) in g.row_mut(i).iter_mut().enumerate() {
                        *gij = (-yi[j] / nu + s * pi[j] / nu3) / n as f64;
                    }
                }
                g
            }
        }
    }

    /// `∂²D/∂P² [dP]` at `P = WH`.
    fn loss_hessian(&self, p: &Matrix, dp: &Matrix) -> Matrix {
        let (n, m) = (self.y.rows(), self.y.cols());
        match self.distance {
            Distance::Euclidean => {
                let c = 2.0 / (n * m) as f64;
                Matrix::from_fn(n, m, |i, j| c * dp[(i, j)])
            }
            Distance::Cosine => {
                let mut out = Matrix::zeros(n, m);
                for i in 0..n {
                    let pi = p.row(i);
                    let yi = self.y_unit.row(i);
                    let ui = dp.row(i);
                    let nu = (dot(pi, pi) + COSINE_ROW_FLOOR * COSINE_ROW_FLOOR).sqrt();
                    let nu3 = nu * nu * nu;
                    let nu5 = nu3 * nu * nu;
                    let s = dot(yi, pi);
                    let pu = dot(pi, ui);
                    let yu = dot(yi, ui);
                    for (j, o) in out.row_mut(i).iter_mut().enumerate() {
                        *o = (yi[j] * pu / nu3 + pi[j] * yu / nu3 + s * ui[j] / nu3
                            - 3.0 * s * pu * pi[j] / nu5)
                            / n as f64;
                    }
                }
                out
            }
        }
    }
}

impl Objective for NnmfProblem {
    fn dim(&self) -> usize {
        self.rank * (self.y.rows() + self.y.cols())
    }

    fn value(&self, z: &[f64]) -> f64 {
        let pen = self
            .regularizer
            .map_or(0.0, |t| z.iter().map(|&v| t.value(v)).sum());
        self.distance_value(z) + pen
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let (w, h) = self.split(z);
        let g = self.loss_gradient(&w.matmul(&h));
        let mut out = Self::join(&g.matmul_bt(&h), &w.tmatmul(&g));
        if let Some(t) = self.regularizer {
            out.iter_mut()
                .zip(z)
                .for_each(|(o, &v)| *o += t.derivative(v));
        }
        out
    }

    fn hessian_vec(&self, z: &[f64], v: &[f64]) -> Vec<f64> {
        let (w, h) = self.split(z);
        let (vw, vh) = self.split(v);
        let p = w.matmul(&h);
        let g = self.loss_gradient(&p);
        let mut dp = vw.matmul(&h);
        for (a, b) in dp.as_mut_slice().iter_mut().zip(w.matmul(&vh).as_slice()) {
            *a += b;
        }
        let dg = self.loss_hessian(&p, &dp);
        let mut dw = dg.matmul_bt(&h);
        for (a, b) in dw
            .as_mut_slice()
            .iter_mut()
            .zip(g.matmul_bt(&vh).as_slice())
        {
            *a += b;
        }
        let mut dh = vw.tmatmul(&g);
        for (a, b) in dh.as_mut_slice().iter_mut().zip(w.tmatmul(&dg).as_slice()) {
            *a += b;
        }
        let mut out = Self::join(&dw, &dh);
        if let Some(t) = self.regularizer {
            for ((o, &zi), &vi) in out.iter_mut().zip(z).zip(v) {
                *o += t.second_derivative(zi) * vi;
            }
        }
        out
    }
}
