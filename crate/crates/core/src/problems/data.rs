//! Seeded synthetic instances and a small CSV matrix loader.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Orthonormalizes the columns of `m` (rows ≥ cols) by modified Gram–Schmidt.
fn orthonormal_columns(m: &Matrix) -> Matrix {
    let mut cols: Vec<Vec<f64>> = (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| m[(i, j)]).collect())
        .collect();
    for j in 0..cols.len() {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let proj = dot(&done[k], &rest[0]);
            rest[0]
                .iter_mut()
                .zip(&done[k])
                .for_each(|(v, q)| *v -= proj * q);
        }
        let nrm = dot(&cols[j], &cols[j]).sqrt();
        cols[j].iter_mut().for_each(|v| *v /= nrm);
    }
    Matrix::from_fn(m.rows(), m.cols(), |i, j| cols[j][i])
}

/// Noise level of the planted NNLS right-hand side.
pub const NNLS_NOISE: f64 = 1e-2;

/// Random least-squares data `(A, b)` with `A: rows×cols`, `rows ≥ cols`,
/// whose normal matrix `AᵀA` has largest eigenvalue 1 and condition number
/// `condition`. The eigenvalues are log-spaced.
///
/// `b = A x₀ + σξ` with σ = [`NNLS_NOISE`], ξ standard normal, and a planted
/// `x₀ ≥ 0` whose entries are zero with probability ½ and half-normal
/// otherwise. The noise makes a generic fraction of the zero entries active
/// at the solution while keeping the optimal residual small.
pub fn random_nnls(
    rows: usize,
    cols: usize,
    condition: f64,
    seed: u64,
) -> Result<(Matrix, Vec<f64>)> {
    if cols == 0 || rows < cols {
        return Err(Error::InvalidInput(format!(
            "random NNLS needs rows >= cols >= 1, got {rows}x{cols}"
        )));
    }
    if !(condition >= 1.0 && condition.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "condition: must be >= 1, got {condition}"
        )));
    }
    let mut r = rng(seed);
    let u = orthonormal_columns(&gaussian(rows, cols, &mut r));
    let v = orthonormal_columns(&gaussian(cols, cols, &mut r));
    let sigma: Vec<f64> = (0..cols)
        .map(|i| {
            let t = if cols == 1 {
                0.0
            } else {
                i as f64 / (cols - 1) as f64
            };
            condition.powf(-0.5 * t)
        })
        .collect();
    let us = Matrix::from_fn(rows, cols, |i, j| u[(i, j)] * sigma[j]);
    let a = us.matmul_bt(&v);
    let x0: Vec<f64> = (0..cols)
        .map(|_| {
            let z: f64 = r.sample(StandardNormal);
            if r.random_bool(0.5) {
                z.abs()
            } else {
                0.0
            }
        })
        .collect();
    let mut b = a.matvec(&x0);
    for bi in &mut b {
        *bi += NNLS_NOISE * r.sample::<f64, _>(StandardNormal);
    }
    Ok((a, b))
}

/// Gaussian features (`n × features`) with labels in `0..classes` drawn from
/// a softmax model with random weights.
pub fn synthetic_classification(
    n: usize,
    features: usize,
    classes: usize,
    seed: u64,
) -> Result<(Matrix, Vec<usize>)> {
    if n == 0 || features == 0 || classes < 2 {
        return Err(Error::InvalidInput(format!(
            "classification data needs n, features >= 1 and classes >= 2, got ({n}, {features}, {classes})"
        )));
    }
    let mut r = rng(seed);
    let a = gaussian(n, features, &mut r);
    let w = gaussian(classes, features, &mut r);
    let logits = a.matmul_bt(&w);
    let labels = (0..n)
        .map(|i| {
            // Gumbel-max sampling from softmax(logits_i).
            (0..classes)
                .map(|c| {
                    let u: f64 = r.random_range(f64::EPSILON..1.0);
                    (c, logits[(i, c)] - (-u.ln()).ln())
                })
                .fold((0, f64::NEG_INFINITY), |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                })
                .0
        })
        .collect();
    Ok((a, labels))
}

/// A nonnegative `n × m` matrix scaled into `[0, 1]`: a rank-`r` half-normal
/// product plus small nonnegative noise.
pub fn synthetic_nnmf(n: usize, m: usize, r: usize, seed: u64) -> Result<Matrix> {
    if n == 0 || m == 0 || r == 0 {
        return Err(Error::InvalidInput(format!(
            "NNMF data needs n, m, r >= 1, got ({n}, {m}, {r})"
        )));
    }
    let mut g = rng(seed);
    let w = Matrix::from_fn(n, r, |_, _| g.sample::<f64, _>(StandardNormal).abs());
    let h = Matrix::from_fn(r, m, |_, _| g.sample::<f64, _>(StandardNormal).abs());
    let mut y = w.matmul(&h);
    for v in y.as_mut_slice() {
        *v += 0.01 * g.sample::<f64, _>(StandardNormal).abs();
    }
    let top = y.max_abs();
    y.as_mut_slice().iter_mut().for_each(|v| *v /= top);
    Ok(y)
}

/// Half-normal factor initialization `W₀: n×r`, `H₀: r×m`, normalized so the
/// largest entry of `W₀H₀` is 1.
pub fn half_normal_init(n: usize, m: usize, r: usize, seed: u64) -> (Matrix, Matrix) {
    let mut g = rng(seed);
    let w = Matrix::from_fn(n, r, |_, _| g.sample::<f64, _>(StandardNormal).abs());
    let h = Matrix::from_fn(r, m, |_, _| g.sample::<f64, _>(StandardNormal).abs());
    let s = w.matmul(&h).max_abs().sqrt();
    let scale = |mut a: Matrix| {
        a.as_mut_slice().iter_mut().for_each(|v| *v /= s);
        a
    };
    (scale(w), scale(h))
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().map_err(|_| {
                    Error::Data(format!(
                        "{}: line {}, column {}: not a number: {field:?}",
                        path.display(),
                        line + 1,
                        col + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Data(format!("{}: no rows", path.display())));
    }
    Ok(rows)
}

/// Headerless, comma-separated, row-major matrix.
pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    let rows = read_rows(path.as_ref())?;
    Matrix::from_rows(&rows)
}

/// Like [`load_matrix_csv`], with the last column holding nonnegative integer
/// labels.
pub fn load_labeled_csv(path: impl AsRef<Path>) -> Result<(Matrix, Vec<usize>)> {
    let path = path.as_ref();
    let rows = read_rows(path)?;
    let mut features = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (i, mut row) in rows.into_iter().enumerate() {
        let label = row.pop().filter(|_| !row.is_empty()).ok_or_else(|| {
            Error::Data(format!(
                "{}: line {}: need features and a label",
                path.display(),
                i + 1
            ))
        })?;
        if !(label >= 0.0 && label.fract() == 0.0 && label < usize::MAX as f64) {
            return Err(Error::Data(format!(
                "{}: line {}: label {label} is not a nonnegative integer",
                path.display(),
                i + 1
            )));
        }
        labels.push(label as usize);
        features.push(row);
    }
    Ok((Matrix::from_rows(&features)?, labels))
}
