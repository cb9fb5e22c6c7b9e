use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::oracle::Objective;

#[derive(Debug, Clone)]
enum Form {
    /// ½‖Ax − b‖²
    LeastSquares { a: Matrix, b: Vec<f64> },
    /// ½xᵀQx + cᵀx
    Symmetric { q: Matrix, c: Vec<f64> },
}

/// A quadratic objective, either in least-squares form or as a symmetric
/// (possibly indefinite) matrix with a linear term.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    form: Form,
}

/// `f(x) = ½‖Ax − b‖²`.
pub fn make_quadratic(a: Matrix, b: Vec<f64>) -> Result<QuadraticProblem> {
    QuadraticProblem::least_squares(a, b)
}

impl QuadraticProblem {
    pub fn least_squares(a: Matrix, b: Vec<f64>) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                got: b.len(),
            });
        }
        if a.cols() == 0 {
            return Err(Error::InvalidInput(
                "A must have at least one column".into(),
            ));
        }
        Ok(Self {
            form: Form::LeastSquares { a, b },
        })
    }

    /// `f(x) = ½xᵀQx + cᵀx`. `Q` must be square and symmetric up to roundoff.
    pub fn from_symmetric(q: Matrix, c: Vec<f64>) -> Result<Self> {
        if q.rows() != q.cols() {
            return Err(Error::InvalidInput(format!(
                "Q must be square, got {}x{}",
                q.rows(),
                q.cols()
            )));
        }
        if c.len() != q.rows() {
            return Err(Error::DimensionMismatch {
                expected: q.rows(),
                got: c.len(),
            });
        }
        let tol = 1e-12 * q.max_abs().max(1.0);
        for i in 0..q.rows() {
            for j in 0..i {
                if (q[(i, j)] - q[(j, i)]).abs() > tol {
                    return Err(Error::InvalidInput(format!(
                        "Q is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            form: Form::Symmetric { q, c },
        })
    }
}

impl Objective for QuadraticProblem {
    fn dim(&self) -> usize {
        match &self.form {
            Form::LeastSquares { a, .. } => a.cols(),
            Form::Symmetric { q, .. } => q.rows(),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        match &self.form {
            Form::LeastSquares { a, b } => {
                let r: Vec<f64> = a.matvec(x).iter().zip(b).map(|(ax, bi)| ax - bi).collect();
                0.5 * dot(&r, &r)
            }
            Form::Symmetric { q, c } => 0.5 * dot(x, &q.matvec(x)) + dot(c, x),
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.form {
            Form::LeastSquares { a, b } => {
                let r: Vec<f64> = a.matvec(x).iter().zip(b).map(|(ax, bi)| ax - bi).collect();
                a.tmatvec(&r)
            }
            Form::Symmetric { q, c } => q.matvec(x).iter().zip(c).map(|(qx, ci)| qx + ci).collect(),
        }
    }

    fn hessian_vec(&self, _x: &[f64], v: &[f64]) -> Vec<f64> {
        match &self.form {
            Form::LeastSquares { a, .. } => a.tmatvec(&a.matvec(v)),
            Form::Symmetric { q, .. } => q.matvec(v),
        }
    }
}
