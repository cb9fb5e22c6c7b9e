use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Twice-smooth clipped absolute deviation penalty.
///
/// ```text
/// λ|x|                       |x| < λ
/// Q(|x|)                     λ ≤ |x| < aλ
/// (a + 1)λ²/2                |x| ≥ aλ
/// ```
///
/// `Q` is the lowest-degree polynomial matching value, slope and curvature
/// of the outer branches at both knots. With `s = (|x| − λ)/L`, `L = (a−1)λ`:
/// `Q = λ² + λL(s − s³ + s⁴/2)`. The general C² Hermite quintic through the
/// six knot conditions has a vanishing `s⁵` coefficient, so this quartic is it.
///
/// Odd derivatives use `sign(0) = +1`, the one-sided value on `x ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tscad {
    pub lambda: f64,
    pub a: f64,
}

/// Validated TSCAD penalty. Requires `λ > 0`, `a > 1`.
pub fn tscad(lambda: f64, a: f64) -> Result<Tscad> {
    let t = Tscad { lambda, a };
    t.validate()?;
    Ok(t)
}

impl Tscad {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "lambda: TSCAD requires lambda > 0, got {}",
                self.lambda
            )));
        }
        if !(self.a > 1.0 && self.a.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "a: TSCAD requires a > 1, got {}",
                self.a
            )));
        }
        Ok(())
    }

    /// `(a + 1)λ²/2`, the value for `|x| ≥ aλ` and the global maximum.
    pub fn cap(&self) -> f64 {
        (self.a + 1.0) * self.lambda * self.lambda / 2.0
    }

    fn width(&self) -> f64 {
        (self.a - 1.0) * self.lambda
    }

    pub fn value(&self, x: f64) -> f64 {
        let t = x.abs();
        let l = self.lambda;
        if t < l {
            l * t
        } else if t < self.a * l {
            let s = (t - l) / self.width();
            l * l + l * self.width() * (s - s.powi(3) + 0.5 * s.powi(4))
        } else {
            self.cap()
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let t = x.abs();
        let l = self.lambda;
        let slope = if t < l {
            l
        } else if t < self.a * l {
            let s = (t - l) / self.width();
            l * (1.0 - 3.0 * s * s + 2.0 * s.powi(3))
        } else {
            0.0
        };
        sign * slope
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let t = x.abs();
        let l = self.lambda;
        if t >= l && t < self.a * l {
            let s = (t - l) / self.width();
            -6.0 * l * s * (1.0 - s) / self.width()
        } else {
            0.0
        }
    }
}
