//! Gradients by vector-forward AD, with a central-difference oracle.

use crate::dual::{seed1, Dual1};
use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Default finite-difference step, scaled per coordinate by `1 + |x_i|`.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Full gradient in frame order from a single dual sweep.
pub fn grad(f: &ScalarField, at: &[f64]) -> Result<Vec<f64>> {
    let y: Dual1 = f.eval(&seed1(at))?;
    Ok((0..at.len()).map(|i| y.d(i)).collect())
}

/// Value and gradient together.
pub fn value_and_grad(f: &ScalarField, at: &[f64]) -> Result<(f64, Vec<f64>)> {
    let y: Dual1 = f.eval(&seed1(at))?;
    Ok((y.re, (0..at.len()).map(|i| y.d(i)).collect()))
}

/// Central differences `(f(x + h_i e_i) - f(x - h_i e_i)) / 2h_i` with
/// `h_i = h (1 + |x_i|)`.
pub fn fd_gradient_oracle(f: &ScalarField, at: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let mut out = Vec::with_capacity(at.len());
    let mut x = at.to_vec();
    for i in 0..at.len() {
        let hi = h * (1.0 + at[i].abs());
        x[i] = at[i] + hi;
        let up = f.eval_f64(&x)?;
        x[i] = at[i] - hi;
        let down = f.eval_f64(&x)?;
        x[i] = at[i];
        out.push((up - down) / (2.0 * hi));
    }
    Ok(out)
}

/// Rows are gradients of `fields`, columns follow the shared frame.
pub fn jacobian(fields: &[ScalarField], at: &[f64]) -> Result<Vec<Vec<f64>>> {
    if let Some(first) = fields.first() {
        if let Some(other) = fields.iter().find(|f| f.frame() != first.frame()) {
            return Err(Error::Config(format!(
                "jacobian rows must share one frame: ({}) vs ({})",
                first.frame().names().join(", "),
                other.frame().names().join(", ")
            )));
        }
    }
    fields.iter().map(|f| grad(f, at)).collect()
}

/// Relative deviation `‖a − b‖∞ / (1 + ‖a‖∞)`.
pub fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let scale = a.iter().map(|x| x.abs()).fold(0.0, f64::max);
    num / (1.0 + scale)
}

/// Nested evaluation: `y.re.re` value, `y.re.eps` gradient and
/// `y.eps[a].eps[b]` second partials.
#[cfg(test)]
pub(crate) fn eval_second(f: &ScalarField, at: &[f64]) -> Result<crate::dual::Dual2> {
    f.eval(&crate::dual::seed2(at))
}
