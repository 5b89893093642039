//! Coordinate frames and differentiable scalar fields over them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::expr::{parse_expression, Env, Expr};
use crate::lagrangian::LagrangianSystem;
use crate::scalar::Scalar;

/// Ordered coordinate names. Points are plain slices in this order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame(Arc<Vec<String>>);

impl Frame {
    pub fn new(names: Vec<String>) -> Self {
        Frame(Arc::new(names))
    }

    /// `(t, q1..qn)`
    pub fn config(n: usize) -> Self {
        let mut v = vec!["t".to_string()];
        v.extend((1..=n).map(|i| format!("q{i}")));
        Frame::new(v)
    }

    /// `(t, q1..qn, qt1..qtn)`
    pub fn jet(n: usize) -> Self {
        let mut v = vec!["t".to_string()];
        v.extend((1..=n).map(|i| format!("q{i}")));
        v.extend((1..=n).map(|i| format!("qt{i}")));
        Frame::new(v)
    }

    /// `(t, q1..qn, p1..pn)`
    pub fn phase(n: usize) -> Self {
        let mut v = vec!["t".to_string()];
        v.extend((1..=n).map(|i| format!("q{i}")));
        v.extend((1..=n).map(|i| format!("p{i}")));
        Frame::new(v)
    }

    /// `(t, q1..qn, p0, p1..pn)`
    pub fn extended(n: usize) -> Self {
        let mut v = vec!["t".to_string()];
        v.extend((1..=n).map(|i| format!("q{i}")));
        v.push("p0".to_string());
        v.extend((1..=n).map(|i| format!("p{i}")));
        Frame::new(v)
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }
}

pub type Params = BTreeMap<String, f64>;

struct FrameEnv<'a, S> {
    names: &'a [String],
    values: &'a [S],
    params: &'a Params,
}

impl<S: Scalar> Env<S> for FrameEnv<'_, S> {
    fn lookup(&self, name: &str) -> Option<S> {
        match self.names.iter().position(|n| n == name) {
            Some(i) => Some(self.values[i].clone()),
            None => self.params.get(name).map(|&v| S::from_f64(v)),
        }
    }
}

#[derive(Clone, Debug)]
enum Body {
    Expr(Arc<Expr>),
    /// Hamiltonian associated with a hyperregular Lagrangian by fibrewise
    /// Legendre inversion.
    Legendre(Arc<LagrangianSystem>),
}

/// A real function over one coordinate frame, evaluable over reals and duals.
#[derive(Clone, Debug)]
pub struct ScalarField {
    frame: Frame,
    params: Arc<Params>,
    body: Body,
}

impl ScalarField {
    /// Wraps `expr`, checking that its free variables lie in `frame ∪ params`.
    pub fn from_expr(expr: Expr, frame: Frame, params: &Params) -> Result<Self> {
        for v in expr.free_variables() {
            if frame.index_of(&v).is_none() && !params.contains_key(&v) {
                return Err(Error::Config(format!(
                    "variable `{v}` in `{expr}` is neither a coordinate of ({}) nor a parameter",
                    frame.names().join(", ")
                )));
            }
        }
        Ok(ScalarField {
            frame,
            params: Arc::new(params.clone()),
            body: Body::Expr(Arc::new(expr)),
        })
    }

    pub fn parse(text: &str, frame: Frame, params: &Params) -> Result<Self> {
        Self::from_expr(parse_expression(text)?, frame, params)
    }

    /// Parameter-free convenience used heavily by built-in systems.
    pub fn expr(text: &str, frame: &Frame) -> Result<Self> {
        Self::parse(text, frame.clone(), &Params::new())
    }

    pub(crate) fn legendre(frame: Frame, lsys: Arc<LagrangianSystem>) -> Self {
        ScalarField {
            frame,
            params: Arc::new(Params::new()),
            body: Body::Legendre(lsys),
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Underlying expression, `None` for built-in evaluators.
    pub fn as_expr(&self) -> Option<&Expr> {
        match &self.body {
            Body::Expr(e) => Some(e),
            Body::Legendre(_) => None,
        }
    }

    /// Same body on a different frame (e.g. pulling a `(t, q)` field back to
    /// phase space). Fails if a variable is not available in `frame`.
    pub fn with_frame(&self, frame: Frame) -> Result<Self> {
        match &self.body {
            Body::Expr(e) => Self::from_expr((**e).clone(), frame, &self.params),
            Body::Legendre(l) => {
                if frame == self.frame {
                    Ok(Self::legendre(frame, l.clone()))
                } else {
                    Err(Error::Config(
                        "built-in Legendre evaluators cannot change frame".into(),
                    ))
                }
            }
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<S> {
        check_len(self.frame.len(), x.len())?;
        match &self.body {
            Body::Expr(_) => self.eval_expr(x),
            Body::Legendre(l) => crate::hamiltonian::associated_eval(l, x),
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }

    /// Expression-only evaluation; never dispatches to built-in evaluators,
    /// so it can be instantiated at any nesting depth.
    pub(crate) fn eval_expr<S: Scalar>(&self, x: &[S]) -> Result<S> {
        check_len(self.frame.len(), x.len())?;
        match &self.body {
            Body::Expr(e) => {
                let env = FrameEnv {
                    names: self.frame.names(),
                    values: x,
                    params: &self.params,
                };
                Ok(e.eval(&env)?)
            }
            Body::Legendre(_) => Err(Error::Config(
                "a Lagrangian must be given as an expression".into(),
            )),
        }
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            Body::Expr(e) => write!(f, "{e}"),
            Body::Legendre(_) => f.write_str("<associated Hamiltonian>"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames() {
        assert_eq!(Frame::jet(2).names(), ["t", "q1", "q2", "qt1", "qt2"]);
        assert_eq!(Frame::phase(1).names(), ["t", "q1", "p1"]);
        assert_eq!(Frame::extended(1).names(), ["t", "q1", "p0", "p1"]);
    }

    #[test]
    fn rejects_foreign_variables() {
        let err = ScalarField::expr("q1 + p1", &Frame::config(1)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let mut params = Params::new();
        params.insert("k".into(), 2.0);
        let f = ScalarField::parse("k*q1", Frame::config(1), &params).unwrap();
        assert_eq!(f.eval_f64(&[0.0, 3.0]).unwrap(), 6.0);
    }

    #[test]
    fn dimension_checked() {
        let f = ScalarField::expr("q1", &Frame::config(1)).unwrap();
        assert!(matches!(
            f.eval_f64(&[0.0]),
            Err(Error::Dimension {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn pull_back_to_phase_frame() {
        let f = ScalarField::expr("q1*t", &Frame::config(1)).unwrap();
        let g = f.with_frame(Frame::phase(1)).unwrap();
        assert_eq!(g.eval_f64(&[2.0, 3.0, 100.0]).unwrap(), 6.0);
        let h = ScalarField::expr("p1", &Frame::phase(1)).unwrap();
        assert!(h.with_frame(Frame::config(1)).is_err());
    }
}
