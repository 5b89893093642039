use std::collections::HashMap;
use std::fmt;

use super::{BinOp, Expr, Func};
use crate::scalar::Scalar;

/// Largest integer exponent evaluated by repeated multiplication.
const MAX_INT_POWER: f64 = 8.0;

#[derive(Clone, Debug, PartialEq)]
pub enum EvalError {
    UnboundVariable(String),
    /// `node` is the printed subexpression whose evaluation failed.
    Domain { reason: String, node: String },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnboundVariable(name) => write!(f, "unbound variable `{name}`"),
            EvalError::Domain { reason, node } => write!(f, "{reason} in `{node}`"),
        }
    }
}

impl std::error::Error for EvalError {}

/// Variable lookup used during evaluation.
pub trait Env<S> {
    fn lookup(&self, name: &str) -> Option<S>;
}

/// Name-to-value map.
#[derive(Clone, Debug, Default)]
pub struct Bindings<S>(pub HashMap<String, S>);

impl<S> Bindings<S> {
    pub fn new() -> Self {
        Bindings(HashMap::new())
    }

    pub fn with(mut self, name: impl Into<String>, value: S) -> Self {
        self.0.insert(name.into(), value);
        self
    }

    pub fn set(&mut self, name: impl Into<String>, value: S) {
        self.0.insert(name.into(), value);
    }
}

impl<S: Clone> Env<S> for Bindings<S> {
    fn lookup(&self, name: &str) -> Option<S> {
        self.0.get(name).cloned()
    }
}

fn domain(reason: &str, node: &Expr) -> EvalError {
    EvalError::Domain {
        reason: reason.to_string(),
        node: node.to_string(),
    }
}

/// `x^y`. Integral exponents up to `MAX_INT_POWER` in magnitude use repeated
/// multiplication, which keeps negative bases legal.
fn power<S: Scalar>(x: S, y: S, node: &Expr) -> Result<S, EvalError> {
    let (xv, yv) = (x.value(), y.value());
    if yv.fract() == 0.0 && yv.abs() <= MAX_INT_POWER {
        if xv == 0.0 && yv < 0.0 {
            return Err(domain("zero raised to a negative power", node));
        }
        let base = x.powi(yv as i32);
        if xv > 0.0 {
            // derivative with respect to a non-constant exponent: x^y ln x dy
            let dy = y - S::from_f64(yv);
            return Ok(base.clone() + dy * base * x.ln());
        }
        return Ok(base);
    }
    if xv < 0.0 {
        return Err(domain("negative base with non-integer exponent", node));
    }
    if xv == 0.0 {
        if yv > 0.0 {
            return Ok(S::zero());
        }
        return Err(domain("zero raised to a non-positive power", node));
    }
    Ok(x.powf(&y))
}

impl Expr {
    /// Evaluates under `env`. Pure: equal inputs give bit-identical output.
    pub fn eval<S: Scalar, E: Env<S> + ?Sized>(&self, env: &E) -> Result<S, EvalError> {
        match self {
            Expr::Const(v) => Ok(S::from_f64(*v)),
            Expr::Var(name) => env
                .lookup(name)
                .ok_or_else(|| EvalError::UnboundVariable(name.clone())),
            Expr::Neg(inner) => Ok(-inner.eval(env)?),
            Expr::Binary(op, l, r) => {
                let a = l.eval::<S, E>(env)?;
                let b = r.eval::<S, E>(env)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            Err(domain("division by zero", self))
                        } else {
                            Ok(a / b)
                        }
                    }
                    BinOp::Pow => power(a, b, self),
                }
            }
            Expr::Call(func, args) => {
                let x = args[0].eval::<S, E>(env)?;
                match func {
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Tan => Ok(x.tan()),
                    Func::Sinh => Ok(x.sinh()),
                    Func::Cosh => Ok(x.cosh()),
                    Func::Exp => Ok(x.exp()),
                    Func::Abs => Ok(x.abs()),
                    Func::Log => {
                        if x.value() <= 0.0 {
                            Err(domain("logarithm of a non-positive number", self))
                        } else {
                            Ok(x.ln())
                        }
                    }
                    Func::Sqrt => {
                        if x.value() < 0.0 {
                            Err(domain("square root of a negative number", self))
                        } else {
                            Ok(x.sqrt())
                        }
                    }
                    Func::Atan2 => {
                        let xx = args[1].eval::<S, E>(env)?;
                        Ok(x.atan2(&xx))
                    }
                    Func::Pow => {
                        let y = args[1].eval::<S, E>(env)?;
                        power(x, y, self)
                    }
                }
            }
        }
    }
}

/// Evaluates `e` under `b`.
pub fn eval_expression<S: Scalar>(e: &Expr, b: &Bindings<S>) -> Result<S, EvalError> {
    e.eval(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;
    use crate::expr::parse_expression;

    fn eval(src: &str, b: &[(&str, f64)]) -> Result<f64, EvalError> {
        let mut bind = Bindings::new();
        for (k, v) in b {
            bind.set(*k, *v);
        }
        parse_expression(src).unwrap().eval(&bind)
    }

    #[test]
    fn arithmetic() {
        assert_eq!(eval("q1^2 + p1", &[("q1", 3.0), ("p1", 1.0)]).unwrap(), 10.0);
        assert_eq!(eval("sqrt(q1^2+q2^2)", &[("q1", 1.0), ("q2", 0.0)]).unwrap(), 1.0);
        assert_eq!(eval("-2^2", &[]).unwrap(), -4.0);
        assert_eq!(eval("2^3^2", &[]).unwrap(), 512.0);
        assert_eq!(eval("(-2)^3", &[]).unwrap(), -8.0);
        assert_eq!(eval("pow(2, -1)", &[]).unwrap(), 0.5);
        assert!((eval("4^0.5", &[]).unwrap() - 2.0).abs() < 1e-15);
        assert!((eval("atan2(1, 1)", &[]).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let err = eval("1/sqrt(q1^2+q2^2)", &[("q1", 0.0), ("q2", 0.0)]).unwrap_err();
        match err {
            EvalError::Domain { reason, node } => {
                assert_eq!(reason, "division by zero");
                assert!(node.contains("sqrt"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(eval("log(0)", &[]), Err(EvalError::Domain { .. })));
        assert!(matches!(eval("log(-1)", &[]), Err(EvalError::Domain { .. })));
        assert!(matches!(eval("0^-1", &[]), Err(EvalError::Domain { .. })));
        assert!(matches!(eval("(-2)^0.5", &[]), Err(EvalError::Domain { .. })));
        assert!(matches!(eval("sqrt(-1)", &[]), Err(EvalError::Domain { .. })));
    }

    #[test]
    fn unbound_variable() {
        assert_eq!(
            eval("q1 + q9", &[("q1", 1.0)]),
            Err(EvalError::UnboundVariable("q9".into()))
        );
    }

    #[test]
    fn dual_through_every_function() {
        let e = parse_expression(
            "sin(x)+cos(x)+tan(x)+sinh(x)+cosh(x)+exp(x)+log(x)+sqrt(x)+abs(x)+atan2(x, 2)+pow(x, 2.5)+x^3",
        )
        .unwrap();
        let x0: f64 = 0.7;
        let b = Bindings::new().with("x", Dual::variable(x0, 0, 1));
        let y: Dual<f64> = e.eval(&b).unwrap();
        let expected = x0.cos() - x0.sin() + 1.0 / x0.cos().powi(2) + x0.cosh() + x0.sinh()
            + x0.exp()
            + 1.0 / x0
            + 0.5 / x0.sqrt()
            + 1.0
            + 2.0 / (4.0 + x0 * x0)
            + 2.5 * x0.powf(1.5)
            + 3.0 * x0 * x0;
        assert!((y.d(0) - expected).abs() < 1e-12, "{} vs {expected}", y.d(0));
    }

    #[test]
    fn variable_exponent_derivative() {
        // d/dy 2^y at y = 3 is 8 ln 2
        let e = parse_expression("2^y").unwrap();
        let b = Bindings::new().with("y", Dual::variable(3.0, 0, 1));
        let v: Dual<f64> = e.eval(&b).unwrap();
        assert_eq!(v.re, 8.0);
        assert!((v.d(0) - 8.0 * 2f64.ln()).abs() < 1e-14);
    }
}
