//! Number-like types that fields and charts can be evaluated over.
//!
//! Every evaluator in the crate is written once, generically over [`Scalar`],
//! and instantiated for plain `f64` values and for (possibly nested)
//! [`Dual`](crate::dual::Dual) numbers when derivatives are needed.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;

    /// Innermost real part, used for branch decisions and domain checks.
    fn value(&self) -> f64;

    /// Multiply by a plain real.
    fn scale(&self, k: f64) -> Self;

    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    /// Absolute value; the derivative at exactly zero is taken to be zero.
    fn abs(&self) -> Self;
    fn atan2(&self, x: &Self) -> Self;
    fn asinh(&self) -> Self;
    fn atanh(&self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// Integer power by repeated multiplication.
    fn powi(&self, n: i32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n.unsigned_abs() {
            acc = acc * self.clone();
        }
        if n < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }

    /// Real power `exp(y ln x)`; callers check `x > 0`.
    fn powf(&self, y: &Self) -> Self {
        (y.clone() * self.ln()).exp()
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn scale(&self, k: f64) -> Self {
        self * k
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn tan(&self) -> Self {
        f64::tan(*self)
    }
    fn sinh(&self) -> Self {
        f64::sinh(*self)
    }
    fn cosh(&self) -> Self {
        f64::cosh(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
    fn asinh(&self) -> Self {
        f64::asinh(*self)
    }
    fn atanh(&self) -> Self {
        f64::atanh(*self)
    }
    fn powf(&self, y: &Self) -> Self {
        f64::powf(*self, *y)
    }
    fn powi(&self, n: i32) -> Self {
        // Same multiplication order as the generic path so that values agree
        // bit for bit with the real parts of dual evaluations.
        let mut acc = 1.0;
        for _ in 0..n.unsigned_abs() {
            acc *= *self;
        }
        if n < 0 {
            1.0 / acc
        } else {
            acc
        }
    }
}

/// Sum of a sequence of scalars; `zero()` when empty.
pub fn sum<S: Scalar>(items: impl IntoIterator<Item = S>) -> S {
    items.into_iter().fold(S::zero(), |acc, x| acc + x)
}

/// Euclidean dot product.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    sum(a.iter().zip(b).map(|(x, y)| x.clone() * y.clone()))
}
