//! Vector-forward dual numbers.
//!
//! A [`Dual`] carries a value and one derivative slot per active variable.
//! Nesting (`Dual<Dual<f64>>`) yields second derivatives. Constants are
//! stored with an empty slot vector, which every operation reads as zeros,
//! so mixing constants with seeded variables needs no bookkeeping.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub eps: Vec<S>,
}

/// First-order dual over reals.
pub type Dual1 = Dual<f64>;
/// Second-order (nested) dual over reals.
pub type Dual2 = Dual<Dual<f64>>;

impl<S: Scalar> Dual<S> {
    pub fn constant(re: S) -> Self {
        Dual { re, eps: Vec::new() }
    }

    /// Variable `index` of `width` active variables with unit seed.
    pub fn variable(re: S, index: usize, width: usize) -> Self {
        let mut eps = vec![S::zero(); width];
        eps[index] = S::one();
        Dual { re, eps }
    }

    /// Derivative slot `i`, zero when the slot vector is empty.
    pub fn d(&self, i: usize) -> S {
        self.eps.get(i).cloned().unwrap_or_else(S::zero)
    }

    /// Applies the chain rule with the outer derivative `df` at `self.re`.
    fn chain(&self, f: S, df: S) -> Self {
        Dual {
            re: f,
            eps: self.eps.iter().map(|e| e.clone() * df.clone()).collect(),
        }
    }

    fn zip_eps(a: &[S], b: &[S], fa: impl Fn(&S) -> S, fb: impl Fn(&S) -> S) -> Vec<S> {
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| match (a.get(i), b.get(i)) {
                (Some(x), Some(y)) => fa(x) + fb(y),
                (Some(x), None) => fa(x),
                (None, Some(y)) => fb(y),
                (None, None) => S::zero(),
            })
            .collect()
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let eps = Self::zip_eps(&self.eps, &rhs.eps, |x| x.clone(), |y| y.clone());
        Dual { re: self.re + rhs.re, eps }
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let eps = Self::zip_eps(&self.eps, &rhs.eps, |x| x.clone(), |y| -y.clone());
        Dual { re: self.re - rhs.re, eps }
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.re, &rhs.re);
        let eps = Self::zip_eps(
            &self.eps,
            &rhs.eps,
            |x| x.clone() * b.clone(),
            |y| a.clone() * y.clone(),
        );
        Dual { re: self.re * rhs.re, eps }
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = S::one() / rhs.re.clone();
        let q = self.re.clone() * inv.clone();
        let eps = Self::zip_eps(
            &self.eps,
            &rhs.eps,
            |x| x.clone() * inv.clone(),
            |y| -(q.clone() * y.clone() * inv.clone()),
        );
        Dual { re: q, eps }
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual {
            re: -self.re,
            eps: self.eps.into_iter().map(|e| -e).collect(),
        }
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn from_f64(v: f64) -> Self {
        Dual::constant(S::from_f64(v))
    }
    fn value(&self) -> f64 {
        self.re.value()
    }
    fn scale(&self, k: f64) -> Self {
        Dual {
            re: self.re.scale(k),
            eps: self.eps.iter().map(|e| e.scale(k)).collect(),
        }
    }
    fn sin(&self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(&self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn tan(&self) -> Self {
        let t = self.re.tan();
        self.chain(t.clone(), S::one() + t.clone() * t)
    }
    fn sinh(&self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }
    fn cosh(&self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }
    fn exp(&self) -> Self {
        let e = self.re.exp();
        self.chain(e.clone(), e)
    }
    fn ln(&self) -> Self {
        self.chain(self.re.ln(), S::one() / self.re.clone())
    }
    fn sqrt(&self) -> Self {
        let s = self.re.sqrt();
        self.chain(s.clone(), S::one() / s.scale(2.0))
    }
    fn abs(&self) -> Self {
        let v = self.re.value();
        let sign = if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.chain(self.re.abs(), S::from_f64(sign))
    }
    fn atan2(&self, x: &Self) -> Self {
        let (y0, x0) = (&self.re, &x.re);
        let r2 = x0.clone() * x0.clone() + y0.clone() * y0.clone();
        let dy = x0.clone() / r2.clone();
        let dx = -(y0.clone() / r2);
        let eps = Self::zip_eps(
            &self.eps,
            &x.eps,
            |e| e.clone() * dy.clone(),
            |e| e.clone() * dx.clone(),
        );
        Dual { re: y0.atan2(x0), eps }
    }
    /// Real-part power for positive bases.
    fn powf(&self, y: &Self) -> Self {
        let v = self.re.powf(&y.re);
        let dx = y.re.clone() * self.re.powf(&(y.re.clone() - S::one()));
        let dy = v.clone() * self.re.ln();
        let eps = Self::zip_eps(
            &self.eps,
            &y.eps,
            |e| e.clone() * dx.clone(),
            |e| e.clone() * dy.clone(),
        );
        Dual { re: v, eps }
    }
    fn asinh(&self) -> Self {
        let d = S::one() / (self.re.clone() * self.re.clone() + S::one()).sqrt();
        self.chain(self.re.asinh(), d)
    }
    fn atanh(&self) -> Self {
        let d = S::one() / (S::one() - self.re.clone() * self.re.clone());
        self.chain(self.re.atanh(), d)
    }
}

/// Seeds every coordinate of `x` as an independent first-order variable.
pub fn seed1(x: &[f64]) -> Vec<Dual1> {
    let n = x.len();
    x.iter()
        .enumerate()
        .map(|(i, &v)| Dual::variable(v, i, n))
        .collect()
}

/// Seeds every coordinate of `x` at both nesting levels, so that for
/// `y = f(seed2(x))`, `y.eps[a].eps[b]` is the mixed second derivative.
pub fn seed2(x: &[f64]) -> Vec<Dual2> {
    let n = x.len();
    x.iter()
        .enumerate()
        .map(|(i, &v)| Dual::variable(Dual::variable(v, i, n), i, n))
        .collect()
}

/// Lifts a generic scalar vector one nesting level, seeding only the
/// coordinates listed in `active` (in that order).
pub fn seed_subset<S: Scalar>(x: &[S], active: &[usize]) -> Vec<Dual<S>> {
    let width = active.len();
    x.iter()
        .enumerate()
        .map(|(i, v)| match active.iter().position(|&a| a == i) {
            Some(k) => Dual::variable(v.clone(), k, width),
            None => Dual::constant(v.clone()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let x = seed1(&[2.0, 3.0]);
        let y = x[0].clone() * x[1].clone();
        assert_eq!(y.re, 6.0);
        assert_eq!(y.eps, vec![3.0, 2.0]);
    }

    #[test]
    fn constants_mix_with_variables() {
        let x = Dual::variable(1.5, 0, 1);
        let y = Dual1::from_f64(2.0) * x.clone() + Dual1::from_f64(1.0);
        assert_eq!(y.re, 4.0);
        assert_eq!(y.d(0), 2.0);
        assert_eq!(Dual1::from_f64(7.0).d(3), 0.0);
    }

    #[test]
    fn nested_second_derivative() {
        // f = x^2 y, f_xx = 2y, f_xy = 2x
        let v = seed2(&[3.0, 5.0]);
        let f = v[0].clone() * v[0].clone() * v[1].clone();
        assert_eq!(f.re.re, 45.0);
        assert_eq!(f.eps[0].re, 30.0);
        assert_eq!(f.eps[0].eps[0], 10.0);
        assert_eq!(f.eps[0].eps[1], 6.0);
        assert_eq!(f.eps[1].eps[0], 6.0);
    }

    #[test]
    fn abs_kink_has_zero_derivative() {
        let x = Dual::variable(0.0, 0, 1);
        assert_eq!(x.abs().d(0), 0.0);
    }

    #[test]
    fn atan2_partials() {
        let v = seed1(&[1.0, 2.0]);
        let a = v[0].atan2(&v[1]);
        assert!((a.d(0) - 2.0 / 5.0).abs() < 1e-15);
        assert!((a.d(1) + 1.0 / 5.0).abs() < 1e-15);
    }
}
