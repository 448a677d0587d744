//! Forward-mode automatic differentiation over the four spacetime coordinates.
//!
//! [`Jet`] carries a value and its four partial derivatives. The element type is
//! itself a [`Scalar`], so `Jet<Jet<f64>>` yields second derivatives; the
//! exterior derivative of a pullback field is computed that way.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number type accepted by every generic field evaluator.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    /// The plain value, stripped of every infinitesimal layer.
    fn re(&self) -> f64;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn atan2(self, x: Self) -> Self;

    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }

    fn sq(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
}

/// Value plus gradient with respect to (t, x, y, z).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    pub v: T,
    pub d: [T; 4],
}

impl<T: Scalar> Jet<T> {
    pub fn constant(v: T) -> Self {
        Jet { v, d: [T::cst(0.0); 4] }
    }

    /// The `i`-th coordinate variable.
    pub fn variable(v: T, i: usize) -> Self {
        let mut d = [T::cst(0.0); 4];
        d[i] = T::cst(1.0);
        Jet { v, d }
    }

    /// Seeds the four coordinates of an event as independent variables.
    pub fn seed(p: [T; 4]) -> [Self; 4] {
        [
            Self::variable(p[0], 0),
            Self::variable(p[1], 1),
            Self::variable(p[2], 2),
            Self::variable(p[3], 3),
        ]
    }

    #[inline]
    fn chain(self, v: T, dv: T) -> Self {
        Jet {
            v,
            d: self.d.map(|x| x * dv),
        }
    }
}

impl<T: Scalar> Add for Jet<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Jet {
            v: self.v + o.v,
            d: [
                self.d[0] + o.d[0],
                self.d[1] + o.d[1],
                self.d[2] + o.d[2],
                self.d[3] + o.d[3],
            ],
        }
    }
}

impl<T: Scalar> Sub for Jet<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Jet {
            v: self.v - o.v,
            d: [
                self.d[0] - o.d[0],
                self.d[1] - o.d[1],
                self.d[2] - o.d[2],
                self.d[3] - o.d[3],
            ],
        }
    }
}

impl<T: Scalar> Mul for Jet<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut d = self.d;
        for i in 0..4 {
            d[i] = self.v * o.d[i] + o.v * self.d[i];
        }
        Jet { v: self.v * o.v, d }
    }
}

impl<T: Scalar> Div for Jet<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = o.v.recip();
        let v = self.v * inv;
        let mut d = self.d;
        for i in 0..4 {
            d[i] = (self.d[i] - v * o.d[i]) * inv;
        }
        Jet { v, d }
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Jet {
            v: -self.v,
            d: self.d.map(|x| -x),
        }
    }
}

impl<T: Scalar> Add<f64> for Jet<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: f64) -> Self {
        Jet {
            v: self.v + o,
            d: self.d,
        }
    }
}

impl<T: Scalar> Sub<f64> for Jet<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: f64) -> Self {
        Jet {
            v: self.v - o,
            d: self.d,
        }
    }
}

impl<T: Scalar> Mul<f64> for Jet<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: f64) -> Self {
        Jet {
            v: self.v * o,
            d: self.d.map(|x| x * o),
        }
    }
}

impl<T: Scalar> Scalar for Jet<T> {
    fn cst(v: f64) -> Self {
        Jet::constant(T::cst(v))
    }
    fn re(&self) -> f64 {
        self.v.re()
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, (s * 2.0).recip())
    }
    fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
    fn atan2(self, x: Self) -> Self {
        let r2 = (self.v * self.v + x.v * x.v).recip();
        let mut d = self.d;
        for i in 0..4 {
            d[i] = (x.v * self.d[i] - self.v * x.d[i]) * r2;
        }
        Jet {
            v: self.v.atan2(x.v),
            d,
        }
    }
}

/// Minimal complex arithmetic over a generic scalar.
#[derive(Clone, Copy, Debug)]
pub struct Cplx<R> {
    pub re: R,
    pub im: R,
}

impl<R: Scalar> Cplx<R> {
    pub fn new(re: R, im: R) -> Self {
        Cplx { re, im }
    }

    pub fn norm_sqr(self) -> R {
        self.re * self.re + self.im * self.im
    }

    pub fn norm_sqr_value(&self) -> f64 {
        let (a, b) = (self.re.re(), self.im.re());
        a * a + b * b
    }

    pub fn quotient(self, o: Self) -> Self {
        let den = o.norm_sqr().recip();
        Cplx {
            re: (self.re * o.re + self.im * o.im) * den,
            im: (self.im * o.re - self.re * o.im) * den,
        }
    }
}
