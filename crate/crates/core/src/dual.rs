//! Scalars for forward-mode differentiation of the local and glued maps.
//!
//! Every map in the numeric modules is written once over [`Real`]; running it
//! on [`Jet`] inputs seeded with the four real coordinates yields the exact
//! Jacobian alongside the value.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn val(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    /// `atan2(self, x)` with `self` as the ordinate.
    fn atan2(self, x: Self) -> Self;
    fn powi(self, n: i32) -> Self;

    fn scale(self, k: f64) -> Self {
        self * Self::cst(k)
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn val(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// Number of independent variables carried by a [`Jet`].
pub const NVARS: usize = 4;

/// Value together with its gradient in four variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: [f64; NVARS],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Self { v, d: [0.0; NVARS] }
    }

    /// The coordinate function `x_i` evaluated at `v`.
    pub fn var(v: f64, i: usize) -> Self {
        let mut d = [0.0; NVARS];
        d[i] = 1.0;
        Self { v, d }
    }

    /// Applies a scalar function with value `f` and derivative `df` at `self.v`.
    fn chain(self, f: f64, df: f64) -> Self {
        Self { v: f, d: self.d.map(|x| df * x) }
    }
}

impl Add for Jet {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(o.d) {
            *a += b;
        }
        Self { v: self.v + o.v, d }
    }
}

impl Sub for Jet {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(o.d) {
            *a -= b;
        }
        Self { v: self.v - o.v, d }
    }
}

impl Mul for Jet {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut d = [0.0; NVARS];
        for i in 0..NVARS {
            d[i] = self.d[i] * o.v + self.v * o.d[i];
        }
        Self { v: self.v * o.v, d }
    }
}

impl Div for Jet {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.v / o.v;
        let mut d = [0.0; NVARS];
        for i in 0..NVARS {
            d[i] = (self.d[i] - q * o.d[i]) / o.v;
        }
        Self { v: q, d }
    }
}

impl Neg for Jet {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, d: self.d.map(|x| -x) }
    }
}

impl Real for Jet {
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    fn val(self) -> f64 {
        self.v
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v)
    }
    fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn atan2(self, x: Self) -> Self {
        let r2 = self.v * self.v + x.v * x.v;
        let mut d = [0.0; NVARS];
        for i in 0..NVARS {
            d[i] = (x.v * self.d[i] - self.v * x.d[i]) / r2;
        }
        Self { v: self.v.atan2(x.v), d }
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::constant(1.0);
        }
        self.chain(self.v.powi(n), n as f64 * self.v.powi(n - 1))
    }
    fn scale(self, k: f64) -> Self {
        Self { v: self.v * k, d: self.d.map(|x| x * k) }
    }
}

/// Complex number over a [`Real`] scalar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cx<R> {
    pub re: R,
    pub im: R,
}

impl<R: Real> Cx<R> {
    pub fn new(re: R, im: R) -> Self {
        Self { re, im }
    }

    pub fn real(re: R) -> Self {
        Self { re, im: R::cst(0.0) }
    }

    pub fn cst(re: f64, im: f64) -> Self {
        Self { re: R::cst(re), im: R::cst(im) }
    }

    pub fn i() -> Self {
        Self::cst(0.0, 1.0)
    }

    pub fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    pub fn norm_sqr(self) -> R {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> R {
        self.norm_sqr().sqrt()
    }

    /// Principal argument in `(-π, π]`.
    pub fn arg(self) -> R {
        self.im.atan2(self.re)
    }

    /// Principal logarithm `ln|w| + i·arg w`.
    pub fn ln(self) -> Self {
        Self { re: self.norm_sqr().ln().scale(0.5), im: self.arg() }
    }

    pub fn exp(self) -> Self {
        let m = self.re.exp();
        Self { re: m * self.im.cos(), im: m * self.im.sin() }
    }

    pub fn scale(self, k: R) -> Self {
        Self { re: self.re * k, im: self.im * k }
    }

    pub fn recip(self) -> Self {
        let n = self.norm_sqr();
        Self { re: self.re / n, im: -self.im / n }
    }

    pub fn val(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.val(), self.im.val())
    }
}

impl Cx<f64> {
    pub fn from_c64(w: num_complex::Complex64) -> Self {
        Self { re: w.re, im: w.im }
    }
}

impl<R: Real> Add for Cx<R> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }
}

impl<R: Real> Sub for Cx<R> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, im: self.im - o.im }
    }
}

impl<R: Real> Mul for Cx<R> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl<R: Real> Div for Cx<R> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<R: Real> Neg for Cx<R> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}
