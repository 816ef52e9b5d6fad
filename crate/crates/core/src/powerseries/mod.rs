//! Exact truncated bivariate power series without constant term.
//!
//! Coefficients are [`PiRational`] scalars. A series of order `N` stores every
//! multi-index `(i, j)` with `1 <= i + j <= N` in graded order
//! (`X, Y, X², XY, Y², X³, …`); a zero entry means the monomial is absent.
//!
//! [`TransitionSeries`] are the rational series with positive `Y`-coefficient
//! that form a group under `(w·v)(X, Y) = w(X, v(X, Y))`, and
//! [`ActionSeries`] are series reduced modulo `2πX`.

mod pirational;

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use pirational::{pi_enclosure, PiRational};

use crate::poly::FloatPoly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("product would contain a π² term")]
    PiSquared,
    #[error("truncation order mismatch: {0} vs {1}")]
    OrderMismatch(u32, u32),
    #[error("truncation order must be at least 1")]
    ZeroOrder,
    #[error("multi-index ({i}, {j}) outside 1 <= i+j <= {order}")]
    IndexOutOfRange { i: u32, j: u32, order: u32 },
    #[error("transition series must have rational coefficients")]
    NotRational,
    #[error("transition series needs a positive Y-coefficient")]
    NonPositiveY,
}

/// Number of stored multi-indices at order `n`.
pub fn num_indices(order: u32) -> usize {
    let n = order as usize;
    n * (n + 3) / 2
}

/// Position of `X^i Y^j` in graded order. Requires `i + j >= 1`.
pub fn index_of(i: u32, j: u32) -> usize {
    let d = (i + j) as usize;
    (d - 1) * (d + 2) / 2 + j as usize
}

/// All multi-indices of order `n` in graded order: by total degree, then by
/// decreasing power of `X`.
pub fn multi_indices(order: u32) -> impl Iterator<Item = (u32, u32)> {
    (1..=order).flat_map(|d| (0..=d).map(move |j| (d - j, j)))
}

fn zero_ref() -> &'static PiRational {
    static ZERO: OnceLock<PiRational> = OnceLock::new();
    ZERO.get_or_init(PiRational::zero)
}

/// Element of 𝖱 truncated at total degree `order`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    order: u32,
    coeffs: Vec<PiRational>,
}

impl TruncatedSeries {
    pub fn zero(order: u32) -> Self {
        assert!(order >= 1, "truncation order must be at least 1");
        Self { order, coeffs: vec![PiRational::zero(); num_indices(order)] }
    }

    pub fn x(order: u32) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[index_of(1, 0)] = PiRational::one();
        s
    }

    pub fn y(order: u32) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[index_of(0, 1)] = PiRational::one();
        s
    }

    /// Builds a series from `((i, j), coefficient)` pairs; repeated indices add up.
    pub fn from_terms<I>(order: u32, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = ((u32, u32), PiRational)>,
    {
        if order == 0 {
            return Err(SeriesError::ZeroOrder);
        }
        let mut s = Self::zero(order);
        for ((i, j), c) in terms {
            if i + j == 0 || i + j > order {
                return Err(SeriesError::IndexOutOfRange { i, j, order });
            }
            s.coeffs[index_of(i, j)] += &c;
        }
        Ok(s)
    }

    /// Convenience constructor from rational `(num, den)` pairs.
    pub fn from_rationals(order: u32, terms: &[((u32, u32), (i64, i64))]) -> Result<Self, SeriesError> {
        Self::from_terms(
            order,
            terms.iter().map(|&(ij, (n, d))| (ij, PiRational::from_ratio(n, d))),
        )
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Coefficient of `X^i Y^j`; zero outside the stored range.
    pub fn coeff(&self, i: u32, j: u32) -> &PiRational {
        if i + j == 0 || i + j > self.order {
            return zero_ref();
        }
        &self.coeffs[index_of(i, j)]
    }

    pub fn set_coeff(&mut self, i: u32, j: u32, value: PiRational) -> Result<(), SeriesError> {
        if i + j == 0 || i + j > self.order {
            return Err(SeriesError::IndexOutOfRange { i, j, order: self.order });
        }
        self.coeffs[index_of(i, j)] = value;
        Ok(())
    }

    /// Dense coefficients in graded order.
    pub fn coefficients(&self) -> &[PiRational] {
        &self.coeffs
    }

    /// Nonzero terms in graded order.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &PiRational)> + '_ {
        multi_indices(self.order).zip(self.coeffs.iter()).filter(|(_, c)| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(PiRational::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().all(PiRational::is_rational)
    }

    fn check_order(&self, other: &Self) -> Result<(), SeriesError> {
        if self.order != other.order {
            return Err(SeriesError::OrderMismatch(self.order, other.order));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { order: self.order, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self { order: self.order, coeffs })
    }

    pub fn neg(&self) -> Self {
        Self { order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, factor: &PiRational) -> Result<Self, SeriesError> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| if c.is_zero() { Ok(PiRational::zero()) } else { c.checked_mul(factor) })
            .collect::<Result<_, _>>()?;
        Ok(Self { order: self.order, coeffs })
    }

    /// Truncated product; terms of total degree above `order` are discarded.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_order(other)?;
        let n = self.order;
        let mut out = Self::zero(n);
        for ((i1, j1), a) in self.terms() {
            let room = n - (i1 + j1);
            for ((i2, j2), b) in other.terms() {
                if i2 + j2 > room {
                    break;
                }
                out.coeffs[index_of(i1 + i2, j1 + j2)] += &a.checked_mul(b)?;
            }
        }
        Ok(out)
    }

    /// Substitution `X ↦ -X`.
    pub fn flip_x(&self) -> Self {
        self.map_indexed(|(i, _), c| if i % 2 == 1 { -c } else { c.clone() })
    }

    /// Substitution `Y ↦ -Y`.
    pub fn flip_y(&self) -> Self {
        self.map_indexed(|(_, j), c| if j % 2 == 1 { -c } else { c.clone() })
    }

    /// Exchange of the variables, `s(X, Y) ↦ s(Y, X)`.
    pub fn swap_xy(&self) -> Self {
        let mut out = Self::zero(self.order);
        for ((i, j), c) in self.terms() {
            out.coeffs[index_of(j, i)] = c.clone();
        }
        out
    }

    fn map_indexed(&self, f: impl Fn((u32, u32), &PiRational) -> PiRational) -> Self {
        let coeffs = multi_indices(self.order).zip(&self.coeffs).map(|(ij, c)| f(ij, c)).collect();
        Self { order: self.order, coeffs }
    }

    /// Drops all terms of total degree above `order` (which must not exceed the current order).
    pub fn truncate(&self, order: u32) -> Result<Self, SeriesError> {
        if order == 0 {
            return Err(SeriesError::ZeroOrder);
        }
        if order > self.order {
            return Err(SeriesError::OrderMismatch(self.order, order));
        }
        Ok(Self { order, coeffs: self.coeffs[..num_indices(order)].to_vec() })
    }

    /// `self(X, inner(X, Y))`, truncated at the common order.
    pub fn compose(&self, inner: &TransitionSeries) -> Result<Self, SeriesError> {
        self.compose_with(&inner.powers())
    }

    /// Composition against precomputed powers of the inner series.
    pub fn compose_with(&self, powers: &InnerPowers) -> Result<Self, SeriesError> {
        if self.order != powers.order {
            return Err(SeriesError::OrderMismatch(self.order, powers.order));
        }
        // Linear in the outer coefficients: compose the rational and π parts separately.
        let a: Vec<&BigRational> = self.coeffs.iter().map(|c| &c.a).collect();
        let mut coeffs: Vec<PiRational> =
            powers.compose_rational(&a).into_iter().map(PiRational::rational).collect();
        if !self.is_rational() {
            let b: Vec<&BigRational> = self.coeffs.iter().map(|c| &c.b).collect();
            for (c, pb) in coeffs.iter_mut().zip(powers.compose_rational(&b)) {
                c.b = pb;
            }
        }
        Ok(Self { order: self.order, coeffs })
    }

    /// Formal partial derivative in `X`.
    pub fn partial_x(&self) -> Derivative {
        self.partial(true)
    }

    /// Formal partial derivative in `Y`.
    pub fn partial_y(&self) -> Derivative {
        self.partial(false)
    }

    fn partial(&self, in_x: bool) -> Derivative {
        let constant = if in_x { self.coeff(1, 0).clone() } else { self.coeff(0, 1).clone() };
        if self.order == 1 {
            return Derivative { constant, series: None };
        }
        let mut out = Self::zero(self.order - 1);
        for ((i, j), c) in self.terms() {
            let (power, di, dj) = if in_x { (i, i.wrapping_sub(1), j) } else { (j, i, j.wrapping_sub(1)) };
            if power == 0 || di + dj == 0 {
                continue;
            }
            out.coeffs[index_of(di, dj)] = c.mul_rational(&BigRational::from_integer(power.into()));
        }
        Derivative { constant, series: Some(out) }
    }

    /// Value of the truncated polynomial at `(c1, c2)`, π taken in double precision.
    pub fn eval(&self, c1: f64, c2: f64) -> f64 {
        self.to_float_poly().eval(c1, c2)
    }

    pub fn to_float_poly(&self) -> FloatPoly {
        FloatPoly::from_terms(self.terms().map(|((i, j), c)| (i, j, c.to_f64())))
    }

    /// Reduction into 𝖱_{2πX}.
    pub fn reduce_mod_2pix(&self) -> ActionSeries {
        ActionSeries(reduce_linear_coeff(self, (1, 0)))
    }
}

/// Formal derivative split into its constant term and the remaining series
/// (absent when the derivative of an order-1 series has no higher terms).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivative {
    pub constant: PiRational,
    pub series: Option<TruncatedSeries>,
}

/// Subtracts the multiple of `2π·X^i Y^j` that places that coefficient's value in `[0, 2π)`.
pub(crate) fn reduce_linear_coeff(s: &TruncatedSeries, (i, j): (u32, u32)) -> TruncatedSeries {
    let two_pi = PiRational::pi_multiple(BigRational::from_integer(2.into()));
    let c = s.coeff(i, j).clone();
    let estimate = (c.to_f64() / std::f64::consts::TAU).floor();
    let mut m = if estimate.is_finite() { BigInt::from(estimate as i64) } else { BigInt::zero() };
    let shifted = |m: &BigInt| &c - &PiRational::pi_multiple(BigRational::from_integer(m * 2));
    let zero = PiRational::zero();
    loop {
        let v = shifted(&m);
        if v < zero {
            m -= 1;
        } else if v >= two_pi {
            m += 1;
        } else {
            let mut out = s.clone();
            out.coeffs[index_of(i, j)] = v;
            return out;
        }
    }
}

/// Powers `V^1 … V^N` of a rational series `V/D` in integer form, reused
/// across compositions with the same inner series.
#[derive(Clone, Debug)]
pub struct InnerPowers {
    order: u32,
    den: BigInt,
    pows: Vec<Vec<BigInt>>,
}

impl InnerPowers {
    fn new(inner: &TruncatedSeries) -> Self {
        let n = inner.order;
        let (v, den) = scale_to_integers(inner.coeffs.iter().map(|c| &c.a));
        let mut pows = Vec::with_capacity(n as usize);
        pows.push(v.clone());
        for _ in 2..=n {
            let next = mul_trunc(pows.last().unwrap(), &v, n);
            pows.push(next);
        }
        Self { order: n, den, pows }
    }

    fn compose_rational(&self, outer: &[&BigRational]) -> Vec<BigRational> {
        let n = self.order;
        let len = num_indices(n);
        if outer.iter().all(|c| c.is_zero()) {
            return vec![BigRational::zero(); len];
        }
        let (w, e) = scale_to_integers(outer.iter().copied());
        let mut den_pows = vec![BigInt::one()];
        for m in 1..=n as usize {
            let next = &den_pows[m - 1] * &self.den;
            den_pows.push(next);
        }
        let mut acc = vec![BigInt::zero(); len];
        for ((i, j), wc) in multi_indices(n).zip(&w) {
            if wc.is_zero() {
                continue;
            }
            let factor = wc * &den_pows[(n - j) as usize];
            if j == 0 {
                acc[index_of(i, 0)] += factor;
                continue;
            }
            let room = n - i;
            for ((a, b), vc) in multi_indices(room).zip(&self.pows[(j - 1) as usize]) {
                if !vc.is_zero() {
                    acc[index_of(a + i, b)] += &factor * vc;
                }
            }
        }
        let total_den = e * &den_pows[n as usize];
        acc.into_iter().map(|num| BigRational::new(num, total_den.clone())).collect()
    }
}

/// Writes rationals as integers over their least common denominator.
fn scale_to_integers<'a>(coeffs: impl Iterator<Item = &'a BigRational> + Clone) -> (Vec<BigInt>, BigInt) {
    let den = coeffs.clone().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let nums = coeffs.map(|c| c.numer() * (&den / c.denom())).collect();
    (nums, den)
}

/// Truncated product of dense integer series of the same order.
fn mul_trunc(a: &[BigInt], b: &[BigInt], order: u32) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len()];
    for ((i1, j1), x) in multi_indices(order).zip(a) {
        if x.is_zero() {
            continue;
        }
        let room = order - (i1 + j1);
        for ((i2, j2), y) in multi_indices(room).zip(b) {
            if !y.is_zero() {
                out[index_of(i1 + i2, j1 + j2)] += x * y;
            }
        }
    }
    out
}

/// Element of 𝖱⁺: rational coefficients, positive `Y`-coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransitionSeries(TruncatedSeries);

impl TransitionSeries {
    pub fn new(series: TruncatedSeries) -> Result<Self, SeriesError> {
        if !series.is_rational() {
            return Err(SeriesError::NotRational);
        }
        if !series.coeff(0, 1).a.is_positive() {
            return Err(SeriesError::NonPositiveY);
        }
        Ok(Self(series))
    }

    /// The identity `Y` of the composition group.
    pub fn identity(order: u32) -> Self {
        Self(TruncatedSeries::y(order))
    }

    pub fn as_series(&self) -> &TruncatedSeries {
        &self.0
    }

    pub fn into_series(self) -> TruncatedSeries {
        self.0
    }

    pub fn order(&self) -> u32 {
        self.0.order
    }

    pub fn is_identity(&self) -> bool {
        self.0 == TruncatedSeries::y(self.0.order)
    }

    pub fn powers(&self) -> InnerPowers {
        InnerPowers::new(&self.0)
    }

    /// Group product `self · inner = self(X, inner(X, Y))`.
    pub fn compose(&self, inner: &TransitionSeries) -> Result<Self, SeriesError> {
        Ok(Self(self.0.compose(inner)?))
    }

    /// Compositional inverse in `Y`, solved degree by degree.
    pub fn invert(&self) -> Self {
        let n = self.order();
        let gy = self.0.coeff(0, 1).a.clone();
        let gx = self.0.coeff(1, 0).a.clone();
        let mut h = TruncatedSeries::zero(n);
        h.coeffs[index_of(1, 0)] = PiRational::rational(-gx / &gy);
        h.coeffs[index_of(0, 1)] = PiRational::rational(gy.recip());
        for d in 2..=n {
            // Degree-d part of g(X, h_{<d}) must cancel against gʏ·h_d.
            let g_d = self.0.truncate(d).expect("d <= order");
            let h_d = Self(h.truncate(d).expect("d <= order"));
            let comp = g_d.compose(&h_d).expect("orders agree");
            for (i, j) in (0..=d).map(|j| (d - j, j)) {
                let c = &comp.coeffs[index_of(i, j)];
                if !c.is_zero() {
                    h.coeffs[index_of(i, j)] = PiRational::rational(-&c.a / &gy);
                }
            }
        }
        Self(h)
    }

    pub fn flip_x(&self) -> Self {
        Self(self.0.flip_x())
    }

    /// `-g(X, -Y)`, which keeps the `Y`-coefficient positive.
    pub fn conjugate_y(&self) -> Self {
        Self(self.0.flip_y().neg())
    }

    pub fn to_float_poly(&self) -> FloatPoly {
        self.0.to_float_poly()
    }
}

/// Element of 𝖱_{2πX}, stored through the representative whose `X`-coefficient
/// lies in `[0, 2π)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ActionSeries(TruncatedSeries);

impl ActionSeries {
    /// Reduces any series into its canonical representative.
    pub fn new(series: TruncatedSeries) -> Self {
        series.reduce_mod_2pix()
    }

    pub fn zero(order: u32) -> Self {
        Self(TruncatedSeries::zero(order))
    }

    /// True when the `X`-coefficient already lies in `[0, 2π)`.
    pub fn is_reduced(series: &TruncatedSeries) -> bool {
        let c = series.coeff(1, 0);
        *c >= PiRational::zero() && *c < PiRational::pi_multiple(BigRational::from_integer(2.into()))
    }

    pub fn as_series(&self) -> &TruncatedSeries {
        &self.0
    }

    pub fn into_series(self) -> TruncatedSeries {
        self.0
    }

    pub fn order(&self) -> u32 {
        self.0.order
    }

    /// `s(X, g(X, Y))`, reduced.
    pub fn compose(&self, inner: &TransitionSeries) -> Result<Self, SeriesError> {
        Ok(self.0.compose(inner)?.reduce_mod_2pix())
    }

    pub fn compose_with(&self, powers: &InnerPowers) -> Result<Self, SeriesError> {
        Ok(self.0.compose_with(powers)?.reduce_mod_2pix())
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for ((i, j), c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            match i {
                0 => {}
                1 => write!(f, "·X")?,
                _ => write!(f, "·X^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "·Y")?,
                _ => write!(f, "·Y^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O({})", self.order + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(order: u32, terms: &[((u32, u32), (i64, i64))]) -> TruncatedSeries {
        TruncatedSeries::from_rationals(order, terms).unwrap()
    }

    fn transition(order: u32, terms: &[((u32, u32), (i64, i64))]) -> TransitionSeries {
        TransitionSeries::new(series(order, terms)).unwrap()
    }

    #[test]
    fn graded_indexing_is_dense() {
        let idx: Vec<_> = multi_indices(3).collect();
        assert_eq!(idx, vec![(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)]);
        for (pos, (i, j)) in idx.iter().enumerate() {
            assert_eq!(index_of(*i, *j), pos);
        }
        assert_eq!(num_indices(3), 9);
    }

    #[test]
    fn ring_operations() {
        let x = TruncatedSeries::x(2);
        let y = TruncatedSeries::y(2);
        assert_eq!(x.add(&y).unwrap(), series(2, &[((1, 0), (1, 1)), ((0, 1), (1, 1))]));
        let p = x.add(&y).unwrap().mul(&x.sub(&y).unwrap()).unwrap();
        assert_eq!(p, series(2, &[((2, 0), (1, 1)), ((0, 2), (-1, 1))]));
        let x2 = series(3, &[((2, 0), (1, 1))]);
        let y2 = series(3, &[((0, 2), (1, 1))]);
        assert!(x2.mul(&y2).unwrap().is_zero());
        assert_eq!(x.add(&TruncatedSeries::x(3)), Err(SeriesError::OrderMismatch(2, 3)));
    }

    #[test]
    fn pi_squared_product_is_an_error() {
        let mut a = TruncatedSeries::zero(2);
        a.set_coeff(1, 0, PiRational::pi_multiple(BigRational::one())).unwrap();
        assert_eq!(a.mul(&a), Err(SeriesError::PiSquared));
    }

    #[test]
    fn composition_examples() {
        let g = transition(2, &[((0, 1), (3, 1)), ((1, 1), (-1, 2))]);
        assert_eq!(TruncatedSeries::y(2).compose(&g).unwrap(), *g.as_series());
        let s = series(2, &[((1, 0), (1, 3)), ((0, 2), (5, 1))]);
        assert_eq!(s.compose(&TransitionSeries::identity(2)).unwrap(), s);
        let outer = series(2, &[((0, 1), (1, 1)), ((2, 0), (1, 1))]);
        let two_y = transition(2, &[((0, 1), (2, 1))]);
        assert_eq!(outer.compose(&two_y).unwrap(), series(2, &[((0, 1), (2, 1)), ((2, 0), (1, 1))]));
    }

    #[test]
    fn composition_keeps_pi_linear() {
        let mut s = TruncatedSeries::y(2);
        s.set_coeff(1, 0, PiRational::pi_multiple(BigRational::one())).unwrap();
        let g = transition(2, &[((0, 1), (2, 1)), ((1, 0), (1, 1))]);
        let c = s.compose(&g).unwrap();
        // πX + (2Y + X)
        assert_eq!(c.coeff(1, 0), &PiRational::new(BigRational::one(), BigRational::one()));
        assert_eq!(c.coeff(0, 1), &PiRational::from_integer(2));
    }

    #[test]
    fn inversion_examples() {
        assert!(TransitionSeries::identity(3).invert().is_identity());
        let g = transition(1, &[((0, 1), (2, 1)), ((1, 0), (1, 1))]);
        assert_eq!(g.invert(), transition(1, &[((0, 1), (1, 2)), ((1, 0), (-1, 2))]));
        let g = transition(2, &[((0, 1), (2, 1)), ((2, 0), (2, 1))]);
        let h = g.invert();
        // 2·(Y/2 − X²) + 2X² = Y
        assert_eq!(h, transition(2, &[((0, 1), (1, 2)), ((2, 0), (-1, 1))]));
        assert!(g.compose(&h).unwrap().is_identity());
        assert!(h.compose(&g).unwrap().is_identity());
    }

    #[test]
    fn transition_rejects_bad_linear_part() {
        assert_eq!(TransitionSeries::new(series(2, &[((1, 0), (1, 1))])), Err(SeriesError::NonPositiveY));
        assert_eq!(TransitionSeries::new(series(2, &[((0, 1), (-1, 1))])), Err(SeriesError::NonPositiveY));
        let mut s = TruncatedSeries::y(2);
        s.set_coeff(1, 1, PiRational::pi_multiple(BigRational::one())).unwrap();
        assert_eq!(TransitionSeries::new(s), Err(SeriesError::NotRational));
    }

    #[test]
    fn reduction_examples() {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert!(TruncatedSeries::zero(2).reduce_mod_2pix().as_series().is_zero());

        let mut s = TruncatedSeries::y(2);
        s.set_coeff(1, 0, PiRational::new(q(-1, 1), q(2, 1))).unwrap();
        assert_eq!(s.reduce_mod_2pix().as_series(), &s);

        let mut s = TruncatedSeries::zero(2);
        s.set_coeff(1, 0, PiRational::pi_multiple(q(5, 2))).unwrap();
        assert_eq!(s.reduce_mod_2pix().as_series().coeff(1, 0), &PiRational::pi_multiple(q(1, 2)));

        let mut s = TruncatedSeries::zero(1);
        s.set_coeff(1, 0, PiRational::from_integer(-1)).unwrap();
        assert_eq!(s.reduce_mod_2pix().as_series().coeff(1, 0), &PiRational::new(q(-1, 1), q(2, 1)));
    }

    #[test]
    fn evaluation_and_partials() {
        let s = series(2, &[((1, 0), (1, 1)), ((0, 1), (1, 1))]);
        assert_eq!(s.eval(1.0, 2.0), 3.0);
        let s = series(2, &[((0, 1), (1, 1)), ((2, 0), (1, 1))]);
        let d = s.partial_y();
        assert_eq!(d.constant, PiRational::one());
        assert!(d.series.unwrap().is_zero());
        let dx = s.partial_x();
        assert!(dx.constant.is_zero());
        assert_eq!(dx.series.unwrap(), series(1, &[((1, 0), (2, 1))]));
        let mut p = TruncatedSeries::zero(1);
        p.set_coeff(1, 0, PiRational::pi_multiple(BigRational::one())).unwrap();
        assert!((p.eval(2.0, 0.0) - std::f64::consts::TAU).abs() < 1e-15);
    }
}
