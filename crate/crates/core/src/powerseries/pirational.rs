//! Exact scalars of the form `a + bπ` with rational `a`, `b`.
//!
//! Equality is structural (π is irrational). Ordering decides the sign of
//! `a + bπ` by comparing `-a/b` against rational enclosures of π that are
//! refined until they separate the two.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::SeriesError;

/// The real number `a + bπ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PiRational {
    pub a: BigRational,
    pub b: BigRational,
}

impl PiRational {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        Self { a, b }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::rational(BigRational::one())
    }

    pub fn rational(a: BigRational) -> Self {
        Self { a, b: BigRational::zero() }
    }

    /// `b·π`.
    pub fn pi_multiple(b: BigRational) -> Self {
        Self { a: BigRational::zero(), b }
    }

    /// `num/den` with `den != 0`.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::rational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// True when the π-part vanishes.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Double-precision value, π replaced by `std::f64::consts::PI`.
    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.a) + ratio_to_f64(&self.b) * std::f64::consts::PI
    }

    pub fn mul_rational(&self, r: &BigRational) -> Self {
        Self { a: &self.a * r, b: &self.b * r }
    }

    /// Product; fails when both factors carry a π-part (the result would need π²).
    pub fn checked_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        match (self.is_rational(), other.is_rational()) {
            (true, _) => Ok(other.mul_rational(&self.a)),
            (_, true) => Ok(self.mul_rational(&other.a)),
            _ => Err(SeriesError::PiSquared),
        }
    }

    /// Sign of the real value `a + bπ`, decided exactly.
    pub fn signum(&self) -> Ordering {
        if self.b.is_zero() {
            return self.a.cmp(&BigRational::zero());
        }
        // a + bπ has the sign of b·(π - x) with x = -a/b
        let x = -&self.a / &self.b;
        let pi_vs_x = compare_pi(&x);
        if self.b.is_positive() {
            pi_vs_x
        } else {
            pi_vs_x.reverse()
        }
    }
}

impl Ord for PiRational {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        (self.clone() - other.clone()).signum()
    }
}

impl PartialOrd for PiRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for PiRational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { a: self.a + rhs.a, b: self.b + rhs.b }
    }
}

impl<'a> Add<&'a PiRational> for &'a PiRational {
    type Output = PiRational;
    fn add(self, rhs: &PiRational) -> PiRational {
        PiRational { a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }
}

impl AddAssign<&PiRational> for PiRational {
    fn add_assign(&mut self, rhs: &PiRational) {
        self.a += &rhs.a;
        self.b += &rhs.b;
    }
}

impl Sub for PiRational {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { a: self.a - rhs.a, b: self.b - rhs.b }
    }
}

impl<'a> Sub<&'a PiRational> for &'a PiRational {
    type Output = PiRational;
    fn sub(self, rhs: &PiRational) -> PiRational {
        PiRational { a: &self.a - &rhs.a, b: &self.b - &rhs.b }
    }
}

impl SubAssign<&PiRational> for PiRational {
    fn sub_assign(&mut self, rhs: &PiRational) {
        self.a -= &rhs.a;
        self.b -= &rhs.b;
    }
}

impl Neg for PiRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self { a: -self.a, b: -self.b }
    }
}

impl Neg for &PiRational {
    type Output = PiRational;
    fn neg(self) -> PiRational {
        PiRational { a: -&self.a, b: -&self.b }
    }
}

impl fmt::Display for PiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}π", self.b),
            (false, false) => write!(f, "{} + {}π", self.a, self.b),
        }
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Huge numerators/denominators: shift both down before dividing.
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
    n / d
}

const CACHED_LEVELS: usize = 8;

static PI_LEVELS: [OnceLock<(BigRational, BigRational)>; CACHED_LEVELS] =
    [const { OnceLock::new() }; CACHED_LEVELS];

/// Rational `(lo, hi)` with `lo < π < hi`; tighter for larger `level`.
pub fn pi_enclosure(level: usize) -> (BigRational, BigRational) {
    if level < CACHED_LEVELS {
        PI_LEVELS[level].get_or_init(|| compute_pi_enclosure(level)).clone()
    } else {
        compute_pi_enclosure(level)
    }
}

fn compute_pi_enclosure(level: usize) -> (BigRational, BigRational) {
    if level == 0 {
        return (
            BigRational::new(314159.into(), 100000.into()),
            BigRational::new(31416.into(), 10000.into()),
        );
    }
    // Machin: π = 16·atan(1/5) − 4·atan(1/239)
    let terms = 1usize << (level + 1);
    let (a_lo, a_hi) = atan_inv_enclosure(5, terms);
    let (b_lo, b_hi) = atan_inv_enclosure(239, terms);
    let sixteen = BigRational::from_integer(16.into());
    let four = BigRational::from_integer(4.into());
    (&sixteen * a_lo - &four * b_hi, &sixteen * a_hi - &four * b_lo)
}

/// Bracket `atan(1/m)` between consecutive partial sums of its alternating series.
fn atan_inv_enclosure(m: i64, terms: usize) -> (BigRational, BigRational) {
    let m = BigInt::from(m);
    let m2 = &m * &m;
    let mut power = m.clone();
    let mut sum = BigRational::zero();
    let mut last_term = BigRational::zero();
    for i in 0..=terms {
        let term = BigRational::new(BigInt::one(), BigInt::from(2 * i + 1) * &power);
        if i == terms {
            last_term = term;
            break;
        }
        if i % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power *= &m2;
    }
    // The next partial sum differs by ±last_term, with sign (-1)^terms.
    let next = if terms % 2 == 0 { &sum + &last_term } else { &sum - &last_term };
    if sum < next {
        (sum, next)
    } else {
        (next, sum)
    }
}

/// Ordering of π relative to the rational `x`.
fn compare_pi(x: &BigRational) -> Ordering {
    let mut level = 0;
    loop {
        let (lo, hi) = pi_enclosure(level);
        if *x < lo {
            return Ordering::Greater;
        }
        if *x > hi {
            return Ordering::Less;
        }
        level += 1;
    }
}
