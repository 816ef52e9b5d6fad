//! Real polynomials in `(c1, c2)` without constant term.

use crate::dual::Real;

/// Sparse polynomial `Σ a_ij c1^i c2^j` with double-precision coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FloatPoly {
    terms: Vec<(u32, u32, f64)>,
}

impl FloatPoly {
    /// Builds from `(i, j, a_ij)`; zero coefficients are dropped, repeated indices add up.
    pub fn from_terms(terms: impl IntoIterator<Item = (u32, u32, f64)>) -> Self {
        let mut out: Vec<(u32, u32, f64)> = Vec::new();
        for (i, j, a) in terms {
            match out.iter_mut().find(|t| t.0 == i && t.1 == j) {
                Some(t) => t.2 += a,
                None => out.push((i, j, a)),
            }
        }
        out.retain(|t| t.2 != 0.0);
        out.sort_by_key(|&(i, j, _)| (i + j, std::cmp::Reverse(i)));
        Self { terms: out }
    }

    /// The polynomial `c2`.
    pub fn c2() -> Self {
        Self::from_terms([(0, 1, 1.0)])
    }

    pub fn terms(&self) -> &[(u32, u32, f64)] {
        &self.terms
    }

    pub fn coeff(&self, i: u32, j: u32) -> f64 {
        self.terms.iter().find(|t| t.0 == i && t.1 == j).map_or(0.0, |t| t.2)
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.0 + t.1).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, c1: f64, c2: f64) -> f64 {
        self.eval_real(c1, c2)
    }

    pub fn eval_real<R: Real>(&self, c1: R, c2: R) -> R {
        self.terms
            .iter()
            .fold(R::cst(0.0), |acc, &(i, j, a)| acc + c1.powi(i as i32) * c2.powi(j as i32) * R::cst(a))
    }

    /// Partial derivative in `c1`; may contain a constant term.
    pub fn d1(&self) -> Self {
        Self::from_terms(
            self.terms.iter().filter(|t| t.0 > 0).map(|&(i, j, a)| (i - 1, j, a * i as f64)),
        )
    }

    /// Partial derivative in `c2`; may contain a constant term.
    pub fn d2(&self) -> Self {
        Self::from_terms(
            self.terms.iter().filter(|t| t.1 > 0).map(|&(i, j, a)| (i, j - 1, a * j as f64)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_derivatives() {
        let p = FloatPoly::from_terms([(0, 1, 2.0), (2, 1, 3.0), (1, 0, -1.0)]);
        assert_eq!(p.eval(2.0, 1.0), 2.0 + 12.0 - 2.0);
        assert_eq!(p.d1().eval(2.0, 1.0), 12.0 - 1.0);
        assert_eq!(p.d2().eval(2.0, 5.0), 2.0 + 12.0);
        assert_eq!(p.degree(), 3);
        assert_eq!(p.coeff(0, 0), 0.0);
        assert_eq!(p.d2().coeff(0, 0), 2.0);
    }
}
