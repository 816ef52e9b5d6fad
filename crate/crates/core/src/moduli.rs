//! Invariant tuples, their constraints, and the `Z₂ × D_k` action.
//!
//! Cocycle convention: `g_{j,p} = g_{ℓ,p}(X, g_{j,ℓ}(X, Y))`, written
//! `compose(g_{ℓ,p}, g_{j,ℓ})`, and `s_j = s_ℓ(X, g_{j,ℓ}(X, Y))` modulo `2πX`.

use std::fmt;

use num_rational::BigRational;
use thiserror::Error;

use crate::powerseries::{
    ActionSeries, InnerPowers, PiRational, SeriesError, TransitionSeries, TruncatedSeries,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuliError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("expected {expected} {what}, found {found}")]
    Shape { what: &'static str, expected: usize, found: usize },
    #[error("tuples differ in k ({0} vs {1})")]
    KMismatch(usize, usize),
    #[error("constraints violated: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "))]
    Constraints(Vec<Violation>),
}

/// `(s₀; g_{0,1}, …, g_{k-2,k-1})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InvariantTupleMinimal {
    k: usize,
    s0: ActionSeries,
    g_consec: Vec<TransitionSeries>,
}

impl InvariantTupleMinimal {
    pub fn new(k: usize, s0: ActionSeries, g_consec: Vec<TransitionSeries>) -> Result<Self, ModuliError> {
        if k == 0 {
            return Err(ModuliError::ZeroK);
        }
        if g_consec.len() != k - 1 {
            return Err(ModuliError::Shape { what: "consecutive transitions", expected: k - 1, found: g_consec.len() });
        }
        let n = s0.order();
        if let Some(g) = g_consec.iter().find(|g| g.order() != n) {
            return Err(SeriesError::OrderMismatch(n, g.order()).into());
        }
        Ok(Self { k, s0, g_consec })
    }

    /// All-zero data: `s₀ = 0` and identity transitions.
    pub fn zero(k: usize, order: u32) -> Self {
        Self::new(k, ActionSeries::zero(order), vec![TransitionSeries::identity(order); k - 1])
            .expect("consistent shape")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.s0.order()
    }

    pub fn s0(&self) -> &ActionSeries {
        &self.s0
    }

    /// `g_{t,t+1}` for `t = 0, …, k-2`.
    pub fn g_consec(&self) -> &[TransitionSeries] {
        &self.g_consec
    }
}

/// `(s_j)_{j ∈ Z_k}` and `(g_{j,ℓ})_{j,ℓ ∈ Z_k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InvariantTupleFull {
    k: usize,
    s: Vec<ActionSeries>,
    g: Vec<Vec<TransitionSeries>>,
}

impl InvariantTupleFull {
    /// Checks shapes and orders only; see [`check_constraints`] for the relations.
    pub fn new(s: Vec<ActionSeries>, g: Vec<Vec<TransitionSeries>>) -> Result<Self, ModuliError> {
        let k = s.len();
        if k == 0 {
            return Err(ModuliError::ZeroK);
        }
        if g.len() != k {
            return Err(ModuliError::Shape { what: "transition rows", expected: k, found: g.len() });
        }
        if let Some(row) = g.iter().find(|row| row.len() != k) {
            return Err(ModuliError::Shape { what: "transition columns", expected: k, found: row.len() });
        }
        let n = s[0].order();
        let orders = s.iter().map(ActionSeries::order).chain(g.iter().flatten().map(TransitionSeries::order));
        for o in orders {
            if o != n {
                return Err(SeriesError::OrderMismatch(n, o).into());
            }
        }
        Ok(Self { k, s, g })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.s[0].order()
    }

    pub fn s(&self, j: usize) -> &ActionSeries {
        &self.s[j % self.k]
    }

    pub fn g(&self, j: usize, l: usize) -> &TransitionSeries {
        &self.g[j % self.k][l % self.k]
    }

    pub fn s_all(&self) -> &[ActionSeries] {
        &self.s
    }

    pub fn set_s(&mut self, j: usize, s: ActionSeries) -> Result<(), ModuliError> {
        if s.order() != self.order() {
            return Err(SeriesError::OrderMismatch(self.order(), s.order()).into());
        }
        self.s[j % self.k] = s;
        Ok(())
    }

    pub fn set_g(&mut self, j: usize, l: usize, g: TransitionSeries) -> Result<(), ModuliError> {
        if g.order() != self.order() {
            return Err(SeriesError::OrderMismatch(self.order(), g.order()).into());
        }
        self.g[j % self.k][l % self.k] = g;
        Ok(())
    }

    /// `s₀` followed by `g_{0,1}, …, g_{k-2,k-1}`, coefficient by coefficient.
    fn ordering_key(&self) -> Vec<&PiRational> {
        let mut key: Vec<&PiRational> = self.s[0].as_series().coefficients().iter().collect();
        for t in 0..self.k - 1 {
            key.extend(self.g[t][t + 1].as_series().coefficients());
        }
        key
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Violation {
    /// `g_{j,j} ≠ Y`.
    Identity { j: usize },
    /// `g_{ℓ,p}(X, g_{j,ℓ}) ≠ g_{j,p}`.
    Cocycle { j: usize, l: usize, p: usize },
    /// `s_ℓ(X, g_{j,ℓ}) ≠ s_j` modulo `2πX`.
    Compatibility { j: usize, l: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Identity { j } => write!(f, "identity g[{j},{j}]"),
            Violation::Cocycle { j, l, p } => write!(f, "cocycle ({j},{l},{p})"),
            Violation::Compatibility { j, l } => write!(f, "compatibility ({j},{l})"),
        }
    }
}

/// Full tuple generated by minimal data.
pub fn expand(min: &InvariantTupleMinimal) -> InvariantTupleFull {
    let k = min.k;
    let n = min.order();
    let mut g = vec![vec![TransitionSeries::identity(n); k]; k];
    for t in 0..k.saturating_sub(1) {
        g[t][t + 1] = min.g_consec[t].clone();
        g[t + 1][t] = min.g_consec[t].invert();
    }
    for span in 2..k {
        for j in 0..k - span {
            let l = j + span;
            let fwd = g[l - 1][l].compose(&g[j][l - 1]).expect("orders agree");
            let back = g[j + 1][j].compose(&g[l][j + 1]).expect("orders agree");
            g[j][l] = fwd;
            g[l][j] = back;
        }
    }
    let s = (0..k)
        .map(|j| min.s0.compose(&g[j][0]).expect("orders agree"))
        .collect();
    InvariantTupleFull { k, s, g }
}

/// Every violated relation, in the order identity, cocycle, compatibility.
pub fn check_constraints(full: &InvariantTupleFull) -> Vec<Violation> {
    let k = full.k;
    let mut out = Vec::new();
    for j in 0..k {
        if !full.g[j][j].is_identity() {
            out.push(Violation::Identity { j });
        }
    }
    let powers: Vec<Vec<InnerPowers>> =
        full.g.iter().map(|row| row.iter().map(TransitionSeries::powers).collect()).collect();
    for j in 0..k {
        for l in 0..k {
            for p in 0..k {
                let composed = full.g[l][p].as_series().compose_with(&powers[j][l]).expect("orders agree");
                if &composed != full.g[j][p].as_series() {
                    out.push(Violation::Cocycle { j, l, p });
                }
            }
        }
    }
    for j in 0..k {
        for l in 0..k {
            let composed = full.s[l].compose_with(&powers[j][l]).expect("orders agree");
            if composed != full.s[j] {
                out.push(Violation::Compatibility { j, l });
            }
        }
    }
    out
}

/// Inverse of [`expand`] on constraint-satisfying tuples.
pub fn reduce_to_minimal(full: &InvariantTupleFull) -> Result<InvariantTupleMinimal, ModuliError> {
    let violations = check_constraints(full);
    if !violations.is_empty() {
        return Err(ModuliError::Constraints(violations));
    }
    Ok(InvariantTupleMinimal {
        k: full.k,
        s0: full.s[0].clone(),
        g_consec: (0..full.k.saturating_sub(1)).map(|t| full.g[t][t + 1].clone()).collect(),
    })
}

/// `γ_X^x ∘ θ^rot ∘ γ_Y^y` in `Z₂ × D_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub k: usize,
    pub x_flip: bool,
    pub rot: usize,
    pub y_flip: bool,
}

impl GroupElement {
    pub fn new(k: usize, x_flip: bool, rot: i64, y_flip: bool) -> Self {
        assert!(k >= 1, "k must be at least 1");
        Self { k, x_flip, rot: rot.rem_euclid(k as i64) as usize, y_flip }
    }

    pub fn identity(k: usize) -> Self {
        Self::new(k, false, 0, false)
    }

    pub fn gamma_x(k: usize) -> Self {
        Self::new(k, true, 0, false)
    }

    pub fn gamma_y(k: usize) -> Self {
        Self::new(k, false, 0, true)
    }

    pub fn theta(k: usize, p: i64) -> Self {
        Self::new(k, false, p, false)
    }

    pub fn is_identity(&self) -> bool {
        !self.x_flip && self.rot == 0 && !self.y_flip
    }

    /// `self ∘ other`: act by `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.k, other.k, "group elements for different k");
        let r2 = if self.y_flip { -(other.rot as i64) } else { other.rot as i64 };
        Self::new(self.k, self.x_flip ^ other.x_flip, self.rot as i64 + r2, self.y_flip ^ other.y_flip)
    }

    pub fn inverse(&self) -> Self {
        let r = if self.y_flip { self.rot as i64 } else { -(self.rot as i64) };
        Self::new(self.k, self.x_flip, r, self.y_flip)
    }

    /// All `4k` elements: `x_flip` outermost, then `y_flip`, then `rot`.
    pub fn enumerate(k: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(4 * k);
        for x in [false, true] {
            for y in [false, true] {
                for r in 0..k {
                    out.push(Self::new(k, x, r as i64, y));
                }
            }
        }
        out
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gx={} rot={} gy={}", u8::from(self.x_flip), self.rot, u8::from(self.y_flip))
    }
}

fn apply_gamma_x(d: &InvariantTupleFull) -> InvariantTupleFull {
    let k = d.k;
    let offset = PiRational::pi_multiple(BigRational::from_integer((k as i64).into()));
    let shift = TruncatedSeries::x(d.order()).scale(&offset).expect("rational scale");
    let s = d
        .s
        .iter()
        .map(|s| s.as_series().flip_x().add(&shift).expect("orders agree").reduce_mod_2pix())
        .collect();
    let g = d.g.iter().map(|row| row.iter().map(TransitionSeries::flip_x).collect()).collect();
    InvariantTupleFull { k, s, g }
}

fn apply_gamma_y(d: &InvariantTupleFull) -> InvariantTupleFull {
    let k = d.k;
    let neg = |j: usize| (k - j) % k;
    let s = (0..k)
        .map(|j| d.s[neg(j)].as_series().flip_y().neg().reduce_mod_2pix())
        .collect();
    let g = (0..k)
        .map(|j| (0..k).map(|l| d.g[neg(j)][neg(l)].conjugate_y()).collect())
        .collect();
    InvariantTupleFull { k, s, g }
}

fn apply_theta(d: &InvariantTupleFull, p: usize) -> InvariantTupleFull {
    let k = d.k;
    let s = (0..k).map(|j| d.s[(j + p) % k].clone()).collect();
    let g = (0..k)
        .map(|j| (0..k).map(|l| d.g[(j + p) % k][(l + p) % k].clone()).collect())
        .collect();
    InvariantTupleFull { k, s, g }
}

/// Image of `d` under `g`: `γ_Y` first, then the rotation, then `γ_X`.
pub fn act(g: &GroupElement, d: &InvariantTupleFull) -> InvariantTupleFull {
    assert_eq!(g.k, d.k, "group element and tuple disagree on k");
    let mut out = if g.y_flip { apply_gamma_y(d) } else { d.clone() };
    if g.rot != 0 {
        out = apply_theta(&out, g.rot);
    }
    if g.x_flip {
        out = apply_gamma_x(&out);
    }
    out
}

/// Least orbit element under the coefficient ordering, with the first group
/// element (in [`GroupElement::enumerate`] order) reaching it.
pub fn canonicalize(d: &InvariantTupleFull) -> (InvariantTupleFull, GroupElement) {
    let mut best: Option<(InvariantTupleFull, GroupElement)> = None;
    for g in GroupElement::enumerate(d.k) {
        let image = act(&g, d);
        let better = match &best {
            None => true,
            Some((b, _)) => image.ordering_key() < b.ordering_key(),
        };
        if better {
            best = Some((image, g));
        }
    }
    best.expect("orbit is non-empty")
}

pub fn equivalent(d1: &InvariantTupleFull, d2: &InvariantTupleFull) -> Result<bool, ModuliError> {
    if d1.k != d2.k {
        return Err(ModuliError::KMismatch(d1.k, d2.k));
    }
    if d1.order() != d2.order() {
        return Err(SeriesError::OrderMismatch(d1.order(), d2.order()).into());
    }
    Ok(canonicalize(d1).0 == canonicalize(d2).0)
}

/// `(S)^∞(X, Y) = s(Y, X) − (π/2)Y`, reduced so the `Y`-coefficient lies in `[0, 2π)`.
pub fn to_vungoc(s: &ActionSeries) -> TruncatedSeries {
    let half_pi_y = TruncatedSeries::y(s.order())
        .scale(&PiRational::pi_multiple(BigRational::new(1.into(), 2.into())))
        .expect("rational scale");
    let swapped = s.as_series().swap_xy().sub(&half_pi_y).expect("orders agree");
    crate::powerseries::reduce_linear_coeff(&swapped, (0, 1))
}

/// Inverse of [`to_vungoc`]: `s(X, Y) = S(Y, X) + (π/2)X` modulo `2πX`.
pub fn from_vungoc(big_s: &TruncatedSeries) -> ActionSeries {
    let half_pi_x = TruncatedSeries::x(big_s.order())
        .scale(&PiRational::pi_multiple(BigRational::new(1.into(), 2.into())))
        .expect("rational scale");
    big_s.swap_xy().add(&half_pi_x).expect("orders agree").reduce_mod_2pix()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(order: u32, terms: &[((u32, u32), (i64, i64))]) -> TransitionSeries {
        TransitionSeries::new(TruncatedSeries::from_rationals(order, terms).unwrap()).unwrap()
    }

    fn a(order: u32, terms: &[((u32, u32), (i64, i64))]) -> ActionSeries {
        ActionSeries::new(TruncatedSeries::from_rationals(order, terms).unwrap())
    }

    #[test]
    fn expand_k1_is_trivial() {
        let min = InvariantTupleMinimal::new(1, a(2, &[((0, 1), (1, 1))]), vec![]).unwrap();
        let full = expand(&min);
        assert!(full.g(0, 0).is_identity());
        assert_eq!(full.s(0), min.s0());
        assert!(check_constraints(&full).is_empty());
    }

    #[test]
    fn expand_k2_example() {
        let min = InvariantTupleMinimal::new(2, a(2, &[((0, 1), (1, 1))]), vec![t(2, &[((0, 1), (2, 1))])]).unwrap();
        let full = expand(&min);
        assert_eq!(full.g(1, 0), &t(2, &[((0, 1), (1, 2))]));
        assert_eq!(full.s(1), &a(2, &[((0, 1), (1, 2))]));
        assert!(check_constraints(&full).is_empty());
        assert_eq!(reduce_to_minimal(&full).unwrap(), min);
    }

    #[test]
    fn expand_k3_chain() {
        let min = InvariantTupleMinimal::new(
            3,
            ActionSeries::zero(2),
            vec![t(2, &[((0, 1), (1, 1)), ((2, 0), (1, 1))]), t(2, &[((0, 1), (2, 1))])],
        )
        .unwrap();
        let full = expand(&min);
        assert_eq!(full.g(0, 2), &t(2, &[((0, 1), (2, 1)), ((2, 0), (2, 1))]));
        assert!(check_constraints(&full).is_empty());
    }

    #[test]
    fn violations_are_reported() {
        let min = InvariantTupleMinimal::new(2, a(2, &[((0, 1), (1, 1))]), vec![t(2, &[((0, 1), (2, 1))])]).unwrap();
        let mut full = expand(&min);
        full.set_g(1, 0, TransitionSeries::identity(2)).unwrap();
        let v = check_constraints(&full);
        assert!(v.contains(&Violation::Cocycle { j: 1, l: 0, p: 1 }));
        assert!(v.contains(&Violation::Compatibility { j: 1, l: 0 }));

        let mut full = expand(&min);
        full.set_g(0, 0, t(2, &[((0, 1), (2, 1))])).unwrap();
        assert!(check_constraints(&full).contains(&Violation::Identity { j: 0 }));
        assert!(matches!(reduce_to_minimal(&full), Err(ModuliError::Constraints(_))));
    }

    #[test]
    fn group_relations() {
        assert_eq!(GroupElement::enumerate(1).len(), 4);
        for k in 1..6 {
            let gy = GroupElement::gamma_y(k);
            assert!(gy.compose(&gy).is_identity());
            assert_eq!(GroupElement::theta(k, 1).compose(&gy), gy.compose(&GroupElement::theta(k, k as i64 - 1)));
            for g in GroupElement::enumerate(k) {
                assert!(g.compose(&g.inverse()).is_identity());
            }
        }
    }

    #[test]
    fn act_examples() {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let min = InvariantTupleMinimal::new(2, a(1, &[((1, 0), (1, 1))]), vec![TransitionSeries::identity(1)]).unwrap();
        let full = expand(&min);
        let img = act(&GroupElement::gamma_x(2), &full);
        for j in 0..2 {
            assert_eq!(img.s(j).as_series().coeff(1, 0), &PiRational::new(q(-1, 1), q(2, 1)));
        }
        assert!(check_constraints(&img).is_empty());

        let min = InvariantTupleMinimal::new(2, ActionSeries::zero(2), vec![t(2, &[((0, 1), (2, 1))])]).unwrap();
        let full = expand(&min);
        let img = act(&GroupElement::gamma_y(2), &full);
        // γ_Y sends index 1 to -1 = 1, so g'_{1,0} = -g_{1,0}(X,-Y) = Y/2
        assert_eq!(img.g(1, 0), &t(2, &[((0, 1), (1, 2))]));
        assert_eq!(act(&GroupElement::theta(2, 0), &full), full);
    }

    #[test]
    fn canonical_forms() {
        let min = InvariantTupleMinimal::new(1, a(2, &[((0, 1), (1, 1))]), vec![]).unwrap();
        let full = expand(&min);
        let (c, _) = canonicalize(&full);
        let (c2, g2) = canonicalize(&c);
        assert_eq!(c2, c);
        assert!(g2.is_identity());
        assert!(equivalent(&full, &act(&GroupElement::gamma_x(1), &full)).unwrap());
    }

    #[test]
    fn vungoc_examples() {
        let half_pi_x = {
            let mut s = TruncatedSeries::zero(2);
            s.set_coeff(1, 0, PiRational::pi_multiple(BigRational::new(1.into(), 2.into()))).unwrap();
            ActionSeries::new(s)
        };
        assert!(to_vungoc(&half_pi_x).is_zero());
        let y = a(2, &[((0, 1), (1, 1))]);
        let big_s = to_vungoc(&y);
        // X − (π/2)Y with the Y-coefficient taken in [0, 2π)
        assert_eq!(big_s.coeff(1, 0), &PiRational::one());
        assert_eq!(big_s.coeff(0, 1), &PiRational::pi_multiple(BigRational::new(3.into(), 2.into())));
        assert_eq!(from_vungoc(&big_s), y);
    }
}
