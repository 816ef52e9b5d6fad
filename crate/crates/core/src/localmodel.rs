//! The focus-focus normal form `(ℝ⁴, ω₀, q = zζ)`.
//!
//! Real coordinates are ordered `(x1, ξ1, x2, ξ2)` with `z = x1 + i·x2` and
//! `ζ = ξ2 + i·ξ1`. Base values `c = c1 + i·c2` are complex numbers.

use num_complex::Complex64;
use thiserror::Error;

use crate::dual::{Cx, Jet, Real};
use crate::poly::FloatPoly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalError {
    #[error("singular base value c = 0")]
    SingularBase,
    #[error("point outside the map's domain: {0}")]
    Domain(&'static str),
    #[error("base value {value:e} outside domain radius {radius:e}")]
    OutOfRange { value: f64, radius: f64 },
    #[error("invalid base diffeomorphism: {0}")]
    InvalidDiffeo(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalPoint {
    pub z: Complex64,
    pub zeta: Complex64,
}

impl LocalPoint {
    pub fn new(z: Complex64, zeta: Complex64) -> Self {
        Self { z, zeta }
    }

    /// The point `(1, c)` of the section over `c`.
    pub fn section(c: Complex64) -> Self {
        Self::new(Complex64::new(1.0, 0.0), c)
    }

    pub fn is_regular(&self) -> bool {
        self.z != Complex64::new(0.0, 0.0) && self.zeta != Complex64::new(0.0, 0.0)
    }

    pub fn on_unstable_plane(&self) -> bool {
        self.z == Complex64::new(0.0, 0.0)
    }

    pub fn on_stable_plane(&self) -> bool {
        self.zeta == Complex64::new(0.0, 0.0)
    }

    /// `(x1, ξ1, x2, ξ2)`.
    pub fn to_real(&self) -> [f64; 4] {
        [self.z.re, self.zeta.im, self.z.im, self.zeta.re]
    }

    pub fn from_real(x: [f64; 4]) -> Self {
        Self::new(Complex64::new(x[0], x[2]), Complex64::new(x[3], x[1]))
    }

    pub fn generic<R: Real>(&self) -> Pt<R> {
        Pt { z: Cx::cst(self.z.re, self.z.im), zeta: Cx::cst(self.zeta.re, self.zeta.im) }
    }

    /// Largest componentwise distance.
    pub fn dist(&self, other: &Self) -> f64 {
        (self.z - other.z).norm().max((self.zeta - other.zeta).norm())
    }
}

/// Point of the model over a generic scalar, used for differentiation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pt<R> {
    pub z: Cx<R>,
    pub zeta: Cx<R>,
}

impl<R: Real> Pt<R> {
    pub fn q(&self) -> Cx<R> {
        self.z * self.zeta
    }

    pub fn value(&self) -> LocalPoint {
        LocalPoint::new(self.z.val(), self.zeta.val())
    }

    fn real_coords(&self) -> [R; 4] {
        [self.z.re, self.zeta.im, self.z.im, self.zeta.re]
    }
}

/// `t1·dc1 + t2·dc2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BaseCovector {
    pub t1: f64,
    pub t2: f64,
}

impl BaseCovector {
    pub fn new(t1: f64, t2: f64) -> Self {
        Self { t1, t2 }
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.t1 * k, self.t2 * k)
    }

    pub fn norm(self) -> f64 {
        self.t1.abs().max(self.t2.abs())
    }
}

impl std::ops::Add for BaseCovector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.t1 + o.t1, self.t2 + o.t2)
    }
}

impl std::ops::Sub for BaseCovector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.t1 - o.t1, self.t2 - o.t2)
    }
}

impl std::ops::Neg for BaseCovector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.t1, -self.t2)
    }
}

pub fn q_momentum(p: &LocalPoint) -> Complex64 {
    p.z * p.zeta
}

/// Time-one map of the covector `t1·dc1 + t2·dc2`.
pub fn flow(p: &LocalPoint, beta: BaseCovector) -> LocalPoint {
    flow_generic(p.generic::<f64>(), f64::cst(beta.t1), f64::cst(beta.t2)).value()
}

pub fn flow_generic<R: Real>(p: Pt<R>, t1: R, t2: R) -> Pt<R> {
    Pt {
        z: Cx::new(-t2, -t1).exp() * p.z,
        zeta: Cx::new(t2, t1).exp() * p.zeta,
    }
}

/// `κ(c) = (−arg c, −ln|c|)`.
pub fn kappa_at(c: Complex64) -> Result<BaseCovector, LocalError> {
    if c == Complex64::new(0.0, 0.0) {
        return Err(LocalError::SingularBase);
    }
    Ok(BaseCovector::new(-c.arg(), -c.norm().ln()))
}

/// `G*κ(c) = (−ln|G(c)|·∂1g − arg G(c), −ln|G(c)|·∂2g)`.
pub fn kappa_pullback(g: &BaseDiffeo, c: Complex64) -> Result<BaseCovector, LocalError> {
    g.check_range(c)?;
    let gc = g.apply(c);
    if gc == Complex64::new(0.0, 0.0) {
        return Err(LocalError::SingularBase);
    }
    let (g1, g2) = g.gradient(c);
    let l = gc.norm().ln();
    Ok(BaseCovector::new(-l * g1 - gc.arg(), -l * g2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Extended `Ψ_κ`: forward `(z²ζ, 1/z)` on `z ≠ 0`, inverse `(1/ζ, zζ²)` on `ζ ≠ 0`.
pub fn psi_kappa(p: &LocalPoint, dir: Direction) -> Result<LocalPoint, LocalError> {
    Ok(psi_kappa_generic(p.generic::<f64>(), dir)?.value())
}

pub fn psi_kappa_generic<R: Real>(p: Pt<R>, dir: Direction) -> Result<Pt<R>, LocalError> {
    match dir {
        Direction::Forward => {
            if p.z.val() == Complex64::new(0.0, 0.0) {
                return Err(LocalError::Domain("forward Ψ_κ needs z ≠ 0"));
            }
            Ok(Pt { z: p.z * p.z * p.zeta, zeta: p.z.recip() })
        }
        Direction::Inverse => {
            if p.zeta.val() == Complex64::new(0.0, 0.0) {
                return Err(LocalError::Domain("inverse Ψ_κ needs ζ ≠ 0"));
            }
            Ok(Pt { z: p.zeta.recip(), zeta: p.z * p.zeta * p.zeta })
        }
    }
}

/// `G(c1, c2) = (c1, g(c1, c2))` with `∂g/∂c2 > 0` on a closed disk.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseDiffeo {
    g: FloatPoly,
    dg1: FloatPoly,
    dg2: FloatPoly,
    domain_radius: f64,
}

impl BaseDiffeo {
    pub fn new(g: FloatPoly, domain_radius: f64) -> Result<Self, LocalError> {
        if !(domain_radius > 0.0 && domain_radius.is_finite()) {
            return Err(LocalError::InvalidDiffeo(format!("domain radius {domain_radius}")));
        }
        if g.coeff(0, 0) != 0.0 {
            return Err(LocalError::InvalidDiffeo("nonzero constant term".into()));
        }
        if g.coeff(0, 1) <= 0.0 {
            return Err(LocalError::InvalidDiffeo("linear c2-coefficient must be positive".into()));
        }
        let d = Self { dg1: g.d1(), dg2: g.d2(), g, domain_radius };
        for c in disk_grid(domain_radius, 12, 32) {
            let (_, g2) = d.gradient(c);
            if g2 <= 0.0 {
                return Err(LocalError::InvalidDiffeo(format!("∂g/∂c2 = {g2:e} at c = {c}")));
            }
        }
        Ok(d)
    }

    pub fn identity(domain_radius: f64) -> Self {
        Self::new(FloatPoly::c2(), domain_radius).expect("identity is valid")
    }

    pub fn poly(&self) -> &FloatPoly {
        &self.g
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    pub fn apply(&self, c: Complex64) -> Complex64 {
        Complex64::new(c.re, self.g.eval(c.re, c.im))
    }

    /// `(∂g/∂c1, ∂g/∂c2)` at `c`.
    pub fn gradient(&self, c: Complex64) -> (f64, f64) {
        (self.dg1.eval(c.re, c.im), self.dg2.eval(c.re, c.im))
    }

    pub fn g_generic<R: Real>(&self, c1: R, c2: R) -> R {
        self.g.eval_real(c1, c2)
    }

    pub fn gradient_generic<R: Real>(&self, c1: R, c2: R) -> (R, R) {
        (self.dg1.eval_real(c1, c2), self.dg2.eval_real(c1, c2))
    }

    fn check_range(&self, c: Complex64) -> Result<(), LocalError> {
        let limit = self.domain_radius * (1.0 + 1e-9);
        if c.norm() > limit {
            return Err(LocalError::OutOfRange { value: c.norm(), radius: self.domain_radius });
        }
        Ok(())
    }
}

/// Points of the closed disk on `rings` circles and `angles` rays, centre included.
pub(crate) fn disk_grid(radius: f64, rings: usize, angles: usize) -> impl Iterator<Item = Complex64> {
    std::iter::once(Complex64::new(0.0, 0.0)).chain((1..=rings).flat_map(move |i| {
        let r = radius * i as f64 / rings as f64;
        (0..angles).map(move |m| Complex64::from_polar(r, std::f64::consts::TAU * m as f64 / angles as f64))
    }))
}

/// Transport of the section `(1, c) ↦ (1, G(c))` along the flows.
pub fn phi_g(g: &BaseDiffeo, p: &LocalPoint) -> Result<LocalPoint, LocalError> {
    let c = q_momentum(p);
    g.check_range(c)?;
    g.check_range(g.apply(c))?;
    Ok(phi_g_generic(g, p.generic::<f64>())?.value())
}

pub fn phi_g_generic<R: Real>(g: &BaseDiffeo, p: Pt<R>) -> Result<Pt<R>, LocalError> {
    let c = p.q();
    let gc = Cx::new(c.re, g.g_generic(c.re, c.im));
    let (g1, g2) = g.gradient_generic(c.re, c.im);
    phi_transport(p, gc, g1, g2)
}

/// Core of `φ_G` given `G(q(p))` and the second row `(g1, g2)` of `dG` at `q(p)`.
pub fn phi_transport<R: Real>(p: Pt<R>, gc: Cx<R>, g1: R, g2: R) -> Result<Pt<R>, LocalError> {
    if p.z.val() == Complex64::new(0.0, 0.0) {
        return Err(LocalError::Domain("φ_G needs z ≠ 0"));
    }
    // z = e^{−t2 − i t1}
    let t2 = -p.z.abs().ln();
    let t1 = -p.z.arg();
    let b2 = t2 / g2;
    let b1 = t1 - g1 * b2;
    Ok(Pt {
        z: Cx::new(-b2, -b1).exp(),
        zeta: Cx::new(b2, b1).exp() * gc,
    })
}

/// `φ_X(z, ζ) = (i z̄, i ζ̄)`.
pub fn phi_x(p: &LocalPoint) -> LocalPoint {
    phi_x_generic(p.generic::<f64>()).value()
}

pub fn phi_x_generic<R: Real>(p: Pt<R>) -> Pt<R> {
    Pt { z: Cx::i() * p.z.conj(), zeta: Cx::i() * p.zeta.conj() }
}

/// `φ_Y(z, ζ) = (i ζ̄, −i z̄)`.
pub fn phi_y(p: &LocalPoint) -> LocalPoint {
    phi_y_generic(p.generic::<f64>()).value()
}

pub fn phi_y_generic<R: Real>(p: Pt<R>) -> Pt<R> {
    Pt { z: Cx::i() * p.zeta.conj(), zeta: -(Cx::i() * p.z.conj()) }
}

/// `G_X(c) = −c̄`.
pub fn g_x(c: Complex64) -> Complex64 {
    -c.conj()
}

/// `G_Y(c) = c̄`.
pub fn g_y(c: Complex64) -> Complex64 {
    c.conj()
}

/// A map of the model written over generic scalars, so it can be differentiated.
pub trait PointMap {
    type Error;
    fn apply<R: Real>(&self, p: Pt<R>) -> Result<Pt<R>, Self::Error>;
}

pub struct FlowMap(pub BaseCovector);

impl PointMap for FlowMap {
    type Error = LocalError;
    fn apply<R: Real>(&self, p: Pt<R>) -> Result<Pt<R>, LocalError> {
        Ok(flow_generic(p, R::cst(self.0.t1), R::cst(self.0.t2)))
    }
}

pub struct PsiKappaMap(pub Direction);

impl PointMap for PsiKappaMap {
    type Error = LocalError;
    fn apply<R: Real>(&self, p: Pt<R>) -> Result<Pt<R>, LocalError> {
        psi_kappa_generic(p, self.0)
    }
}

pub struct PhiGMap<'a>(pub &'a BaseDiffeo);

impl PointMap for PhiGMap<'_> {
    type Error = LocalError;
    fn apply<R: Real>(&self, p: Pt<R>) -> Result<Pt<R>, LocalError> {
        phi_g_generic(self.0, p)
    }
}

pub struct PhiXMap;

impl PointMap for PhiXMap {
    type Error = LocalError;
    fn apply<R: Real>(&self, p: Pt<R>) -> Result<Pt<R>, LocalError> {
        Ok(phi_x_generic(p))
    }
}

pub struct PhiYMap;

impl PointMap for PhiYMap {
    type Error = LocalError;
    fn apply<R: Real>(&self, p: Pt<R>) -> Result<Pt<R>, LocalError> {
        Ok(phi_y_generic(p))
    }
}

/// Exact 4×4 real Jacobian `J[row][col]` in `(x1, ξ1, x2, ξ2)`.
pub fn jacobian<M: PointMap>(m: &M, p: &LocalPoint) -> Result<[[f64; 4]; 4], M::Error> {
    let x = p.to_real();
    let seeded = Pt {
        z: Cx::new(Jet::var(x[0], 0), Jet::var(x[2], 2)),
        zeta: Cx::new(Jet::var(x[3], 3), Jet::var(x[1], 1)),
    };
    let out = m.apply(seeded)?.real_coords();
    Ok(out.map(|r| r.d))
}

/// Central-difference Jacobian with step `h`.
pub fn jacobian_fd<M: PointMap>(m: &M, p: &LocalPoint, h: f64) -> Result<[[f64; 4]; 4], M::Error> {
    let x = p.to_real();
    let mut jac = [[0.0; 4]; 4];
    for col in 0..4 {
        let mut xp = x;
        let mut xm = x;
        xp[col] += h;
        xm[col] -= h;
        let fp = m.apply(LocalPoint::from_real(xp).generic::<f64>())?.real_coords();
        let fm = m.apply(LocalPoint::from_real(xm).generic::<f64>())?.real_coords();
        for row in 0..4 {
            jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// `‖JᵀΩJ − Ω‖∞` for `Ω` the standard form in `(x1, ξ1, x2, ξ2)`.
pub fn symplectic_defect(j: &[[f64; 4]; 4]) -> f64 {
    let omega = |a: usize, b: usize| -> f64 {
        match (a, b) {
            (0, 1) | (2, 3) => 1.0,
            (1, 0) | (3, 2) => -1.0,
            _ => 0.0,
        }
    };
    let mut worst: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for r in 0..4 {
                for c in 0..4 {
                    let w = omega(r, c);
                    if w != 0.0 {
                        s += j[r][a] * w * j[c][b];
                    }
                }
            }
            worst = worst.max((s - omega(a, b)).abs());
        }
    }
    worst
}

pub fn symplectic_residual<M: PointMap>(m: &M, p: &LocalPoint) -> Result<f64, M::Error> {
    Ok(symplectic_defect(&jacobian(m, p)?))
}

pub fn symplectic_residual_fd<M: PointMap>(m: &M, p: &LocalPoint, h: f64) -> Result<f64, M::Error> {
    Ok(symplectic_defect(&jacobian_fd(m, p, h)?))
}
