//! Semiglobal model glued from `k` copies of the local normal form.
//!
//! Chart `j` is the local model over `U_j = G̃_{0,j}(U₀)`. The forward
//! transition from chart `j` to `j+1` is `φ_{G̃_{j,j+1}} ∘ Ψ_{−κ}`, followed by
//! `Ψ_{−ds₀}` when it closes the cycle at chart `0`. It is defined on `ζ ≠ 0`
//! and lands in `z ≠ 0`; backward transitions are its exact inverses.
//!
//! The log-height `ρ = ∂₂g_{0,j}(c)·ln|z|` grows by `L(c) > 0` along a full
//! cycle of forward transitions. Each point has a representative in
//! `D_j = {|z| ≤ 1, |ζ| ≤ b_j}`, where `b_j = 1` except for
//! `b_{k−1} = exp(∂₂s₀(c) / ∂₂g_{0,k−1}(c))`.

use num_complex::Complex64;
use thiserror::Error;

use crate::dual::{Cx, Real};
use crate::localmodel::{
    self, disk_grid, flow_generic, phi_transport, psi_kappa_generic, BaseCovector, BaseDiffeo, Direction,
    LocalError, LocalPoint, PointMap, Pt,
};
use crate::moduli::{expand, InvariantTupleMinimal};
use crate::poly::FloatPoly;

const RADIUS_FLOOR: f64 = 1e-8;
const MARGIN: f64 = 2.0;
const DOMAIN_SLACK: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GlueError {
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("no admissible radius above {floor:e}: {reason}")]
    Build { floor: f64, reason: String },
    #[error("base value |c| = {value:e} outside U_{chart} (radius {radius:e})")]
    OutsideDomain { chart: usize, value: f64, radius: f64 },
    #[error("step {step}: {source}")]
    WordStep { step: usize, source: Box<GlueError> },
    #[error("word starts at chart {expected}, point lies in chart {found}")]
    ChartMismatch { expected: usize, found: usize },
    #[error("root finding for G̃_0{chart}^-1 did not converge")]
    RootFinder { chart: usize },
    #[error("normalization did not terminate within {cap} steps")]
    NormalizationCap { cap: usize },
    #[error("non-positive cycle drift L = {0:e}")]
    NonPositiveDrift(f64),
    #[error("operation needs a regular point")]
    Singular,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GluedSystem {
    k: usize,
    order: u32,
    delta: f64,
    s0: FloatPoly,
    ds0: (FloatPoly, FloatPoly),
    charts: Vec<BaseDiffeo>,
    u0_radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint {
    pub chart: usize,
    pub point: LocalPoint,
}

impl ChartPoint {
    pub fn new(chart: usize, point: LocalPoint) -> Self {
        Self { chart, point }
    }
}

/// `[start, start + steps]_steps`: `steps` consecutive transitions, backward when negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupoidWord {
    pub start: usize,
    pub steps: i64,
}

impl GroupoidWord {
    pub fn new(start: usize, steps: i64) -> Self {
        Self { start, steps }
    }

    pub fn end(&self, k: usize) -> usize {
        (self.start as i64 + self.steps).rem_euclid(k as i64) as usize
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Self, k: usize) -> Option<Self> {
        (other.start == self.end(k)).then(|| Self::new(self.start, self.steps + other.steps))
    }
}

impl GluedSystem {
    /// Realizes minimal invariant data, choosing the largest admissible `U₀` radius.
    pub fn build(data: &InvariantTupleMinimal, delta: f64) -> Result<Self, GlueError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(GlueError::Parameter(format!("delta = {delta} not in (0, 1)")));
        }
        let full = expand(data);
        let s0 = data.s0().as_series().to_float_poly();
        let gpolys: Vec<FloatPoly> = (0..data.k()).map(|j| full.g(0, j).to_float_poly()).collect();
        let radius = choose_radius(&s0, &gpolys, delta)?;
        Self::from_parts(data.order(), delta, s0, gpolys, radius)
    }

    /// Reassembles a system from its polynomial data; the radius is re-validated.
    pub fn from_parts(
        order: u32,
        delta: f64,
        s0: FloatPoly,
        gpolys: Vec<FloatPoly>,
        u0_radius: f64,
    ) -> Result<Self, GlueError> {
        let k = gpolys.len();
        if k == 0 {
            return Err(GlueError::Parameter("k must be at least 1".into()));
        }
        if gpolys[0] != FloatPoly::c2() {
            return Err(GlueError::Parameter("chart 0 must be the identity".into()));
        }
        if s0.coeff(0, 0) != 0.0 {
            return Err(GlueError::Parameter("s0 has a constant term".into()));
        }
        if let Err(reason) = validate_radius(&s0, &gpolys, delta, u0_radius) {
            return Err(GlueError::Build { floor: u0_radius, reason });
        }
        let charts = gpolys
            .into_iter()
            .map(|g| BaseDiffeo::new(g, MARGIN * u0_radius))
            .collect::<Result<Vec<_>, _>>()?;
        let ds0 = (s0.d1(), s0.d2());
        Ok(Self { k, order, delta, s0, ds0, charts, u0_radius })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn u0_radius(&self) -> f64 {
        self.u0_radius
    }

    pub fn s0_poly(&self) -> &FloatPoly {
        &self.s0
    }

    /// `G̃_{0,j}`.
    pub fn chart(&self, j: usize) -> &BaseDiffeo {
        &self.charts[j % self.k]
    }

    /// `(∂₁s₀, ∂₂s₀)` at the global base value `c`.
    pub fn ds0(&self, c: Complex64) -> BaseCovector {
        BaseCovector::new(self.ds0.0.eval(c.re, c.im), self.ds0.1.eval(c.re, c.im))
    }

    /// `G̃_{0,j}(c)`.
    pub fn to_chart(&self, j: usize, c: Complex64) -> Complex64 {
        self.chart(j).apply(c)
    }

    /// `G̃_{0,j}⁻¹(w)` by Newton's method in the second coordinate.
    pub fn from_chart(&self, j: usize, w: Complex64) -> Result<Complex64, GlueError> {
        let j = j % self.k;
        if j == 0 {
            return Ok(w);
        }
        let g = &self.charts[j];
        let limit = MARGIN * self.u0_radius;
        let mut y = w.im / g.poly().coeff(0, 1);
        for _ in 0..100 {
            let f = g.g_generic(w.re, y) - w.im;
            let (_, d2) = g.gradient_generic(w.re, y);
            let step = f / d2;
            y -= step;
            if !y.is_finite() || Complex64::new(w.re, y).norm() > limit {
                return Err(GlueError::OutsideDomain { chart: j, value: Complex64::new(w.re, y).norm(), radius: limit });
            }
            if step.abs() <= 1e-17 * y.abs().max(1e-300) || f == 0.0 {
                return Ok(Complex64::new(w.re, y));
            }
        }
        // Newton stalls at the rounding level; accept when the residual is tiny.
        let f = g.g_generic(w.re, y) - w.im;
        if f.abs() <= 1e-13 * w.norm().max(1e-300) {
            Ok(Complex64::new(w.re, y))
        } else {
            Err(GlueError::RootFinder { chart: j })
        }
    }

    /// Generic `G̃_{0,j}⁻¹`: a converged double-precision root plus one Newton step
    /// in `R`, which carries exact first derivatives.
    fn from_chart_generic<R: Real>(&self, j: usize, w: Cx<R>) -> Result<Cx<R>, GlueError> {
        if j == 0 {
            return Ok(w);
        }
        let y0 = self.from_chart(j, w.val())?.im;
        let g = &self.charts[j];
        let (_, d2) = g.gradient_generic(w.re.val(), y0);
        let f = g.g_generic(w.re, R::cst(y0)) - w.im;
        Ok(Cx::new(w.re, R::cst(y0) - f / R::cst(d2)))
    }

    /// Global momentum of a chart point.
    pub fn momentum_global(&self, p: &ChartPoint) -> Result<Complex64, GlueError> {
        self.from_chart(p.chart, localmodel::q_momentum(&p.point))
    }

    /// Errors unless the point lies over `U_chart`.
    pub fn validate(&self, p: &ChartPoint) -> Result<Complex64, GlueError> {
        if p.chart >= self.k {
            return Err(GlueError::Parameter(format!("chart {} out of range", p.chart)));
        }
        let c = self.momentum_global(p)?;
        self.check_base(p.chart, c)?;
        Ok(c)
    }

    fn check_base(&self, chart: usize, c: Complex64) -> Result<(), GlueError> {
        if c.norm() > self.u0_radius * (1.0 + DOMAIN_SLACK) {
            return Err(GlueError::OutsideDomain { chart, value: c.norm(), radius: self.u0_radius });
        }
        Ok(())
    }

    /// The section point `(1, c)` of chart `0` over the global value `c`.
    pub fn section(&self, c: Complex64) -> ChartPoint {
        ChartPoint::new(0, LocalPoint::section(c))
    }

    /// `φ_{G̃_{j,t}}` data at chart-`j` value `w`: `(G̃_{j,t}(w), ∂₁, ∂₂)` of the second component.
    fn chart_change<R: Real>(&self, j: usize, t: usize, w: Cx<R>) -> Result<(Cx<R>, R, R), GlueError> {
        let b = self.from_chart_generic(j, w)?;
        let (a1, a2) = self.charts[j].gradient_generic(b.re, b.im);
        let (b1, b2) = self.charts[t].gradient_generic(b.re, b.im);
        let target = Cx::new(b.re, self.charts[t].g_generic(b.re, b.im));
        Ok((target, b1 - b2 * a1 / a2, b2 / a2))
    }

    fn ds0_generic<R: Real>(&self, c: Cx<R>) -> (R, R) {
        (self.ds0.0.eval_real(c.re, c.im), self.ds0.1.eval_real(c.re, c.im))
    }

    /// One transition out of `chart`, generic over the scalar.
    pub fn transition_generic<R: Real>(
        &self,
        chart: usize,
        dir: Direction,
        p: Pt<R>,
    ) -> Result<(usize, Pt<R>), GlueError> {
        let k = self.k;
        let j = chart % k;
        let global = self.from_chart(j, p.q().val())?;
        self.check_base(j, global)?;
        match dir {
            Direction::Forward => {
                let t = (j + 1) % k;
                let p1 = psi_kappa_generic(p, Direction::Inverse)?;
                let (gc, g1, g2) = self.chart_change(j, t, p1.q())?;
                let mut p2 = phi_transport(p1, gc, g1, g2)?;
                if t == 0 {
                    let (d1, d2) = self.ds0_generic(p2.q());
                    p2 = flow_generic(p2, -d1, -d2);
                }
                Ok((t, p2))
            }
            Direction::Inverse => {
                if p.z.val() == Complex64::new(0.0, 0.0) {
                    return Err(LocalError::Domain("backward transition needs z ≠ 0").into());
                }
                let s = (j + k - 1) % k;
                let mut p1 = p;
                if j == 0 {
                    let (d1, d2) = self.ds0_generic(p1.q());
                    p1 = flow_generic(p1, d1, d2);
                }
                let (gc, g1, g2) = self.chart_change(j, s, p1.q())?;
                let p2 = phi_transport(p1, gc, g1, g2)?;
                Ok((s, psi_kappa_generic(p2, Direction::Forward)?))
            }
        }
    }

    /// Single forward (`Direction::Forward`) or backward (`Direction::Inverse`) transition.
    pub fn transition(&self, dir: Direction, p: &ChartPoint) -> Result<ChartPoint, GlueError> {
        let (chart, q) = self.transition_generic(p.chart, dir, p.point.generic::<f64>())?;
        Ok(ChartPoint::new(chart, q.value()))
    }

    pub fn apply_word(&self, w: &GroupoidWord, p: &ChartPoint) -> Result<ChartPoint, GlueError> {
        if p.chart != w.start % self.k {
            return Err(GlueError::ChartMismatch { expected: w.start % self.k, found: p.chart });
        }
        let dir = if w.steps >= 0 { Direction::Forward } else { Direction::Inverse };
        let mut cur = *p;
        for step in 0..w.steps.unsigned_abs() as usize {
            cur = self
                .transition(dir, &cur)
                .map_err(|e| GlueError::WordStep { step, source: Box::new(e) })?;
        }
        Ok(cur)
    }

    /// `∂₂g_{0,j}(c)`, the weight of chart `j` in `ρ`.
    fn weight(&self, j: usize, c: Complex64) -> f64 {
        self.charts[j].gradient(c).1
    }

    /// `ρ(p) = ∂₂g_{0,j}(c)·ln|z|`.
    pub fn rho(&self, p: &ChartPoint) -> Result<f64, GlueError> {
        if !p.point.is_regular() {
            return Err(GlueError::Singular);
        }
        let c = self.momentum_global(p)?;
        Ok(self.weight(p.chart, c) * p.point.z.norm().ln())
    }

    /// Growth of `ρ` along a full cycle of forward transitions over `c ≠ 0`.
    pub fn drift(&self, c: Complex64) -> f64 {
        let logs: f64 = (0..self.k)
            .map(|j| -self.weight(j, c) * self.to_chart(j, c).norm().ln())
            .sum();
        logs + self.ds0(c).t2
    }

    /// Bound on `|ζ|` in the fundamental domain of `chart` over global `c`.
    pub fn zeta_bound(&self, chart: usize, c: Complex64) -> f64 {
        if chart == self.k - 1 {
            (self.ds0(c).t2 / self.weight(chart, c)).exp()
        } else {
            1.0
        }
    }

    pub fn in_fundamental_domain(&self, p: &ChartPoint) -> Result<bool, GlueError> {
        let c = self.momentum_global(p)?;
        Ok(p.point.z.norm() <= 1.0 && p.point.zeta.norm() <= self.zeta_bound(p.chart, c))
    }

    /// Equivalent point in the fundamental domain of its chart.
    pub fn normalize(&self, p: &ChartPoint) -> Result<ChartPoint, GlueError> {
        let c = self.validate(p)?;
        let cap = if p.point.is_regular() && c != Complex64::new(0.0, 0.0) {
            let l = self.drift(c);
            if !(l > 0.0) {
                return Err(GlueError::NonPositiveDrift(l));
            }
            let rho = self.rho(p)?;
            self.k * ((rho.abs() / l).ceil() as usize + 3)
        } else {
            4 * self.k + 4
        };
        let mut cur = *p;
        for _ in 0..=cap {
            let dir = if cur.point.z.norm() > 1.0 {
                Direction::Inverse
            } else if cur.point.zeta.norm() > self.zeta_bound(cur.chart, c) {
                Direction::Forward
            } else {
                return Ok(cur);
            };
            cur = self.transition(dir, &cur)?;
        }
        Err(GlueError::NormalizationCap { cap })
    }

    /// Equality in the glued space up to `tol`.
    pub fn same_point(&self, p1: &ChartPoint, p2: &ChartPoint, tol: f64) -> bool {
        let (Ok(a), Ok(b)) = (self.normalize(p1), self.normalize(p2)) else {
            return false;
        };
        let close = |x: &ChartPoint, y: &ChartPoint| x.chart == y.chart && x.point.dist(&y.point) <= tol;
        if close(&a, &b) {
            return true;
        }
        [Direction::Forward, Direction::Inverse].into_iter().any(|dir| {
            self.transition(dir, &a).is_ok_and(|a2| close(&a2, &b))
                || self.transition(dir, &b).is_ok_and(|b2| close(&a, &b2))
        })
    }

    /// Flow for time `t` of the covector `β` given in global base coordinates.
    pub fn flow_global(&self, p: &ChartPoint, beta: BaseCovector, t: f64) -> Result<ChartPoint, GlueError> {
        if !p.point.is_regular() {
            return Err(GlueError::Singular);
        }
        let c = self.validate(p)?;
        let (a1, a2) = self.chart(p.chart).gradient(c);
        let b2 = beta.t2 / a2;
        let local = BaseCovector::new(beta.t1 - a1 * b2, b2).scale(t);
        let moved = ChartPoint::new(p.chart, localmodel::flow(&p.point, local));
        self.normalize(&moved)
    }
}

/// Largest radius in `[RADIUS_FLOOR, delta]` passing [`validate_radius`], by bisection.
fn choose_radius(s0: &FloatPoly, gpolys: &[FloatPoly], delta: f64) -> Result<f64, GlueError> {
    if validate_radius(s0, gpolys, delta, delta).is_ok() {
        return Ok(delta);
    }
    if let Err(reason) = validate_radius(s0, gpolys, delta, RADIUS_FLOOR) {
        return Err(GlueError::Build { floor: RADIUS_FLOOR, reason });
    }
    let (mut lo, mut hi) = (RADIUS_FLOOR, delta);
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if validate_radius(s0, gpolys, delta, mid).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-6 {
            break;
        }
    }
    Ok(lo)
}

/// Checks the construction estimates on a grid of the disk of radius `MARGIN·r`.
fn validate_radius(s0: &FloatPoly, gpolys: &[FloatPoly], delta: f64, r: f64) -> Result<(), String> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(format!("radius {r} is not positive"));
    }
    let ds2 = s0.d2();
    let grads: Vec<FloatPoly> = gpolys.iter().map(FloatPoly::d2).collect();
    let last = gpolys.len() - 1;
    for c in disk_grid(MARGIN * r, 16, 48) {
        for (j, g) in gpolys.iter().enumerate() {
            let w = Complex64::new(c.re, g.eval(c.re, c.im));
            if w.norm() >= delta {
                return Err(format!("|G̃_0{j}(c)| = {:.3e} ≥ delta at c = {c}", w.norm()));
            }
            let a = grads[j].eval(c.re, c.im);
            if a <= g.coeff(0, 1) / 2.0 {
                return Err(format!("∂₂g_0{j}(c) = {a:.3e} below half its linear coefficient at c = {c}"));
            }
        }
        if c.norm() > 0.0 {
            let w = Complex64::new(c.re, gpolys[last].eval(c.re, c.im));
            let a = grads[last].eval(c.re, c.im);
            let h = -a * w.norm().ln() + ds2.eval(c.re, c.im);
            if !(h > 0.0) {
                return Err(format!("−∂₂g·ln|c| + ∂₂s₀ = {h:.3e} not positive at c = {c}"));
            }
        }
    }
    Ok(())
}

/// A transition as a differentiable map, for symplecticity checks.
pub struct TransitionMap<'a> {
    pub sys: &'a GluedSystem,
    pub chart: usize,
    pub dir: Direction,
}

impl PointMap for TransitionMap<'_> {
    type Error = GlueError;
    fn apply<R: Real>(&self, p: Pt<R>) -> Result<Pt<R>, GlueError> {
        Ok(self.sys.transition_generic(self.chart, self.dir, p)?.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::powerseries::{ActionSeries, TransitionSeries, TruncatedSeries};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn k2_linear() -> GluedSystem {
        let s0 = ActionSeries::new(TruncatedSeries::from_rationals(2, &[((0, 1), (1, 1))]).unwrap());
        let g = TransitionSeries::new(TruncatedSeries::from_rationals(2, &[((0, 1), (2, 1))]).unwrap()).unwrap();
        GluedSystem::build(&InvariantTupleMinimal::new(2, s0, vec![g]).unwrap(), 0.5).unwrap()
    }

    #[test]
    fn zero_data_k1() {
        let sys = GluedSystem::build(&InvariantTupleMinimal::zero(1, 2), 0.5).unwrap();
        assert!(sys.u0_radius() < 0.25 && sys.u0_radius() > 0.2499);
        let w = c(0.03, -0.02);
        let out = sys.transition(Direction::Forward, &sys.section(w)).unwrap();
        assert_eq!(out.chart, 0);
        assert!(out.point.dist(&LocalPoint::new(w.inv(), w * w)) < 1e-13);
        let word = sys.apply_word(&GroupoidWord::new(0, 1), &sys.section(w)).unwrap();
        assert_eq!(word, out);
        assert_eq!(sys.apply_word(&GroupoidWord::new(0, 0), &sys.section(w)).unwrap(), sys.section(w));
    }

    #[test]
    fn k2_linear_build() {
        let sys = k2_linear();
        assert!(sys.u0_radius() <= 0.25 / MARGIN + 1e-12);
        let p = ChartPoint::new(1, LocalPoint::section(c(0.01, 0.02)));
        let m = sys.momentum_global(&p).unwrap();
        assert!((m - c(0.01, 0.01)).norm() < 1e-15);
    }

    #[test]
    fn transitions_invert_and_preserve_momentum() {
        let sys = k2_linear();
        let p = ChartPoint::new(0, LocalPoint::new(c(0.6, 0.3), c(0.01, -0.004) / c(0.6, 0.3)));
        for _ in 0..3 {
            let f = sys.transition(Direction::Forward, &p).unwrap();
            let back = sys.transition(Direction::Inverse, &f).unwrap();
            assert!(back.point.dist(&p.point) < 1e-12 && back.chart == p.chart);
            let m0 = sys.momentum_global(&p).unwrap();
            assert!((sys.momentum_global(&f).unwrap() - m0).norm() < 1e-13);
        }
        let z0 = ChartPoint::new(0, LocalPoint::new(c(0.0, 0.0), c(0.5, 0.1)));
        let img = sys.transition(Direction::Forward, &z0).unwrap();
        assert!(img.point.on_stable_plane());
    }

    #[test]
    fn drift_and_normalize() {
        let sys = GluedSystem::build(&InvariantTupleMinimal::zero(1, 2), 0.5).unwrap();
        let w = c(0.02, 0.01);
        let e3 = 3f64.exp();
        let p = ChartPoint::new(0, LocalPoint::new(c(e3, 0.0), w / e3));
        let n = sys.normalize(&p).unwrap();
        assert!(sys.in_fundamental_domain(&n).unwrap());
        assert!(sys.same_point(&n, &p, 1e-9));
        let unit = ChartPoint::new(0, LocalPoint::new(c(0.0, 1.0), w / c(0.0, 1.0)));
        assert_eq!(sys.rho(&unit).unwrap(), 0.0);
        assert_eq!(sys.normalize(&unit).unwrap(), unit);

        let sys = k2_linear();
        let p = sys.section(c(0.01, 0.005));
        let img = sys.apply_word(&GroupoidWord::new(0, 2), &p).unwrap();
        let d = sys.rho(&img).unwrap() - sys.rho(&p).unwrap();
        assert!((d - sys.drift(c(0.01, 0.005))).abs() < 1e-9);
        assert!(sys.same_point(&p, &img, 1e-9));
    }

    #[test]
    fn global_flow_periods() {
        let sys = k2_linear();
        let p = ChartPoint::new(1, LocalPoint::new(c(0.7, -0.2), c(0.01, 0.004) / c(0.7, -0.2)));
        let back = sys.flow_global(&p, BaseCovector::new(std::f64::consts::TAU, 0.0), 1.0).unwrap();
        assert!(back.point.dist(&p.point) < 1e-12);
        assert_eq!(sys.flow_global(&p, BaseCovector::default(), 1.0).unwrap(), p);
    }
}
