//! Measurement of periods on a glued model and recovery of the action series.

use std::f64::consts::{PI, TAU};
use std::io::{self, BufRead, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::gluedmodel::{ChartPoint, GlueError, GluedSystem, GroupoidWord};
use crate::localmodel::{kappa_pullback, BaseCovector, LocalError};
use crate::moduli::InvariantTupleMinimal;
use crate::powerseries::multi_indices;

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error(transparent)]
    Glue(#[from] GlueError),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error("period verification failed at c = {c}: loop closes only to {gap:e}")]
    Verification { c: Complex64, gap: f64 },
    #[error("monodromy image landed in chart {0}, expected 0")]
    ChartDrift(usize),
    #[error("branch continuation ambiguous at sample {index}: gap {gap:.3}")]
    BranchGap { index: usize, gap: f64 },
    #[error("insufficient samples: {0}")]
    Insufficient(String),
    #[error("rank-deficient fit (condition number {condition:e})")]
    RankDeficient { condition: f64 },
    #[error("invalid path: {0}")]
    Path(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Measurements over one base value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodSample {
    pub c: Complex64,
    /// `2πβ₂(c)` with `t1 ∈ [0, 2π)`.
    pub beta2: BaseCovector,
    pub sigma: BaseCovector,
}

/// `u` with `Ψ_u(p) = φ_{[0,0]_k}(p)` for a regular point `p` of chart `0`.
pub fn cycle_monodromy(sys: &GluedSystem, p: &ChartPoint) -> Result<BaseCovector, RecoveryError> {
    if p.chart != 0 || !p.point.is_regular() {
        return Err(GlueError::Singular.into());
    }
    let y = sys.apply_word(&GroupoidWord::new(0, sys.k() as i64), p)?;
    if y.chart != 0 {
        return Err(RecoveryError::ChartDrift(y.chart));
    }
    let l = (p.point.z / y.point.z).ln();
    Ok(BaseCovector::new(l.im, l.re))
}

/// `2πβ₂(c) = −u`, with `t1` taken in `[0, 2π)`; verified by flowing around the loop.
pub fn second_period(sys: &GluedSystem, c: Complex64) -> Result<BaseCovector, RecoveryError> {
    if c == Complex64::new(0.0, 0.0) {
        return Err(LocalError::SingularBase.into());
    }
    let p = sys.section(c);
    sys.validate(&p)?;
    let u = cycle_monodromy(sys, &p)?;
    let beta = BaseCovector::new((-u.t1).rem_euclid(TAU), -u.t2);
    let back = sys.flow_global(&p, beta, 1.0)?;
    if !sys.same_point(&back, &p, 1e-9) {
        let gap = if back.chart == p.chart { back.point.dist(&p.point) } else { f64::INFINITY };
        return Err(RecoveryError::Verification { c, gap });
    }
    Ok(beta)
}

/// `2πβ₂ − Σ_j G̃*_{0,j}κ` with `σ1` wrapped into `(−π, π]`.
pub fn desingularized_sigma(sys: &GluedSystem, c: Complex64) -> Result<PeriodSample, RecoveryError> {
    let beta2 = second_period(sys, c)?;
    let mut sigma = beta2;
    for j in 0..sys.k() {
        sigma = sigma - kappa_pullback(sys.chart(j), c)?;
    }
    sigma.t1 = wrap_pi(sigma.t1);
    Ok(PeriodSample { c, beta2, sigma })
}

fn wrap_pi(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Shifts `value` by a multiple of `2π` to the branch nearest `reference`.
fn nearest_branch(value: f64, reference: f64) -> f64 {
    value - TAU * ((value - reference) / TAU).round()
}

/// Polar sampling grid: log-spaced radii `[rmin, rmax]·u0_radius`, angles offset by half a step
/// so no sample sits on the negative real axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingGrid {
    pub rmin: f64,
    pub rmax: f64,
    pub radii: usize,
    pub angles: usize,
}

impl Default for SamplingGrid {
    fn default() -> Self {
        Self { rmin: 1e-4, rmax: 1e-2, radii: 6, angles: 16 }
    }
}

impl SamplingGrid {
    pub fn points(&self, u0_radius: f64) -> Result<Vec<Complex64>, RecoveryError> {
        if !(self.rmin > 0.0 && self.rmin <= self.rmax && self.rmax <= 1.0) {
            return Err(RecoveryError::Grid(format!("radius factors [{}, {}]", self.rmin, self.rmax)));
        }
        if self.radii == 0 || self.angles == 0 {
            return Err(RecoveryError::Grid("empty grid".into()));
        }
        let (l0, l1) = (self.rmin.ln(), self.rmax.ln());
        let mut out = Vec::with_capacity(self.radii * self.angles);
        for i in 0..self.radii {
            let t = if self.radii == 1 { 0.0 } else { i as f64 / (self.radii - 1) as f64 };
            let r = u0_radius * (l0 + t * (l1 - l0)).exp();
            for m in 0..self.angles {
                let theta = -PI + TAU * (m as f64 + 0.5) / self.angles as f64;
                out.push(Complex64::from_polar(r, theta));
            }
        }
        Ok(out)
    }
}

/// Samples `σ` on the grid, in grid order. `workers = None` uses the global pool.
pub fn sample_grid(
    sys: &GluedSystem,
    grid: &SamplingGrid,
    workers: Option<usize>,
) -> Result<Vec<PeriodSample>, RecoveryError> {
    let points = grid.points(sys.u0_radius())?;
    let run = || -> Vec<Result<PeriodSample, RecoveryError>> {
        points.par_iter().map(|&c| desingularized_sigma(sys, c)).collect()
    };
    let results = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RecoveryError::Pool(e.to_string()))?
            .install(run),
        None => run(),
    };
    let mut samples = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    continue_grid_branch(&mut samples, grid.angles)?;
    Ok(samples)
}

/// Continues `σ1` along the grid: around each ring, and ring to ring through the first angle.
pub fn continue_grid_branch(samples: &mut [PeriodSample], angles: usize) -> Result<(), RecoveryError> {
    let parent = |idx: usize| match (idx / angles, idx % angles) {
        (0, 0) => None,
        (_, 0) => Some(idx - angles),
        _ => Some(idx - 1),
    };
    continue_branch_with(samples, parent)
}

/// Continues `σ1` along the sample sequence, each sample following its predecessor.
pub fn continue_branch(samples: &mut [PeriodSample]) -> Result<(), RecoveryError> {
    continue_branch_with(samples, |i| i.checked_sub(1))
}

fn continue_branch_with(
    samples: &mut [PeriodSample],
    parent: impl Fn(usize) -> Option<usize>,
) -> Result<(), RecoveryError> {
    for idx in 0..samples.len() {
        match parent(idx) {
            None => samples[idx].sigma.t1 = wrap_pi(samples[idx].sigma.t1),
            Some(par) => {
                let reference = samples[par].sigma.t1;
                let v = nearest_branch(samples[idx].sigma.t1, reference);
                let gap = (v - reference).abs();
                if gap > PI / 2.0 {
                    return Err(RecoveryError::BranchGap { index: idx, gap });
                }
                samples[idx].sigma.t1 = v;
            }
        }
    }
    Ok(())
}

/// Fitted action polynomial and diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub fit_order: u32,
    /// `(i, j, a_ij)` in graded order; the `X`-coefficient lies in `[0, 2π)`.
    pub coefficients: Vec<(u32, u32, f64)>,
    pub residual_rms: f64,
    pub condition: f64,
    pub samples: usize,
    pub radius_range: (f64, f64),
}

impl FitReport {
    pub fn coeff(&self, i: u32, j: u32) -> f64 {
        self.coefficients.iter().find(|t| t.0 == i && t.1 == j).map_or(0.0, |t| t.2)
    }
}

/// Least-squares polynomial `S` (no constant term) with `dS ≈ σ` on the samples.
pub fn fit_action_series(samples: &[PeriodSample], fit_order: u32) -> Result<FitReport, RecoveryError> {
    if fit_order == 0 {
        return Err(RecoveryError::Insufficient("fit order must be at least 1".into()));
    }
    let idx: Vec<(u32, u32)> = multi_indices(fit_order).collect();
    let n = idx.len();
    if samples.len() < 2 * n {
        return Err(RecoveryError::Insufficient(format!("{} samples for {n} coefficients", samples.len())));
    }
    let mut radii: Vec<f64> = samples.iter().map(|s| s.c.norm()).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
    let mut angles: Vec<f64> = samples.iter().map(|s| s.c.arg()).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    if radii.len() < 2 || angles.len() < 8 {
        return Err(RecoveryError::Insufficient(format!("{} radii and {} angles", radii.len(), angles.len())));
    }
    let scale = *radii.last().expect("non-empty");

    // Unknowns b_ij = a_ij · scale^(i+j−1) keep the columns comparable.
    let m = samples.len();
    let mut a = DMatrix::<f64>::zeros(2 * m, n);
    let mut rhs = DVector::<f64>::zeros(2 * m);
    for (row, s) in samples.iter().enumerate() {
        let (x, y) = (s.c.re / scale, s.c.im / scale);
        for (col, &(i, j)) in idx.iter().enumerate() {
            if i > 0 {
                a[(2 * row, col)] = i as f64 * x.powi(i as i32 - 1) * y.powi(j as i32);
            }
            if j > 0 {
                a[(2 * row + 1, col)] = j as f64 * x.powi(i as i32) * y.powi(j as i32 - 1);
            }
        }
        rhs[2 * row] = s.sigma.t1;
        rhs[2 * row + 1] = s.sigma.t2;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(smin > 1e-12 * smax) {
        return Err(RecoveryError::RankDeficient { condition });
    }
    let b = svd.solve(&rhs, 0.0).map_err(|e| RecoveryError::Insufficient(e.to_string()))?;
    let resid = &a * &b - &rhs;
    let residual_rms = (resid.norm_squared() / (2 * m) as f64).sqrt();
    let coefficients = idx
        .iter()
        .zip(b.iter())
        .map(|(&(i, j), &v)| {
            let a_ij = v / scale.powi((i + j) as i32 - 1);
            let a_ij = if (i, j) == (1, 0) { a_ij.rem_euclid(TAU) } else { a_ij };
            (i, j, a_ij)
        })
        .collect();
    Ok(FitReport {
        fit_order,
        coefficients,
        residual_rms,
        condition,
        samples: m,
        radius_range: (radii[0], scale),
    })
}

/// `σ` on an axis-aligned grid: `sigma[i][j]` sits at `(c1[i], c2[j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct RectGrid {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub sigma: Vec<Vec<BaseCovector>>,
}

impl RectGrid {
    /// `n × n` nodes of spacing `h` centred at `center`, `σ1` continued along rows.
    pub fn sample(sys: &GluedSystem, center: Complex64, h: f64, n: usize) -> Result<Self, RecoveryError> {
        let off = (n as f64 - 1.0) / 2.0;
        let c1: Vec<f64> = (0..n).map(|i| center.re + (i as f64 - off) * h).collect();
        let c2: Vec<f64> = (0..n).map(|j| center.im + (j as f64 - off) * h).collect();
        let mut flat: Vec<PeriodSample> = c1
            .iter()
            .flat_map(|&x| c2.iter().map(move |&y| Complex64::new(x, y)))
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&c| desingularized_sigma(sys, c))
            .collect::<Result<_, _>>()?;
        continue_grid_branch(&mut flat, n)?;
        let sigma = flat.chunks(n).map(|row| row.iter().map(|s| s.sigma).collect()).collect();
        Ok(Self { c1, c2, sigma })
    }
}

/// Largest central-difference `|∂₁σ₂ − ∂₂σ₁|` over interior nodes.
pub fn closedness_check(grid: &RectGrid) -> f64 {
    let (n1, n2) = (grid.c1.len(), grid.c2.len());
    let mut worst: f64 = 0.0;
    for i in 1..n1.saturating_sub(1) {
        for j in 1..n2.saturating_sub(1) {
            let d1s2 = (grid.sigma[i + 1][j].t2 - grid.sigma[i - 1][j].t2) / (grid.c1[i + 1] - grid.c1[i - 1]);
            let d2s1 = (grid.sigma[i][j + 1].t1 - grid.sigma[i][j - 1].t1) / (grid.c2[j + 1] - grid.c2[j - 1]);
            worst = worst.max((d1s2 - d2s1).abs());
        }
    }
    worst
}

/// Trapezoid quadrature of `2πβ₂` along a polyline, `nodes` subintervals per segment,
/// with `t1` continued along the path.
pub fn action_integral(sys: &GluedSystem, path: &[Complex64], nodes: usize) -> Result<f64, RecoveryError> {
    if path.len() < 2 || nodes == 0 {
        return Err(RecoveryError::Path("need at least one segment and one node".into()));
    }
    let mut total = 0.0;
    let mut prev: Option<(Complex64, BaseCovector)> = None;
    for seg in path.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if segment_distance_to_origin(a, b) <= 0.0 {
            return Err(RecoveryError::Path(format!("segment {a} → {b} passes through 0")));
        }
        let start = if prev.is_some() { 1 } else { 0 };
        for m in start..=nodes {
            let c = a + (b - a) * (m as f64 / nodes as f64);
            let mut beta = second_period(sys, c)?;
            if let Some((pc, pb)) = prev {
                beta.t1 = nearest_branch(beta.t1, pb.t1);
                let mid = BaseCovector::new(0.5 * (beta.t1 + pb.t1), 0.5 * (beta.t2 + pb.t2));
                let dc = c - pc;
                total += mid.t1 * dc.re + mid.t2 * dc.im;
            }
            prev = Some((c, beta));
        }
    }
    Ok(total)
}

fn segment_distance_to_origin(a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return a.norm();
    }
    let t = (-(a.re * d.re + a.im * d.im) / len2).clamp(0.0, 1.0);
    (a + d * t).norm()
}

/// Tolerance for a recovered coefficient of total degree `d`.
pub fn coefficient_tolerance(d: u32) -> f64 {
    if d <= 2 {
        1e-3
    } else {
        5e-2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientCheck {
    pub i: u32,
    pub j: u32,
    pub expected: f64,
    pub fitted: f64,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundtripReport {
    pub u0_radius: f64,
    pub fit: FitReport,
    pub checks: Vec<CoefficientCheck>,
}

impl RoundtripReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Error of a fitted coefficient; the `X`-coefficient is compared modulo `2π`.
pub fn coefficient_error(i: u32, j: u32, expected: f64, fitted: f64) -> f64 {
    let d = fitted - expected;
    if (i, j) == (1, 0) {
        nearest_branch(d, 0.0).abs()
    } else {
        d.abs()
    }
}

/// Build, sample, fit and compare against `data.s0`.
pub fn roundtrip(
    data: &InvariantTupleMinimal,
    delta: f64,
    grid: &SamplingGrid,
    fit_order: u32,
    workers: Option<usize>,
) -> Result<RoundtripReport, RecoveryError> {
    let sys = GluedSystem::build(data, delta)?;
    let samples = sample_grid(&sys, grid, workers)?;
    let fit = fit_action_series(&samples, fit_order)?;
    let s0 = sys.s0_poly();
    let checks = multi_indices(fit_order)
        .map(|(i, j)| {
            let expected = s0.coeff(i, j);
            let fitted = fit.coeff(i, j);
            let error = coefficient_error(i, j, expected, fitted);
            let tolerance = coefficient_tolerance(i + j);
            CoefficientCheck { i, j, expected, fitted, error, tolerance, pass: error <= tolerance }
        })
        .collect();
    Ok(RoundtripReport { u0_radius: sys.u0_radius(), fit, checks })
}

pub const CSV_HEADER: &str = "c1,c2,tau1,tau2,sigma1,sigma2";

/// One row per sample, 17 significant digits.
pub fn write_csv<W: Write>(samples: &[PeriodSample], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for s in samples {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.c.re, s.c.im, s.beta2.t1, s.beta2.t2, s.sigma.t1, s.sigma.t2
        )?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<PeriodSample>, RecoveryError> {
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(RecoveryError::Csv("missing header".into())),
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| RecoveryError::Csv(format!("line {}: {e}", n + 2)))?;
        if v.len() != 6 {
            return Err(RecoveryError::Csv(format!("line {}: expected 6 fields", n + 2)));
        }
        out.push(PeriodSample {
            c: Complex64::new(v[0], v[1]),
            beta2: BaseCovector::new(v[2], v[3]),
            sigma: BaseCovector::new(v[4], v[5]),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::powerseries::{ActionSeries, PiRational, TruncatedSeries};

    fn zero_k1() -> GluedSystem {
        GluedSystem::build(&InvariantTupleMinimal::zero(1, 2), 0.5).unwrap()
    }

    fn s0_y_k1() -> GluedSystem {
        let s0 = ActionSeries::new(TruncatedSeries::from_rationals(2, &[((0, 1), (1, 1))]).unwrap());
        GluedSystem::build(&InvariantTupleMinimal::new(1, s0, vec![]).unwrap(), 0.5).unwrap()
    }

    #[test]
    fn monodromy_examples() {
        let c = Complex64::new(0.01, 0.02);
        let u = cycle_monodromy(&zero_k1(), &zero_k1().section(c)).unwrap();
        assert!((u.t1 - c.arg()).abs() < 1e-12 && (u.t2 - c.norm().ln()).abs() < 1e-12);
        let sys = s0_y_k1();
        let u = cycle_monodromy(&sys, &sys.section(c)).unwrap();
        assert!((u.t1 - c.arg()).abs() < 1e-12 && (u.t2 - c.norm().ln() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn period_and_sigma_examples() {
        let c = Complex64::new(-0.02, -0.01);
        let b = second_period(&zero_k1(), c).unwrap();
        assert!((b.t1 - (-c.arg()).rem_euclid(TAU)).abs() < 1e-12);
        assert!((b.t2 + c.norm().ln()).abs() < 1e-12 && b.t2 > 0.0);
        let s = desingularized_sigma(&zero_k1(), c).unwrap();
        assert!(s.sigma.norm() < 1e-9);
        let s = desingularized_sigma(&s0_y_k1(), c).unwrap();
        assert!(s.sigma.t1.abs() < 1e-8 && (s.sigma.t2 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn synthetic_gradient_fit() {
        // S = 0.3X + Y − 2XY + 0.5Y²
        let grid = SamplingGrid { rmin: 0.1, rmax: 1.0, radii: 3, angles: 16 };
        let samples: Vec<PeriodSample> = grid
            .points(0.1)
            .unwrap()
            .into_iter()
            .map(|c| {
                let (x, y) = (c.re, c.im);
                PeriodSample { c, beta2: BaseCovector::default(), sigma: BaseCovector::new(0.3 - 2.0 * y, 1.0 - 2.0 * x + y) }
            })
            .collect();
        let fit = fit_action_series(&samples, 2).unwrap();
        for (i, j, v) in [(1, 0, 0.3), (0, 1, 1.0), (1, 1, -2.0), (0, 2, 0.5), (2, 0, 0.0)] {
            assert!((fit.coeff(i, j) - v).abs() < 1e-12, "{i} {j} {}", fit.coeff(i, j));
        }
        assert!(fit.residual_rms < 1e-13);
        assert!(fit_action_series(&samples[..4], 2).is_err());
    }

    #[test]
    fn branch_continuation() {
        let mk = |t1: f64| PeriodSample { c: Complex64::new(1.0, 0.0), beta2: BaseCovector::default(), sigma: BaseCovector::new(t1, 0.0) };
        let mut s = vec![mk(3.1), mk(-3.1), mk(-3.0 + TAU)];
        continue_branch(&mut s).unwrap();
        assert!((s[1].sigma.t1 - (TAU - 3.1)).abs() < 1e-12);
        assert!((s[2].sigma.t1 - (TAU - 3.0)).abs() < 1e-12);
        let mut bad = vec![mk(0.0), mk(2.0)];
        assert!(matches!(continue_branch(&mut bad), Err(RecoveryError::BranchGap { .. })));
    }

    #[test]
    fn csv_roundtrip() {
        let s = vec![PeriodSample {
            c: Complex64::new(0.1, -1.0 / 3.0),
            beta2: BaseCovector::new(PI, 7.25),
            sigma: BaseCovector::new(-1e-17, 2.0),
        }];
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with(CSV_HEADER));
        assert_eq!(read_csv(&buf[..]).unwrap(), s);
    }

    #[test]
    fn half_pi_offset_is_recovered() {
        let mut s = TruncatedSeries::y(2);
        s.set_coeff(1, 0, PiRational::pi_multiple(num_rational::BigRational::new(1.into(), 2.into()))).unwrap();
        let data = InvariantTupleMinimal::new(1, ActionSeries::new(s), vec![]).unwrap();
        let report = roundtrip(&data, 0.5, &SamplingGrid::default(), 2, Some(2)).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
