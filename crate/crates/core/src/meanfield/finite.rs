//! Finite memory density: coupled equations for the condensed overlap `m`
//! and the spin-glass parameter `r`,
//!
//! ```text
//! m = sin(2Jt(m+gM)) · e^{-2ar}
//! r = (1 - cos(4Jt(m+gM)) · e^{-8ar}) / (2 (1 - 2Jt·cos(2Jt(m+gM)) · e^{-2ar})²)
//! ```
//!
//! with `a = (Jt)²α`.
//!
//! Fixed points are enumerated without touching the pole of the `r`
//! equation. Writing `x = e^{-2ar} ∈ (0, 1]`, the first equation gives
//! `x = m / sin(2Jt(m+gM))` for `m ≠ 0`, and the second becomes the
//! pole-free scalar equation
//!
//! ```text
//! G(m) = -ln(x) (1 - 2Jt·C·x)² - a (1 - C₄ x⁴) = 0
//! ```
//!
//! whose admissible domain ends where `x = 1`, i.e. at roots of
//! `m = sin(2Jt(m+gM))`. The `m = 0` family (present when
//! `sin(2Jt·gM) = 0`) reduces to one equation in `u = 2ar`.

use super::linear::{self, DampedIteration, IterationOutcome};
use super::single::longitudinal_roots;
use crate::error::{invalid, Error, Result};

/// Guard on `|1 - 2Jt·x|` in the `r` equation.
pub const SINGULAR_GUARD: f64 = 1e-8;

/// `|m|` above which a fixed point counts as retrieval.
pub const RETRIEVAL_THRESHOLD: f64 = 1e-3;

/// `r` above which an `m = 0` fixed point counts as spin glass.
pub const SPIN_GLASS_THRESHOLD: f64 = 1e-9;

pub const FINITE_ITERATION: DampedIteration =
    DampedIteration { lambda: 0.5, tolerance: 1e-12, max_iterations: 200_000, escape: 1e8 };

pub const MULTISTART_M: [f64; 6] = [0.0, 0.05, 0.2, 0.5, 0.9, 1.0];
pub const MULTISTART_R: [f64; 5] = [0.0, 0.1, 0.5, 1.0, 2.0];

const M_GRID_POINTS: usize = 4000;
const U_GRID_POINTS: usize = 6000;
const U_MIN: f64 = 1e-10;
const U_MAX: f64 = 800.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteMFParams {
    pub alpha: f64,
    pub jt: f64,
    pub gm: f64,
}

impl FiniteMFParams {
    pub fn new(alpha: f64, jt: f64, gm: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(invalid(format!("alpha must be finite and non-negative, got {alpha}")));
        }
        if !(jt.is_finite() && jt >= 0.0) {
            return Err(invalid(format!("Jt must be finite and non-negative, got {jt}")));
        }
        if !gm.is_finite() {
            return Err(invalid(format!("gM must be finite, got {gm}")));
        }
        Ok(Self { alpha, jt, gm })
    }

    /// `(Jt)²α`.
    pub fn noise_exponent(&self) -> f64 {
        self.jt * self.jt * self.alpha
    }
}

/// `∫ φ(z) sin(a + b z) dz = sin(a) e^{-b²/2}` for the standard normal
/// density `φ`.
pub fn gaussian_sin_average(a: f64, b: f64) -> f64 {
    a.sin() * (-0.5 * b * b).exp()
}

/// Gaussian averages of `sin²(2Jt(m+gM+√(αr) z))` and
/// `cos(2Jt(m+gM+√(αr) z))`.
pub fn gaussian_moments(m: f64, r: f64, p: &FiniteMFParams) -> (f64, f64) {
    let phase = 2.0 * p.jt * (m + p.gm);
    let a = p.noise_exponent();
    let sin2 = 0.5 * (1.0 - (2.0 * phase).cos() * (-8.0 * a * r).exp());
    let cos = phase.cos() * (-2.0 * a * r).exp();
    (sin2, cos)
}

/// Right-hand sides of both equations.
pub fn order_parameter_map(m: f64, r: f64, p: &FiniteMFParams) -> Result<[f64; 2]> {
    let phase = 2.0 * p.jt * (m + p.gm);
    let (s, c) = phase.sin_cos();
    let x = (-2.0 * p.noise_exponent() * r).exp();
    let den = 1.0 - 2.0 * p.jt * c * x;
    if den.abs() < SINGULAR_GUARD {
        return Err(Error::SingularDenominator(den.abs()));
    }
    let x2 = x * x;
    let num = 0.5 * (1.0 - (2.0 * phase).cos() * x2 * x2);
    Ok([s * x, num / (den * den)])
}

/// Left-minus-right of both equations.
pub fn order_parameter_residual(m: f64, r: f64, p: &FiniteMFParams) -> Result<(f64, f64)> {
    let [tm, tr] = order_parameter_map(m, r, p)?;
    Ok((m - tm, r - tr))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderParameters {
    pub m: f64,
    pub r: f64,
    /// Gaussian cosine moment at `(m, r)`.
    pub x: f64,
    /// `(1 - 2Jt·x)² r`.
    pub v: f64,
}

impl OrderParameters {
    pub fn at(m: f64, r: f64, p: &FiniteMFParams) -> Self {
        let (_, x) = gaussian_moments(m, r, p);
        let d = 1.0 - 2.0 * p.jt * x;
        Self { m, r, x, v: d * d * r }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteFixedPoint {
    pub order: OrderParameters,
    pub stable: bool,
    pub residual: [f64; 2],
    /// Eigenvalues `(re, im)` of the map Jacobian; `None` when a
    /// difference stencil hit the singular guard.
    pub eigenvalues: Option<[(f64, f64); 2]>,
    pub starts_converged: usize,
}

impl FiniteFixedPoint {
    pub fn is_retrieval(&self) -> bool {
        self.order.m.abs() > RETRIEVAL_THRESHOLD
    }

    pub fn is_spin_glass(&self) -> bool {
        !self.is_retrieval() && self.order.r > SPIN_GLASS_THRESHOLD
    }
}

#[derive(Debug, Clone)]
pub struct FiniteSolution {
    pub params: FiniteMFParams,
    /// Sorted by `(m, r)`.
    pub points: Vec<FiniteFixedPoint>,
    /// Enumerated candidates dropped because they sit on the singular guard.
    pub singular_candidates: usize,
    /// Multistart seeds whose iteration hit the singular guard.
    pub starts_singular: usize,
    /// Multistart seeds that escaped or ran out of iterations.
    pub starts_failed: usize,
}

impl FiniteSolution {
    pub fn stable(&self) -> impl Iterator<Item = &FiniteFixedPoint> {
        self.points.iter().filter(|q| q.stable)
    }

    pub fn has_stable_retrieval(&self) -> bool {
        self.stable().any(FiniteFixedPoint::is_retrieval)
    }

    /// One representative per `±m` pair when `gM = 0` (the `m ≥ 0` member,
    /// carrying the combined start count); all points otherwise.
    pub fn canonical(&self) -> Vec<FiniteFixedPoint> {
        if self.params.gm != 0.0 {
            return self.points.clone();
        }
        let mut out: Vec<FiniteFixedPoint> = Vec::new();
        for q in self.points.iter().filter(|q| q.order.m >= 0.0) {
            let mut q = q.clone();
            if let Some(twin) = self
                .points
                .iter()
                .find(|o| o.order.m < 0.0 && same_point([o.order.m, o.order.r], [-q.order.m, q.order.r]))
            {
                q.starts_converged += twin.starts_converged;
            }
            out.push(q);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiniteSolveOptions {
    /// Also run the damped iteration from every multistart seed to record
    /// basin counts and merge any point the enumeration missed.
    pub multistart: bool,
}

impl Default for FiniteSolveOptions {
    fn default() -> Self {
        Self { multistart: true }
    }
}

fn same_point(a: [f64; 2], b: [f64; 2]) -> bool {
    (a[0] - b[0]).abs() <= 1e-6 && (a[1] - b[1]).abs() <= 1e-6 * b[1].abs().max(1.0)
}

/// Reduced equation on the `m ≠ 0` branch. `boundary` marks nodes where
/// `x = 1` holds exactly.
fn reduced_g(m: f64, boundary: bool, p: &FiniteMFParams) -> f64 {
    let phase = 2.0 * p.jt * (m + p.gm);
    let (s, c) = phase.sin_cos();
    let x = if boundary { 1.0 } else { m / s };
    if !(s != 0.0 && x > 0.0 && x <= 1.0) {
        return f64::NAN;
    }
    let x2 = x * x;
    let d = 1.0 - 2.0 * p.jt * c * x;
    -x.ln() * d * d - p.noise_exponent() * (1.0 - (2.0 * phase).cos() * x2 * x2)
}

/// Unclamped variant used inside brackets known to be admissible.
fn reduced_g_interior(m: f64, p: &FiniteMFParams) -> f64 {
    let phase = 2.0 * p.jt * (m + p.gm);
    let (s, c) = phase.sin_cos();
    let x = (m / s).min(1.0);
    let x2 = x * x;
    let d = 1.0 - 2.0 * p.jt * c * x;
    -x.ln() * d * d - p.noise_exponent() * (1.0 - (2.0 * phase).cos() * x2 * x2)
}

fn retrieval_candidates(p: &FiniteMFParams, boundaries: &[f64]) -> Vec<[f64; 2]> {
    let a = p.noise_exponent();
    let mut out = Vec::new();
    for sign in [-1.0, 1.0] {
        let mut nodes: Vec<(f64, bool)> = (1..=M_GRID_POINTS)
            .map(|k| (sign * k as f64 / M_GRID_POINTS as f64, false))
            .collect();
        nodes.extend(boundaries.iter().filter(|&&b| b * sign > 0.0).map(|&b| (b, true)));
        nodes.sort_by(|u, v| u.0.total_cmp(&v.0));
        let values: Vec<f64> = nodes.iter().map(|&(m, b)| reduced_g(m, b, p)).collect();
        for k in 0..nodes.len().saturating_sub(1) {
            let (v0, v1) = (values[k], values[k + 1]);
            if !(v0.is_finite() && v1.is_finite()) || v0 == 0.0 {
                continue;
            }
            if v1 == 0.0 || (v0 < 0.0) != (v1 < 0.0) {
                let m = super::roots::bisect(
                    |m| reduced_g_interior(m, p),
                    nodes[k].0,
                    nodes[k + 1].0,
                    v0,
                    v1,
                );
                let s = (2.0 * p.jt * (m + p.gm)).sin();
                let x = (m / s).min(1.0);
                out.push([m, (-x.ln() / (2.0 * a)).max(0.0)]);
            }
        }
    }
    out
}

/// Roots `u > 0` of `(1 - 2Jt·C₀ e^{-u})² - a(1 - e^{-4u})/u` on a
/// logarithmic grid; each gives an `m = 0` point with `r = u/(2a)`.
fn spin_glass_candidates(p: &FiniteMFParams) -> Vec<[f64; 2]> {
    let a = p.noise_exponent();
    let c0 = (2.0 * p.jt * p.gm).cos();
    let h = |u: f64| {
        let d = 1.0 - 2.0 * p.jt * c0 * (-u).exp();
        d * d + a * (-4.0 * u).exp_m1() / u
    };
    let ratio = (U_MAX / U_MIN).ln() / (U_GRID_POINTS - 1) as f64;
    let nodes: Vec<f64> = (0..U_GRID_POINTS).map(|k| U_MIN * (ratio * k as f64).exp()).collect();
    super::roots::scan_roots(h, &nodes)
        .into_iter()
        .map(|u| [0.0, u / (2.0 * a)])
        .collect()
}

/// Newton on the `r` equation with `m = 0` held fixed.
fn polish_zero_m(r0: f64, p: &FiniteMFParams) -> Result<(f64, f64)> {
    let f = |r: f64| order_parameter_residual(0.0, r, p).map(|(_, rr)| rr);
    let mut r = r0;
    let mut fr = f(r)?;
    for _ in 0..30 {
        if fr == 0.0 {
            break;
        }
        let h = 1e-7 * r.abs().max(1.0);
        let (Ok(fp), Ok(fm)) = (f(r + h), f(r - h)) else { break };
        let slope = (fp - fm) / (2.0 * h);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = (r - fr / slope).max(0.0);
        let Ok(fn_) = f(next) else { break };
        if fn_.abs().partial_cmp(&fr.abs()) != Some(std::cmp::Ordering::Less) {
            break;
        }
        r = next;
        fr = fn_;
    }
    Ok((r, fr))
}

fn polish(x: [f64; 2], p: &FiniteMFParams) -> Result<([f64; 2], [f64; 2])> {
    if x[0] == 0.0 && (2.0 * p.jt * p.gm).sin() == 0.0 {
        let (r, fr) = polish_zero_m(x[1], p)?;
        return Ok(([0.0, r], [0.0, fr]));
    }
    let res = |v: [f64; 2]| order_parameter_residual(v[0], v[1], p).map(|(a, b)| [a, b]);
    linear::newton_polish(res, x, 30)
}

fn make_point(x: [f64; 2], residual: [f64; 2], p: &FiniteMFParams) -> FiniteFixedPoint {
    let map = |v: [f64; 2]| order_parameter_map(v[0], v[1], p);
    let jac = linear::central_jacobian(map, x).ok();
    FiniteFixedPoint {
        order: OrderParameters::at(x[0], x[1], p),
        stable: jac.as_ref().is_some_and(linear::is_stable),
        residual,
        eigenvalues: jac.as_ref().map(linear::eigenvalues),
        starts_converged: 0,
    }
}

/// Central-difference Jacobian of the map at `(m, r)`.
pub fn order_parameter_jacobian(m: f64, r: f64, p: &FiniteMFParams) -> Result<linear::Mat2> {
    linear::central_jacobian(|v| order_parameter_map(v[0], v[1], p), [m, r])
}

/// Enumerated candidate fixed points before polishing.
fn candidates(p: &FiniteMFParams) -> Vec<[f64; 2]> {
    let a = p.noise_exponent();
    let roots = longitudinal_roots(p.jt, p.gm);
    if a == 0.0 {
        // r decouples: m solves the noiseless equation, r follows directly.
        return roots
            .into_iter()
            .map(|m| {
                let phase = 2.0 * p.jt * (m + p.gm);
                let (s, c) = phase.sin_cos();
                let d = 1.0 - 2.0 * p.jt * c;
                [m, s * s / (d * d)]
            })
            .collect();
    }
    let mut out = retrieval_candidates(p, &roots);
    if (2.0 * p.jt * p.gm).sin() == 0.0 {
        out.push([0.0, 0.0]);
        out.extend(spin_glass_candidates(p));
    }
    out
}

pub fn solve_order_parameters(p: &FiniteMFParams) -> Result<FiniteSolution> {
    solve_order_parameters_with(p, FiniteSolveOptions::default())
}

pub fn solve_order_parameters_with(
    p: &FiniteMFParams,
    options: FiniteSolveOptions,
) -> Result<FiniteSolution> {
    let p = FiniteMFParams::new(p.alpha, p.jt, p.gm)?;
    let mut points: Vec<FiniteFixedPoint> = Vec::new();
    let mut singular_candidates = 0;
    for c in candidates(&p) {
        if !c[1].is_finite() {
            singular_candidates += 1;
            continue;
        }
        match polish(c, &p) {
            Ok((x, r)) => {
                if !points.iter().any(|q| same_point([q.order.m, q.order.r], x)) {
                    points.push(make_point(x, r, &p));
                }
            }
            Err(Error::SingularDenominator(_)) => singular_candidates += 1,
            Err(e) => return Err(e),
        }
    }

    let (mut starts_singular, mut starts_failed) = (0, 0);
    if options.multistart {
        let map = |v: [f64; 2]| order_parameter_map(v[0], v[1], &p);
        for &m0 in &MULTISTART_M {
            for &r0 in &MULTISTART_R {
                match FINITE_ITERATION.run(map, [m0, r0]) {
                    IterationOutcome::Converged { x, .. } => {
                        match points.iter_mut().find(|q| same_point(x, [q.order.m, q.order.r])) {
                            Some(q) => q.starts_converged += 1,
                            None => match polish(x, &p) {
                                Ok((x, r)) => {
                                    let mut q = make_point(x, r, &p);
                                    q.starts_converged = 1;
                                    points.push(q);
                                }
                                Err(_) => starts_singular += 1,
                            },
                        }
                    }
                    IterationOutcome::MapFailed => starts_singular += 1,
                    IterationOutcome::Escaped | IterationOutcome::MaxIterations => {
                        starts_failed += 1
                    }
                }
            }
        }
    }

    if points.is_empty() {
        return Err(if singular_candidates + starts_singular > 0 {
            Error::SingularDenominator(0.0)
        } else {
            Error::NoConvergence(format!(
                "no fixed point at alpha={}, Jt={}, gM={}",
                p.alpha, p.jt, p.gm
            ))
        });
    }
    points.sort_by(|a, b| a.order.m.total_cmp(&b.order.m).then(a.order.r.total_cmp(&b.order.r)));
    Ok(FiniteSolution { params: p, points, singular_candidates, starts_singular, starts_failed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    P,
    F,
    SG,
    FSG,
}

impl Phase {
    pub const ALL: [Phase; 4] = [Phase::P, Phase::F, Phase::SG, Phase::FSG];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::P => "P",
            Phase::F => "F",
            Phase::SG => "SG",
            Phase::FSG => "F_SG",
        }
    }

    /// Human-readable name used in plots.
    pub fn display_name(self) -> &'static str {
        match self {
            Phase::FSG => "F+SG",
            other => other.as_str(),
        }
    }

    pub fn is_ferromagnetic(self) -> bool {
        matches!(self, Phase::F | Phase::FSG)
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" => Ok(Phase::P),
            "F" => Ok(Phase::F),
            "SG" => Ok(Phase::SG),
            "F_SG" | "F+SG" => Ok(Phase::FSG),
            other => Err(invalid(format!("unknown phase label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLabel {
    pub phase: Phase,
    /// Representative overlap (largest stable `|m|` for F-type phases,
    /// reported non-negative when `gM = 0`).
    pub m: f64,
    pub r: f64,
    /// A stable fixed point with `m ≈ 0` exists.
    pub stable_zero_exists: bool,
}

/// Reads the phase off the stable fixed points. Uses the enumeration
/// without the multistart pass. Fails when no fixed point is stable.
pub fn classify_phase(p: &FiniteMFParams) -> Result<PhaseLabel> {
    let sol = solve_order_parameters_with(p, FiniteSolveOptions { multistart: false })?;
    classify_solution(&sol)
}

pub fn classify_solution(sol: &FiniteSolution) -> Result<PhaseLabel> {
    let best_retrieval = sol
        .stable()
        .filter(|q| q.is_retrieval())
        .max_by(|a, b| a.order.m.abs().total_cmp(&b.order.m.abs()).then(a.order.m.total_cmp(&b.order.m)));
    let zeros: Vec<_> = sol.stable().filter(|q| !q.is_retrieval()).collect();
    let glass = zeros
        .iter()
        .filter(|q| q.is_spin_glass())
        .min_by(|a, b| a.order.r.total_cmp(&b.order.r));
    let stable_zero_exists = !zeros.is_empty();
    let label = |phase, m: f64, r| PhaseLabel { phase, m, r, stable_zero_exists };
    let shown_m = |m: f64| if sol.params.gm == 0.0 { m.abs() } else { m };
    match (best_retrieval, glass) {
        (Some(f), Some(_)) => Ok(label(Phase::FSG, shown_m(f.order.m), f.order.r)),
        (Some(f), None) => Ok(label(Phase::F, shown_m(f.order.m), f.order.r)),
        (None, Some(g)) => Ok(label(Phase::SG, g.order.m, g.order.r)),
        (None, None) => match zeros.first() {
            Some(z) => Ok(label(Phase::P, z.order.m, z.order.r)),
            None if sol.singular_candidates > 0 => Err(Error::SingularDenominator(0.0)),
            None => Err(Error::NoConvergence(format!(
                "no stable fixed point at alpha={}, Jt={}",
                sol.params.alpha, sol.params.jt
            ))),
        },
    }
}

/// Stable retrieval exists at `(alpha, jt, gm)`.
pub fn retrieval_exists(alpha: f64, jt: f64, gm: f64) -> Result<bool> {
    let p = FiniteMFParams::new(alpha, jt, gm)?;
    Ok(solve_order_parameters_with(&p, FiniteSolveOptions { multistart: false })?
        .has_stable_retrieval())
}

/// Coarse `α` spacing and range of the capacity search.
pub const CAPACITY_COARSE_STEP: f64 = 0.05;
pub const CAPACITY_ALPHA_MAX: f64 = 2.0;

/// Largest `α` with a stable retrieval fixed point, to within
/// `resolution`. A coarse scan finds the last retrieving grid value; the
/// step above it is then bisected.
pub fn capacity_at(jt: f64, gm: f64, resolution: f64) -> Result<f64> {
    if !(jt.is_finite() && jt > 0.0) {
        return Err(invalid(format!("Jt must be positive, got {jt}")));
    }
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(invalid(format!("resolution must be positive, got {resolution}")));
    }
    // A solution set made only of singular points holds no retrieval point.
    let retrieves = |alpha: f64| match retrieval_exists(alpha, jt, gm) {
        Err(Error::SingularDenominator(_)) => Ok(false),
        other => other,
    };
    let steps = (CAPACITY_ALPHA_MAX / CAPACITY_COARSE_STEP).round() as usize;
    let mut last = None;
    for k in 0..=steps {
        let alpha = CAPACITY_COARSE_STEP * k as f64;
        if retrieves(alpha)? {
            last = Some(k);
        }
    }
    let Some(k) = last else { return Ok(0.0) };
    if k == steps {
        return Ok(CAPACITY_ALPHA_MAX);
    }
    let mut lo = CAPACITY_COARSE_STEP * k as f64;
    let mut hi = CAPACITY_COARSE_STEP * (k + 1) as f64;
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if retrieves(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
