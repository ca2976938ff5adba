//! Single condensed pattern: the self-consistency map
//!
//! ```text
//! T(m_y, m_z) = sin(2Jt|m|)/|m| · (-m_y, m_z + gM),   |m| = sqrt(m_y² + (m_z + gM)²)
//! ```
//!
//! extended continuously to `|m| = 0` through `sin(2Jt|m|)/|m| → 2Jt`.
//!
//! Fixed points are enumerated exhaustively. On `m_y = 0` the map reduces to
//! `m_z = sin(2Jt(m_z + gM))`. Off that line the `y` component forces
//! `sin(2Jt|m|) = -|m|`, and then the `z` component forces `m_z = -gM/2`.
//! Both are scalar problems solved by grid scan and bisection.

use rayon::prelude::*;

use super::linear::{self, DampedIteration, IterationOutcome, Mat2};
use super::roots::{scan_roots, sinc, symmetric_grid};
use crate::error::{invalid, Error, Result};

/// Dedupe radius for fixed points.
pub const DEDUP_RADIUS: f64 = 1e-6;

/// Overlaps below this magnitude count as zero when reading off branches.
pub const NONZERO_THRESHOLD: f64 = 1e-6;

const SCAN_HALF_POINTS: usize = 2000;
const SCAN_EXTENT: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleMFParams {
    pub jt: f64,
    pub gm: f64,
}

impl SingleMFParams {
    pub fn new(jt: f64, gm: f64) -> Result<Self> {
        if !(jt.is_finite() && jt >= 0.0) {
            return Err(invalid(format!("Jt must be finite and non-negative, got {jt}")));
        }
        if !gm.is_finite() {
            return Err(invalid(format!("gM must be finite, got {gm}")));
        }
        Ok(Self { jt, gm })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MFFixedPoint {
    pub m_y: f64,
    pub m_z: f64,
    pub stable: bool,
    /// `sqrt(m_y² + (m_z + gM)²)`.
    pub magnitude: f64,
    pub residual: [f64; 2],
    /// Eigenvalues `(re, im)` of the map Jacobian.
    pub eigenvalues: [(f64, f64); 2],
    /// Multistart iterations that converged onto this point.
    pub starts_converged: usize,
}

/// The map `T` above.
pub fn single_pattern_map(m_y: f64, m_z: f64, p: &SingleMFParams) -> [f64; 2] {
    let u = m_z + p.gm;
    let rho = m_y.hypot(u);
    let g = 2.0 * p.jt * sinc(2.0 * p.jt * rho);
    [-m_y * g, u * g]
}

/// Left-minus-right of both self-consistency equations.
pub fn single_pattern_residual(m_y: f64, m_z: f64, p: &SingleMFParams) -> (f64, f64) {
    let [ty, tz] = single_pattern_map(m_y, m_z, p);
    (m_y - ty, m_z - tz)
}

/// Jacobian of `T` by central differences.
pub fn single_pattern_jacobian(m_y: f64, m_z: f64, p: &SingleMFParams) -> Mat2 {
    let map = |x: [f64; 2]| Ok::<_, ()>(single_pattern_map(x[0], x[1], p));
    linear::central_jacobian(map, [m_y, m_z]).expect("map is total")
}

/// Roots of `m = sin(2Jt(m + gM))` on `[-1.01, 1.01]`.
pub fn longitudinal_roots(jt: f64, gm: f64) -> Vec<f64> {
    let nodes = symmetric_grid(SCAN_EXTENT, SCAN_HALF_POINTS);
    scan_roots(|m| m - (2.0 * jt * (m + gm)).sin(), &nodes)
}

/// Fixed points off the `m_y = 0` line: `(±sqrt(ρ² - gM²/4), -gM/2)` for
/// each root `ρ > |gM|/2` of `sin(2Jtρ) + ρ = 0`.
fn transverse_points(p: &SingleMFParams) -> Vec<[f64; 2]> {
    let rho_min = 0.5 * p.gm.abs();
    if rho_min >= 1.0 || p.jt == 0.0 {
        return Vec::new();
    }
    let count = 2 * SCAN_HALF_POINTS;
    let step = (SCAN_EXTENT - rho_min) / count as f64;
    let nodes: Vec<f64> = (1..=count).map(|k| rho_min + step * k as f64).collect();
    let mut out = Vec::new();
    for rho in scan_roots(|r| (2.0 * p.jt * r).sin() + r, &nodes) {
        let my2 = rho * rho - rho_min * rho_min;
        if my2 <= 0.0 {
            continue;
        }
        let my = my2.sqrt();
        out.push([my, -0.5 * p.gm]);
        out.push([-my, -0.5 * p.gm]);
    }
    out
}

fn close(a: [f64; 2], b: [f64; 2]) -> bool {
    (a[0] - b[0]).abs() <= DEDUP_RADIUS && (a[1] - b[1]).abs() <= DEDUP_RADIUS
}

fn polish(x: [f64; 2], p: &SingleMFParams) -> ([f64; 2], [f64; 2]) {
    let res = |v: [f64; 2]| {
        let (a, b) = single_pattern_residual(v[0], v[1], p);
        Ok::<_, ()>([a, b])
    };
    linear::newton_polish(res, x, 20).expect("residual is total")
}

fn make_point(x: [f64; 2], residual: [f64; 2], p: &SingleMFParams) -> MFFixedPoint {
    let jac = single_pattern_jacobian(x[0], x[1], p);
    MFFixedPoint {
        m_y: x[0],
        m_z: x[1],
        stable: linear::is_stable(&jac),
        magnitude: x[0].hypot(x[1] + p.gm),
        residual,
        eigenvalues: linear::eigenvalues(&jac),
        starts_converged: 0,
    }
}

/// Multistart grid for the damped iteration.
pub const MULTISTART_VALUES: [f64; 7] = [0.0, 0.1, -0.1, 0.5, -0.5, 1.0, -1.0];

pub const SINGLE_ITERATION: DampedIteration =
    DampedIteration { lambda: 0.5, tolerance: 1e-12, max_iterations: 100_000, escape: 10.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Also run the damped iteration from every multistart seed, merging
    /// any point it finds and recording per-point convergence counts.
    pub multistart: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { multistart: true }
    }
}

/// All fixed points, sorted by `(m_z, m_y)`.
pub fn solve_single_pattern(p: &SingleMFParams) -> Result<Vec<MFFixedPoint>> {
    solve_single_pattern_with(p, SolveOptions::default())
}

pub fn solve_single_pattern_with(
    p: &SingleMFParams,
    options: SolveOptions,
) -> Result<Vec<MFFixedPoint>> {
    let p = &SingleMFParams::new(p.jt, p.gm)?;
    let mut candidates: Vec<[f64; 2]> =
        longitudinal_roots(p.jt, p.gm).into_iter().map(|m| [0.0, m]).collect();
    candidates.extend(transverse_points(p));

    let mut points: Vec<MFFixedPoint> = Vec::new();
    for c in candidates {
        let (x, r) = polish(c, p);
        if !points.iter().any(|q| close([q.m_y, q.m_z], x)) {
            points.push(make_point(x, r, p));
        }
    }

    if options.multistart {
        let map = |x: [f64; 2]| Ok::<_, ()>(single_pattern_map(x[0], x[1], p));
        let mut any_converged = false;
        for &y in &MULTISTART_VALUES {
            for &z in &MULTISTART_VALUES {
                if let IterationOutcome::Converged { x, .. } = SINGLE_ITERATION.run(map, [y, z]) {
                    any_converged = true;
                    match points.iter_mut().find(|q| close([q.m_y, q.m_z], x)) {
                        Some(q) => q.starts_converged += 1,
                        None => {
                            let (x, r) = polish(x, p);
                            let mut q = make_point(x, r, p);
                            q.starts_converged = 1;
                            points.push(q);
                        }
                    }
                }
            }
        }
        if points.is_empty() && !any_converged {
            return Err(Error::NoConvergence(format!(
                "no fixed point at Jt={}, gM={} from enumeration or any start",
                p.jt, p.gm
            )));
        }
    }
    if points.is_empty() {
        return Err(Error::NoConvergence(format!("no fixed point at Jt={}, gM={}", p.jt, p.gm)));
    }
    points.sort_by(|a, b| a.m_z.total_cmp(&b.m_z).then(a.m_y.total_cmp(&b.m_y)));
    Ok(points)
}

#[derive(Debug, Clone)]
pub struct BifurcationPoint {
    pub jt: f64,
    pub fixed_points: Vec<MFFixedPoint>,
}

impl BifurcationPoint {
    /// `m_z` of every stable fixed point.
    pub fn stable_m_z(&self) -> Vec<f64> {
        self.fixed_points.iter().filter(|q| q.stable).map(|q| q.m_z).collect()
    }

    fn has_nonzero_stable(&self) -> bool {
        self.stable_m_z().iter().any(|m| m.abs() > NONZERO_THRESHOLD)
    }
}

#[derive(Debug, Clone)]
pub struct BifurcationScan {
    pub gm: f64,
    pub points: Vec<BifurcationPoint>,
    /// Midpoint of the last grid point whose stable branches all have
    /// `m_z = 0` and the first point with a nonzero stable branch.
    pub critical_jt: Option<f64>,
}

/// Fixed points on an endpoint-inclusive `Jt` grid. Uses the exhaustive
/// enumeration only; the multistart cross-check is skipped for speed.
pub fn bifurcation_scan(jt_min: f64, jt_max: f64, steps: usize, gm: f64) -> Result<BifurcationScan> {
    if !(jt_min.is_finite() && jt_max.is_finite() && jt_min < jt_max) {
        return Err(invalid(format!("need Jt_min < Jt_max, got [{jt_min}, {jt_max}]")));
    }
    if jt_min < 0.0 {
        return Err(invalid("Jt must be non-negative"));
    }
    if steps < 2 {
        return Err(invalid("steps must be at least 2"));
    }
    let grid = crate::quantum::linspace(jt_min, jt_max, steps);
    let options = SolveOptions { multistart: false };
    let points = grid
        .par_iter()
        .map(|&jt| {
            let fixed_points = solve_single_pattern_with(&SingleMFParams::new(jt, gm)?, options)?;
            Ok(BifurcationPoint { jt, fixed_points })
        })
        .collect::<Result<Vec<_>>>()?;
    let critical_jt = points.windows(2).find_map(|w| {
        (!w[0].has_nonzero_stable() && w[1].has_nonzero_stable())
            .then(|| 0.5 * (w[0].jt + w[1].jt))
    });
    Ok(BifurcationScan { gm, points, critical_jt })
}

/// `(p_+, p_-) = ((1 + sin 2Jt·h)/2, (1 - sin 2Jt·h)/2)`. The larger value
/// is formed first and the smaller as its exact complement, so the pair
/// sums to 1 exactly and `p_+(h) + p_+(-h) = 1` exactly.
pub fn activation_probability(h: f64, jt: f64) -> (f64, f64) {
    let s = (2.0 * jt * h).sin();
    let hi = 0.5 * (1.0 + s.abs());
    let lo = 1.0 - hi;
    if s >= 0.0 {
        (hi, lo)
    } else {
        (lo, hi)
    }
}

/// Single-qubit rotation `[[cos θ, sin θ], [-sin θ, cos θ]]`, `θ = Jt·h`.
pub fn mf_rotation(h: f64, jt: f64) -> Mat2 {
    let (s, c) = (jt * h).sin_cos();
    [[c, s], [-s, c]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn params(jt: f64, gm: f64) -> SingleMFParams {
        SingleMFParams::new(jt, gm).unwrap()
    }

    /// Independent bisection for the positive root of `m = sin(2Jt m)`.
    fn oracle_m0(jt: f64) -> f64 {
        let (mut a, mut b) = (1e-3, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid - (2.0 * jt * mid).sin() < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn residual_examples() {
        assert_eq!(single_pattern_residual(0.0, 0.0, &params(1.3, 0.0)), (0.0, 0.0));
        let (ry, rz) = single_pattern_residual(0.0, 1.0, &params(FRAC_PI_4, 0.0));
        assert_eq!(ry, 0.0);
        assert!(rz.abs() < 1e-15);
        let m0 = oracle_m0(0.6);
        assert!((m0 - 0.855).abs() < 1e-3);
        let (_, rz) = single_pattern_residual(0.0, 0.855, &params(0.6, 0.0));
        assert!(rz.abs() < 1e-3);
        let (_, rz) = single_pattern_residual(0.0, m0, &params(0.6, 0.0));
        assert!(rz.abs() < 1e-15);
    }

    #[test]
    fn zero_magnitude_limit_is_linear() {
        let p = params(0.7, 0.0);
        let [ty, tz] = single_pattern_map(1e-9, -2e-9, &p);
        assert!((ty + 1.4e-9).abs() < 1e-20);
        assert!((tz + 2.8e-9).abs() < 1e-20);
    }

    #[test]
    fn below_transition_only_origin() {
        let pts = solve_single_pattern(&params(0.4, 0.0)).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!((pts[0].m_y, pts[0].m_z), (0.0, 0.0));
        assert!(pts[0].stable);
        assert_eq!(pts[0].starts_converged, 49);
    }

    #[test]
    fn perfect_recall_point() {
        let pts = solve_single_pattern(&params(FRAC_PI_4, 0.0)).unwrap();
        assert_eq!(pts.len(), 3);
        assert!((pts[0].m_z + 1.0).abs() < 1e-12 && pts[0].stable);
        assert!(pts[1].m_z == 0.0 && !pts[1].stable);
        assert!((pts[2].m_z - 1.0).abs() < 1e-12 && pts[2].stable);
    }

    #[test]
    fn three_points_on_the_symmetric_window() {
        for k in 1..=36 {
            let jt = 0.5 + 0.05 * k as f64;
            if jt >= 2.3 {
                break;
            }
            let pts = solve_single_pattern(&params(jt, 0.0)).unwrap();
            assert_eq!(pts.len(), 3, "Jt={jt}");
            assert!(pts.iter().all(|q| q.m_y == 0.0));
            assert!(pts[0].stable && !pts[1].stable && pts[2].stable, "Jt={jt}");
            assert!((pts[2].m_z - oracle_m0(jt)).abs() < 1e-12);
            assert!((pts[0].m_z + pts[2].m_z).abs() < 1e-15);
        }
    }

    #[test]
    fn transverse_points_satisfy_the_map() {
        let pts = solve_single_pattern(&params(3.0 * PI / 4.0 + 0.2, 0.0)).unwrap();
        let transverse: Vec<_> = pts.iter().filter(|q| q.m_y.abs() > 1e-6).collect();
        assert!(!transverse.is_empty());
        for q in &transverse {
            assert_eq!(q.m_z, 0.0);
            assert!(q.residual[0].abs() < 1e-12 && q.residual[1].abs() < 1e-12);
        }
        // Z2 pairs share stability.
        for q in &pts {
            let twin = pts.iter().find(|o| close([o.m_y, o.m_z], [-q.m_y, -q.m_z])).unwrap();
            assert_eq!(twin.stable, q.stable);
        }
    }

    #[test]
    fn no_mixed_points_below_transverse_onset() {
        for k in 0..=45 {
            let jt = 0.05 * k as f64;
            let pts = solve_single_pattern(&params(jt, 0.0)).unwrap();
            assert!(pts.iter().all(|q| q.m_y.abs() < 1e-9 || q.m_z.abs() < 1e-9));
        }
    }

    #[test]
    fn stability_matches_forward_iteration() {
        for jt in [0.4, 0.6, FRAC_PI_4, 1.2, 2.0] {
            for q in solve_single_pattern(&params(jt, 0.0)).unwrap() {
                let jac = single_pattern_jacobian(q.m_y, q.m_z, &params(jt, 0.0));
                let map = |x: [f64; 2]| Ok::<_, ()>(single_pattern_map(x[0], x[1], &params(jt, 0.0)));
                let start = [q.m_y + 1e-4, q.m_z + 1e-4];
                let lambda = linear::contractive_damping(&jac).unwrap_or(0.5);
                let it = DampedIteration { lambda, tolerance: 1e-13, max_iterations: 200_000, escape: 10.0 };
                let back = matches!(
                    it.run(map, start),
                    IterationOutcome::Converged { x, .. } if close(x, [q.m_y, q.m_z])
                );
                assert_eq!(back, q.stable, "Jt={jt} point ({}, {})", q.m_y, q.m_z);
            }
        }
    }

    #[test]
    fn bifurcation_near_one_half() {
        let scan = bifurcation_scan(0.3, 0.7, 400, 0.0).unwrap();
        let c = scan.critical_jt.unwrap();
        assert!((c - 0.5).abs() <= 0.4 / 399.0, "{c}");
    }

    #[test]
    fn branch_increases_to_one() {
        let scan = bifurcation_scan(0.7, FRAC_PI_4, 60, 0.0).unwrap();
        let branch: Vec<f64> = scan
            .points
            .iter()
            .map(|p| p.stable_m_z().into_iter().fold(f64::MIN, f64::max))
            .collect();
        for (w, p) in branch.windows(2).zip(&scan.points[1..]) {
            assert!(w[1] > w[0]);
            assert!((w[1] - oracle_m0(p.jt)).abs() < 1e-12);
        }
        assert!((branch.last().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn external_drive_selects_sign() {
        for gm in [0.05, -0.05] {
            let scan = bifurcation_scan(0.3, 0.7, 41, gm).unwrap();
            assert!(scan.critical_jt.is_none());
            for p in &scan.points {
                let best = p
                    .fixed_points
                    .iter()
                    .filter(|q| q.stable)
                    .max_by(|a, b| a.starts_converged.cmp(&b.starts_converged).then(a.m_z.abs().total_cmp(&b.m_z.abs())))
                    .unwrap();
                assert!(best.m_z * gm > 0.0, "Jt={}", p.jt);
            }
        }
    }

    #[test]
    fn activation_examples() {
        assert_eq!(activation_probability(0.0, 1.0), (0.5, 0.5));
        let (pp, pm) = activation_probability(1.0, FRAC_PI_4);
        assert_eq!((pp, pm), (1.0, 0.0));
        for k in 0..100 {
            let h = -1.0 + 0.021 * k as f64;
            let (a, b) = activation_probability(h, 0.37);
            let (c, _) = activation_probability(-h, 0.37);
            assert_eq!(a + b, 1.0);
            assert_eq!(a + c, 1.0);
        }
    }

    #[test]
    fn activation_monotone_below_pi_over_4() {
        let jt = 0.7;
        let mut prev = -1.0;
        for k in 0..=200 {
            let h = -1.0 + 0.01 * k as f64;
            let (p, _) = activation_probability(h, jt);
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn rotation_is_orthogonal_and_matches_spinor() {
        assert_eq!(mf_rotation(0.0, 2.0), [[1.0, 0.0], [-0.0, 1.0]]);
        for (h, jt) in [(0.3, 1.1), (-0.8, 0.4), (1.0, 2.5)] {
            let m = mf_rotation(h, jt);
            for i in 0..2 {
                for j in 0..2 {
                    let dot = m[0][i] * m[0][j] + m[1][i] * m[1][j];
                    assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
            let v = [
                FRAC_1_SQRT_2 * (m[0][0] + m[0][1]),
                FRAC_1_SQRT_2 * (m[1][0] + m[1][1]),
            ];
            let (s, c) = (jt * h).sin_cos();
            assert!((v[0] - FRAC_1_SQRT_2 * (c + s)).abs() < 1e-15);
            assert!((v[1] - FRAC_1_SQRT_2 * (c - s)).abs() < 1e-15);
            let (pp, pm) = activation_probability(h, jt);
            assert!((v[0] * v[0] - pp).abs() < 1e-12);
            assert!((v[1] * v[1] - pm).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SingleMFParams::new(-0.1, 0.0).is_err());
        assert!(SingleMFParams::new(f64::NAN, 0.0).is_err());
        assert!(bifurcation_scan(0.7, 0.3, 10, 0.0).is_err());
        assert!(bifurcation_scan(0.3, 0.7, 1, 0.0).is_err());
    }
}
