//! Phase diagram over the `(α, Jt)` plane.
//!
//! Samples are endpoint-inclusive on both axes, and each sample is the
//! center of its drawn cell. Cells are stored row-major with `α` as the
//! outer index.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::format::sig;
use crate::meanfield::{classify_phase, FiniteMFParams, Phase, PhaseLabel};
use crate::quantum::linspace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_steps: usize,
    pub jt_min: f64,
    pub jt_max: f64,
    pub jt_steps: usize,
    pub gm: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            alpha_min: 0.0,
            alpha_max: 1.2,
            alpha_steps: 60,
            jt_min: 0.0,
            jt_max: 12.0,
            jt_steps: 60,
            gm: 0.0,
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        for (name, lo, hi, steps) in [
            ("alpha", self.alpha_min, self.alpha_max, self.alpha_steps),
            ("Jt", self.jt_min, self.jt_max, self.jt_steps),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(invalid(format!("{name} range needs min < max, got [{lo}, {hi}]")));
            }
            if lo < 0.0 {
                return Err(invalid(format!("{name} must be non-negative")));
            }
            if steps < 2 {
                return Err(invalid(format!("{name} steps must be at least 2")));
            }
        }
        if !self.gm.is_finite() {
            return Err(invalid("gM must be finite"));
        }
        Ok(())
    }

    pub fn alphas(&self) -> Vec<f64> {
        linspace(self.alpha_min, self.alpha_max, self.alpha_steps)
    }

    pub fn jts(&self) -> Vec<f64> {
        linspace(self.jt_min, self.jt_max, self.jt_steps)
    }

    pub fn alpha_spacing(&self) -> f64 {
        (self.alpha_max - self.alpha_min) / (self.alpha_steps - 1) as f64
    }

    pub fn jt_spacing(&self) -> f64 {
        (self.jt_max - self.jt_min) / (self.jt_steps - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.alpha_steps * self.jt_steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Labeled(PhaseLabel),
    /// Singular or failed cell, with the reason.
    Unresolved(String),
}

impl CellOutcome {
    pub fn phase(&self) -> Option<Phase> {
        match self {
            CellOutcome::Labeled(l) => Some(l.phase),
            CellOutcome::Unresolved(_) => None,
        }
    }
}

/// Direction across which adjacent cells are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    Alpha,
    Jt,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Alpha => "alpha",
            Axis::Jt => "Jt",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(Axis::Alpha),
            "Jt" | "jt" => Ok(Axis::Jt),
            other => Err(invalid(format!("unknown axis {other:?}"))),
        }
    }
}

/// Unordered phase pair, stored with the smaller label first.
pub fn phase_pair(a: Phase, b: Phase) -> (Phase, Phase) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    pub pair: (Phase, Phase),
    pub axis: Axis,
    /// `(α, Jt)` points.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct PhaseDiagram {
    pub grid: SweepGrid,
    pub cells: Vec<CellOutcome>,
    pub boundaries: Vec<Boundary>,
    /// `(alpha index, Jt index)` of every unresolved cell.
    pub unresolved: Vec<(usize, usize)>,
}

impl PhaseDiagram {
    pub fn cell(&self, ia: usize, ij: usize) -> &CellOutcome {
        &self.cells[ia * self.grid.jt_steps + ij]
    }

    pub fn phases_present(&self) -> Vec<Phase> {
        let mut out: Vec<Phase> = self.cells.iter().filter_map(CellOutcome::phase).collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Classifies every cell in parallel; the result does not depend on
/// scheduling.
pub fn run_sweep(grid: &SweepGrid) -> Result<PhaseDiagram> {
    grid.validate()?;
    let alphas = grid.alphas();
    let jts = grid.jts();
    let cells: Vec<CellOutcome> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (alpha, jt) = (alphas[k / grid.jt_steps], jts[k % grid.jt_steps]);
            match FiniteMFParams::new(alpha, jt, grid.gm).and_then(|p| classify_phase(&p)) {
                Ok(label) => CellOutcome::Labeled(label),
                Err(e) => CellOutcome::Unresolved(e.to_string()),
            }
        })
        .collect();
    let unresolved = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(c, CellOutcome::Unresolved(_)))
        .map(|(k, _)| (k / grid.jt_steps, k % grid.jt_steps))
        .collect();
    let mut diagram = PhaseDiagram { grid: *grid, cells, boundaries: Vec::new(), unresolved };
    diagram.boundaries = all_boundaries(&diagram);
    Ok(diagram)
}

type Adjacency = ((usize, usize), (usize, usize), Phase, Phase);

/// Adjacent labeled cells with different phases: `((ia, ij), (ia', ij'))`
/// with the second cell one step further along `axis`.
fn adjacencies(d: &PhaseDiagram, axis: Axis) -> Vec<Adjacency> {
    let (na, nj) = (d.grid.alpha_steps, d.grid.jt_steps);
    let mut out = Vec::new();
    let (outer, inner) = match axis {
        Axis::Alpha => (nj, na - 1),
        Axis::Jt => (na, nj - 1),
    };
    for o in 0..outer {
        for i in 0..inner {
            let (c0, c1) = match axis {
                Axis::Alpha => ((i, o), (i + 1, o)),
                Axis::Jt => ((o, i), (o, i + 1)),
            };
            if let (Some(p0), Some(p1)) = (d.cell(c0.0, c0.1).phase(), d.cell(c1.0, c1.1).phase()) {
                if p0 != p1 {
                    out.push((c0, c1, p0, p1));
                }
            }
        }
    }
    out
}

fn midpoint(d: &PhaseDiagram, c0: (usize, usize), c1: (usize, usize)) -> (f64, f64) {
    let (alphas, jts) = (d.grid.alphas(), d.grid.jts());
    (0.5 * (alphas[c0.0] + alphas[c1.0]), 0.5 * (jts[c0.1] + jts[c1.1]))
}

fn all_boundaries(d: &PhaseDiagram) -> Vec<Boundary> {
    let mut out: Vec<Boundary> = Vec::new();
    for axis in [Axis::Alpha, Axis::Jt] {
        for (c0, c1, p0, p1) in adjacencies(d, axis) {
            let pair = phase_pair(p0, p1);
            let pt = midpoint(d, c0, c1);
            match out.iter_mut().find(|b| b.pair == pair && b.axis == axis) {
                Some(b) => b.points.push(pt),
                None => out.push(Boundary { pair, axis, points: vec![pt] }),
            }
        }
    }
    out.sort_by_key(|b| (b.pair, b.axis));
    out
}

/// Midpoints between adjacent cells labeled with `pair`, across `axis`.
/// For `Axis::Alpha` the points are ordered by `Jt` then `α`; for
/// `Axis::Jt`, by `α` then `Jt`.
pub fn extract_boundary(
    diagram: &PhaseDiagram,
    pair: (Phase, Phase),
    axis: Axis,
) -> Result<Vec<(f64, f64)>> {
    let pair = phase_pair(pair.0, pair.1);
    let mut pts: Vec<(f64, f64)> = adjacencies(diagram, axis)
        .into_iter()
        .filter(|&(_, _, p0, p1)| phase_pair(p0, p1) == pair)
        .map(|(c0, c1, _, _)| midpoint(diagram, c0, c1))
        .collect();
    if pts.is_empty() {
        return Err(Error::BoundaryAbsent(format!("{}/{} across {}", pair.0, pair.1, axis.as_str())));
    }
    match axis {
        Axis::Alpha => pts.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0))),
        Axis::Jt => pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))),
    }
    Ok(pts)
}

/// Bisects `classify_phase` between the two cell samples of every
/// boundary point until the bracket is narrower than `tolerance`. A
/// bracket stops early if its midpoint shows a third label or fails.
pub fn refine_boundaries(diagram: &PhaseDiagram, tolerance: f64) -> Result<Vec<Boundary>> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(invalid("refinement tolerance must be positive"));
    }
    let gm = diagram.grid.gm;
    let (alphas, jts) = (diagram.grid.alphas(), diagram.grid.jts());
    let mut out = Vec::new();
    for axis in [Axis::Alpha, Axis::Jt] {
        let adj = adjacencies(diagram, axis);
        let refined: Vec<((Phase, Phase), (f64, f64))> = adj
            .par_iter()
            .map(|&(c0, c1, p0, p1)| {
                let at = |s: f64| match axis {
                    Axis::Alpha => (s, jts[c0.1]),
                    Axis::Jt => (alphas[c0.0], s),
                };
                let (mut lo, mut hi) = match axis {
                    Axis::Alpha => (alphas[c0.0], alphas[c1.0]),
                    Axis::Jt => (jts[c0.1], jts[c1.1]),
                };
                while hi - lo > tolerance {
                    let mid = 0.5 * (lo + hi);
                    let (a, j) = at(mid);
                    let label = FiniteMFParams::new(a, j, gm).and_then(|p| classify_phase(&p));
                    match label.map(|l| l.phase) {
                        Ok(ph) if ph == p0 => lo = mid,
                        Ok(ph) if ph == p1 => hi = mid,
                        _ => break,
                    }
                }
                (phase_pair(p0, p1), at(0.5 * (lo + hi)))
            })
            .collect();
        for (pair, pt) in refined {
            match out.iter_mut().find(|b: &&mut Boundary| b.pair == pair && b.axis == axis) {
                Some(b) => b.points.push(pt),
                None => out.push(Boundary { pair, axis, points: vec![pt] }),
            }
        }
    }
    out.sort_by_key(|b| (b.pair, b.axis));
    Ok(out)
}

pub const CSV_HEADER: &str = "alpha,Jt,label,m,r,stable_zero_exists,unresolved";

/// One row per cell, `α` outer, 12 significant digits.
pub fn write_csv<W: Write>(diagram: &PhaseDiagram, mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    let (alphas, jts) = (diagram.grid.alphas(), diagram.grid.jts());
    for (ia, &alpha) in alphas.iter().enumerate() {
        for (ij, &jt) in jts.iter().enumerate() {
            match diagram.cell(ia, ij) {
                CellOutcome::Labeled(l) => writeln!(
                    w,
                    "{},{},{},{},{},{},false",
                    sig(alpha),
                    sig(jt),
                    l.phase,
                    sig(l.m),
                    sig(l.r),
                    l.stable_zero_exists
                )?,
                CellOutcome::Unresolved(_) => {
                    writeln!(w, "{},{},NA,nan,nan,false,true", sig(alpha), sig(jt))?
                }
            }
        }
    }
    Ok(())
}

pub const BOUNDARY_CSV_HEADER: &str = "pair,axis,alpha,Jt";

pub fn write_boundaries_csv<W: Write>(boundaries: &[Boundary], mut w: W) -> Result<()> {
    writeln!(w, "{BOUNDARY_CSV_HEADER}")?;
    for b in boundaries {
        for &(alpha, jt) in &b.points {
            writeln!(w, "{}/{},{},{},{}", b.pair.0, b.pair.1, b.axis.as_str(), sig(alpha), sig(jt))?;
        }
    }
    Ok(())
}
