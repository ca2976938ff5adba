//! Self-contained SVG rendering of a phase diagram: `α` on the horizontal
//! axis, `Jt` on the vertical axis.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::meanfield::Phase;
use crate::sweep::{Axis, CellOutcome, PhaseDiagram};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

pub fn phase_color(phase: Phase) -> &'static str {
    match phase {
        Phase::P => "#f2f2f2",
        Phase::F => "#4c78a8",
        Phase::SG => "#e45756",
        Phase::FSG => "#b279a2",
    }
}

struct Frame {
    a0: f64,
    a1: f64,
    j0: f64,
    j1: f64,
}

impl Frame {
    fn x(&self, alpha: f64) -> f64 {
        LEFT + (alpha - self.a0) / (self.a1 - self.a0) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, jt: f64) -> f64 {
        HEIGHT - BOTTOM - (jt - self.j0) / (self.j1 - self.j0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|s| s * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

/// Renders the diagram as an SVG document.
pub fn render_svg(d: &PhaseDiagram) -> String {
    let g = &d.grid;
    let (da, dj) = (g.alpha_spacing(), g.jt_spacing());
    let f = Frame {
        a0: g.alpha_min - 0.5 * da,
        a1: g.alpha_max + 0.5 * da,
        j0: g.jt_min - 0.5 * dj,
        j1: g.jt_max + 0.5 * dj,
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="13">"#
    );
    s.push_str(concat!(
        r#"<defs><pattern id="hatch" patternUnits="userSpaceOnUse" width="6" height="6">"#,
        r##"<rect width="6" height="6" fill="#fff8d0"/>"##,
        r##"<path d="M0,6 L6,0" stroke="#333" stroke-width="1"/></pattern></defs>"##,
        "\n"
    ));
    s.push_str("<g id=\"cells\" shape-rendering=\"crispEdges\">\n");
    let (alphas, jts) = (g.alphas(), g.jts());
    for (ia, &a) in alphas.iter().enumerate() {
        for (ij, &j) in jts.iter().enumerate() {
            let (x0, x1) = (f.x(a - 0.5 * da), f.x(a + 0.5 * da));
            let (y0, y1) = (f.y(j + 0.5 * dj), f.y(j - 0.5 * dj));
            let (fill, class) = match d.cell(ia, ij) {
                CellOutcome::Labeled(l) => (phase_color(l.phase).to_string(), l.phase.as_str()),
                CellOutcome::Unresolved(_) => ("url(#hatch)".to_string(), "unresolved"),
            };
            let _ = writeln!(
                s,
                r#"<rect class="{class}" x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                x1 - x0,
                y1 - y0
            );
        }
    }
    s.push_str("</g>\n<g id=\"boundaries\" stroke=\"#000\" stroke-width=\"1.5\" fill=\"none\">\n");
    for b in &d.boundaries {
        // Each midpoint is drawn as the cell edge it lies on.
        let mut path = String::new();
        for &(a, j) in &b.points {
            let (p0, p1) = match b.axis {
                Axis::Alpha => ((a, j - 0.5 * dj), (a, j + 0.5 * dj)),
                Axis::Jt => ((a - 0.5 * da, j), (a + 0.5 * da, j)),
            };
            let _ = write!(
                path,
                "M{:.2},{:.2} L{:.2},{:.2} ",
                f.x(p0.0),
                f.y(p0.1),
                f.x(p1.0),
                f.y(p1.1)
            );
        }
        let _ = writeln!(
            s,
            r#"<path class="boundary" data-pair="{}/{}" d="{}"/>"#,
            b.pair.0,
            b.pair.1,
            path.trim_end()
        );
    }
    s.push_str("</g>\n");

    // Axes and ticks.
    let (xl, xr, yt, yb) = (f.x(f.a0), f.x(f.a1), f.y(f.j1), f.y(f.j0));
    let _ = writeln!(
        s,
        r##"<rect x="{xl:.2}" y="{yt:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000"/>"##,
        xr - xl,
        yb - yt
    );
    for t in ticks(f.a0, f.a1) {
        let x = f.x(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{yb:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            yb + 5.0,
            yb + 20.0,
            crate::format::sig_digits(t, 6)
        );
    }
    for t in ticks(f.j0, f.j1) {
        let y = f.y(t);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{xl:.2}" y2="{y:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            xl - 5.0,
            xl - 8.0,
            y + 4.0,
            crate::format::sig_digits(t, 6)
        );
    }
    let _ = writeln!(
        s,
        r#"<text id="xlabel" x="{:.2}" y="{:.2}" text-anchor="middle" font-size="16">α</text>"#,
        0.5 * (xl + xr),
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text id="ylabel" x="20" y="{:.2}" text-anchor="middle" font-size="16" transform="rotate(-90 20 {:.2})">Jt</text>"#,
        0.5 * (yt + yb),
        0.5 * (yt + yb)
    );

    // Legend.
    let mut entries: Vec<(String, String)> = Phase::ALL
        .iter()
        .map(|p| (p.display_name().to_string(), phase_color(*p).to_string()))
        .collect();
    if !d.unresolved.is_empty() {
        entries.push(("unresolved".to_string(), "url(#hatch)".to_string()));
    }
    let lx = WIDTH - RIGHT + 25.0;
    s.push_str("<g id=\"legend\">\n");
    for (k, (name, fill)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 26.0 * k as f64;
        let _ = writeln!(
            s,
            r##"<g class="legend-entry"><rect x="{lx:.2}" y="{y:.2}" width="18" height="18" fill="{fill}" stroke="#000"/><text x="{:.2}" y="{:.2}">{name}</text></g>"##,
            lx + 26.0,
            y + 14.0
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

pub fn emit_plot(diagram: &PhaseDiagram, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(diagram))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::PhaseLabel;
    use crate::sweep::SweepGrid;

    fn synthetic(unresolved: bool) -> PhaseDiagram {
        let grid = SweepGrid { alpha_steps: 3, jt_steps: 2, ..SweepGrid::default() };
        let lab = |phase| CellOutcome::Labeled(PhaseLabel { phase, m: 0.0, r: 0.0, stable_zero_exists: true });
        let mut cells = vec![lab(Phase::P), lab(Phase::F), lab(Phase::SG), lab(Phase::FSG), lab(Phase::F), lab(Phase::P)];
        let mut bad = Vec::new();
        if unresolved {
            cells[4] = CellOutcome::Unresolved("singular".into());
            bad.push((2, 0));
        }
        PhaseDiagram { grid, cells, boundaries: Vec::new(), unresolved: bad }
    }

    #[test]
    fn structure_without_unresolved() {
        let svg = render_svg(&synthetic(false));
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let entries = doc.descendants().filter(|n| n.attribute("class") == Some("legend-entry")).count();
        assert_eq!(entries, 4);
        assert!(!svg.contains(">unresolved<"));
        assert!(svg.contains(">α</text>") && svg.contains(">Jt</text>"));
        assert!(svg.contains(">F+SG</text>"));
    }

    #[test]
    fn unresolved_cells_are_hatched() {
        let svg = render_svg(&synthetic(true));
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let hatched: Vec<_> = doc
            .descendants()
            .filter(|n| n.attribute("class") == Some("unresolved"))
            .collect();
        assert_eq!(hatched.len(), 1);
        assert_eq!(hatched[0].attribute("fill"), Some("url(#hatch)"));
        assert!(svg.contains(">unresolved<"));
    }

    #[test]
    fn tick_steps_are_round() {
        assert_eq!(ticks(0.0, 12.0), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0]);
        assert_eq!(ticks(-0.01, 1.21), vec![0.0, 0.5, 1.0]);
    }
}
