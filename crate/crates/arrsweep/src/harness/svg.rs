//! Schematic SVG rendering of an arrangement.
//!
//! Operations keep only the combinatorial map alive, so frames are drawn from
//! a relaxed layout of the crossing graph (outer cycle pinned on a circle,
//! interior averaged), not from input coordinates. Every frame is labelled
//! schematic.

use crate::arrangement::{Arrangement, CurveId, CycleKind, DartName, Dir};
use crate::Scalar;
use std::collections::BTreeMap;
use std::fmt::Write as _;

const PALETTE: [&str; 10] = [
    "#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#d35400", "#16a085", "#7f8c8d", "#2c3e50",
    "#f39c12", "#990055",
];

#[derive(Clone, Copy)]
struct Pt {
    x: f64,
    y: f64,
}

/// Render the current map as a standalone SVG document.
pub fn render<S: Scalar>(arr: &Arrangement<S>, title: &str) -> String {
    let crossings: Vec<_> = arr.crossing_ids().collect();
    let mut pos: BTreeMap<u32, Pt> = BTreeMap::new();
    // Arc midpoints get their own layout nodes so twin arcs separate.
    let mut mid: BTreeMap<DartName, Pt> = BTreeMap::new();

    // Initial positions: crossings on a circle per component, jittered by id.
    let comp_count = arr.derived().components.len().max(1);
    for (i, &x) in crossings.iter().enumerate() {
        let comp = arr.component_of(arr.crossing(x).pair.0).index();
        let angle = (i as f64 / crossings.len().max(1) as f64) * std::f64::consts::TAU;
        let cx = (comp % comp_count) as f64 * 40.0;
        pos.insert(x.0, Pt { x: cx + 100.0 * angle.cos(), y: 100.0 * angle.sin() });
    }
    let forward_darts: Vec<DartName> = arr
        .all_dart_names()
        .into_iter()
        .filter(|d| d.dir == Dir::Forward)
        .collect();
    for &d in &forward_darts {
        let a = pos[&d.at.0];
        let b = pos[&arr.twin(d).at.0];
        let n = mid.len() as f64;
        mid.insert(d, Pt { x: (a.x + b.x) / 2.0 + (n % 7.0) - 3.0, y: (a.y + b.y) / 2.0 + (n % 5.0) - 2.0 });
    }

    // Pin the outermost cycle nodes, relax everything else.
    let mut pinned: BTreeMap<DartName, Pt> = BTreeMap::new();
    if let Some(root) = arr
        .derived()
        .components
        .iter()
        .find(|c| c.parent_cell == arr.outer_cell())
    {
        let cyc = &arr.derived().cycles[root.outer.index()];
        if matches!(cyc.kind, CycleKind::Traced) {
            let k = cyc.darts.len();
            for (i, &d) in cyc.darts.iter().enumerate() {
                let fwd = if d.dir == Dir::Forward { d } else { arr.twin(d) };
                let angle = (i as f64 / k as f64) * std::f64::consts::TAU;
                pinned.insert(fwd, Pt { x: 150.0 * angle.cos(), y: 150.0 * angle.sin() });
            }
        }
    }
    for _ in 0..240 {
        // Crossings move to the average of their four incident arc midpoints.
        let mut next: BTreeMap<u32, Pt> = BTreeMap::new();
        for &x in &crossings {
            let (a, b) = arr.crossing(x).pair;
            let mut sx = 0.0;
            let mut sy = 0.0;
            let mut n = 0.0;
            for c in [a, b] {
                for dir in [Dir::Forward, Dir::Backward] {
                    let d = DartName::new(c, x, dir);
                    let fwd = if dir == Dir::Forward { d } else { arr.twin(d) };
                    let p = pinned.get(&fwd).or_else(|| mid.get(&fwd));
                    if let Some(p) = p {
                        sx += p.x;
                        sy += p.y;
                        n += 1.0;
                    }
                }
            }
            if n > 0.0 {
                next.insert(x.0, Pt { x: sx / n, y: sy / n });
            }
        }
        for (k, v) in next {
            pos.insert(k, v);
        }
        // Midpoints move between their endpoints unless pinned.
        for &d in &forward_darts {
            if pinned.contains_key(&d) {
                continue;
            }
            let a = pos[&d.at.0];
            let b = pos[&arr.twin(d).at.0];
            mid.insert(d, Pt { x: (a.x + b.x) / 2.0, y: (a.y + b.y) / 2.0 });
        }
    }
    for (d, p) in &pinned {
        mid.insert(*d, *p);
    }

    let mut body = String::new();
    for c in arr.curve_ids() {
        let color = PALETTE[c.index() % PALETTE.len()];
        let width = if c == arr.sweep_curve() { 3.0 } else { 1.5 };
        if arr.is_isolated(c) {
            // Isolated loops are drawn as small circles near their parent.
            let r = 12.0 + 2.0 * c.index() as f64;
            let _ = write!(
                body,
                r#"<circle cx="{:.1}" cy="{:.1}" r="{r:.1}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
                -180.0 + 30.0 * c.index() as f64,
                -180.0
            );
            continue;
        }
        let walk = arr.walk(c).to_vec();
        let mut path = String::new();
        for (i, &x) in walk.iter().enumerate() {
            let d = DartName::new(c, x, Dir::Forward);
            let a = pos[&x.0];
            let m = mid[&d];
            let b = pos[&walk[(i + 1) % walk.len()].0];
            if i == 0 {
                let _ = write!(path, "M {:.1} {:.1} ", a.x, a.y);
            }
            let _ = write!(path, "Q {:.1} {:.1} {:.1} {:.1} ", m.x, m.y, b.x, b.y);
        }
        let _ = write!(
            body,
            r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="{width}"/>"#
        );
    }
    let labels: String = arr
        .curve_ids()
        .map(|c: CurveId| format!("{}={} ", c, arr.curve_name(c)))
        .collect();
    format!(
        concat!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="-220 -220 440 440">"#,
            r#"<rect x="-220" y="-220" width="440" height="440" fill="white"/>"#,
            "{}",
            r#"<text x="-210" y="-200" font-size="10">{} (schematic layout) {}</text>"#,
            "</svg>"
        ),
        body, title, labels
    )
}
