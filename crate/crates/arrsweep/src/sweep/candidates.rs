//! Enumeration of currently applicable sweeping operations.

use super::{SweepMode, SweepOp};
use crate::arrangement::{
    Arrangement, CellClass, CellId, CycleKind, DartName, Dir, PointId,
};
use crate::Scalar;

/// Interior-quadrant cell of an interior vertex: the corner inside both
/// bounded regions meeting at the vertex.
pub(crate) fn interior_quadrant<S: Scalar>(
    arr: &Arrangement<S>,
    v: crate::arrangement::CrossingId,
) -> CellId {
    let cr = arr.crossing(v);
    let (a, b) = cr.pair;
    let d = if cr.sign > 0 {
        DartName::new(b, v, Dir::Forward)
    } else {
        DartName::new(a, v, Dir::Forward)
    };
    arr.cell_of_dart(d)
}

/// Smallest forward dart of the sweep curve on the defining cycle of `cell`,
/// if any. For an isolated sweep curve, the cell just inside it instead
/// reports `None` while `touches_isolated_sweep` holds.
fn sweep_anchor<S: Scalar>(arr: &Arrangement<S>, cell: CellId) -> Option<DartName> {
    let g = arr.sweep_curve();
    let def = arr.cell(cell).defining?;
    arr.cycle(def)
        .darts
        .iter()
        .copied()
        .filter(|d| d.curve == g && d.dir == Dir::Forward)
        .min()
}

fn touches_isolated_sweep<S: Scalar>(arr: &Arrangement<S>, cell: CellId) -> bool {
    let g = arr.sweep_curve();
    if !arr.is_isolated(g) {
        return false;
    }
    match arr.cell(cell).defining {
        Some(def) => arr.cycle(def).kind == CycleKind::LoopInterior(g),
        None => false,
    }
}

/// All valid operations in priority order: digons, triangles, loops, then
/// vertex bypasses; ties by ascending cell or vertex id.
pub fn find_candidates<S: Scalar>(
    arr: &Arrangement<S>,
    mode: SweepMode,
    point: Option<PointId>,
) -> Vec<SweepOp> {
    let point_cell = point.map(|p| arr.tracked_cell(p));
    let mut digons = Vec::new();
    let mut triangles = Vec::new();
    for (cell, class) in arr.cells_on_sweep() {
        if Some(cell) == point_cell {
            continue;
        }
        match class {
            CellClass::Digon { other } => digons.push(SweepOp::BypassDigon { cell, other }),
            CellClass::Triangle { curves, interior_vertex } => {
                triangles.push(SweepOp::BypassTriangle { cell, curves, interior_vertex })
            }
            CellClass::Other => {}
        }
    }

    // Take a loop: fully-inside curves sharing a cell with the interior side
    // of the sweep curve.
    let mut loops = Vec::new();
    for t in arr.curve_ids() {
        if !arr.curve_fully_inside_sweep(t) {
            continue;
        }
        let mut best: Option<(CellId, Option<DartName>, Option<DartName>)> = None;
        for cell in arr.cell_ids() {
            let anchor_gamma = sweep_anchor(arr, cell);
            if anchor_gamma.is_none() && !touches_isolated_sweep(arr, cell) {
                continue;
            }
            // Find an arc of the target (or its isolated loop) on the cell.
            let mut anchor_target = None;
            let mut target_here = false;
            for &cy in &arr.cell(cell).cycles {
                match &arr.cycle(cy).kind {
                    CycleKind::Traced => {
                        if let Some(d) = arr
                            .cycle(cy)
                            .darts
                            .iter()
                            .copied()
                            .filter(|d| d.curve == t)
                            .min()
                        {
                            anchor_target = Some(d);
                            target_here = true;
                            break;
                        }
                    }
                    CycleKind::LoopExterior(c) if *c == t => {
                        target_here = true;
                        break;
                    }
                    _ => {}
                }
            }
            if target_here && best.as_ref().map_or(true, |(c, _, _)| cell < *c) {
                best = Some((cell, anchor_gamma, anchor_target));
            }
        }
        if let Some((via_cell, anchor_gamma, anchor_target)) = best {
            loops.push(SweepOp::TakeLoop { target: t, via_cell, anchor_gamma, anchor_target });
        }
    }

    // Bypass a visible vertex (non-piercing mode only).
    let mut vertices = Vec::new();
    if mode == SweepMode::NonPiercing {
        for v in arr.crossing_ids() {
            if !arr.crossing_inside_sweep(v) {
                continue;
            }
            let q = interior_quadrant(arr, v);
            let anchor_gamma = sweep_anchor(arr, q);
            if anchor_gamma.is_some() || touches_isolated_sweep(arr, q) {
                vertices.push(SweepOp::BypassVertex { vertex: v, via_cell: q, anchor_gamma });
            }
        }
    }

    loops.sort_by_key(|op| match op {
        SweepOp::TakeLoop { via_cell, target, .. } => (*via_cell, *target),
        _ => unreachable!(),
    });

    let mut out = digons;
    out.extend(triangles);
    out.extend(loops);
    out.extend(vertices);
    out
}
