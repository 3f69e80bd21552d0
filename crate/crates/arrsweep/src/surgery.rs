//! Arrangement surgery on non-sweep curves: bypassing minimal digons and
//! minimal triangles, with reference-point bookkeeping.
//!
//! A digon or triangle here need not be a cell of the full arrangement; other
//! curves may cross it. Minimality means every such chord runs from one
//! defining side to the other, which is what lets both operations
//! re-attribute the chord crossings without disturbing any pair's order.

use crate::arrangement::rewrite::{component_key_map, side_dart, Homed, PairSplit, RehomePlan};
use crate::arrangement::{
    Arrangement, CellId, CrossingId, CurveId, CycleRef, DartName, Dir, MapError, OuterRef,
};
use crate::Scalar;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// A digon of a two-curve restriction.
///
/// `vertices = (u, v)` are ordered so that the first curve's bounding run is
/// its forward walk from `u` to `v`.
#[derive(Clone, Debug, Serialize)]
pub struct LensDescriptor {
    pub curves: (CurveId, CurveId),
    pub vertices: (CrossingId, CrossingId),
    pub kind: LensKind,
    pub minimal: bool,
    /// Cells of the full arrangement inside the digon.
    pub interior_cells: Vec<CellId>,
    /// Does the digon lie on the left of the first curve's bounding run?
    pub region_left_of_a: bool,
    /// Same for the second curve's bounding run.
    pub region_left_of_b: bool,
    /// Does the second curve's bounding run start at `u` (walking forward)?
    pub b_starts_at_u: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LensKind {
    /// Contained in both bounded regions.
    Lens,
    /// Contained in neither.
    NegativeLens,
    /// Contained in exactly one.
    Mixed,
}

/// A triangle with base on the sweep curve.
#[derive(Clone, Debug, Serialize)]
pub struct TriangleDescriptor {
    /// Curves crossing the sweep curve at `base_u` and `base_w`.
    pub curves: (CurveId, CurveId),
    /// First base crossing along the sweep curve (with `curves.0`).
    pub base_u: CrossingId,
    /// The apex: crossing of the two non-sweep curves inside the region.
    pub apex: CrossingId,
    /// Second base crossing (with `curves.1`).
    pub base_w: CrossingId,
    pub minimal: bool,
    pub interior_cells: Vec<CellId>,
    /// Does `curves.0` walk forward from the base into the triangle?
    pub alpha_enters: bool,
    /// Does `curves.1` walk forward from the base into the triangle?
    pub beta_enters: bool,
}

/// Where each reference point ended up after a bypass.
#[derive(Clone, Debug, Serialize)]
pub struct SurgeryRecord {
    pub operation: &'static str,
    pub lost_vertices: Vec<CrossingId>,
    pub new_vertices: Vec<CrossingId>,
    /// Marker name -> cell now containing it.
    pub reference_cells: BTreeMap<String, CellId>,
}

fn precondition(msg: impl Into<String>) -> MapError {
    MapError::Precondition(msg.into())
}

// ---------------------------------------------------------------------------
// Region machinery shared by the finders
// ---------------------------------------------------------------------------

/// Flood the cells of the region whose boundary darts are given (the region
/// lies on the left of each boundary dart).
fn flood_region<S: Scalar>(arr: &Arrangement<S>, boundary: &[DartName]) -> Vec<CellId> {
    let boundary_set: BTreeSet<DartName> = boundary.iter().copied().collect();
    let mut cells: BTreeSet<CellId> = boundary.iter().map(|&d| arr.cell_of_dart(d)).collect();
    let mut queue: Vec<CellId> = cells.iter().copied().collect();
    while let Some(cell) = queue.pop() {
        for &cy in &arr.cell(cell).cycles {
            for &d in &arr.cycle(cy).darts {
                if boundary_set.contains(&d) {
                    continue; // stay inside
                }
                let next = arr.cell_of_dart(arr.twin(d));
                if cells.insert(next) {
                    queue.push(next);
                }
            }
        }
    }
    cells.into_iter().collect()
}

/// Darts of `curve` covering its forward run `from -> to`, region on the
/// requested side.
fn run_darts<S: Scalar>(
    arr: &Arrangement<S>,
    curve: CurveId,
    from: CrossingId,
    to: CrossingId,
    left: bool,
) -> Vec<DartName> {
    let mut out = Vec::new();
    let mut x = from;
    loop {
        let next = arr.walk_next(curve, x);
        out.push(if left {
            DartName::new(curve, x, Dir::Forward)
        } else {
            DartName::new(curve, next, Dir::Backward)
        });
        if next == to {
            break;
        }
        x = next;
        assert_ne!(x, from, "run does not close");
    }
    out
}

/// Crossings strictly inside the forward run `from -> to`.
fn run_interior<S: Scalar>(
    arr: &Arrangement<S>,
    curve: CurveId,
    from: CrossingId,
    to: CrossingId,
) -> Vec<CrossingId> {
    let mut out = Vec::new();
    let mut x = arr.walk_next(curve, from);
    while x != to {
        out.push(x);
        x = arr.walk_next(curve, x);
    }
    out
}

/// Every chord run through the region must connect the two side sets.
fn chords_cross_properly<S: Scalar>(
    arr: &Arrangement<S>,
    region: &[CellId],
    side_a: &BTreeSet<CrossingId>,
    side_b: &BTreeSet<CrossingId>,
) -> bool {
    let in_region: BTreeSet<CellId> = region.iter().copied().collect();
    let walk_one = |curve: CurveId, from: CrossingId, dir: Dir| -> CrossingId {
        match dir {
            Dir::Forward => arr.walk_next(curve, from),
            Dir::Backward => arr.walk_prev(curve, from),
        }
    };
    let mut check_from = |start_set: &BTreeSet<CrossingId>, same: &BTreeSet<CrossingId>, other: &BTreeSet<CrossingId>| -> bool {
        for &x in start_set {
            let cr = arr.crossing(x);
            for delta in [cr.pair.0, cr.pair.1] {
                for dir in [Dir::Forward, Dir::Backward] {
                    // The strand enters the region iff its first arc borders
                    // interior cells on both sides.
                    let d = DartName::new(delta, x, dir);
                    if !in_region.contains(&arr.cell_of_dart(d))
                        || !in_region.contains(&arr.cell_of_dart(arr.twin(d)))
                    {
                        continue;
                    }
                    let mut cur = walk_one(delta, x, dir);
                    loop {
                        if other.contains(&cur) {
                            break;
                        }
                        if same.contains(&cur) || cur == x {
                            return false;
                        }
                        cur = walk_one(delta, cur, dir);
                    }
                }
            }
        }
        true
    };
    check_from(side_a, side_a, side_b) && check_from(side_b, side_b, side_a)
}

// ---------------------------------------------------------------------------
// Finders
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LensScope {
    WholeArrangement,
    InsideSweep,
}

/// All digons of every two-curve restriction, with kind and minimality flags.
pub fn find_lenses<S: Scalar>(arr: &Arrangement<S>, scope: LensScope) -> Vec<LensDescriptor> {
    let mut out: Vec<LensDescriptor> = Vec::new();
    let ids: Vec<CurveId> = arr.curve_ids().collect();
    let g = arr.sweep_curve();
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            let sa = arr.pair_sequence(a, b);
            if sa.is_empty() {
                continue;
            }
            let sb = arr.pair_sequence(b, a);
            let k = sa.len();
            for idx in 0..k {
                let u = sa[idx];
                let v = sa[(idx + 1) % k];
                if u == v {
                    continue;
                }
                let jb = sb.iter().position(|&y| y == u).unwrap();
                let m = sb.len();
                if sb[(jb + 1) % m] != v && sb[(jb + m - 1) % m] != v {
                    continue;
                }
                for desc in lens_candidates(arr, a, b, u, v) {
                    if scope == LensScope::InsideSweep
                        && !desc.interior_cells.iter().all(|&c| arr.cell_inside(c, g))
                    {
                        continue;
                    }
                    let dup = out.iter().any(|d| {
                        d.curves == desc.curves
                            && ((d.vertices == desc.vertices && d.region_left_of_a == desc.region_left_of_a)
                                || d.interior_cells == desc.interior_cells)
                    });
                    if !dup {
                        out.push(desc);
                    }
                }
            }
        }
    }
    out.sort_by_key(|d| (d.curves, d.vertices, d.region_left_of_a));
    out
}

fn lens_candidates<S: Scalar>(
    arr: &Arrangement<S>,
    a: CurveId,
    b: CurveId,
    u: CrossingId,
    v: CrossingId,
) -> Vec<LensDescriptor> {
    let mut out = Vec::new();
    // a's bounding run is its forward walk u -> v; it must avoid b inside.
    if run_interior(arr, a, u, v).iter().any(|&x| arr.crossing(x).involves(b)) {
        return out;
    }
    for b_starts_at_u in [true, false] {
        let (bs, be) = if b_starts_at_u { (u, v) } else { (v, u) };
        if run_interior(arr, b, bs, be).iter().any(|&x| arr.crossing(x).involves(a)) {
            continue;
        }
        for left_a in [true, false] {
            let a_runs = run_darts(arr, a, u, v, left_a);
            'side_b: for left_b in [true, false] {
                let mut boundary = a_runs.clone();
                boundary.extend(run_darts(arr, b, bs, be, left_b));
                let boundary_set: BTreeSet<DartName> = boundary.iter().copied().collect();
                let cells = flood_region(arr, &boundary);
                if cells.contains(&arr.outer_cell()) {
                    continue;
                }
                for &cell in &cells {
                    for &cy in &arr.cell(cell).cycles {
                        for &d in &arr.cycle(cy).darts {
                            if (d.curve == a || d.curve == b)
                                && !boundary_set.contains(&d)
                                && !boundary_set.contains(&arr.twin(d))
                            {
                                continue 'side_b; // a or b re-enters: not a digon
                            }
                            if d.curve != a
                                && d.curve != b
                                && boundary_set.contains(&arr.twin(d))
                            {
                                continue 'side_b; // boundary leaks
                            }
                        }
                    }
                }
                let probe = cells[0];
                let kind = match (arr.cell_inside(probe, a), arr.cell_inside(probe, b)) {
                    (true, true) => LensKind::Lens,
                    (false, false) => LensKind::NegativeLens,
                    _ => LensKind::Mixed,
                };
                let side_a: BTreeSet<CrossingId> = run_interior(arr, a, u, v).into_iter().collect();
                let side_b_set: BTreeSet<CrossingId> =
                    run_interior(arr, b, bs, be).into_iter().collect();
                let minimal = chords_cross_properly(arr, &cells, &side_a, &side_b_set);
                out.push(LensDescriptor {
                    curves: (a, b),
                    vertices: (u, v),
                    kind,
                    minimal,
                    interior_cells: cells,
                    region_left_of_a: left_a,
                    region_left_of_b: left_b,
                    b_starts_at_u,
                });
            }
        }
    }
    out
}

/// All minimal triangles with base on the sweep curve.
pub fn find_minimal_triangles_on_sweep<S: Scalar>(arr: &Arrangement<S>) -> Vec<TriangleDescriptor> {
    let g = arr.sweep_curve();
    let walk = arr.walk(g).to_vec();
    let n = walk.len();
    let mut out: Vec<TriangleDescriptor> = Vec::new();
    for i in 0..n {
        let u = walk[i];
        let w = walk[(i + 1) % n];
        if u == w {
            continue;
        }
        let alpha = arr.crossing(u).other(g);
        let beta = arr.crossing(w).other(g);
        if alpha == beta {
            continue;
        }
        for a_dir in [Dir::Forward, Dir::Backward] {
            let Some(apex) = first_meeting(arr, alpha, u, a_dir, beta, g) else { continue };
            for b_dir in [Dir::Forward, Dir::Backward] {
                if first_meeting(arr, beta, w, b_dir, alpha, g) != Some(apex) {
                    continue;
                }
                if let Some(desc) = triangle_from_runs(arr, alpha, beta, u, w, apex, a_dir, b_dir) {
                    if !out.iter().any(|d| {
                        (d.base_u, d.base_w, d.apex) == (desc.base_u, desc.base_w, desc.apex)
                    }) {
                        out.push(desc);
                    }
                }
            }
        }
    }
    out.sort_by_key(|d| (d.base_u, d.base_w, d.apex));
    out
}

/// First crossing with `other` walking `curve` from `from` in `dir`; `None`
/// if the sweep curve comes first or the walk closes.
fn first_meeting<S: Scalar>(
    arr: &Arrangement<S>,
    curve: CurveId,
    from: CrossingId,
    dir: Dir,
    other: CurveId,
    sweep: CurveId,
) -> Option<CrossingId> {
    let mut x = from;
    loop {
        x = match dir {
            Dir::Forward => arr.walk_next(curve, x),
            Dir::Backward => arr.walk_prev(curve, x),
        };
        if x == from {
            return None;
        }
        let cr = arr.crossing(x);
        if cr.involves(other) {
            return Some(x);
        }
        if cr.involves(sweep) {
            return None;
        }
    }
}

/// Interior crossings of a run directed from `from` to `to`, in travel order.
fn directed_run_interior<S: Scalar>(
    arr: &Arrangement<S>,
    curve: CurveId,
    from: CrossingId,
    to: CrossingId,
    dir: Dir,
) -> Vec<CrossingId> {
    match dir {
        Dir::Forward => run_interior(arr, curve, from, to),
        Dir::Backward => {
            let mut v = run_interior(arr, curve, to, from);
            v.reverse();
            v
        }
    }
}

fn directed_run_darts<S: Scalar>(
    arr: &Arrangement<S>,
    curve: CurveId,
    from: CrossingId,
    to: CrossingId,
    dir: Dir,
    region_left_of_travel: bool,
) -> Vec<DartName> {
    match dir {
        Dir::Forward => run_darts(arr, curve, from, to, region_left_of_travel),
        Dir::Backward => run_darts(arr, curve, to, from, !region_left_of_travel),
    }
}

fn triangle_from_runs<S: Scalar>(
    arr: &Arrangement<S>,
    alpha: CurveId,
    beta: CurveId,
    u: CrossingId,
    w: CrossingId,
    apex: CrossingId,
    a_dir: Dir,
    b_dir: Dir,
) -> Option<TriangleDescriptor> {
    let g = arr.sweep_curve();
    let a_int = directed_run_interior(arr, alpha, u, apex, a_dir);
    let b_int = directed_run_interior(arr, beta, w, apex, b_dir);
    if a_int.iter().any(|&x| arr.crossing(x).involves(g) || arr.crossing(x).involves(beta)) {
        return None;
    }
    if b_int.iter().any(|&x| arr.crossing(x).involves(g) || arr.crossing(x).involves(alpha)) {
        return None;
    }
    // The triangle lies inside the sweep region, on the left of the base arc.
    let base = DartName::new(g, u, Dir::Forward);
    if !arr.cell_inside(arr.cell_of_dart(base), g) {
        return None;
    }
    'sides: for left_a in [true, false] {
        for left_b in [true, false] {
            let mut boundary = vec![base];
            boundary.extend(directed_run_darts(arr, alpha, u, apex, a_dir, left_a));
            boundary.extend(directed_run_darts(arr, beta, w, apex, b_dir, left_b));
            let boundary_set: BTreeSet<DartName> = boundary.iter().copied().collect();
            let cells = flood_region(arr, &boundary);
            if cells.contains(&arr.outer_cell()) {
                continue;
            }
            for &cell in &cells {
                if !arr.cell_inside(cell, g) {
                    continue 'sides;
                }
                for &cy in &arr.cell(cell).cycles {
                    for &d in &arr.cycle(cy).darts {
                        if d.curve == g || d.curve == alpha || d.curve == beta {
                            if !boundary_set.contains(&d) && !boundary_set.contains(&arr.twin(d)) {
                                continue 'sides;
                            }
                        } else if boundary_set.contains(&arr.twin(d)) {
                            continue 'sides;
                        }
                    }
                }
            }
            let side_a: BTreeSet<CrossingId> = a_int.iter().copied().collect();
            let side_b: BTreeSet<CrossingId> = b_int.iter().copied().collect();
            let minimal = chords_cross_properly(arr, &cells, &side_a, &side_b);
            return Some(TriangleDescriptor {
                curves: (alpha, beta),
                base_u: u,
                apex,
                base_w: w,
                minimal,
                interior_cells: cells,
                alpha_enters: a_dir == Dir::Forward,
                beta_enters: b_dir == Dir::Forward,
            });
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Bypasses
// ---------------------------------------------------------------------------

/// Bypass a minimal digon: the two curves exchange their bounding runs and
/// separate, losing the digon's two vertices; chord crossings re-attribute
/// from one curve to the other.
pub fn bypass_minimal_digon<S: Scalar>(
    arr: &mut Arrangement<S>,
    lens: &LensDescriptor,
) -> Result<SurgeryRecord, MapError> {
    if !lens.minimal {
        return Err(precondition("digon is not minimal"));
    }
    let (a, b) = lens.curves;
    let (u, v) = lens.vertices;
    let (bs, be) = if lens.b_starts_at_u { (u, v) } else { (v, u) };
    let d_chords = run_interior(arr, a, u, v); // along a, u -> v
    let e_chords = run_interior(arr, b, bs, be); // along b, bs -> be
    if d_chords.iter().any(|&x| arr.crossing(x).involves(b))
        || e_chords.iter().any(|&x| arr.crossing(x).involves(a))
    {
        return Err(precondition("descriptor is stale"));
    }
    let a_stays = arr.walk(a).len() > 2 + d_chords.len();
    let b_stays = arr.walk(b).len() > 2 + e_chords.len();
    let a_prev = arr.walk_prev(a, u);
    let a_next = arr.walk_next(a, v);
    let b_prev = arr.walk_prev(b, bs);
    let b_next = arr.walk_next(b, be);

    // a enters the region at u; b enters at bs. The traversal directions
    // along the exchanged paths agree iff both enter at the same vertex.
    let same_direction = bs == u;
    // New middle sections, in each curve's own traversal order.
    let new_a_mid: Vec<CrossingId> =
        if same_direction { e_chords.clone() } else { e_chords.iter().rev().copied().collect() };
    let new_b_mid: Vec<CrossingId> =
        if same_direction { d_chords.clone() } else { d_chords.iter().rev().copied().collect() };
    // Corridor (former digon) side relative to each new run.
    let corridor_left_a = if same_direction { lens.region_left_of_b } else { !lens.region_left_of_b };
    let corridor_left_b = if same_direction { lens.region_left_of_a } else { !lens.region_left_of_a };
    let corridor_interior = lens.kind == LensKind::NegativeLens;

    // New walks.
    let old_walk_a = arr.walk(a).to_vec();
    let old_walk_b = arr.walk(b).to_vec();
    let new_walk_a = splice_forward(&old_walk_a, u, v, &new_a_mid);
    let new_walk_b = splice_forward(&old_walk_b, bs, be, &new_b_mid);

    let dying: BTreeSet<CrossingId> = [u, v].into_iter().collect();
    let mut dying_names = Arrangement::<S>::changed_dart_names(a, &old_walk_a, &new_walk_a);
    dying_names.extend(Arrangement::<S>::changed_dart_names(b, &old_walk_b, &new_walk_b));
    // Chords change curve, so their old names on both curves die wholesale.
    for &x in &d_chords {
        let other = arr.crossing(x).other(a);
        for dir in [Dir::Forward, Dir::Backward] {
            dying_names.insert(DartName::new(a, x, dir));
            let _ = other;
        }
    }
    for &x in &e_chords {
        for dir in [Dir::Forward, Dir::Backward] {
            dying_names.insert(DartName::new(b, x, dir));
        }
    }

    // Placement bookkeeping for a potential component split.
    let old_keys = arr.curve_component_keys();
    let orig_key = CurveId(old_keys[a.index()]);
    let (old_outer_darts, old_outer_loop) = match arr.outers[&orig_key] {
        OuterRef::Dart(d) => (arr.cycle(arr.dart(d).cycle).darts.clone(), None),
        OuterRef::Loop(c) => (Vec::new(), Some(c)),
    };
    let split = PairSplit {
        a,
        b,
        a_arc: a_stays.then(|| (a_prev, *new_a_mid.first().unwrap_or(&a_next))),
        b_arc: b_stays.then(|| (b_prev, *new_b_mid.first().unwrap_or(&b_next))),
        a_between_left: corridor_left_a,
        b_between_left: corridor_left_b,
        a_corridor_interior: corridor_interior,
        b_corridor_interior: corridor_interior,
        old_outer_darts,
        old_outer_loop,
        old_parent: arr.parents[&orig_key],
    };

    // Marker handles over the first and last pieces of the new runs.
    let seg_marker = |curve: CurveId,
                      prev: CrossingId,
                      next: CrossingId,
                      stays: bool,
                      corridor_side: bool,
                      corridor_left: bool|
     -> Homed {
        if stays {
            let left = if corridor_side { corridor_left } else { !corridor_left };
            Homed::Ref(CycleRef::Dart(side_dart(curve, prev, next, left)))
        } else {
            let interior = if corridor_side { corridor_interior } else { !corridor_interior };
            if interior {
                Homed::Ref(CycleRef::LoopInterior(curve))
            } else {
                Homed::ParentOf(curve)
            }
        }
    };
    let a_first_stop = *new_a_mid.first().unwrap_or(&a_next);
    let a_last_stop = *new_a_mid.last().unwrap_or(&a_prev);
    let b_first_stop = *new_b_mid.first().unwrap_or(&b_next);
    let b_last_stop = *new_b_mid.last().unwrap_or(&b_prev);
    // a's run now starts where a entered (u end); b's at bs.
    let m_u = seg_marker(a, a_prev, a_first_stop, a_stays, true, corridor_left_a);
    let m_u_alpha = seg_marker(a, a_prev, a_first_stop, a_stays, false, corridor_left_a);
    let m_v = seg_marker(a, a_last_stop, a_next, a_stays, true, corridor_left_a);
    let m_v_alpha = seg_marker(a, a_last_stop, a_next, a_stays, false, corridor_left_a);
    let (m_u_beta, m_v_beta) = if same_direction {
        (
            seg_marker(b, b_prev, b_first_stop, b_stays, false, corridor_left_b),
            seg_marker(b, b_last_stop, b_next, b_stays, false, corridor_left_b),
        )
    } else {
        (
            seg_marker(b, b_last_stop, b_next, b_stays, false, corridor_left_b),
            seg_marker(b, b_prev, b_first_stop, b_stays, false, corridor_left_b),
        )
    };

    // Rehoming: the tip cells flow into the corridor; every other interior
    // cell keeps a surviving chord dart. Quadrant cells at the two dying
    // vertices fall back by position.
    let tip_cell = |end: CrossingId| -> CellId {
        // The interior cell at this end: on the region side of a's piece
        // adjacent to the end.
        let d = if end == u {
            side_dart(a, u, *d_chords.first().unwrap_or(&v), lens.region_left_of_a)
        } else {
            side_dart(a, *d_chords.last().unwrap_or(&u), v, lens.region_left_of_a)
        };
        arr.cell_of_dart(d)
    };
    let mut plan = RehomePlan::default();
    plan.by_cell.push((tip_cell(u), m_u));
    plan.by_cell.push((tip_cell(v), m_v));
    // Quadrant fallbacks at u and v.
    for (tip, m_tip, m_across_a, m_across_b) in
        [(u, m_u, m_u_alpha, m_u_beta), (v, m_v, m_v_alpha, m_v_beta)]
    {
        let region_dart_a = if tip == u {
            side_dart(a, u, *d_chords.first().unwrap_or(&v), lens.region_left_of_a)
        } else {
            side_dart(a, *d_chords.last().unwrap_or(&u), v, lens.region_left_of_a)
        };
        let region_dart_b = {
            let first = *e_chords.first().unwrap_or(&be);
            let last = *e_chords.last().unwrap_or(&bs);
            if tip == bs {
                side_dart(b, bs, first, lens.region_left_of_b)
            } else {
                side_dart(b, last, be, lens.region_left_of_b)
            }
        };
        // Across-a quadrant: other side of a's end piece.
        let across_a = arr.twin_side_cell(region_dart_a);
        plan.dying_cycle_fallback.push((arr.dart_cycle(across_a), m_across_a));
        let across_b = arr.twin_side_cell(region_dart_b);
        plan.dying_cycle_fallback.push((arr.dart_cycle(across_b), m_across_b));
        // Diagonal quadrant joins the corridor.
        let diag = DartName::new(region_dart_a.curve, tip, region_dart_a.dir.flip());
        plan.dying_cycle_fallback.push((arr.dart_cycle(diag), m_tip));
        // Tip cycle itself (covered by by_cell for in-cell references).
        plan.dying_cycle_fallback.push((arr.dart_cycle(region_dart_a), m_tip));
    }
    // Outer fallbacks: the far side of whichever new run exists.
    let mut outer_fb: Vec<DartName> = Vec::new();
    if let Some((p, n)) = split.a_arc {
        outer_fb.push(side_dart(a, p, n, !corridor_left_a));
    }
    if let Some((p, n)) = split.b_arc {
        outer_fb.push(side_dart(b, p, n, !corridor_left_b));
    }
    if let Some(d0) = outer_fb.first().copied() {
        for tip in [u, v] {
            let cr = arr.crossing(tip);
            for c in [cr.pair.0, cr.pair.1] {
                for dir in [Dir::Forward, Dir::Backward] {
                    plan.outer_fallback.push((arr.dart_cycle(DartName::new(c, tip, dir)), d0));
                }
            }
        }
    }

    let mut drop = BTreeSet::new();
    drop.insert(orig_key);
    let moves = arr.plan_rehoming(&plan, &dying, &dying_names, &drop)?;
    let outer_moves = arr.plan_outer_repair(&plan, &dying, &dying_names, &drop)?;
    let orig_outer_repair = arr.repair_outer_record(orig_key, &dying, &dying_names, &plan);

    // Edit.
    arr.set_walk(a, new_walk_a);
    arr.set_walk(b, new_walk_b);
    for &x in &d_chords {
        arr.reattribute(x, a, b, same_direction);
    }
    for &x in &e_chords {
        arr.reattribute(x, b, a, same_direction);
    }
    arr.delete_crossing(u);
    arr.delete_crossing(v);

    let new_keys = arr.curve_component_keys();
    let key_map = component_key_map(&old_keys, &new_keys);
    let (parent_entries, outer_entries) = split.place_components(arr, &new_keys)?;
    arr.parents.remove(&orig_key);
    arr.outers.remove(&orig_key);
    arr.rekey_records(&key_map);
    for (k, r) in outer_moves {
        if k == orig_key {
            continue;
        }
        let nk = key_map.get(&k).copied().unwrap_or(k);
        arr.outers.insert(nk, r);
    }
    for (k, r) in &parent_entries {
        arr.parents.insert(*k, *r);
    }
    for (k, r) in &outer_entries {
        arr.outers.insert(*k, *r);
    }
    if outer_entries.is_empty() {
        let nk = CurveId(new_keys[a.index()]);
        let repaired = orig_outer_repair
            .ok_or_else(|| MapError::Corrupt("outer cycle died without a component split".into()))?;
        arr.outers.insert(nk, repaired);
    }
    arr.apply_moves(moves, &key_map, &new_keys);

    arr.note_mutation();
    arr.commit()?;
    let mut reference_cells = BTreeMap::new();
    for (name, h) in [
        ("u", m_u),
        ("u_alpha", m_u_alpha),
        ("u_beta", m_u_beta),
        ("v", m_v),
        ("v_alpha", m_v_alpha),
        ("v_beta", m_v_beta),
    ] {
        reference_cells.insert(name.to_string(), arr.resolve_homed(h)?);
    }
    Ok(SurgeryRecord {
        operation: "bypass_minimal_digon",
        lost_vertices: vec![u, v],
        new_vertices: Vec::new(),
        reference_cells,
    })
}

/// Bypass a minimal triangle on the sweep curve: the apex crossing moves out
/// of the sweep region (as a fresh crossing), the two base crossings swap
/// their positions, and chords re-attribute between the two curves.
pub fn bypass_minimal_triangle<S: Scalar>(
    arr: &mut Arrangement<S>,
    tri: &TriangleDescriptor,
) -> Result<SurgeryRecord, MapError> {
    if !tri.minimal {
        return Err(precondition("triangle is not minimal"));
    }
    let g = arr.sweep_curve();
    let (alpha, beta) = tri.curves;
    let (u, v, w) = (tri.base_u, tri.apex, tri.base_w);
    if arr.walk_next(g, u) != w {
        return Err(precondition("descriptor is stale: base is not an arc of the sweep curve"));
    }
    let a_dir = if tri.alpha_enters { Dir::Forward } else { Dir::Backward };
    let b_dir = if tri.beta_enters { Dir::Forward } else { Dir::Backward };
    // Chord crossings base-to-apex on each side.
    let d_chords = directed_run_interior(arr, alpha, u, v, a_dir);
    let e_chords = directed_run_interior(arr, beta, w, v, b_dir);
    if d_chords.iter().any(|&x| arr.crossing(x).involves(g) || arr.crossing(x).involves(beta)) {
        return Err(precondition("descriptor is stale"));
    }
    if e_chords.iter().any(|&x| arr.crossing(x).involves(g) || arr.crossing(x).involves(alpha)) {
        return Err(precondition("descriptor is stale"));
    }
    let a_beyond = match a_dir {
        Dir::Forward => arr.walk_next(alpha, v),
        Dir::Backward => arr.walk_prev(alpha, v),
    };
    let b_beyond = match b_dir {
        Dir::Forward => arr.walk_next(beta, v),
        Dir::Backward => arr.walk_prev(beta, v),
    };

    // Fresh apex outside the sweep region, same pair and sign.
    let apex_pair = arr.crossing(v).pair;
    let apex_sign = arr.crossing(v).sign;
    let v_new = arr.alloc_crossing(apex_pair, apex_sign);

    // New runs (in base-to-apex travel order):
    //   alpha: v', u, then beta's chords base-to-apex;
    //   beta:  v', w, then alpha's chords base-to-apex.
    let mut a_items = vec![v_new, u];
    a_items.extend(e_chords.iter().copied());
    let mut b_items = vec![v_new, w];
    b_items.extend(d_chords.iter().copied());
    let old_walk_g = arr.walk(g).to_vec();
    let old_walk_a = arr.walk(alpha).to_vec();
    let old_walk_b = arr.walk(beta).to_vec();
    let new_walk_g = swapped_adjacent(&old_walk_g, u, w);
    let new_walk_a = splice_directed(&old_walk_a, u, v, a_dir, &a_items);
    let new_walk_b = splice_directed(&old_walk_b, w, v, b_dir, &b_items);

    let dying: BTreeSet<CrossingId> = [v].into_iter().collect();
    let mut dying_names = Arrangement::<S>::changed_dart_names(g, &old_walk_g, &new_walk_g);
    dying_names.extend(Arrangement::<S>::changed_dart_names(alpha, &old_walk_a, &new_walk_a));
    dying_names.extend(Arrangement::<S>::changed_dart_names(beta, &old_walk_b, &new_walk_b));
    for &x in &d_chords {
        for dir in [Dir::Forward, Dir::Backward] {
            dying_names.insert(DartName::new(alpha, x, dir));
        }
    }
    for &x in &e_chords {
        for dir in [Dir::Forward, Dir::Backward] {
            dying_names.insert(DartName::new(beta, x, dir));
        }
    }

    // Post-edit handles. Apex side of each hook is on the triangle side of
    // the exchanged run; base-to-apex travel keeps the old triangle on the
    // first curve's left iff it walked in forward.
    let hook_a_anchor = *e_chords.last().unwrap_or(&u);
    let hook_b_anchor = *d_chords.last().unwrap_or(&w);
    let (ha_prev, ha_next) =
        if tri.alpha_enters { (hook_a_anchor, a_beyond) } else { (a_beyond, hook_a_anchor) };
    let (hb_prev, hb_next) =
        if tri.beta_enters { (hook_b_anchor, b_beyond) } else { (b_beyond, hook_b_anchor) };
    // The two hooks pass the old apex on opposite sides: walking base-to-apex
    // the first curve keeps the apex region on its left, the second on its
    // right.
    let apex_handle = Homed::Ref(CycleRef::Dart(side_dart(alpha, ha_prev, ha_next, tri.alpha_enters)));
    let apex_handle_b = Homed::Ref(CycleRef::Dart(side_dart(beta, hb_prev, hb_next, !tri.beta_enters)));
    let v_alpha_handle = Homed::Ref(CycleRef::Dart(side_dart(alpha, ha_prev, ha_next, !tri.alpha_enters)));
    let v_beta_handle = Homed::Ref(CycleRef::Dart(side_dart(beta, hb_prev, hb_next, tri.beta_enters)));
    let base_handle = Homed::Ref(CycleRef::Dart(DartName::new(g, w, Dir::Forward)));
    let below_handle = Homed::Ref(CycleRef::Dart(if tri.alpha_enters {
        DartName::new(alpha, u, Dir::Backward)
    } else {
        DartName::new(alpha, u, Dir::Forward)
    }));

    // Pre-edit cells needing explicit reassignment.
    let base_cell = arr.cell_of_dart(DartName::new(g, u, Dir::Forward));
    let below_cell = arr.cell_of_dart(DartName::new(g, w, Dir::Backward));
    // Quadrants at the apex.
    let a_run_strand_at_v = match a_dir {
        Dir::Forward => DartName::new(alpha, v, Dir::Backward),
        Dir::Backward => DartName::new(alpha, v, Dir::Forward),
    };
    let a_beyond_strand = DartName::new(alpha, v, a_run_strand_at_v.dir.flip());
    let b_run_strand_at_v = match b_dir {
        Dir::Forward => DartName::new(beta, v, Dir::Backward),
        Dir::Backward => DartName::new(beta, v, Dir::Forward),
    };
    let b_beyond_strand = DartName::new(beta, v, b_run_strand_at_v.dir.flip());
    let q_t = arr.quadrant_between(v, a_run_strand_at_v, b_run_strand_at_v);
    let v_opp = arr.quadrant_between(v, a_beyond_strand, b_beyond_strand);
    let n_cut_by_a_hook = arr.quadrant_between(v, b_run_strand_at_v, a_beyond_strand);
    let n_cut_by_b_hook = arr.quadrant_between(v, a_run_strand_at_v, b_beyond_strand);

    let plan = RehomePlan {
        by_cell: vec![
            (q_t, apex_handle),
            (v_opp, apex_handle),
            (n_cut_by_a_hook, v_alpha_handle),
            (n_cut_by_b_hook, v_beta_handle),
            (base_cell, base_handle),
            (below_cell, below_handle),
        ],
        dying_cycle_fallback: vec![
            (arr.dart_cycle(DartName::new(g, pre_of(arr, g, u), Dir::Forward)), Homed::Ref(CycleRef::Dart(DartName::new(g, pre_of(arr, g, u), Dir::Forward)))),
            (arr.dart_cycle(DartName::new(g, post_of(arr, g, w), Dir::Backward)), Homed::Ref(CycleRef::Dart(DartName::new(g, post_of(arr, g, w), Dir::Backward)))),
            (arr.dart_cycle(DartName::new(g, w, Dir::Forward)), Homed::Ref(CycleRef::Dart(side_dart(alpha, if tri.alpha_enters { u } else { *e_chords.first().unwrap_or(&a_beyond) }, if tri.alpha_enters { *e_chords.first().unwrap_or(&a_beyond) } else { u }, !tri.alpha_enters)))),
            (arr.dart_cycle(DartName::new(g, u, Dir::Backward)), below_handle),
        ],
        outer_fallback: vec![(
            arr.dart_cycle(DartName::new(g, w, Dir::Backward)),
            DartName::new(g, w, Dir::Backward),
        )],
        ..Default::default()
    };
    let moves = arr.plan_rehoming(&plan, &dying, &dying_names, &BTreeSet::new())?;
    let outer_moves = arr.plan_outer_repair(&plan, &dying, &dying_names, &BTreeSet::new())?;

    // Edit.
    let old_keys = arr.curve_component_keys();
    arr.set_walk(g, new_walk_g);
    arr.set_walk(alpha, new_walk_a);
    arr.set_walk(beta, new_walk_b);
    for &x in &d_chords {
        arr.reattribute(x, alpha, beta, tri.alpha_enters == tri.beta_enters);
    }
    for &x in &e_chords {
        arr.reattribute(x, beta, alpha, tri.alpha_enters == tri.beta_enters);
    }
    arr.delete_crossing(v);

    let new_keys = arr.curve_component_keys();
    let key_map = component_key_map(&old_keys, &new_keys);
    arr.rekey_records(&key_map);
    for (k, r) in outer_moves {
        let nk = key_map.get(&k).copied().unwrap_or(k);
        arr.outers.insert(nk, r);
    }
    arr.apply_moves(moves, &key_map, &new_keys);

    arr.note_mutation();
    arr.commit()?;
    if arr.crossing_inside_sweep(v_new) {
        return Err(MapError::Corrupt("new apex still inside the sweep region".into()));
    }
    let mut reference_cells = BTreeMap::new();
    reference_cells.insert("v".to_string(), arr.resolve_homed(apex_handle)?);
    reference_cells.insert("v_alpha".to_string(), arr.resolve_homed(v_alpha_handle)?);
    reference_cells.insert("v_beta".to_string(), arr.resolve_homed(v_beta_handle)?);
    let apex_b = arr.resolve_homed(apex_handle_b)?;
    if apex_b != reference_cells["v"] {
        return Err(MapError::Corrupt("apex handles disagree after the bypass".into()));
    }
    Ok(SurgeryRecord {
        operation: "bypass_minimal_triangle",
        lost_vertices: vec![v],
        new_vertices: vec![v_new],
        reference_cells,
    })
}

fn pre_of<S: Scalar>(arr: &Arrangement<S>, c: CurveId, x: CrossingId) -> CrossingId {
    arr.walk_prev(c, x)
}

fn post_of<S: Scalar>(arr: &Arrangement<S>, c: CurveId, x: CrossingId) -> CrossingId {
    arr.walk_next(c, x)
}

/// Walk with the forward run `from ..= to` replaced by `items`.
fn splice_forward(walk: &[CrossingId], from: CrossingId, to: CrossingId, items: &[CrossingId]) -> Vec<CrossingId> {
    let n = walk.len();
    let i = walk.iter().position(|&z| z == from).expect("from on walk");
    let j = walk.iter().position(|&z| z == to).expect("to on walk");
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(items);
    let mut k = (j + 1) % n;
    while k != i {
        out.push(walk[k]);
        k = (k + 1) % n;
    }
    out
}

/// Walk with the `dir`-directed run `from ..= to` replaced by `items` (given
/// in the travel direction).
fn splice_directed(
    walk: &[CrossingId],
    from: CrossingId,
    to: CrossingId,
    dir: Dir,
    items: &[CrossingId],
) -> Vec<CrossingId> {
    match dir {
        Dir::Forward => splice_forward(walk, from, to, items),
        Dir::Backward => {
            let rev: Vec<CrossingId> = items.iter().rev().copied().collect();
            splice_forward(walk, to, from, &rev)
        }
    }
}

/// Walk with two adjacent entries swapped.
fn swapped_adjacent(walk: &[CrossingId], x: CrossingId, y: CrossingId) -> Vec<CrossingId> {
    let mut out = walk.to_vec();
    let i = out.iter().position(|&z| z == x).expect("x on walk");
    let j = out.iter().position(|&z| z == y).expect("y on walk");
    let n = out.len();
    assert!((i + 1) % n == j || (j + 1) % n == i, "entries not adjacent");
    out.swap(i, j);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::build_arrangement;
    use crate::geom::ClosedPolyline;
    use crate::invariants;
    use crate::Rat;

    type C = ClosedPolyline<Rat>;

    fn sq(name: &str, x0: i64, y0: i64, x1: i64, y1: i64) -> C {
        C::from_ints(name, &[(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
    }

    #[test]
    fn offset_squares_have_one_minimal_lens() {
        let arr = build_arrangement(
            vec![sq("a", 0, 0, 4, 4), sq("b", 2, 2, 6, 6)],
            "a",
            Vec::new(),
        )
        .unwrap();
        let lenses = find_lenses(&arr, LensScope::WholeArrangement);
        let true_lenses: Vec<_> = lenses.iter().filter(|l| l.kind == LensKind::Lens).collect();
        assert_eq!(true_lenses.len(), 1);
        assert!(true_lenses[0].minimal);
        // The two crescents are digons contained in exactly one region.
        assert_eq!(lenses.iter().filter(|l| l.kind == LensKind::Mixed).count(), 2);
    }

    #[test]
    fn bypass_empty_lens_separates_the_pair() {
        let mut arr = build_arrangement(
            vec![sq("a", 0, 0, 4, 4), sq("b", 2, 2, 6, 6)],
            "a",
            vec![("m".into(), crate::geom::ExactPoint::from_ints(3, 3))],
        )
        .unwrap();
        let lens = find_lenses(&arr, LensScope::WholeArrangement)
            .into_iter()
            .find(|l| l.kind == LensKind::Lens)
            .unwrap();
        let rec = bypass_minimal_digon(&mut arr, &lens).unwrap();
        assert_eq!(rec.lost_vertices.len(), 2);
        assert_eq!(arr.crossing_count(), 0);
        assert_eq!(arr.derived().components.len(), 2);
        assert!(arr.check_integrity().ok());
        assert!(invariants::family_report(&arr).is_nonpiercing);
        // The marker that was inside the lens now sits in the corridor: in
        // neither region.
        let m = arr.tracked_by_name("m").unwrap();
        let cell = arr.tracked_cell(m);
        let (a, b) = (arr.curve_by_name("a").unwrap(), arr.curve_by_name("b").unwrap());
        assert!(!arr.cell_inside(cell, a) && !arr.cell_inside(cell, b));
    }

    /// Offset squares plus a chord curve through the lens.
    fn lens_with_chord() -> Vec<C> {
        vec![
            sq("a", 0, 0, 4, 4),
            sq("b", 2, 2, 6, 6),
            sq("d", 1, 3, 3, 5),
        ]
    }

    #[test]
    fn bypass_lens_with_chord_preserves_other_pairs() {
        let mut arr = build_arrangement(lens_with_chord(), "a", Vec::new()).unwrap();
        let (a, b, d) = (
            arr.curve_by_name("a").unwrap(),
            arr.curve_by_name("b").unwrap(),
            arr.curve_by_name("d").unwrap(),
        );
        assert!(invariants::family_report(&arr).is_nonpiercing);
        let lenses = find_lenses(&arr, LensScope::WholeArrangement);
        let lens = lenses
            .iter()
            .find(|l| l.kind == LensKind::Lens && l.curves == (a, b))
            .expect("lens of the two squares");
        assert!(lens.minimal, "single chord keeps the lens minimal");
        let before = arr.crossing_matrix();
        bypass_minimal_digon(&mut arr, lens).unwrap();
        let after = arr.crossing_matrix();
        assert_eq!(after.get(&(a, b)), None);
        assert_eq!(before[&(a, b)], 2);
        assert_eq!(after[&(a, d)], before[&(a, d)]);
        assert_eq!(after[&(b, d)], before[&(b, d)]);
        assert!(invariants::nonpiercing_pair(&arr, a, d));
        assert!(invariants::nonpiercing_pair(&arr, b, d));
        assert!(invariants::family_report(&arr).is_nonpiercing);
        assert!(arr.check_integrity().ok());
    }

    #[test]
    fn chord_with_both_endpoints_on_one_side_breaks_minimality() {
        // A curve dips into the lens through the first square's top edge and
        // leaves through the same side again.
        let curves = vec![
            sq("a", 0, 0, 8, 8),
            sq("b", 4, 4, 12, 12),
            sq("d", 5, 6, 6, 9),
        ];
        let arr = build_arrangement(curves, "a", Vec::new()).unwrap();
        let (a, b) = (arr.curve_by_name("a").unwrap(), arr.curve_by_name("b").unwrap());
        let lenses = find_lenses(&arr, LensScope::WholeArrangement);
        let lens = lenses
            .iter()
            .find(|l| l.kind == LensKind::Lens && l.curves == (a, b))
            .expect("lens exists");
        assert!(!lens.minimal);
    }

    /// Sweep square with two overlapping rectangles poking out the top and two
    /// horizontal chord slabs through the triangle between them.
    fn triangle_with_chords(n_chords: usize) -> Vec<C> {
        let mut curves = vec![
            sq("g", 0, 0, 20, 20),
            sq("alpha", 4, 4, 12, 24),
            sq("beta", 8, 5, 16, 25),
        ];
        for i in 0..n_chords {
            let y0 = 9 + 2 * i as i64;
            curves.push(sq(&format!("d{i}"), 6, y0, 14, y0 + 1));
        }
        curves
    }

    #[test]
    fn find_triangles_without_chords() {
        let arr = build_arrangement(triangle_with_chords(0), "g", Vec::new()).unwrap();
        let tris = find_minimal_triangles_on_sweep(&arr);
        // One triangle per base arc, all sharing the single interior vertex.
        assert_eq!(tris.len(), 4, "{tris:?}");
        assert!(tris.iter().all(|t| t.minimal));
        let apex = tris[0].apex;
        assert!(tris.iter().all(|t| t.apex == apex));
    }

    #[test]
    fn bypass_triangle_without_chords() {
        let mut arr = build_arrangement(triangle_with_chords(0), "g", Vec::new()).unwrap();
        let before = arr.crossing_matrix();
        let interior_before = arr.crossing_ids().filter(|&x| arr.crossing_inside_sweep(x)).count();
        let tri = find_minimal_triangles_on_sweep(&arr)[0].clone();
        let rec = bypass_minimal_triangle(&mut arr, &tri).unwrap();
        assert_eq!(rec.lost_vertices, vec![tri.apex]);
        assert_eq!(rec.new_vertices.len(), 1);
        let after = arr.crossing_matrix();
        let canon = |m: &std::collections::BTreeMap<(crate::arrangement::CurveId, crate::arrangement::CurveId), usize>| {
            m.values().copied().collect::<Vec<_>>()
        };
        assert_eq!(canon(&before), canon(&after));
        let interior_after = arr.crossing_ids().filter(|&x| arr.crossing_inside_sweep(x)).count();
        assert_eq!(interior_after + 1, interior_before);
        assert!(invariants::family_report(&arr).is_nonpiercing);
        assert!(invariants::family_report(&arr).is_two_intersecting);
        assert!(arr.check_integrity().ok());
    }

    #[test]
    fn bypass_triangle_with_chords_preserves_orders() {
        for n_chords in 1..=2usize {
            let mut arr = build_arrangement(triangle_with_chords(n_chords), "g", Vec::new()).unwrap();
            assert!(invariants::family_report(&arr).is_nonpiercing);
            let tris = find_minimal_triangles_on_sweep(&arr);
            let tri = tris
                .iter()
                .find(|t| t.minimal && !t.interior_cells.is_empty() && {
                    // pick the chord-crossed one: more than one interior cell
                    t.interior_cells.len() > 1
                })
                .unwrap_or(&tris[0])
                .clone();
            let before = arr.crossing_matrix();
            let interior_before =
                arr.crossing_ids().filter(|&x| arr.crossing_inside_sweep(x)).count();
            bypass_minimal_triangle(&mut arr, &tri).unwrap();
            let after = arr.crossing_matrix();
            assert_eq!(before.values().sum::<usize>(), after.values().sum::<usize>());
            let interior_after =
                arr.crossing_ids().filter(|&x| arr.crossing_inside_sweep(x)).count();
            assert_eq!(interior_after + 1, interior_before, "chords={n_chords}");
            let rep = invariants::family_report(&arr);
            assert!(rep.is_nonpiercing, "chords={n_chords}: {rep:?}");
            assert!(rep.is_two_intersecting);
            assert!(arr.check_integrity().ok());
        }
    }
}
