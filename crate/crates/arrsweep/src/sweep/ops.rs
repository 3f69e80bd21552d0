//! The four sweeping operations as walk rewrites.

use super::SweepOp;
use crate::arrangement::rewrite::{side_dart, Homed, PairSplit, RehomePlan};
use crate::arrangement::{
    Arrangement, CellId, CrossingId, CurveId, CycleKind, CycleRef, DartName, Dir, MapError,
    OuterRef, PointId,
};
use crate::Scalar;
use std::collections::{BTreeMap, BTreeSet};

/// What one operation did to the crossing set.
#[derive(Clone, Debug)]
pub struct OpReport {
    pub added: Vec<CrossingId>,
    pub removed: Vec<CrossingId>,
    /// For operations that add crossings: the pair of new crossings per other
    /// curve involved.
    pub added_pairs: Vec<(CurveId, (CrossingId, CrossingId))>,
    /// Curve that lost the removed crossings with the sweep curve, if any.
    pub removed_other: Option<CurveId>,
}

impl OpReport {
    /// Signed change of crossings with the sweep curve per other curve.
    pub fn sweep_deltas(&self) -> BTreeMap<CurveId, i64> {
        let mut m: BTreeMap<CurveId, i64> = BTreeMap::new();
        for (c, _) in &self.added_pairs {
            *m.entry(*c).or_insert(0) += 2;
        }
        if let Some(c) = self.removed_other {
            *m.entry(c).or_insert(0) -= self.removed.len() as i64;
        }
        m
    }
}

fn precondition(msg: impl Into<String>) -> MapError {
    MapError::Precondition(msg.into())
}

fn forbid_point<S: Scalar>(
    arr: &Arrangement<S>,
    point: Option<PointId>,
    cell: CellId,
    what: &str,
) -> Result<(), MapError> {
    if let Some(p) = point {
        if arr.tracked_cell(p) == cell {
            return Err(precondition(format!("tracked point sits inside the {what}")));
        }
    }
    Ok(())
}

/// Take a loop from the sweep curve around a curve disjoint from it.
pub fn apply_take_loop<S: Scalar>(
    arr: &mut Arrangement<S>,
    op: &SweepOp,
    _point: Option<PointId>,
) -> Result<OpReport, MapError> {
    let SweepOp::TakeLoop { target, via_cell, anchor_gamma, anchor_target } = *op else {
        return Err(precondition("wrong operation payload"));
    };
    let g = arr.sweep_curve();
    if target == g {
        return Err(precondition("cannot take a loop on the sweep curve"));
    }
    if !arr.curve_fully_inside_sweep(target) {
        return Err(precondition("take-loop target must be disjoint from the sweep curve and inside it"));
    }
    if !arr.cell_inside(via_cell, g) {
        return Err(precondition("via cell is not inside the sweep region"));
    }

    // Gamma-side anchor arc.
    let g_arc: Option<(CrossingId, CrossingId)> = if arr.is_isolated(g) {
        let def = arr.cell(via_cell).defining;
        let ok = def.map_or(false, |cy| arr.cycle(cy).kind == CycleKind::LoopInterior(g));
        if !ok {
            return Err(precondition("via cell does not touch the isolated sweep curve"));
        }
        None
    } else {
        let d = anchor_gamma.ok_or_else(|| precondition("missing sweep-side anchor"))?;
        if d.curve != g || d.dir != Dir::Forward || arr.cell_of_dart(d) != via_cell {
            return Err(precondition("sweep-side anchor does not bound the via cell from inside"));
        }
        Some((d.at, arr.walk_next(g, d.at)))
    };
    // Target-side anchor arc.
    let t_arc: Option<(CrossingId, CrossingId)> = if arr.is_isolated(target) {
        let on_cell = arr
            .cell(via_cell)
            .cycles
            .iter()
            .any(|&cy| arr.cycle(cy).kind == CycleKind::LoopExterior(target));
        if !on_cell {
            return Err(precondition("isolated target does not bound the via cell"));
        }
        None
    } else {
        let d = anchor_target.ok_or_else(|| precondition("missing target-side anchor"))?;
        if d.curve != target || arr.cell_of_dart(d) != via_cell {
            return Err(precondition("target anchor does not bound the via cell"));
        }
        if d.dir != Dir::Backward {
            return Err(precondition("target anchor must see the via cell from outside the target"));
        }
        Some((arr.walk_prev(target, d.at), d.at))
    };

    let x1 = arr.alloc_crossing((g, target), -1);
    let x2 = arr.alloc_crossing((g, target), 1);

    // Everything homed in the via cell goes to the left of the corridor.
    let via_handle = match g_arc {
        Some((p, _)) => CycleRef::Dart(DartName::new(g, p, Dir::Forward)),
        None => CycleRef::Dart(DartName::new(g, x2, Dir::Forward)),
    };
    let plan = RehomePlan {
        by_cell: vec![(via_cell, Homed::Ref(via_handle))],
        loop_interior: vec![(
            target,
            Homed::Ref(CycleRef::Dart(DartName::new(target, x2, Dir::Forward))),
        )],
        ..Default::default()
    };
    let old_keys = arr.curve_component_keys();
    let key_g = CurveId(old_keys[g.index()]);
    let key_t = CurveId(old_keys[target.index()]);
    let mut drop = BTreeSet::new();
    if key_g != key_t {
        drop.insert(key_t);
    }
    let moves = arr.plan_rehoming(&plan, &BTreeSet::new(), &BTreeSet::new(), &drop)?;
    let outer_moves = arr.plan_outer_repair(&plan, &BTreeSet::new(), &BTreeSet::new(), &drop)?;

    // Edit the walks.
    match g_arc {
        Some((p, _)) => arr.walk_insert_after(g, Some(p), &[x1, x2]),
        None => arr.walk_insert_after(g, None, &[x1, x2]),
    }
    match t_arc {
        Some((r, _)) => arr.walk_insert_after(target, Some(r), &[x1, x2]),
        None => arr.walk_insert_after(target, None, &[x1, x2]),
    }

    // Component bookkeeping.
    if key_g != key_t {
        arr.parents.remove(&key_t);
        arr.outers.remove(&key_t);
    }
    let new_keys = arr.curve_component_keys();
    let key_map = crate::arrangement::rewrite::component_key_map(&old_keys, &new_keys);
    arr.rekey_records(&key_map);
    for (k, r) in outer_moves {
        let nk = key_map.get(&k).copied().unwrap_or(k);
        arr.outers.insert(nk, r);
    }
    if g_arc.is_none() {
        // The sweep curve is no longer an isolated loop.
        let nk = CurveId(new_keys[g.index()]);
        arr.outers.insert(nk, OuterRef::Dart(DartName::new(g, x1, Dir::Backward)));
    }
    arr.apply_moves(moves, &key_map, &new_keys);

    arr.note_mutation();
    arr.commit()?;
    Ok(OpReport {
        added: vec![x1, x2],
        removed: Vec::new(),
        added_pairs: vec![(target, (x1, x2))],
        removed_other: None,
    })
}

/// Bypass a digon cell on the sweep curve.
pub fn apply_bypass_digon<S: Scalar>(
    arr: &mut Arrangement<S>,
    op: &SweepOp,
    point: Option<PointId>,
) -> Result<OpReport, MapError> {
    let SweepOp::BypassDigon { cell, other } = *op else {
        return Err(precondition("wrong operation payload"));
    };
    let g = arr.sweep_curve();
    match arr.classify_cell(cell) {
        crate::arrangement::CellClass::Digon { other: o } if o == other => {}
        c => return Err(precondition(format!("cell is not a digon on the sweep curve: {c:?}"))),
    }
    if !arr.cell_inside(cell, g) {
        return Err(precondition("digon cell is not inside the sweep region"));
    }
    forbid_point(arr, point, cell, "digon cell")?;

    let def = arr.cell(cell).defining.expect("digon has a defining cycle");
    let darts = arr.cycle(def).darts.clone();
    let d_g = *darts.iter().find(|d| d.curve == g).expect("sweep side");
    let d_o = *darts.iter().find(|d| d.curve == other).expect("other side");
    if d_g.dir != Dir::Forward {
        return Err(precondition("digon cell lies outside the sweep region"));
    }
    let u = d_g.at;
    let v = arr.walk_next(g, u);
    debug_assert_eq!(d_o.at, v, "face cycle continuity");
    let d_left_of_other = d_o.dir == Dir::Forward;

    // Post-edit neighbours on each walk.
    let g_arc = if arr.walk(g).len() == 2 {
        None
    } else {
        Some((arr.walk_prev(g, u), arr.walk_next(g, v)))
    };
    let o_first = if arr.walk_next(other, u) == v { u } else { v };
    let o_second = if o_first == u { v } else { u };
    debug_assert_eq!(arr.walk_next(other, o_first), o_second);
    let o_arc = if arr.walk(other).len() == 2 {
        None
    } else {
        Some((arr.walk_prev(other, o_first), arr.walk_next(other, o_second)))
    };

    // Cells and cycles that need explicit treatment.
    let c_a_cell = arr.cell_of_dart(arr.twin(d_o));
    let c_g_cycle = arr.dart(arr.twin(d_g)).cycle;
    let q_diag_u_cycle = arr.dart(DartName::new(g, u, Dir::Backward)).cycle;
    let q_diag_v_cycle = arr.dart(DartName::new(other, v, d_o.dir.flip())).cycle;

    let old_keys = arr.curve_component_keys();
    let orig_key = CurveId(old_keys[g.index()]);
    debug_assert_eq!(orig_key, CurveId(old_keys[other.index()]));
    let (old_outer_darts, old_outer_loop) = match arr.outers[&orig_key] {
        OuterRef::Dart(d) => (arr.cycle(arr.dart(d).cycle).darts.clone(), None),
        OuterRef::Loop(c) => (Vec::new(), Some(c)),
    };
    let split = PairSplit {
        a: g,
        b: other,
        a_arc: g_arc,
        b_arc: o_arc,
        a_between_left: false,
        b_between_left: !d_left_of_other,
        a_corridor_interior: false,
        b_corridor_interior: !d_left_of_other,
        old_outer_darts,
        old_outer_loop,
        old_parent: arr.parents[&orig_key],
    };

    let mut plan = RehomePlan {
        by_cell: vec![(cell, split.far_ref(other)), (c_a_cell, split.far_ref(g))],
        dying_cycle_fallback: vec![
            (c_g_cycle, split.far_ref(other)),
            (q_diag_u_cycle, split.corridor_ref(g)),
            (q_diag_v_cycle, split.corridor_ref(g)),
        ],
        ..Default::default()
    };
    // Outer fallbacks in case the old outer cycle dies entirely without a
    // component split (the split path replaces the records wholesale).
    if let Some((p, q)) = g_arc {
        plan.outer_fallback.push((q_diag_u_cycle, side_dart(g, p, q, false)));
        plan.outer_fallback.push((q_diag_v_cycle, side_dart(g, p, q, false)));
    }
    if let Some((r, s)) = o_arc {
        plan.outer_fallback.push((c_g_cycle, side_dart(other, r, s, d_left_of_other)));
    }

    let dying: BTreeSet<CrossingId> = [u, v].into_iter().collect();
    let mut drop = BTreeSet::new();
    drop.insert(orig_key);
    let moves = arr.plan_rehoming(&plan, &dying, &BTreeSet::new(), &drop)?;
    let outer_moves = arr.plan_outer_repair(&plan, &dying, &BTreeSet::new(), &drop)?;
    // Repair of the original component's outer record, used when no split
    // happens. A missing fallback can only occur in the split case, where
    // the placement logic rebuilds the records from scratch.
    let orig_outer_repair: Option<OuterRef> = match arr.outers[&orig_key] {
        OuterRef::Dart(d) if dying.contains(&d.at) => {
            let cy = arr.dart(d).cycle;
            match arr.cycle(cy).darts.iter().find(|dd| !dying.contains(&dd.at)) {
                Some(&sv) => Some(OuterRef::Dart(sv)),
                None => plan
                    .outer_fallback
                    .iter()
                    .find(|(c, _)| *c == cy)
                    .map(|(_, d2)| OuterRef::Dart(*d2)),
            }
        }
        r => Some(r),
    };

    // Edit.
    arr.walk_remove(g, u);
    arr.walk_remove(g, v);
    arr.walk_remove(other, u);
    arr.walk_remove(other, v);
    arr.delete_crossing(u);
    arr.delete_crossing(v);

    let new_keys = arr.curve_component_keys();
    let key_map = crate::arrangement::rewrite::component_key_map(&old_keys, &new_keys);
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
        // No split: the original component keeps its (possibly repaired)
        // outer record.
        let nk = CurveId(new_keys[g.index()]);
        let repaired = orig_outer_repair.ok_or_else(|| {
            MapError::Corrupt("outer cycle died without a component split".into())
        })?;
        arr.outers.insert(nk, repaired);
    }
    arr.apply_moves(moves, &key_map, &new_keys);

    arr.note_mutation();
    arr.commit()?;
    Ok(OpReport { added: Vec::new(), removed: vec![u, v], added_pairs: Vec::new(), removed_other: Some(other) })
}

/// Bypass a triangle cell on the sweep curve: the interior vertex moves out of
/// the sweep region.
pub fn apply_bypass_triangle<S: Scalar>(
    arr: &mut Arrangement<S>,
    op: &SweepOp,
    point: Option<PointId>,
) -> Result<OpReport, MapError> {
    let SweepOp::BypassTriangle { cell, curves, interior_vertex } = *op else {
        return Err(precondition("wrong operation payload"));
    };
    let g = arr.sweep_curve();
    match arr.classify_cell(cell) {
        crate::arrangement::CellClass::Triangle { curves: c, interior_vertex: v }
            if c == curves && v == interior_vertex => {}
        c => return Err(precondition(format!("cell is not a matching triangle: {c:?}"))),
    }
    if !arr.cell_inside(cell, g) {
        return Err(precondition("triangle cell is not inside the sweep region"));
    }
    forbid_point(arr, point, cell, "triangle cell")?;

    let def = arr.cell(cell).defining.expect("triangle has a defining cycle");
    let darts = arr.cycle(def).darts.clone();
    let gi = darts.iter().position(|d| d.curve == g).expect("sweep side");
    let d_g = darts[gi];
    let d2 = darts[(gi + 1) % 3];
    let d3 = darts[(gi + 2) % 3];
    if d_g.dir != Dir::Forward {
        return Err(precondition("triangle cell lies outside the sweep region"));
    }
    let f = d_g.at;
    let sx = arr.walk_next(g, f);
    let v = d3.at;
    debug_assert_eq!(v, interior_vertex);
    let first_curve = d3.curve; // crosses the sweep curve at f
    let second_curve = d2.curve; // crosses at sx

    let v_opp_cell = arr.cell_of_dart(DartName::new(d3.curve, v, d3.dir.flip()));
    let n_first_cell = arr.cell_of_dart(arr.twin(d3));
    let n_second_cell = arr.cell_of_dart(arr.twin(d2));
    let pre = arr.walk_prev(g, f);

    // The dart name over the arc before the triangle base keeps its face, but
    // the backward name at the first base crossing moves from the cell below
    // the approach to the flipped triangle; anchors on it must be repaired.
    let w_out_cycle = arr.dart(DartName::new(g, f, Dir::Backward)).cycle;
    let plan = RehomePlan {
        by_cell: vec![
            (cell, Homed::Ref(CycleRef::Dart(DartName::new(g, f, Dir::Backward)))),
            (v_opp_cell, Homed::Ref(CycleRef::Dart(DartName::new(g, sx, Dir::Forward)))),
            (n_first_cell, Homed::Ref(CycleRef::Dart(DartName::new(g, pre, Dir::Forward)))),
            (n_second_cell, Homed::Ref(CycleRef::Dart(DartName::new(g, f, Dir::Forward)))),
        ],
        dying_cycle_fallback: vec![(
            w_out_cycle,
            Homed::Ref(CycleRef::Dart(DartName::new(g, sx, Dir::Backward))),
        )],
        outer_fallback: vec![(w_out_cycle, DartName::new(g, sx, Dir::Backward))],
        ..Default::default()
    };
    let dying_names: BTreeSet<DartName> = [DartName::new(g, f, Dir::Backward)].into_iter().collect();
    let moves = arr.plan_rehoming(&plan, &BTreeSet::new(), &dying_names, &BTreeSet::new())?;
    let outer_moves = arr.plan_outer_repair(&plan, &BTreeSet::new(), &dying_names, &BTreeSet::new())?;

    arr.walk_swap_adjacent(g, f, sx);
    arr.walk_swap_adjacent(first_curve, f, v);
    arr.walk_swap_adjacent(second_curve, sx, v);

    let key_map = BTreeMap::new();
    let new_keys = arr.curve_component_keys();
    for (k, r) in outer_moves {
        arr.outers.insert(k, r);
    }
    arr.apply_moves(moves, &key_map, &new_keys);

    arr.note_mutation();
    arr.commit()?;
    if arr.crossing_inside_sweep(v) {
        return Err(MapError::Corrupt("bypassed vertex still inside the sweep region".into()));
    }
    Ok(OpReport { added: Vec::new(), removed: Vec::new(), added_pairs: Vec::new(), removed_other: None })
}

/// Bypass a visible interior vertex: the sweep curve loops around it, gaining
/// two crossings with each of the vertex's curves.
pub fn apply_bypass_vertex<S: Scalar>(
    arr: &mut Arrangement<S>,
    op: &SweepOp,
    _point: Option<PointId>,
) -> Result<OpReport, MapError> {
    let SweepOp::BypassVertex { vertex, via_cell, anchor_gamma } = *op else {
        return Err(precondition("wrong operation payload"));
    };
    let g = arr.sweep_curve();
    if !arr.crossing_inside_sweep(vertex) {
        return Err(precondition("vertex is not strictly inside the sweep region"));
    }
    let q = super::candidates::interior_quadrant(arr, vertex);
    if q != via_cell {
        return Err(precondition("via cell is not the interior quadrant of the vertex"));
    }
    let cr = arr.crossing(vertex);
    let (a, b) = cr.pair;
    let s = cr.sign;

    let g_arc: Option<(CrossingId, CrossingId)> = if arr.is_isolated(g) {
        let def = arr.cell(via_cell).defining;
        let ok = def.map_or(false, |cy| arr.cycle(cy).kind == CycleKind::LoopInterior(g));
        if !ok {
            return Err(precondition("via cell does not touch the isolated sweep curve"));
        }
        None
    } else {
        let d = anchor_gamma.ok_or_else(|| precondition("missing sweep-side anchor"))?;
        if d.curve != g || d.dir != Dir::Forward || arr.cell_of_dart(d) != via_cell {
            return Err(precondition("sweep-side anchor does not bound the via cell from inside"));
        }
        Some((d.at, arr.walk_next(g, d.at)))
    };

    // New crossings; insertion order along the sweep curve depends on the
    // crossing sign at the vertex.
    let x_a1 = arr.alloc_crossing((g, a), 1);
    let x_b1 = arr.alloc_crossing((g, b), 1);
    let x_a2 = arr.alloc_crossing((g, a), -1);
    let x_b2 = arr.alloc_crossing((g, b), -1);
    let gamma_insert: [CrossingId; 4] =
        if s > 0 { [x_b1, x_a1, x_b2, x_a2] } else { [x_a1, x_b1, x_a2, x_b2] };

    let via_handle = match g_arc {
        Some((p, _)) => CycleRef::Dart(DartName::new(g, p, Dir::Forward)),
        None => CycleRef::Dart(DartName::new(g, gamma_insert[3], Dir::Forward)),
    };
    // Quadrant cells at the vertex other than the via cell keep their
    // occupants on the far side of the new loop.
    let strand_handle = |curve: CurveId, dir: Dir| -> DartName {
        let x = match (curve == a, dir) {
            (true, Dir::Forward) => x_a1,
            (true, Dir::Backward) => x_a2,
            (false, Dir::Forward) => x_b1,
            (false, Dir::Backward) => x_b2,
        };
        DartName::new(curve, x, dir)
    };
    let mut by_cell = vec![(via_cell, Homed::Ref(via_handle))];
    for curve in [a, b] {
        for dir in [Dir::Forward, Dir::Backward] {
            let o = DartName::new(curve, vertex, dir);
            let cell = arr.cell_of_dart(o);
            if by_cell.iter().any(|(c, _)| *c == cell) {
                continue;
            }
            by_cell.push((cell, Homed::Ref(CycleRef::Dart(strand_handle(curve, dir)))));
        }
    }
    let plan = RehomePlan { by_cell, ..Default::default() };

    let old_keys = arr.curve_component_keys();
    let key_g = CurveId(old_keys[g.index()]);
    let key_v = CurveId(old_keys[a.index()]);
    let mut drop = BTreeSet::new();
    if key_g != key_v {
        drop.insert(key_v);
    }
    let moves = arr.plan_rehoming(&plan, &BTreeSet::new(), &BTreeSet::new(), &drop)?;

    match g_arc {
        Some((p, _)) => arr.walk_insert_after(g, Some(p), &gamma_insert),
        None => arr.walk_insert_after(g, None, &gamma_insert),
    }
    let before_a = arr.walk_prev(a, vertex);
    arr.walk_insert_after(a, Some(before_a), &[x_a2]);
    arr.walk_insert_after(a, Some(vertex), &[x_a1]);
    let before_b = arr.walk_prev(b, vertex);
    arr.walk_insert_after(b, Some(before_b), &[x_b2]);
    arr.walk_insert_after(b, Some(vertex), &[x_b1]);

    if key_g != key_v {
        arr.parents.remove(&key_v);
        arr.outers.remove(&key_v);
    }
    let new_keys = arr.curve_component_keys();
    let key_map = crate::arrangement::rewrite::component_key_map(&old_keys, &new_keys);
    arr.rekey_records(&key_map);
    if g_arc.is_none() {
        let nk = CurveId(new_keys[g.index()]);
        arr.outers.insert(nk, OuterRef::Dart(DartName::new(g, gamma_insert[0], Dir::Backward)));
    }
    arr.apply_moves(moves, &key_map, &new_keys);

    arr.note_mutation();
    arr.commit()?;
    if arr.crossing_inside_sweep(vertex) {
        return Err(MapError::Corrupt("bypassed vertex still inside the sweep region".into()));
    }
    Ok(OpReport {
        added: vec![x_a1, x_b1, x_a2, x_b2],
        removed: Vec::new(),
        added_pairs: vec![(a, (x_a1, x_a2)), (b, (x_b1, x_b2))],
        removed_other: None,
    })
}
