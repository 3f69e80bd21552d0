//! Planar support construction for points in non-piercing regions.
//!
//! For every region holding points from several components of the evolving
//! graph, a combinatorial clone of the region is inserted just inside it and
//! swept inward until exactly two points from distinct components remain
//! inside the clone; those two get an edge. Evictions are processed one point
//! at a time so the stopping rule can fire between them, mirroring a
//! continuous shrink.

pub mod planarity;

pub use planarity::{check_planarity, is_planar, PlanarityVerdict};

use crate::arrangement::rewrite::{Homed, RehomePlan};
use crate::arrangement::{
    build_arrangement, Arrangement, CellClass, CrossingId, CurveId, CycleKind, CycleRef, DartName,
    Dir, MapError, PointId,
};
use crate::geom::{self, ClosedPolyline, ExactPoint, Place};
use crate::invariants;
use crate::sweep::{self, SweepMode, SweepOp};
use crate::Scalar;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, Serialize)]
pub struct SupportEdge {
    pub a: String,
    pub b: String,
    pub witness: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportGraph {
    pub points: Vec<String>,
    pub edges: Vec<SupportEdge>,
}

impl SupportGraph {
    pub fn edge_indices(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|e| {
                (
                    self.points.iter().position(|p| *p == e.a).unwrap(),
                    self.points.iter().position(|p| *p == e.b).unwrap(),
                )
            })
            .collect()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph support {\n");
        for p in &self.points {
            s.push_str(&format!("  \"{p}\";\n"));
        }
        for e in &self.edges {
            s.push_str(&format!("  \"{}\" -- \"{}\" [label=\"{}\"];\n", e.a, e.b, e.witness));
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SupportError {
    #[error("input regions are not pairwise non-piercing: {0} / {1}")]
    Piercing(String, String),
    #[error("input validation failed: {0}")]
    BadInput(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("sweep failed while shrinking a clone: {0}")]
    Sweep(String),
    #[error("support certification failed: {0}")]
    Certification(String),
}

/// Build a planar support for `points` with respect to `regions`.
pub fn build_support<S: Scalar>(
    points: &[(String, ExactPoint<S>)],
    regions: &[ClosedPolyline<S>],
) -> Result<SupportGraph, SupportError> {
    let report = geom::validate_general_position(regions);
    if !report.ok() {
        return Err(SupportError::BadInput(format!("{:?}", report.violations)));
    }
    for (i, a) in regions.iter().enumerate() {
        for b in &regions[i + 1..] {
            match invariants::nonpiercing_oracle(a, b) {
                Ok(true) => {}
                Ok(false) => return Err(SupportError::Piercing(a.name.clone(), b.name.clone())),
                Err(e) => return Err(SupportError::BadInput(e)),
            }
        }
    }
    for (name, p) in points {
        for r in regions {
            if geom::point_in_curve(p, r) == Place::OnBoundary {
                return Err(SupportError::BadInput(format!("point {name} lies on region {}", r.name)));
            }
        }
    }

    // Geometric membership of points in the original regions stays valid for
    // the whole construction; only clones mutate.
    let membership: Vec<Vec<bool>> = regions
        .iter()
        .map(|r| points.iter().map(|(_, p)| geom::point_in_curve(p, r) == Place::Inside).collect())
        .collect();

    let sweep_name = regions.first().map(|r| r.name.clone()).unwrap_or_default();
    let mut arr = if regions.is_empty() {
        None
    } else {
        Some(
            build_arrangement(
                regions.to_vec(),
                &sweep_name,
                points.iter().map(|(n, p)| (n.clone(), p.clone())).collect(),
            )
            .map_err(|e| SupportError::BadInput(e.to_string()))?,
        )
    };

    let mut edges: Vec<(usize, usize, usize)> = Vec::new(); // (point, point, region)
    for (ri, _region) in regions.iter().enumerate() {
        let members: Vec<usize> =
            (0..points.len()).filter(|&pi| membership[ri][pi]).collect();
        if members.len() < 2 {
            continue;
        }
        loop {
            let mut comp = components(points.len(), &edges, &members);
            if comp.distinct(&members) <= 1 {
                break;
            }
            let arr = arr.as_mut().expect("regions exist");
            let (pa, pb) = shrink_clone_once(arr, ri, &members, &comp)?;
            edges.push((pa, pb, ri));
        }
    }

    let graph = SupportGraph {
        points: points.iter().map(|(n, _)| n.clone()).collect(),
        edges: edges
            .iter()
            .map(|&(a, b, r)| SupportEdge {
                a: points[a].0.clone(),
                b: points[b].0.clone(),
                witness: regions[r].name.clone(),
            })
            .collect(),
    };
    certify(&graph, points, regions, &membership)?;
    Ok(graph)
}

/// Connectivity bookkeeping over the accumulated edges.
struct Components {
    parent: Vec<usize>,
}

impl Components {
    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let r = self.find(self.parent[i]);
            self.parent[i] = r;
        }
        self.parent[i]
    }

    fn distinct(&mut self, among: &[usize]) -> usize {
        let mut roots = BTreeSet::new();
        for &i in among {
            let r = self.find(i);
            roots.insert(r);
        }
        roots.len()
    }

    fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

fn components(n: usize, edges: &[(usize, usize, usize)], _members: &[usize]) -> Components {
    let mut c = Components { parent: (0..n).collect() };
    for &(a, b, _) in edges {
        let (ra, rb) = (c.find(a), c.find(b));
        if ra != rb {
            c.parent[ra.max(rb)] = ra.min(rb);
        }
    }
    c
}

/// Insert a clone of region `ri`, shrink it under the one-point-at-a-time
/// eviction discipline, and return the edge it certifies.
fn shrink_clone_once<S: Scalar>(
    arr: &mut Arrangement<S>,
    ri: usize,
    members: &[usize],
    comp: &Components,
) -> Result<(usize, usize), SupportError> {
    let region_curve = CurveId(ri as u32);
    let clone = insert_clone(arr, region_curve)?;
    arr.set_sweep_curve(clone);

    // Everything the region holds starts inside the clone.
    let mut in_clone: BTreeSet<usize> = members.iter().copied().collect();
    for &pi in members {
        let cell = arr.tracked_cell(PointId(pi as u32));
        if !arr.cell_inside(cell, clone) {
            return Err(SupportError::Certification(format!(
                "point {pi} fell outside the fresh clone"
            )));
        }
    }
    let mut comp = Components { parent: comp.parent.clone() };
    let mut pinned: Option<usize> = None;

    // Stop rules, checked between single evictions.
    enum Outcome {
        Continue,
        Done(usize, usize),
    }
    let check = |in_clone: &BTreeSet<usize>, pinned: Option<usize>, comp: &mut Components| -> Outcome {
        match pinned {
            None => {
                let list: Vec<usize> = in_clone.iter().copied().collect();
                let mut roots: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for &p in &list {
                    roots.entry(comp.find(p)).or_default().push(p);
                }
                if roots.len() == 2 && list.len() == 2 {
                    return Outcome::Done(list[0], list[1]);
                }
                Outcome::Continue
            }
            Some(p) => {
                let others: Vec<usize> = in_clone.iter().copied().filter(|&q| q != p).collect();
                if others.len() == 1 {
                    return Outcome::Done(p, others[0]);
                }
                Outcome::Continue
            }
        }
    };
    // Would removing q leave points of at most one component?
    let pin_trigger = |in_clone: &BTreeSet<usize>, q: usize, comp: &mut Components| -> bool {
        let mut roots = BTreeSet::new();
        for &p in in_clone {
            if p != q {
                roots.insert(comp.find(p));
            }
        }
        roots.len() <= 1
    };

    loop {
        match check(&in_clone, pinned, &mut comp) {
            Outcome::Done(a, b) => return Ok((a, b)),
            Outcome::Continue => {}
        }
        let point_arg = pinned.map(|p| PointId(p as u32));
        let cands = sweep::find_candidates(arr, SweepMode::NonPiercing, point_arg);
        let Some(op) = cands.into_iter().next() else {
            // Nothing left to do combinatorially: the clone interior is clear
            // and the remaining shrink happens inside one cell.
            let m = sweep::progress_measure(arr);
            if m.fully_inside != 0 || m.interior_vertices != 0 || m.gamma_crossings != 0 {
                return Err(SupportError::Sweep("no candidates before the clone was clear".into()));
            }
            let remaining: Vec<usize> = in_clone.iter().copied().collect();
            for q in remaining {
                if Some(q) == pinned {
                    continue;
                }
                if pinned.is_none() && pin_trigger(&in_clone, q, &mut comp) {
                    pinned = Some(q);
                    continue;
                }
                in_clone.remove(&q);
                if let Outcome::Done(a, b) = check(&in_clone, pinned, &mut comp) {
                    return Ok((a, b));
                }
            }
            return Err(SupportError::Sweep("clone emptied without finding an edge".into()));
        };

        // Which still-inside points would this operation evict?
        let evicted_cell = match &op {
            SweepOp::BypassDigon { cell, .. } => Some(*cell),
            SweepOp::BypassTriangle { cell, .. } => Some(*cell),
            _ => None,
        };
        let mut evictees: Vec<usize> = match evicted_cell {
            None => Vec::new(),
            Some(cell) => in_clone
                .iter()
                .copied()
                .filter(|&pi| arr.tracked_cell(PointId(pi as u32)) == cell)
                .collect(),
        };
        evictees.sort_unstable();
        let mut aborted = false;
        for &q in evictees.iter() {
            if pinned.is_none() && pin_trigger(&in_clone, q, &mut comp) {
                // Stop mid-cell: the already processed prefix is out, the
                // rest of the cell (a chord-free refinement) stays inside.
                pinned = Some(q);
                aborted = true;
                break;
            }
            in_clone.remove(&q);
            if let Outcome::Done(a, b) = check(&in_clone, pinned, &mut comp) {
                return Ok((a, b));
            }
        }
        if aborted {
            // The operation is not applied; the pin makes its cell invalid,
            // so the next iteration picks a different one.
            continue;
        }
        sweep::apply_op(arr, &op, SweepMode::NonPiercing, point_arg)
            .map_err(|e| SupportError::Sweep(e.to_string()))?;
        // Keep the flag set consistent with the map for unpinned points.
        let inside_now: BTreeSet<usize> = in_clone
            .iter()
            .copied()
            .filter(|&pi| arr.cell_inside(arr.tracked_cell(PointId(pi as u32)), clone))
            .collect();
        in_clone = inside_now;
    }
}

/// Insert a combinatorial duplicate of `of` immediately inside it.
pub fn insert_clone<S: Scalar>(arr: &mut Arrangement<S>, of: CurveId) -> Result<CurveId, MapError> {
    let name = format!("{}__clone{}", arr.curve_name(of), arr.curve_count());
    let clone = arr.push_curve(name);

    let old_walk = arr.walk(of).to_vec();
    let mut plan = RehomePlan::default();
    if old_walk.is_empty() {
        // Isolated region: the clone is an isolated loop just inside it.
        plan.loop_interior.push((of, Homed::Ref(CycleRef::LoopInterior(clone))));
        let moves = arr.plan_rehoming(&plan, &BTreeSet::new(), &BTreeSet::new(), &BTreeSet::new())?;
        // The clone's component nests in the cell just inside the region.
        let inner_ref = {
            let cy = arr
                .derived()
                .cycles
                .iter()
                .position(|k| k.kind == CycleKind::LoopInterior(of))
                .expect("isolated loop cycle");
            arr.cell_ref(arr.derived().cycles[cy].cell)
        };
        arr.parents.insert(clone, inner_ref);
        arr.outers.insert(clone, crate::arrangement::OuterRef::Loop(clone));
        let new_keys = arr.curve_component_keys();
        arr.apply_moves(moves, &BTreeMap::new(), &new_keys);
        arr.note_mutation();
        arr.commit()?;
        return Ok(clone);
    }

    // Each crossing of the region gets a parallel clone crossing on the
    // inside of the region along the other curve.
    let mut clone_of: BTreeMap<CrossingId, CrossingId> = BTreeMap::new();
    let mut inserts: Vec<(CurveId, CrossingId, bool, CrossingId)> = Vec::new(); // (other, anchor, after, new)
    for &x in &old_walk {
        let cr = arr.crossing(x).clone();
        let other = cr.other(of);
        let pair = if cr.pair.0 == of { (clone, other) } else { (other, clone) };
        let x2 = arr.alloc_crossing(pair, cr.sign);
        clone_of.insert(x, x2);
        // The other curve meets the clone just inside the region: after x if
        // it enters there, before x otherwise.
        let enters = arr.cell_inside(arr.cell_of_dart(DartName::new(other, x, Dir::Forward)), of);
        inserts.push((other, x, enters, x2));
    }
    // Cells on the inside of the region keep their occupants on the shrunken
    // side, anchored by the matching clone dart.
    for &x in &old_walk {
        let d = DartName::new(of, x, Dir::Forward);
        let cell = arr.cell_of_dart(d);
        if plan.by_cell.iter().any(|(c, _)| *c == cell) {
            continue;
        }
        plan.by_cell.push((
            cell,
            Homed::Ref(CycleRef::Dart(DartName::new(clone, clone_of[&x], Dir::Forward))),
        ));
    }
    let moves = arr.plan_rehoming(&plan, &BTreeSet::new(), &BTreeSet::new(), &BTreeSet::new())?;

    for (other, x, enters, x2) in inserts {
        if enters {
            arr.walk_insert_after(other, Some(x), &[x2]);
        } else {
            let prev = arr.walk_prev(other, x);
            arr.walk_insert_after(other, Some(prev), &[x2]);
        }
    }
    let clone_walk: Vec<CrossingId> = old_walk.iter().map(|x| clone_of[x]).collect();
    arr.set_walk(clone, clone_walk);

    let new_keys = arr.curve_component_keys();
    arr.apply_moves(moves, &BTreeMap::new(), &new_keys);
    arr.note_mutation();
    arr.commit()?;
    Ok(clone)
}

fn certify<S: Scalar>(
    graph: &SupportGraph,
    points: &[(String, ExactPoint<S>)],
    regions: &[ClosedPolyline<S>],
    membership: &[Vec<bool>],
) -> Result<(), SupportError> {
    let n = graph.points.len();
    let edges = graph.edge_indices();
    // Simple graph.
    let mut seen = BTreeSet::new();
    for &(a, b) in &edges {
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            return Err(SupportError::Certification("support graph is not simple".into()));
        }
    }
    // Edge endpoints inside the witness region.
    for e in &graph.edges {
        let r = regions.iter().position(|r| r.name == e.witness).unwrap();
        for p in [&e.a, &e.b] {
            let pi = graph.points.iter().position(|q| q == p).unwrap();
            let _ = points;
            if !membership[r][pi] {
                return Err(SupportError::Certification(format!(
                    "edge {}-{} endpoint outside witness {}",
                    e.a, e.b, e.witness
                )));
            }
        }
    }
    // Planarity and the edge bound.
    if n >= 3 && edges.len() > 3 * n - 6 {
        return Err(SupportError::Certification("edge bound exceeded".into()));
    }
    if !is_planar(n, &edges) {
        return Err(SupportError::Certification("support graph is not planar".into()));
    }
    // Per-region induced connectivity.
    for (ri, r) in regions.iter().enumerate() {
        let members: Vec<usize> = (0..n).filter(|&pi| membership[ri][pi]).collect();
        if members.len() <= 1 {
            continue;
        }
        let edges3: Vec<(usize, usize, usize)> = edges
            .iter()
            .filter(|&&(a, b)| membership[ri][a] && membership[ri][b])
            .map(|&(a, b)| (a, b, ri))
            .collect();
        let mut comp = components(n, &edges3, &members);
        if comp.distinct(&members) != 1 {
            return Err(SupportError::Certification(format!(
                "points inside region {} are not connected",
                r.name
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    type C = ClosedPolyline<Rat>;
    type P = ExactPoint<Rat>;

    fn sq(name: &str, x0: i64, y0: i64, x1: i64, y1: i64) -> C {
        C::from_ints(name, &[(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
    }

    fn pt(name: &str, x: i64, y: i64) -> (String, P) {
        (name.to_string(), P::from_ints(x, y))
    }

    #[test]
    fn two_points_one_region() {
        let g = build_support(&[pt("p", 2, 2), pt("q", 7, 7)], &[sq("H", 0, 0, 10, 10)]).unwrap();
        assert_eq!(g.edges.len(), 1);
    }

    #[test]
    fn two_disjoint_regions() {
        let g = build_support(
            &[pt("p", 2, 2), pt("q", 7, 7), pt("r", 22, 2), pt("s", 27, 7)],
            &[sq("H1", 0, 0, 10, 10), sq("H2", 20, 0, 30, 10)],
        )
        .unwrap();
        assert_eq!(g.edges.len(), 2);
    }

    #[test]
    fn chain_of_overlapping_regions() {
        let g = build_support(
            &[pt("a", 2, 4), pt("b", 12, 4), pt("c", 22, 4), pt("d", 7, 5), pt("e", 17, 5)],
            &[
                sq("H1", 0, 0, 10, 9),
                sq("H2", 5, 1, 15, 10),
                sq("H3", 10, 2, 20, 11),
                sq("H4", 15, 3, 25, 12),
            ],
        )
        .unwrap();
        // Every region's point set must induce a connected subgraph; the
        // builder certifies it, so reaching here is the test.
        assert!(!g.edges.is_empty());
    }

    #[test]
    fn nested_regions() {
        let g = build_support(
            &[pt("a", 2, 2), pt("b", 15, 15), pt("c", 17, 17), pt("d", 28, 28)],
            &[sq("outer", 0, 0, 30, 30), sq("inner", 13, 13, 20, 20)],
        )
        .unwrap();
        assert!(g.edges.len() >= 3);
    }

    #[test]
    fn piercing_regions_are_rejected() {
        let r = build_support(
            &[pt("a", 2, 2), pt("b", 7, 7)],
            &[sq("H1", 0, 0, 10, 10), sq("H2", 2, -5, 4, 15)],
        );
        assert!(matches!(r, Err(SupportError::Piercing(_, _))));
    }
}
