//! Combinatorial map of a curve arrangement.
//!
//! Primary state is one cyclic *walk* of crossing ids per curve plus a sign per
//! crossing (orientation of the two tangent directions). Darts, rotation,
//! faces, cells, the nesting forest of disconnected components and tracked
//! point locations are all derived from that state; every mutation edits the
//! walks and then rebuilds the derived structures from scratch.
//!
//! Exact vertex coordinates are carried along as advisory data; they are
//! authoritative only until the first mutation marks the arrangement stale.

mod build;
mod integrity;
pub(crate) mod rewrite;
#[cfg(test)]
mod tests;

pub use build::{build_arrangement, locate_point, BuildError};
pub use integrity::{check_dart_table, IntegrityProblem, IntegrityReport};

use crate::geom::{ClosedPolyline, ExactPoint};
use crate::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub struct $name(pub u32);

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(CurveId, "c");
id_type!(CrossingId, "x");
id_type!(PointId, "p");
id_type!(CellId, "F");
id_type!(CycleId, "cy");
id_type!(CompId, "K");

/// Direction of a dart along its curve's orientation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dir {
    Forward,
    Backward,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::Forward => Dir::Backward,
            Dir::Backward => Dir::Forward,
        }
    }
}

/// A dart: the half-arc of `curve` leaving crossing `at` in direction `dir`.
///
/// Names are stable across mutations as long as the crossing survives, which
/// is what lets nesting anchors and tracked points ride through surgery.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DartName {
    pub curve: CurveId,
    pub at: CrossingId,
    pub dir: Dir,
}

impl fmt::Debug for DartName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match self.dir {
            Dir::Forward => "+",
            Dir::Backward => "-",
        };
        write!(f, "{}@{}{}", self.curve, self.at, d)
    }
}

impl DartName {
    pub fn new(curve: CurveId, at: CrossingId, dir: Dir) -> Self {
        Self { curve, at, dir }
    }
}

/// A crossing of two distinct curves.
///
/// `sign` is the orientation of the ordered frame (tangent of `pair.0`,
/// tangent of `pair.1`): `+1` iff the second curve crosses from the right of
/// the first to its left.
#[derive(Clone, Debug)]
pub struct Crossing<S> {
    pub pair: (CurveId, CurveId),
    pub sign: i8,
    pub location: Option<ExactPoint<S>>,
    /// Positions along `pair.0` and `pair.1`; advisory like `location`.
    pub pos: Option<(crate::geom::ArcPosition<S>, crate::geom::ArcPosition<S>)>,
}

impl<S> Crossing<S> {
    pub fn involves(&self, c: CurveId) -> bool {
        self.pair.0 == c || self.pair.1 == c
    }

    pub fn other(&self, c: CurveId) -> CurveId {
        if self.pair.0 == c {
            self.pair.1
        } else {
            debug_assert_eq!(self.pair.1, c);
            self.pair.0
        }
    }

    /// Sign with `c` taken as the frame's first curve.
    pub fn sign_from(&self, c: CurveId) -> i8 {
        if self.pair.0 == c {
            self.sign
        } else {
            -self.sign
        }
    }
}

#[derive(Clone, Debug)]
pub struct CurveState {
    pub name: String,
    /// Cyclic crossing sequence along the curve's orientation; empty for an
    /// isolated loop.
    pub walk: Vec<CrossingId>,
}

/// Reference to a cell, phrased as the cell's defining boundary cycle.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum CycleRef {
    /// The cell bounded (from inside) by the cycle through this dart. If the
    /// dart's cycle turns out to be its component's outer cycle, the reference
    /// resolves to the cell *containing* that component.
    Dart(DartName),
    /// The cell just inside an isolated loop.
    LoopInterior(CurveId),
    /// The unbounded cell.
    Unbounded,
}

/// Reference to a component's outer boundary cycle.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum OuterRef {
    Dart(DartName),
    /// Exterior side of an isolated loop.
    Loop(CurveId),
}

#[derive(Clone, Debug)]
pub struct TrackedPoint<S> {
    pub name: String,
    pub location: Option<ExactPoint<S>>,
    pub home: CycleRef,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct MutationStats {
    pub mutations: u64,
    pub integrity_passes: u64,
}

// ---------------------------------------------------------------------------
// Derived structures
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct DartData {
    pub twin: DartName,
    /// Clockwise-next outgoing dart at the same crossing.
    pub sigma: DartName,
    pub cycle: CycleId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CycleKind {
    Traced,
    LoopInterior(CurveId),
    LoopExterior(CurveId),
}

#[derive(Clone, Debug)]
pub struct CycleData {
    pub kind: CycleKind,
    /// Face-trace order; the cell lies on the left of each dart. Empty for
    /// isolated-loop sides.
    pub darts: Vec<DartName>,
    pub component: CompId,
    pub cell: CellId,
}

#[derive(Clone, Debug)]
pub struct ComponentData {
    /// Smallest member curve id; used as the key in the nesting maps.
    pub key: CurveId,
    pub curves: Vec<CurveId>,
    pub outer: CycleId,
    pub parent_cell: CellId,
}

#[derive(Clone, Debug)]
pub struct CellData {
    /// `None` for the unbounded cell.
    pub defining: Option<CycleId>,
    pub cycles: Vec<CycleId>,
    pub inside_of: BTreeSet<CurveId>,
    pub child_components: Vec<CompId>,
}

impl CellData {
    pub fn has_children(&self) -> bool {
        !self.child_components.is_empty()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Derived {
    pub darts: BTreeMap<DartName, DartData>,
    pub cycles: Vec<CycleData>,
    pub components: Vec<ComponentData>,
    pub comp_of_curve: Vec<CompId>,
    pub cells: Vec<CellData>,
    pub unbounded: CellId,
    pub tracked_cell: BTreeMap<PointId, CellId>,
}

/// Classification of a cell lying on the sweep curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CellClass {
    Digon { other: CurveId },
    Triangle { curves: (CurveId, CurveId), interior_vertex: CrossingId },
    Other,
}

#[derive(Debug, thiserror::Error)]
pub enum MapError {
    #[error("arrangement state is inconsistent: {0}")]
    Corrupt(String),
    #[error("operation precondition failed: {0}")]
    Precondition(String),
}

// ---------------------------------------------------------------------------
// Arrangement
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Arrangement<S> {
    pub(crate) curves: Vec<CurveState>,
    pub(crate) crossings: Vec<Option<Crossing<S>>>,
    pub(crate) sweep: CurveId,
    /// Component key (min curve id) -> defining cycle of the containing cell.
    pub(crate) parents: BTreeMap<CurveId, CycleRef>,
    /// Component key -> outer boundary cycle of the component.
    pub(crate) outers: BTreeMap<CurveId, OuterRef>,
    pub(crate) tracked: BTreeMap<PointId, TrackedPoint<S>>,
    /// Advisory input geometry, one entry per curve; `stale` after mutations.
    pub(crate) geometry: Vec<Option<ClosedPolyline<S>>>,
    pub(crate) stale: bool,
    pub(crate) stats: MutationStats,
    pub(crate) derived: Derived,
}

impl<S: Scalar> Arrangement<S> {
    // -- accessors ----------------------------------------------------------

    pub fn sweep_curve(&self) -> CurveId {
        self.sweep
    }

    pub fn set_sweep_curve(&mut self, c: CurveId) {
        assert!(c.index() < self.curves.len());
        self.sweep = c;
    }

    pub fn curve_count(&self) -> usize {
        self.curves.len()
    }

    pub fn curve_ids(&self) -> impl Iterator<Item = CurveId> {
        (0..self.curves.len() as u32).map(CurveId)
    }

    pub fn curve_name(&self, c: CurveId) -> &str {
        &self.curves[c.index()].name
    }

    pub fn curve_by_name(&self, name: &str) -> Option<CurveId> {
        self.curves.iter().position(|c| c.name == name).map(|i| CurveId(i as u32))
    }

    pub fn walk(&self, c: CurveId) -> &[CrossingId] {
        &self.curves[c.index()].walk
    }

    pub fn is_isolated(&self, c: CurveId) -> bool {
        self.curves[c.index()].walk.is_empty()
    }

    pub fn crossing(&self, x: CrossingId) -> &Crossing<S> {
        self.crossings[x.index()].as_ref().expect("live crossing")
    }

    pub fn crossing_ids(&self) -> impl Iterator<Item = CrossingId> + '_ {
        self.crossings
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_some())
            .map(|(i, _)| CrossingId(i as u32))
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.iter().filter(|c| c.is_some()).count()
    }

    pub fn is_stale(&self) -> bool {
        self.stale
    }

    pub fn stats(&self) -> MutationStats {
        self.stats
    }

    pub fn derived(&self) -> &Derived {
        &self.derived
    }

    pub fn tracked_ids(&self) -> impl Iterator<Item = PointId> + '_ {
        self.tracked.keys().copied()
    }

    pub fn tracked_name(&self, p: PointId) -> &str {
        &self.tracked[&p].name
    }

    pub fn tracked_by_name(&self, name: &str) -> Option<PointId> {
        self.tracked.iter().find(|(_, t)| t.name == name).map(|(k, _)| *k)
    }

    pub fn tracked_cell(&self, p: PointId) -> CellId {
        self.derived.tracked_cell[&p]
    }

    pub fn outer_cell(&self) -> CellId {
        self.derived.unbounded
    }

    pub fn cell(&self, id: CellId) -> &CellData {
        &self.derived.cells[id.index()]
    }

    pub fn cell_ids(&self) -> impl Iterator<Item = CellId> {
        (0..self.derived.cells.len() as u32).map(CellId)
    }

    pub fn cycle(&self, id: CycleId) -> &CycleData {
        &self.derived.cycles[id.index()]
    }

    pub fn dart(&self, d: DartName) -> &DartData {
        &self.derived.darts[&d]
    }

    pub fn cell_of_dart(&self, d: DartName) -> CellId {
        self.derived.cycles[self.derived.darts[&d].cycle.index()].cell
    }

    pub fn component_of(&self, c: CurveId) -> CompId {
        self.derived.comp_of_curve[c.index()]
    }

    pub fn component(&self, k: CompId) -> &ComponentData {
        &self.derived.components[k.index()]
    }

    // -- walk helpers -------------------------------------------------------

    pub fn walk_index(&self, c: CurveId, x: CrossingId) -> usize {
        self.curves[c.index()]
            .walk
            .iter()
            .position(|&y| y == x)
            .unwrap_or_else(|| panic!("{x} not on walk of {c}"))
    }

    pub fn walk_next(&self, c: CurveId, x: CrossingId) -> CrossingId {
        let w = &self.curves[c.index()].walk;
        w[(self.walk_index(c, x) + 1) % w.len()]
    }

    pub fn walk_prev(&self, c: CurveId, x: CrossingId) -> CrossingId {
        let w = &self.curves[c.index()].walk;
        w[(self.walk_index(c, x) + w.len() - 1) % w.len()]
    }

    /// Crossings of the pair `(c, other)` in traversal order along `c`.
    pub fn pair_sequence(&self, c: CurveId, other: CurveId) -> Vec<CrossingId> {
        self.curves[c.index()]
            .walk
            .iter()
            .copied()
            .filter(|&x| self.crossing(x).involves(other))
            .collect()
    }

    /// Crossing counts for every unordered pair that crosses at all.
    pub fn crossing_matrix(&self) -> BTreeMap<(CurveId, CurveId), usize> {
        let mut m = BTreeMap::new();
        for x in self.crossing_ids() {
            let (a, b) = self.crossing(x).pair;
            let key = if a <= b { (a, b) } else { (b, a) };
            *m.entry(key).or_insert(0) += 1;
        }
        m
    }

    // -- dart helpers -------------------------------------------------------

    pub fn twin(&self, d: DartName) -> DartName {
        match d.dir {
            Dir::Forward => DartName::new(d.curve, self.walk_next(d.curve, d.at), Dir::Backward),
            Dir::Backward => DartName::new(d.curve, self.walk_prev(d.curve, d.at), Dir::Forward),
        }
    }

    /// Clockwise-next outgoing dart at `d`'s crossing.
    pub fn sigma(&self, d: DartName) -> DartName {
        let x = self.crossing(d.at);
        let (a, b) = x.pair;
        let order: [DartName; 4] = if x.sign > 0 {
            [
                DartName::new(a, d.at, Dir::Forward),
                DartName::new(b, d.at, Dir::Backward),
                DartName::new(a, d.at, Dir::Backward),
                DartName::new(b, d.at, Dir::Forward),
            ]
        } else {
            [
                DartName::new(a, d.at, Dir::Forward),
                DartName::new(b, d.at, Dir::Forward),
                DartName::new(a, d.at, Dir::Backward),
                DartName::new(b, d.at, Dir::Backward),
            ]
        };
        let i = order.iter().position(|&o| o == d).expect("dart at its crossing");
        order[(i + 1) % 4]
    }

    /// Next dart when walking the face that lies on the left of `d`.
    pub fn face_next(&self, d: DartName) -> DartName {
        self.sigma(self.twin(d))
    }

    pub fn all_dart_names(&self) -> Vec<DartName> {
        let mut v = Vec::new();
        for c in self.curve_ids() {
            for &x in &self.curves[c.index()].walk {
                v.push(DartName::new(c, x, Dir::Forward));
                v.push(DartName::new(c, x, Dir::Backward));
            }
        }
        v.sort();
        v
    }

    // -- rebuild ------------------------------------------------------------

    /// Recompute every derived structure from the primary state.
    pub(crate) fn rebuild(&mut self) -> Result<(), MapError> {
        let mut derived = Derived::default();

        // Dart table with twin and rotation.
        let names = self.all_dart_names();
        for &d in &names {
            derived.darts.insert(
                d,
                DartData { twin: self.twin(d), sigma: self.sigma(d), cycle: CycleId(u32::MAX) },
            );
        }

        // Components: union-find over curves.
        let n = self.curves.len();
        let comp_key_of_curve = self.curve_component_keys();
        let mut keys: Vec<u32> = comp_key_of_curve.clone();
        keys.sort_unstable();
        keys.dedup();
        derived.comp_of_curve = (0..n)
            .map(|i| CompId(keys.iter().position(|&k| k == comp_key_of_curve[i]).unwrap() as u32))
            .collect();
        for &k in &keys {
            let curves: Vec<CurveId> = (0..n)
                .filter(|&i| comp_key_of_curve[i] == k)
                .map(|i| CurveId(i as u32))
                .collect();
            derived.components.push(ComponentData {
                key: CurveId(k),
                curves,
                outer: CycleId(u32::MAX),
                parent_cell: CellId(u32::MAX),
            });
        }

        // Trace face cycles (orbits of face_next), in deterministic order.
        let mut seen: BTreeSet<DartName> = BTreeSet::new();
        for &start in &names {
            if seen.contains(&start) {
                continue;
            }
            let id = CycleId(derived.cycles.len() as u32);
            let mut cyc = Vec::new();
            let mut d = start;
            loop {
                if !seen.insert(d) {
                    return Err(MapError::Corrupt(format!("face trace re-entered {d:?}")));
                }
                derived.darts.get_mut(&d).unwrap().cycle = id;
                cyc.push(d);
                d = self.face_next(d);
                if d == start {
                    break;
                }
                if cyc.len() > names.len() {
                    return Err(MapError::Corrupt("face trace does not close".into()));
                }
            }
            let component = derived.comp_of_curve[cyc[0].curve.index()];
            derived.cycles.push(CycleData { kind: CycleKind::Traced, darts: cyc, component, cell: CellId(u32::MAX) });
        }
        // Pseudo-cycles for isolated loops.
        for c in self.curve_ids() {
            if self.is_isolated(c) {
                let comp = derived.comp_of_curve[c.index()];
                derived.cycles.push(CycleData {
                    kind: CycleKind::LoopInterior(c),
                    darts: Vec::new(),
                    component: comp,
                    cell: CellId(u32::MAX),
                });
                derived.cycles.push(CycleData {
                    kind: CycleKind::LoopExterior(c),
                    darts: Vec::new(),
                    component: comp,
                    cell: CellId(u32::MAX),
                });
            }
        }

        // Resolve outer cycles.
        let cycle_of_dart = |derived: &Derived, d: DartName| -> Result<CycleId, MapError> {
            derived
                .darts
                .get(&d)
                .map(|dd| dd.cycle)
                .ok_or_else(|| MapError::Corrupt(format!("dangling dart reference {d:?}")))
        };
        let find_loop_cycle = |derived: &Derived, c: CurveId, ext: bool| -> Result<CycleId, MapError> {
            let want = if ext { CycleKind::LoopExterior(c) } else { CycleKind::LoopInterior(c) };
            derived
                .cycles
                .iter()
                .position(|cy| cy.kind == want)
                .map(|i| CycleId(i as u32))
                .ok_or_else(|| MapError::Corrupt(format!("curve {c} is not an isolated loop")))
        };
        for k in 0..derived.components.len() {
            let key = derived.components[k].key;
            let outer = self
                .outers
                .get(&key)
                .ok_or_else(|| MapError::Corrupt(format!("component {key} has no outer cycle record")))?;
            let cy = match *outer {
                OuterRef::Dart(d) => cycle_of_dart(&derived, d)?,
                OuterRef::Loop(c) => find_loop_cycle(&derived, c, true)?,
            };
            if derived.cycles[cy.index()].component.index() != k {
                return Err(MapError::Corrupt(format!(
                    "outer cycle record of component {key} points into another component"
                )));
            }
            derived.components[k].outer = cy;
        }

        // Cells: one per non-outer cycle, plus the unbounded cell first.
        derived.unbounded = CellId(0);
        derived.cells.push(CellData {
            defining: None,
            cycles: Vec::new(),
            inside_of: BTreeSet::new(),
            child_components: Vec::new(),
        });
        let outer_set: BTreeSet<CycleId> = derived.components.iter().map(|k| k.outer).collect();
        for i in 0..derived.cycles.len() {
            let id = CycleId(i as u32);
            if matches!(derived.cycles[i].kind, CycleKind::LoopExterior(_)) {
                continue;
            }
            if outer_set.contains(&id) {
                continue;
            }
            let cell = CellId(derived.cells.len() as u32);
            derived.cycles[i].cell = cell;
            derived.cells.push(CellData {
                defining: Some(id),
                cycles: vec![id],
                inside_of: BTreeSet::new(),
                child_components: Vec::new(),
            });
        }

        // Resolve component parents (an outer cycle resolves upward).
        fn resolve_parent<S: Scalar>(
            arr: &Arrangement<S>,
            derived: &mut Derived,
            comp: usize,
            visiting: &mut Vec<bool>,
        ) -> Result<CellId, MapError> {
            if derived.components[comp].parent_cell != CellId(u32::MAX) {
                return Ok(derived.components[comp].parent_cell);
            }
            if visiting[comp] {
                return Err(MapError::Corrupt("nesting forest has a cycle".into()));
            }
            visiting[comp] = true;
            let key = derived.components[comp].key;
            let r = *arr
                .parents
                .get(&key)
                .ok_or_else(|| MapError::Corrupt(format!("component {key} has no parent record")))?;
            let cell = match r {
                CycleRef::Unbounded => derived.unbounded,
                CycleRef::LoopInterior(c) => {
                    let cy = derived
                        .cycles
                        .iter()
                        .position(|k| k.kind == CycleKind::LoopInterior(c))
                        .ok_or_else(|| MapError::Corrupt(format!("parent loop {c} is not isolated")))?;
                    cell_of_cycle(arr, derived, CycleId(cy as u32), visiting)?
                }
                CycleRef::Dart(d) => {
                    let cy = derived
                        .darts
                        .get(&d)
                        .map(|dd| dd.cycle)
                        .ok_or_else(|| MapError::Corrupt(format!("parent dart {d:?} is gone")))?;
                    cell_of_cycle(arr, derived, cy, visiting)?
                }
            };
            visiting[comp] = false;
            derived.components[comp].parent_cell = cell;
            Ok(cell)
        }

        // Cell a cycle bounds from inside; outer cycles resolve to the cell
        // containing their component.
        fn cell_of_cycle<S: Scalar>(
            arr: &Arrangement<S>,
            derived: &mut Derived,
            cy: CycleId,
            visiting: &mut Vec<bool>,
        ) -> Result<CellId, MapError> {
            let comp = derived.cycles[cy.index()].component.index();
            let is_outer = derived.components[comp].outer == cy
                || matches!(derived.cycles[cy.index()].kind, CycleKind::LoopExterior(_));
            if is_outer {
                resolve_parent(arr, derived, comp, visiting)
            } else {
                Ok(derived.cycles[cy.index()].cell)
            }
        }

        let mut visiting = vec![false; derived.components.len()];
        for comp in 0..derived.components.len() {
            let cell = resolve_parent(self, &mut derived, comp, &mut visiting)?;
            let outer = derived.components[comp].outer;
            derived.cycles[outer.index()].cell = cell;
            derived.cells[cell.index()].cycles.push(outer);
            derived.cells[cell.index()].child_components.push(CompId(comp as u32));
        }

        // Membership sets by breadth-first toggling from the unbounded cell.
        self.propagate_membership(&mut derived)?;

        // Tracked points.
        for (&pid, tp) in &self.tracked {
            let cell = match tp.home {
                CycleRef::Unbounded => derived.unbounded,
                CycleRef::LoopInterior(c) => {
                    let cy = derived
                        .cycles
                        .iter()
                        .position(|k| k.kind == CycleKind::LoopInterior(c))
                        .ok_or_else(|| MapError::Corrupt(format!("tracked point home loop {c} not isolated")))?;
                    let mut visiting = vec![false; derived.components.len()];
                    cell_of_cycle(self, &mut derived, CycleId(cy as u32), &mut visiting)?
                }
                CycleRef::Dart(d) => {
                    let cy = derived
                        .darts
                        .get(&d)
                        .map(|dd| dd.cycle)
                        .ok_or_else(|| MapError::Corrupt(format!("tracked point home dart {d:?} is gone")))?;
                    let mut visiting = vec![false; derived.components.len()];
                    cell_of_cycle(self, &mut derived, cy, &mut visiting)?
                }
            };
            derived.tracked_cell.insert(pid, cell);
        }

        self.derived = derived;
        self.normalize_refs();
        Ok(())
    }

    fn propagate_membership(&self, derived: &mut Derived) -> Result<(), MapError> {
        // Adjacency: across every arc (dart/twin pair) toggling the arc's
        // curve, and across every isolated loop toggling that curve.
        let cell_count = derived.cells.len();
        let mut sets: Vec<Option<BTreeSet<CurveId>>> = vec![None; cell_count];
        sets[derived.unbounded.index()] = Some(BTreeSet::new());
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(derived.unbounded);
        let mut edges: Vec<Vec<(CellId, CurveId)>> = vec![Vec::new(); cell_count];
        for (d, data) in &derived.darts {
            let me = derived.cycles[data.cycle.index()].cell;
            let other = derived.cycles[derived.darts[&data.twin].cycle.index()].cell;
            edges[me.index()].push((other, d.curve));
        }
        for (i, cy) in derived.cycles.iter().enumerate() {
            if let CycleKind::LoopInterior(c) = cy.kind {
                let inner = derived.cycles[i].cell;
                let comp = cy.component.index();
                let outer_cell = derived.components[comp].parent_cell;
                edges[inner.index()].push((outer_cell, c));
                edges[outer_cell.index()].push((inner, c));
            }
        }
        while let Some(cell) = queue.pop_front() {
            let current = sets[cell.index()].clone().unwrap();
            for &(next, curve) in &edges[cell.index()] {
                let mut want = current.clone();
                if !want.remove(&curve) {
                    want.insert(curve);
                }
                match &sets[next.index()] {
                    None => {
                        sets[next.index()] = Some(want);
                        queue.push_back(next);
                    }
                    Some(have) => {
                        if *have != want {
                            return Err(MapError::Corrupt(format!(
                                "membership conflict between cells {cell} and {next}"
                            )));
                        }
                    }
                }
            }
        }
        for (i, s) in sets.into_iter().enumerate() {
            match s {
                Some(s) => derived.cells[i].inside_of = s,
                None => {
                    return Err(MapError::Corrupt(format!("cell F{i} unreachable from the outer face")))
                }
            }
        }
        Ok(())
    }

    /// Re-point all stored cycle references at canonical darts so later
    /// operations can reason about them uniformly.
    fn normalize_refs(&mut self) {
        let canon_cell_ref = |derived: &Derived, cell: CellId| -> CycleRef {
            match derived.cells[cell.index()].defining {
                None => CycleRef::Unbounded,
                Some(cy) => match &derived.cycles[cy.index()].kind {
                    CycleKind::LoopInterior(c) => CycleRef::LoopInterior(*c),
                    CycleKind::LoopExterior(_) => unreachable!("exterior cycle cannot define a cell"),
                    CycleKind::Traced => CycleRef::Dart(*derived.cycles[cy.index()].darts.iter().min().unwrap()),
                },
            }
        };
        let mut parents = BTreeMap::new();
        let mut outers = BTreeMap::new();
        let mut homes: Vec<(PointId, CycleRef)> = Vec::new();
        {
            let derived = &self.derived;
            for comp in &derived.components {
                parents.insert(comp.key, canon_cell_ref(derived, comp.parent_cell));
                let outer = &derived.cycles[comp.outer.index()];
                let r = match &outer.kind {
                    CycleKind::LoopExterior(c) => OuterRef::Loop(*c),
                    CycleKind::Traced => OuterRef::Dart(*outer.darts.iter().min().unwrap()),
                    CycleKind::LoopInterior(_) => unreachable!("interior cycle cannot be outer"),
                };
                outers.insert(comp.key, r);
            }
            for &p in self.tracked.keys() {
                homes.push((p, canon_cell_ref(derived, derived.tracked_cell[&p])));
            }
        }
        self.parents = parents;
        self.outers = outers;
        for (p, r) in homes {
            self.tracked.get_mut(&p).unwrap().home = r;
        }
    }

    /// Union-find over curves: the smallest curve index of each curve's
    /// component.
    pub(crate) fn curve_component_keys(&self) -> Vec<u32> {
        let n = self.curves.len();
        let mut uf: Vec<usize> = (0..n).collect();
        fn find(uf: &mut Vec<usize>, i: usize) -> usize {
            if uf[i] != i {
                let r = find(uf, uf[i]);
                uf[i] = r;
            }
            uf[i]
        }
        for x in self.crossing_ids() {
            let (a, b) = self.crossing(x).pair;
            let (ra, rb) = (find(&mut uf, a.index()), find(&mut uf, b.index()));
            if ra != rb {
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                uf[hi] = lo;
            }
        }
        (0..n).map(|i| find(&mut uf, i) as u32).collect()
    }

    /// Canonical cycle reference for a cell in the current derived state.
    pub fn cell_ref(&self, cell: CellId) -> CycleRef {
        match self.derived.cells[cell.index()].defining {
            None => CycleRef::Unbounded,
            Some(cy) => match &self.derived.cycles[cy.index()].kind {
                CycleKind::LoopInterior(c) => CycleRef::LoopInterior(*c),
                CycleKind::LoopExterior(_) => unreachable!(),
                CycleKind::Traced => CycleRef::Dart(*self.derived.cycles[cy.index()].darts.iter().min().unwrap()),
            },
        }
    }

    // -- classification -----------------------------------------------------

    /// Is the cell inside the bounded region of `c`?
    pub fn cell_inside(&self, cell: CellId, c: CurveId) -> bool {
        self.derived.cells[cell.index()].inside_of.contains(&c)
    }

    /// Cells inside the sweep region having at least one arc on the sweep
    /// curve, classified by their boundary structure.
    pub fn cells_on_sweep(&self) -> Vec<(CellId, CellClass)> {
        let g = self.sweep;
        let mut out = Vec::new();
        for (i, cell) in self.derived.cells.iter().enumerate() {
            let id = CellId(i as u32);
            if !cell.inside_of.contains(&g) {
                continue;
            }
            let Some(def) = cell.defining else { continue };
            let darts = &self.derived.cycles[def.index()].darts;
            if !darts.iter().any(|d| d.curve == g) {
                continue;
            }
            out.push((id, self.classify_cell(id)));
        }
        out
    }

    /// Boundary structure of one cell. A cell carrying extra boundary cycles
    /// or nested components is never a digon or triangle.
    pub fn classify_cell(&self, cell: CellId) -> CellClass {
        let data = &self.derived.cells[cell.index()];
        let Some(def) = data.defining else { return CellClass::Other };
        if data.cycles.len() != 1 || data.has_children() {
            return CellClass::Other;
        }
        let darts = &self.derived.cycles[def.index()].darts;
        match darts.len() {
            2 => {
                let g = self.sweep;
                let other = darts.iter().map(|d| d.curve).find(|&c| c != g);
                match other {
                    Some(o) if darts.iter().any(|d| d.curve == g) => CellClass::Digon { other: o },
                    _ => CellClass::Other,
                }
            }
            3 => {
                let g = self.sweep;
                if !darts.iter().any(|d| d.curve == g) {
                    return CellClass::Other;
                }
                let others: Vec<CurveId> = darts.iter().map(|d| d.curve).filter(|&c| c != g).collect();
                if others.len() != 2 || others[0] == others[1] {
                    return CellClass::Other;
                }
                // The vertex shared by the two non-sweep sides.
                let v = darts
                    .iter()
                    .flat_map(|&d| [d.at, self.twin(d).at])
                    .find(|&x| {
                        let p = self.crossing(x).pair;
                        p != (self.sweep, others[0])
                            && p != (others[0], self.sweep)
                            && p != (self.sweep, others[1])
                            && p != (others[1], self.sweep)
                    });
                match v {
                    Some(v) => CellClass::Triangle { curves: (others[0].min(others[1]), others[0].max(others[1])), interior_vertex: v },
                    None => CellClass::Other,
                }
            }
            _ => CellClass::Other,
        }
    }

    /// Is crossing `x` strictly inside the sweep region?
    pub fn crossing_inside_sweep(&self, x: CrossingId) -> bool {
        let cr = self.crossing(x);
        if cr.involves(self.sweep) {
            return false;
        }
        // All four quadrant cells agree on sweep membership; test one.
        let d = DartName::new(cr.pair.0, x, Dir::Forward);
        self.cell_inside(self.cell_of_dart(d), self.sweep)
    }

    /// Is curve `c` disjoint from the sweep curve and inside its region?
    pub fn curve_fully_inside_sweep(&self, c: CurveId) -> bool {
        if c == self.sweep {
            return false;
        }
        let g = self.sweep;
        if self.curves[c.index()].walk.iter().any(|&x| self.crossing(x).involves(g)) {
            return false;
        }
        if self.is_isolated(c) {
            let cy = self
                .derived
                .cycles
                .iter()
                .position(|k| k.kind == CycleKind::LoopInterior(c))
                .expect("loop cycle");
            let cell = self.derived.cycles[cy].cell;
            return self.cell_inside(cell, g);
        }
        let x = self.curves[c.index()].walk[0];
        let cell = self.cell_of_dart(DartName::new(c, x, Dir::Forward));
        // A cell adjacent to c counts c itself in its membership only if the
        // cell is inside c; either way sweep membership is what matters.
        self.cell_inside(cell, g)
    }

    // -- fresh ids ----------------------------------------------------------

    pub(crate) fn alloc_crossing(&mut self, pair: (CurveId, CurveId), sign: i8) -> CrossingId {
        let id = CrossingId(self.crossings.len() as u32);
        self.crossings.push(Some(Crossing { pair, sign, location: None, pos: None }));
        id
    }

    pub(crate) fn delete_crossing(&mut self, x: CrossingId) {
        self.crossings[x.index()] = None;
    }

    /// Walk edit helper: insert `items` directly after `after` (or make them
    /// the whole walk when the curve is isolated).
    pub(crate) fn walk_insert_after(&mut self, c: CurveId, after: Option<CrossingId>, items: &[CrossingId]) {
        let w = &mut self.curves[c.index()].walk;
        match after {
            None => {
                assert!(w.is_empty(), "anchorless insert on a crossed curve");
                w.extend_from_slice(items);
            }
            Some(a) => {
                let i = w.iter().position(|&y| y == a).expect("anchor on walk");
                let mut out = Vec::with_capacity(w.len() + items.len());
                out.extend_from_slice(&w[..=i]);
                out.extend_from_slice(items);
                out.extend_from_slice(&w[i + 1..]);
                *w = out;
            }
        }
    }

    pub(crate) fn walk_remove(&mut self, c: CurveId, x: CrossingId) {
        let w = &mut self.curves[c.index()].walk;
        let i = w.iter().position(|&y| y == x).expect("crossing on walk");
        w.remove(i);
    }

    /// Swap two crossings that are cyclically adjacent on the walk of `c`.
    pub(crate) fn walk_swap_adjacent(&mut self, c: CurveId, x: CrossingId, y: CrossingId) {
        let w = &mut self.curves[c.index()].walk;
        let i = w.iter().position(|&z| z == x).expect("x on walk");
        let j = w.iter().position(|&z| z == y).expect("y on walk");
        let n = w.len();
        assert!((i + 1) % n == j || (j + 1) % n == i, "{x} and {y} not adjacent on {c}");
        w.swap(i, j);
    }

    /// Replace the open run strictly between `from` and `to` (walking forward
    /// from `from`) together with both endpoints by `replacement`.
    pub(crate) fn walk_splice(&mut self, c: CurveId, from: CrossingId, to: CrossingId, replacement: &[CrossingId]) {
        let w = self.curves[c.index()].walk.clone();
        let n = w.len();
        let i = w.iter().position(|&z| z == from).expect("from on walk");
        let mut out = Vec::with_capacity(n);
        out.extend_from_slice(replacement);
        let mut k = (w.iter().position(|&z| z == to).expect("to on walk") + 1) % n;
        while k != i {
            out.push(w[k]);
            k = (k + 1) % n;
        }
        self.curves[c.index()].walk = out;
    }

    /// Append a new crossing-free curve (no geometry attached).
    pub(crate) fn push_curve(&mut self, name: String) -> CurveId {
        let id = CurveId(self.curves.len() as u32);
        self.curves.push(CurveState { name, walk: Vec::new() });
        self.geometry.push(None);
        id
    }

    pub(crate) fn set_walk(&mut self, c: CurveId, walk: Vec<CrossingId>) {
        self.curves[c.index()].walk = walk;
    }

    pub(crate) fn dart_cycle(&self, d: DartName) -> CycleId {
        self.derived.darts[&d].cycle
    }

    /// Cell on the far side of the arc covered by `d`.
    pub(crate) fn twin_side_cell(&self, d: DartName) -> DartName {
        self.twin(d)
    }

    /// Cell of the quadrant bounded by two rotation-adjacent outgoing darts.
    pub(crate) fn quadrant_between(&self, at: CrossingId, s1: DartName, s2: DartName) -> CellId {
        debug_assert_eq!(s1.at, at);
        debug_assert_eq!(s2.at, at);
        if self.sigma(s2) == s1 {
            self.cell_of_dart(s1)
        } else {
            debug_assert_eq!(self.sigma(s1), s2, "strands are not rotation-adjacent");
            self.cell_of_dart(s2)
        }
    }

    /// Move a crossing from one curve to another (surgery re-attribution).
    /// `keep_sign` is false when the new curve traverses the strand against
    /// the old curve's direction.
    pub(crate) fn reattribute(&mut self, x: CrossingId, from: CurveId, to: CurveId, keep_sign: bool) {
        let cr = self.crossings[x.index()].as_mut().expect("live crossing");
        if cr.pair.0 == from {
            cr.pair.0 = to;
        } else {
            assert_eq!(cr.pair.1, from, "crossing does not involve the old curve");
            cr.pair.1 = to;
        }
        if !keep_sign {
            cr.sign = -cr.sign;
        }
    }

    /// Dart names of `curve` whose covered arc changes between two walks:
    /// anchors that vanish plus anchors whose successor or predecessor moved.
    pub(crate) fn changed_dart_names(
        curve: CurveId,
        old_walk: &[CrossingId],
        new_walk: &[CrossingId],
    ) -> BTreeSet<DartName> {
        let mut out = BTreeSet::new();
        let n = old_walk.len();
        for (i, &x) in old_walk.iter().enumerate() {
            let old_next = old_walk[(i + 1) % n];
            let old_prev = old_walk[(i + n - 1) % n];
            match new_walk.iter().position(|&y| y == x) {
                None => {
                    out.insert(DartName::new(curve, x, Dir::Forward));
                    out.insert(DartName::new(curve, x, Dir::Backward));
                }
                Some(j) => {
                    let m = new_walk.len();
                    if new_walk[(j + 1) % m] != old_next {
                        out.insert(DartName::new(curve, x, Dir::Forward));
                    }
                    if new_walk[(j + m - 1) % m] != old_prev {
                        out.insert(DartName::new(curve, x, Dir::Backward));
                    }
                }
            }
        }
        out
    }

    pub(crate) fn note_mutation(&mut self) {
        self.stale = true;
        self.stats.mutations += 1;
        for cr in self.crossings.iter_mut().flatten() {
            cr.location = None;
            cr.pos = None;
        }
        for t in self.tracked.values_mut() {
            t.location = None;
        }
    }

    /// Rebuild plus a full integrity pass; every mutation funnels through
    /// here so the pass counter matches the mutation counter.
    pub(crate) fn commit(&mut self) -> Result<(), MapError> {
        self.rebuild()?;
        let report = self.check_integrity();
        if !report.ok() {
            return Err(MapError::Corrupt(format!("integrity failed: {report}")));
        }
        self.stats.integrity_passes += 1;
        Ok(())
    }
}
