//! Shared machinery for walk-editing operations.
//!
//! Every mutation follows the same shape: record where displaced references
//! (tracked points, component parents, outer cycles) must land, edit the
//! walks, then rebuild and re-point the references. Targets are expressed as
//! post-edit dart names so no geometry is needed.

use super::*;

/// Where a displaced reference lands after the edit.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Homed {
    Ref(CycleRef),
    /// Same cell as the (post-edit) parent of this curve's component.
    ParentOf(CurveId),
}

#[derive(Clone, Debug, Default)]
pub(crate) struct RehomePlan {
    /// Explicit assignment for every reference currently homed in these cells.
    pub by_cell: Vec<(CellId, Homed)>,
    /// Fallback per old cycle for references whose anchor dart dies and whose
    /// cycle keeps no surviving dart.
    pub dying_cycle_fallback: Vec<(CycleId, Homed)>,
    /// References homed at the interior of these formerly isolated loops.
    pub loop_interior: Vec<(CurveId, Homed)>,
    /// Fallback for an outer-cycle record whose cycle fully dies.
    pub outer_fallback: Vec<(CycleId, DartName)>,
}

pub(crate) enum RefKey {
    Parent(CurveId),
    Tracked(PointId),
}

/// Map old component keys to new ones after an edit.
pub(crate) fn component_key_map(old_keys: &[u32], new_keys: &[u32]) -> BTreeMap<CurveId, CurveId> {
    let mut m = BTreeMap::new();
    for i in 0..old_keys.len() {
        m.insert(CurveId(old_keys[i]), CurveId(new_keys[i]));
    }
    m
}

/// Dart covering the post-edit arc `prev -> next` of `curve` on the requested
/// side: `left` gives the face on the left of the forward traversal.
pub(crate) fn side_dart(curve: CurveId, prev: CrossingId, next: CrossingId, left: bool) -> DartName {
    if left {
        DartName::new(curve, prev, Dir::Forward)
    } else {
        DartName::new(curve, next, Dir::Backward)
    }
}

impl<S: Scalar> Arrangement<S> {
    /// Collect the new `CycleRef` for every parent/tracked reference according
    /// to `plan`, against the *pre-edit* derived state. Entries for component
    /// keys in `drop_parents` are skipped (they merge away or are re-placed by
    /// the caller).
    pub(crate) fn plan_rehoming(
        &self,
        plan: &RehomePlan,
        dying: &BTreeSet<CrossingId>,
        dying_names_extra: &BTreeSet<DartName>,
        drop_parents: &BTreeSet<CurveId>,
    ) -> Result<Vec<(RefKey, Homed)>, MapError> {
        let mut out = Vec::new();
        let is_dying = |d: &DartName| dying.contains(&d.at) || dying_names_extra.contains(d);
        let cell_assignment =
            |cell: CellId| plan.by_cell.iter().find(|(c, _)| *c == cell).map(|(_, h)| *h);

        let handle = |current: CycleRef, cell: CellId| -> Result<Option<Homed>, MapError> {
            if let Some(h) = cell_assignment(cell) {
                return Ok(Some(h));
            }
            match current {
                CycleRef::Unbounded => Ok(None),
                CycleRef::LoopInterior(c) => Ok(plan
                    .loop_interior
                    .iter()
                    .find(|(lc, _)| *lc == c)
                    .map(|(_, h)| *h)),
                CycleRef::Dart(d) => {
                    if !is_dying(&d) {
                        return Ok(None);
                    }
                    let cy = self.derived.darts[&d].cycle;
                    if let Some(survivor) =
                        self.derived.cycles[cy.index()].darts.iter().find(|dd| !is_dying(dd))
                    {
                        return Ok(Some(Homed::Ref(CycleRef::Dart(*survivor))));
                    }
                    if let Some((_, h)) = plan.dying_cycle_fallback.iter().find(|(c, _)| *c == cy) {
                        return Ok(Some(*h));
                    }
                    Err(MapError::Corrupt(format!(
                        "no rehoming rule for dying cycle {cy} (dart {d:?})"
                    )))
                }
            }
        };

        for comp in &self.derived.components {
            if drop_parents.contains(&comp.key) {
                continue;
            }
            let current = self.parents[&comp.key];
            if let Some(h) = handle(current, comp.parent_cell)? {
                out.push((RefKey::Parent(comp.key), h));
            }
        }
        for (&p, tp) in &self.tracked {
            let cell = self.derived.tracked_cell[&p];
            if let Some(h) = handle(tp.home, cell)? {
                out.push((RefKey::Tracked(p), h));
            }
        }
        Ok(out)
    }

    /// Repair outer-cycle records against the pre-edit derived state: records
    /// whose anchor dart dies move to a surviving dart of the same cycle or to
    /// the plan's fallback. Keys in `skip` are handled by the caller.
    pub(crate) fn plan_outer_repair(
        &self,
        plan: &RehomePlan,
        dying: &BTreeSet<CrossingId>,
        dying_names_extra: &BTreeSet<DartName>,
        skip: &BTreeSet<CurveId>,
    ) -> Result<Vec<(CurveId, OuterRef)>, MapError> {
        let is_dying = |d: &DartName| dying.contains(&d.at) || dying_names_extra.contains(d);
        let mut out = Vec::new();
        for (&key, &r) in &self.outers {
            if skip.contains(&key) {
                continue;
            }
            let OuterRef::Dart(d) = r else { continue };
            if !is_dying(&d) {
                continue;
            }
            let cy = self.derived.darts[&d].cycle;
            if let Some(survivor) =
                self.derived.cycles[cy.index()].darts.iter().find(|dd| !is_dying(dd))
            {
                out.push((key, OuterRef::Dart(*survivor)));
            } else if let Some((_, d2)) = plan.outer_fallback.iter().find(|(c, _)| *c == cy) {
                out.push((key, OuterRef::Dart(*d2)));
            } else {
                return Err(MapError::Corrupt(format!(
                    "no outer fallback for dying cycle {cy} of component {key}"
                )));
            }
        }
        Ok(out)
    }

    /// Re-key parent and outer records through `key_map` (old component key
    /// to new component key). Runs right after the walk edit, before any new
    /// records are inserted.
    pub(crate) fn rekey_records(&mut self, key_map: &BTreeMap<CurveId, CurveId>) {
        let old_parents = std::mem::take(&mut self.parents);
        for (key, r) in old_parents {
            let new_key = key_map.get(&key).copied().unwrap_or(key);
            self.parents.entry(new_key).or_insert(r);
        }
        let old_outers = std::mem::take(&mut self.outers);
        for (key, r) in old_outers {
            let new_key = key_map.get(&key).copied().unwrap_or(key);
            self.outers.entry(new_key).or_insert(r);
        }
    }

    /// Apply planned rehomings after the walk edit and record re-keying;
    /// `new_keys` gives the post-edit component key per curve.
    pub(crate) fn apply_moves(
        &mut self,
        moves: Vec<(RefKey, Homed)>,
        key_map: &BTreeMap<CurveId, CurveId>,
        new_keys: &[u32],
    ) {
        let mut direct: Vec<(RefKey, Homed)> = Vec::new();
        let mut indirect: Vec<(RefKey, Homed)> = Vec::new();
        for (k, h) in moves {
            match h {
                Homed::Ref(_) => direct.push((k, h)),
                Homed::ParentOf(_) => indirect.push((k, h)),
            }
        }
        for (k, h) in direct.into_iter().chain(indirect) {
            let r = match h {
                Homed::Ref(r) => r,
                Homed::ParentOf(c) => self.parents[&CurveId(new_keys[c.index()])],
            };
            match k {
                RefKey::Parent(old_key) => {
                    let new_key = key_map.get(&old_key).copied().unwrap_or(old_key);
                    self.parents.insert(new_key, r);
                }
                RefKey::Tracked(p) => {
                    self.tracked.get_mut(&p).unwrap().home = r;
                }
            }
        }
    }
}

impl<S: Scalar> Arrangement<S> {
    /// Pre-edit repair value for one component's outer record: a surviving
    /// dart of its cycle, or the plan's fallback. `None` means the cycle dies
    /// with no fallback, which is only legal when a split replaces the record.
    pub(crate) fn repair_outer_record(
        &self,
        key: CurveId,
        dying: &BTreeSet<CrossingId>,
        dying_names: &BTreeSet<DartName>,
        plan: &RehomePlan,
    ) -> Option<OuterRef> {
        let is_dying = |d: &DartName| dying.contains(&d.at) || dying_names.contains(d);
        match self.outers[&key] {
            OuterRef::Dart(d) if is_dying(&d) => {
                let cy = self.derived.darts[&d].cycle;
                match self.derived.cycles[cy.index()].darts.iter().find(|dd| !is_dying(dd)) {
                    Some(&sv) => Some(OuterRef::Dart(sv)),
                    None => plan
                        .outer_fallback
                        .iter()
                        .find(|(c, _)| *c == cy)
                        .map(|(_, d2)| OuterRef::Dart(*d2)),
                }
            }
            r => Some(r),
        }
    }

    /// Resolve a rehoming handle to a cell of the current derived state.
    pub(crate) fn resolve_homed(&self, h: Homed) -> Result<CellId, MapError> {
        match h {
            Homed::Ref(CycleRef::Unbounded) => Ok(self.outer_cell()),
            Homed::Ref(CycleRef::Dart(d)) => {
                if !self.derived.darts.contains_key(&d) {
                    return Err(MapError::Corrupt(format!("handle dart {d:?} does not exist")));
                }
                Ok(self.cell_of_dart(d))
            }
            Homed::Ref(CycleRef::LoopInterior(c)) => {
                let cy = self
                    .derived
                    .cycles
                    .iter()
                    .position(|k| k.kind == CycleKind::LoopInterior(c))
                    .ok_or_else(|| MapError::Corrupt(format!("{c} is not an isolated loop")))?;
                Ok(self.derived.cycles[cy].cell)
            }
            Homed::ParentOf(c) => {
                let comp = self.component_of(c);
                Ok(self.component(comp).parent_cell)
            }
        }
    }
}

/// Placement bookkeeping for operations that delete the last two crossings
/// between two curves and may therefore split a component in two.
pub(crate) struct PairSplit {
    pub a: CurveId,
    pub b: CurveId,
    /// Post-edit neighbours of the removed pair on each walk (`None` when the
    /// curve becomes an isolated loop).
    pub a_arc: Option<(CrossingId, CrossingId)>,
    pub b_arc: Option<(CrossingId, CrossingId)>,
    /// Does the in-between region (the vacated corridor) lie on the left of
    /// the forward traversal of each new arc?
    pub a_between_left: bool,
    pub b_between_left: bool,
    /// Is the corridor inside the bounded region of each curve after the edit?
    pub a_corridor_interior: bool,
    pub b_corridor_interior: bool,
    /// Darts of the original component's outer cycle, pre-edit (empty when the
    /// outer record was an isolated loop).
    pub old_outer_darts: Vec<DartName>,
    pub old_outer_loop: Option<CurveId>,
    /// Parent reference of the original component; its anchor lies outside the
    /// component, so it stays valid across the edit.
    pub old_parent: CycleRef,
}

impl PairSplit {
    fn arc_of(&self, c: CurveId) -> (Option<(CrossingId, CrossingId)>, bool, bool) {
        if c == self.a {
            (self.a_arc, self.a_between_left, self.a_corridor_interior)
        } else {
            debug_assert_eq!(c, self.b);
            (self.b_arc, self.b_between_left, self.b_corridor_interior)
        }
    }

    /// Post-edit dart bounding the corridor from curve `c`'s side.
    pub fn between_dart(&self, c: CurveId) -> Option<DartName> {
        let (arc, left, _) = self.arc_of(c);
        arc.map(|(p, n)| side_dart(c, p, n, left))
    }

    /// Reference for the cell on curve `c`'s far side (opposite the corridor).
    pub fn far_ref(&self, c: CurveId) -> Homed {
        let (arc, left, corridor_interior) = self.arc_of(c);
        match arc {
            Some((p, n)) => Homed::Ref(CycleRef::Dart(side_dart(c, p, n, !left))),
            None if corridor_interior => Homed::ParentOf(c),
            None => Homed::Ref(CycleRef::LoopInterior(c)),
        }
    }

    /// Reference for the corridor-side cell seen from curve `c`.
    pub fn corridor_ref(&self, c: CurveId) -> Homed {
        let (arc, _, corridor_interior) = self.arc_of(c);
        match arc {
            Some(_) => Homed::Ref(CycleRef::Dart(self.between_dart(c).unwrap())),
            None if corridor_interior => Homed::Ref(CycleRef::LoopInterior(c)),
            None => Homed::ParentOf(c),
        }
    }

    /// Parent and outer records for both sides after the edit, given post-edit
    /// component keys per curve. When the component did not split, the single
    /// surviving key keeps the original records.
    pub fn place_components<S: Scalar>(
        &self,
        arr: &Arrangement<S>,
        new_keys: &[u32],
    ) -> Result<(Vec<(CurveId, CycleRef)>, Vec<(CurveId, OuterRef)>), MapError> {
        let key_a = CurveId(new_keys[self.a.index()]);
        let key_b = CurveId(new_keys[self.b.index()]);
        if key_a == key_b {
            return Ok((vec![(key_a, self.old_parent)], Vec::new()));
        }
        let live = |d: &DartName| arr.crossings[d.at.index()].is_some();
        let side_of = |d: &DartName| CurveId(new_keys[d.curve.index()]);
        let survivors = |key: CurveId| -> Vec<DartName> {
            self.old_outer_darts
                .iter()
                .copied()
                .filter(|d| live(d) && side_of(d) == key)
                .collect()
        };
        let o_a = survivors(key_a);
        let o_b = survivors(key_b);

        let outer_for = |curve: CurveId, survivors: &[DartName]| -> Result<OuterRef, MapError> {
            if self.old_outer_loop == Some(curve) {
                return Ok(OuterRef::Loop(curve));
            }
            if let Some(&d) = survivors.first() {
                return Ok(OuterRef::Dart(d));
            }
            match self.between_dart(curve) {
                Some(d) => Ok(OuterRef::Dart(d)),
                None => Ok(OuterRef::Loop(curve)),
            }
        };
        let a_outer = outer_for(self.a, &o_a)?;
        let b_outer = outer_for(self.b, &o_b)?;

        let corridor_parent = |of: CurveId| -> CycleRef {
            match self.corridor_ref(of) {
                Homed::Ref(r) => r,
                Homed::ParentOf(_) => self.old_parent,
            }
        };
        let (a_parent, b_parent) = match (o_a.is_empty(), o_b.is_empty()) {
            // Both exposed to the original surroundings (or neither was, in
            // which case the surroundings touched only the removed arcs):
            // siblings in the original parent cell.
            (false, false) | (true, true) => (self.old_parent, self.old_parent),
            // One side unexposed: it hangs in the face of the other side that
            // bounds the corridor. When that face turns out to be the other
            // side's outer cycle, resolution falls through to the shared
            // parent, which is exactly the sibling answer.
            (true, false) => (corridor_parent(self.b), self.old_parent),
            (false, true) => (self.old_parent, corridor_parent(self.a)),
        };
        Ok((
            vec![(key_a, a_parent), (key_b, b_parent)],
            vec![(key_a, a_outer), (key_b, b_outer)],
        ))
    }
}
