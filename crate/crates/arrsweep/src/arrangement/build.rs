//! Geometric construction of an arrangement and exact point location.

use super::*;
use crate::geom::{
    self, ArcPosition, ClosedPolyline, ExactPoint, Place, ValidationReport,
};

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("general position violated: {0:?}")]
    Validation(ValidationReport),
    #[error("duplicate curve name {0:?}")]
    DuplicateCurveName(String),
    #[error("unknown sweep curve {0:?}")]
    UnknownSweep(String),
    #[error("tracked point {0:?} lies on a curve")]
    TrackedPointOnCurve(String),
    #[error("duplicate tracked point name {0:?}")]
    DuplicateTrackedName(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, thiserror::Error)]
pub enum LocateError {
    #[error("point lies on a curve")]
    OnBoundary,
    #[error("arrangement geometry is stale")]
    Stale,
}

/// Build the combinatorial map of a validated curve family.
pub fn build_arrangement<S: Scalar>(
    curves: Vec<ClosedPolyline<S>>,
    sweep_name: &str,
    tracked: Vec<(String, ExactPoint<S>)>,
) -> Result<Arrangement<S>, BuildError> {
    for (i, c) in curves.iter().enumerate() {
        if curves[..i].iter().any(|d| d.name == c.name) {
            return Err(BuildError::DuplicateCurveName(c.name.clone()));
        }
    }
    let report = geom::validate_general_position(&curves);
    if !report.ok() {
        return Err(BuildError::Validation(report));
    }
    let sweep = curves
        .iter()
        .position(|c| c.name == sweep_name)
        .map(|i| CurveId(i as u32))
        .ok_or_else(|| BuildError::UnknownSweep(sweep_name.to_string()))?;
    for (i, (name, p)) in tracked.iter().enumerate() {
        if tracked[..i].iter().any(|(n, _)| n == name) {
            return Err(BuildError::DuplicateTrackedName(name.clone()));
        }
        for c in &curves {
            if geom::point_in_curve(p, c) == Place::OnBoundary {
                return Err(BuildError::TrackedPointOnCurve(name.clone()));
            }
        }
    }

    let mut arr = Arrangement {
        curves: curves
            .iter()
            .map(|c| CurveState { name: c.name.clone(), walk: Vec::new() })
            .collect(),
        crossings: Vec::new(),
        sweep,
        parents: BTreeMap::new(),
        outers: BTreeMap::new(),
        tracked: BTreeMap::new(),
        geometry: curves.iter().cloned().map(Some).collect(),
        stale: false,
        stats: MutationStats::default(),
        derived: Derived::default(),
    };

    // Crossings, in deterministic order: by pair, then along the first curve.
    let mut per_curve: Vec<Vec<(ArcPosition<S>, CrossingId)>> = vec![Vec::new(); curves.len()];
    for i in 0..curves.len() {
        for j in (i + 1)..curves.len() {
            let (on_a, _) = geom::intersect_pair(&curves[i], &curves[j])
                .map_err(BuildError::Validation)?;
            for cp in on_a {
                let id = CrossingId(arr.crossings.len() as u32);
                arr.crossings.push(Some(Crossing {
                    pair: (CurveId(i as u32), CurveId(j as u32)),
                    sign: cp.sign,
                    location: Some(cp.point.clone()),
                    pos: Some((cp.position_on_a.clone(), cp.position_on_b.clone())),
                }));
                per_curve[i].push((cp.position_on_a, id));
                per_curve[j].push((cp.position_on_b, id));
            }
        }
    }
    for (i, mut entries) in per_curve.into_iter().enumerate() {
        entries.sort_by(|l, r| l.0.cmp(&r.0));
        arr.curves[i].walk = entries.into_iter().map(|(_, id)| id).collect();
    }

    // Outer cycles per component, found by the sign of the traced area.
    let comp_keys = arr.curve_component_keys();
    let cycles = trace_raw_cycles(&arr);
    let mut outer_of_key: BTreeMap<u32, OuterRef> = BTreeMap::new();
    let mut neg_count: BTreeMap<u32, usize> = BTreeMap::new();
    let mut cycle_geom: Vec<(Vec<ExactPoint<S>>, S)> = Vec::new();
    for cyc in &cycles {
        let pts = cycle_polygon(&arr, cyc);
        let area = loop_area_doubled(&pts);
        cycle_geom.push((pts, area.clone()));
        let key = comp_keys[cyc[0].curve.index()];
        if area < S::zero() {
            *neg_count.entry(key).or_insert(0) += 1;
            outer_of_key.insert(key, OuterRef::Dart(*cyc.iter().min().unwrap()));
        }
    }
    for c in arr.curve_ids() {
        if arr.is_isolated(c) && comp_keys[c.index()] == c.0 {
            outer_of_key.insert(c.0, OuterRef::Loop(c));
        }
    }
    for (&key, &n) in &neg_count {
        if n != 1 {
            return Err(MapError::Corrupt(format!("component of c{key} traced {n} outer cycles")).into());
        }
    }
    arr.outers = outer_of_key.into_iter().map(|(k, v)| (CurveId(k), v)).collect();

    // Candidate regions for nesting and point location: every defining cycle
    // with its polygon and area.
    #[derive(Clone)]
    struct Region<S> {
        reference: CycleRef,
        key: u32,
        pts: Vec<ExactPoint<S>>,
        abs_area: S,
    }
    let mut regions: Vec<Region<S>> = Vec::new();
    for (ci, cyc) in cycles.iter().enumerate() {
        let (pts, area) = &cycle_geom[ci];
        if *area < S::zero() {
            continue; // outer cycle
        }
        regions.push(Region {
            reference: CycleRef::Dart(*cyc.iter().min().unwrap()),
            key: comp_keys[cyc[0].curve.index()],
            pts: pts.clone(),
            abs_area: area.abs(),
        });
    }
    for c in arr.curve_ids() {
        if arr.is_isolated(c) {
            let poly = arr.geometry[c.index()].as_ref().unwrap();
            regions.push(Region {
                reference: CycleRef::LoopInterior(c),
                key: comp_keys[c.index()],
                pts: poly.vertices.clone(),
                abs_area: geom::twice_signed_area(poly).abs(),
            });
        }
    }
    let innermost = |p: &ExactPoint<S>, exclude_key: Option<u32>| -> CycleRef {
        let mut best: Option<&Region<S>> = None;
        for r in &regions {
            if Some(r.key) == exclude_key {
                continue;
            }
            if point_in_loop(p, &r.pts) == Place::Inside {
                if best.map_or(true, |b| r.abs_area < b.abs_area) {
                    best = Some(r);
                }
            }
        }
        best.map_or(CycleRef::Unbounded, |r| r.reference)
    };

    // Nesting: each component hangs off the innermost region of another
    // component containing a probe point on it.
    let mut keys: Vec<u32> = comp_keys.iter().copied().collect();
    keys.sort_unstable();
    keys.dedup();
    for key in keys {
        let probe = &arr.geometry[key as usize].as_ref().unwrap().vertices[0];
        arr.parents.insert(CurveId(key), innermost(probe, Some(key)));
    }

    // Tracked points.
    for (i, (name, p)) in tracked.into_iter().enumerate() {
        let home = innermost(&p, None);
        arr.tracked.insert(PointId(i as u32), TrackedPoint { name, location: Some(p), home });
    }

    arr.commit()?;
    Ok(arr)
}

/// Add a tracked point to an already built, non-stale arrangement.
pub fn add_tracked_point<S: Scalar>(
    arr: &mut Arrangement<S>,
    name: &str,
    p: ExactPoint<S>,
) -> Result<PointId, BuildError> {
    if arr.stale {
        return Err(MapError::Precondition("cannot place points geometrically after mutations".into()).into());
    }
    if arr.tracked.values().any(|t| t.name == name) {
        return Err(BuildError::DuplicateTrackedName(name.to_string()));
    }
    let cell = locate_point(arr, &p).map_err(|_| BuildError::TrackedPointOnCurve(name.to_string()))?;
    let home = arr.cell_ref(cell);
    let id = PointId(arr.tracked.keys().last().map_or(0, |k| k.0 + 1));
    arr.tracked.insert(id, TrackedPoint { name: name.to_string(), location: Some(p), home });
    arr.derived.tracked_cell.insert(id, cell);
    Ok(id)
}

/// Exact cell containing `p`, valid while geometry is authoritative.
pub fn locate_point<S: Scalar>(arr: &Arrangement<S>, p: &ExactPoint<S>) -> Result<CellId, LocateError> {
    if arr.stale {
        return Err(LocateError::Stale);
    }
    for c in arr.curve_ids() {
        let poly = arr.geometry[c.index()].as_ref().expect("geometry present");
        if geom::point_in_curve(p, poly) == Place::OnBoundary {
            return Err(LocateError::OnBoundary);
        }
    }
    let d = &arr.derived;
    let mut best: Option<(S, CellId)> = None;
    for (i, cy) in d.cycles.iter().enumerate() {
        let id = CycleId(i as u32);
        let pts: Vec<ExactPoint<S>> = match &cy.kind {
            CycleKind::Traced => {
                let comp = cy.component;
                if d.components[comp.index()].outer == id {
                    continue;
                }
                cycle_polygon(arr, &cy.darts)
            }
            CycleKind::LoopInterior(c) => arr.geometry[c.index()].as_ref().unwrap().vertices.clone(),
            CycleKind::LoopExterior(_) => continue,
        };
        if point_in_loop(p, &pts) == Place::Inside {
            let a = loop_area_doubled(&pts).abs();
            if best.as_ref().map_or(true, |(b, _)| a < *b) {
                best = Some((a, d.cycles[i].cell));
            }
        }
    }
    Ok(best.map_or(d.unbounded, |(_, cell)| cell))
}

// ---------------------------------------------------------------------------
// Geometry of traced cycles (valid only pre-mutation)
// ---------------------------------------------------------------------------

fn trace_raw_cycles<S: Scalar>(arr: &Arrangement<S>) -> Vec<Vec<DartName>> {
    let names = arr.all_dart_names();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in &names {
        if seen.contains(&start) {
            continue;
        }
        let mut cyc = Vec::new();
        let mut d = start;
        loop {
            seen.insert(d);
            cyc.push(d);
            d = arr.face_next(d);
            if d == start {
                break;
            }
        }
        out.push(cyc);
    }
    out
}

fn pos_on<S: Scalar>(arr: &Arrangement<S>, x: CrossingId, c: CurveId) -> ArcPosition<S> {
    let cr = arr.crossing(x);
    let pos = cr.pos.as_ref().expect("positions present pre-mutation");
    if cr.pair.0 == c {
        pos.0.clone()
    } else {
        pos.1.clone()
    }
}

/// Polyline of the arc covered by a forward dart, from its start crossing to
/// the next crossing on the curve.
fn forward_arc_points<S: Scalar>(arr: &Arrangement<S>, c: CurveId, x: CrossingId) -> Vec<ExactPoint<S>> {
    let y = arr.walk_next(c, x);
    let poly = arr.geometry[c.index()].as_ref().expect("geometry present");
    let n = poly.vertices.len();
    let pa = pos_on(arr, x, c);
    let pb = pos_on(arr, y, c);
    let mut pts = vec![arr.crossing(x).location.clone().expect("location present")];
    // Crossing params sit strictly inside segment interiors, so the polyline
    // vertices passed are exactly pa.segment+1 ..= pb.segment (cyclically),
    // or the full round when both crossings share one segment in wrap order.
    let steps = if pa.segment == pb.segment {
        if pa.param < pb.param {
            0
        } else {
            n
        }
    } else {
        (pb.segment + n - pa.segment) % n
    };
    for s in 1..=steps {
        pts.push(poly.vertices[(pa.segment + s) % n].clone());
    }
    pts.push(arr.crossing(y).location.clone().expect("location present"));
    pts
}

/// Concatenated polygon of a traced cycle.
fn cycle_polygon<S: Scalar>(arr: &Arrangement<S>, cyc: &[DartName]) -> Vec<ExactPoint<S>> {
    let mut pts = Vec::new();
    for &d in cyc {
        let arc = match d.dir {
            Dir::Forward => forward_arc_points(arr, d.curve, d.at),
            Dir::Backward => {
                let mut a = forward_arc_points(arr, d.curve, arr.walk_prev(d.curve, d.at));
                a.reverse();
                a
            }
        };
        pts.extend(arc);
    }
    pts
}

fn loop_area_doubled<S: Scalar>(pts: &[ExactPoint<S>]) -> S {
    let mut acc = S::zero();
    let n = pts.len();
    for i in 0..n {
        let p = &pts[i];
        let q = &pts[(i + 1) % n];
        acc = acc + (p.x.clone() * q.y.clone() - q.x.clone() * p.y.clone());
    }
    acc
}

/// Even-odd classification against an arbitrary closed point loop.
fn point_in_loop<S: Scalar>(p: &ExactPoint<S>, pts: &[ExactPoint<S>]) -> Place {
    let n = pts.len();
    for i in 0..n {
        let a = &pts[i];
        let b = &pts[(i + 1) % n];
        if a == b {
            if p == a {
                return Place::OnBoundary;
            }
            continue;
        }
        if geom::on_segment(a, b, p) {
            return Place::OnBoundary;
        }
    }
    let mut crossings = 0usize;
    for i in 0..n {
        let a = &pts[i];
        let b = &pts[(i + 1) % n];
        if a == b {
            continue;
        }
        let (lo, hi) = if a.x <= b.x { (a, b) } else { (b, a) };
        if !(lo.x <= p.x && p.x < hi.x) {
            continue;
        }
        if geom::orient(lo, hi, p) == std::cmp::Ordering::Less {
            crossings += 1;
        }
    }
    if crossings % 2 == 1 {
        Place::Inside
    } else {
        Place::Outside
    }
}
