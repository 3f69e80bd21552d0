//! Structural self-checks run after every mutation.

use super::*;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntegrityProblem {
    TwinInvolutionBroken { dart: DartName },
    RotationBroken { crossing: CrossingId, detail: String },
    FaceTraceBroken { detail: String },
    WalkBroken { detail: String },
    EulerViolated { cells: usize, components: usize, crossings: usize },
    ComponentCycleCount { component: CompId, expected: usize, got: usize },
    NestingBroken { detail: String },
    MembershipBroken { detail: String },
    OddPair { a: CurveId, b: CurveId, count: usize },
    TrackedPointBroken { point: PointId, detail: String },
}

impl fmt::Display for IntegrityProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TwinInvolutionBroken { dart } => write!(f, "twin involution broken at {dart:?}"),
            Self::RotationBroken { crossing, detail } => write!(f, "rotation broken at {crossing}: {detail}"),
            Self::FaceTraceBroken { detail } => write!(f, "face trace broken: {detail}"),
            Self::WalkBroken { detail } => write!(f, "walk broken: {detail}"),
            Self::EulerViolated { cells, components, crossings } => {
                write!(f, "Euler violated: F={cells} but 1+C+V = {}", 1 + components + crossings)
            }
            Self::ComponentCycleCount { component, expected, got } => {
                write!(f, "component {component} has {got} face cycles, expected {expected}")
            }
            Self::NestingBroken { detail } => write!(f, "nesting forest broken: {detail}"),
            Self::MembershipBroken { detail } => write!(f, "membership broken: {detail}"),
            Self::OddPair { a, b, count } => write!(f, "curves {a},{b} cross an odd number of times ({count})"),
            Self::TrackedPointBroken { point, detail } => write!(f, "tracked point {point}: {detail}"),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct IntegrityReport {
    pub problems: Vec<IntegrityProblem>,
}

impl IntegrityReport {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }
}

impl fmt::Display for IntegrityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "ok");
        }
        for (i, p) in self.problems.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Check twin involution and rotation orbits on a dart table in isolation.
/// Exposed separately so tests can corrupt a copy of the table.
pub fn check_dart_table(darts: &BTreeMap<DartName, DartData>) -> Vec<IntegrityProblem> {
    let mut out = Vec::new();
    for (&d, data) in darts {
        match darts.get(&data.twin) {
            None => out.push(IntegrityProblem::TwinInvolutionBroken { dart: d }),
            Some(t) => {
                if t.twin != d || data.twin == d {
                    out.push(IntegrityProblem::TwinInvolutionBroken { dart: d });
                }
            }
        }
        if !darts.contains_key(&data.sigma) {
            out.push(IntegrityProblem::RotationBroken {
                crossing: d.at,
                detail: format!("sigma of {d:?} is missing"),
            });
        }
    }
    // Rotation orbits: exactly 4 darts at each crossing, alternating curves.
    let mut by_crossing: BTreeMap<CrossingId, Vec<DartName>> = BTreeMap::new();
    for &d in darts.keys() {
        by_crossing.entry(d.at).or_default().push(d);
    }
    for (x, group) in by_crossing {
        if group.len() != 4 {
            out.push(IntegrityProblem::RotationBroken {
                crossing: x,
                detail: format!("{} outgoing darts", group.len()),
            });
            continue;
        }
        let start = group[0];
        let mut d = start;
        let mut orbit = Vec::new();
        for _ in 0..4 {
            orbit.push(d);
            d = match darts.get(&d) {
                Some(data) => data.sigma,
                None => break,
            };
        }
        if d != start || orbit.len() != 4 {
            out.push(IntegrityProblem::RotationBroken { crossing: x, detail: "orbit is not a 4-cycle".into() });
            continue;
        }
        for i in 0..4 {
            if orbit[i].curve == orbit[(i + 1) % 4].curve {
                out.push(IntegrityProblem::RotationBroken {
                    crossing: x,
                    detail: "consecutive rotation darts on the same curve".into(),
                });
                break;
            }
        }
    }
    out
}

impl<S: Scalar> Arrangement<S> {
    /// Verify every structural invariant of the current derived state.
    pub fn check_integrity(&self) -> IntegrityReport {
        let mut problems = Vec::new();
        let d = &self.derived;

        // Walk consistency.
        for x in self.crossing_ids() {
            let cr = self.crossing(x);
            if cr.pair.0 == cr.pair.1 {
                problems.push(IntegrityProblem::WalkBroken { detail: format!("{x} crosses a curve with itself") });
            }
            for c in [cr.pair.0, cr.pair.1] {
                let count = self.curves[c.index()].walk.iter().filter(|&&y| y == x).count();
                if count != 1 {
                    problems.push(IntegrityProblem::WalkBroken {
                        detail: format!("{x} appears {count} times on walk of {c}"),
                    });
                }
            }
            if cr.sign != 1 && cr.sign != -1 {
                problems.push(IntegrityProblem::WalkBroken { detail: format!("{x} has sign {}", cr.sign) });
            }
        }
        for c in self.curve_ids() {
            for &x in &self.curves[c.index()].walk {
                match &self.crossings[x.index()] {
                    None => problems.push(IntegrityProblem::WalkBroken {
                        detail: format!("walk of {c} references dead crossing {x}"),
                    }),
                    Some(cr) if !cr.involves(c) => problems.push(IntegrityProblem::WalkBroken {
                        detail: format!("walk of {c} references foreign crossing {x}"),
                    }),
                    _ => {}
                }
            }
        }
        if !problems.is_empty() {
            return IntegrityReport { problems };
        }

        // Dart table checks.
        problems.extend(check_dart_table(&d.darts));

        // Face partition: every dart in exactly one cycle and the cycles close.
        let mut seen = BTreeSet::new();
        for (i, cy) in d.cycles.iter().enumerate() {
            if matches!(cy.kind, CycleKind::Traced) {
                for (j, &dart) in cy.darts.iter().enumerate() {
                    if !seen.insert(dart) {
                        problems.push(IntegrityProblem::FaceTraceBroken {
                            detail: format!("{dart:?} appears in two cycles"),
                        });
                    }
                    let next = cy.darts[(j + 1) % cy.darts.len()];
                    if self.face_next(dart) != next {
                        problems.push(IntegrityProblem::FaceTraceBroken {
                            detail: format!("cycle cy{i} does not follow the face permutation at {dart:?}"),
                        });
                    }
                    if d.darts[&dart].cycle != CycleId(i as u32) {
                        problems.push(IntegrityProblem::FaceTraceBroken {
                            detail: format!("{dart:?} labelled with the wrong cycle"),
                        });
                    }
                    // Consecutive boundary darts never share a curve.
                    if dart.curve == next.curve {
                        problems.push(IntegrityProblem::FaceTraceBroken {
                            detail: format!("cycle cy{i} has two consecutive sides of {}", dart.curve),
                        });
                    }
                }
            }
        }
        if seen.len() != d.darts.len() {
            problems.push(IntegrityProblem::FaceTraceBroken { detail: "cycles do not cover all darts".into() });
        }

        // Per-component sphere condition and global Euler count.
        for (k, comp) in d.components.iter().enumerate() {
            let crossings_in: usize = self
                .crossing_ids()
                .filter(|&x| d.comp_of_curve[self.crossing(x).pair.0.index()] == CompId(k as u32))
                .count();
            let traced: usize = d
                .cycles
                .iter()
                .filter(|cy| cy.component == CompId(k as u32) && matches!(cy.kind, CycleKind::Traced))
                .count();
            if comp.curves.len() == 1 && self.is_isolated(comp.curves[0]) {
                continue;
            }
            if traced != crossings_in + 2 {
                problems.push(IntegrityProblem::ComponentCycleCount {
                    component: CompId(k as u32),
                    expected: crossings_in + 2,
                    got: traced,
                });
            }
        }
        let v = self.crossing_count();
        let f = d.cells.len();
        let c = d.components.len();
        if f != 1 + c + v {
            problems.push(IntegrityProblem::EulerViolated { cells: f, components: c, crossings: v });
        }

        // Arcs separate two distinct cells; the forward side is the curve's
        // inside.
        for (&dart, data) in &d.darts {
            let me = d.cycles[data.cycle.index()].cell;
            let other = d.cycles[d.darts[&data.twin].cycle.index()].cell;
            if me == other {
                problems.push(IntegrityProblem::MembershipBroken {
                    detail: format!("arc at {dart:?} has the same cell on both sides"),
                });
                continue;
            }
            if dart.dir == Dir::Forward {
                let inside = d.cells[me.index()].inside_of.contains(&dart.curve);
                let outside = d.cells[other.index()].inside_of.contains(&dart.curve);
                if !inside || outside {
                    problems.push(IntegrityProblem::MembershipBroken {
                        detail: format!("orientation of {dart:?} disagrees with membership"),
                    });
                }
            }
        }
        if !d.cells[d.unbounded.index()].inside_of.is_empty() {
            problems.push(IntegrityProblem::MembershipBroken { detail: "outer cell has nonempty membership".into() });
        }

        // Nesting forest: walk to the root from every component.
        for (k, _) in d.components.iter().enumerate() {
            let mut cur = CompId(k as u32);
            let mut steps = 0;
            loop {
                let cell = d.components[cur.index()].parent_cell;
                if cell == d.unbounded {
                    break;
                }
                let def = d.cells[cell.index()].defining.expect("bounded cell");
                cur = d.cycles[def.index()].component;
                steps += 1;
                if steps > d.components.len() {
                    problems.push(IntegrityProblem::NestingBroken {
                        detail: format!("component K{k} has no path to the outer cell"),
                    });
                    break;
                }
            }
        }

        // Pair parity.
        for ((a, b), count) in self.crossing_matrix() {
            if count % 2 != 0 {
                problems.push(IntegrityProblem::OddPair { a, b, count });
            }
        }

        // Tracked points: resolved cells exist; exact geometric recheck while
        // locations are still authoritative.
        for (&p, tp) in &self.tracked {
            match d.tracked_cell.get(&p) {
                None => problems.push(IntegrityProblem::TrackedPointBroken {
                    point: p,
                    detail: "unresolved cell".into(),
                }),
                Some(&cell) => {
                    if !self.stale {
                        if let Some(loc) = &tp.location {
                            match super::build::locate_point(self, loc) {
                                Ok(found) if found == cell => {}
                                Ok(found) => problems.push(IntegrityProblem::TrackedPointBroken {
                                    point: p,
                                    detail: format!("geometric location {found} != recorded {cell}"),
                                }),
                                Err(e) => problems.push(IntegrityProblem::TrackedPointBroken {
                                    point: p,
                                    detail: format!("geometric recheck failed: {e}"),
                                }),
                            }
                        }
                    }
                }
            }
        }

        IntegrityReport { problems }
    }
}
