//! Discrete sweeping: shrink the designated curve by local rewrites.
//!
//! Four operations are available: taking a loop on a curve disjoint from the
//! sweep curve, bypassing a digon cell, bypassing a triangle cell, and (in
//! non-piercing mode) bypassing a visible interior vertex. Each is a pure
//! walk rewrite; the scheduler applies them until the interior of the sweep
//! region is clear, checking the mode invariant and a strictly decreasing
//! progress measure after every step.

mod candidates;
mod ops;

pub use candidates::find_candidates;
pub use ops::{apply_bypass_digon, apply_bypass_triangle, apply_bypass_vertex, apply_take_loop, OpReport};

use crate::arrangement::{Arrangement, CellId, CrossingId, CurveId, DartName, MapError, PointId};
use crate::invariants::{self, FamilyReport};
use crate::Scalar;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SweepMode {
    NonPiercing,
    TwoIntersecting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StopRule {
    /// Stop once no interior vertices and no fully-inside curves remain.
    Standard,
    /// Additionally bypass digons until no curve meets the interior at all.
    Full,
}

/// One discrete sweeping operation with its anchors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SweepOp {
    TakeLoop {
        target: CurveId,
        via_cell: CellId,
        anchor_gamma: Option<DartName>,
        anchor_target: Option<DartName>,
    },
    BypassDigon {
        cell: CellId,
        other: CurveId,
    },
    BypassTriangle {
        cell: CellId,
        curves: (CurveId, CurveId),
        interior_vertex: CrossingId,
    },
    BypassVertex {
        vertex: CrossingId,
        via_cell: CellId,
        anchor_gamma: Option<DartName>,
    },
}

impl SweepOp {
    pub fn kind(&self) -> &'static str {
        match self {
            SweepOp::TakeLoop { .. } => "take_loop",
            SweepOp::BypassDigon { .. } => "bypass_digon",
            SweepOp::BypassTriangle { .. } => "bypass_triangle",
            SweepOp::BypassVertex { .. } => "bypass_vertex",
        }
    }
}

/// Termination certificate, compared lexicographically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Measure {
    pub fully_inside: usize,
    pub interior_vertices: usize,
    pub gamma_crossings: usize,
}

impl Measure {
    pub fn as_array(&self) -> [u64; 3] {
        [self.fully_inside as u64, self.interior_vertices as u64, self.gamma_crossings as u64]
    }
}

pub fn progress_measure<S: Scalar>(arr: &Arrangement<S>) -> Measure {
    let g = arr.sweep_curve();
    let fully_inside = arr.curve_ids().filter(|&c| arr.curve_fully_inside_sweep(c)).count();
    let interior_vertices = arr.crossing_ids().filter(|&x| arr.crossing_inside_sweep(x)).count();
    Measure { fully_inside, interior_vertices, gamma_crossings: arr.walk(g).len() }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRecord {
    pub step: usize,
    pub op: SweepOp,
    pub measure_before: [u64; 3],
    pub measure_after: [u64; 3],
    /// Change of crossing count with the sweep curve, per other curve name.
    pub sweep_deltas: BTreeMap<String, i64>,
    pub nonpiercing: bool,
    pub two_intersecting: bool,
    pub max_pairwise_crossings: usize,
    pub point_inside: Option<bool>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("no valid sweeping operation is available (invariant bug or mode-inappropriate input)")]
    NoValidOperation,
    #[error("mode invariant violated after {op}: {detail}")]
    ModeViolated { op: &'static str, detail: String },
    #[error("progress measure did not decrease after {op}")]
    NoProgress { op: &'static str },
    #[error("tracked point left the sweep region after {op}")]
    PointEscaped { op: &'static str },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("step limit exceeded: ran {steps} steps, bound was {bound}")]
    StepLimit { steps: usize, bound: usize },
}

fn mode_holds(report: &FamilyReport, mode: SweepMode) -> Result<(), String> {
    match mode {
        SweepMode::NonPiercing => {
            if report.is_nonpiercing {
                Ok(())
            } else {
                Err(format!("piercing pairs: {:?}", report.offending_pairs))
            }
        }
        SweepMode::TwoIntersecting => {
            if report.is_two_intersecting && report.is_nonpiercing {
                Ok(())
            } else {
                Err(format!("max pairwise crossings {}", report.max_pairwise_crossings))
            }
        }
    }
}

fn stop_reached(m: &Measure, stop: StopRule) -> bool {
    match stop {
        StopRule::Standard => m.fully_inside == 0 && m.interior_vertices == 0,
        StopRule::Full => m.fully_inside == 0 && m.interior_vertices == 0 && m.gamma_crossings == 0,
    }
}

/// Check that a pair of crossings just added between the sweep curve and
/// `other` sits consecutively in both pair sequences, in opposite relative
/// order along the orientations.
fn check_new_pair<S: Scalar>(
    arr: &Arrangement<S>,
    other: CurveId,
    n1: CrossingId,
    n2: CrossingId,
) -> Result<(), String> {
    let g = arr.sweep_curve();
    let sg = arr.pair_sequence(g, other);
    let so = arr.pair_sequence(other, g);
    let k = sg.len();
    let i = sg.iter().position(|&x| x == n1).ok_or("new crossing missing on sweep walk")?;
    let (first, second) = if sg[(i + 1) % k] == n2 {
        (n1, n2)
    } else if sg[(i + k - 1) % k] == n2 {
        (n2, n1)
    } else {
        return Err("new crossings not consecutive along the sweep curve".into());
    };
    let j = so.iter().position(|&x| x == second).unwrap();
    if so[(j + 1) % so.len()] != first {
        return Err("new crossings not in opposite order along the other curve".into());
    }
    Ok(())
}

/// Apply one operation with full postcondition checking.
pub fn apply_op<S: Scalar>(
    arr: &mut Arrangement<S>,
    op: &SweepOp,
    mode: SweepMode,
    point: Option<PointId>,
) -> Result<OpReport, SweepError> {
    let g = arr.sweep_curve();
    let before: BTreeMap<(CurveId, CurveId), usize> = arr.crossing_matrix();
    let measure_before = progress_measure(arr);

    let report = match op {
        SweepOp::TakeLoop { .. } => apply_take_loop(arr, op, point)?,
        SweepOp::BypassDigon { .. } => apply_bypass_digon(arr, op, point)?,
        SweepOp::BypassTriangle { .. } => apply_bypass_triangle(arr, op, point)?,
        SweepOp::BypassVertex { .. } => {
            if mode == SweepMode::TwoIntersecting {
                return Err(SweepError::ModeViolated {
                    op: "bypass_vertex",
                    detail: "vertex bypassing is not available in two-intersecting mode".into(),
                });
            }
            apply_bypass_vertex(arr, op, point)?
        }
    };

    // Exact crossing-count deltas per operation.
    let after = arr.crossing_matrix();
    let mut expected: BTreeMap<(CurveId, CurveId), i64> = BTreeMap::new();
    let key = |a: CurveId, b: CurveId| if a <= b { (a, b) } else { (b, a) };
    match op {
        SweepOp::TakeLoop { target, .. } => {
            expected.insert(key(g, *target), 2);
        }
        SweepOp::BypassDigon { other, .. } => {
            expected.insert(key(g, *other), -2);
        }
        SweepOp::BypassTriangle { .. } => {}
        SweepOp::BypassVertex { vertex: _, .. } => {
            for (pair, _) in &report.added_pairs {
                *expected.entry(key(g, *pair)).or_insert(0) += 2;
            }
        }
    }
    let mut pairs: std::collections::BTreeSet<(CurveId, CurveId)> =
        before.keys().chain(after.keys()).copied().collect();
    pairs.extend(expected.keys().copied());
    for pr in pairs {
        let b = *before.get(&pr).unwrap_or(&0) as i64;
        let a = *after.get(&pr).unwrap_or(&0) as i64;
        let want = *expected.get(&pr).unwrap_or(&0);
        if a - b != want {
            return Err(SweepError::ModeViolated {
                op: op.kind(),
                detail: format!("crossing delta for {pr:?} is {} (expected {want})", a - b),
            });
        }
    }
    // New crossings appear consecutively, in opposite order.
    for (other, (n1, n2)) in &report.added_pairs {
        check_new_pair(arr, *other, *n1, *n2)
            .map_err(|detail| SweepError::ModeViolated { op: op.kind(), detail })?;
    }
    // Mode invariant.
    let fam = invariants::family_report(arr);
    mode_holds(&fam, mode).map_err(|detail| SweepError::ModeViolated { op: op.kind(), detail })?;
    // Strict progress.
    let measure_after = progress_measure(arr);
    if measure_after >= measure_before {
        return Err(SweepError::NoProgress { op: op.kind() });
    }
    // The tracked point stays inside the sweep region.
    if let Some(p) = point {
        let cell = arr.tracked_cell(p);
        if !arr.cell_inside(cell, arr.sweep_curve()) {
            return Err(SweepError::PointEscaped { op: op.kind() });
        }
    }
    Ok(report)
}

/// Run the sweep to the requested stop state.
pub fn sweep<S: Scalar>(
    arr: &mut Arrangement<S>,
    mode: SweepMode,
    point: Option<PointId>,
    stop: StopRule,
) -> Result<Trace, SweepError> {
    if let Some(p) = point {
        let cell = arr.tracked_cell(p);
        if !arr.cell_inside(cell, arr.sweep_curve()) {
            return Err(SweepError::PointEscaped { op: "initial state" });
        }
    }
    let m0 = progress_measure(arr);
    let bound = 3 * m0.fully_inside + 5 * m0.interior_vertices + m0.gamma_crossings + 1;
    let mut trace = Trace::default();
    let mut step = 0;
    loop {
        let measure = progress_measure(arr);
        if stop_reached(&measure, stop) {
            return Ok(trace);
        }
        let cands = find_candidates(arr, mode, point);
        let Some(op) = cands.into_iter().next() else {
            return Err(SweepError::NoValidOperation);
        };
        if std::env::var("ARRSWEEP_LOG").is_ok() {
            eprintln!("arrsweep: step {step}: {op:?}");
        }
        let rep = apply_op(arr, &op, mode, point)?;
        let measure_after = progress_measure(arr);
        let fam = invariants::family_report(arr);
        let mut sweep_deltas = BTreeMap::new();
        for (c, d) in rep.sweep_deltas() {
            sweep_deltas.insert(arr.curve_name(c).to_string(), d);
        }
        trace.records.push(TraceRecord {
            step,
            op,
            measure_before: measure.as_array(),
            measure_after: measure_after.as_array(),
            sweep_deltas,
            nonpiercing: fam.is_nonpiercing,
            two_intersecting: fam.is_two_intersecting,
            max_pairwise_crossings: fam.max_pairwise_crossings,
            point_inside: point.map(|p| arr.cell_inside(arr.tracked_cell(p), arr.sweep_curve())),
        });
        step += 1;
        if step > bound {
            return Err(SweepError::StepLimit { steps: step, bound });
        }
    }
}

#[cfg(test)]
mod tests;
