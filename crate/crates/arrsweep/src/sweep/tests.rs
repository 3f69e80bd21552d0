use super::*;
use crate::arrangement::{build_arrangement, CellClass};
use crate::geom::ClosedPolyline;
use crate::invariants;
use crate::Rat;

type C = ClosedPolyline<Rat>;

fn sq(name: &str, x0: i64, y0: i64, x1: i64, y1: i64) -> C {
    C::from_ints(name, &[(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
}

#[test]
fn take_loop_on_nested_squares() {
    let arr0 = build_arrangement(
        vec![sq("g", 0, 0, 10, 10), sq("a", 3, 3, 7, 7)],
        "g",
        vec![("P".into(), crate::geom::ExactPoint::from_ints(1, 1))],
    )
    .unwrap();
    let mut arr = arr0;
    let p = arr.tracked_by_name("P").unwrap();
    let cands = find_candidates(&arr, SweepMode::NonPiercing, Some(p));
    assert_eq!(cands.len(), 1);
    assert!(matches!(cands[0], SweepOp::TakeLoop { .. }));
    let rep = apply_op(&mut arr, &cands[0], SweepMode::NonPiercing, Some(p)).unwrap();
    assert_eq!(rep.added.len(), 2);
    let (g, a) = (arr.curve_by_name("g").unwrap(), arr.curve_by_name("a").unwrap());
    assert_eq!(arr.pair_sequence(g, a).len(), 2);
    assert!(invariants::nonpiercing_pair(&arr, g, a));
    assert_eq!(arr.derived().components.len(), 1);
    assert!(arr.cell_inside(arr.tracked_cell(p), g));
    // One more digon bypass clears the curve out entirely.
    let m = progress_measure(&arr);
    assert_eq!(m, Measure { fully_inside: 0, interior_vertices: 0, gamma_crossings: 2 });
}

#[test]
fn full_sweep_of_nested_squares() {
    let mut arr = build_arrangement(
        vec![sq("g", 0, 0, 10, 10), sq("a", 3, 3, 7, 7)],
        "g",
        vec![("P".into(), crate::geom::ExactPoint::from_ints(1, 1))],
    )
    .unwrap();
    let p = arr.tracked_by_name("P").unwrap();
    let trace = sweep(&mut arr, SweepMode::NonPiercing, Some(p), StopRule::Full).unwrap();
    assert_eq!(trace.records.len(), 2);
    assert_eq!(trace.records[0].op.kind(), "take_loop");
    assert_eq!(trace.records[1].op.kind(), "bypass_digon");
    assert_eq!(arr.crossing_count(), 0);
    let g = arr.curve_by_name("g").unwrap();
    // The taken curve ends up outside the sweep region.
    let a = arr.curve_by_name("a").unwrap();
    assert!(!arr.curve_fully_inside_sweep(a));
    assert!(arr.cell_inside(arr.tracked_cell(p), g));
    assert!(arr.check_integrity().ok());
}

#[test]
fn bypass_digon_on_offset_squares() {
    let mut arr = build_arrangement(
        vec![sq("g", 0, 0, 4, 4), sq("b", 2, 2, 6, 6)],
        "g",
        vec![("P".into(), crate::geom::ExactPoint::from_ints(1, 1))],
    )
    .unwrap();
    let p = arr.tracked_by_name("P").unwrap();
    let cands = find_candidates(&arr, SweepMode::TwoIntersecting, Some(p));
    // The lens digon is available; the L-shaped digon holds the point.
    assert!(cands.iter().all(|c| matches!(c, SweepOp::BypassDigon { .. })));
    assert_eq!(cands.len(), 1);
    apply_op(&mut arr, &cands[0], SweepMode::TwoIntersecting, Some(p)).unwrap();
    assert_eq!(arr.crossing_count(), 0);
    assert_eq!(arr.derived().components.len(), 2);
    let (g, b) = (arr.curve_by_name("g").unwrap(), arr.curve_by_name("b").unwrap());
    // Both curves are now isolated loops, the bypassed curve outside the
    // shrunken sweep region.
    assert!(arr.is_isolated(g) && arr.is_isolated(b));
    let bcell = arr
        .cell_ids()
        .find(|&f| arr.cell_inside(f, b))
        .unwrap();
    assert!(!arr.cell_inside(bcell, g));
    assert!(arr.cell_inside(arr.tracked_cell(p), g));
    assert!(arr.check_integrity().ok());
}

/// Two rectangles overlapping each other and both poking out through the top
/// edge of the sweep square: a non-piercing, 2-intersecting family with one
/// interior vertex and two triangle cells on the sweep curve.
fn poking_rects() -> Vec<C> {
    vec![
        sq("g", 0, 0, 20, 20),
        sq("a", 4, 4, 12, 24),
        sq("b", 8, 5, 16, 25),
    ]
}

#[test]
fn bypass_triangle_moves_vertex_out() {
    let mut arr = build_arrangement(
        poking_rects(),
        "g",
        vec![("P".into(), crate::geom::ExactPoint::from_ints(2, 2))],
    )
    .unwrap();
    let p = arr.tracked_by_name("P").unwrap();
    assert!(invariants::family_report(&arr).is_nonpiercing);
    let before = progress_measure(&arr);
    assert_eq!(before.interior_vertices, 1);
    assert_eq!(before.gamma_crossings, 4);
    let cands = find_candidates(&arr, SweepMode::NonPiercing, Some(p));
    let tri = cands
        .iter()
        .find(|c| matches!(c, SweepOp::BypassTriangle { .. }))
        .expect("triangle candidate")
        .clone();
    let matrix_before = arr.crossing_matrix();
    apply_op(&mut arr, &tri, SweepMode::NonPiercing, Some(p)).unwrap();
    assert_eq!(arr.crossing_matrix(), matrix_before);
    let after = progress_measure(&arr);
    assert_eq!(after.interior_vertices, 0);
    assert_eq!(after.gamma_crossings, 4);
    assert!(arr.check_integrity().ok());
    assert!(invariants::family_report(&arr).is_nonpiercing);
}

/// The overlap vertex of the poking rectangles has its interior quadrant on
/// the sweep curve, so it is bypassable.
#[test]
fn bypass_vertex_adds_four_crossings() {
    let mut arr = build_arrangement(
        poking_rects(),
        "g",
        vec![("P".into(), crate::geom::ExactPoint::from_ints(2, 2))],
    )
    .unwrap();
    let p = arr.tracked_by_name("P").unwrap();
    let (g, a, b) = (
        arr.curve_by_name("g").unwrap(),
        arr.curve_by_name("a").unwrap(),
        arr.curve_by_name("b").unwrap(),
    );
    assert_eq!(arr.pair_sequence(g, a).len(), 2);
    assert_eq!(arr.pair_sequence(g, b).len(), 2);
    let cands = find_candidates(&arr, SweepMode::NonPiercing, Some(p));
    let vx = cands
        .iter()
        .find(|c| matches!(c, SweepOp::BypassVertex { .. }))
        .expect("vertex candidate")
        .clone();
    apply_op(&mut arr, &vx, SweepMode::NonPiercing, Some(p)).unwrap();
    assert_eq!(arr.pair_sequence(g, a).len(), 4);
    assert_eq!(arr.pair_sequence(g, b).len(), 4);
    assert!(invariants::family_report(&arr).is_nonpiercing);
    assert!(arr.cell_inside(arr.tracked_cell(p), g));
    assert!(arr.check_integrity().ok());
}

#[test]
fn full_sweep_of_poking_rects() {
    let mut arr = build_arrangement(
        poking_rects(),
        "g",
        vec![("P".into(), crate::geom::ExactPoint::from_ints(2, 2))],
    )
    .unwrap();
    let p = arr.tracked_by_name("P").unwrap();
    let trace = sweep(&mut arr, SweepMode::NonPiercing, Some(p), StopRule::Full).unwrap();
    assert!(!trace.records.is_empty());
    let m = progress_measure(&arr);
    assert_eq!(m, Measure { fully_inside: 0, interior_vertices: 0, gamma_crossings: 0 });
    for r in &trace.records {
        assert!(r.nonpiercing);
        assert!(r.measure_after < r.measure_before);
        assert_eq!(r.point_inside, Some(true));
    }
    assert!(arr.check_integrity().ok());
}

#[test]
fn two_intersecting_sweep_of_poking_rects() {
    // The family is 2-intersecting, so the restricted operation set must
    // suffice.
    let mut arr = build_arrangement(
        poking_rects(),
        "g",
        vec![("P".into(), crate::geom::ExactPoint::from_ints(2, 2))],
    )
    .unwrap();
    let p = arr.tracked_by_name("P").unwrap();
    assert!(invariants::family_report(&arr).is_two_intersecting);
    let trace = sweep(&mut arr, SweepMode::TwoIntersecting, Some(p), StopRule::Full).unwrap();
    for r in &trace.records {
        assert!(r.two_intersecting);
        assert_ne!(r.op.kind(), "bypass_vertex");
    }
    assert_eq!(progress_measure(&arr).gamma_crossings, 0);
}
