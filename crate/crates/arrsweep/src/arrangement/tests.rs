use super::*;
use crate::geom::{ClosedPolyline, ExactPoint};
use crate::Rat;
use num_traits::FromPrimitive;

type C = ClosedPolyline<Rat>;
type P = ExactPoint<Rat>;

fn rp(x: i64, y: i64) -> P {
    P::from_ints(x, y)
}

pub(crate) fn offset_squares() -> Vec<C> {
    vec![
        C::from_ints("a", &[(0, 0), (4, 0), (4, 4), (0, 4)]),
        C::from_ints("b", &[(2, 2), (6, 2), (6, 6), (2, 6)]),
    ]
}

#[test]
fn single_square_counts() {
    let arr = build_arrangement(vec![C::from_ints("a", &[(0, 0), (4, 0), (4, 4), (0, 4)])], "a", Vec::new()).unwrap();
    assert_eq!(arr.crossing_count(), 0);
    assert_eq!(arr.derived().cells.len(), 2);
    assert_eq!(arr.derived().components.len(), 1);
    assert!(arr.check_integrity().ok());
    let inner = arr
        .cell_ids()
        .find(|&f| arr.cell_inside(f, CurveId(0)))
        .expect("inner cell");
    assert_ne!(inner, arr.outer_cell());
}

#[test]
fn offset_squares_counts_and_classes() {
    let arr = build_arrangement(offset_squares(), "a", Vec::new()).unwrap();
    assert_eq!(arr.crossing_count(), 2);
    // V - E + F = 1 + C with E = 2V.
    assert_eq!(arr.derived().cells.len(), 4);
    assert_eq!(arr.derived().components.len(), 1);
    assert!(arr.check_integrity().ok());

    let (a, b) = (arr.curve_by_name("a").unwrap(), arr.curve_by_name("b").unwrap());
    // Both cells on the sweep side are two-sided: the lens and the region of
    // a outside b.
    let on_sweep = arr.cells_on_sweep();
    let digons: Vec<_> = on_sweep
        .iter()
        .filter(|(_, k)| matches!(k, CellClass::Digon { .. }))
        .collect();
    assert_eq!(digons.len(), 2);
    assert!(digons
        .iter()
        .any(|(f, _)| arr.cell_inside(*f, a) && arr.cell_inside(*f, b)));
    assert!(digons
        .iter()
        .any(|(f, _)| arr.cell_inside(*f, a) && !arr.cell_inside(*f, b)));
}

#[test]
fn nested_squares_have_annulus_cell() {
    let curves = vec![
        C::from_ints("outer", &[(0, 0), (10, 0), (10, 10), (0, 10)]),
        C::from_ints("inner", &[(3, 3), (7, 3), (7, 7), (3, 7)]),
    ];
    let arr = build_arrangement(curves, "outer", Vec::new()).unwrap();
    assert!(arr.check_integrity().ok());
    assert_eq!(arr.derived().components.len(), 2);
    assert_eq!(arr.derived().cells.len(), 3);
    let (o, i) = (arr.curve_by_name("outer").unwrap(), arr.curve_by_name("inner").unwrap());
    let annulus = arr
        .cell_ids()
        .find(|&f| arr.cell_inside(f, o) && !arr.cell_inside(f, i))
        .unwrap();
    // The annulus cell carries the inner loop as a child component.
    assert_eq!(arr.cell(annulus).cycles.len(), 2);
    assert_eq!(arr.cell(annulus).child_components.len(), 1);
    // Classification refuses cells with nested components.
    assert_eq!(arr.classify_cell(annulus), CellClass::Other);
}

#[test]
fn tracked_points_land_in_their_cells() {
    let arr = build_arrangement(
        offset_squares(),
        "a",
        vec![
            ("in_lens".to_string(), rp(3, 3)),
            ("in_a_only".to_string(), rp(1, 1)),
            ("outside".to_string(), rp(10, 10)),
        ],
    )
    .unwrap();
    let (a, b) = (arr.curve_by_name("a").unwrap(), arr.curve_by_name("b").unwrap());
    let lens = arr.tracked_cell(arr.tracked_by_name("in_lens").unwrap());
    assert!(arr.cell_inside(lens, a) && arr.cell_inside(lens, b));
    let a_only = arr.tracked_cell(arr.tracked_by_name("in_a_only").unwrap());
    assert!(arr.cell_inside(a_only, a) && !arr.cell_inside(a_only, b));
    assert_eq!(arr.tracked_cell(arr.tracked_by_name("outside").unwrap()), arr.outer_cell());
}

#[test]
fn locate_agrees_with_membership_signature() {
    let curves = vec![
        C::from_ints("g", &[(0, 0), (20, 0), (20, 20), (0, 20)]),
        C::from_ints("a", &[(-2, 6), (22, 6), (22, 10), (-2, 10)]),
        C::from_ints("b", &[(8, -2), (12, -2), (12, 22), (8, 22)]),
        C::from_ints("c", &[(1, 1), (5, 1), (5, 5), (1, 5)]),
        C::from_ints("d", &[(14, 12), (18, 12), (18, 18), (14, 18)]),
    ];
    let arr = build_arrangement(curves.clone(), "g", Vec::new()).unwrap();
    assert!(arr.check_integrity().ok());
    for (px, py) in [(3, 3), (9, 8), (10, 8), (15, 15), (21, 21), (9, 1), (16, 13), (2, 8)] {
        let p = rp(px, py);
        let cell = locate_point(&arr, &p).unwrap();
        for (ci, poly) in curves.iter().enumerate() {
            let inside = crate::geom::point_in_curve(&p, poly) == crate::geom::Place::Inside;
            assert_eq!(
                arr.cell_inside(cell, CurveId(ci as u32)),
                inside,
                "membership mismatch at ({px},{py}) vs {}",
                poly.name
            );
        }
    }
    let boundary = P::new(Rat::from_i64(10).unwrap(), Rat::from_i64(0).unwrap());
    assert!(locate_point(&arr, &boundary).is_err());
}

#[test]
fn corrupted_twin_is_reported() {
    let arr = build_arrangement(offset_squares(), "a", Vec::new()).unwrap();
    let mut table = arr.derived().darts.clone();
    let some_dart = *table.keys().next().unwrap();
    let entry = table.get_mut(&some_dart).unwrap();
    entry.twin = some_dart; // fixed point
    let problems = check_dart_table(&table);
    assert!(problems
        .iter()
        .any(|p| matches!(p, IntegrityProblem::TwinInvolutionBroken { .. })));
}

#[test]
fn deep_nesting_forest() {
    let curves = vec![
        C::from_ints("g", &[(0, 0), (30, 0), (30, 30), (0, 30)]),
        C::from_ints("m", &[(5, 5), (25, 5), (25, 25), (5, 25)]),
        C::from_ints("i", &[(10, 10), (20, 10), (20, 20), (10, 20)]),
        C::from_ints("s", &[(40, 0), (44, 0), (44, 4), (40, 4)]),
    ];
    let arr = build_arrangement(curves, "g", Vec::new()).unwrap();
    assert!(arr.check_integrity().ok());
    assert_eq!(arr.derived().components.len(), 4);
    assert_eq!(arr.derived().cells.len(), 5);
    let i = arr.curve_by_name("i").unwrap();
    let deepest = arr
        .cell_ids()
        .find(|&f| arr.cell_inside(f, i))
        .unwrap();
    assert_eq!(arr.cell(deepest).inside_of.len(), 3);
}
