//! Exact planar predicates on closed rational polylines.
//!
//! Everything here is decided by integer-exact arithmetic on the scalar type;
//! there are no tolerances anywhere.

use crate::Scalar;
use std::cmp::Ordering;
use std::fmt;

/// A point with exact coordinates.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactPoint<S> {
    pub x: S,
    pub y: S,
}

impl<S: fmt::Debug> fmt::Debug for ExactPoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.x, self.y)
    }
}

impl<S: Scalar> ExactPoint<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Self {
            x: S::from_i64(x).expect("int in range"),
            y: S::from_i64(y).expect("int in range"),
        }
    }
}

/// Sign of the cross product `(b-a) × (c-a)`: positive iff `a,b,c` turn
/// counter-clockwise.
pub fn orient<S: Scalar>(a: &ExactPoint<S>, b: &ExactPoint<S>, c: &ExactPoint<S>) -> Ordering {
    let abx = b.x.clone() - a.x.clone();
    let aby = b.y.clone() - a.y.clone();
    let acx = c.x.clone() - a.x.clone();
    let acy = c.y.clone() - a.y.clone();
    (abx * acy).cmp(&(aby * acx))
}

/// Sign of `u × v` for direction vectors.
pub fn orient_dirs<S: Scalar>(u: &(S, S), v: &(S, S)) -> Ordering {
    (u.0.clone() * v.1.clone()).cmp(&(u.1.clone() * v.0.clone()))
}

fn between_1d<S: Scalar>(lo: &S, hi: &S, v: &S) -> bool {
    if lo <= hi {
        lo <= v && v <= hi
    } else {
        hi <= v && v <= lo
    }
}

/// Does `p` lie on the closed segment `a..b`?
pub fn on_segment<S: Scalar>(a: &ExactPoint<S>, b: &ExactPoint<S>, p: &ExactPoint<S>) -> bool {
    orient(a, b, p) == Ordering::Equal && between_1d(&a.x, &b.x, &p.x) && between_1d(&a.y, &b.y, &p.y)
}

/// A closed simple polyline, oriented counter-clockwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedPolyline<S> {
    pub name: String,
    pub vertices: Vec<ExactPoint<S>>,
}

impl<S: Scalar> ClosedPolyline<S> {
    pub fn new(name: impl Into<String>, vertices: Vec<ExactPoint<S>>) -> Self {
        Self { name: name.into(), vertices }
    }

    pub fn from_ints(name: impl Into<String>, pts: &[(i64, i64)]) -> Self {
        Self::new(name, pts.iter().map(|&(x, y)| ExactPoint::from_ints(x, y)).collect())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Segment `i` runs from vertex `i` to vertex `i+1` (cyclically).
    pub fn segment(&self, i: usize) -> (&ExactPoint<S>, &ExactPoint<S>) {
        (&self.vertices[i], &self.vertices[(i + 1) % self.vertices.len()])
    }
}

/// Twice the signed area of the polyline; positive iff counter-clockwise.
pub fn twice_signed_area<S: Scalar>(curve: &ClosedPolyline<S>) -> S {
    let mut acc = S::zero();
    let n = curve.vertices.len();
    for i in 0..n {
        let p = &curve.vertices[i];
        let q = &curve.vertices[(i + 1) % n];
        acc = acc + (p.x.clone() * q.y.clone() - q.x.clone() * p.y.clone());
    }
    acc
}

/// Point-vs-region classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Place {
    Inside,
    Outside,
    OnBoundary,
}

/// Exact even-odd classification of `p` against the region bounded by `c`.
pub fn point_in_curve<S: Scalar>(p: &ExactPoint<S>, c: &ClosedPolyline<S>) -> Place {
    let n = c.vertices.len();
    for i in 0..n {
        let (a, b) = c.segment(i);
        if on_segment(a, b, p) {
            return Place::OnBoundary;
        }
    }
    // Cast a ray straight up from p; count proper crossings using the
    // half-open convention on segment endpoints.
    let mut crossings = 0usize;
    for i in 0..n {
        let (a, b) = c.segment(i);
        let (lo, hi) = if a.x <= b.x { (a, b) } else { (b, a) };
        if !(lo.x <= p.x && p.x < hi.x) {
            continue;
        }
        // Segment straddles the vertical line through p; exact y at p.x.
        // Compare p.y against the segment via orientation of (lo, hi, p).
        let o = orient(lo, hi, p);
        // Ray goes up: we cross iff p is strictly below the segment.
        if o == Ordering::Less {
            crossings += 1;
        }
    }
    if crossings % 2 == 1 {
        Place::Inside
    } else {
        Place::Outside
    }
}

/// Winding number of `c` around `p`; independent route used to cross-check
/// [`point_in_curve`]. `p` must not lie on the curve.
pub fn winding_number<S: Scalar>(p: &ExactPoint<S>, c: &ClosedPolyline<S>) -> i64 {
    let n = c.vertices.len();
    let mut w = 0i64;
    for i in 0..n {
        let (a, b) = c.segment(i);
        if a.y <= p.y {
            if b.y > p.y && orient(a, b, p) == Ordering::Greater {
                w += 1;
            }
        } else if b.y <= p.y && orient(a, b, p) == Ordering::Less {
            w -= 1;
        }
    }
    w
}

/// Location of a crossing along one curve: segment index plus the exact
/// parameter within that segment (in `[0,1)` interiors after validation).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ArcPosition<S> {
    pub segment: usize,
    pub param: S,
}

/// A transversal crossing point of two curves.
#[derive(Clone, Debug)]
pub struct CrossingPoint<S> {
    pub point: ExactPoint<S>,
    pub curve_a: String,
    pub curve_b: String,
    pub position_on_a: ArcPosition<S>,
    pub position_on_b: ArcPosition<S>,
    /// Sign of `(dir_a × dir_b)` at the crossing: positive iff `b` crosses
    /// from the right of `a` to its left.
    pub sign: i8,
}

/// Violations reported by [`validate_general_position`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    BadOrientation { curve: String },
    SelfIntersection { curve: String, seg_a: usize, seg_b: usize },
    DegenerateVertex { curve: String, vertex: usize },
    VertexOnForeignCurve { curve: String, vertex: usize, other: String },
    NonTransversalContact { curve_a: String, curve_b: String, seg_a: usize, seg_b: usize },
    TriplePoint { x: String, y: String },
    TooFewVertices { curve: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadOrientation { curve } => write!(f, "curve {curve} is not counter-clockwise"),
            Violation::SelfIntersection { curve, seg_a, seg_b } => {
                write!(f, "curve {curve} self-intersects (segments {seg_a}, {seg_b})")
            }
            Violation::DegenerateVertex { curve, vertex } => {
                write!(f, "curve {curve} repeats vertex {vertex}")
            }
            Violation::VertexOnForeignCurve { curve, vertex, other } => {
                write!(f, "vertex {vertex} of curve {curve} lies on curve {other}")
            }
            Violation::NonTransversalContact { curve_a, curve_b, seg_a, seg_b } => {
                write!(f, "curves {curve_a}/{curve_b} touch non-transversally (segments {seg_a}, {seg_b})")
            }
            Violation::TriplePoint { x, y } => write!(f, "three curves meet at ({x}, {y})"),
            Violation::TooFewVertices { curve } => write!(f, "curve {curve} has fewer than 3 vertices"),
        }
    }
}

/// Validation result; `ok()` iff no violations.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Do the open segments cross properly (single interior point, transversal)?
fn proper_crossing<S: Scalar>(
    a0: &ExactPoint<S>,
    a1: &ExactPoint<S>,
    b0: &ExactPoint<S>,
    b1: &ExactPoint<S>,
) -> bool {
    let o1 = orient(a0, a1, b0);
    let o2 = orient(a0, a1, b1);
    let o3 = orient(b0, b1, a0);
    let o4 = orient(b0, b1, a1);
    o1 != Ordering::Equal
        && o2 != Ordering::Equal
        && o3 != Ordering::Equal
        && o4 != Ordering::Equal
        && o1 != o2
        && o3 != o4
}

/// Any contact between the closed segments at all?
fn segments_touch<S: Scalar>(
    a0: &ExactPoint<S>,
    a1: &ExactPoint<S>,
    b0: &ExactPoint<S>,
    b1: &ExactPoint<S>,
) -> bool {
    let o1 = orient(a0, a1, b0);
    let o2 = orient(a0, a1, b1);
    let o3 = orient(b0, b1, a0);
    let o4 = orient(b0, b1, a1);
    if o1 != o2 && o3 != o4 && o1 != Ordering::Equal && o2 != Ordering::Equal && o3 != Ordering::Equal && o4 != Ordering::Equal {
        return true;
    }
    on_segment(a0, a1, b0) || on_segment(a0, a1, b1) || on_segment(b0, b1, a0) || on_segment(b0, b1, a1)
}

fn validate_single<S: Scalar>(c: &ClosedPolyline<S>, out: &mut Vec<Violation>) {
    let n = c.vertices.len();
    if n < 3 {
        out.push(Violation::TooFewVertices { curve: c.name.clone() });
        return;
    }
    for i in 0..n {
        if c.vertices[i] == c.vertices[(i + 1) % n] {
            out.push(Violation::DegenerateVertex { curve: c.name.clone(), vertex: i });
            return;
        }
    }
    if twice_signed_area(c) <= S::zero() {
        out.push(Violation::BadOrientation { curve: c.name.clone() });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a0, a1) = c.segment(i);
            let (b0, b1) = c.segment(j);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Consecutive segments share one endpoint; any further contact
                // (collinear overlap or crossing) is a self-intersection.
                let shared = if j == i + 1 { a1 } else { a0 };
                let far_a = if j == i + 1 { a0 } else { a1 };
                let far_b = if j == i + 1 { b1 } else { b0 };
                if orient(shared, far_a, far_b) == Ordering::Equal
                    && (on_segment(a0, a1, far_b) || on_segment(b0, b1, far_a))
                {
                    out.push(Violation::SelfIntersection { curve: c.name.clone(), seg_a: i, seg_b: j });
                }
            } else if segments_touch(a0, a1, b0, b1) {
                out.push(Violation::SelfIntersection { curve: c.name.clone(), seg_a: i, seg_b: j });
            }
        }
    }
}

/// Check a family: every curve simple and counter-clockwise, all pairwise
/// contacts transversal segment-interior crossings, no three curves through a
/// point. Violations are reported, never repaired.
pub fn validate_general_position<S: Scalar>(curves: &[ClosedPolyline<S>]) -> ValidationReport {
    let mut out = Vec::new();
    for c in curves {
        validate_single(c, &mut out);
    }
    if !out.is_empty() {
        return ValidationReport { violations: out };
    }
    // Pairwise contacts.
    let mut seen: Vec<(ExactPoint<S>, usize, usize)> = Vec::new();
    for i in 0..curves.len() {
        for j in (i + 1)..curves.len() {
            let (a, b) = (&curves[i], &curves[j]);
            for (vi, v) in a.vertices.iter().enumerate() {
                for k in 0..b.vertices.len() {
                    let (b0, b1) = b.segment(k);
                    if on_segment(b0, b1, v) {
                        out.push(Violation::VertexOnForeignCurve {
                            curve: a.name.clone(),
                            vertex: vi,
                            other: b.name.clone(),
                        });
                    }
                }
            }
            for (vi, v) in b.vertices.iter().enumerate() {
                for k in 0..a.vertices.len() {
                    let (a0, a1) = a.segment(k);
                    if on_segment(a0, a1, v) {
                        out.push(Violation::VertexOnForeignCurve {
                            curve: b.name.clone(),
                            vertex: vi,
                            other: a.name.clone(),
                        });
                    }
                }
            }
            for si in 0..a.vertices.len() {
                for sj in 0..b.vertices.len() {
                    let (a0, a1) = a.segment(si);
                    let (b0, b1) = b.segment(sj);
                    if proper_crossing(a0, a1, b0, b1) {
                        let p = segment_intersection_point(a0, a1, b0, b1);
                        seen.push((p, i, j));
                    } else if segments_touch(a0, a1, b0, b1) {
                        out.push(Violation::NonTransversalContact {
                            curve_a: a.name.clone(),
                            curve_b: b.name.clone(),
                            seg_a: si,
                            seg_b: sj,
                        });
                    }
                }
            }
        }
    }
    // Crossings of distinct pairs sharing a point.
    seen.sort_by(|l, r| l.0.cmp(&r.0));
    for w in seen.windows(2) {
        if w[0].0 == w[1].0 && (w[0].1, w[0].2) != (w[1].1, w[1].2) {
            out.push(Violation::TriplePoint {
                x: format!("{:?}", w[0].0.x),
                y: format!("{:?}", w[0].0.y),
            });
        }
    }
    ValidationReport { violations: out }
}

/// Exact intersection point of two properly crossing segments.
pub fn segment_intersection_point<S: Scalar>(
    a0: &ExactPoint<S>,
    a1: &ExactPoint<S>,
    b0: &ExactPoint<S>,
    b1: &ExactPoint<S>,
) -> ExactPoint<S> {
    let (t, _) = segment_intersection_params(a0, a1, b0, b1);
    ExactPoint {
        x: a0.x.clone() + t.clone() * (a1.x.clone() - a0.x.clone()),
        y: a0.y.clone() + t * (a1.y.clone() - a0.y.clone()),
    }
}

/// Parameters `(t, u)` with the crossing at `a0 + t(a1-a0) = b0 + u(b1-b0)`.
pub fn segment_intersection_params<S: Scalar>(
    a0: &ExactPoint<S>,
    a1: &ExactPoint<S>,
    b0: &ExactPoint<S>,
    b1: &ExactPoint<S>,
) -> (S, S) {
    let rx = a1.x.clone() - a0.x.clone();
    let ry = a1.y.clone() - a0.y.clone();
    let sx = b1.x.clone() - b0.x.clone();
    let sy = b1.y.clone() - b0.y.clone();
    let denom = rx.clone() * sy.clone() - ry.clone() * sx.clone();
    assert!(!denom.is_zero(), "segments are parallel");
    let qpx = b0.x.clone() - a0.x.clone();
    let qpy = b0.y.clone() - a0.y.clone();
    let t = (qpx.clone() * sy - qpy.clone() * sx) / denom.clone();
    let u = (qpx * ry - qpy * rx) / denom;
    (t, u)
}

/// All transversal crossings of a generic pair, once ordered along each curve.
///
/// The two returned lists contain the same crossing set; the first is ordered
/// by traversal of `a` from vertex 0, the second by traversal of `b`.
pub fn intersect_pair<S: Scalar>(
    a: &ClosedPolyline<S>,
    b: &ClosedPolyline<S>,
) -> Result<(Vec<CrossingPoint<S>>, Vec<CrossingPoint<S>>), ValidationReport> {
    let report = validate_general_position(&[a.clone(), b.clone()]);
    if !report.ok() {
        return Err(report);
    }
    let mut found: Vec<CrossingPoint<S>> = Vec::new();
    for si in 0..a.vertices.len() {
        for sj in 0..b.vertices.len() {
            let (a0, a1) = a.segment(si);
            let (b0, b1) = b.segment(sj);
            if proper_crossing(a0, a1, b0, b1) {
                let (t, u) = segment_intersection_params(a0, a1, b0, b1);
                let dir_a = (a1.x.clone() - a0.x.clone(), a1.y.clone() - a0.y.clone());
                let dir_b = (b1.x.clone() - b0.x.clone(), b1.y.clone() - b0.y.clone());
                let sign = match orient_dirs(&dir_a, &dir_b) {
                    Ordering::Greater => 1,
                    Ordering::Less => -1,
                    Ordering::Equal => unreachable!("transversal crossing"),
                };
                found.push(CrossingPoint {
                    point: segment_intersection_point(a0, a1, b0, b1),
                    curve_a: a.name.clone(),
                    curve_b: b.name.clone(),
                    position_on_a: ArcPosition { segment: si, param: t },
                    position_on_b: ArcPosition { segment: sj, param: u },
                    sign,
                });
            }
        }
    }
    let mut along_a = found.clone();
    along_a.sort_by(|l, r| l.position_on_a.cmp(&r.position_on_a));
    let mut along_b = found;
    along_b.sort_by(|l, r| l.position_on_b.cmp(&r.position_on_b));
    Ok((along_a, along_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;
    use num_traits::FromPrimitive;
    use proptest::prelude::*;

    type P = ExactPoint<Rat>;
    type C = ClosedPolyline<Rat>;

    fn unit_square() -> C {
        C::from_ints("sq", &[(0, 0), (1, 0), (1, 1), (0, 1)])
    }

    #[test]
    fn area_of_unit_square() {
        assert_eq!(twice_signed_area(&unit_square()), Rat::from_i64(2).unwrap());
        let mut rev = unit_square();
        rev.vertices.reverse();
        assert_eq!(twice_signed_area(&rev), Rat::from_i64(-2).unwrap());
        let degenerate = C::from_ints("line", &[(0, 0), (1, 1), (2, 2)]);
        assert_eq!(twice_signed_area(&degenerate), Rat::from_i64(0).unwrap());
    }

    #[test]
    fn point_classification() {
        let sq = unit_square();
        let mid = P::new(Rat::new(1.into(), 2.into()), Rat::new(1.into(), 2.into()));
        assert_eq!(point_in_curve(&mid, &sq), Place::Inside);
        assert_eq!(point_in_curve(&P::from_ints(10, 10), &sq), Place::Outside);
        let edge_mid = P::new(Rat::new(1.into(), 2.into()), Rat::from_i64(0).unwrap());
        assert_eq!(point_in_curve(&edge_mid, &sq), Place::OnBoundary);
        // Vertex of the polyline itself counts as boundary.
        assert_eq!(point_in_curve(&P::from_ints(0, 0), &sq), Place::OnBoundary);
    }

    #[test]
    fn offset_squares_cross_twice() {
        let a = C::from_ints("a", &[(0, 0), (4, 0), (4, 4), (0, 4)]);
        let b = C::from_ints("b", &[(2, 2), (6, 2), (6, 6), (2, 6)]);
        assert!(validate_general_position(&[a.clone(), b.clone()]).ok());
        let (on_a, on_b) = intersect_pair(&a, &b).unwrap();
        assert_eq!(on_a.len(), 2);
        assert_eq!(on_b.len(), 2);
        let pts_a: Vec<_> = on_a.iter().map(|c| c.point.clone()).collect();
        let mut pts_b: Vec<_> = on_b.iter().map(|c| c.point.clone()).collect();
        pts_b.sort();
        let mut pts_a_sorted = pts_a.clone();
        pts_a_sorted.sort();
        assert_eq!(pts_a_sorted, pts_b);
    }

    #[test]
    fn shared_corner_is_a_violation() {
        let a = C::from_ints("a", &[(0, 0), (2, 0), (2, 2), (0, 2)]);
        let b = C::from_ints("b", &[(0, 0), (2, -2), (4, 0), (2, 2)]);
        let rep = validate_general_position(&[a, b]);
        assert!(!rep.ok());
    }

    #[test]
    fn full_shared_edge_is_nontransversal() {
        let a = C::from_ints("a", &[(0, 0), (2, 0), (2, 2), (0, 2)]);
        let b = C::from_ints("b", &[(2, 0), (4, 0), (4, 2), (2, 2)]);
        let rep = validate_general_position(&[a, b]);
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NonTransversalContact { .. } | Violation::VertexOnForeignCurve { .. })));
    }

    #[test]
    fn three_curves_through_one_point_rejected() {
        let d = C::from_ints("d", &[(-2, -2), (2, -2), (2, 2), (-2, 2)]);
        let e = C::from_ints("e", &[(1, -1), (5, -1), (5, 3), (1, 3)]);
        // d and e cross at (2, -1) mid-edge on both; f runs through it too.
        let f = C::from_ints("f", &[(0, -3), (4, 1), (-1, 3)]);
        assert!(on_segment(&P::from_ints(0, -3), &P::from_ints(4, 1), &P::from_ints(2, -1)));
        let rep = validate_general_position(&[d, e, f]);
        assert!(rep.violations.iter().any(|v| matches!(v, Violation::TriplePoint { .. })));
    }

    #[test]
    fn piercing_fixture_has_coincident_cyclic_orders() {
        let a = C::from_ints("a", &[(0, 0), (10, 0), (10, 10), (0, 10)]);
        let b = C::from_ints("b", &[(2, -5), (4, -5), (4, 15), (2, 15)]);
        let (on_a, on_b) = intersect_pair(&a, &b).unwrap();
        assert_eq!(on_a.len(), 4);
        assert_eq!(on_b.len(), 4);
    }

    proptest! {
        #[test]
        fn point_in_curve_matches_winding(px in -20i64..20, py in -20i64..20, r in 1i64..9, cx in -5i64..5, cy in -5i64..5) {
            // A convex octagon around (cx, cy).
            let pts = [
                (cx + r, cy), (cx + r, cy + r), (cx, cy + r), (cx - r, cy + r),
                (cx - r, cy), (cx - r, cy - r), (cx, cy - r), (cx + r, cy - r),
            ];
            let c = C::from_ints("c", &pts);
            let p = P::from_ints(px, py);
            match point_in_curve(&p, &c) {
                Place::OnBoundary => {}
                Place::Inside => prop_assert_eq!(winding_number(&p, &c), 1),
                Place::Outside => prop_assert_eq!(winding_number(&p, &c), 0),
            }
        }

        #[test]
        fn pair_crossings_are_even(ox in -3i64..3, oy in -3i64..3, w in 2i64..6) {
            let a = C::from_ints("a", &[(0, 0), (4, 0), (4, 4), (0, 4)]);
            let b = C::from_ints("b", &[(ox, oy), (ox + w, oy), (ox + w, oy + w), (ox, oy + w)]);
            if validate_general_position(&[a.clone(), b.clone()]).ok() {
                let (on_a, _) = intersect_pair(&a, &b).unwrap();
                prop_assert_eq!(on_a.len() % 2, 0);
            }
        }
    }
}
