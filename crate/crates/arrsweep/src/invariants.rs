//! Crossing sequences, the reverse-cyclic test, and family certification.
//!
//! The combinatorial non-piercing test reads crossing orders off the map and
//! therefore stays valid after surgery. The geometric connectivity oracle is
//! an independent route used to cross-check it while geometry is live.

use crate::arrangement::{Arrangement, CrossingId, CurveId, Dir};
use crate::geom::ClosedPolyline;
use crate::Scalar;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Cyclic order of the crossings of one pair along one curve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossingSequence {
    pub curve: CurveId,
    pub other: CurveId,
    pub entries: Vec<CrossingId>,
}

pub fn crossing_sequence<S: Scalar>(arr: &Arrangement<S>, a: CurveId, b: CurveId) -> CrossingSequence {
    CrossingSequence { curve: a, other: b, entries: arr.pair_sequence(a, b) }
}

#[derive(Debug, thiserror::Error)]
pub enum SequenceError {
    #[error("sequences are over different crossing sets")]
    EntryMismatch,
}

/// Is `t` the reverse of `s` up to cyclic rotation?
///
/// Sequences of length at most two are always reverse-cyclic.
pub fn is_reverse_cyclic(s: &CrossingSequence, t: &CrossingSequence) -> Result<bool, SequenceError> {
    let mut ms: Vec<CrossingId> = s.entries.clone();
    let mut mt: Vec<CrossingId> = t.entries.clone();
    ms.sort_unstable();
    mt.sort_unstable();
    if ms != mt {
        return Err(SequenceError::EntryMismatch);
    }
    let n = s.entries.len();
    if n <= 2 {
        return Ok(true);
    }
    let rev: Vec<CrossingId> = t.entries.iter().rev().copied().collect();
    for shift in 0..n {
        if (0..n).all(|i| s.entries[i] == rev[(i + shift) % n]) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Combinatorial non-piercing test for one pair.
pub fn nonpiercing_pair<S: Scalar>(arr: &Arrangement<S>, a: CurveId, b: CurveId) -> bool {
    let s = crossing_sequence(arr, a, b);
    let t = crossing_sequence(arr, b, a);
    is_reverse_cyclic(&s, &t).expect("sequences over the same pair")
}

/// Geometric ground truth: both differences of the two bounded regions are
/// path-connected. Builds the two-curve arrangement and floods faces across
/// the arcs that stay interior to each difference.
pub fn nonpiercing_oracle<S: Scalar>(a: &ClosedPolyline<S>, b: &ClosedPolyline<S>) -> Result<bool, String> {
    let mut a = a.clone();
    let mut b = b.clone();
    a.name = "a".into();
    b.name = "b".into();
    let arr = crate::arrangement::build_arrangement(vec![a, b], "a", Vec::new())
        .map_err(|e| format!("oracle build failed: {e}"))?;
    let ca = arr.curve_by_name("a").unwrap();
    let cb = arr.curve_by_name("b").unwrap();
    Ok(difference_connected(&arr, ca, cb) && difference_connected(&arr, cb, ca))
}

/// Is `inside(a) \ closure(inside(b))` connected, where connectivity may pass
/// through arcs of `b` (they belong to the difference) but never through `a`?
fn difference_connected<S: Scalar>(arr: &Arrangement<S>, a: CurveId, b: CurveId) -> bool {
    let cells: Vec<u32> = arr
        .cell_ids()
        .filter(|&f| arr.cell_inside(f, a) && !arr.cell_inside(f, b))
        .map(|f| f.0)
        .collect();
    if cells.len() <= 1 {
        return true;
    }
    let in_set: BTreeSet<u32> = cells.iter().copied().collect();
    let mut adj: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (&d, data) in &arr.derived().darts {
        if d.curve != b || d.dir != Dir::Forward {
            continue;
        }
        let me = arr.cycle(data.cycle).cell.0;
        let other = arr.cell_of_dart(data.twin).0;
        if in_set.contains(&me) && in_set.contains(&other) {
            adj.entry(me).or_default().push(other);
            adj.entry(other).or_default().push(me);
        }
    }
    let mut seen = BTreeSet::new();
    let mut q = VecDeque::new();
    seen.insert(cells[0]);
    q.push_back(cells[0]);
    while let Some(f) = q.pop_front() {
        for &g in adj.get(&f).into_iter().flatten() {
            if seen.insert(g) {
                q.push_back(g);
            }
        }
    }
    seen.len() == cells.len()
}

/// Family-level certification.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub max_pairwise_crossings: usize,
    pub is_two_intersecting: bool,
    pub is_nonpiercing: bool,
    pub offending_pairs: Vec<(String, String)>,
    /// Crossings with the sweep curve, per other curve.
    pub sweep_crossings: BTreeMap<String, usize>,
}

pub fn family_report<S: Scalar>(arr: &Arrangement<S>) -> FamilyReport {
    let mut max_k = 0;
    let mut offending = Vec::new();
    let ids: Vec<CurveId> = arr.curve_ids().collect();
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            let k = arr.pair_sequence(a, b).len();
            max_k = max_k.max(k);
            if !nonpiercing_pair(arr, a, b) {
                offending.push((arr.curve_name(a).to_string(), arr.curve_name(b).to_string()));
            }
        }
    }
    let g = arr.sweep_curve();
    let mut sweep_crossings = BTreeMap::new();
    for &c in &ids {
        if c != g {
            sweep_crossings.insert(arr.curve_name(c).to_string(), arr.pair_sequence(g, c).len());
        }
    }
    FamilyReport {
        max_pairwise_crossings: max_k,
        is_two_intersecting: max_k <= 2,
        is_nonpiercing: offending.is_empty(),
        offending_pairs: offending,
        sweep_crossings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::build_arrangement;
    use crate::geom::ClosedPolyline;
    use crate::Rat;

    type C = ClosedPolyline<Rat>;

    fn seq(curve: u32, other: u32, entries: &[u32]) -> CrossingSequence {
        CrossingSequence {
            curve: CurveId(curve),
            other: CurveId(other),
            entries: entries.iter().map(|&i| CrossingId(i)).collect(),
        }
    }

    #[test]
    fn reverse_cyclic_basics() {
        assert!(is_reverse_cyclic(&seq(0, 1, &[1, 2]), &seq(1, 0, &[2, 1])).unwrap());
        assert!(is_reverse_cyclic(&seq(0, 1, &[1, 2, 3, 4]), &seq(1, 0, &[4, 3, 2, 1])).unwrap());
        assert!(!is_reverse_cyclic(&seq(0, 1, &[1, 2, 3, 4]), &seq(1, 0, &[1, 2, 3, 4])).unwrap());
        assert!(is_reverse_cyclic(&seq(0, 1, &[]), &seq(1, 0, &[])).unwrap());
        assert!(is_reverse_cyclic(&seq(0, 1, &[1, 2, 3, 4]), &seq(1, 0, &[3, 2, 1, 4])).unwrap());
        assert!(matches!(
            is_reverse_cyclic(&seq(0, 1, &[1, 2]), &seq(1, 0, &[1, 3])),
            Err(SequenceError::EntryMismatch)
        ));
    }

    #[test]
    fn offset_squares_are_nonpiercing() {
        let a = C::from_ints("a", &[(0, 0), (4, 0), (4, 4), (0, 4)]);
        let b = C::from_ints("b", &[(2, 2), (6, 2), (6, 6), (2, 6)]);
        let arr = build_arrangement(vec![a.clone(), b.clone()], "a", Vec::new()).unwrap();
        let (ca, cb) = (arr.curve_by_name("a").unwrap(), arr.curve_by_name("b").unwrap());
        assert!(nonpiercing_pair(&arr, ca, cb));
        assert!(nonpiercing_oracle(&a, &b).unwrap());
        let rep = family_report(&arr);
        assert!(rep.is_nonpiercing && rep.is_two_intersecting);
        assert_eq!(rep.max_pairwise_crossings, 2);
    }

    #[test]
    fn slab_pierces_square() {
        let a = C::from_ints("a", &[(0, 0), (10, 0), (10, 10), (0, 10)]);
        let b = C::from_ints("b", &[(2, -5), (4, -5), (4, 15), (2, 15)]);
        let arr = build_arrangement(vec![a.clone(), b.clone()], "a", Vec::new()).unwrap();
        let (ca, cb) = (arr.curve_by_name("a").unwrap(), arr.curve_by_name("b").unwrap());
        assert!(!nonpiercing_pair(&arr, ca, cb));
        assert!(!nonpiercing_oracle(&a, &b).unwrap());
        assert!(!family_report(&arr).is_nonpiercing);
    }

    #[test]
    fn nested_disjoint_squares_are_nonpiercing() {
        let a = C::from_ints("a", &[(0, 0), (10, 0), (10, 10), (0, 10)]);
        let b = C::from_ints("b", &[(3, 3), (7, 3), (7, 7), (3, 7)]);
        let arr = build_arrangement(vec![a.clone(), b.clone()], "a", Vec::new()).unwrap();
        let (ca, cb) = (arr.curve_by_name("a").unwrap(), arr.curve_by_name("b").unwrap());
        assert!(nonpiercing_pair(&arr, ca, cb));
        assert!(nonpiercing_oracle(&a, &b).unwrap());
    }
}
