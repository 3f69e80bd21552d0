//! Named reference arrangements with machine-checked expected properties.

use crate::arrangement::build_arrangement;
use crate::geom::ClosedPolyline;
use crate::invariants;
use crate::sweep::{find_candidates, SweepMode, SweepOp};
use crate::Rat;

type C = ClosedPolyline<Rat>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureName {
    OffsetSquares,
    NestedPair,
    PiercingPair,
    TriangleOnSweep,
    Fig8,
    Fig15,
}

impl FixtureName {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "offset-squares" | "offsetsquares" => Self::OffsetSquares,
            "nested-pair" | "nestedpair" => Self::NestedPair,
            "piercing-pair" | "piercingpair" => Self::PiercingPair,
            "triangle" | "triangle-on-sweep" => Self::TriangleOnSweep,
            "fig8" => Self::Fig8,
            "fig15" => Self::Fig15,
            _ => return None,
        })
    }

    pub fn all() -> [FixtureName; 6] {
        [
            Self::OffsetSquares,
            Self::NestedPair,
            Self::PiercingPair,
            Self::TriangleOnSweep,
            Self::Fig8,
            Self::Fig15,
        ]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::OffsetSquares => "offset-squares",
            Self::NestedPair => "nested-pair",
            Self::PiercingPair => "piercing-pair",
            Self::TriangleOnSweep => "triangle-on-sweep",
            Self::Fig8 => "fig8",
            Self::Fig15 => "fig15",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: FixtureName,
    pub curves: Vec<C>,
    pub sweep: &'static str,
    /// A point inside the sweep curve, off every curve.
    pub inner_point: (i64, i64),
}

#[derive(Debug, thiserror::Error)]
#[error("fixture {name} failed its self-check: {detail}")]
pub struct FixtureError {
    pub name: &'static str,
    pub detail: String,
}

fn sq(name: &str, x0: i64, y0: i64, x1: i64, y1: i64) -> C {
    C::from_ints(name, &[(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
}

/// Load a fixture and verify its expected properties.
pub fn load(name: FixtureName) -> Result<Fixture, FixtureError> {
    let fx = match name {
        FixtureName::OffsetSquares => Fixture {
            name,
            curves: vec![sq("gamma", 0, 0, 4, 4), sq("alpha", 2, 2, 6, 6)],
            sweep: "gamma",
            inner_point: (1, 1),
        },
        FixtureName::NestedPair => Fixture {
            name,
            curves: vec![sq("gamma", 0, 0, 10, 10), sq("alpha", 3, 3, 7, 7)],
            sweep: "gamma",
            inner_point: (1, 1),
        },
        FixtureName::PiercingPair => Fixture {
            name,
            curves: vec![sq("gamma", 0, 0, 10, 10), sq("alpha", 2, -5, 4, 15)],
            sweep: "gamma",
            inner_point: (7, 7),
        },
        FixtureName::TriangleOnSweep => Fixture {
            name,
            curves: vec![
                sq("gamma", 0, 0, 20, 20),
                sq("alpha", 4, 4, 12, 24),
                sq("beta", 8, 5, 16, 25),
            ],
            sweep: "gamma",
            inner_point: (2, 2),
        },
        FixtureName::Fig8 => fig8(),
        FixtureName::Fig15 => fig15(),
    };
    check(&fx)?;
    Ok(fx)
}

fn err(name: FixtureName, detail: impl Into<String>) -> FixtureError {
    FixtureError { name: name.as_str(), detail: detail.into() }
}

fn check(fx: &Fixture) -> Result<(), FixtureError> {
    let point = crate::geom::ExactPoint::from_ints(fx.inner_point.0, fx.inner_point.1);
    let arr = build_arrangement(fx.curves.clone(), fx.sweep, vec![("P".into(), point)])
        .map_err(|e| err(fx.name, format!("build failed: {e}")))?;
    let p = arr.tracked_by_name("P").unwrap();
    if !arr.cell_inside(arr.tracked_cell(p), arr.sweep_curve()) {
        return Err(err(fx.name, "inner point is not inside the sweep curve"));
    }
    let rep = invariants::family_report(&arr);
    match fx.name {
        FixtureName::OffsetSquares => {
            if !(rep.is_nonpiercing && rep.max_pairwise_crossings == 2) {
                return Err(err(fx.name, format!("unexpected report {rep:?}")));
            }
        }
        FixtureName::NestedPair => {
            if !(rep.is_nonpiercing && rep.max_pairwise_crossings == 0) {
                return Err(err(fx.name, format!("unexpected report {rep:?}")));
            }
        }
        FixtureName::PiercingPair => {
            if rep.is_nonpiercing || rep.max_pairwise_crossings != 4 {
                return Err(err(fx.name, format!("expected a piercing 4-crossing pair, got {rep:?}")));
            }
        }
        FixtureName::TriangleOnSweep => {
            let cands = find_candidates(&arr, SweepMode::NonPiercing, Some(p));
            if !cands.iter().any(|c| matches!(c, SweepOp::BypassTriangle { .. })) {
                return Err(err(fx.name, "no triangle cell on the sweep curve"));
            }
        }
        FixtureName::Fig8 => {
            if !rep.is_nonpiercing {
                return Err(err(fx.name, format!("family must be non-piercing: {rep:?}")));
            }
            let cands = find_candidates(&arr, SweepMode::NonPiercing, Some(p));
            if cands.is_empty() || !cands.iter().all(|c| matches!(c, SweepOp::BypassVertex { .. })) {
                return Err(err(
                    fx.name,
                    format!("expected only vertex bypasses, got {cands:?}"),
                ));
            }
            if cands.len() != 2 {
                return Err(err(fx.name, format!("expected two bypassable vertices, got {}", cands.len())));
            }
        }
        FixtureName::Fig15 => {
            if !rep.is_nonpiercing || rep.max_pairwise_crossings != 4 {
                return Err(err(
                    fx.name,
                    format!("expected a non-piercing 4-intersecting family, got {rep:?}"),
                ));
            }
        }
    }
    Ok(())
}

/// A non-piercing family in which the only available sweeping operations are
/// the two vertex bypasses. Coordinates reconstruct the published picture
/// combinatorially; the loader certifies the properties that matter.
fn fig8() -> Fixture {
    unimplemented!("constructed in the fixture phase")
}

/// A 4-intersecting non-piercing family whose sweep forces six crossings with
/// one curve.
fn fig15() -> Fixture {
    unimplemented!("constructed in the fixture phase")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_fixtures_load() {
        for name in [
            FixtureName::OffsetSquares,
            FixtureName::NestedPair,
            FixtureName::PiercingPair,
            FixtureName::TriangleOnSweep,
        ] {
            load(name).unwrap();
        }
    }
}
