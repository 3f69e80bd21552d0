//! Combinatorial sweeping and surgery for arrangements of oriented Jordan curves.
//!
//! Curves are closed simple polylines with exact rational coordinates, oriented
//! counter-clockwise. An [`arrangement::Arrangement`] stores the arrangement of a
//! curve family as cyclic crossing walks plus crossing signs; darts, faces, cells
//! and the nesting forest are derived from that state and regenerated after every
//! mutation. The `sweep` module shrinks a designated curve by discrete operations
//! (take a loop, bypass a digon cell, bypass a triangle cell, bypass a visible
//! vertex), `surgery` edits non-sweep curves (minimal digon and minimal triangle
//! bypassing), and `support` builds planar supports for points in non-piercing
//! regions on top of the sweep engine.

use num_traits::{FromPrimitive, Signed};

pub mod arrangement;
pub mod geom;
pub mod harness;
pub mod invariants;
pub mod support;
pub mod surgery;
pub mod sweep;

/// Exact scalar for geometric predicates.
///
/// `Ord` is required on purpose: every predicate in this crate is exact, so
/// floating point types do not qualify. Rationals (`num_rational::Ratio`) do.
pub trait Scalar: Clone + Ord + Signed + FromPrimitive + std::fmt::Debug {}

impl<T> Scalar for T where T: Clone + Ord + Signed + FromPrimitive + std::fmt::Debug {}

/// Canonical exact scalar used by the CLI and fixtures.
pub type Rat = num_rational::BigRational;

/// Exact point with [`Rat`] coordinates.
pub type RatPoint = geom::ExactPoint<Rat>;

/// Input curve with [`Rat`] coordinates.
pub type RatCurve = geom::ClosedPolyline<Rat>;

/// Arrangement over [`Rat`] geometry.
pub type RatArrangement = arrangement::Arrangement<Rat>;

/// Parse a rational from `"n/d"` or `"n"` form.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: num_bigint::BigInt = n.parse().map_err(|e| format!("bad numerator {s:?}: {e}"))?;
    let d: num_bigint::BigInt = d.parse().map_err(|e| format!("bad denominator {s:?}: {e}"))?;
    if d == num_bigint::BigInt::from(0) {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rat::new(n, d))
}

/// Format a rational as `"n/d"`.
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
