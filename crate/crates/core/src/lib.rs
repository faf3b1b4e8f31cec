//! Exact-arithmetic Delaunay/Voronoi toolkit driven over a simulated
//! congested clique.
//!
//! The crate has three layers:
//!
//! * a geometry kernel over integer dyadic coordinates with exact sign
//!   predicates, a Delaunay edge oracle, and Voronoi regions clipped to an
//!   axis-aligned square ([`geometry`], [`grid`], [`smoothness`]);
//! * a deterministic round-based clique simulator that enforces per-round
//!   message budgets and routing/sorting quotas while charging rounds,
//!   messages, and bits to a cost ledger ([`sim`]);
//! * a distributed protocol that computes the Delaunay edges dual to the
//!   Voronoi diagram inside the unit square for `n^2` points on `n` nodes,
//!   plus the per-site Voronoi regions reconstructed from those edges
//!   ([`protocol`]).
//!
//! All coordinates are numerators over a global power-of-two denominator
//! `2^bits`, so every predicate and construction is exact. Runs are fully
//! deterministic: same input and configuration, same outputs bit for bit.

pub mod formats;
pub mod geometry;
pub mod grid;
pub mod protocol;
pub mod sim;
pub mod smoothness;

pub use geometry::{Point, DelaunayEdge, Square};

/// Largest supported coordinate bit width. Keeps every predicate within
/// `i128` range (incircle terms stay below 2^125) and every wire key within
/// `u128`.
pub const MAX_COORD_BITS: u32 = 28;

/// `ceil(log2(n))` for `n >= 1`, the number of bits needed to address `n`
/// distinct values.
pub fn ceil_log2(n: u64) -> u32 {
    debug_assert!(n >= 1);
    64 - n.saturating_sub(1).leading_zeros()
}
