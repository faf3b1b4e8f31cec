//! Exact geometry on points with integer numerators over a global
//! power-of-two denominator.
//!
//! Every function in this module works purely on the integer numerators; the
//! denominator `2^bits` is implicit and cancels out of all sign computations,
//! so results are invariant under scaling all coordinates by a common power
//! of two.

mod bisector;
mod delaunay;
mod gp;
mod oracle;
mod predicates;
mod rational;
mod region;

pub use bisector::{bisector, Bisector};
pub use delaunay::{delaunay_oracle, Triangulation};
pub use gp::{validate_general_position, GP_CHECK_LIMIT};
pub use oracle::{
    circumcenter, dual_edges_within_square, regions_dual_edges, voronoi_edge_in_square,
    voronoi_in_square_oracle,
};
pub use predicates::{in_circle, orientation, CirclePosition, Orientation};
pub use rational::{polygon_is_ccw, polygon_signed_area, RatPoint};
pub use region::{ArcKind, RegionArc, VoronoiRegion};

use thiserror::Error;

/// A point given by integer numerators; the actual location is
/// `(x, y) / 2^bits` for a globally agreed bit width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Unordered Delaunay edge stored canonically: `u` is the lexicographically
/// smaller endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DelaunayEdge {
    pub u: Point,
    pub v: Point,
}

impl DelaunayEdge {
    /// Builds the canonical form of the edge `{a, b}`.
    pub fn new(a: Point, b: Point) -> Self {
        debug_assert_ne!(a, b);
        if a <= b {
            DelaunayEdge { u: a, v: b }
        } else {
            DelaunayEdge { u: b, v: a }
        }
    }
}

impl std::fmt::Display for DelaunayEdge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} -- {}", self.u, self.v)
    }
}

/// Closed axis-aligned square (or rectangle) in numerator coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Square {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Square {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        debug_assert!(x0 < x1 && y0 < y1);
        Square { x0, y0, x1, y1 }
    }

    /// The unit square `[0, 2^bits]^2` in numerator coordinates.
    pub fn unit(bits: u32) -> Self {
        let side = 1i64 << bits;
        Square { x0: 0, y0: 0, x1: side, y1: side }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.x0 <= p.x && p.x <= self.x1 && self.y0 <= p.y && p.y <= self.y1
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("need at least two distinct points, got {0}")]
    TooFewPoints(usize),
    #[error("duplicate point {0}")]
    DuplicatePoint(Point),
    #[error("collinear triple {0}, {1}, {2}")]
    CollinearTriple(Point, Point, Point),
    #[error("cocircular quadruple {0}, {1}, {2}, {3}")]
    CocircularQuadruple(Point, Point, Point, Point),
    #[error("point {0} lies outside the target square")]
    PointOutsideSquare(Point),
    #[error("edge list is inconsistent: {0}")]
    InconsistentEdges(String),
}
