//! Exact rational points used for Voronoi vertices and region boundaries.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::Point;

/// A point with exact rational coordinates, in the same numerator scale as
/// [`Point`] (the global denominator `2^bits` stays implicit).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatPoint {
    pub x: BigRational,
    pub y: BigRational,
}

impl RatPoint {
    pub fn new(x: BigRational, y: BigRational) -> Self {
        RatPoint { x, y }
    }

    pub fn from_point(p: Point) -> Self {
        RatPoint {
            x: BigRational::from_integer(BigInt::from(p.x)),
            y: BigRational::from_integer(BigInt::from(p.y)),
        }
    }

    pub fn from_ints(x: impl Into<i128>, y: impl Into<i128>) -> Self {
        RatPoint {
            x: BigRational::from_integer(BigInt::from(x.into())),
            y: BigRational::from_integer(BigInt::from(y.into())),
        }
    }

    /// Exact squared distance to an integer point.
    pub fn dist2_to(&self, p: Point) -> BigRational {
        let dx = &self.x - BigRational::from_integer(BigInt::from(p.x));
        let dy = &self.y - BigRational::from_integer(BigInt::from(p.y));
        &dx * &dx + &dy * &dy
    }
}

impl std::fmt::Display for RatPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Ordering on exact rationals, shorthand for comparisons against integers.
pub fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Signed area (shoelace) of a polygon given by its vertices in order.
/// Positive for counterclockwise orientation.
pub fn polygon_signed_area(vertices: &[RatPoint]) -> BigRational {
    let mut acc = BigRational::zero();
    let k = vertices.len();
    for i in 0..k {
        let a = &vertices[i];
        let b = &vertices[(i + 1) % k];
        acc += &a.x * &b.y - &b.x * &a.y;
    }
    acc / rat(2)
}

/// True if the polygon is strictly counterclockwise (positive area).
pub fn polygon_is_ccw(vertices: &[RatPoint]) -> bool {
    polygon_signed_area(vertices).is_positive()
}
