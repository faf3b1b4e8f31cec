//! Brute-force reference implementations for cross-checking the library's
//! oracles, sharing no code with its geometry kernel. Both predicates
//! reduce to one mechanism: positions on the bisector line of a candidate
//! pair are parameterized by a rational `t`, every competing requirement
//! (stay inside the square, stay at least as close to the pair as to a
//! third point) cuts the feasible interval, and the pair is an edge iff
//! the interval keeps positive length.
#![allow(dead_code)]

use std::collections::BTreeSet;

use cliquedt::{DelaunayEdge, Point, Square};
use num_rational::BigRational;
use num_traits::Zero;

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

/// Closed interval of the line parameter; `None` bounds are unbounded.
struct Interval {
    lo: Option<BigRational>,
    hi: Option<BigRational>,
    empty: bool,
}

impl Interval {
    fn full() -> Self {
        Interval {
            lo: None,
            hi: None,
            empty: false,
        }
    }

    /// Imposes `slope * t + intercept <= 0`.
    fn cut(&mut self, intercept: BigRational, slope: BigRational) {
        if self.empty {
            return;
        }
        if slope.is_zero() {
            if intercept > BigRational::zero() {
                self.empty = true;
            }
            return;
        }
        let bound = -intercept / &slope;
        if slope > BigRational::zero() {
            if self.hi.as_ref().is_none_or(|h| bound < *h) {
                self.hi = Some(bound);
            }
        } else if self.lo.as_ref().is_none_or(|l| bound > *l) {
            self.lo = Some(bound);
        }
        if let (Some(l), Some(h)) = (&self.lo, &self.hi) {
            if l > h {
                self.empty = true;
            }
        }
    }

    /// Strictly more than one feasible point left?
    fn positive_length(&self) -> bool {
        if self.empty {
            return false;
        }
        match (&self.lo, &self.hi) {
            (Some(l), Some(h)) => l < h,
            _ => true,
        }
    }
}

/// Feasible parameter interval for positions `mid + t * perp` on the
/// bisector of (u, v) that are no farther from u than from any other
/// listed point, optionally restricted to a square.
fn bisector_interval(u: Point, v: Point, others: &[Point], square: Option<Square>) -> Interval {
    let half = BigRational::new(1.into(), 2.into());
    let midx = rat(u.x + v.x) * &half;
    let midy = rat(u.y + v.y) * &half;
    let dx = rat(-(v.y - u.y));
    let dy = rat(v.x - u.x);
    let mut iv = Interval::full();
    if let Some(sq) = square {
        // x0 <= midx + t*dx <= x1, and the same along y.
        iv.cut(rat(sq.x0) - &midx, -dx.clone());
        iv.cut(&midx - rat(sq.x1), dx.clone());
        iv.cut(rat(sq.y0) - &midy, -dy.clone());
        iv.cut(&midy - rat(sq.y1), dy.clone());
    }
    for &w in others {
        if w == u || w == v {
            continue;
        }
        // |p - u|^2 - |p - w|^2 at p = mid + t*d is linear in t: the
        // quadratic term is shared and cancels.
        let du = (&midx - rat(u.x), &midy - rat(u.y));
        let dw = (&midx - rat(w.x), &midy - rat(w.y));
        let intercept = (&du.0 * &du.0 + &du.1 * &du.1) - (&dw.0 * &dw.0 + &dw.1 * &dw.1);
        let slope = rat(2) * (&dx * rat(w.x - u.x) + &dy * rat(w.y - u.y));
        iv.cut(intercept, slope);
        if iv.empty {
            return iv;
        }
    }
    iv
}

fn pairs(points: &[Point], square: Option<Square>) -> BTreeSet<DelaunayEdge> {
    let mut out = BTreeSet::new();
    for (i, &u) in points.iter().enumerate() {
        for &v in &points[i + 1..] {
            if bisector_interval(u, v, points, square).positive_length() {
                out.insert(DelaunayEdge::new(u, v));
            }
        }
    }
    out
}

/// All Delaunay edges of `points`: pairs admitting a circle through both
/// that strictly excludes every other point.
pub fn brute_delaunay(points: &[Point]) -> BTreeSet<DelaunayEdge> {
    pairs(points, None)
}

/// All pairs whose Voronoi cells share a positive-length piece of
/// boundary inside the closed square.
pub fn brute_dual_edges(points: &[Point], square: Square) -> BTreeSet<DelaunayEdge> {
    pairs(points, Some(square))
}
