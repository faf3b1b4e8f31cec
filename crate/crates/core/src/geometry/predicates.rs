//! Exact sign predicates. All arithmetic is done in `i128`; with coordinates
//! bounded by `2^MAX_COORD_BITS` no intermediate value can overflow.

use super::{GeometryError, Point};

/// Turn direction of the ordered triple `(p, q, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Ccw,
    Cw,
    Collinear,
}

/// Position of a query point relative to the circle through three points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CirclePosition {
    Inside,
    Outside,
    Cocircular,
}

/// Exact orientation of `(p, q, r)`: sign of the cross product
/// `(q - p) x (r - p)`.
pub fn orientation(p: Point, q: Point, r: Point) -> Orientation {
    let ux = q.x as i128 - p.x as i128;
    let uy = q.y as i128 - p.y as i128;
    let vx = r.x as i128 - p.x as i128;
    let vy = r.y as i128 - p.y as i128;
    match (ux * vy - uy * vx).signum() {
        1 => Orientation::Ccw,
        -1 => Orientation::Cw,
        _ => Orientation::Collinear,
    }
}

/// Exact incircle test: where does `d` lie relative to the circle through
/// `a`, `b`, `c`? The sign is normalized by the orientation of `(a, b, c)`,
/// so the answer does not depend on the order of the first three arguments.
/// A collinear defining triple is an error.
pub fn in_circle(a: Point, b: Point, c: Point, d: Point) -> Result<CirclePosition, GeometryError> {
    let orient = match orientation(a, b, c) {
        Orientation::Collinear => return Err(GeometryError::CollinearTriple(a, b, c)),
        Orientation::Ccw => 1i128,
        Orientation::Cw => -1i128,
    };
    let (ax, ay) = (a.x as i128 - d.x as i128, a.y as i128 - d.y as i128);
    let (bx, by) = (b.x as i128 - d.x as i128, b.y as i128 - d.y as i128);
    let (cx, cy) = (c.x as i128 - d.x as i128, c.y as i128 - d.y as i128);
    let am = ax * ax + ay * ay;
    let bm = bx * bx + by * by;
    let cm = cx * cx + cy * cy;
    let det = ax * (by * cm - bm * cy) - ay * (bx * cm - bm * cx) + am * (bx * cy - by * cx);
    Ok(match (det * orient).signum() {
        1 => CirclePosition::Inside,
        -1 => CirclePosition::Outside,
        _ => CirclePosition::Cocircular,
    })
}

/// Exact comparison of squared distances: `|p - a|^2` versus `|p - b|^2`.
pub fn cmp_dist2(p: Point, a: Point, b: Point) -> std::cmp::Ordering {
    let da = sq(p.x as i128 - a.x as i128) + sq(p.y as i128 - a.y as i128);
    let db = sq(p.x as i128 - b.x as i128) + sq(p.y as i128 - b.y as i128);
    da.cmp(&db)
}

fn sq(v: i128) -> i128 {
    v * v
}
