//! General-position validation: pairwise distinct, no three collinear, no
//! four cocircular.
//!
//! Collinear triples are found by sorting, per pivot point, the directions
//! to all lexicographically later points: the pivot of a collinear triple
//! is its smallest member, so two equal canonical directions expose it.
//! Cocircular quadruples are found per point pair: circles through a fixed
//! pair form a one-parameter family (center sliding along the pair's
//! bisector), each third point picks one parameter value, and two equal
//! values expose a quadruple. Costs are O(N^2 log N) and O(N^3 log N), so
//! callers gate full validation at [`GP_CHECK_LIMIT`] points and rely on
//! the exact predicates to catch violations lazily beyond that.

use num_integer::Integer;

use super::{GeometryError, Point};

/// Largest set size for which callers run the full validation eagerly.
/// Larger inputs still fail loudly: every degenerate configuration that a
/// downstream computation actually touches trips an exact predicate.
pub const GP_CHECK_LIMIT: usize = 2000;

/// Checks that `points` are pairwise distinct with no three collinear and
/// no four cocircular, returning the first witness found.
pub fn validate_general_position(points: &[Point]) -> Result<(), GeometryError> {
    let mut sorted: Vec<Point> = points.to_vec();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(GeometryError::DuplicatePoint(w[0]));
        }
    }
    find_collinear_triple(&sorted)?;
    find_cocircular_quadruple(&sorted)?;
    Ok(())
}

/// Canonical direction from a pivot to a lexicographically later point:
/// gcd-reduced, and always in the closed right half-plane (dx > 0, or
/// dx = 0 with dy > 0), so parallel means equal.
fn canonical_direction(from: Point, to: Point) -> (i64, i64) {
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    debug_assert!(dx > 0 || (dx == 0 && dy > 0));
    let g = dx.gcd(&dy);
    (dx / g, dy / g)
}

fn find_collinear_triple(sorted: &[Point]) -> Result<(), GeometryError> {
    for (i, &p) in sorted.iter().enumerate() {
        let mut dirs: Vec<((i64, i64), Point)> = sorted[i + 1..]
            .iter()
            .map(|&q| (canonical_direction(p, q), q))
            .collect();
        dirs.sort();
        for w in dirs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(GeometryError::CollinearTriple(p, w[0].1, w[1].1));
            }
        }
    }
    Ok(())
}

/// For the pair (p, q), the circle through p, q, and r has its center at
/// m + t * rot90(q - p) on the pair's bisector (m the midpoint). This
/// returns t as a reduced fraction with positive denominator. Fails on a
/// collinear (p, q, r), which the collinear scan has already excluded.
fn pencil_parameter(p: Point, q: Point, r: Point) -> Result<(i128, i128), GeometryError> {
    let (px, py) = (i128::from(p.x), i128::from(p.y));
    let (qx, qy) = (i128::from(q.x), i128::from(q.y));
    let (rx, ry) = (i128::from(r.x), i128::from(r.y));
    let (ex, ey) = (qx - px, qy - py);
    let (fx, fy) = (rx - px, ry - py);
    let den = 2 * (ex * fy - ey * fx);
    if den == 0 {
        return Err(GeometryError::CollinearTriple(p, q, r));
    }
    let num = (rx * rx + ry * ry) - (px * px + py * py) - ((px + qx) * fx + (py + qy) * fy);
    let g = num.gcd(&den);
    let (mut n, mut d) = (num / g, den / g);
    if d < 0 {
        n = -n;
        d = -d;
    }
    Ok((n, d))
}

fn find_cocircular_quadruple(sorted: &[Point]) -> Result<(), GeometryError> {
    let n = sorted.len();
    for i in 0..n {
        for j in i + 1..n {
            let (p, q) = (sorted[i], sorted[j]);
            let mut params: Vec<((i128, i128), Point)> = Vec::with_capacity(n - 2);
            for &r in sorted {
                if r == p || r == q {
                    continue;
                }
                params.push((pencil_parameter(p, q, r)?, r));
            }
            params.sort();
            for w in params.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(GeometryError::CocircularQuadruple(p, q, w[0].1, w[1].1));
                }
            }
        }
    }
    Ok(())
}
