//! Perpendicular bisectors of point pairs as exact integer line equations.

use super::{GeometryError, Point};

/// The perpendicular bisector of two points `u`, `v`, stored as the integer
/// line equation `a*x + b*y = c` (in numerator coordinates). Points with
/// `a*x + b*y < c` are strictly closer to `u`; points with `> c` are strictly
/// closer to `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bisector {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl Bisector {
    /// Signed evaluation at an integer point: negative on `u`'s side.
    pub fn eval(&self, p: Point) -> i128 {
        self.a * p.x as i128 + self.b * p.y as i128 - self.c
    }
}

/// Builds the bisector of the distinct points `u` and `v`.
///
/// Derivation: `|p-u|^2 = |p-v|^2` expands to
/// `2(v-u) . p = |v|^2 - |u|^2`, so `a = 2(vx-ux)`, `b = 2(vy-uy)`,
/// `c = vx^2 + vy^2 - ux^2 - uy^2`.
pub fn bisector(u: Point, v: Point) -> Result<Bisector, GeometryError> {
    if u == v {
        return Err(GeometryError::DuplicatePoint(u));
    }
    let (ux, uy) = (u.x as i128, u.y as i128);
    let (vx, vy) = (v.x as i128, v.y as i128);
    Ok(Bisector {
        a: 2 * (vx - ux),
        b: 2 * (vy - uy),
        c: vx * vx + vy * vy - ux * ux - uy * uy,
    })
}
