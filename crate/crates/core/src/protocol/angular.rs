//! Exact angular ordering of directions around a site.
//!
//! Region reconstruction sorts a site's neighbors counterclockwise by the
//! direction from the site, starting at the positive x-axis. The order is
//! computed exactly: directions are first bucketed by which axis sector
//! they fall in, then compared within a sector by the sign of their cross
//! product. No floating point is involved.

use std::cmp::Ordering;

use crate::Point;

/// The direction from a site to a neighbor, compared by counterclockwise
/// angle from the positive x-axis in `[0, 2*pi)`. Two keys compare equal
/// only for parallel same-sign directions, which for distinct neighbors of
/// one site means a collinear triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngleKey {
    pub dx: i64,
    pub dy: i64,
}

impl AngleKey {
    pub fn between(site: Point, neighbor: Point) -> Self {
        let key = AngleKey {
            dx: neighbor.x - site.x,
            dy: neighbor.y - site.y,
        };
        assert!(
            key.dx != 0 || key.dy != 0,
            "angle key between coincident points"
        );
        key
    }

    /// Index of the axis sector the direction falls in, walking
    /// counterclockwise from the positive x-axis: even indices are the four
    /// axes themselves, odd indices the open quadrants between them.
    fn sector(&self) -> u8 {
        match (self.dx.signum(), self.dy.signum()) {
            (1, 0) => 0,
            (1, 1) => 1,
            (0, 1) => 2,
            (-1, 1) => 3,
            (-1, 0) => 4,
            (-1, -1) => 5,
            (0, -1) => 6,
            (1, -1) => 7,
            _ => unreachable!("zero direction"),
        }
    }

    fn cross(&self, other: &AngleKey) -> i128 {
        (self.dx as i128) * (other.dy as i128) - (self.dy as i128) * (other.dx as i128)
    }
}

impl Ord for AngleKey {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.sector().cmp(&other.sector()) {
            Ordering::Equal => {}
            unequal => return unequal,
        }
        // Within one sector both directions span less than a quarter turn,
        // so the cross product sign decides: positive means `other` is
        // counterclockwise of `self`.
        match self.cross(other).signum() {
            1 => Ordering::Less,
            -1 => Ordering::Greater,
            _ => Ordering::Equal,
        }
    }
}

impl PartialOrd for AngleKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_full_turn_of_directions_sorts_counterclockwise() {
        let site = Point::new(0, 0);
        // Sixteen directions listed in true angular order.
        let turn = [
            (5, 0),
            (5, 1),
            (5, 3),
            (1, 1),
            (3, 5),
            (1, 5),
            (0, 5),
            (-1, 5),
            (-1, 1),
            (-5, 3),
            (-5, 0),
            (-5, -1),
            (-1, -1),
            (-1, -5),
            (0, -5),
            (1, -5),
        ];
        let keys: Vec<AngleKey> = turn
            .iter()
            .map(|&(x, y)| AngleKey::between(site, Point::new(x, y)))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(sorted, keys);
        for w in keys.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn ordering_matches_floating_point_angles_on_a_dense_fan() {
        let site = Point::new(3, 4);
        let mut neighbors = Vec::new();
        for dx in -6i64..=6 {
            for dy in -6i64..=6 {
                if (dx, dy) == (0, 0) {
                    continue;
                }
                neighbors.push(Point::new(site.x + dx, site.y + dy));
            }
        }
        let mut by_key = neighbors.clone();
        by_key.sort_by_key(|&q| AngleKey::between(site, q));
        let angle = |q: &Point| {
            let a = ((q.y - site.y) as f64).atan2((q.x - site.x) as f64);
            if a < 0.0 {
                a + 2.0 * std::f64::consts::PI
            } else {
                a
            }
        };
        let mut by_angle = neighbors;
        by_angle.sort_by(|a, b| {
            angle(a)
                .partial_cmp(&angle(b))
                .unwrap()
                .then_with(|| (a.x, a.y).cmp(&(b.x, b.y)))
        });
        // Parallel directions tie under the key; compare angle sequences.
        let angles_of = |v: &[Point]| v.iter().map(angle).collect::<Vec<f64>>();
        assert_eq!(angles_of(&by_key), angles_of(&by_angle));
    }

    #[test]
    fn parallel_same_sign_directions_tie() {
        let site = Point::new(0, 0);
        let a = AngleKey::between(site, Point::new(2, 4));
        let b = AngleKey::between(site, Point::new(3, 6));
        assert_eq!(a.cmp(&b), Ordering::Equal);
        // Opposite directions do not tie.
        let c = AngleKey::between(site, Point::new(-2, -4));
        assert_ne!(a.cmp(&c), Ordering::Equal);
    }
}
