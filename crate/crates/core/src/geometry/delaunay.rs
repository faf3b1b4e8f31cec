//! Delaunay triangulation by directed-edge gift wrapping with exact
//! predicates.
//!
//! For each frontier edge the unique mate on its left side is found by a
//! single scan: among points strictly left of the edge, "lies inside the
//! circle through the edge and the current candidate" is a total order, so a
//! running minimum yields the Delaunay mate. Degenerate inputs (collinear
//! triples on a scanned edge, cocircular candidate quadruples) surface as
//! errors carrying the witness points.

use std::collections::{BTreeMap, BTreeSet};

use super::predicates::{cmp_dist2, in_circle, orientation, CirclePosition, Orientation};
use super::{DelaunayEdge, GeometryError, Point};

/// A Delaunay triangulation as an edge set plus, per edge, the one or two
/// triangle apexes flanking it. Hull edges have one apex; for a two-point
/// input the single edge has none.
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub edges: BTreeMap<DelaunayEdge, Vec<Point>>,
}

impl Triangulation {
    pub fn edge_set(&self) -> BTreeSet<DelaunayEdge> {
        self.edges.keys().copied().collect()
    }

    /// Builds the Delaunay triangulation of at least two pairwise distinct
    /// points in general position.
    pub fn build(points: &[Point]) -> Result<Triangulation, GeometryError> {
        if points.len() < 2 {
            return Err(GeometryError::TooFewPoints(points.len()));
        }
        let mut sorted: Vec<Point> = points.to_vec();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(GeometryError::DuplicatePoint(w[0]));
            }
        }

        if sorted.len() == 2 {
            let mut edges = BTreeMap::new();
            edges.insert(DelaunayEdge::new(sorted[0], sorted[1]), Vec::new());
            return Ok(Triangulation { edges });
        }

        // Seed with a guaranteed Delaunay edge: the lexicographic minimum and
        // its nearest neighbor (ties broken lexicographically), then wrap
        // outward over directed edges. Each directed edge is scanned once;
        // the triangle on its left (if any) is recorded.
        let p0 = sorted[0];
        let q = sorted[1..]
            .iter()
            .copied()
            .min_by(|a, b| cmp_dist2(p0, *a, *b).then(a.cmp(b)))
            .unwrap();

        let mut triangles: BTreeSet<[Point; 3]> = BTreeSet::new();
        let mut done: BTreeSet<(Point, Point)> = BTreeSet::new();
        let mut stack: Vec<(Point, Point)> = vec![(p0, q), (q, p0)];

        while let Some((a, b)) = stack.pop() {
            if !done.insert((a, b)) {
                continue;
            }
            let c = match find_mate(&sorted, a, b)? {
                None => continue, // hull edge seen from outside the hull
                Some(c) => c,
            };
            let mut tri = [a, b, c];
            tri.sort();
            triangles.insert(tri);
            // Triangle (a, b, c) also answers the directed edges (b, c) and
            // (c, a); only their twins still need scanning.
            done.insert((b, c));
            done.insert((c, a));
            if !done.contains(&(c, b)) {
                stack.push((c, b));
            }
            if !done.contains(&(a, c)) {
                stack.push((a, c));
            }
        }

        let mut edges: BTreeMap<DelaunayEdge, Vec<Point>> = BTreeMap::new();
        for tri in &triangles {
            for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
                edges
                    .entry(DelaunayEdge::new(tri[i], tri[j]))
                    .or_default()
                    .push(tri[k]);
            }
        }
        for (e, apexes) in &edges {
            if apexes.len() > 2 {
                return Err(GeometryError::InconsistentEdges(format!(
                    "edge {e} has {} flanking triangles",
                    apexes.len()
                )));
            }
        }
        Ok(Triangulation { edges })
    }
}

/// Finds the Delaunay mate of the directed edge `(a, b)`: the point strictly
/// to its left whose circumcircle with `a`, `b` contains no other left-side
/// point. Returns `None` when no point lies strictly left.
fn find_mate(points: &[Point], a: Point, b: Point) -> Result<Option<Point>, GeometryError> {
    let mut best: Option<Point> = None;
    for &p in points {
        if p == a || p == b {
            continue;
        }
        match orientation(a, b, p) {
            Orientation::Collinear => {
                return Err(GeometryError::CollinearTriple(a, b, p));
            }
            Orientation::Cw => continue,
            Orientation::Ccw => {}
        }
        best = match best {
            None => Some(p),
            Some(c) => match in_circle(a, b, c, p)? {
                CirclePosition::Inside => Some(p),
                CirclePosition::Outside => Some(c),
                CirclePosition::Cocircular => {
                    return Err(GeometryError::CocircularQuadruple(a, b, c, p));
                }
            },
        };
    }
    Ok(best)
}

/// The set of Delaunay edges of `points` (at least two pairwise distinct
/// points in general position required).
pub fn delaunay_oracle(points: &[Point]) -> Result<BTreeSet<DelaunayEdge>, GeometryError> {
    Ok(Triangulation::build(points)?.edge_set())
}
