//! Voronoi regions clipped to an axis-aligned square, with labeled boundary
//! arcs.
//!
//! A region is built by starting from the square and cutting it with one
//! half-plane per competing site, keeping the side closer to the region's
//! own site. Every boundary arc remembers what supports it: a piece of the
//! square's perimeter or the bisector with a named neighbor. Arc labels make
//! the region dual-readable: each positive-length bisector arc witnesses one
//! Delaunay edge of the clipped diagram.
//!
//! All vertex coordinates are exact rationals, so equality of regions is
//! decidable and serialization round-trips losslessly.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::bisector::bisector;
use super::rational::{polygon_signed_area, RatPoint};
use super::{GeometryError, Point, Square};

/// What supports one boundary arc of a clipped Voronoi region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArcKind {
    /// The arc lies on the clipping square's perimeter.
    Perimeter,
    /// The arc lies on the bisector with this neighboring site.
    Bisector(Point),
}

/// One boundary arc: the directed segment from `start` to `end` and its
/// supporting label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionArc {
    pub start: RatPoint,
    pub end: RatPoint,
    pub kind: ArcKind,
}

/// The Voronoi region of `site` clipped to a square: a convex polygon listed
/// counterclockwise with one label per edge. `arcs[i]` labels the edge from
/// `vertices[i]` to `vertices[(i + 1) % len]`. The vertex list is rotated so
/// it starts at the lexicographically smallest vertex, which makes equal
/// regions compare equal structurally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoronoiRegion {
    pub site: Point,
    pub vertices: Vec<RatPoint>,
    pub arcs: Vec<ArcKind>,
}

impl VoronoiRegion {
    /// Clips the square down to the set of points at least as close to
    /// `site` as to every site in `others`. `others` must not contain
    /// `site` itself or duplicates of it. The site must lie inside the
    /// square, which guarantees the region has positive area.
    pub fn build(site: Point, others: &[Point], square: Square) -> Result<Self, GeometryError> {
        if !square.contains(site) {
            return Err(GeometryError::PointOutsideSquare(site));
        }
        match Self::build_clipped(site, others, square)? {
            Some(region) => Ok(region),
            None => Err(GeometryError::InconsistentEdges(format!(
                "region of in-square site {site} collapsed"
            ))),
        }
    }

    /// Like [`VoronoiRegion::build`] but for sites that may lie outside the
    /// square: a far-away site's cell can meet the square in an empty or
    /// zero-area set, in which case there is no region and this returns
    /// `None`.
    pub fn build_clipped(
        site: Point,
        others: &[Point],
        square: Square,
    ) -> Result<Option<Self>, GeometryError> {
        let (mut verts, mut labels) = square_polygon(square);
        let mut sorted: Vec<Point> = others.to_vec();
        sorted.sort();
        sorted.dedup();
        if sorted.binary_search(&site).is_ok() {
            return Err(GeometryError::DuplicatePoint(site));
        }
        // Near sites clip the most area away; handling them first makes the
        // polygon small early, so most later half-planes are satisfied by
        // every remaining vertex and cost only their sign checks.
        sorted.sort_by_key(|&v| {
            let dx = i128::from(v.x - site.x);
            let dy = i128::from(v.y - site.y);
            (dx * dx + dy * dy, v)
        });
        for v in sorted {
            let bis = bisector(site, v)?;
            clip_labeled(
                &mut verts,
                &mut labels,
                &BigInt::from(bis.a),
                &BigInt::from(bis.b),
                &BigInt::from(bis.c),
                ArcKind::Bisector(v),
            );
            if verts.len() < 3 {
                return Ok(None);
            }
        }
        let mut region = VoronoiRegion {
            site,
            vertices: verts,
            arcs: labels,
        };
        if !region.area().is_positive() {
            return Ok(None);
        }
        region.canonicalize();
        Ok(Some(region))
    }

    /// Exact area of the region.
    pub fn area(&self) -> BigRational {
        polygon_signed_area(&self.vertices)
    }

    /// The boundary arcs in order, as directed segments with labels.
    pub fn arc_segments(&self) -> Vec<RegionArc> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| RegionArc {
                start: self.vertices[i].clone(),
                end: self.vertices[(i + 1) % n].clone(),
                kind: self.arcs[i],
            })
            .collect()
    }

    /// Sites that contribute at least one bisector arc to the boundary.
    /// Each such arc has positive length, so these are exactly the sites
    /// sharing a positive-length Voronoi edge with `self.site` inside the
    /// square.
    pub fn neighbor_sites(&self) -> BTreeSet<Point> {
        self.arcs
            .iter()
            .filter_map(|k| match k {
                ArcKind::Perimeter => None,
                ArcKind::Bisector(v) => Some(*v),
            })
            .collect()
    }

    /// Rotates the vertex and label lists so the lexicographically smallest
    /// vertex comes first.
    fn canonicalize(&mut self) {
        let n = self.vertices.len();
        let k = (0..n)
            .min_by(|&i, &j| self.vertices[i].cmp(&self.vertices[j]))
            .unwrap();
        self.vertices.rotate_left(k);
        self.arcs.rotate_left(k);
        debug_assert!(no_consecutive_duplicates(&self.vertices));
    }
}

/// The square as a counterclockwise polygon with all edges labeled
/// `Perimeter`.
fn square_polygon(sq: Square) -> (Vec<RatPoint>, Vec<ArcKind>) {
    let verts = vec![
        RatPoint::from_ints(sq.x0, sq.y0),
        RatPoint::from_ints(sq.x1, sq.y0),
        RatPoint::from_ints(sq.x1, sq.y1),
        RatPoint::from_ints(sq.x0, sq.y1),
    ];
    (verts, vec![ArcKind::Perimeter; 4])
}

fn no_consecutive_duplicates(verts: &[RatPoint]) -> bool {
    let n = verts.len();
    (0..n).all(|i| verts[i] != verts[(i + 1) % n])
}

/// Clips a labeled convex polygon with the half-plane
/// `a * x + b * y - c <= 0`, labeling any boundary piece that lies on the
/// cut line with `cut`. Edges fully on the cut line are relabeled to `cut`
/// as well: such an edge is supported by the new line, which takes over as
/// the arc's witness.
fn clip_labeled(
    verts: &mut Vec<RatPoint>,
    labels: &mut Vec<ArcKind>,
    a: &BigInt,
    b: &BigInt,
    c: &BigInt,
    cut: ArcKind,
) {
    let n = verts.len();
    let eval = |p: &RatPoint| -> BigRational {
        BigRational::from(a.clone()) * &p.x + BigRational::from(b.clone()) * &p.y
            - BigRational::from(c.clone())
    };
    let signs: Vec<i8> = verts
        .iter()
        .map(|p| {
            let v = eval(p);
            if v.is_negative() {
                -1
            } else if v.is_zero() {
                0
            } else {
                1
            }
        })
        .collect();
    if signs.iter().all(|&s| s < 0) {
        return; // entirely inside, nothing to do
    }

    let mut out_verts: Vec<RatPoint> = Vec::with_capacity(n + 2);
    let mut out_labels: Vec<ArcKind> = Vec::with_capacity(n + 2);
    for i in 0..n {
        let cur = &verts[i];
        let nxt = &verts[(i + 1) % n];
        let (scur, snxt) = (signs[i], signs[(i + 1) % n]);
        if scur <= 0 {
            // The outgoing edge keeps its label unless it leaves through
            // `cur` itself or lies entirely on the cut line.
            let keep_label = if scur == 0 && snxt >= 0 { cut } else { labels[i] };
            out_verts.push(cur.clone());
            out_labels.push(keep_label);
        }
        if scur < 0 && snxt > 0 {
            // Leaving through the interior of the edge: the kept stub ends
            // here and the boundary continues along the cut line.
            out_verts.push(line_intersection(cur, nxt, &eval));
            out_labels.push(cut);
        } else if scur > 0 && snxt < 0 {
            // Entering through the interior of the edge: the kept tail of
            // this edge starts here with the original label.
            out_verts.push(line_intersection(cur, nxt, &eval));
            out_labels.push(labels[i]);
        }
    }
    *verts = out_verts;
    *labels = out_labels;
}

/// The point where the segment from `p` to `q` crosses the zero set of
/// `eval`. Callers guarantee `eval(p)` and `eval(q)` have strict opposite
/// signs.
fn line_intersection(
    p: &RatPoint,
    q: &RatPoint,
    eval: &dyn Fn(&RatPoint) -> BigRational,
) -> RatPoint {
    let fp = eval(p);
    let fq = eval(q);
    debug_assert!(fp.is_negative() != fq.is_negative() && !fp.is_zero() && !fq.is_zero());
    let t = &fp / (&fp - &fq);
    RatPoint::new(
        &p.x + &t * (&q.x - &p.x),
        &p.y + &t * (&q.y - &p.y),
    )
}
