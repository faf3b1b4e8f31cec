//! Square-clipped Voronoi/Delaunay oracles.
//!
//! Two independent routes to the same answer, used to cross-check each
//! other and the distributed pipeline:
//!
//! * [`dual_edges_within_square`] triangulates, turns each Delaunay edge
//!   into its Voronoi counterpart (segment, ray, or full bisector line,
//!   depending on how many triangles flank it), and keeps the edge exactly
//!   when that counterpart meets the square in a set of positive length.
//! * [`voronoi_in_square_oracle`] never triangulates: it clips the square
//!   per site by brute-force half-plane intersection and reads the dual
//!   edges off the labeled region boundaries.
//!
//! A Delaunay edge whose Voronoi edge only touches the square at a single
//! point is excluded by both routes.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::bisector::bisector;
use super::delaunay::Triangulation;
use super::rational::{rat, RatPoint};
use super::region::VoronoiRegion;
use super::{DelaunayEdge, GeometryError, Point, Square};

/// Builds the Voronoi region of every site, clipped to the square, by
/// half-plane intersection, along with the dual edge set read off the
/// labeled region boundaries. Sites must be pairwise distinct and nonempty
/// but may lie outside the square: a site whose cell meets the square in a
/// zero-area set gets no region. Regions come back sorted by site.
///
/// The dual edges are the pairs whose cells share a positive-length piece
/// of their bisector inside the closed square. For a pair with a surviving
/// region, that piece appears as a labeled boundary arc; for a pair whose
/// regions both collapsed (possible only when both sites lie outside), the
/// bisector piece is certified directly by exact interval arithmetic.
pub fn voronoi_in_square_oracle(
    points: &[Point],
    square: Square,
) -> Result<(Vec<VoronoiRegion>, BTreeSet<DelaunayEdge>), GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::TooFewPoints(0));
    }
    let mut sites: Vec<Point> = points.to_vec();
    sites.sort();
    for w in sites.windows(2) {
        if w[0] == w[1] {
            return Err(GeometryError::DuplicatePoint(w[0]));
        }
    }
    let mut regions = Vec::new();
    let mut dropped: Vec<Point> = Vec::new();
    for (i, &s) in sites.iter().enumerate() {
        let others: Vec<Point> = sites
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &q)| q)
            .collect();
        match VoronoiRegion::build_clipped(s, &others, square)? {
            Some(r) => regions.push(r),
            None => dropped.push(s),
        }
    }
    let survived: BTreeSet<Point> = regions.iter().map(|r| r.site).collect();
    let mut duals = BTreeSet::new();
    let mut directed: BTreeSet<(Point, Point)> = BTreeSet::new();
    for r in &regions {
        for v in r.neighbor_sites() {
            directed.insert((r.site, v));
            duals.insert(DelaunayEdge::new(r.site, v));
        }
    }
    for &(a, b) in &directed {
        if survived.contains(&b) && !directed.contains(&(b, a)) {
            return Err(GeometryError::InconsistentEdges(format!(
                "region of {a} borders {b} but not vice versa"
            )));
        }
    }
    for (i, &u) in dropped.iter().enumerate() {
        for &v in &dropped[i + 1..] {
            if voronoi_edge_in_square(u, v, &sites, square)? {
                duals.insert(DelaunayEdge::new(u, v));
            }
        }
    }
    Ok((regions, duals))
}

/// Does the Voronoi diagram of `sites` within the closed square contain a
/// positive-length piece of the bisector of `u` and `v`? Decided by exact
/// interval arithmetic on the bisector line: the square's axis ranges and
/// each competing site's half-plane restrict the line parameter, and the
/// edge exists iff a positive-length parameter interval survives.
pub fn voronoi_edge_in_square(
    u: Point,
    v: Point,
    sites: &[Point],
    square: Square,
) -> Result<bool, GeometryError> {
    let bis = bisector(u, v)?;
    let base = if bis.b != 0 {
        RatPoint::new(rat(0), big_ratio(bis.c, bis.b))
    } else {
        RatPoint::new(big_ratio(bis.c, bis.a), rat(0))
    };
    let dir = (rat64(-bis.b), rat64(bis.a));
    let mut iv = TInterval::new(None, None);
    iv.constrain_axis(&base.x, &dir.0, square.x0, square.x1);
    iv.constrain_axis(&base.y, &dir.1, square.y0, square.y1);
    for &s in sites {
        if s == u || s == v {
            continue;
        }
        // Points of the bisector closer to u than to s satisfy
        // eval(p) <= 0 for the u-versus-s bisector; substituting
        // p = base + t*dir makes that linear in t.
        let cut = bisector(u, s)?;
        let (a, b, c) = (rat64(cut.a), rat64(cut.b), rat64(cut.c));
        let intercept = &a * &base.x + &b * &base.y - c;
        let slope = a * &dir.0 + b * &dir.1;
        iv.constrain_linear(intercept, slope);
        if iv.empty {
            return Ok(false);
        }
    }
    Ok(iv.positive_length())
}

/// Extracts the dual edge set from clipped regions: one edge per unordered
/// site pair whose regions share a positive-length boundary arc. Errors if
/// the arc labels are not symmetric between the two regions of a pair.
pub fn regions_dual_edges(
    regions: &[VoronoiRegion],
) -> Result<BTreeSet<DelaunayEdge>, GeometryError> {
    let mut directed: BTreeSet<(Point, Point)> = BTreeSet::new();
    for r in regions {
        for v in r.neighbor_sites() {
            directed.insert((r.site, v));
        }
    }
    for &(a, b) in &directed {
        if !directed.contains(&(b, a)) {
            return Err(GeometryError::InconsistentEdges(format!(
                "region of {a} borders {b} but not vice versa"
            )));
        }
    }
    Ok(directed
        .iter()
        .map(|&(a, b)| DelaunayEdge::new(a, b))
        .collect())
}

/// The Delaunay edges of `points` whose Voronoi edges meet `square` in a
/// set of positive length. Points must be pairwise distinct and may lie
/// anywhere, inside the square or not; zero or one point yields the empty
/// set.
pub fn dual_edges_within_square(
    points: &[Point],
    square: Square,
) -> Result<BTreeSet<DelaunayEdge>, GeometryError> {
    if points.len() <= 1 {
        return Ok(BTreeSet::new());
    }
    let tri = Triangulation::build(points)?;
    let mut out = BTreeSet::new();
    for (edge, apexes) in &tri.edges {
        if voronoi_edge_meets_square(edge, apexes, square)? {
            out.insert(*edge);
        }
    }
    Ok(out)
}

/// Does the Voronoi edge dual to `edge` intersect the square with positive
/// length? The Voronoi edge is a segment between the two flanking
/// circumcenters, a ray from the single flanking circumcenter pointing away
/// from its apex, or (for a two-point input) the whole bisector line.
fn voronoi_edge_meets_square(
    edge: &DelaunayEdge,
    apexes: &[Point],
    square: Square,
) -> Result<bool, GeometryError> {
    let (base, dir) = match apexes {
        [] => {
            let bis = bisector(edge.u, edge.v)?;
            // Any rational point on the line a*x + b*y = c works as a base.
            let base = if bis.b != 0 {
                RatPoint::new(rat(0), big_ratio(bis.c, bis.b))
            } else {
                RatPoint::new(big_ratio(bis.c, bis.a), rat(0))
            };
            let dir = (rat64(-bis.b), rat64(bis.a));
            (base, dir)
        }
        [a] => {
            let base = circumcenter(edge.u, edge.v, *a)?;
            let (dx, dy) = (
                i128::from(edge.v.x - edge.u.x),
                i128::from(edge.v.y - edge.u.y),
            );
            // Perpendicular to the edge, on the side opposite the apex.
            let cross = dx * i128::from(a.y - edge.u.y) - dy * i128::from(a.x - edge.u.x);
            let dir = if cross > 0 {
                (rat64(dy), rat64(-dx))
            } else {
                (rat64(-dy), rat64(dx))
            };
            (base, dir)
        }
        [a, b] => {
            let s = circumcenter(edge.u, edge.v, *a)?;
            let t = circumcenter(edge.u, edge.v, *b)?;
            let dir = (&t.x - &s.x, &t.y - &s.y);
            if dir.0.is_zero() && dir.1.is_zero() {
                return Ok(false); // coincident circumcenters: nothing to clip
            }
            let mut iv = TInterval::new(Some(BigRational::zero()), Some(rat(1)));
            iv.constrain_axis(&s.x, &dir.0, square.x0, square.x1);
            iv.constrain_axis(&s.y, &dir.1, square.y0, square.y1);
            return Ok(iv.positive_length());
        }
        more => {
            return Err(GeometryError::InconsistentEdges(format!(
                "edge {edge} has {} flanking triangles",
                more.len()
            )));
        }
    };
    let lo = if apexes.is_empty() {
        None // full line
    } else {
        Some(BigRational::zero()) // ray starts at the circumcenter
    };
    let mut iv = TInterval::new(lo, None);
    iv.constrain_axis(&base.x, &dir.0, square.x0, square.x1);
    iv.constrain_axis(&base.y, &dir.1, square.y0, square.y1);
    Ok(iv.positive_length())
}

/// Circumcenter of three non-collinear points, exact.
pub fn circumcenter(p: Point, q: Point, r: Point) -> Result<RatPoint, GeometryError> {
    let (px, py) = (i128::from(p.x), i128::from(p.y));
    let (qx, qy) = (i128::from(q.x), i128::from(q.y));
    let (rx, ry) = (i128::from(r.x), i128::from(r.y));
    let d = 2 * (px * (qy - ry) + qx * (ry - py) + rx * (py - qy));
    if d == 0 {
        return Err(GeometryError::CollinearTriple(p, q, r));
    }
    let p2 = px * px + py * py;
    let q2 = qx * qx + qy * qy;
    let r2 = rx * rx + ry * ry;
    let ux = p2 * (qy - ry) + q2 * (ry - py) + r2 * (py - qy);
    let uy = p2 * (rx - qx) + q2 * (px - rx) + r2 * (qx - px);
    Ok(RatPoint::new(big_ratio(ux, d), big_ratio(uy, d)))
}

fn big_ratio(num: i128, den: i128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rat64(v: i128) -> BigRational {
    BigRational::from(BigInt::from(v))
}

/// A parameter interval on a line `base + t * dir`, narrowed by axis-range
/// constraints. `None` bounds mean unbounded.
struct TInterval {
    lo: Option<BigRational>,
    hi: Option<BigRational>,
    empty: bool,
}

impl TInterval {
    fn new(lo: Option<BigRational>, hi: Option<BigRational>) -> Self {
        TInterval {
            lo,
            hi,
            empty: false,
        }
    }

    /// Requires `min <= base + t * dir <= max`.
    fn constrain_axis(&mut self, base: &BigRational, dir: &BigRational, min: i64, max: i64) {
        if self.empty {
            return;
        }
        let (min_r, max_r) = (rat(min), rat(max));
        if dir.is_zero() {
            if *base < min_r || *base > max_r {
                self.empty = true;
            }
            return;
        }
        let t_at_min = (&min_r - base) / dir;
        let t_at_max = (&max_r - base) / dir;
        let (new_lo, new_hi) = if t_at_min <= t_at_max {
            (t_at_min, t_at_max)
        } else {
            (t_at_max, t_at_min)
        };
        self.tighten_lower(new_lo);
        self.tighten_upper(new_hi);
        if let (Some(l), Some(h)) = (&self.lo, &self.hi) {
            if l > h {
                self.empty = true;
            }
        }
    }

    /// Requires `intercept + t * slope <= 0`.
    fn constrain_linear(&mut self, intercept: BigRational, slope: BigRational) {
        if self.empty {
            return;
        }
        if slope.is_zero() {
            if intercept > BigRational::zero() {
                self.empty = true;
            }
            return;
        }
        let bound = -&intercept / &slope;
        if slope > BigRational::zero() {
            self.tighten_upper(bound);
        } else {
            self.tighten_lower(bound);
        }
        if let (Some(l), Some(h)) = (&self.lo, &self.hi) {
            if l > h {
                self.empty = true;
            }
        }
    }

    fn tighten_lower(&mut self, t: BigRational) {
        match &self.lo {
            Some(l) if *l >= t => {}
            _ => self.lo = Some(t),
        }
    }

    fn tighten_upper(&mut self, t: BigRational) {
        match &self.hi {
            Some(h) if *h <= t => {}
            _ => self.hi = Some(t),
        }
    }

    /// True when the interval has strictly positive length.
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::delaunay::delaunay_oracle;

    fn p(x: i64, y: i64) -> Point {
        Point::new(x, y)
    }

    fn region_duals(points: &[Point], square: Square) -> BTreeSet<DelaunayEdge> {
        voronoi_in_square_oracle(points, square).unwrap().1
    }

    #[test]
    fn two_points_in_a_square_always_share_an_edge() {
        let sq = Square::unit(2);
        let pts = [p(0, 0), p(4, 3)];
        let want: BTreeSet<_> = [DelaunayEdge::new(pts[0], pts[1])].into_iter().collect();
        assert_eq!(dual_edges_within_square(&pts, sq).unwrap(), want);
        assert_eq!(region_duals(&pts, sq), want);
    }

    #[test]
    fn single_point_has_no_edges_and_owns_the_square() {
        let sq = Square::unit(2);
        assert!(dual_edges_within_square(&[p(2, 2)], sq).unwrap().is_empty());
        let (regions, duals) = voronoi_in_square_oracle(&[p(2, 2)], sq).unwrap();
        assert_eq!(regions.len(), 1);
        assert_eq!(regions[0].area(), rat(16));
        assert!(duals.is_empty());
    }

    #[test]
    fn both_routes_agree_on_a_spanning_quad() {
        let sq = Square::unit(2);
        let pts = [p(0, 0), p(4, 0), p(0, 4), p(3, 3)];
        let via_triangulation = dual_edges_within_square(&pts, sq).unwrap();
        let via_regions = region_duals(&pts, sq);
        assert_eq!(via_triangulation, via_regions);
        // Every Voronoi edge of this spread-out quad cuts the square, so the
        // clipped dual equals the full Delaunay edge set.
        assert_eq!(via_triangulation, delaunay_oracle(&pts).unwrap());
    }

    #[test]
    fn edges_whose_voronoi_edges_leave_the_square_are_excluded() {
        // All four points sit in [0,4]^2, but three of the six Delaunay
        // edges have their Voronoi counterparts outside it: the edge of
        // (1,0)-(3,0) is a ray leaving straight down from (2,0), and the
        // rays of (1,0)-(2,3) and (3,0)-(2,3) leave sideways from (0,2)
        // and (4,2). Each meets the square in a single point, length zero.
        let sq = Square::unit(2);
        let pts = [p(1, 0), p(3, 0), p(2, 1), p(2, 3)];
        let full = delaunay_oracle(&pts).unwrap();
        assert_eq!(full.len(), 6, "hull triangle plus interior point");
        let mut want = full.clone();
        for (a, b) in [((1, 0), (3, 0)), ((1, 0), (2, 3)), ((3, 0), (2, 3))] {
            let pinched = DelaunayEdge::new(p(a.0, a.1), p(b.0, b.1));
            assert!(want.remove(&pinched), "edge {pinched} should exist");
        }
        assert_eq!(dual_edges_within_square(&pts, sq).unwrap(), want);
        assert_eq!(region_duals(&pts, sq), want);
    }

    #[test]
    fn points_outside_the_square_still_form_edges_inside_it() {
        // (0,0) is in [0,4]^2 and (5,5) is not; their bisector x + y = 5
        // crosses the square from (1,4) to (4,1), so the edge counts.
        let sq = Square::unit(2);
        let pts = [p(0, 0), p(5, 5)];
        let edge = DelaunayEdge::new(pts[0], pts[1]);
        let want: BTreeSet<DelaunayEdge> = [edge].into_iter().collect();
        assert_eq!(dual_edges_within_square(&pts, sq).unwrap(), want);
        let (regions, duals) = voronoi_in_square_oracle(&pts, sq).unwrap();
        assert_eq!(duals, want);
        assert_eq!(regions.len(), 2, "the outside site still owns a corner");
        assert_eq!(
            regions[0].area() + regions[1].area(),
            rat(16),
            "surviving regions tile the square"
        );
    }

    #[test]
    fn far_outside_site_gets_no_region_and_no_edges() {
        // (100,100) at scale [0,4]^2: its cell never reaches the square.
        let sq = Square::unit(2);
        let pts = [p(1, 1), p(3, 2), p(100, 100)];
        let (regions, duals) = voronoi_in_square_oracle(&pts, sq).unwrap();
        let sites: Vec<Point> = regions.iter().map(|r| r.site).collect();
        assert_eq!(sites, vec![p(1, 1), p(3, 2)]);
        let want: BTreeSet<DelaunayEdge> =
            [DelaunayEdge::new(p(1, 1), p(3, 2))].into_iter().collect();
        assert_eq!(duals, want);
    }

    #[test]
    fn restricting_to_a_subsquare_matches_the_interval_certificates() {
        // Spread points over [0,16]^2, then ask for the diagram inside the
        // lower-left quadrant only: both oracle routes and the per-pair
        // interval test must agree pair by pair.
        let pts = [
            p(2, 3), p(7, 1), p(13, 2), p(1, 9), p(6, 6), p(12, 8),
            p(3, 14), p(9, 12), p(15, 15), p(10, 15),
        ];
        let sub = Square::new(0, 0, 8, 8);
        let (_, via_regions) = voronoi_in_square_oracle(&pts, sub).unwrap();
        let via_intervals: BTreeSet<DelaunayEdge> = {
            let mut out = BTreeSet::new();
            for (i, &u) in pts.iter().enumerate() {
                for &v in &pts[i + 1..] {
                    if voronoi_edge_in_square(u, v, &pts, sub).unwrap() {
                        out.insert(DelaunayEdge::new(u, v));
                    }
                }
            }
            out
        };
        assert_eq!(via_regions, via_intervals);
        assert!(!via_regions.is_empty());
        // The full-plane triangulation route, restricted the same way.
        assert_eq!(dual_edges_within_square(&pts, sub).unwrap(), via_regions);
    }
}
