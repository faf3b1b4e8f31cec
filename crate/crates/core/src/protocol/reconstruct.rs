//! Rebuilds the clipped Voronoi regions from the deduplicated edge list.
//!
//! Every input point and each direction of every edge travel to a home
//! node derived from the point's (respectively the source endpoint's)
//! coordinates, so each home holds, for each of its sites, the complete
//! list of dual neighbors. The home sorts that list counterclockwise,
//! rebuilds the region by intersecting the unit square with the listed
//! neighbors' half-planes, and cross-checks the result against the edge
//! list two ways: the sites supporting the region's boundary arcs must be
//! exactly the listed neighbors, and their order around the boundary must
//! equal the angular order. A convex region's boundary visits each
//! neighbor's bisector in one contiguous run whose outward normal is the
//! direction toward that neighbor, so for a consistent edge list both
//! checks pass structurally; any dropped, spurious, or misattributed edge
//! trips one of them.
//!
//! Homes are monotone in site order, so concatenating the per-node region
//! lists yields the regions sorted by site.

use std::collections::{BTreeMap, BTreeSet};

use crate::geometry::{GeometryError, Point, Square, VoronoiRegion};
use crate::sim::{BitStr, NodeId};

use super::angular::AngleKey;
use super::phases::{route_waves, Run};
use super::wire;
use super::ProtocolError;

/// Runs the reconstruction on the finished protocol state. Returns the
/// regions sorted by site and the largest neighbor count seen.
pub(crate) fn voronoi_from_delaunay(
    run: &mut Run,
) -> Result<(Vec<VoronoiRegion>, u64), ProtocolError> {
    run.sim.set_phase("reconstruct");
    let n = run.cfg.n;
    let bits = run.cfg.bits;
    let cw = wire::coord_width(bits);
    let site_home = |p: Point| wire::home_of_key(wire::site_key(p, bits), 2 * cw, n);
    let encode_pair = |a: Point, b: Point| -> BitStr {
        let mut s = BitStr::empty();
        s.push(a.x as u64, cw);
        s.push(a.y as u64, cw);
        s.push(b.x as u64, cw);
        s.push(b.y as u64, cw);
        s
    };

    let mut outboxes: Vec<Vec<(NodeId, BitStr)>> = vec![Vec::new(); n];
    for (node, batch) in run.points.iter().enumerate() {
        for pp in batch {
            let p = pp.point;
            let mut s = BitStr::empty();
            s.push(p.x as u64, cw);
            s.push(p.y as u64, cw);
            outboxes[node].push((site_home(p), s));
        }
    }
    let inboxes = route_waves(&mut run.sim, outboxes)?;
    let mut sites: Vec<BTreeSet<Point>> = vec![BTreeSet::new(); n];
    for (node, inbox) in inboxes.into_iter().enumerate() {
        for msg in inbox {
            let p = Point::new(
                msg.payload.read(0, cw) as i64,
                msg.payload.read(cw, cw) as i64,
            );
            let fresh = sites[node].insert(p);
            debug_assert!(fresh, "input points are distinct");
        }
    }

    let mut outboxes: Vec<Vec<(NodeId, BitStr)>> = vec![Vec::new(); n];
    for (node, batch) in run.edges.iter().enumerate() {
        for e in batch {
            outboxes[node].push((site_home(e.u), encode_pair(e.u, e.v)));
            outboxes[node].push((site_home(e.v), encode_pair(e.v, e.u)));
        }
    }
    let inboxes = route_waves(&mut run.sim, outboxes)?;
    let mut neighbors: Vec<BTreeMap<Point, Vec<Point>>> = vec![BTreeMap::new(); n];
    for (node, inbox) in inboxes.into_iter().enumerate() {
        for msg in inbox {
            let f = |i: u32| msg.payload.read(i * cw, cw) as i64;
            let (src, dst) = (Point::new(f(0), f(1)), Point::new(f(2), f(3)));
            neighbors[node].entry(src).or_default().push(dst);
        }
    }

    let unit = Square::unit(bits);
    let mut regions = Vec::new();
    let mut max_degree = 0u64;
    for node in 0..n {
        for &site in &sites[node] {
            let mut nb = neighbors[node].remove(&site).unwrap_or_default();
            if nb.is_empty() {
                return Err(ProtocolError::IsolatedSite(site));
            }
            nb.sort_unstable_by_key(|&t| AngleKey::between(site, t));
            for w in nb.windows(2) {
                if AngleKey::between(site, w[0]) == AngleKey::between(site, w[1]) {
                    return Err(GeometryError::InconsistentEdges(format!(
                        "edges give {site} the neighbors {} and {} in the same \
                         direction, so one of them cannot share a boundary",
                        w[0], w[1]
                    ))
                    .into());
                }
            }
            max_degree = max_degree.max(nb.len() as u64);
            let region = VoronoiRegion::build(site, &nb, unit)?;
            check_region_matches_edges(&region, &nb)?;
            regions.push(region);
        }
        if let Some((&stray, _)) = neighbors[node].iter().next() {
            return Err(GeometryError::InconsistentEdges(format!(
                "edge endpoint {stray} is not an input site"
            ))
            .into());
        }
    }
    Ok((regions, max_degree))
}

/// The two structural checks tying a rebuilt region to the edge list it
/// was rebuilt from. `nb` is the site's neighbor list in angular order.
fn check_region_matches_edges(
    region: &VoronoiRegion,
    nb: &[Point],
) -> Result<(), ProtocolError> {
    use crate::geometry::ArcKind;
    let site = region.site;
    let listed: BTreeSet<Point> = nb.iter().copied().collect();
    let touching = region.neighbor_sites();
    if let Some(&m) = listed.difference(&touching).next() {
        return Err(GeometryError::InconsistentEdges(format!(
            "edge to {m} contributes no boundary arc of the region of {site}"
        ))
        .into());
    }
    if let Some(&e) = touching.difference(&listed).next() {
        return Err(GeometryError::InconsistentEdges(format!(
            "region of {site} borders {e} with no matching edge"
        ))
        .into());
    }

    // The cyclic sequence of bisector labels, with each contiguous run
    // collapsed to one entry. A run may wrap past the rotation point.
    let mut labels: Vec<Point> = Vec::new();
    for kind in &region.arcs {
        if let ArcKind::Bisector(p) = kind {
            if labels.last() != Some(p) {
                labels.push(*p);
            }
        }
    }
    if labels.len() > 1 && labels.first() == labels.last() {
        labels.pop();
    }
    if labels.len() != nb.len() {
        return Err(GeometryError::InconsistentEdges(format!(
            "region of {site} meets a neighbor's bisector in separate \
             boundary runs"
        ))
        .into());
    }
    let start = labels
        .iter()
        .position(|&p| p == nb[0])
        .expect("label sets already match");
    labels.rotate_left(start);
    if labels != nb {
        return Err(GeometryError::InconsistentEdges(format!(
            "boundary order of the region of {site} differs from the \
             angular order of its neighbors"
        ))
        .into());
    }
    Ok(())
}
