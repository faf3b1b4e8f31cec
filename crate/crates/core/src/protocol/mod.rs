//! Distributed Delaunay/Voronoi computation on the clique simulator.
//!
//! Input: n^2 distinct grid points in the unit square, n per node. The
//! driver walks a quadtree of grid squares. At each level the points are
//! globally sorted by (cell number, x, y), per-cell counts are aggregated,
//! and every pending square asks for the point count of its two-layer cell
//! neighborhood. A square whose neighborhood holds at most `100 n` points
//! resolves: its owner pulls those points, computes their Delaunay edges,
//! and keeps the ones whose dual Voronoi edges meet the square with
//! positive length. Heavier squares split into their four children, which
//! are rebalanced across nodes before the next level. Kept edges are
//! deduplicated and rebalanced each level.
//!
//! On smooth inputs the dual edge of any Voronoi edge meeting a square has
//! both endpoints within two cell widths of it, so the neighborhood pull
//! sees every point that can influence the square and the union of
//! per-square edge sets is exactly the global Delaunay edge set. The
//! Voronoi regions are then rebuilt from the deduplicated edges alone and
//! cross-checked for angular consistency.
//!
//! All exchanges go through the simulator, so the cost ledger prices every
//! transfer; nothing is computed from state a node was never sent.

mod angular;
mod phases;
mod reconstruct;
mod wire;

pub use angular::AngleKey;
pub use wire::min_cmsg;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{DelaunayEdge, GeometryError, Point, VoronoiRegion};
use crate::grid::{parent, GridError, GridSquareId};
use crate::sim::{CostLedger, NodeId, SimConfig, SimError};
use crate::{ceil_log2, MAX_COORD_BITS};

/// Lifecycle of a grid square on the active list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SquareStatus {
    Pending,
    Resolved,
    Split,
}

/// A grid square some node is responsible for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ActiveSquare {
    pub id: GridSquareId,
    pub owner: NodeId,
    pub status: SquareStatus,
}

/// What to do when a square light enough to resolve holds no points of its
/// own. Smooth inputs never produce one; on rough inputs the square's
/// locality guarantee is void, so resolving it could silently drop edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmptySquarePolicy {
    /// Fail the run, naming the square.
    #[default]
    Abort,
    /// Resolve the square as edgeless and continue. The final
    /// reconstruction still cross-checks the global edge set, so a run
    /// that finishes under this policy either returns a consistent
    /// diagram or fails there.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolConfig {
    /// Number of nodes; the input must hold exactly n^2 points.
    pub n: usize,
    /// Coordinate denominator exponent: the unit square is [0, 2^bits]^2.
    pub bits: u32,
    /// Per-message budget multiplier: messages carry c_msg * ceil(log2 n)
    /// bits.
    pub c_msg: u32,
    /// Rounds charged per routing invocation.
    pub r_route: u64,
    /// Rounds charged per sort invocation.
    pub r_sort: u64,
    /// Report (not fail) when some level starts with more than
    /// `active_flag_k * n` pending squares.
    pub active_flag_k: u64,
    pub empty_square: EmptySquarePolicy,
}

impl ProtocolConfig {
    /// Defaults: the message budget is the smallest multiplier that fits
    /// an edge payload, but never below 8.
    pub fn new(n: usize, bits: u32) -> Self {
        ProtocolConfig {
            n,
            bits,
            c_msg: wire::min_cmsg(bits, n).max(8),
            r_route: 4,
            r_sort: 6,
            active_flag_k: 64,
            empty_square: EmptySquarePolicy::Abort,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |m: String| Err(ProtocolError::BadConfig(m));
        if self.n < 2 {
            return bad(format!("n = {} but the clique needs at least 2 nodes", self.n));
        }
        if self.bits > MAX_COORD_BITS {
            return bad(format!(
                "bits = {} exceeds {MAX_COORD_BITS}, the largest width whose \
                 predicates fit the fixed-size integer arithmetic",
                self.bits
            ));
        }
        let l = ceil_log2(self.n as u64);
        if self.bits < 2 * l {
            return bad(format!(
                "bits = {} cannot address n^2 = {} distinct grid points; \
                 need at least 2 * ceil(log2 n) = {}",
                self.bits,
                self.n * self.n,
                2 * l
            ));
        }
        let need = wire::min_cmsg(self.bits, self.n);
        if self.c_msg < need {
            return bad(format!(
                "c_msg = {} cannot fit an edge payload of {} bits; need at \
                 least {need}",
                self.c_msg,
                wire::edge_width(self.bits)
            ));
        }
        if self.r_route == 0 || self.r_sort == 0 {
            return bad("round charges must be at least 1".to_string());
        }
        Ok(())
    }

    pub(crate) fn sim_config(&self) -> SimConfig {
        SimConfig {
            n: self.n,
            c_msg: self.c_msg,
            r_route: self.r_route,
            r_sort: self.r_sort,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(
        "square at level {level}, number {num} is active but holds no \
         points; resolution requires every active square to be nonempty, \
         which smooth inputs guarantee"
    )]
    EmptyActiveSquare { level: u32, num: u64 },
    #[error(
        "level {level} square still too heavy to resolve at the full \
         coordinate depth of {bits}"
    )]
    DepthExceeded { level: u32, bits: u32 },
    #[error("node {node} minted {count} squares, over the {cap} tally cap")]
    ActiveOverflow { node: NodeId, count: u64, cap: u64 },
    #[error("resolved squares do not partition the unit square: {0}")]
    BadPartition(String),
    #[error(
        "site {0} has no incident dual edge, impossible for two or more \
         sites"
    )]
    IsolatedSite(Point),
}

/// Per-level progress counters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelTrace {
    pub level: u32,
    pub entering_active: u64,
    pub resolved: u64,
    pub split: u64,
    pub points_pulled: u64,
    pub edges_after_dedup: u64,
    pub rounds: u64,
}

/// Whole-run summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunTrace {
    pub n: usize,
    pub bits: u32,
    pub c_msg: u32,
    pub budget_bits: u32,
    pub levels: Vec<LevelTrace>,
    pub cost: CostLedger,
    pub edge_count: u64,
    pub region_count: u64,
    pub max_site_degree: u64,
    pub max_entering_active: u64,
    /// True when some level started with more than `active_flag_k * n`
    /// pending squares. Informational: the run still completes, but the
    /// per-level round bound presumes the active list stays linear in n.
    pub active_flagged: bool,
    /// The final leaf squares, which tile the unit square exactly.
    pub resolved: Vec<ActiveSquare>,
}

#[derive(Debug)]
pub struct ProtocolOutput {
    /// The Delaunay edge set, sorted, each edge once.
    pub edges: Vec<DelaunayEdge>,
    /// One clipped Voronoi region per site, sorted by site.
    pub regions: Vec<VoronoiRegion>,
    pub trace: RunTrace,
}

/// Runs the full protocol. `points` holds exactly n^2 distinct points in
/// the unit square, listed node by node (node k starts with
/// `points[k*n .. (k+1)*n]`). Deterministic: identical inputs produce
/// identical outputs, traces, and ledgers.
pub fn run_protocol(
    points: &[Point],
    cfg: &ProtocolConfig,
) -> Result<ProtocolOutput, ProtocolError> {
    cfg.validate()?;
    if points.len() != cfg.n * cfg.n {
        return Err(ProtocolError::BadConfig(format!(
            "expected n^2 = {} input points, got {}",
            cfg.n * cfg.n,
            points.len()
        )));
    }
    let side = 1i64 << cfg.bits;
    let mut seen = BTreeSet::new();
    for &p in points {
        if p.x < 0 || p.y < 0 || p.x > side || p.y > side {
            return Err(GridError::OutsideUnitSquare(p).into());
        }
        if !seen.insert(p) {
            return Err(GeometryError::DuplicatePoint(p).into());
        }
    }

    let mut run = phases::Run::new(cfg, points);
    let mut levels = Vec::new();
    let mut max_entering = 0u64;
    loop {
        let entering: u64 = run.actives.iter().map(|a| a.len() as u64).sum();
        max_entering = max_entering.max(entering);
        let rounds_before = run.sim.ledger().rounds;
        run.phase_prefix_and_sort()?;
        run.phase_square_counts()?;
        let tl_counts = run.phase_tl_queries()?;
        let outcome = run.phase_resolve_or_split(&tl_counts)?;
        let mut minted = outcome.minted;
        let next_active = run.phase_balance(&mut minted)?;
        check_level_coverage(&run)?;
        let edge_total = run.phase_dedup()?;
        levels.push(LevelTrace {
            level: run.level - 1,
            entering_active: entering,
            resolved: outcome.resolved,
            split: outcome.split,
            points_pulled: outcome.points_pulled,
            edges_after_dedup: edge_total,
            rounds: run.sim.ledger().rounds - rounds_before,
        });
        if next_active == 0 {
            break;
        }
    }
    audit_partition(&run.resolved)?;

    let (regions, max_site_degree) = reconstruct::voronoi_from_delaunay(&mut run)?;
    let edges: Vec<DelaunayEdge> = run.edges.concat();
    debug_assert!(
        edges.windows(2).all(|w| w[0] < w[1]),
        "deduplicated edges arrive globally sorted and distinct"
    );
    debug_assert_eq!(regions.len(), points.len());

    let trace = RunTrace {
        n: cfg.n,
        bits: cfg.bits,
        c_msg: cfg.c_msg,
        budget_bits: run.sim.budget_bits(),
        levels,
        cost: run.sim.run_report(),
        edge_count: edges.len() as u64,
        region_count: regions.len() as u64,
        max_site_degree,
        max_entering_active: max_entering,
        active_flagged: max_entering > cfg.active_flag_k * cfg.n as u64,
        resolved: run.resolved,
    };
    Ok(ProtocolOutput { edges, regions, trace })
}

/// Level-boundary invariant: the resolved squares plus the still-active
/// ones cover exactly the unit square's area. Measured in full-depth unit
/// cells so the arithmetic is exact.
fn check_level_coverage(run: &phases::Run) -> Result<(), ProtocolError> {
    let bits = run.cfg.bits;
    // Split depth is capped at `bits`, so the shift cannot underflow.
    let cell = |level: u32| 1u128 << (2 * (bits - level));
    let mut covered: u128 = run.resolved.iter().map(|sq| cell(sq.id.level)).sum();
    covered += run
        .actives
        .iter()
        .flatten()
        .map(|sq| cell(sq.id.level))
        .sum::<u128>();
    let whole = 1u128 << (2 * bits);
    if covered != whole {
        return Err(ProtocolError::BadPartition(format!(
            "after level {}: resolved plus active squares cover {covered} \
             of {whole} unit cells",
            run.level - 1
        )));
    }
    Ok(())
}

/// Checks that the resolved squares tile the unit square exactly: no
/// duplicates, no resolved ancestor of a resolved square, and the areas
/// sum to the whole square.
fn audit_partition(resolved: &[ActiveSquare]) -> Result<(), ProtocolError> {
    let bad = |m: String| Err(ProtocolError::BadPartition(m));
    if resolved.is_empty() {
        return bad("no squares were resolved".to_string());
    }
    let mut ids = BTreeSet::new();
    let mut deepest = 0u32;
    for sq in resolved {
        if !ids.insert(sq.id) {
            return bad(format!("square {} resolved twice", sq.id));
        }
        deepest = deepest.max(sq.id.level);
    }
    let mut area = 0u128;
    for &id in &ids {
        let mut walk = id;
        while let Some(up) = parent(walk) {
            if ids.contains(&up) {
                return bad(format!("square {} nests inside resolved {}", id, up));
            }
            walk = up;
        }
        area += 1u128 << (2 * (deepest - id.level));
    }
    if area != 1u128 << (2 * deepest) {
        return bad(format!(
            "resolved areas cover {area} of {} unit cells at depth {deepest}",
            1u128 << (2 * deepest)
        ));
    }
    Ok(())
}
