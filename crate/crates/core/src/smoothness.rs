//! Grid-smoothness checking and input generators.
//!
//! A point set is grid-smooth when, at every grid level, any basic square
//! holding at least sqrt(N) points forces every equal-size square within
//! 4*sqrt(2) side lengths to hold at least one point. The threshold
//! comparison is `count^2 >= N` and the distance comparison works on
//! squared cell gaps, so the check is entirely in integers.
//!
//! Generators are deterministic in (count, seed, bits): a jittered grid
//! that always satisfies the property, a uniform sampler that may not, and
//! an adversarial cluster that never does.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Roots;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{validate_general_position, Point, GP_CHECK_LIMIT};
use crate::grid::{square_number, GridError, GridSquareId};

/// Squared distance bound, in units of one cell side: (4*sqrt(2))^2.
pub const SMOOTHNESS_D_SQUARED: u64 = 32;

const MAX_ATTEMPTS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("point count {0} is not a perfect square")]
    NotAPerfectSquare(u64),
    #[error("{bits} coordinate bits cannot host the construction; need at least {needed}")]
    BitsTooSmall { bits: u32, needed: u32 },
    #[error("adversarial cluster needs at least 8 points, got {0}")]
    TooFewPoints(u64),
    #[error("no valid point set found after {0} attempts")]
    GenerationFailed(u32),
}

/// A witnessed smoothness violation: `heavy` holds `heavy_count` points
/// with `heavy_count^2 >= N`, yet `empty` holds none despite lying within
/// the distance bound (`gap_squared` cell sides squared, at most 32).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmoothnessViolation {
    pub level: u32,
    pub heavy: GridSquareId,
    pub heavy_count: u64,
    pub empty: GridSquareId,
    pub gap_squared: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmoothnessReport {
    pub total_points: u64,
    pub counterexample: Option<SmoothnessViolation>,
}

impl SmoothnessReport {
    pub fn ok(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks grid smoothness at levels `0..=max_level`, returning the first
/// violation in scan order (level, then heavy square number, then empty
/// square number).
pub fn check_grid_smoothness(
    points: &[Point],
    bits: u32,
    max_level: u32,
) -> Result<SmoothnessReport, GridError> {
    let n_total = points.len() as u64;
    for level in 0..=max_level {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for &p in points {
            *counts.entry(square_number(p, level, bits)?).or_insert(0) += 1;
        }
        let side = 1u64 << level;
        for (&num, &count) in &counts {
            if (count as u128) * (count as u128) < n_total as u128 {
                continue;
            }
            let q = GridSquareId { level, num };
            // Candidate empty squares, in num order: num = col*side + row
            // grows with the column, so scan columns outward-insensitive
            // but ordered.
            for col in q.col().saturating_sub(6)..=(q.col() + 6).min(side - 1) {
                for row in q.row().saturating_sub(6)..=(q.row() + 6).min(side - 1) {
                    let gap = |a: u64, b: u64| a.abs_diff(b).saturating_sub(1);
                    let (gc, gr) = (gap(col, q.col()), gap(row, q.row()));
                    let gap_squared = gc * gc + gr * gr;
                    if gap_squared > SMOOTHNESS_D_SQUARED {
                        continue;
                    }
                    let r_num = (col << level) | row;
                    if !counts.contains_key(&r_num) {
                        return Ok(SmoothnessReport {
                            total_points: n_total,
                            counterexample: Some(SmoothnessViolation {
                                level,
                                heavy: q,
                                heavy_count: count,
                                empty: GridSquareId { level, num: r_num },
                                gap_squared,
                            }),
                        });
                    }
                }
            }
        }
    }
    Ok(SmoothnessReport {
        total_points: n_total,
        counterexample: None,
    })
}

fn rng_for(seed: u64, attempt: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ u64::from(attempt).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Smallest recommended bit width for [`generate_perturbed_grid`] at this
/// point count. The hard floor is 2^bits >= 4*sqrt(count) (nonempty jitter
/// intervals); the recommendation adds resolution so that the roughly 2g^2
/// jitter values per cell axis make exact collinear or cocircular
/// coincidences rare enough for regeneration to succeed. At the floor
/// itself the per-cell intervals hold a handful of values each, and with g
/// points sharing each column three of them almost surely share an x
/// coordinate, so every attempt fails general position.
pub fn grid_jitter_bits(count: u64) -> u32 {
    let g = count.sqrt().max(1);
    let floor = crate::ceil_log2(4 * g);
    floor.max(3 * crate::ceil_log2(g) + 2)
}

/// One point per cell of the sqrt(N) x sqrt(N) uniform grid, jittered
/// within the middle half of its cell. The output always passes the
/// smoothness checker; degenerate jitters (validated eagerly up to
/// [`GP_CHECK_LIMIT`] points) trigger regeneration with a fresh jitter.
pub fn generate_perturbed_grid(count: u64, seed: u64, bits: u32) -> Result<Vec<Point>, GenError> {
    let g = count.sqrt();
    if g * g != count {
        return Err(GenError::NotAPerfectSquare(count));
    }
    let side = 1u128 << bits;
    if side < 4 * u128::from(g) {
        return Err(GenError::BitsTooSmall {
            bits,
            needed: crate::ceil_log2(4 * g),
        });
    }
    // Middle half of cell k along one axis, as an inclusive numerator
    // range: [ (4k+1)*side/(4g) , (4k+3)*side/(4g) ]. Nonempty whenever
    // side >= 4g, and ranges of distinct cells never overlap.
    let lo = |k: u64| -> i64 {
        let num = (4 * u128::from(k) + 1) * side;
        (num.div_ceil(4 * u128::from(g))) as i64
    };
    let hi = |k: u64| -> i64 {
        let num = (4 * u128::from(k) + 3) * side;
        (num / (4 * u128::from(g))) as i64
    };
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng_for(seed, attempt);
        let mut points = Vec::with_capacity(count as usize);
        for cx in 0..g {
            for cy in 0..g {
                let x = rng.gen_range(lo(cx)..=hi(cx));
                let y = rng.gen_range(lo(cy)..=hi(cy));
                points.push(Point::new(x, y));
            }
        }
        if points.len() <= GP_CHECK_LIMIT && validate_general_position(&points).is_err() {
            continue;
        }
        let report = check_grid_smoothness(&points, bits, bits).expect("points are in range");
        if report.ok() {
            return Ok(points);
        }
    }
    Err(GenError::GenerationFailed(MAX_ATTEMPTS))
}

/// `count` points sampled uniformly over all representable coordinates,
/// de-duplicated by resampling. No smoothness or general-position promise.
pub fn generate_uniform(count: u64, seed: u64, bits: u32) -> Result<Vec<Point>, GenError> {
    let side = 1i64 << bits;
    if (side as u128 + 1).pow(2) < 2 * u128::from(count) {
        return Err(GenError::BitsTooSmall {
            bits,
            needed: crate::ceil_log2(count.sqrt() + 1),
        });
    }
    let mut rng = rng_for(seed, 0);
    let mut seen = BTreeSet::new();
    let mut points = Vec::with_capacity(count as usize);
    while points.len() < count as usize {
        let p = Point::new(rng.gen_range(0..=side), rng.gen_range(0..=side));
        if seen.insert(p) {
            points.push(p);
        }
    }
    Ok(points)
}

/// A point set that always fails the smoothness check: half the points
/// packed into the bottom-left level-2 cell (making it heavy), the cell to
/// its right kept empty, and the rest spread across the other quadrants so
/// no shallower level trips first.
pub fn generate_adversarial_cluster(count: u64, seed: u64, bits: u32) -> Result<Vec<Point>, GenError> {
    if count < 8 {
        return Err(GenError::TooFewPoints(count));
    }
    let packed_count = count / 2;
    let side = 1i64 << bits;
    let cell = side / 4;
    if bits < 2 || (cell - 1) * (cell - 1) < packed_count as i64 {
        return Err(GenError::BitsTooSmall {
            bits,
            needed: crate::ceil_log2(4 * (packed_count.sqrt() + 2)),
        });
    }
    let mut rng = rng_for(seed, 0);
    let mut seen = BTreeSet::new();
    let mut points = Vec::with_capacity(count as usize);
    while points.len() < packed_count as usize {
        let p = Point::new(rng.gen_range(1..cell), rng.gen_range(1..cell));
        if seen.insert(p) {
            points.push(p);
        }
    }
    // Fillers cycle over the level-2 cells of the other three quadrants,
    // leaving cell (col 1, row 0) untouched so it stays empty.
    let filler_cells: Vec<(i64, i64)> = [
        (0, 2), (2, 2), (2, 0), (0, 3), (3, 3), (3, 1), (1, 2), (2, 3), (3, 0), (1, 3), (3, 2), (2, 1),
    ]
    .to_vec();
    let mut idx = 0usize;
    while points.len() < count as usize {
        let (cx, cy) = filler_cells[idx % filler_cells.len()];
        idx += 1;
        let p = Point::new(
            rng.gen_range(cx * cell + 1..(cx + 1) * cell),
            rng.gen_range(cy * cell + 1..(cy + 1) * cell),
        );
        if seen.insert(p) {
            points.push(p);
        }
    }
    debug_assert!(!check_grid_smoothness(&points, bits, bits)
        .expect("points are in range")
        .ok());
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::square_extent;

    #[test]
    fn perturbed_grid_is_smooth_and_one_point_per_cell() {
        let bits = grid_jitter_bits(16);
        assert_eq!(bits, 8);
        let points = generate_perturbed_grid(16, 7, bits).unwrap();
        assert_eq!(points.len(), 16);
        let mut nums: Vec<u64> = points
            .iter()
            .map(|&p| square_number(p, 2, bits).unwrap())
            .collect();
        nums.sort();
        assert_eq!(nums, (0..16).collect::<Vec<u64>>());
        assert!(check_grid_smoothness(&points, bits, bits).unwrap().ok());
    }

    #[test]
    fn different_seeds_give_different_accepted_sets() {
        let bits = grid_jitter_bits(64);
        let a = generate_perturbed_grid(64, 1, bits).unwrap();
        let b = generate_perturbed_grid(64, 2, bits).unwrap();
        assert_ne!(a, b);
        assert!(check_grid_smoothness(&a, bits, bits).unwrap().ok());
        assert!(check_grid_smoothness(&b, bits, bits).unwrap().ok());
    }

    #[test]
    fn packing_a_quadrant_trips_level_one() {
        // 16 points inside the bottom-left quadrant of [0,16]^2; every
        // other level-1 quadrant is empty.
        let mut points = Vec::new();
        for x in 0..4 {
            for y in 0..4 {
                points.push(Point::new(1 + x, 1 + y));
            }
        }
        let report = check_grid_smoothness(&points, 4, 4).unwrap();
        let v = report.counterexample.expect("violation expected");
        assert_eq!(v.level, 1);
        assert_eq!(v.heavy.num, 0);
        assert_eq!(v.heavy_count, 16);
        assert_eq!(v.empty.num, 1);
        assert_eq!(v.gap_squared, 0);
    }

    #[test]
    fn cluster_generator_fails_at_the_packed_cell() {
        let count = 16;
        let points = generate_adversarial_cluster(count, 3, 4).unwrap();
        assert_eq!(points.len(), count as usize);
        let report = check_grid_smoothness(&points, 4, 4).unwrap();
        let v = report.counterexample.expect("cluster must be rejected");
        assert_eq!(v.level, 2);
        assert_eq!(v.heavy.num, 0, "heavy square is the packed cell");
        assert!(v.heavy_count * v.heavy_count >= count);
        // Independent recount via half-open extent membership rather than
        // square_number.
        let in_cell = |p: Point, sq: crate::geometry::Square| {
            p.x >= sq.x0 && p.x < sq.x1 && p.y >= sq.y0 && p.y < sq.y1
        };
        let heavy_extent = square_extent(v.heavy, 4).unwrap();
        let empty_extent = square_extent(v.empty, 4).unwrap();
        let heavy_recount = points.iter().filter(|&&p| in_cell(p, heavy_extent)).count();
        let empty_recount = points.iter().filter(|&&p| in_cell(p, empty_extent)).count();
        assert_eq!(heavy_recount as u64, v.heavy_count);
        assert_eq!(empty_recount, 0);
    }

    #[test]
    fn uniform_generator_is_deterministic_and_in_range() {
        let a = generate_uniform(100, 9, 5).unwrap();
        let b = generate_uniform(100, 9, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        assert!(a.iter().all(|p| p.x >= 0 && p.x <= 32 && p.y >= 0 && p.y <= 32));
        let mut dedup = a.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 100);
    }

    #[test]
    fn scaling_coordinates_preserves_the_verdict() {
        let points = generate_adversarial_cluster(32, 11, 5).unwrap();
        let scaled: Vec<Point> = points.iter().map(|p| Point::new(p.x * 4, p.y * 4)).collect();
        let v1 = check_grid_smoothness(&points, 5, 5).unwrap().counterexample.unwrap();
        let v2 = check_grid_smoothness(&scaled, 7, 5).unwrap().counterexample.unwrap();
        assert_eq!(v1, v2);
    }

    #[test]
    fn rejects_non_square_counts_and_tiny_clusters() {
        assert_eq!(
            generate_perturbed_grid(15, 0, 8).unwrap_err(),
            GenError::NotAPerfectSquare(15)
        );
        assert_eq!(
            generate_adversarial_cluster(7, 0, 8).unwrap_err(),
            GenError::TooFewPoints(7)
        );
        assert!(matches!(
            generate_perturbed_grid(1 << 20, 0, 4).unwrap_err(),
            GenError::BitsTooSmall { .. }
        ));
    }
}
