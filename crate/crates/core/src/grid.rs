//! The dyadic grid hierarchy over the coordinate square.
//!
//! Level `i` tiles the square `[0, 2^bits]^2` into `2^i x 2^i` basic
//! squares, numbered column-wise: `num = col * 2^i + row`. Cells are
//! half-open with the square's top and right boundary closed, so every
//! point belongs to exactly one cell per level. `tl_region` is a cell plus
//! up to two layers of same-level neighbors (at most 25 cells), the
//! neighborhood that bounds all geometric influence under the smoothness
//! assumption.

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Point, Square};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("point {0} lies outside the coordinate square")]
    OutsideUnitSquare(Point),
    #[error("grid level {level} exceeds the coordinate depth {bits}")]
    LevelTooDeep { level: u32, bits: u32 },
    #[error("grid levels differ: {0} vs {1}")]
    LevelMismatch(u32, u32),
}

/// One basic square: `level` selects the grid, `num` the cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GridSquareId {
    pub level: u32,
    pub num: u64,
}

impl GridSquareId {
    pub fn new(level: u32, num: u64) -> Self {
        debug_assert!(level < 64 && num < 1u64 << (2 * level.min(31)));
        GridSquareId { level, num }
    }

    pub fn col(&self) -> u64 {
        self.num >> self.level
    }

    pub fn row(&self) -> u64 {
        self.num & ((1u64 << self.level) - 1)
    }

    fn from_col_row(level: u32, col: u64, row: u64) -> Self {
        GridSquareId {
            level,
            num: (col << level) | row,
        }
    }
}

impl std::fmt::Display for GridSquareId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "level {} num {}", self.level, self.num)
    }
}

/// A point tagged with its cell number at some level; the distributed sort
/// key. Ordering is (num, x, y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrefixedPoint {
    pub num: u64,
    pub point: Point,
}

/// The cell number of `p` at `level` in a `bits`-deep coordinate square.
/// Cells are half-open; the top/right boundary belongs to the last cell.
pub fn square_number(p: Point, level: u32, bits: u32) -> Result<u64, GridError> {
    if level > bits {
        return Err(GridError::LevelTooDeep { level, bits });
    }
    let side = 1i64 << bits;
    if p.x < 0 || p.y < 0 || p.x > side || p.y > side {
        return Err(GridError::OutsideUnitSquare(p));
    }
    let last = (1u64 << level) - 1;
    let col = ((p.x >> (bits - level)) as u64).min(last);
    let row = ((p.y >> (bits - level)) as u64).min(last);
    Ok((col << level) | row)
}

/// Tags `p` with its cell number at `level`.
pub fn make_prefixed(p: Point, level: u32, bits: u32) -> Result<PrefixedPoint, GridError> {
    Ok(PrefixedPoint {
        num: square_number(p, level, bits)?,
        point: p,
    })
}

/// The closed extent of a basic square in numerator coordinates.
pub fn square_extent(id: GridSquareId, bits: u32) -> Result<Square, GridError> {
    if id.level > bits {
        return Err(GridError::LevelTooDeep {
            level: id.level,
            bits,
        });
    }
    let side = 1i64 << (bits - id.level);
    let (col, row) = (id.col() as i64, id.row() as i64);
    Ok(Square {
        x0: col * side,
        y0: row * side,
        x1: (col + 1) * side,
        y1: (row + 1) * side,
    })
}

/// The square and up to two layers of same-level neighbors around it,
/// clipped to the grid; between 1 and 25 squares, sorted by num.
pub fn tl_region(id: GridSquareId) -> Vec<GridSquareId> {
    let last = (1u64 << id.level) - 1;
    let (c, r) = (id.col(), id.row());
    let mut out = Vec::with_capacity(25);
    for col in c.saturating_sub(2)..=(c + 2).min(last) {
        for row in r.saturating_sub(2)..=(r + 2).min(last) {
            out.push(GridSquareId::from_col_row(id.level, col, row));
        }
    }
    out.sort();
    out
}

/// The four squares at the next level whose union tiles `id`, sorted by num.
pub fn children(id: GridSquareId) -> [GridSquareId; 4] {
    let (c, r) = (id.col(), id.row());
    let l = id.level + 1;
    let mut kids = [
        GridSquareId::from_col_row(l, 2 * c, 2 * r),
        GridSquareId::from_col_row(l, 2 * c, 2 * r + 1),
        GridSquareId::from_col_row(l, 2 * c + 1, 2 * r),
        GridSquareId::from_col_row(l, 2 * c + 1, 2 * r + 1),
    ];
    kids.sort();
    kids
}

/// The square one level up containing `id`; `None` at level 0.
pub fn parent(id: GridSquareId) -> Option<GridSquareId> {
    if id.level == 0 {
        return None;
    }
    Some(GridSquareId::from_col_row(
        id.level - 1,
        id.col() / 2,
        id.row() / 2,
    ))
}

/// Is the gap between the two closed squares at most `sqrt(d_squared)`
/// times their side length? Exact: the gap between squares with column
/// and row offsets (dc, dr) is `hypot(max(dc-1,0), max(dr-1,0))` side
/// lengths, so the comparison clears both the square root and the side.
pub fn grid_distance_leq(
    a: GridSquareId,
    b: GridSquareId,
    d_squared: u64,
) -> Result<bool, GridError> {
    if a.level != b.level {
        return Err(GridError::LevelMismatch(a.level, b.level));
    }
    let gap = |x: u64, y: u64| x.abs_diff(y).saturating_sub(1);
    let (gc, gr) = (gap(a.col(), b.col()), gap(a.row(), b.row()));
    Ok(gc * gc + gr * gr <= d_squared)
}
