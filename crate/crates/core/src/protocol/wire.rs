//! Fixed-width key and field encodings for protocol messages.
//!
//! Every quantity a node sends is packed into bounded-width integer fields:
//! coordinates take `bits + 1` bits each (numerators range over the closed
//! interval `[0, 2^bits]`), square numbers take `2 * bits` bits (levels
//! never exceed `bits`), and composite sort keys concatenate fields so that
//! numeric key order equals the intended lexicographic order.

use crate::{ceil_log2, Point};

/// Width of one coordinate field: numerators live in `[0, 2^bits]`, which
/// is one more value than `bits` bits can hold.
pub fn coord_width(bits: u32) -> u32 {
    bits + 1
}

/// Width of a square-number field. Levels are capped at `bits`, so numbers
/// stay below `4^bits`.
pub fn num_width(bits: u32) -> u32 {
    2 * bits
}

/// Width of the widest payload: an edge, four coordinates.
pub fn edge_width(bits: u32) -> u32 {
    4 * coord_width(bits)
}

/// The smallest per-message budget multiplier that lets every protocol
/// payload fit: the widest payload is an edge (four coordinate fields), and
/// the budget is `c_msg * ceil(log2 n)` bits.
pub fn min_cmsg(bits: u32, n: usize) -> u32 {
    let log = ceil_log2(n as u64).max(1);
    edge_width(bits).div_ceil(log)
}

/// Sort key for a prefixed point: square number, then x, then y. Numeric
/// order on keys equals lexicographic order on (num, x, y).
pub fn point_key(num: u64, p: Point, bits: u32) -> u128 {
    let cw = coord_width(bits);
    (u128::from(num) << (2 * cw)) | ((p.x as u128) << cw) | (p.y as u128)
}

pub fn decode_point_key(key: u128, bits: u32) -> (u64, Point) {
    let cw = coord_width(bits);
    let mask = (1u128 << cw) - 1;
    let y = (key & mask) as i64;
    let x = ((key >> cw) & mask) as i64;
    let num = (key >> (2 * cw)) as u64;
    (num, Point::new(x, y))
}

/// Key for a point as a site identity: x then y, so numeric order equals
/// lexicographic point order.
pub fn site_key(p: Point, bits: u32) -> u128 {
    let cw = coord_width(bits);
    ((p.x as u128) << cw) | (p.y as u128)
}

/// Key for a canonical edge: the four coordinate fields of (u, v)
/// concatenated, u first. Numeric order equals lexicographic order on
/// (u.x, u.y, v.x, v.y).
pub fn edge_key(u: Point, v: Point, bits: u32) -> u128 {
    let cw = coord_width(bits);
    (site_key(u, bits) << (2 * cw)) | site_key(v, bits)
}

#[cfg(test)]
pub fn decode_edge_key(key: u128, bits: u32) -> (Point, Point) {
    let cw = coord_width(bits);
    let mask = (1u128 << (2 * cw)) - 1;
    let (unum, vnum) = ((key >> (2 * cw)) & mask, key & mask);
    let dec = |k: u128| -> Point {
        let m = (1u128 << cw) - 1;
        Point::new(((k >> cw) & m) as i64, (k & m) as i64)
    };
    (dec(unum), dec(vnum))
}

/// Deterministic, monotone map from a `width`-bit key to a home node in
/// `0..n`: proportional position of the key's high bits in the key space.
/// Monotone, so key order and home order agree.
pub fn home_of_key(key: u128, width: u32, n: usize) -> usize {
    debug_assert!(width <= 128 && (width == 128 || key < (1u128 << width)));
    let shift = width.saturating_sub(32);
    let top = (key >> shift) as u128;
    let span = width.min(32);
    let home = (top * n as u128) >> span;
    (home as usize).min(n - 1)
}
