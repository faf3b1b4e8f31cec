//! File formats for points, edges, and Voronoi regions.
//!
//! Point and edge files are line-oriented text: a header with the element
//! count and the coordinate bit width, then one element per line as decimal
//! numerators. Regions are JSON with vertex coordinates written as exact
//! rational strings. Every format round-trips bit for bit, so verification
//! can compare stored outputs against freshly computed ones by equality.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ArcKind, DelaunayEdge, Point, RatPoint, VoronoiRegion};
use crate::MAX_COORD_BITS;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("header promises {expected} entries, file has {actual}")]
    CountMismatch { expected: usize, actual: usize },
    #[error("coordinate bit width {0} exceeds the supported maximum {MAX_COORD_BITS}")]
    BitsTooLarge(u32),
    #[error("line {line}: coordinate {value} outside [0, 2^{bits}]")]
    CoordOutOfRange { line: usize, value: i64, bits: u32 },
    #[error("region {index}: {msg}")]
    Region { index: usize, msg: String },
}

fn check_bits(bits: u32) -> Result<(), FormatError> {
    if bits > MAX_COORD_BITS {
        return Err(FormatError::BitsTooLarge(bits));
    }
    Ok(())
}

fn check_coord(value: i64, bits: u32, line: usize) -> Result<(), FormatError> {
    if value < 0 || value > (1i64 << bits) {
        return Err(FormatError::CoordOutOfRange { line, value, bits });
    }
    Ok(())
}

fn parse_fields<const K: usize>(line: usize, text: &str) -> Result<[i64; K], FormatError> {
    let mut out = [0i64; K];
    let mut parts = text.split_whitespace();
    for slot in out.iter_mut() {
        let field = parts.next().ok_or_else(|| FormatError::Parse {
            line,
            msg: format!("expected {K} integers, got fewer"),
        })?;
        *slot = field.parse().map_err(|_| FormatError::Parse {
            line,
            msg: format!("not an integer: {field:?}"),
        })?;
    }
    if parts.next().is_some() {
        return Err(FormatError::Parse {
            line,
            msg: format!("expected {K} integers, got more"),
        });
    }
    Ok(out)
}

/// Lines of the file with 1-based indices, comments and blanks skipped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Renders a point set as text: header `<count> <bits>`, then `x y` lines.
pub fn points_to_string(points: &[Point], bits: u32) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", points.len(), bits).unwrap();
    for p in points {
        writeln!(out, "{} {}", p.x, p.y).unwrap();
    }
    out
}

/// Parses a point file; returns the points in file order and the bit width.
pub fn parse_points(text: &str) -> Result<(Vec<Point>, u32), FormatError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(FormatError::Parse {
        line: 1,
        msg: "empty file".to_string(),
    })?;
    let [count, bits] = parse_fields::<2>(hline, header)?;
    if count < 0 || bits < 0 {
        return Err(FormatError::Parse {
            line: hline,
            msg: "negative header field".to_string(),
        });
    }
    let bits = bits as u32;
    check_bits(bits)?;
    let mut points = Vec::new();
    for (line, text) in lines {
        let [x, y] = parse_fields::<2>(line, text)?;
        check_coord(x, bits, line)?;
        check_coord(y, bits, line)?;
        points.push(Point::new(x, y));
    }
    if points.len() != count as usize {
        return Err(FormatError::CountMismatch {
            expected: count as usize,
            actual: points.len(),
        });
    }
    Ok((points, bits))
}

/// Renders an edge set as text: header `<count> <bits>`, then
/// `ux uy vx vy` lines in canonical (sorted) order.
pub fn edges_to_string<'a, I>(edges: I, bits: u32) -> String
where
    I: IntoIterator<Item = &'a DelaunayEdge>,
{
    let edges: Vec<&DelaunayEdge> = edges.into_iter().collect();
    let mut out = String::new();
    writeln!(out, "{} {}", edges.len(), bits).unwrap();
    for e in edges {
        writeln!(out, "{} {} {} {}", e.u.x, e.u.y, e.v.x, e.v.y).unwrap();
    }
    out
}

/// Parses an edge file; returns the canonicalized edges in file order and
/// the bit width.
pub fn parse_edges(text: &str) -> Result<(Vec<DelaunayEdge>, u32), FormatError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(FormatError::Parse {
        line: 1,
        msg: "empty file".to_string(),
    })?;
    let [count, bits] = parse_fields::<2>(hline, header)?;
    if count < 0 || bits < 0 {
        return Err(FormatError::Parse {
            line: hline,
            msg: "negative header field".to_string(),
        });
    }
    let bits = bits as u32;
    check_bits(bits)?;
    let mut edges = Vec::new();
    for (line, text) in lines {
        let [ux, uy, vx, vy] = parse_fields::<4>(line, text)?;
        for v in [ux, uy, vx, vy] {
            check_coord(v, bits, line)?;
        }
        let u = Point::new(ux, uy);
        let v = Point::new(vx, vy);
        if u == v {
            return Err(FormatError::Parse {
                line,
                msg: format!("degenerate edge at {u}"),
            });
        }
        edges.push(DelaunayEdge::new(u, v));
    }
    if edges.len() != count as usize {
        return Err(FormatError::CountMismatch {
            expected: count as usize,
            actual: edges.len(),
        });
    }
    Ok((edges, bits))
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
struct RegionsFile {
    bits: u32,
    regions: Vec<RegionJson>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
struct RegionJson {
    site: [i64; 2],
    /// Vertex coordinates as exact rational strings (`"3/4"`, `"2"`).
    vertices: Vec<[String; 2]>,
    arcs: Vec<ArcJson>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum ArcJson {
    Perimeter,
    Bisector([i64; 2]),
}

/// Serializes regions to JSON with exact rational vertex coordinates.
pub fn regions_to_json(regions: &[VoronoiRegion], bits: u32) -> String {
    let file = RegionsFile {
        bits,
        regions: regions
            .iter()
            .map(|r| RegionJson {
                site: [r.site.x, r.site.y],
                vertices: r
                    .vertices
                    .iter()
                    .map(|v| [v.x.to_string(), v.y.to_string()])
                    .collect(),
                arcs: r
                    .arcs
                    .iter()
                    .map(|a| match a {
                        ArcKind::Perimeter => ArcJson::Perimeter,
                        ArcKind::Bisector(p) => ArcJson::Bisector([p.x, p.y]),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("region serialization cannot fail")
}

/// Parses regions from JSON, restoring exact rational coordinates.
pub fn parse_regions(text: &str) -> Result<(Vec<VoronoiRegion>, u32), FormatError> {
    let file: RegionsFile = serde_json::from_str(text)?;
    check_bits(file.bits)?;
    let mut regions = Vec::with_capacity(file.regions.len());
    for (index, r) in file.regions.into_iter().enumerate() {
        if r.vertices.len() != r.arcs.len() {
            return Err(FormatError::Region {
                index,
                msg: format!("{} vertices but {} arcs", r.vertices.len(), r.arcs.len()),
            });
        }
        let mut vertices = Vec::with_capacity(r.vertices.len());
        for [xs, ys] in &r.vertices {
            let parse = |s: &str| {
                BigRational::from_str(s).map_err(|e| FormatError::Region {
                    index,
                    msg: format!("bad rational {s:?}: {e}"),
                })
            };
            vertices.push(RatPoint::new(parse(xs)?, parse(ys)?));
        }
        let arcs = r
            .arcs
            .iter()
            .map(|a| match a {
                ArcJson::Perimeter => ArcKind::Perimeter,
                ArcJson::Bisector([x, y]) => ArcKind::Bisector(Point::new(*x, *y)),
            })
            .collect();
        regions.push(VoronoiRegion {
            site: Point::new(r.site[0], r.site[1]),
            vertices,
            arcs,
        });
    }
    Ok((regions, file.bits))
}

pub fn write_points(path: &Path, points: &[Point], bits: u32) -> Result<(), FormatError> {
    Ok(fs::write(path, points_to_string(points, bits))?)
}

pub fn read_points(path: &Path) -> Result<(Vec<Point>, u32), FormatError> {
    parse_points(&fs::read_to_string(path)?)
}

pub fn write_edges<'a, I>(path: &Path, edges: I, bits: u32) -> Result<(), FormatError>
where
    I: IntoIterator<Item = &'a DelaunayEdge>,
{
    Ok(fs::write(path, edges_to_string(edges, bits))?)
}

pub fn read_edges(path: &Path) -> Result<(Vec<DelaunayEdge>, u32), FormatError> {
    parse_edges(&fs::read_to_string(path)?)
}

pub fn write_regions(path: &Path, regions: &[VoronoiRegion], bits: u32) -> Result<(), FormatError> {
    Ok(fs::write(path, regions_to_json(regions, bits))?)
}

pub fn read_regions(path: &Path) -> Result<(Vec<VoronoiRegion>, u32), FormatError> {
    parse_regions(&fs::read_to_string(path)?)
}
