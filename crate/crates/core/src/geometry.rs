//! Vector glyph geometry.
//!
//! A glyph is a list of strokes, each an open polyline. Coordinates are in
//! glyph-local canvas units with the origin at the glyph box's top-left
//! corner and y growing downwards. The text form is a restricted SVG path
//! (`M x,y L x,y ...`), one `M` per stroke.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("empty path")]
    Empty,
    #[error("path token {token:?} at position {index}: {reason}")]
    BadToken {
        token: String,
        index: usize,
        reason: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned bounds of a point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Bounds {
    pub fn of<'a>(points: impl IntoIterator<Item = &'a Point>) -> Option<Bounds> {
        let mut iter = points.into_iter();
        let first = *iter.next()?;
        Some(iter.fold(Bounds { min: first, max: first }, |b, p| Bounds {
            min: Point::new(b.min.x.min(p.x), b.min.y.min(p.y)),
            max: Point::new(b.max.x.max(p.x), b.max.y.max(p.y)),
        }))
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Geometry {
    pub strokes: Vec<Vec<Point>>,
}

impl Geometry {
    pub fn new(strokes: Vec<Vec<Point>>) -> Self {
        Self { strokes }
    }

    pub fn from_coords(strokes: &[&[(f64, f64)]]) -> Self {
        Self {
            strokes: strokes
                .iter()
                .map(|s| s.iter().map(|&(x, y)| Point::new(x, y)).collect())
                .collect(),
        }
    }

    /// True when there is no stroke with at least one point.
    pub fn is_empty(&self) -> bool {
        self.strokes.iter().all(|s| s.is_empty())
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.strokes.iter().flatten()
    }

    pub fn bounds(&self) -> Option<Bounds> {
        Bounds::of(self.points())
    }

    /// Size of the glyph box in whole canvas units: the box spans from the
    /// local origin to the furthest coordinate, at least one unit each way.
    pub fn box_size(&self) -> (u32, u32) {
        match self.bounds() {
            None => (1, 1),
            Some(b) => (
                (b.max.x.max(0.0).ceil() as u32).max(1),
                (b.max.y.max(0.0).ceil() as u32).max(1),
            ),
        }
    }

    /// Line segments of every stroke, tagged with the stroke index.
    /// A single-point stroke yields one zero-length segment.
    pub fn segments(&self) -> impl Iterator<Item = (usize, Point, Point)> + '_ {
        self.strokes.iter().enumerate().flat_map(|(i, stroke)| {
            let pairs: Vec<(usize, Point, Point)> = if stroke.len() == 1 {
                vec![(i, stroke[0], stroke[0])]
            } else {
                stroke.windows(2).map(|w| (i, w[0], w[1])).collect()
            };
            pairs
        })
    }

    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Geometry {
        Geometry {
            strokes: self
                .strokes
                .iter()
                .map(|s| s.iter().map(|&p| f(p)).collect())
                .collect(),
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Geometry {
        self.map_points(|p| Point::new(p.x + dx, p.y + dy))
    }

    pub fn scaled(&self, sx: f64, sy: f64) -> Geometry {
        self.map_points(|p| Point::new(p.x * sx, p.y * sy))
    }

    /// Union of two glyphs drawn in the same local frame.
    pub fn overlay(&self, other: &Geometry) -> Geometry {
        let mut strokes = self.strokes.clone();
        strokes.extend(other.strokes.iter().cloned());
        Geometry { strokes }
    }

    pub fn parse_path(text: &str) -> Result<Geometry, PathError> {
        let mut strokes: Vec<Vec<Point>> = Vec::new();
        let mut pending: Option<char> = None;
        for (index, token) in text.split_whitespace().enumerate() {
            let bad = |reason| PathError::BadToken { token: token.to_string(), index, reason };
            let mut rest = token;
            if let Some(cmd) = token.chars().next().filter(|c| c.is_ascii_alphabetic()) {
                if cmd != 'M' && cmd != 'L' {
                    return Err(bad("only M and L commands are supported"));
                }
                if cmd == 'L' && strokes.is_empty() {
                    return Err(bad("L before any M"));
                }
                pending = Some(cmd);
                rest = &token[1..];
                if rest.is_empty() {
                    continue;
                }
            }
            let cmd = pending.ok_or_else(|| bad("coordinate before any command"))?;
            let (xs, ys) = rest.split_once(',').ok_or_else(|| bad("expected x,y"))?;
            let x: f64 = xs.parse().map_err(|_| bad("bad x coordinate"))?;
            let y: f64 = ys.parse().map_err(|_| bad("bad y coordinate"))?;
            if !x.is_finite() || !y.is_finite() {
                return Err(bad("non-finite coordinate"));
            }
            match cmd {
                'M' => {
                    strokes.push(vec![Point::new(x, y)]);
                    // further bare coordinates after M continue the stroke
                    pending = Some('L');
                }
                _ => strokes.last_mut().expect("checked above").push(Point::new(x, y)),
            }
        }
        if strokes.is_empty() {
            return Err(PathError::Empty);
        }
        Ok(Geometry { strokes })
    }

    pub fn to_path(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for stroke in &self.strokes {
            for (i, p) in stroke.iter().enumerate() {
                if !first {
                    f.write_str(" ")?;
                }
                first = false;
                let cmd = if i == 0 { 'M' } else { 'L' };
                write!(f, "{cmd}{},{}", p.x, p.y)?;
            }
        }
        Ok(())
    }
}

impl Serialize for Geometry {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Geometry {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Geometry::parse_path(&text).map_err(serde::de::Error::custom)
    }
}

/// Shortest distance between segments `a0-a1` and `b0-b1`.
pub fn segment_distance(a0: Point, a1: Point, b0: Point, b1: Point) -> f64 {
    if segments_intersect(a0, a1, b0, b1) {
        return 0.0;
    }
    point_segment_distance(a0, b0, b1)
        .min(point_segment_distance(a1, b0, b1))
        .min(point_segment_distance(b0, a0, a1))
        .min(point_segment_distance(b1, a0, a1))
}

pub fn point_segment_distance(p: Point, s0: Point, s1: Point) -> f64 {
    let dx = s1.x - s0.x;
    let dy = s1.y - s0.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(s0);
    }
    let t = (((p.x - s0.x) * dx + (p.y - s0.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(s0.x + t * dx, s0.y + t * dy))
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn segments_intersect(a0: Point, a1: Point, b0: Point, b1: Point) -> bool {
    let d1 = cross(b0, b1, a0);
    let d2 = cross(b0, b1, a1);
    let d3 = cross(a0, a1, b0);
    let d4 = cross(a0, a1, b1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}
