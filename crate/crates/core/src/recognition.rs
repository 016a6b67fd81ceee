//! Freehand sketch matching.
//!
//! Sketches and catalog glyphs go through the same pipeline: the strokes
//! are fitted into a square bitmap (aspect preserved, centred), drawn one
//! pixel wide, and summarised as a 72-value [`ShapeDescriptor`]:
//!
//! * 64 ink-occupancy ratios over an 8x8 grid of zones;
//! * 8 direction bins (45° each) counting which of its eight neighbours
//!   every ink pixel connects to, normalised to sum to 1.
//!
//! Matching is exact k-nearest-neighbour search under Euclidean distance.
//! Nothing here is rotation invariant: a rotated glyph is a different glyph.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Bounds, Geometry, Point};
use crate::registry::{GlyphEntry, Registry, Status};
use crate::symbol::GlyphRef;

pub const DEFAULT_SIDE: usize = 64;
pub const ZONES: usize = 8;
pub const DIRECTION_BINS: usize = 8;
pub const DESCRIPTOR_LEN: usize = ZONES * ZONES + DIRECTION_BINS;

// (dx, dy) per direction bin, counterclockwise from east; y grows downwards.
const NEIGHBOURS: [(i32, i32); DIRECTION_BINS] = [(1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1)];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SketchError {
    #[error("sketch has no strokes")]
    NoStrokes,
    #[error("stroke {0} has fewer than two points")]
    ShortStroke(usize),
    #[error("stroke {stroke} point {point} lies outside the {width}x{height} drawing area")]
    OutsideCanvas { stroke: usize, point: usize, width: f64, height: f64 },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Freehand input: ordered polylines in device coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokeSketch {
    strokes: Vec<Vec<Point>>,
    width: f64,
    height: f64,
}

impl StrokeSketch {
    pub fn new(strokes: Vec<Vec<Point>>, width: f64, height: f64) -> Result<Self, SketchError> {
        if strokes.is_empty() {
            return Err(SketchError::NoStrokes);
        }
        for (i, stroke) in strokes.iter().enumerate() {
            if stroke.len() < 2 {
                return Err(SketchError::ShortStroke(i));
            }
            for (j, p) in stroke.iter().enumerate() {
                let inside = p.x.is_finite() && p.y.is_finite() && (0.0..=width).contains(&p.x) && (0.0..=height).contains(&p.y);
                if !inside {
                    return Err(SketchError::OutsideCanvas { stroke: i, point: j, width, height });
                }
            }
        }
        Ok(Self { strokes, width, height })
    }

    /// A sketch that traces `geometry` exactly, on a canvas just large
    /// enough to hold it. Single-point strokes become zero-length segments.
    pub fn from_geometry(geometry: &Geometry) -> Result<Self, SketchError> {
        let strokes: Vec<Vec<Point>> = geometry
            .strokes
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| if s.len() == 1 { vec![s[0], s[0]] } else { s.clone() })
            .collect();
        let (w, h) = geometry.box_size();
        Self::new(strokes, w as f64, h as f64)
    }

    /// Parses the sketch text format: an optional `canvas <w> <h>` line,
    /// then one stroke per line as space-separated `x,y` pairs. Blank lines
    /// and `#` comments are skipped. Without a canvas line the drawing area
    /// is the smallest one holding every point.
    pub fn parse(text: &str) -> Result<Self, SketchError> {
        let mut canvas: Option<(f64, f64)> = None;
        let mut strokes = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let syntax = |message: String| SketchError::Syntax { line, message };
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            if let Some(rest) = raw.strip_prefix("canvas") {
                let dims: Vec<f64> = rest
                    .split_whitespace()
                    .map(|v| v.parse::<f64>().map_err(|_| syntax(format!("bad canvas size {v:?}"))))
                    .collect::<Result<_, _>>()?;
                let [w, h] = dims[..] else {
                    return Err(syntax("canvas needs width and height".into()));
                };
                canvas = Some((w, h));
                continue;
            }
            let stroke = raw
                .split_whitespace()
                .map(|pair| {
                    let (x, y) = pair.split_once(',').ok_or_else(|| syntax(format!("expected x,y, got {pair:?}")))?;
                    let x = x.parse().map_err(|_| syntax(format!("bad x in {pair:?}")))?;
                    let y = y.parse().map_err(|_| syntax(format!("bad y in {pair:?}")))?;
                    Ok(Point::new(x, y))
                })
                .collect::<Result<Vec<_>, SketchError>>()?;
            strokes.push(stroke);
        }
        let (w, h) = match canvas {
            Some(dims) => dims,
            None => Bounds::of(strokes.iter().flatten()).map_or((0.0, 0.0), |b| (b.max.x.max(0.0), b.max.y.max(0.0))),
        };
        Self::new(strokes, w, h)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("canvas {} {}\n", self.width, self.height);
        for stroke in &self.strokes {
            let pairs: Vec<String> = stroke.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
            out.push_str(&pairs.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn strokes(&self) -> &[Vec<Point>] {
        &self.strokes
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    /// Glyph geometry in the sketch's own coordinates, shifted so the ink
    /// starts at the origin.
    pub fn to_geometry(&self) -> Geometry {
        let g = Geometry::new(self.strokes.clone());
        match g.bounds() {
            Some(b) => g.translated(-b.min.x, -b.min.y),
            None => g,
        }
    }
}

/// Square binary image, row-major, `true` = ink.
#[derive(Clone, PartialEq, Eq)]
pub struct Bitmap {
    side: usize,
    bits: Vec<bool>,
}

impl Bitmap {
    pub fn new(side: usize) -> Self {
        Self { side, bits: vec![false; side * side] }
    }

    pub fn filled(side: usize) -> Self {
        Self { side, bits: vec![true; side * side] }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.side + x]
    }

    pub fn set(&mut self, x: usize, y: usize) {
        self.bits[y * self.side + x] = true;
    }

    pub fn ink(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Fraction of pixels that carry ink.
    pub fn density(&self) -> f64 {
        self.ink() as f64 / self.bits.len() as f64
    }

    fn ink_at(&self, x: i32, y: i32) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.side && (y as usize) < self.side && self.get(x as usize, y as usize)
    }
}

impl fmt::Debug for Bitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Bitmap {}x{}", self.side, self.side)?;
        for row in self.bits.chunks(self.side) {
            let line: String = row.iter().map(|&b| if b { '#' } else { '.' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Fits `strokes` into a `side`x`side` bitmap and draws them one pixel wide.
///
/// The ink bounding box is scaled uniformly so its longer side spans the
/// bitmap, then centred; translation and uniform scale of the input
/// therefore do not change the result. A single point becomes a centred dot.
pub fn rasterize(strokes: &[Vec<Point>], side: usize) -> Bitmap {
    assert!(side >= 2, "bitmap side must be at least 2");
    let mut bitmap = Bitmap::new(side);
    let Some(bounds) = Bounds::of(strokes.iter().flatten()) else {
        return bitmap;
    };
    let span = (side - 1) as f64;
    let extent = bounds.width().max(bounds.height());
    let (scale, ox, oy) = if extent > 0.0 {
        let scale = span / extent;
        (scale, (span - bounds.width() * scale) / 2.0, (span - bounds.height() * scale) / 2.0)
    } else {
        (0.0, span / 2.0, span / 2.0)
    };
    let project = |p: &Point| ((p.x - bounds.min.x) * scale + ox, (p.y - bounds.min.y) * scale + oy);
    let mut plot = |x: f64, y: f64| {
        let px = (x.round() as i64).clamp(0, side as i64 - 1) as usize;
        let py = (y.round() as i64).clamp(0, side as i64 - 1) as usize;
        bitmap.set(px, py);
    };
    for stroke in strokes {
        let projected: Vec<(f64, f64)> = stroke.iter().map(project).collect();
        if let [(x, y)] = projected[..] {
            plot(x, y);
        }
        for pair in projected.windows(2) {
            let ((x0, y0), (x1, y1)) = (pair[0], pair[1]);
            let steps = (x1 - x0).abs().max((y1 - y0).abs()).ceil().max(1.0) as usize;
            for i in 0..=steps {
                let t = i as f64 / steps as f64;
                plot(x0 + (x1 - x0) * t, y0 + (y1 - y0) * t);
            }
        }
    }
    bitmap
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no ink to describe")]
pub struct EmptyInk;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeDescriptor(pub [f64; DESCRIPTOR_LEN]);

impl ShapeDescriptor {
    pub fn occupancy(&self) -> &[f64] {
        &self.0[..ZONES * ZONES]
    }

    pub fn directions(&self) -> &[f64] {
        &self.0[ZONES * ZONES..]
    }

    pub fn distance(&self, other: &ShapeDescriptor) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn from_bitmap(bitmap: &Bitmap) -> Result<Self, EmptyInk> {
        if bitmap.ink() == 0 {
            return Err(EmptyInk);
        }
        let side = bitmap.side();
        let mut values = [0.0; DESCRIPTOR_LEN];
        for zy in 0..ZONES {
            for zx in 0..ZONES {
                let (x0, x1) = (zx * side / ZONES, (zx + 1) * side / ZONES);
                let (y0, y1) = (zy * side / ZONES, (zy + 1) * side / ZONES);
                let area = (x1 - x0) * (y1 - y0);
                if area == 0 {
                    continue;
                }
                let ink = (y0..y1).flat_map(|y| (x0..x1).map(move |x| (x, y))).filter(|&(x, y)| bitmap.get(x, y)).count();
                values[zy * ZONES + zx] = ink as f64 / area as f64;
            }
        }
        let mut bins = [0.0; DIRECTION_BINS];
        for y in 0..side as i32 {
            for x in 0..side as i32 {
                if !bitmap.ink_at(x, y) {
                    continue;
                }
                for (bin, (dx, dy)) in NEIGHBOURS.iter().enumerate() {
                    if bitmap.ink_at(x + dx, y + dy) {
                        bins[bin] += 1.0;
                    }
                }
            }
        }
        let total: f64 = bins.iter().sum();
        if total > 0.0 {
            for (slot, count) in values[ZONES * ZONES..].iter_mut().zip(bins) {
                *slot = count / total;
            }
        }
        Ok(Self(values))
    }

    pub fn of_strokes(strokes: &[Vec<Point>]) -> Result<Self, EmptyInk> {
        Self::from_bitmap(&rasterize(strokes, DEFAULT_SIDE))
    }

    pub fn of_geometry(geometry: &Geometry) -> Result<Self, EmptyInk> {
        Self::of_strokes(&geometry.strokes)
    }

    pub fn of_sketch(sketch: &StrokeSketch) -> Self {
        Self::of_strokes(sketch.strokes()).expect("a valid sketch always has ink")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub id: GlyphRef,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("the form index is empty")]
    EmptyIndex,
    #[error("k must be at least 1")]
    ZeroK,
}

#[derive(Debug, Clone)]
struct Indexed {
    id: GlyphRef,
    status: Status,
    descriptor: ShapeDescriptor,
}

/// Descriptors of a set of glyphs, built once and then read-only.
#[derive(Debug, Clone, Default)]
pub struct FormIndex {
    items: Vec<Indexed>,
}

impl FormIndex {
    pub fn build(registry: &Registry) -> Self {
        Self::from_entries(registry.entries())
    }

    /// Entries with empty ink are skipped. Items are kept sorted by id.
    pub fn from_entries<'a>(entries: impl IntoIterator<Item = &'a GlyphEntry>) -> Self {
        let mut items: Vec<Indexed> = entries
            .into_iter()
            .filter_map(|e| {
                ShapeDescriptor::of_geometry(&e.geometry)
                    .ok()
                    .map(|descriptor| Indexed { id: e.id, status: e.status, descriptor })
            })
            .collect();
        items.sort_by_key(|i| i.id);
        Self { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn descriptor(&self, id: &GlyphRef) -> Option<&ShapeDescriptor> {
        self.items.binary_search_by(|i| i.id.cmp(id)).ok().map(|at| &self.items[at].descriptor)
    }

    /// The `k` closest glyphs accepted by `keep`, nearest first; equal
    /// distances are ordered by id.
    pub fn nearest(&self, query: &ShapeDescriptor, k: usize, keep: impl Fn(GlyphRef, Status) -> bool) -> Vec<Match> {
        let mut ranked: Vec<Match> = self
            .items
            .iter()
            .filter(|i| keep(i.id, i.status))
            .map(|i| Match { id: i.id, distance: query.distance(&i.descriptor) })
            .collect();
        ranked.sort_by(|a, b| match a.distance.total_cmp(&b.distance) {
            Ordering::Equal => a.id.cmp(&b.id),
            other => other,
        });
        ranked.truncate(k);
        ranked
    }

    pub fn match_sketch(&self, sketch: &StrokeSketch, k: usize) -> Result<Vec<Match>, MatchError> {
        if k == 0 {
            return Err(MatchError::ZeroK);
        }
        if self.items.is_empty() {
            return Err(MatchError::EmptyIndex);
        }
        Ok(self.nearest(&ShapeDescriptor::of_sketch(sketch), k, |_, _| true))
    }
}
