//! The sign display: a bounded canvas of placed glyphs.
//!
//! Documents are values. Every edit returns a new document and leaves the
//! receiver untouched, so an editor gets undo by keeping old values around.
//!
//! Canvas units are abstract integers with the origin at the top-left; a
//! placement anchors the glyph box's top-left corner. Glyphs are kept in
//! stacking order, lowest `z` first.

use std::collections::BTreeMap;
use std::fmt;

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Geometry;
use crate::policy::{Role, Viewer};
use crate::registry::Registry;
use crate::symbol::{GlyphRef, UserGlyphId};
use crate::user_glyph::UserGlyphs;

pub const DEFAULT_CANVAS: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Written,
    Transcribed,
}

impl Mode {
    fn as_str(&self) -> &'static str {
        match self {
            Mode::Written => "written",
            Mode::Transcribed => "transcribed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Meta {
    pub author: String,
    pub gloss: Option<String>,
    pub mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedGlyph {
    pub glyph: GlyphRef,
    pub x: u32,
    pub y: u32,
    pub z: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignDocument {
    width: u32,
    height: u32,
    glyphs: Vec<PlacedGlyph>,
    meta: Meta,
    /// Geometry of every user glyph the document places.
    embedded: BTreeMap<UserGlyphId, Geometry>,
}

impl Default for SignDocument {
    fn default() -> Self {
        Self::new(DEFAULT_CANVAS, DEFAULT_CANVAS)
    }
}

/// Anything that can supply glyph geometry for placement and rendering.
pub trait GlyphSource {
    fn geometry(&self, glyph: &GlyphRef) -> Option<&Geometry>;
}

impl GlyphSource for Registry {
    fn geometry(&self, glyph: &GlyphRef) -> Option<&Geometry> {
        self.get(glyph).map(|e| &e.geometry)
    }
}

impl<T: UserGlyphs> GlyphSource for (&Registry, &T) {
    fn geometry(&self, glyph: &GlyphRef) -> Option<&Geometry> {
        match glyph {
            GlyphRef::Symbol(_) => self.0.geometry(glyph),
            GlyphRef::User(id) => self.1.user_glyph(*id).map(|u| &u.geometry),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditError {
    #[error("glyph {glyph} at ({x},{y}) overflows the canvas by {overflow_x} x {overflow_y} units")]
    OutOfBounds {
        glyph: GlyphRef,
        x: u32,
        y: u32,
        overflow_x: u32,
        overflow_y: u32,
    },
    #[error("glyph {0} cannot be resolved")]
    Dangling(GlyphRef),
    #[error("no glyph at z={0}")]
    NoSuchLayer(i32),
}

impl SignDocument {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            glyphs: Vec::new(),
            meta: Meta::default(),
            embedded: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, meta: Meta) -> Self {
        self.meta = meta;
        self
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    /// Placements in stacking order.
    pub fn glyphs(&self) -> &[PlacedGlyph] {
        &self.glyphs
    }

    pub fn embedded(&self) -> &BTreeMap<UserGlyphId, Geometry> {
        &self.embedded
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    fn resolve<'a>(&'a self, source: &'a dyn GlyphSource, glyph: &GlyphRef) -> Option<&'a Geometry> {
        source
            .geometry(glyph)
            .or_else(|| glyph.as_user().and_then(|id| self.embedded.get(&id)))
    }

    fn check_fit(&self, glyph: GlyphRef, geometry: &Geometry, x: u32, y: u32) -> Result<(), EditError> {
        let (w, h) = geometry.box_size();
        let overflow_x = (x as u64 + w as u64).saturating_sub(self.width as u64) as u32;
        let overflow_y = (y as u64 + h as u64).saturating_sub(self.height as u64) as u32;
        if overflow_x > 0 || overflow_y > 0 {
            return Err(EditError::OutOfBounds { glyph, x, y, overflow_x, overflow_y });
        }
        Ok(())
    }

    /// Adds `glyph` on top of the stack with its box anchored at (x, y).
    pub fn place(&self, source: &dyn GlyphSource, glyph: GlyphRef, x: u32, y: u32) -> Result<Self, EditError> {
        let geometry = self.resolve(source, &glyph).ok_or(EditError::Dangling(glyph))?;
        self.check_fit(glyph, geometry, x, y)?;
        let geometry = geometry.clone();
        let z = self.glyphs.last().map_or(0, |g| g.z + 1);
        let mut next = self.clone();
        if let GlyphRef::User(id) = glyph {
            next.embedded.entry(id).or_insert(geometry);
        }
        next.glyphs.push(PlacedGlyph { glyph, x, y, z });
        Ok(next)
    }

    pub fn move_to(&self, source: &dyn GlyphSource, z: i32, x: u32, y: u32) -> Result<Self, EditError> {
        let index = self.layer(z)?;
        let glyph = self.glyphs[index].glyph;
        let geometry = self.resolve(source, &glyph).ok_or(EditError::Dangling(glyph))?;
        self.check_fit(glyph, geometry, x, y)?;
        let mut next = self.clone();
        next.glyphs[index].x = x;
        next.glyphs[index].y = y;
        Ok(next)
    }

    pub fn remove(&self, z: i32) -> Result<Self, EditError> {
        let index = self.layer(z)?;
        let mut next = self.clone();
        let removed = next.glyphs.remove(index);
        if let GlyphRef::User(id) = removed.glyph {
            if !next.glyphs.iter().any(|g| g.glyph == removed.glyph) {
                next.embedded.remove(&id);
            }
        }
        Ok(next)
    }

    /// Moves the glyph at `z` to the top of the stack.
    pub fn raise(&self, z: i32) -> Result<Self, EditError> {
        let index = self.layer(z)?;
        let mut next = self.clone();
        let mut placed = next.glyphs.remove(index);
        placed.z = next.glyphs.last().map_or(0, |g| g.z + 1);
        next.glyphs.push(placed);
        Ok(next)
    }

    fn layer(&self, z: i32) -> Result<usize, EditError> {
        self.glyphs.iter().position(|g| g.z == z).ok_or(EditError::NoSuchLayer(z))
    }

    /// User glyphs referenced by the document.
    pub fn user_glyphs(&self) -> impl Iterator<Item = UserGlyphId> + '_ {
        let mut ids: Vec<UserGlyphId> = self.glyphs.iter().filter_map(|g| g.glyph.as_user()).collect();
        ids.sort();
        ids.dedup();
        ids.into_iter()
    }
}

// ---------------------------------------------------------------------------
// XML

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: <{element}>: {message}")]
pub struct XmlError {
    pub line: usize,
    pub element: String,
    pub message: String,
}

impl SignDocument {
    /// Canonical XML: fixed attribute order, two-space indent, LF endings.
    pub fn to_xml(&self) -> String {
        let mut out = format!("<sign w=\"{}\" h=\"{}\"", self.width, self.height);
        if self.meta.mode != Mode::Written {
            out.push_str(&format!(" mode=\"{}\"", self.meta.mode.as_str()));
        }
        if let Some(gloss) = &self.meta.gloss {
            out.push_str(&format!(" gloss=\"{}\"", escape(gloss.as_str())));
        }
        if !self.meta.author.is_empty() {
            out.push_str(&format!(" author=\"{}\"", escape(self.meta.author.as_str())));
        }
        if self.glyphs.is_empty() {
            out.push_str("/>\n");
            return out;
        }
        out.push_str(">\n");
        for g in &self.glyphs {
            match g.glyph {
                GlyphRef::Symbol(id) => {
                    out.push_str(&format!("  <glyph ref=\"{id}\" x=\"{}\" y=\"{}\" z=\"{}\"/>\n", g.x, g.y, g.z));
                }
                GlyphRef::User(id) => {
                    out.push_str(&format!("  <userglyph id=\"{id}\" x=\"{}\" y=\"{}\" z=\"{}\">\n", g.x, g.y, g.z));
                    let path = self.embedded.get(&id).map(Geometry::to_path).unwrap_or_default();
                    out.push_str(&format!("    <path d=\"{path}\"/>\n"));
                    out.push_str("  </userglyph>\n");
                }
            }
        }
        out.push_str("</sign>\n");
        out
    }

    pub fn from_xml(text: &str) -> Result<Self, XmlError> {
        XmlParser::new(text).parse()
    }
}

struct XmlParser<'a> {
    text: &'a str,
    reader: Reader<&'a [u8]>,
}

struct Attrs {
    element: String,
    line: usize,
    values: Vec<(String, String)>,
}

impl Attrs {
    fn err(&self, message: impl Into<String>) -> XmlError {
        XmlError { line: self.line, element: self.element.clone(), message: message.into() }
    }

    fn only(&self, allowed: &[&str]) -> Result<(), XmlError> {
        for (key, _) in &self.values {
            if !allowed.contains(&key.as_str()) {
                return Err(self.err(format!("unexpected attribute {key:?}")));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn required(&self, key: &str) -> Result<&str, XmlError> {
        self.get(key).ok_or_else(|| self.err(format!("missing attribute {key:?}")))
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<T, XmlError> {
        let raw = self.required(key)?;
        raw.parse().map_err(|_| self.err(format!("attribute {key}={raw:?} is not a valid number")))
    }
}

impl<'a> XmlParser<'a> {
    fn new(text: &'a str) -> Self {
        let mut reader = Reader::from_str(text);
        reader.config_mut().trim_text(true);
        Self { text, reader }
    }

    fn line(&self) -> usize {
        let pos = (self.reader.buffer_position() as usize).min(self.text.len());
        self.text[..pos].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn error(&self, element: &str, message: impl Into<String>) -> XmlError {
        XmlError { line: self.line(), element: element.to_string(), message: message.into() }
    }

    fn attrs(&self, start: &BytesStart<'_>) -> Result<Attrs, XmlError> {
        let element = String::from_utf8_lossy(start.name().as_ref()).into_owned();
        let line = self.line();
        let mut values: Vec<(String, String)> = Vec::new();
        for attr in start.attributes() {
            let attr = attr.map_err(|e| XmlError { line, element: element.clone(), message: e.to_string() })?;
            let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
            let value = attr
                .unescape_value()
                .map_err(|e| XmlError { line, element: element.clone(), message: e.to_string() })?
                .into_owned();
            if values.iter().any(|(k, _)| *k == key) {
                return Err(XmlError { line, element, message: format!("duplicate attribute {key:?}") });
            }
            values.push((key, value));
        }
        Ok(Attrs { element, line, values })
    }

    fn next(&mut self) -> Result<Event<'a>, XmlError> {
        loop {
            let event = self.reader.read_event().map_err(|e| self.error("?", e.to_string()))?;
            match event {
                Event::Comment(_) | Event::Decl(_) | Event::PI(_) | Event::DocType(_) => continue,
                other => return Ok(other),
            }
        }
    }

    fn parse(mut self) -> Result<SignDocument, XmlError> {
        let (root, has_children) = match self.next()? {
            Event::Start(e) => (self.attrs(&e)?, true),
            Event::Empty(e) => (self.attrs(&e)?, false),
            Event::Eof => return Err(self.error("sign", "document is empty")),
            _ => return Err(self.error("sign", "expected <sign> root element")),
        };
        if root.element != "sign" {
            return Err(root.err("root element must be <sign>"));
        }
        root.only(&["w", "h", "mode", "gloss", "author"])?;
        let width: u32 = root.number("w")?;
        let height: u32 = root.number("h")?;
        if width == 0 || height == 0 {
            return Err(root.err("canvas must be at least 1x1"));
        }
        let mode = match root.get("mode") {
            None | Some("written") => Mode::Written,
            Some("transcribed") => Mode::Transcribed,
            Some(other) => return Err(root.err(format!("unknown mode {other:?}"))),
        };
        let meta = Meta {
            author: root.get("author").unwrap_or_default().to_string(),
            gloss: root.get("gloss").map(str::to_string),
            mode,
        };
        let mut doc = SignDocument::new(width, height).with_meta(meta);
        let mut z_lines: BTreeMap<i32, usize> = BTreeMap::new();
        let mut claim_z = |attrs: &Attrs, z: i32| match z_lines.insert(z, attrs.line) {
            Some(first) => Err(attrs.err(format!("duplicate z value {z} (first used on line {first})"))),
            None => Ok(()),
        };

        if has_children {
            loop {
                match self.next()? {
                    Event::Empty(e) => {
                        let attrs = self.attrs(&e)?;
                        match attrs.element.as_str() {
                            "glyph" => {
                                let placed = self.placed(&attrs, "ref")?;
                                if placed.glyph.as_user().is_some() {
                                    return Err(attrs.err("user glyphs must use <userglyph>"));
                                }
                                claim_z(&attrs, placed.z)?;
                                doc.glyphs.push(placed);
                            }
                            "userglyph" => return Err(attrs.err("missing <path> child")),
                            other => return Err(attrs.err(format!("unexpected element <{other}>"))),
                        }
                    }
                    Event::Start(e) => {
                        let attrs = self.attrs(&e)?;
                        if attrs.element != "userglyph" {
                            return Err(attrs.err(format!("unexpected element <{}> with children", attrs.element)));
                        }
                        let placed = self.placed(&attrs, "id")?;
                        let GlyphRef::User(id) = placed.glyph else {
                            return Err(attrs.err("userglyph id must be U-<n>"));
                        };
                        claim_z(&attrs, placed.z)?;
                        let geometry = self.user_path()?;
                        if let Some(existing) = doc.embedded.get(&id) {
                            if *existing != geometry {
                                return Err(attrs.err(format!("conflicting geometry for {id}")));
                            }
                        }
                        doc.embedded.insert(id, geometry);
                        doc.glyphs.push(placed);
                    }
                    Event::End(e) if e.name().as_ref() == b"sign" => break,
                    Event::Text(_) | Event::CData(_) => return Err(self.error("sign", "unexpected text content")),
                    Event::Eof => return Err(self.error("sign", "unclosed <sign>")),
                    _ => return Err(self.error("sign", "unexpected markup")),
                }
            }
        }
        match self.next()? {
            Event::Eof => {}
            _ => return Err(self.error("sign", "content after </sign>")),
        }

        doc.glyphs.sort_by_key(|g| g.z);
        Ok(doc)
    }

    fn placed(&self, attrs: &Attrs, ref_key: &str) -> Result<PlacedGlyph, XmlError> {
        attrs.only(&[ref_key, "x", "y", "z"])?;
        let raw = attrs.required(ref_key)?;
        let glyph = GlyphRef::parse(raw).map_err(|e| attrs.err(e.to_string()))?;
        Ok(PlacedGlyph { glyph, x: attrs.number("x")?, y: attrs.number("y")?, z: attrs.number("z")? })
    }

    fn user_path(&mut self) -> Result<Geometry, XmlError> {
        let geometry = match self.next()? {
            Event::Empty(e) => {
                let attrs = self.attrs(&e)?;
                if attrs.element != "path" {
                    return Err(attrs.err("expected <path>"));
                }
                attrs.only(&["d"])?;
                Geometry::parse_path(attrs.required("d")?).map_err(|e| attrs.err(e.to_string()))?
            }
            _ => return Err(self.error("userglyph", "expected a single <path/> child")),
        };
        match self.next()? {
            Event::End(e) if e.name().as_ref() == b"userglyph" => Ok(geometry),
            _ => Err(self.error("userglyph", "expected </userglyph> after <path/>")),
        }
    }
}

// ---------------------------------------------------------------------------
// SVG

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot render unresolved glyphs: {}", .0.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(", "))]
pub struct RenderError(pub Vec<GlyphRef>);

impl SignDocument {
    /// One `<rect>` for the canvas, then one `<g>` per glyph in paint order.
    pub fn render_svg(&self, source: &dyn GlyphSource, scale: f64) -> Result<String, RenderError> {
        let mut missing = Vec::new();
        let mut groups = String::new();
        for g in &self.glyphs {
            let Some(geometry) = self.resolve(source, &g.glyph) else {
                missing.push(g.glyph);
                continue;
            };
            groups.push_str(&format!(
                "  <g class=\"glyph\" data-ref=\"{}\" data-z=\"{}\" transform=\"translate({},{}) scale({})\">\n",
                g.glyph,
                g.z,
                g.x as f64 * scale,
                g.y as f64 * scale,
                scale
            ));
            groups.push_str(&format!(
                "    <path d=\"{geometry}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\" stroke-linecap=\"round\" stroke-linejoin=\"round\"/>\n"
            ));
            groups.push_str("  </g>\n");
        }
        if !missing.is_empty() {
            return Err(RenderError(missing));
        }
        let w = self.width as f64 * scale;
        let h = self.height as f64 * scale;
        Ok(format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n  <rect class=\"canvas\" x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{groups}</svg>\n"
        ))
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticCode {
    OutOfBounds,
    DanglingRef,
    PolicyViolation,
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticCode::OutOfBounds => "out-of-bounds",
            DiagnosticCode::DanglingRef => "dangling-ref",
            DiagnosticCode::PolicyViolation => "policy-violation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub glyph: GlyphRef,
    pub z: i32,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{} z={}]: {}", self.code, self.glyph, self.z, self.message)
    }
}

/// Checks bounds, reference resolution and the user-glyph reuse policy.
/// An empty list means the document is valid for `viewer`.
pub fn validate(
    doc: &SignDocument,
    registry: &Registry,
    users: &dyn UserGlyphs,
    viewer: &Viewer,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for g in doc.glyphs() {
        let diag = |code, message: String| Diagnostic { code, glyph: g.glyph, z: g.z, message };
        let geometry = match g.glyph {
            GlyphRef::Symbol(_) => registry.get(&g.glyph).map(|e| &e.geometry),
            GlyphRef::User(id) => {
                let stored = users.user_glyph(id);
                if stored.is_none() {
                    out.push(diag(DiagnosticCode::DanglingRef, format!("user glyph {id} is not in the store")));
                }
                if viewer.role == Role::User && !viewer.may_reuse(stored.map(|u| u.session.as_str())) {
                    out.push(diag(
                        DiagnosticCode::PolicyViolation,
                        format!("user glyph {id} was drawn in another sign session"),
                    ));
                }
                stored.map(|u| &u.geometry).or_else(|| doc.embedded().get(&id))
            }
        };
        let Some(geometry) = geometry else {
            if g.glyph.as_symbol().is_some() {
                out.push(diag(DiagnosticCode::DanglingRef, format!("{} is not in the registry", g.glyph)));
            }
            continue;
        };
        if let Err(EditError::OutOfBounds { overflow_x, overflow_y, .. }) = doc.check_fit(g.glyph, geometry, g.x, g.y) {
            out.push(diag(
                DiagnosticCode::OutOfBounds,
                format!("overflows the {}x{} canvas by {overflow_x} x {overflow_y}", doc.width, doc.height),
            ));
        }
    }
    out
}
