//! The glyph catalog.
//!
//! A [`Registry`] is loaded once from a line-oriented manifest and is
//! immutable afterwards. Besides the id index it keeps a three-level
//! taxonomy index (category / group / family) and a view of the movement
//! glyphs keyed by their [`MotionCell`].
//!
//! Manifest layout (UTF-8, tab separated, `#` starts a comment line):
//!
//! ```text
//! @version   <label>
//! @shapes    curve,straight,...
//! @subst     <from-plane>  <to-plane>  <edit>
//! <id> <name> <status> <category> <group> <family> <tags|-> <shape:plane:rep|-> <path>
//! ```
//!
//! Edits are `;`-separated lists of `identity`, `flip-h`, `flip-v`,
//! `rotate-90`, `drop-last` and `add:<path>`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Geometry, PathError, Point};
use crate::symbol::{GlyphRef, SymbolId, SymbolIdError};

/// Feature tag carried by every movement glyph.
pub const MOTION_TAG: &str = "motion";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "official-2004")]
    Official2004,
    #[serde(rename = "official-2008")]
    Official2008,
    #[serde(rename = "extension")]
    Extension,
    #[serde(rename = "user")]
    User,
}

impl Status {
    pub const ALL: [Status; 4] = [Status::Official2004, Status::Official2008, Status::Extension, Status::User];

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Official2004 => "official-2004",
            Status::Official2008 => "official-2008",
            Status::Extension => "extension",
            Status::User => "user",
        }
    }

    /// Official and extension glyphs are the conventional inventory.
    pub fn is_conventional(&self) -> bool {
        !matches!(self, Status::User)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Status::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown status {s:?}"))
    }
}

/// Movement plane rows: vertical, horizontal, sagittal downward, sagittal lateral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Plane {
    V,
    H,
    #[serde(rename = "S_down")]
    SDown,
    #[serde(rename = "S_lateral")]
    SLateral,
}

impl Plane {
    pub const ALL: [Plane; 4] = [Plane::V, Plane::H, Plane::SDown, Plane::SLateral];

    pub fn as_str(&self) -> &'static str {
        match self {
            Plane::V => "V",
            Plane::H => "H",
            Plane::SDown => "S_down",
            Plane::SLateral => "S_lateral",
        }
    }

    pub fn index(&self) -> usize {
        Plane::ALL.iter().position(|p| p == self).expect("plane in ALL")
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Plane {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Plane::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown plane {s:?}"))
    }
}

pub const MAX_REPETITION: u8 = 3;

/// One point of the movement lattice.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MotionCell {
    pub shape: String,
    pub plane: Plane,
    pub repetition: u8,
}

impl MotionCell {
    pub fn new(shape: impl Into<String>, plane: Plane, repetition: u8) -> Result<Self, String> {
        let shape = shape.into();
        if shape.is_empty() || shape.contains([':', '\t', ',']) {
            return Err(format!("bad shape class {shape:?}"));
        }
        if !(1..=MAX_REPETITION).contains(&repetition) {
            return Err(format!("repetition {repetition} out of range 1..3"));
        }
        Ok(Self { shape, plane, repetition })
    }
}

impl fmt::Display for MotionCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.shape, self.plane, self.repetition)
    }
}

impl FromStr for MotionCell {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':');
        let (Some(shape), Some(plane), Some(rep), None) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(format!("motion cell {s:?}: expected shape:plane:repetition"));
        };
        let repetition = rep.parse().map_err(|_| format!("bad repetition {rep:?}"))?;
        MotionCell::new(shape, plane.parse()?, repetition)
    }
}

/// Where an entry came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Catalog,
    Synthesized { template: SymbolId },
    Drawn { author: String, session: String, created_at: DateTime<Utc> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlyphEntry {
    pub id: GlyphRef,
    pub name: String,
    pub status: Status,
    pub taxonomy: [String; 3],
    pub feature_tags: BTreeSet<String>,
    pub geometry: Geometry,
    pub motion: Option<MotionCell>,
    pub provenance: Provenance,
}

impl GlyphEntry {
    pub fn has_tag(&self, tag: &str) -> bool {
        self.feature_tags.contains(tag)
    }

    /// Tags or taxonomy labels: what the glyph is for.
    pub fn has_function(&self, class: &str) -> bool {
        self.has_tag(class) || self.taxonomy.iter().any(|label| label == class)
    }

    pub fn check(&self) -> Result<(), EntryError> {
        if self.taxonomy.iter().any(|l| l.trim().is_empty() || l == "-") {
            return Err(EntryError::DanglingTaxonomy);
        }
        if self.geometry.is_empty() {
            return Err(EntryError::EmptyGeometry);
        }
        match (self.has_tag(MOTION_TAG), &self.motion) {
            (true, None) => Err(EntryError::MotionTagWithoutCell),
            (false, Some(_)) => Err(EntryError::CellWithoutMotionTag),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntryError {
    #[error("taxonomy path has an empty level")]
    DanglingTaxonomy,
    #[error("empty geometry")]
    EmptyGeometry,
    #[error("tagged `motion` but has no motion cell")]
    MotionTagWithoutCell,
    #[error("has a motion cell but is not tagged `motion`")]
    CellWithoutMotionTag,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EditOp {
    Identity,
    FlipH,
    FlipV,
    Rotate90,
    DropLast,
    Add(Vec<Point>),
}

/// Geometry rewrite that turns a movement glyph drawn for one plane into
/// the same movement on another plane.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlaneEdit(pub Vec<EditOp>);

impl PlaneEdit {
    pub fn identity() -> Self {
        PlaneEdit(vec![EditOp::Identity])
    }

    pub fn apply(&self, geometry: &Geometry) -> Geometry {
        let mut g = geometry.clone();
        for op in &self.0 {
            let (w, h) = g.box_size();
            let (w, h) = (w as f64, h as f64);
            g = match op {
                EditOp::Identity => g,
                EditOp::FlipH => g.map_points(|p| Point::new(w - p.x, p.y)),
                EditOp::FlipV => g.map_points(|p| Point::new(p.x, h - p.y)),
                // quarter turn clockwise, kept inside the positive quadrant
                EditOp::Rotate90 => g.map_points(|p| Point::new(h - p.y, p.x)),
                EditOp::DropLast => {
                    let mut strokes = g.strokes;
                    if strokes.len() > 1 {
                        strokes.pop();
                    }
                    Geometry::new(strokes)
                }
                EditOp::Add(stroke) => {
                    let mut strokes = g.strokes;
                    strokes.push(stroke.clone());
                    Geometry::new(strokes)
                }
            };
        }
        g
    }
}

impl fmt::Display for PlaneEdit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("identity");
        }
        for (i, op) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            match op {
                EditOp::Identity => f.write_str("identity")?,
                EditOp::FlipH => f.write_str("flip-h")?,
                EditOp::FlipV => f.write_str("flip-v")?,
                EditOp::Rotate90 => f.write_str("rotate-90")?,
                EditOp::DropLast => f.write_str("drop-last")?,
                EditOp::Add(stroke) => write!(f, "add:{}", Geometry::new(vec![stroke.clone()]))?,
            }
        }
        Ok(())
    }
}

impl FromStr for PlaneEdit {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut ops = Vec::new();
        for part in s.split(';').map(str::trim) {
            let op = match part {
                "identity" => EditOp::Identity,
                "flip-h" => EditOp::FlipH,
                "flip-v" => EditOp::FlipV,
                "rotate-90" => EditOp::Rotate90,
                "drop-last" => EditOp::DropLast,
                other => match other.strip_prefix("add:") {
                    Some(path) => {
                        let g = Geometry::parse_path(path).map_err(|e| e.to_string())?;
                        let [stroke] = <[Vec<Point>; 1]>::try_from(g.strokes)
                            .map_err(|_| "add: takes exactly one stroke".to_string())?;
                        EditOp::Add(stroke)
                    }
                    None => return Err(format!("unknown edit {other:?}")),
                },
            };
            ops.push(op);
        }
        Ok(PlaneEdit(ops))
    }
}

/// Plane-marker substitution table, total over ordered plane pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionTable {
    edits: BTreeMap<(Plane, Plane), PlaneEdit>,
}

impl SubstitutionTable {
    pub fn identity() -> Self {
        let mut edits = BTreeMap::new();
        for from in Plane::ALL {
            for to in Plane::ALL {
                edits.insert((from, to), PlaneEdit::identity());
            }
        }
        Self { edits }
    }

    /// Builds a table from explicit rules. Same-plane pairs default to
    /// identity; every other ordered pair must be given.
    pub fn from_rules(rules: impl IntoIterator<Item = ((Plane, Plane), PlaneEdit)>) -> Result<Self, (Plane, Plane)> {
        let mut edits: BTreeMap<_, _> = rules.into_iter().collect();
        for from in Plane::ALL {
            edits.entry((from, from)).or_insert_with(PlaneEdit::identity);
            for to in Plane::ALL {
                if !edits.contains_key(&(from, to)) {
                    return Err((from, to));
                }
            }
        }
        Ok(Self { edits })
    }

    pub fn edit(&self, from: Plane, to: Plane) -> &PlaneEdit {
        &self.edits[&(from, to)]
    }

    pub fn rules(&self) -> impl Iterator<Item = (&(Plane, Plane), &PlaneEdit)> {
        self.edits.iter()
    }
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("reading manifest: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate id {id} (first defined on line {first_line})")]
    DuplicateId { id: GlyphRef, line: usize, first_line: usize },
    #[error("line {line}: glyph {id}: {source}")]
    Entry { id: GlyphRef, line: usize, source: EntryError },
    #[error("line {line}: glyph {id} uses undeclared motion shape {shape:?}")]
    UndeclaredShape { id: GlyphRef, line: usize, shape: String },
    #[error("substitution table has no rule for {0} -> {1}")]
    IncompleteSubstitution(Plane, Plane),
}

#[derive(Debug, Error, PartialEq)]
pub enum RegistryError {
    #[error("unknown glyph {0}")]
    UnknownGlyph(GlyphRef),
    #[error("unknown taxonomy prefix {0:?}")]
    UnknownPrefix(Vec<String>),
    #[error("taxonomy prefix {0:?} is deeper than three levels")]
    PrefixTooDeep(Vec<String>),
    #[error("variant {0} is not in the registry")]
    MissingVariant(SymbolId),
    #[error(transparent)]
    Id(#[from] SymbolIdError),
}

/// Result of one taxonomy navigation step.
#[derive(Debug, Clone, PartialEq)]
pub enum TaxonomyChildren<'a> {
    Labels(Vec<String>),
    Glyphs(Vec<&'a GlyphEntry>),
}

#[derive(Debug, Clone)]
pub struct Registry {
    version: String,
    entries: Vec<GlyphEntry>,
    by_id: HashMap<GlyphRef, usize>,
    taxonomy: BTreeMap<String, BTreeMap<String, BTreeMap<String, Vec<usize>>>>,
    shape_classes: Vec<String>,
    substitutions: SubstitutionTable,
}

impl Default for Registry {
    fn default() -> Self {
        Registry::build(String::new(), Vec::new(), Vec::new(), SubstitutionTable::identity())
            .expect("empty registry is valid")
    }
}

impl Registry {
    /// Assembles a registry from checked parts. Entries are re-sorted by id.
    pub fn build(
        version: String,
        mut entries: Vec<GlyphEntry>,
        shape_classes: Vec<String>,
        substitutions: SubstitutionTable,
    ) -> Result<Self, RegistryBuildError> {
        entries.sort_by_key(|e| e.id);
        let mut by_id = HashMap::with_capacity(entries.len());
        let mut taxonomy: BTreeMap<String, BTreeMap<String, BTreeMap<String, Vec<usize>>>> = BTreeMap::new();
        let declared: BTreeSet<&str> = shape_classes.iter().map(String::as_str).collect();
        for (index, entry) in entries.iter().enumerate() {
            if by_id.insert(entry.id, index).is_some() {
                return Err(RegistryBuildError::DuplicateId(entry.id));
            }
            entry.check().map_err(|e| RegistryBuildError::Entry(entry.id, e))?;
            if let Some(cell) = &entry.motion {
                if !declared.contains(cell.shape.as_str()) {
                    return Err(RegistryBuildError::UndeclaredShape(entry.id, cell.shape.clone()));
                }
            }
            let [cat, group, family] = &entry.taxonomy;
            taxonomy
                .entry(cat.clone())
                .or_default()
                .entry(group.clone())
                .or_default()
                .entry(family.clone())
                .or_default()
                .push(index);
        }
        Ok(Self { version, entries, by_id, taxonomy, shape_classes, substitutions })
    }

    pub fn from_manifest_str(text: &str) -> Result<Self, ManifestError> {
        let mut version = String::new();
        let mut shapes: Option<Vec<String>> = None;
        let mut rules = Vec::new();
        let mut entries = Vec::new();
        let mut first_line: HashMap<GlyphRef, usize> = HashMap::new();
        let mut lines_of = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let syntax = |message: String| ManifestError::Syntax { line, message };
            let raw = raw.trim_end_matches('\r');
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            match fields[0] {
                "@version" => {
                    version = fields.get(1).ok_or_else(|| syntax("@version needs a label".into()))?.to_string();
                }
                "@shapes" => {
                    let list = fields.get(1).ok_or_else(|| syntax("@shapes needs a list".into()))?;
                    shapes = Some(list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect());
                }
                "@subst" => {
                    if fields.len() != 4 {
                        return Err(syntax("@subst needs from, to and edit".into()));
                    }
                    let from: Plane = fields[1].parse().map_err(syntax)?;
                    let to: Plane = fields[2].parse().map_err(syntax)?;
                    let edit: PlaneEdit = fields[3].parse().map_err(syntax)?;
                    rules.push(((from, to), edit));
                }
                directive if directive.starts_with('@') => {
                    return Err(syntax(format!("unknown directive {directive}")));
                }
                _ => {
                    let entry = parse_record(&fields).map_err(syntax)?;
                    if let Some(&first) = first_line.get(&entry.id) {
                        return Err(ManifestError::DuplicateId { id: entry.id, line, first_line: first });
                    }
                    entry.check().map_err(|source| ManifestError::Entry { id: entry.id, line, source })?;
                    if let (Some(declared), Some(cell)) = (&shapes, &entry.motion) {
                        if !declared.contains(&cell.shape) {
                            return Err(ManifestError::UndeclaredShape { id: entry.id, line, shape: cell.shape.clone() });
                        }
                    }
                    first_line.insert(entry.id, line);
                    lines_of.push(line);
                    entries.push(entry);
                }
            }
        }

        let shape_classes = match shapes {
            Some(list) => list,
            None => entries
                .iter()
                .filter_map(|e| e.motion.as_ref().map(|c| c.shape.clone()))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
        };
        let substitutions = if rules.is_empty() {
            SubstitutionTable::identity()
        } else {
            SubstitutionTable::from_rules(rules).map_err(|(a, b)| ManifestError::IncompleteSubstitution(a, b))?
        };
        Registry::build(version, entries, shape_classes, substitutions).map_err(|e| {
            // per-line checks above already cover every build error
            ManifestError::Syntax { line: 0, message: e.to_string() }
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ManifestError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_manifest_str(&text)
    }

    /// Manifest text for this registry; `from_manifest_str` reads it back.
    pub fn to_manifest_string(&self) -> String {
        let mut out = String::new();
        if !self.version.is_empty() {
            out.push_str(&format!("@version\t{}\n", self.version));
        }
        if !self.shape_classes.is_empty() {
            out.push_str(&format!("@shapes\t{}\n", self.shape_classes.join(",")));
        }
        if self.substitutions != SubstitutionTable::identity() {
            for ((from, to), edit) in self.substitutions.rules() {
                if from != to {
                    out.push_str(&format!("@subst\t{from}\t{to}\t{edit}\n"));
                }
            }
        }
        for e in &self.entries {
            out.push_str(&format_record(e));
            out.push('\n');
        }
        out
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All entries, sorted by id.
    pub fn entries(&self) -> &[GlyphEntry] {
        &self.entries
    }

    pub fn get(&self, id: &GlyphRef) -> Option<&GlyphEntry> {
        self.by_id.get(id).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, id: &GlyphRef) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn shape_classes(&self) -> &[String] {
        &self.shape_classes
    }

    pub fn substitutions(&self) -> &SubstitutionTable {
        &self.substitutions
    }

    pub fn motion_entries(&self) -> impl Iterator<Item = (&GlyphEntry, &MotionCell)> {
        self.entries.iter().filter_map(|e| e.motion.as_ref().map(|c| (e, c)))
    }

    /// A new registry holding these entries plus `extra`.
    pub fn extended(&self, extra: Vec<GlyphEntry>) -> Result<Self, RegistryBuildError> {
        let mut entries = self.entries.clone();
        entries.extend(extra);
        Registry::build(self.version.clone(), entries, self.shape_classes.clone(), self.substitutions.clone())
    }

    pub fn count_by_status(&self) -> BTreeMap<Status, usize> {
        let mut counts: BTreeMap<Status, usize> = Status::ALL.iter().map(|&s| (s, 0)).collect();
        for e in &self.entries {
            *counts.entry(e.status).or_default() += 1;
        }
        counts
    }

    /// One navigation step. Zero or one label returns child labels; two
    /// labels return the group's glyphs across all families; three labels
    /// narrow to a single family. Labels and glyphs come back sorted.
    pub fn taxonomy_children<S: AsRef<str>>(&self, prefix: &[S]) -> Result<TaxonomyChildren<'_>, RegistryError> {
        let labels: Vec<String> = prefix.iter().map(|s| s.as_ref().to_string()).collect();
        let unknown = || RegistryError::UnknownPrefix(labels.clone());
        match labels.as_slice() {
            [] => Ok(TaxonomyChildren::Labels(self.taxonomy.keys().cloned().collect())),
            [cat] => {
                let groups = self.taxonomy.get(cat).ok_or_else(unknown)?;
                Ok(TaxonomyChildren::Labels(groups.keys().cloned().collect()))
            }
            [cat, group] => {
                let families = self.taxonomy.get(cat).and_then(|g| g.get(group)).ok_or_else(unknown)?;
                let mut indices: Vec<usize> = families.values().flatten().copied().collect();
                indices.sort_unstable();
                Ok(TaxonomyChildren::Glyphs(indices.into_iter().map(|i| &self.entries[i]).collect()))
            }
            [cat, group, family] => {
                let indices = self
                    .taxonomy
                    .get(cat)
                    .and_then(|g| g.get(group))
                    .and_then(|f| f.get(family))
                    .ok_or_else(unknown)?;
                Ok(TaxonomyChildren::Glyphs(indices.iter().map(|&i| &self.entries[i]).collect()))
            }
            _ => Err(RegistryError::PrefixTooDeep(labels)),
        }
    }

    /// Family labels under a category/group, for palettes that show them.
    pub fn taxonomy_families(&self, category: &str, group: &str) -> Option<Vec<String>> {
        self.taxonomy.get(category)?.get(group).map(|f| f.keys().cloned().collect())
    }

    pub fn transform_variant(
        &self,
        id: SymbolId,
        delta_rotation: i32,
        toggle_mirror: bool,
        new_fill: Option<u8>,
    ) -> Result<SymbolId, RegistryError> {
        if !self.contains(&GlyphRef::Symbol(id)) {
            return Err(RegistryError::UnknownGlyph(GlyphRef::Symbol(id)));
        }
        let mut variant = id.rotated(delta_rotation);
        if toggle_mirror {
            variant = variant.mirrored();
        }
        if let Some(fill) = new_fill {
            variant = variant.with_fill(fill)?;
        }
        if self.contains(&GlyphRef::Symbol(variant)) {
            Ok(variant)
        } else {
            Err(RegistryError::MissingVariant(variant))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryBuildError {
    #[error("duplicate id {0}")]
    DuplicateId(GlyphRef),
    #[error("glyph {0}: {1}")]
    Entry(GlyphRef, EntryError),
    #[error("glyph {0} uses undeclared motion shape {1:?}")]
    UndeclaredShape(GlyphRef, String),
}

fn parse_record(fields: &[&str]) -> Result<GlyphEntry, String> {
    if fields.len() != 9 {
        return Err(format!("expected 9 tab-separated fields, found {}", fields.len()));
    }
    let id = GlyphRef::parse(fields[0]).map_err(|e| e.to_string())?;
    let status: Status = fields[2].parse()?;
    let feature_tags: BTreeSet<String> = if fields[6] == "-" {
        BTreeSet::new()
    } else {
        fields[6].split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
    };
    let motion = if fields[7] == "-" { None } else { Some(fields[7].parse::<MotionCell>()?) };
    let geometry = Geometry::parse_path(fields[8]).map_err(|e: PathError| format!("geometry: {e}"))?;
    Ok(GlyphEntry {
        id,
        name: fields[1].to_string(),
        status,
        taxonomy: [fields[3].to_string(), fields[4].to_string(), fields[5].to_string()],
        feature_tags,
        geometry,
        motion,
        provenance: Provenance::Catalog,
    })
}

fn format_record(e: &GlyphEntry) -> String {
    let tags = if e.feature_tags.is_empty() {
        "-".to_string()
    } else {
        e.feature_tags.iter().cloned().collect::<Vec<_>>().join(",")
    };
    let motion = e.motion.as_ref().map_or_else(|| "-".to_string(), |c| c.to_string());
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        e.id, e.name, e.status, e.taxonomy[0], e.taxonomy[1], e.taxonomy[2], tags, motion, e.geometry
    )
}
