//! Plane closure of the movement inventory.
//!
//! A movement that can be written on one plane can be written on every
//! plane. Given the movement glyphs of a registry as a set of
//! (shape, plane, repetition) cells, the closure adds, for every
//! (shape, repetition) pair present on at least one plane, the cells for
//! the planes where it is missing. Repetitions are never extrapolated: a
//! third repetition appears on a plane only if some plane already has it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::registry::{GlyphEntry, MotionCell, Plane, Provenance, Registry, Status, MAX_REPETITION};
use crate::symbol::{GlyphRef, SymbolId};

/// Variation numbers held back for synthesized glyphs.
pub const EXTENSION_VARIATIONS: std::ops::RangeInclusive<u8> = 90..=99;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("motion cell {0} uses an undeclared shape class")]
pub struct UndeclaredShape(pub MotionCell);

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MotionLattice {
    cells: BTreeSet<MotionCell>,
    shape_classes: Vec<String>,
}

impl MotionLattice {
    pub fn new(
        shape_classes: Vec<String>,
        cells: impl IntoIterator<Item = MotionCell>,
    ) -> Result<Self, UndeclaredShape> {
        let cells: BTreeSet<MotionCell> = cells.into_iter().collect();
        if let Some(bad) = cells.iter().find(|c| !shape_classes.contains(&c.shape)) {
            return Err(UndeclaredShape(bad.clone()));
        }
        Ok(Self { cells, shape_classes })
    }

    pub fn cells(&self) -> &BTreeSet<MotionCell> {
        &self.cells
    }

    pub fn shape_classes(&self) -> &[String] {
        &self.shape_classes
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn union(&self, extra: &BTreeSet<MotionCell>) -> MotionLattice {
        MotionLattice {
            cells: self.cells.union(extra).cloned().collect(),
            shape_classes: self.shape_classes.clone(),
        }
    }
}

/// Two or more glyphs sitting on the same lattice cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SharedCell {
    pub cell: MotionCell,
    pub glyphs: Vec<GlyphRef>,
}

impl fmt::Display for SharedCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.glyphs.iter().map(ToString::to_string).collect();
        write!(f, "cell {} is shared by {}", self.cell, ids.join(", "))
    }
}

pub fn lattice_from_registry(registry: &Registry) -> (MotionLattice, Vec<SharedCell>) {
    let mut by_cell: BTreeMap<&MotionCell, Vec<GlyphRef>> = BTreeMap::new();
    for (entry, cell) in registry.motion_entries() {
        by_cell.entry(cell).or_default().push(entry.id);
    }
    let warnings = by_cell
        .iter()
        .filter(|(_, ids)| ids.len() > 1)
        .map(|(cell, ids)| SharedCell { cell: (*cell).clone(), glyphs: ids.clone() })
        .collect();
    let lattice = MotionLattice {
        cells: by_cell.into_keys().cloned().collect(),
        shape_classes: registry.shape_classes().to_vec(),
    };
    (lattice, warnings)
}

/// Cells missing from the plane closure of `lattice`.
pub fn closure(lattice: &MotionLattice) -> BTreeSet<MotionCell> {
    let mut planes_by_move: BTreeMap<(&str, u8), BTreeSet<Plane>> = BTreeMap::new();
    for cell in lattice.cells() {
        planes_by_move.entry((&cell.shape, cell.repetition)).or_default().insert(cell.plane);
    }
    planes_by_move
        .into_iter()
        .flat_map(|((shape, repetition), present)| {
            Plane::ALL
                .into_iter()
                .filter(move |p| !present.contains(p))
                .map(move |plane| MotionCell { shape: shape.to_string(), plane, repetition })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum SynthesisError {
    #[error("no template glyph for {0}")]
    NoTemplate(MotionCell),
    #[error("extension variations of {template} are exhausted; cannot allocate {cell}")]
    IdsExhausted { cell: MotionCell, template: SymbolId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub cell: MotionCell,
    pub template: SymbolId,
    pub entry: GlyphEntry,
}

/// Builds extension glyphs for `added` cells.
///
/// Each cell copies a template glyph of the same shape and repetition from
/// another plane (the first one in plane order), rewritten through the
/// registry's plane-marker table. Ids reuse the template's code with a
/// variation from [`EXTENSION_VARIATIONS`], allocated in sorted cell order.
pub fn synthesize_entries(
    registry: &Registry,
    added: &BTreeSet<MotionCell>,
) -> (Vec<Synthesized>, Vec<SynthesisError>) {
    let mut templates: BTreeMap<(&str, u8), Vec<(Plane, &GlyphEntry)>> = BTreeMap::new();
    for (entry, cell) in registry.motion_entries() {
        if entry.id.as_symbol().is_some() {
            templates.entry((&cell.shape, cell.repetition)).or_default().push((cell.plane, entry));
        }
    }
    for candidates in templates.values_mut() {
        candidates.sort_by_key(|c| (c.0, c.1.id));
    }

    let mut taken: BTreeSet<SymbolId> = BTreeSet::new();
    let mut made = Vec::new();
    let mut failed = Vec::new();
    for cell in added {
        let template = templates
            .get(&(cell.shape.as_str(), cell.repetition))
            .and_then(|c| c.iter().find(|(plane, _)| *plane != cell.plane));
        let Some(&(from_plane, template)) = template else {
            failed.push(SynthesisError::NoTemplate(cell.clone()));
            continue;
        };
        let template_id = template.id.as_symbol().expect("templates are catalog glyphs");
        let new_id = EXTENSION_VARIATIONS
            .filter_map(|v| template_id.with_variation(v).ok())
            .find(|id| !registry.contains(&GlyphRef::Symbol(*id)) && !taken.contains(id));
        let Some(new_id) = new_id else {
            failed.push(SynthesisError::IdsExhausted { cell: cell.clone(), template: template_id });
            continue;
        };
        taken.insert(new_id);
        let geometry = registry.substitutions().edit(from_plane, cell.plane).apply(&template.geometry);
        let entry = GlyphEntry {
            id: GlyphRef::Symbol(new_id),
            name: format!("{}@{}", template.name, cell.plane),
            status: Status::Extension,
            taxonomy: template.taxonomy.clone(),
            feature_tags: template.feature_tags.clone(),
            geometry,
            motion: Some(cell.clone()),
            provenance: Provenance::Synthesized { template: template_id },
        };
        made.push(Synthesized { cell: cell.clone(), template: template_id, entry });
    }
    (made, failed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellMark {
    Existing,
    Added,
    Absent,
}

impl CellMark {
    fn symbol(&self) -> char {
        match self {
            CellMark::Existing => '#',
            CellMark::Added => '+',
            CellMark::Absent => '.',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureRecord {
    pub shape: String,
    pub plane: Plane,
    pub repetition: u8,
    pub new_id: SymbolId,
    pub template_id: SymbolId,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureReport {
    pub shape_classes: Vec<String>,
    pub existing: BTreeSet<MotionCell>,
    pub added: BTreeSet<MotionCell>,
    pub records: Vec<ClosureRecord>,
    pub failures: Vec<SynthesisError>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub synthesized: Vec<GlyphEntry>,
}

impl ClosureReport {
    pub fn total_after(&self) -> usize {
        self.existing.len() + self.added.len()
    }

    /// Rows follow [`Plane::ALL`], columns repetitions 1..=3.
    pub fn grid(&self, shape: &str) -> [[CellMark; MAX_REPETITION as usize]; 4] {
        let mut grid = [[CellMark::Absent; MAX_REPETITION as usize]; 4];
        for (row, plane) in Plane::ALL.into_iter().enumerate() {
            for rep in 1..=MAX_REPETITION {
                let cell = MotionCell { shape: shape.to_string(), plane, repetition: rep };
                grid[row][rep as usize - 1] = if self.existing.contains(&cell) {
                    CellMark::Existing
                } else if self.added.contains(&cell) {
                    CellMark::Added
                } else {
                    CellMark::Absent
                };
            }
        }
        grid
    }

    /// Text grid per shape (`#` existing, `+` added, `.` absent) and totals.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for shape in &self.shape_classes {
            let _ = writeln!(out, "{shape}");
            let _ = writeln!(out, "  {:<10} 1  2  3", "");
            for (row, plane) in self.grid(shape).iter().zip(Plane::ALL) {
                let marks: Vec<String> = row.iter().map(|m| m.symbol().to_string()).collect();
                let _ = writeln!(out, "  {:<10} {}", plane.as_str(), marks.join("  "));
            }
        }
        let _ = writeln!(out, "existing: {}", self.existing.len());
        let _ = writeln!(out, "added: {}", self.added.len());
        let _ = writeln!(out, "total: {}", self.total_after());
        for r in &self.records {
            let _ = writeln!(out, "{}", record_line(r));
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        for f in &self.failures {
            let _ = writeln!(out, "unsynthesizable: {f}");
        }
        out
    }

    /// One added cell per line: shape, plane, repetition, new id, template id.
    pub fn render_records(&self) -> String {
        self.records.iter().map(|r| record_line(r) + "\n").collect()
    }
}

fn record_line(r: &ClosureRecord) -> String {
    format!("{}\t{}\t{}\t{}\t{}", r.shape, r.plane, r.repetition, r.new_id, r.template_id)
}

pub fn closure_report(registry: &Registry) -> ClosureReport {
    let (lattice, shared) = lattice_from_registry(registry);
    let added = closure(&lattice);
    let (made, failures) = synthesize_entries(registry, &added);
    ClosureReport {
        shape_classes: lattice.shape_classes().to_vec(),
        existing: lattice.cells().clone(),
        added,
        records: made
            .iter()
            .map(|s| ClosureRecord {
                shape: s.cell.shape.clone(),
                plane: s.cell.plane,
                repetition: s.cell.repetition,
                new_id: s.entry.id.as_symbol().expect("synthesized ids are symbols"),
                template_id: s.template,
            })
            .collect(),
        failures,
        warnings: shared.iter().map(ToString::to_string).collect(),
        synthesized: made.into_iter().map(|s| s.entry).collect(),
    }
}
