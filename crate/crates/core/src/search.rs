//! Taxonomy search over catalog and user glyphs, and corpus queries over
//! stored signs.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::policy::Viewer;
use crate::registry::{Registry, Status};
use crate::store::{SignId, Store};
use crate::symbol::GlyphRef;
use crate::user_glyph::{UserGlyphs, USER_CATEGORY};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaxonomyQuery {
    /// Glyphs carrying every one of these function classes.
    Tags(Vec<String>),
    /// Glyphs filed under this taxonomy prefix.
    Path(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchHit {
    pub id: GlyphRef,
    pub name: String,
    pub status: Status,
    pub taxonomy: [String; 3],
}

/// Catalog hits first, in id order, then the user glyphs `viewer` may reuse.
pub fn taxonomy_search(
    registry: &Registry,
    users: &dyn UserGlyphs,
    viewer: &Viewer,
    query: &TaxonomyQuery,
) -> Vec<SearchHit> {
    let user_entries: Vec<_> = users
        .all_user_glyphs()
        .into_iter()
        .filter(|g| viewer.may_reuse(Some(&g.session)))
        .map(|g| g.to_entry())
        .collect();
    registry
        .entries()
        .iter()
        .chain(user_entries.iter())
        .filter(|e| match query {
            TaxonomyQuery::Tags(tags) => tags.iter().all(|t| e.has_function(t)),
            TaxonomyQuery::Path(path) => path.len() <= 3 && path.iter().zip(&e.taxonomy).all(|(p, t)| p == t),
        })
        .map(|e| SearchHit { id: e.id, name: e.name.clone(), status: e.status, taxonomy: e.taxonomy.clone() })
        .collect()
}

/// Whether `glyph` carries function `class`, looking in the catalog and then
/// the store.
pub fn glyph_has_function(glyph: &GlyphRef, class: &str, registry: &Registry, users: &dyn UserGlyphs) -> bool {
    match glyph {
        GlyphRef::Symbol(_) => registry.get(glyph).is_some_and(|e| e.has_function(class)),
        GlyphRef::User(id) => users.user_glyph(*id).is_some_and(|u| u.has_function(class)),
    }
}

/// Stored signs containing at least one glyph of function `class`, in id order.
pub fn corpus_query(store: &Store, registry: &Registry, class: &str) -> Vec<SignId> {
    store
        .signs()
        .filter(|s| s.document.glyphs().iter().any(|g| glyph_has_function(&g.glyph, class, registry, store)))
        .map(|s| s.id)
        .collect()
}

/// Every function class `glyph` answers to under [`glyph_has_function`].
pub fn glyph_classes(glyph: &GlyphRef, registry: &Registry, users: &dyn UserGlyphs) -> BTreeSet<String> {
    match glyph {
        GlyphRef::Symbol(_) => registry
            .get(glyph)
            .map(|e| e.taxonomy.iter().chain(&e.feature_tags).cloned().collect())
            .unwrap_or_default(),
        GlyphRef::User(id) => users
            .user_glyph(*id)
            .map(|u| u.tags.iter().cloned().chain([USER_CATEGORY.to_string()]).collect())
            .unwrap_or_default(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassCount {
    pub class: String,
    /// Signs with at least one glyph of the class.
    pub signs: usize,
    /// Placements of glyphs of the class across all signs.
    pub glyphs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub signs: usize,
    pub signs_with_user_glyphs: usize,
    /// Sorted by class name.
    pub classes: Vec<ClassCount>,
}

pub fn corpus_stats(store: &Store, registry: &Registry) -> CorpusStats {
    let mut classes: BTreeMap<String, ClassCount> = BTreeMap::new();
    let mut signs = 0;
    let mut with_user = 0;
    for sign in store.signs() {
        signs += 1;
        if sign.document.user_glyphs().next().is_some() {
            with_user += 1;
        }
        let mut seen = BTreeSet::new();
        for g in sign.document.glyphs() {
            for class in glyph_classes(&g.glyph, registry, store) {
                let row = classes
                    .entry(class.clone())
                    .or_insert_with(|| ClassCount { class: class.clone(), signs: 0, glyphs: 0 });
                row.glyphs += 1;
                if seen.insert(class) {
                    row.signs += 1;
                }
            }
        }
    }
    CorpusStats { signs, signs_with_user_glyphs: with_user, classes: classes.into_values().collect() }
}

impl CorpusStats {
    /// Aligned table followed by the two totals.
    pub fn render_text(&self) -> String {
        let width = self.classes.iter().map(|c| c.class.len()).max().unwrap_or(0).max("class".len());
        let mut out = format!("{:<width$}  {:>5}  {:>6}\n", "class", "signs", "glyphs");
        for c in &self.classes {
            out += &format!("{:<width$}  {:>5}  {:>6}\n", c.class, c.signs, c.glyphs);
        }
        out += &format!("signs: {}\nsigns with user glyphs: {}\n", self.signs, self.signs_with_user_glyphs);
        out
    }

    /// `class<TAB>signs<TAB>glyphs` per line, then the two totals.
    pub fn render_records(&self) -> String {
        let mut out: String = self.classes.iter().map(|c| format!("{}\t{}\t{}\n", c.class, c.signs, c.glyphs)).collect();
        out += &format!("#signs\t{}\n#signs-with-user-glyphs\t{}\n", self.signs, self.signs_with_user_glyphs);
        out
    }
}
