//! Glyphs drawn freehand by users.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::geometry::Geometry;
use crate::registry::{GlyphEntry, Provenance, Status, MOTION_TAG};
use crate::symbol::{GlyphRef, UserGlyphId};

/// Top taxonomy label under which user glyphs are listed.
pub const USER_CATEGORY: &str = "user";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserGlyph {
    pub id: UserGlyphId,
    pub geometry: Geometry,
    /// Declared function tags; these, not any component glyphs, drive search.
    pub tags: BTreeSet<String>,
    pub author: String,
    /// Editing session the glyph was drawn in.
    pub session: String,
    pub created_at: DateTime<Utc>,
}

impl UserGlyph {
    pub fn has_function(&self, class: &str) -> bool {
        self.tags.contains(class) || class == USER_CATEGORY
    }

    /// Catalog-shaped view, filed under `user / <first tag> / freehand`.
    pub fn to_entry(&self) -> GlyphEntry {
        let primary = self.tags.iter().next().cloned().unwrap_or_else(|| "untagged".into());
        let mut feature_tags = self.tags.clone();
        // user glyphs have no lattice position
        feature_tags.remove(MOTION_TAG);
        GlyphEntry {
            id: GlyphRef::User(self.id),
            name: self.id.to_string(),
            status: Status::User,
            taxonomy: [USER_CATEGORY.into(), primary, "freehand".into()],
            feature_tags,
            geometry: self.geometry.clone(),
            motion: None,
            provenance: Provenance::Drawn {
                author: self.author.clone(),
                session: self.session.clone(),
                created_at: self.created_at,
            },
        }
    }
}

/// Read access to stored user glyphs.
pub trait UserGlyphs {
    fn user_glyph(&self, id: UserGlyphId) -> Option<&UserGlyph>;
    fn all_user_glyphs(&self) -> Vec<&UserGlyph>;
}

impl UserGlyphs for BTreeMap<UserGlyphId, UserGlyph> {
    fn user_glyph(&self, id: UserGlyphId) -> Option<&UserGlyph> {
        self.get(&id)
    }
    fn all_user_glyphs(&self) -> Vec<&UserGlyph> {
        self.values().collect()
    }
}

/// No user glyphs at all.
pub struct NoUserGlyphs;

impl UserGlyphs for NoUserGlyphs {
    fn user_glyph(&self, _id: UserGlyphId) -> Option<&UserGlyph> {
        None
    }
    fn all_user_glyphs(&self) -> Vec<&UserGlyph> {
        Vec::new()
    }
}
