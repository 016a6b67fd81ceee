//! Glyph identifiers.
//!
//! Catalog glyphs are keyed by a six-field [`SymbolId`] whose canonical text
//! form is `CC-GG-BBB-VV-FF-RR`. Glyphs drawn by users live in a separate
//! namespace ([`UserGlyphId`], `U-<n>`) and are never given symbol codes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of plain rotation steps (45° each, counterclockwise).
pub const ROTATION_STEPS: u8 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolIdError {
    #[error("malformed symbol id {text:?}: expected CC-GG-BBB-VV-FF-RR")]
    Malformed { text: String },
    #[error("symbol id {text:?}: {field} {value} out of range {min}..{max}")]
    OutOfRange {
        text: String,
        field: &'static str,
        value: u32,
        min: u32,
        max: u32,
    },
    #[error("malformed user glyph id {0:?}: expected U-<n>")]
    MalformedUser(String),
}

/// Structured code of a catalog glyph.
///
/// Field order matches the text form, so the derived ordering sorts ids the
/// same way their canonical strings sort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId {
    category: u8,
    group: u8,
    base: u16,
    variation: u8,
    fill: u8,
    rotation: u8,
}

struct FieldSpec {
    name: &'static str,
    width: usize,
    min: u32,
    max: u32,
}

const FIELDS: [FieldSpec; 6] = [
    FieldSpec { name: "category", width: 2, min: 1, max: 8 },
    FieldSpec { name: "group", width: 2, min: 1, max: 99 },
    FieldSpec { name: "base", width: 3, min: 1, max: 999 },
    FieldSpec { name: "variation", width: 2, min: 1, max: 99 },
    FieldSpec { name: "fill", width: 2, min: 1, max: 6 },
    FieldSpec { name: "rotation", width: 2, min: 1, max: 16 },
];

impl SymbolId {
    pub fn new(
        category: u8,
        group: u8,
        base: u16,
        variation: u8,
        fill: u8,
        rotation: u8,
    ) -> Result<Self, SymbolIdError> {
        let values = [
            category as u32,
            group as u32,
            base as u32,
            variation as u32,
            fill as u32,
            rotation as u32,
        ];
        for (spec, value) in FIELDS.iter().zip(values) {
            if value < spec.min || value > spec.max {
                return Err(SymbolIdError::OutOfRange {
                    text: format!("{category}-{group}-{base}-{variation}-{fill}-{rotation}"),
                    field: spec.name,
                    value,
                    min: spec.min,
                    max: spec.max,
                });
            }
        }
        Ok(Self { category, group, base, variation, fill, rotation })
    }

    pub fn parse(text: &str) -> Result<Self, SymbolIdError> {
        let malformed = || SymbolIdError::Malformed { text: text.to_string() };
        let parts: Vec<&str> = text.split('-').collect();
        if parts.len() != FIELDS.len() {
            return Err(malformed());
        }
        let mut values = [0u32; 6];
        for ((part, spec), slot) in parts.iter().zip(FIELDS.iter()).zip(values.iter_mut()) {
            if part.len() != spec.width || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            let value: u32 = part.parse().map_err(|_| malformed())?;
            if value < spec.min || value > spec.max {
                return Err(SymbolIdError::OutOfRange {
                    text: text.to_string(),
                    field: spec.name,
                    value,
                    min: spec.min,
                    max: spec.max,
                });
            }
            *slot = value;
        }
        Ok(Self {
            category: values[0] as u8,
            group: values[1] as u8,
            base: values[2] as u16,
            variation: values[3] as u8,
            fill: values[4] as u8,
            rotation: values[5] as u8,
        })
    }

    pub fn category(&self) -> u8 {
        self.category
    }
    pub fn group(&self) -> u8 {
        self.group
    }
    pub fn base(&self) -> u16 {
        self.base
    }
    pub fn variation(&self) -> u8 {
        self.variation
    }
    pub fn fill(&self) -> u8 {
        self.fill
    }
    /// Raw rotation field, 1..=16.
    pub fn rotation(&self) -> u8 {
        self.rotation
    }

    /// Rotation step 0..8, in 45° counterclockwise increments.
    pub fn rotation_step(&self) -> u8 {
        (self.rotation - 1) % ROTATION_STEPS
    }

    pub fn is_mirrored(&self) -> bool {
        self.rotation > ROTATION_STEPS
    }

    /// Builds the id from the (step, mirror) view of the rotation field.
    pub fn with_orientation(self, step: u8, mirrored: bool) -> Self {
        let step = step % ROTATION_STEPS;
        let rotation = 1 + step + if mirrored { ROTATION_STEPS } else { 0 };
        Self { rotation, ..self }
    }

    /// Rotates by `delta` steps of 45°; negative values turn clockwise.
    pub fn rotated(self, delta: i32) -> Self {
        let step = (self.rotation_step() as i32 + delta).rem_euclid(ROTATION_STEPS as i32) as u8;
        self.with_orientation(step, self.is_mirrored())
    }

    pub fn mirrored(self) -> Self {
        self.with_orientation(self.rotation_step(), !self.is_mirrored())
    }

    pub fn with_fill(self, fill: u8) -> Result<Self, SymbolIdError> {
        Self::new(self.category, self.group, self.base, self.variation, fill, self.rotation)
    }

    pub fn with_variation(self, variation: u8) -> Result<Self, SymbolIdError> {
        Self::new(self.category, self.group, self.base, variation, self.fill, self.rotation)
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:02}-{:02}-{:03}-{:02}-{:02}-{:02}",
            self.category, self.group, self.base, self.variation, self.fill, self.rotation
        )
    }
}

impl FromStr for SymbolId {
    type Err = SymbolIdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Opaque id of a user-drawn glyph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserGlyphId(u64);

impl UserGlyphId {
    pub fn new(n: u64) -> Self {
        Self(n)
    }
    pub fn number(&self) -> u64 {
        self.0
    }
    pub fn parse(text: &str) -> Result<Self, SymbolIdError> {
        text.strip_prefix("U-")
            .filter(|digits| !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|digits| digits.parse().ok())
            .map(Self)
            .ok_or_else(|| SymbolIdError::MalformedUser(text.to_string()))
    }
}

impl fmt::Display for UserGlyphId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U-{}", self.0)
    }
}

/// Reference to any glyph: catalog or user-drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GlyphRef {
    Symbol(SymbolId),
    User(UserGlyphId),
}

impl GlyphRef {
    pub fn parse(text: &str) -> Result<Self, SymbolIdError> {
        if text.starts_with("U-") {
            UserGlyphId::parse(text).map(GlyphRef::User)
        } else {
            SymbolId::parse(text).map(GlyphRef::Symbol)
        }
    }

    pub fn as_symbol(&self) -> Option<SymbolId> {
        match self {
            GlyphRef::Symbol(id) => Some(*id),
            GlyphRef::User(_) => None,
        }
    }

    pub fn as_user(&self) -> Option<UserGlyphId> {
        match self {
            GlyphRef::User(id) => Some(*id),
            GlyphRef::Symbol(_) => None,
        }
    }
}

impl fmt::Display for GlyphRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlyphRef::Symbol(id) => id.fmt(f),
            GlyphRef::User(id) => id.fmt(f),
        }
    }
}

impl From<SymbolId> for GlyphRef {
    fn from(id: SymbolId) -> Self {
        GlyphRef::Symbol(id)
    }
}

impl From<UserGlyphId> for GlyphRef {
    fn from(id: UserGlyphId) -> Self {
        GlyphRef::User(id)
    }
}

macro_rules! serde_as_text {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let text = String::deserialize(deserializer)?;
                <$ty>::parse(&text).map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_as_text!(SymbolId);
serde_as_text!(UserGlyphId);
serde_as_text!(GlyphRef);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_minimum_id() {
        let id = SymbolId::parse("01-01-001-01-01-01").unwrap();
        assert_eq!(id, SymbolId::new(1, 1, 1, 1, 1, 1).unwrap());
    }

    #[test]
    fn parses_mirrored_rotation() {
        let id = SymbolId::parse("02-05-012-01-02-09").unwrap();
        assert_eq!(
            (id.category(), id.group(), id.base(), id.variation(), id.fill(), id.rotation()),
            (2, 5, 12, 1, 2, 9)
        );
        assert!(id.is_mirrored());
        assert_eq!(id.rotation_step(), 0);
    }

    #[test]
    fn fill_out_of_range_names_field() {
        let err = SymbolId::parse("01-01-001-01-07-01").unwrap_err();
        match err {
            SymbolIdError::OutOfRange { field, value, .. } => {
                assert_eq!(field, "fill");
                assert_eq!(value, 7);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        for text in ["", "01-01-001-01-01", "1-01-001-01-01-01", "01-01-001-01-01-1a", "00-01-001-01-01-01", "01-01-001-01-01-17"] {
            assert!(SymbolId::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn rotation_group() {
        let id = SymbolId::new(1, 1, 1, 1, 1, 3).unwrap();
        assert_eq!(id.rotated(2).rotation(), 5);
        assert_eq!(id.rotated(8), id);
        assert_eq!(id.rotated(-1).rotation(), 2);
        assert_eq!(id.mirrored().rotation(), 11);
        assert_eq!(id.mirrored().mirrored(), id);
        assert_eq!(id.mirrored().rotated(7).rotation(), 10);
    }

    #[test]
    fn user_ids() {
        let id = UserGlyphId::parse("U-42").unwrap();
        assert_eq!(id.number(), 42);
        assert_eq!(id.to_string(), "U-42");
        assert!(UserGlyphId::parse("U-").is_err());
        assert!(UserGlyphId::parse("U-x").is_err());
        assert_eq!(GlyphRef::parse("U-3").unwrap(), GlyphRef::User(UserGlyphId::new(3)));
    }

    fn any_symbol() -> impl Strategy<Value = SymbolId> {
        (1u8..=8, 1u8..=99, 1u16..=999, 1u8..=99, 1u8..=6, 1u8..=16)
            .prop_map(|(c, g, b, v, f, r)| SymbolId::new(c, g, b, v, f, r).unwrap())
    }

    proptest! {
        #[test]
        fn text_form_roundtrips(id in any_symbol()) {
            let text = id.to_string();
            prop_assert_eq!(text.len(), 18);
            prop_assert_eq!(SymbolId::parse(&text).unwrap(), id);
        }

        #[test]
        fn ordering_matches_text(a in any_symbol(), b in any_symbol()) {
            prop_assert_eq!(a.cmp(&b), a.to_string().cmp(&b.to_string()));
        }

        #[test]
        fn eight_turns_is_identity(id in any_symbol()) {
            let mut turned = id;
            for _ in 0..8 {
                turned = turned.rotated(1);
            }
            prop_assert_eq!(turned, id);
            prop_assert_eq!(id.mirrored().mirrored(), id);
        }
    }
}
