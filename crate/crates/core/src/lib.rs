//! Core engine for composing SignWriting signs.

pub mod acceptability;
pub mod closure;
pub mod document;
pub mod geometry;
pub mod policy;
pub mod recognition;
pub mod registry;
pub mod search;
pub mod store;
pub mod symbol;
pub mod user_glyph;
