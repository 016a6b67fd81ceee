//! Who may use which user-drawn glyphs.
//!
//! Users can draw glyphs and see them inside signs that already contain
//! them, but may only place a user glyph in the session it was drawn in.
//! Researchers see and may reuse everything.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbol::UserGlyphId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Researcher,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::User => "user",
            Role::Researcher => "researcher",
        })
    }
}

impl FromStr for Role {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "user" => Ok(Role::User),
            "researcher" => Ok(Role::Researcher),
            other => Err(format!("unknown role {other:?} (expected user or researcher)")),
        }
    }
}

/// The party making a request: a role plus the editing session, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Viewer {
    pub role: Role,
    pub session: Option<String>,
}

impl Viewer {
    pub fn researcher() -> Self {
        Self { role: Role::Researcher, session: None }
    }

    pub fn user(session: impl Into<String>) -> Self {
        Self { role: Role::User, session: Some(session.into()) }
    }

    /// Whether this viewer may place a user glyph drawn in `origin_session`.
    /// An unknown origin is treated as foreign.
    pub fn may_reuse(&self, origin_session: Option<&str>) -> bool {
        match self.role {
            Role::Researcher => true,
            Role::User => match (self.session.as_deref(), origin_session) {
                (Some(mine), Some(origin)) => mine == origin,
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("user glyph {glyph} belongs to another sign session and cannot be reused")]
pub struct PolicyError {
    pub glyph: UserGlyphId,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reuse_rules() {
        assert!(Viewer::researcher().may_reuse(Some("a")));
        assert!(Viewer::researcher().may_reuse(None));
        assert!(Viewer::user("a").may_reuse(Some("a")));
        assert!(!Viewer::user("a").may_reuse(Some("b")));
        assert!(!Viewer::user("a").may_reuse(None));
        let anonymous = Viewer { role: Role::User, session: None };
        assert!(!anonymous.may_reuse(Some("a")));
    }

    #[test]
    fn role_text() {
        assert_eq!("researcher".parse::<Role>().unwrap(), Role::Researcher);
        assert!("admin".parse::<Role>().is_err());
        assert_eq!(Role::User.to_string(), "user");
    }
}
