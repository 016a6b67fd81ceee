//! Persistent store for saved signs and user-drawn glyphs.
//!
//! Writes go to an append-only JSON-lines journal; every
//! [`SNAPSHOT_EVERY`] records the full state is written to a snapshot and
//! the journal is truncated. Reopening replays the snapshot and then every
//! journal record newer than it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::acceptability::{evaluate, PlacementContext, RuleSet, Verdict};
use crate::document::{validate, Diagnostic, SignDocument, XmlError};
use crate::geometry::Geometry;
use crate::policy::{PolicyError, Viewer};
use crate::recognition::FormIndex;
use crate::registry::Registry;
use crate::symbol::UserGlyphId;
use crate::user_glyph::{UserGlyph, UserGlyphs};

pub const SNAPSHOT_EVERY: u64 = 100;
const JOURNAL: &str = "journal.jsonl";
const SNAPSHOT: &str = "snapshot.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignId(u64);

impl SignId {
    pub fn new(n: u64) -> Self {
        Self(n)
    }
    pub fn number(&self) -> u64 {
        self.0
    }
}

impl fmt::Display for SignId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S-{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed sign id {0:?}")]
pub struct SignIdError(pub String);

impl FromStr for SignId {
    type Err = SignIdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix("S-")
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse().ok())
            .map(SignId)
            .ok_or_else(|| SignIdError(s.to_string()))
    }
}

impl Serialize for SignId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredSign {
    pub id: SignId,
    pub seq: u64,
    /// Canonical XML.
    pub xml: String,
    pub author: String,
    pub session: Option<String>,
    pub saved_at: DateTime<Utc>,
    #[serde(skip)]
    pub document: SignDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredUserGlyph {
    pub seq: u64,
    #[serde(flatten)]
    pub glyph: UserGlyph,
    pub verdict: Verdict,
}

/// A freshly drawn glyph before it has an id.
#[derive(Debug, Clone, PartialEq)]
pub struct GlyphDraft {
    pub geometry: Geometry,
    pub tags: BTreeSet<String>,
    pub author: String,
    pub session: String,
}

impl GlyphDraft {
    /// Runs the acceptability checks. Needs no store access, so callers can
    /// do it before taking a write lock.
    pub fn assess(&self, context: &PlacementContext, index: &FormIndex, rules: &RuleSet) -> Verdict {
        let provisional = self.to_user_glyph(UserGlyphId::new(0), Utc::now());
        evaluate(&provisional.to_entry(), context, index, rules)
    }

    fn to_user_glyph(&self, id: UserGlyphId, created_at: DateTime<Utc>) -> UserGlyph {
        UserGlyph {
            id,
            geometry: self.geometry.clone(),
            tags: self.tags.clone(),
            author: self.author.clone(),
            session: self.session.clone(),
            created_at,
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store i/o: {0}")]
    Io(#[from] io::Error),
    #[error("{path}: record {line} is unreadable: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("malformed sign: {0}")]
    Xml(#[from] XmlError),
    #[error("sign rejected with {} diagnostic(s)", .0.len())]
    Rejected(Vec<Diagnostic>),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum Record {
    Sign(StoredSign),
    UserGlyph(StoredUserGlyph),
}

impl Record {
    fn seq(&self) -> u64 {
        match self {
            Record::Sign(s) => s.seq,
            Record::UserGlyph(g) => g.seq,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Snapshot {
    seq: u64,
    signs: Vec<StoredSign>,
    user_glyphs: Vec<StoredUserGlyph>,
}

#[derive(Debug, Default)]
pub struct Store {
    dir: Option<PathBuf>,
    journal: Option<File>,
    seq: u64,
    since_snapshot: u64,
    signs: BTreeMap<SignId, StoredSign>,
    user_glyphs: BTreeMap<UserGlyphId, StoredUserGlyph>,
}

impl Store {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) a store kept in `dir`.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let mut store = Store { dir: Some(dir.clone()), ..Store::default() };

        let snapshot_path = dir.join(SNAPSHOT);
        if snapshot_path.exists() {
            let text = fs::read_to_string(&snapshot_path)?;
            let snapshot: Snapshot = serde_json::from_str(&text).map_err(|e| StoreError::Corrupt {
                path: snapshot_path.clone(),
                line: e.line(),
                message: e.to_string(),
            })?;
            store.seq = snapshot.seq;
            for s in snapshot.signs {
                store.apply(Record::Sign(s), &snapshot_path, 0)?;
            }
            for g in snapshot.user_glyphs {
                store.apply(Record::UserGlyph(g), &snapshot_path, 0)?;
            }
        }

        let journal_path = dir.join(JOURNAL);
        if journal_path.exists() {
            let lines: Vec<String> = BufReader::new(File::open(&journal_path)?).lines().collect::<Result<_, _>>()?;
            let raw = fs::read(&journal_path)?;
            let torn_tail = !raw.is_empty() && !raw.ends_with(b"\n");
            for (i, line) in lines.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let record: Record = match serde_json::from_str(line) {
                    Ok(r) => r,
                    // a crash mid-append leaves an unterminated last line
                    Err(_) if torn_tail && i + 1 == lines.len() => break,
                    Err(e) => {
                        return Err(StoreError::Corrupt { path: journal_path.clone(), line: i + 1, message: e.to_string() })
                    }
                };
                if record.seq() > store.seq {
                    store.seq = record.seq();
                    store.since_snapshot += 1;
                    store.apply(record, &journal_path, i + 1)?;
                }
            }
            if torn_tail {
                // rewrite without the torn record so later appends start on a fresh line
                let keep = raw.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
                fs::write(&journal_path, &raw[..keep])?;
            }
        }
        store.journal = Some(OpenOptions::new().create(true).append(true).open(&journal_path)?);
        Ok(store)
    }

    fn apply(&mut self, record: Record, path: &Path, line: usize) -> Result<(), StoreError> {
        match record {
            Record::Sign(mut s) => {
                s.document = SignDocument::from_xml(&s.xml).map_err(|e| StoreError::Corrupt {
                    path: path.to_path_buf(),
                    line,
                    message: e.to_string(),
                })?;
                self.signs.insert(s.id, s);
            }
            Record::UserGlyph(g) => {
                self.user_glyphs.insert(g.glyph.id, g);
            }
        }
        Ok(())
    }

    fn persist(&mut self, record: &Record) -> Result<(), StoreError> {
        let Some(journal) = self.journal.as_mut() else { return Ok(()) };
        let mut line = serde_json::to_string(record).expect("records serialize");
        line.push('\n');
        journal.write_all(line.as_bytes())?;
        journal.sync_data()?;
        self.since_snapshot += 1;
        Ok(())
    }

    /// Call once the record just persisted is applied to the in-memory state.
    fn maybe_snapshot(&mut self) -> Result<(), StoreError> {
        if self.since_snapshot >= SNAPSHOT_EVERY {
            self.snapshot()?;
        }
        Ok(())
    }

    /// Writes the full state and empties the journal.
    pub fn snapshot(&mut self) -> Result<(), StoreError> {
        let Some(dir) = self.dir.clone() else { return Ok(()) };
        let snapshot = Snapshot {
            seq: self.seq,
            signs: self.signs.values().cloned().collect(),
            user_glyphs: self.user_glyphs.values().cloned().collect(),
        };
        let tmp = dir.join(format!("{SNAPSHOT}.tmp"));
        fs::write(&tmp, serde_json::to_vec(&snapshot).expect("snapshot serializes"))?;
        File::open(&tmp)?.sync_all()?;
        fs::rename(&tmp, dir.join(SNAPSHOT))?;
        // records already in the snapshot are skipped on replay, so a crash here is harmless
        let journal = OpenOptions::new().write(true).truncate(true).open(dir.join(JOURNAL))?;
        drop(journal);
        self.journal = Some(OpenOptions::new().append(true).open(dir.join(JOURNAL))?);
        self.since_snapshot = 0;
        Ok(())
    }

    pub fn is_persistent(&self) -> bool {
        self.dir.is_some()
    }

    /// Validates `xml` for `viewer` and stores its canonical form.
    pub fn save_sign(
        &mut self,
        xml: &str,
        registry: &Registry,
        viewer: &Viewer,
        author: &str,
    ) -> Result<&StoredSign, StoreError> {
        let document = SignDocument::from_xml(xml)?;
        let diagnostics = validate(&document, registry, self, viewer);
        if !diagnostics.is_empty() {
            return Err(StoreError::Rejected(diagnostics));
        }
        let id = SignId(self.signs.keys().next_back().map_or(1, |k| k.0 + 1));
        let seq = self.seq + 1;
        let sign = StoredSign {
            id,
            seq,
            xml: document.to_xml(),
            author: author.to_string(),
            session: viewer.session.clone(),
            saved_at: Utc::now(),
            document,
        };
        let record = Record::Sign(sign);
        self.persist(&record)?;
        self.seq = seq;
        let Record::Sign(sign) = record else { unreachable!() };
        self.signs.insert(id, sign);
        self.maybe_snapshot()?;
        Ok(&self.signs[&id])
    }

    pub fn get_sign(&self, id: SignId) -> Option<&StoredSign> {
        self.signs.get(&id)
    }

    pub fn signs(&self) -> impl Iterator<Item = &StoredSign> {
        self.signs.values()
    }

    /// Stores a drawn glyph with its verdict. Every verdict is stored; the
    /// verdict informs, it does not gate.
    pub fn insert_user_glyph(&mut self, draft: GlyphDraft, verdict: Verdict) -> Result<&StoredUserGlyph, StoreError> {
        let id = UserGlyphId::new(self.user_glyphs.keys().next_back().map_or(1, |k| k.number() + 1));
        let seq = self.seq + 1;
        let stored = StoredUserGlyph { seq, glyph: draft.to_user_glyph(id, Utc::now()), verdict };
        let record = Record::UserGlyph(stored);
        self.persist(&record)?;
        self.seq = seq;
        let Record::UserGlyph(stored) = record else { unreachable!() };
        self.user_glyphs.insert(id, stored);
        self.maybe_snapshot()?;
        Ok(&self.user_glyphs[&id])
    }

    pub fn stored_user_glyph(&self, id: UserGlyphId) -> Option<&StoredUserGlyph> {
        self.user_glyphs.get(&id)
    }

    /// Every user glyph for researchers; a user's own session only otherwise.
    pub fn list_user_glyphs(&self, viewer: &Viewer) -> Vec<&StoredUserGlyph> {
        self.user_glyphs
            .values()
            .filter(|g| viewer.may_reuse(Some(&g.glyph.session)))
            .collect()
    }

    /// A glyph as offered in the palette; foreign glyphs are refused to users.
    pub fn palette_glyph(&self, id: UserGlyphId, viewer: &Viewer) -> Result<Option<&StoredUserGlyph>, PolicyError> {
        match self.user_glyphs.get(&id) {
            Some(g) if !viewer.may_reuse(Some(&g.glyph.session)) => Err(PolicyError { glyph: id }),
            found => Ok(found),
        }
    }
}

impl UserGlyphs for Store {
    fn user_glyph(&self, id: UserGlyphId) -> Option<&UserGlyph> {
        self.user_glyphs.get(&id).map(|g| &g.glyph)
    }
    fn all_user_glyphs(&self) -> Vec<&UserGlyph> {
        self.user_glyphs.values().map(|g| &g.glyph).collect()
    }
}
