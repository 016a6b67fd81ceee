//! Acceptability checks for new glyphs: coherence, utility, legibility.
//!
//! Each check yields a [`CheckStatus`] plus diagnostics carrying the rule
//! id, the measured value and the threshold it was compared against. The
//! thresholds are configuration, loaded from a small text format:
//!
//! ```text
//! coherence  <rule-id>  <tag>  horizontal-bar  min_coverage=0.9 max_slope_deg=5
//! coherence  <rule-id>  <tag>  above-anchor    anchor=face-circle max_gap=24
//! utility    tau=0.3
//! legibility s_min=2 d_max=0.5 render_size=64
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::SignDocument;
use crate::geometry::{segment_distance, Geometry};
use crate::recognition::{rasterize, FormIndex, Match, ShapeDescriptor};
use crate::registry::{GlyphEntry, Registry};
use crate::symbol::GlyphRef;
use crate::user_glyph::UserGlyphs;

/// Gaps narrower than this, in render units, rasterize as joined strokes
/// and count as touching.
const TOUCH_TOLERANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Warn => "warn",
            CheckStatus::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckDiagnostic {
    pub rule: String,
    pub status: CheckStatus,
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub status: CheckStatus,
    pub diagnostics: Vec<CheckDiagnostic>,
}

impl CheckResult {
    fn from_diagnostics(diagnostics: Vec<CheckDiagnostic>) -> Self {
        let status = diagnostics.iter().map(|d| d.status).max().unwrap_or(CheckStatus::Pass);
        Self { status, diagnostics }
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.diagnostics.iter().any(|d| d.rule == rule && d.status != CheckStatus::Pass)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    /// Some straight segment runs (nearly) horizontally across the glyph.
    HorizontalBar { min_coverage: f64, max_slope_deg: f64 },
    /// The glyph sits directly above a placed glyph carrying `anchor`.
    AboveAnchor { anchor: String, max_gap: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceRule {
    pub id: String,
    pub tag: String,
    pub predicate: Predicate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    pub coherence: Vec<CoherenceRule>,
    /// Descriptor distance under which a glyph duplicates a conventional one.
    pub utility_tau: f64,
    /// Minimum gap between distinct strokes that do not touch, in render units.
    pub min_separation: f64,
    pub max_density: f64,
    pub render_size: usize,
}

pub const DEFAULT_RULES: &str = "\
coherence\tforearm-bar\tforearm-involvement\thorizontal-bar\tmin_coverage=0.9\tmax_slope_deg=5
coherence\thead-above-face\thead-movement\tabove-anchor\tanchor=face-circle\tmax_gap=24
utility\ttau=0.3
legibility\ts_min=2\td_max=0.5\trender_size=64
";

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet::parse(DEFAULT_RULES).expect("default rules parse")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rule config line {line}: {message}")]
pub struct RuleConfigError {
    pub line: usize,
    pub message: String,
}

impl RuleSet {
    pub fn parse(text: &str) -> Result<Self, RuleConfigError> {
        let mut coherence = Vec::new();
        let mut utility_tau = None;
        let mut legibility: Option<(f64, f64, usize)> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| RuleConfigError { line, message };
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = raw.split_whitespace().collect();
            let params = |from: usize| -> Result<BTreeMap<&str, &str>, RuleConfigError> {
                tokens[from..]
                    .iter()
                    .map(|t| t.split_once('=').ok_or_else(|| err(format!("expected key=value, got {t:?}"))))
                    .collect()
            };
            let number = |params: &BTreeMap<&str, &str>, key: &str| -> Result<f64, RuleConfigError> {
                let raw = params.get(key).ok_or_else(|| err(format!("missing {key}")))?;
                raw.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("{key}={raw:?} is not a number")))
            };
            match tokens[0] {
                "coherence" => {
                    if tokens.len() < 4 {
                        return Err(err("coherence needs id, tag and predicate".into()));
                    }
                    let p = params(4)?;
                    let predicate = match tokens[3] {
                        "horizontal-bar" => Predicate::HorizontalBar {
                            min_coverage: number(&p, "min_coverage")?,
                            max_slope_deg: number(&p, "max_slope_deg")?,
                        },
                        "above-anchor" => Predicate::AboveAnchor {
                            anchor: p.get("anchor").ok_or_else(|| err("missing anchor".into()))?.to_string(),
                            max_gap: number(&p, "max_gap")?,
                        },
                        other => return Err(err(format!("unknown predicate {other:?}"))),
                    };
                    coherence.push(CoherenceRule { id: tokens[1].into(), tag: tokens[2].into(), predicate });
                }
                "utility" => {
                    let tau = number(&params(1)?, "tau")?;
                    if tau <= 0.0 {
                        return Err(err("tau must be positive".into()));
                    }
                    utility_tau = Some(tau);
                }
                "legibility" => {
                    let p = params(1)?;
                    let s_min = number(&p, "s_min")?;
                    let d_max = number(&p, "d_max")?;
                    let size = number(&p, "render_size")?;
                    if s_min < 1.0 {
                        return Err(err("s_min must be at least 1".into()));
                    }
                    if !(d_max > 0.0 && d_max <= 1.0) {
                        return Err(err("d_max must be in (0, 1]".into()));
                    }
                    if size < 8.0 || size.fract() != 0.0 {
                        return Err(err("render_size must be an integer of at least 8".into()));
                    }
                    legibility = Some((s_min, d_max, size as usize));
                }
                other => return Err(err(format!("unknown section {other:?}"))),
            }
        }
        let utility_tau = utility_tau.ok_or(RuleConfigError { line: 0, message: "missing utility line".into() })?;
        let (min_separation, max_density, render_size) =
            legibility.ok_or(RuleConfigError { line: 0, message: "missing legibility line".into() })?;
        Ok(Self { coherence, utility_tau, min_separation, max_density, render_size })
    }
}

/// A placed glyph's box and function tags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub tags: BTreeSet<String>,
}

/// Where the glyph under test sits, and what surrounds it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlacementContext {
    pub subject: Option<PlacedBox>,
    pub neighbours: Vec<PlacedBox>,
}

impl PlacementContext {
    /// Context for the glyph at stacking level `z` of `doc`.
    pub fn in_document(doc: &SignDocument, z: i32, registry: &Registry, users: &dyn UserGlyphs) -> Self {
        let mut ctx = PlacementContext::default();
        for (placed, b) in placed_boxes(doc, registry, users) {
            if placed.z == z {
                ctx.subject = Some(b);
            } else {
                ctx.neighbours.push(b);
            }
        }
        ctx
    }

    /// Context for a glyph not yet in `doc`, proposed at (`x`, `y`).
    pub fn proposed(
        doc: &SignDocument,
        geometry: &Geometry,
        x: u32,
        y: u32,
        registry: &Registry,
        users: &dyn UserGlyphs,
    ) -> Self {
        let (w, h) = geometry.box_size();
        PlacementContext {
            subject: Some(PlacedBox { x: x as f64, y: y as f64, w: w as f64, h: h as f64, tags: BTreeSet::new() }),
            neighbours: placed_boxes(doc, registry, users).into_iter().map(|(_, b)| b).collect(),
        }
    }
}

fn placed_boxes<'d>(
    doc: &'d SignDocument,
    registry: &Registry,
    users: &dyn UserGlyphs,
) -> Vec<(&'d crate::document::PlacedGlyph, PlacedBox)> {
    let mut out = Vec::new();
    {
        for placed in doc.glyphs() {
            let (geometry, tags): (Option<&Geometry>, BTreeSet<String>) = match placed.glyph {
                GlyphRef::Symbol(_) => match registry.get(&placed.glyph) {
                    Some(e) => (Some(&e.geometry), e.feature_tags.clone()),
                    None => (None, BTreeSet::new()),
                },
                GlyphRef::User(id) => match users.user_glyph(id) {
                    Some(u) => (Some(&u.geometry), u.tags.clone()),
                    None => (doc.embedded().get(&id), BTreeSet::new()),
                },
            };
            let Some(geometry) = geometry else { continue };
            let (w, h) = geometry.box_size();
            out.push((placed, PlacedBox { x: placed.x as f64, y: placed.y as f64, w: w as f64, h: h as f64, tags }));
        }
    }
    out
}

fn diag(rule: &str, status: CheckStatus, measured: Option<f64>, threshold: Option<f64>, message: String) -> CheckDiagnostic {
    CheckDiagnostic { rule: rule.to_string(), status, measured, threshold, message }
}

pub fn check_coherence(entry: &GlyphEntry, context: &PlacementContext, rules: &RuleSet) -> CheckResult {
    let mut out = Vec::new();
    for rule in rules.coherence.iter().filter(|r| entry.has_tag(&r.tag)) {
        match &rule.predicate {
            Predicate::HorizontalBar { min_coverage, max_slope_deg } => {
                let coverage = horizontal_bar_coverage(&entry.geometry, *max_slope_deg);
                let status = if coverage >= *min_coverage { CheckStatus::Pass } else { CheckStatus::Fail };
                out.push(diag(
                    &rule.id,
                    status,
                    Some(coverage),
                    Some(*min_coverage),
                    format!("widest horizontal bar spans {:.0}% of the glyph width", coverage * 100.0),
                ));
            }
            Predicate::AboveAnchor { anchor, max_gap } => {
                out.push(above_anchor(&rule.id, anchor, *max_gap, context));
            }
        }
    }
    CheckResult::from_diagnostics(out)
}

/// Widest horizontal extent of a near-horizontal segment, as a fraction of
/// the glyph width.
fn horizontal_bar_coverage(geometry: &Geometry, max_slope_deg: f64) -> f64 {
    let Some(bounds) = geometry.bounds() else { return 0.0 };
    if bounds.width() <= 0.0 {
        return 0.0;
    }
    let tan = max_slope_deg.to_radians().tan();
    geometry
        .segments()
        .filter(|(_, a, b)| (b.y - a.y).abs() <= (b.x - a.x).abs() * tan)
        .map(|(_, a, b)| (b.x - a.x).abs() / bounds.width())
        .fold(0.0, f64::max)
}

fn above_anchor(rule: &str, anchor: &str, max_gap: f64, context: &PlacementContext) -> CheckDiagnostic {
    let Some(subject) = &context.subject else {
        return diag(rule, CheckStatus::Pass, None, Some(max_gap), "glyph is not placed; placement not checked".into());
    };
    let anchors: Vec<&PlacedBox> = context.neighbours.iter().filter(|n| n.tags.contains(anchor)).collect();
    if anchors.is_empty() {
        return diag(rule, CheckStatus::Fail, None, Some(max_gap), format!("no {anchor} glyph in the sign"));
    }
    let centre_x = subject.x + subject.w / 2.0;
    let bottom = subject.y + subject.h;
    let mut best_gap = f64::INFINITY;
    for a in anchors {
        let aligned = centre_x >= a.x && centre_x <= a.x + a.w;
        // resting on the upper half of the anchor counts as above it
        let over = bottom <= a.y + a.h / 2.0;
        let gap = (a.y - bottom).max(0.0);
        if aligned && over {
            best_gap = best_gap.min(gap);
        }
    }
    if best_gap <= max_gap {
        diag(rule, CheckStatus::Pass, Some(best_gap), Some(max_gap), format!("placed above the {anchor}"))
    } else if best_gap.is_finite() {
        diag(rule, CheckStatus::Fail, Some(best_gap), Some(max_gap), format!("too far above the {anchor}"))
    } else {
        diag(rule, CheckStatus::Fail, None, Some(max_gap), format!("not placed above the {anchor}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityResult {
    #[serde(flatten)]
    pub result: CheckResult,
    pub nearest: Option<Match>,
}

/// Nearest conventional glyph other than the entry itself.
pub fn nearest_conventional(entry: &GlyphEntry, index: &FormIndex) -> Option<Match> {
    let descriptor = ShapeDescriptor::of_geometry(&entry.geometry).ok()?;
    index
        .nearest(&descriptor, 1, |id, status| status.is_conventional() && id != entry.id)
        .into_iter()
        .next()
}

pub fn check_utility(entry: &GlyphEntry, index: &FormIndex, rules: &RuleSet) -> UtilityResult {
    let tau = rules.utility_tau;
    let Some(nearest) = nearest_conventional(entry, index) else {
        let d = diag("utility", CheckStatus::Pass, None, Some(tau), "no conventional glyph to compare against".into());
        return UtilityResult { result: CheckResult::from_diagnostics(vec![d]), nearest: None };
    };
    let d = if nearest.distance < tau {
        diag(
            "utility",
            CheckStatus::Warn,
            Some(nearest.distance),
            Some(tau),
            format!("redundant with conventional glyph {}", nearest.id),
        )
    } else {
        diag("utility", CheckStatus::Pass, Some(nearest.distance), Some(tau), format!("nearest conventional glyph is {}", nearest.id))
    };
    UtilityResult { result: CheckResult::from_diagnostics(vec![d]), nearest: Some(nearest) }
}

pub fn check_legibility(entry: &GlyphEntry, rules: &RuleSet) -> CheckResult {
    let geometry = &entry.geometry;
    let mut out = Vec::new();
    let bitmap = rasterize(&geometry.strokes, rules.render_size);
    let density = bitmap.density();
    out.push(diag(
        "density",
        if density > rules.max_density { CheckStatus::Fail } else { CheckStatus::Pass },
        Some(density),
        Some(rules.max_density),
        format!("ink covers {:.1}% of the glyph square", density * 100.0),
    ));

    let scale = match geometry.bounds() {
        Some(b) if b.width().max(b.height()) > 0.0 => (rules.render_size - 1) as f64 / b.width().max(b.height()),
        _ => 1.0,
    };
    let closest = closest_untouching_strokes(geometry, TOUCH_TOLERANCE / scale).map(|(a, b, d)| (a, b, d * scale));
    match closest {
        Some((a, b, d)) if d < rules.min_separation => out.push(diag(
            "separation",
            CheckStatus::Fail,
            Some(d),
            Some(rules.min_separation),
            format!("strokes {a} and {b} come within {d:.2} units without touching"),
        )),
        Some((_, _, d)) => out.push(diag(
            "separation",
            CheckStatus::Pass,
            Some(d),
            Some(rules.min_separation),
            "strokes are well separated".into(),
        )),
        None => {}
    }
    CheckResult::from_diagnostics(out)
}

/// Closest pair of distinct strokes further apart than `touch`, in glyph units.
fn closest_untouching_strokes(geometry: &Geometry, touch: f64) -> Option<(usize, usize, f64)> {
    let n = geometry.strokes.len();
    let segments: Vec<_> = geometry.segments().collect();
    let mut pair_min = vec![f64::INFINITY; n * n];
    for (i, (sa, a0, a1)) in segments.iter().enumerate() {
        for (sb, b0, b1) in &segments[i + 1..] {
            if sa == sb {
                continue;
            }
            let (lo, hi) = if sa < sb { (*sa, *sb) } else { (*sb, *sa) };
            let d = segment_distance(*a0, *a1, *b0, *b1);
            let slot = &mut pair_min[lo * n + hi];
            *slot = slot.min(d);
        }
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for a in 0..n {
        for b in a + 1..n {
            let d = pair_min[a * n + b];
            if d.is_finite() && d >= touch && best.is_none_or(|(_, _, bd)| d < bd) {
                best = Some((a, b, d));
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub overall: CheckStatus,
    pub coherence: CheckResult,
    pub utility: UtilityResult,
    pub legibility: CheckResult,
    /// Conventional glyph to offer instead, when the utility check warns.
    pub suggestion: Option<Match>,
}

pub fn evaluate(entry: &GlyphEntry, context: &PlacementContext, index: &FormIndex, rules: &RuleSet) -> Verdict {
    let coherence = check_coherence(entry, context, rules);
    let utility = check_utility(entry, index, rules);
    let legibility = check_legibility(entry, rules);
    let overall = coherence.status.max(utility.result.status).max(legibility.status);
    let suggestion = (utility.result.status == CheckStatus::Warn).then(|| utility.nearest.clone()).flatten();
    Verdict { overall, coherence, utility, legibility, suggestion }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{Provenance, Status};

    fn entry(tags: &[&str], path: &str) -> GlyphEntry {
        GlyphEntry {
            id: GlyphRef::parse("U-1").unwrap(),
            name: "candidate".into(),
            status: Status::User,
            taxonomy: ["user".into(), "x".into(), "freehand".into()],
            feature_tags: tags.iter().map(|t| t.to_string()).collect(),
            geometry: Geometry::parse_path(path).unwrap(),
            motion: None,
            provenance: Provenance::Catalog,
        }
    }

    fn placed(x: f64, y: f64, w: f64, h: f64, tags: &[&str]) -> PlacedBox {
        PlacedBox { x, y, w, h, tags: tags.iter().map(|t| t.to_string()).collect() }
    }

    #[test]
    fn default_rules_load() {
        let rules = RuleSet::default();
        assert_eq!(rules.coherence.len(), 2);
        assert_eq!(rules.min_separation, 2.0);
        assert_eq!(rules.max_density, 0.5);
    }

    #[test]
    fn rule_config_errors() {
        assert!(RuleSet::parse("utility tau=0\nlegibility s_min=2 d_max=0.5 render_size=64").is_err());
        assert!(RuleSet::parse("utility tau=1\nlegibility s_min=0.5 d_max=0.5 render_size=64").is_err());
        assert!(RuleSet::parse("utility tau=1\nlegibility s_min=2 d_max=1.5 render_size=64").is_err());
        assert!(RuleSet::parse("utility tau=1").is_err());
        assert!(RuleSet::parse("coherence a b wobble\nutility tau=1\nlegibility s_min=2 d_max=0.5 render_size=64").is_err());
        let err = RuleSet::parse("\n\nbogus").unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn forearm_rule() {
        let rules = RuleSet::default();
        let with_bar = entry(&["forearm-involvement"], "M0,16 L32,16 M8,4 L16,10 L24,4");
        let without = entry(&["forearm-involvement"], "M8,4 L16,10 L24,4 M8,28 L16,22 L24,28");
        let ctx = PlacementContext::default();
        assert_eq!(check_coherence(&with_bar, &ctx, &rules).status, CheckStatus::Pass);
        let failed = check_coherence(&without, &ctx, &rules);
        assert_eq!(failed.status, CheckStatus::Fail);
        assert!(failed.has_rule("forearm-bar"));
        // untagged glyphs are not subject to the rule
        assert!(check_coherence(&entry(&[], "M8,4 L16,10"), &ctx, &rules).diagnostics.is_empty());
    }

    #[test]
    fn head_placement_rule() {
        let rules = RuleSet::default();
        let head = entry(&["head-movement"], "M0,0 L20,0 L20,10");
        let face = placed(50.0, 50.0, 40.0, 40.0, &["face-circle"]);
        let above = PlacementContext { subject: Some(placed(60.0, 30.0, 20.0, 10.0, &[])), neighbours: vec![face.clone()] };
        let beside = PlacementContext { subject: Some(placed(100.0, 55.0, 20.0, 10.0, &[])), neighbours: vec![face.clone()] };
        let far = PlacementContext { subject: Some(placed(60.0, 0.0, 20.0, 10.0, &[])), neighbours: vec![face.clone()] };
        let alone = PlacementContext { subject: Some(placed(60.0, 30.0, 20.0, 10.0, &[])), neighbours: vec![] };
        assert_eq!(check_coherence(&head, &above, &rules).status, CheckStatus::Pass);
        assert_eq!(check_coherence(&head, &beside, &rules).status, CheckStatus::Fail);
        assert_eq!(check_coherence(&head, &far, &rules).status, CheckStatus::Fail);
        assert_eq!(check_coherence(&head, &alone, &rules).status, CheckStatus::Fail);
        assert_eq!(check_coherence(&head, &PlacementContext::default(), &rules).status, CheckStatus::Pass);
    }

    #[test]
    fn legibility_checks() {
        let rules = RuleSet::default();
        assert_eq!(check_legibility(&entry(&[], "M0,0 L30,0"), &rules).status, CheckStatus::Pass);
        // a solid square drawn as dense scanlines
        let solid: Vec<String> = (0..=64).map(|y| format!("M0,{y} L64,{y}")).collect();
        let verdict = check_legibility(&entry(&[], &solid.join(" ")), &rules);
        assert_eq!(verdict.status, CheckStatus::Fail);
        let density = verdict.diagnostics.iter().find(|d| d.rule == "density").unwrap();
        assert_eq!(density.status, CheckStatus::Fail);
        assert!(density.measured.unwrap() > 0.5);
        // two parallel strokes one render unit apart
        let crowded = entry(&[], "M0,0 L63,0 M0,1 L63,1");
        assert!(check_legibility(&crowded, &rules).has_rule("separation"));
        // strokes that touch are fine
        let joined = entry(&[], "M0,0 L63,0 M0,0 L0,63");
        assert_eq!(check_legibility(&joined, &rules).status, CheckStatus::Pass);
    }

    #[test]
    fn utility_against_empty_index() {
        let r = check_utility(&entry(&[], "M0,0 L1,1"), &FormIndex::default(), &RuleSet::default());
        assert_eq!(r.result.status, CheckStatus::Pass);
        assert!(r.nearest.is_none());
    }
}
