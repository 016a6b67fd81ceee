use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use signwriting_core::registry::{Registry, RegistryError, Status, TaxonomyChildren};
use signwriting_core::symbol::{GlyphRef, SymbolId};

fn load(name: &str) -> Registry {
    Registry::load(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)).unwrap()
}

fn labels(children: TaxonomyChildren<'_>) -> Vec<String> {
    match children {
        TaxonomyChildren::Labels(l) => l,
        TaxonomyChildren::Glyphs(_) => panic!("expected labels"),
    }
}

fn glyphs(children: TaxonomyChildren<'_>) -> Vec<GlyphRef> {
    match children {
        TaxonomyChildren::Glyphs(g) => g.into_iter().map(|e| e.id).collect(),
        TaxonomyChildren::Labels(_) => panic!("expected glyphs"),
    }
}

#[test]
fn every_glyph_reachable_by_exactly_one_path() {
    for name in ["catalog.manifest", "synthetic60.manifest", "fig5.manifest"] {
        let registry = load(name);
        let mut by_group: BTreeMap<GlyphRef, usize> = BTreeMap::new();
        let mut by_family: BTreeMap<GlyphRef, usize> = BTreeMap::new();
        let empty: [&str; 0] = [];
        for cat in labels(registry.taxonomy_children(&empty).unwrap()) {
            for group in labels(registry.taxonomy_children(&[&cat]).unwrap()) {
                for id in glyphs(registry.taxonomy_children(&[&cat, &group]).unwrap()) {
                    *by_group.entry(id).or_default() += 1;
                }
                for family in registry.taxonomy_families(&cat, &group).unwrap() {
                    for id in glyphs(registry.taxonomy_children(&[&cat, &group, &family]).unwrap()) {
                        *by_family.entry(id).or_default() += 1;
                    }
                }
            }
        }
        let all: BTreeSet<GlyphRef> = registry.entries().iter().map(|e| e.id).collect();
        for walk in [&by_group, &by_family] {
            assert_eq!(walk.keys().copied().collect::<BTreeSet<_>>(), all, "{name}");
            assert!(walk.values().all(|&n| n == 1), "{name}: a glyph was reached twice");
        }
    }
}

#[test]
fn navigation_errors() {
    let registry = load("catalog.manifest");
    assert!(matches!(registry.taxonomy_children(&["nowhere"]), Err(RegistryError::UnknownPrefix(_))));
    assert!(matches!(registry.taxonomy_children(&["a", "b", "c", "d"]), Err(RegistryError::PrefixTooDeep(_))));
}

/// Variant expected by direct manipulation of the id text.
fn expected_variant(id: &str, delta: i32, mirror: bool, present: &BTreeSet<String>) -> Option<String> {
    let (stem, rotation) = id.rsplit_once('-').unwrap();
    let rotation: i32 = rotation.parse().unwrap();
    let step = (rotation - 1) % 8;
    let mirrored = rotation > 8;
    let step = (step + delta).rem_euclid(8);
    let mirrored = mirrored ^ mirror;
    let candidate = format!("{stem}-{:02}", 1 + step + if mirrored { 8 } else { 0 });
    present.contains(&candidate).then_some(candidate)
}

#[test]
fn variants_agree_with_sibling_enumeration() {
    let registry = load("catalog.manifest");
    let present: BTreeSet<String> = registry.entries().iter().map(|e| e.id.to_string()).collect();
    let mut found = 0;
    for entry in registry.entries() {
        let id = entry.id.as_symbol().unwrap();
        for delta in -9..=9 {
            for mirror in [false, true] {
                let got = registry.transform_variant(id, delta, mirror, None);
                match expected_variant(&id.to_string(), delta, mirror, &present) {
                    Some(expected) => {
                        assert_eq!(got.unwrap().to_string(), expected);
                        found += 1;
                    }
                    None => assert!(matches!(got, Err(RegistryError::MissingVariant(_))), "{id} {delta} {mirror}"),
                }
            }
        }
    }
    assert!(found > 16 * 38);
    let sym = |s: &str| SymbolId::parse(s).unwrap();
    assert_eq!(registry.transform_variant(sym("01-01-001-01-01-03"), 2, false, None).unwrap(), sym("01-01-001-01-01-05"));
    assert_eq!(registry.transform_variant(sym("01-01-001-01-01-01"), 8, false, None).unwrap(), sym("01-01-001-01-01-01"));
    assert_eq!(registry.transform_variant(sym("01-02-001-01-01-01"), 0, false, Some(2)).unwrap(), sym("01-02-001-01-02-01"));
    assert!(matches!(
        registry.transform_variant(sym("01-02-001-01-01-01"), 0, false, Some(3)),
        Err(RegistryError::MissingVariant(_))
    ));
    assert!(matches!(
        registry.transform_variant(sym("08-01-001-01-01-01"), 1, false, None),
        Err(RegistryError::UnknownGlyph(_))
    ));
}

#[test]
fn status_counts_cover_every_entry() {
    for name in ["catalog.manifest", "synthetic60.manifest", "fig5.manifest"] {
        let registry = load(name);
        let counts = registry.count_by_status();
        assert_eq!(counts.len(), Status::ALL.len());
        assert_eq!(counts.values().sum::<usize>(), registry.len());
    }
    let catalog = load("catalog.manifest");
    assert_eq!(catalog.count_by_status()[&Status::User], 0);
}

#[test]
fn manifest_text_roundtrips_for_fixtures() {
    for name in ["catalog.manifest", "synthetic60.manifest", "fig5.manifest"] {
        let registry = load(name);
        let again = Registry::from_manifest_str(&registry.to_manifest_string()).unwrap();
        assert_eq!(again.entries(), registry.entries(), "{name}");
        assert_eq!(again.to_manifest_string(), registry.to_manifest_string());
    }
}
