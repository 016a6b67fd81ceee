use std::path::PathBuf;
use std::sync::LazyLock;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use signwriting_core::geometry::{Geometry, Point};
use signwriting_core::recognition::{FormIndex, MatchError, ShapeDescriptor, StrokeSketch};
use signwriting_core::registry::Registry;
use signwriting_core::symbol::GlyphRef;

fn load(name: &str) -> Registry {
    Registry::load(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)).unwrap()
}

static CATALOG: LazyLock<(FormIndex, Vec<(GlyphRef, ShapeDescriptor)>)> = LazyLock::new(|| {
    let registry = load("catalog.manifest");
    (FormIndex::build(&registry), descriptors(&registry))
});

fn descriptors(registry: &Registry) -> Vec<(GlyphRef, ShapeDescriptor)> {
    registry.entries().iter().map(|e| (e.id, ShapeDescriptor::of_geometry(&e.geometry).unwrap())).collect()
}

/// Redraws `geometry` on a 100-unit canvas: uniform scale ±10%, every point
/// moved by up to ±2 units.
fn jittered(geometry: &Geometry, rng: &mut StdRng) -> StrokeSketch {
    let scale = rng.gen_range(0.9..=1.1);
    let strokes = geometry
        .strokes
        .iter()
        .map(|s| {
            s.iter()
                .map(|p| Point::new(10.0 + p.x * scale + rng.gen_range(-2.0..=2.0), 10.0 + p.y * scale + rng.gen_range(-2.0..=2.0)))
                .collect()
        })
        .collect();
    StrokeSketch::new(strokes, 100.0, 100.0).unwrap()
}

/// Ranking by brute force: every distance computed, sorted by (distance, id).
fn exhaustive_ranking(all: &[(GlyphRef, ShapeDescriptor)], query: &ShapeDescriptor) -> Vec<(GlyphRef, f64)> {
    let mut all: Vec<(GlyphRef, f64)> = all.iter().map(|(id, d)| (*id, d.distance(query))).collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    all
}

#[test]
fn every_fixture_glyph_matches_itself_first() {
    for name in ["synthetic60.manifest", "catalog.manifest", "fig5.manifest"] {
        let registry = load(name);
        let index = FormIndex::build(&registry);
        for entry in registry.entries() {
            let sketch = StrokeSketch::from_geometry(&entry.geometry).unwrap();
            let top = &index.match_sketch(&sketch, 1).unwrap()[0];
            assert_eq!(top.id, entry.id, "{name}");
            assert_eq!(top.distance, 0.0);
        }
    }
}

#[test]
fn jittered_redraws_stay_in_top_three() {
    let registry = load("synthetic60.manifest");
    assert_eq!(registry.len(), 60);
    let index = FormIndex::build(&registry);
    let all = descriptors(&registry);
    let mut rng = StdRng::seed_from_u64(20);
    let mut hits = 0;
    for trial in 0..200 {
        let target = &registry.entries()[trial % registry.len()];
        let sketch = jittered(&target.geometry, &mut rng);
        let ranked = index.match_sketch(&sketch, 3).unwrap();
        let oracle = exhaustive_ranking(&all, &ShapeDescriptor::of_sketch(&sketch));
        let expected: Vec<GlyphRef> = oracle.iter().take(3).map(|(id, _)| *id).collect();
        assert_eq!(ranked.iter().map(|m| m.id).collect::<Vec<_>>(), expected);
        if ranked.iter().any(|m| m.id == target.id) {
            hits += 1;
        }
    }
    assert!(hits >= 180, "top-3 hits {hits}/200");
}

#[test]
fn k_beyond_index_ranks_everything() {
    let registry = load("catalog.manifest");
    let index = FormIndex::build(&registry);
    let sketch = StrokeSketch::parse("0,0 10,10").unwrap();
    let ranked = index.match_sketch(&sketch, 1000).unwrap();
    assert_eq!(ranked.len(), registry.len());
    assert!(ranked.windows(2).all(|w| w[0].distance <= w[1].distance));
    assert_eq!(index.match_sketch(&sketch, 0).unwrap_err(), MatchError::ZeroK);
    assert_eq!(FormIndex::default().match_sketch(&sketch, 1).unwrap_err(), MatchError::EmptyIndex);
}

#[test]
fn ties_are_broken_by_id() {
    let manifest = "@version\tties\n\
        01-01-001-01-01-02\tb\tofficial-2004\th\tg\tf\t-\t-\tM0,0 L10,0\n\
        01-01-001-01-01-01\ta\tofficial-2004\th\tg\tf\t-\t-\tM0,0 L10,0\n\
        01-01-002-01-01-01\tc\tofficial-2004\th\tg\tf\t-\t-\tM0,0 L10,0\n";
    let index = FormIndex::build(&Registry::from_manifest_str(manifest).unwrap());
    let sketch = StrokeSketch::parse("5,5 25,5").unwrap();
    let first = index.match_sketch(&sketch, 3).unwrap();
    let ids: Vec<String> = first.iter().map(|m| m.id.to_string()).collect();
    assert_eq!(ids, ["01-01-001-01-01-01", "01-01-001-01-01-02", "01-01-002-01-01-01"]);
    assert_eq!(index.match_sketch(&sketch, 3).unwrap(), first);
}

#[test]
fn rotation_is_not_factored_out() {
    let registry = load("catalog.manifest");
    let index = FormIndex::build(&registry);
    let upright = registry.get(&GlyphRef::parse("01-01-001-01-01-01").unwrap()).unwrap();
    let turned = registry.get(&GlyphRef::parse("01-01-001-01-01-03").unwrap()).unwrap();
    let a = index.descriptor(&upright.id).unwrap();
    let b = index.descriptor(&turned.id).unwrap();
    assert!(a.distance(b) > 0.1);
}

fn strokes_strategy() -> impl Strategy<Value = Vec<Vec<(i32, i32)>>> {
    prop::collection::vec(prop::collection::vec((0i32..64, 0i32..64), 2..6), 1..4)
}

proptest! {
    // scales are powers of two and shifts integers, so the normalised
    // coordinates are bit-identical and the descriptor must be too
    #[test]
    fn descriptor_ignores_translation_and_scale(
        strokes in strokes_strategy(),
        dx in 0i32..200,
        dy in 0i32..200,
        shift in 0u32..4,
    ) {
        let to_points = |factor: f64, ox: f64, oy: f64| -> Vec<Vec<Point>> {
            strokes.iter().map(|s| s.iter().map(|&(x, y)| Point::new(x as f64 * factor + ox, y as f64 * factor + oy)).collect()).collect()
        };
        let base = to_points(1.0, 0.0, 0.0);
        let moved = to_points((1u32 << shift) as f64, dx as f64, dy as f64);
        prop_assume!(base.iter().flatten().any(|p| p.x != base[0][0].x || p.y != base[0][0].y));
        let a = ShapeDescriptor::of_strokes(&base).unwrap();
        let b = ShapeDescriptor::of_strokes(&moved).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ranking_matches_exhaustive_oracle(strokes in strokes_strategy(), k in 1usize..10) {
        let (index, all) = &*CATALOG;
        let points: Vec<Vec<Point>> = strokes.iter().map(|s| s.iter().map(|&(x, y)| Point::new(x as f64, y as f64)).collect()).collect();
        let query = ShapeDescriptor::of_strokes(&points).unwrap();
        let got = index.nearest(&query, k, |_, _| true);
        let oracle = exhaustive_ranking(all, &query);
        prop_assert_eq!(got.len(), k);
        for (m, (id, d)) in got.iter().zip(oracle) {
            prop_assert_eq!(m.id, id);
            prop_assert_eq!(m.distance, d);
        }
    }
}
