use std::sync::OnceLock;

use mobtraj_core::query::{evaluate, field_table, parse, pretty_print, FieldType, Predicate, QueryAst};
use mobtraj_core::store::{Entity, TrajectoryStore};
use mobtraj_testkit::fixture::{enrich, fixture_files, fixture_store, load_files};
use mobtraj_testkit::gen;
use mobtraj_testkit::naive::naive_evaluate;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SIX_QUERIES: [&str; 6] = [
    "raw where intersects(layer \"road\") group by place select count",
    "stops where duration > 10min select object, t_begin, duration",
    "semantic where role = \"stop\" and place = \"Main Road\" and duration > 10min",
    "roi-visits group by region select count",
    "stpath",
    "devices where reliability >= 0.9 select device, kind, reliability, region",
];

fn fixture() -> &'static TrajectoryStore {
    static STORE: OnceLock<TrajectoryStore> = OnceLock::new();
    STORE.get_or_init(|| fixture_store(7))
}

#[test]
fn six_query_classes_match_naive_on_fixture() {
    let store = fixture();
    for q in SIX_QUERIES {
        let ast = parse(q).unwrap();
        let fast = evaluate(&ast, store).unwrap();
        assert!(!fast.is_empty(), "{q} returned nothing");
        assert_eq!(fast, naive_evaluate(&ast, store), "{q}");
    }
}

#[test]
fn fixture_specific_queries_match_naive() {
    let store = fixture();
    for q in [
        "raw where within(region \"Hypermarket\") and x < 500 select object, t",
        "moves where intersects(layer \"commercial\") and intersects(layer \"road\") group by place",
        "stops where window(200, 800, 200, 800, 0, 6000) select object, duration",
        "semantic where place like \"%Road\" group by object select count",
        "roi-visits where via_descendant = \"true\" and region = \"Hypermarket\" select object, t_begin",
        "stpath where label like \"%call%\" select object, label, x, y",
        "devices where region like \"%port%\" group by device select count",
        "devices where kind != \"GPS\" and t >= 3000 select device, t",
        "stops select count",
    ] {
        let ast = parse(q).unwrap();
        assert_eq!(evaluate(&ast, store).unwrap(), naive_evaluate(&ast, store), "{q}");
    }
}

/// An always-true `like` on the first plain string field of the source.
fn tautology(ast: &QueryAst) -> Predicate {
    let f = field_table(ast.source)
        .iter()
        .find(|f| f.ty == FieldType::Str && !f.layer_only)
        .expect("every source has a string field");
    Predicate::Like {
        field: f.name.to_string(),
        pattern: "%".into(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printed_ast_parses_back(seed in any::<u64>()) {
        let ast = gen::ast(&mut ChaCha8Rng::seed_from_u64(seed));
        let text = pretty_print(&ast);
        prop_assert_eq!(parse(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?, ast);
    }

    #[test]
    fn canonical_text_prints_back(seed in any::<u64>()) {
        let text = gen::canonical_text(&mut ChaCha8Rng::seed_from_u64(seed));
        let ast = parse(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(pretty_print(&ast), text);
    }

    #[test]
    fn random_queries_match_naive(seed in any::<u64>()) {
        let ast = gen::ast(&mut ChaCha8Rng::seed_from_u64(seed));
        let store = fixture();
        prop_assert_eq!(evaluate(&ast, store).unwrap(), naive_evaluate(&ast, store), "{}", pretty_print(&ast));
    }

    #[test]
    fn predicate_order_does_not_matter(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ast = gen::ast(&mut rng);
        let mut shuffled = ast.clone();
        shuffled.predicates.shuffle(&mut rng);
        let store = fixture();
        prop_assert_eq!(evaluate(&ast, store).unwrap(), evaluate(&shuffled, store).unwrap());
    }

    #[test]
    fn always_true_predicate_changes_nothing(seed in any::<u64>(), at in any::<prop::sample::Index>()) {
        let ast = gen::ast(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut widened = ast.clone();
        let pos = at.index(widened.predicates.len() + 1);
        widened.predicates.insert(pos, tautology(&ast));
        let store = fixture();
        prop_assert_eq!(evaluate(&ast, store).unwrap(), evaluate(&widened, store).unwrap());
    }
}

#[test]
fn empty_store_counts_zero() {
    let store = TrajectoryStore::new();
    let t = evaluate(&parse("raw select count").unwrap(), &store).unwrap();
    assert_eq!(t.to_tsv(), "count\n0\n");
    let t = evaluate(&parse("raw group by object select count").unwrap(), &store).unwrap();
    assert_eq!(t.to_tsv(), "object\tcount\n");
}

#[test]
fn missing_prerequisites_are_reported() {
    let mut store = load_files(&fixture_files(1));
    for (q, hint) in [
        ("stops", "segment"),
        ("semantic", "annotate"),
        ("roi-visits", "annotate"),
    ] {
        let err = evaluate(&parse(q).unwrap(), &store).unwrap_err().to_string();
        assert!(err.contains(hint), "{q}: {err}");
    }
    let structured: Vec<_> = {
        enrich(&mut store);
        store.structured_trajectories().cloned().collect()
    };
    let mut segmented_only = load_files(&fixture_files(1));
    for st in structured {
        segmented_only.upsert(Entity::Structured(st)).unwrap();
    }
    assert!(evaluate(&parse("stops").unwrap(), &segmented_only).is_ok());
    let err = evaluate(&parse("semantic").unwrap(), &segmented_only)
        .unwrap_err()
        .to_string();
    assert!(err.contains("run `annotate`"), "{err}");
}
