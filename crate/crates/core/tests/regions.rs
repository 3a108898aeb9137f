use std::collections::BTreeSet;

use mobtraj_core::geometry::GeoPoint;
use mobtraj_core::ids::RegionId;
use mobtraj_core::model::EpisodeKind;
use mobtraj_core::regions::{build_forest, visits, voronoi_member, GeometryDef, RegionDef};
use mobtraj_testkit::fixture::fixture_store;
use mobtraj_testkit::naive::Regions;
use mobtraj_testkit::oracle::voronoi_argmin;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rectangles and sites with random parent links; ids are shuffled so
/// that id order says nothing about depth.
fn random_defs(rng: &mut ChaCha8Rng) -> Vec<RegionDef> {
    let n = rng.gen_range(1..14);
    let mut ids: Vec<String> = (0..n).map(|i| format!("r{i:02}")).collect();
    ids.shuffle(rng);
    let mut defs: Vec<RegionDef> = Vec::new();
    for (i, id) in ids.iter().enumerate() {
        let parent = (i > 0 && rng.gen_bool(0.6)).then(|| ids[rng.gen_range(0..i)].clone().into());
        let geometry = if rng.gen_bool(0.25) {
            GeometryDef::Site {
                point: [rng.gen_range(0..100) as f64, rng.gen_range(0..100) as f64],
            }
        } else {
            let (x, y) = (rng.gen_range(0..90) as f64, rng.gen_range(0..90) as f64);
            let (w, h) = (rng.gen_range(1..40) as f64, rng.gen_range(1..40) as f64);
            GeometryDef::Polygon {
                ring: vec![[x, y], [x + w, y], [x + w, y + h], [x, y + h]],
            }
        };
        defs.push(RegionDef {
            id: id.as_str().into(),
            name: format!("name of {id}"),
            category: ["shop", "road", "zone"][i % 3].into(),
            parent,
            geometry,
        });
    }
    defs
}

proptest! {
    #[test]
    fn membership_matches_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let defs = random_defs(&mut rng);
        let forest = build_forest(&defs).unwrap();
        let naive = Regions::from_defs(&defs);
        for _ in 0..50 {
            let (x, y) = (rng.gen_range(-5..135) as f64, rng.gen_range(-5..135) as f64);
            let p = GeoPoint::new(x, y).unwrap();
            let members: BTreeSet<String> = forest.members_at(&p).iter().map(|r| r.to_string()).collect();
            prop_assert_eq!(&members, &naive.members((x, y)));
            for d in &defs {
                prop_assert_eq!(forest.is_member(&p, &d.id).unwrap(), members.contains(d.id.as_str()));
            }
            // a member's ancestors are members
            for m in &members {
                for a in forest.ancestors(&RegionId::from(m.as_str())) {
                    prop_assert!(members.contains(a.as_str()));
                }
            }
            prop_assert_eq!(forest.deepest_region(&p).map(|r| r.to_string()), naive.deepest((x, y)));
        }
    }

    #[test]
    fn voronoi_is_translation_invariant(
        sites in prop::collection::vec((-1000i64..1000, -1000i64..1000), 1..20),
        p in (-1000i64..1000, -1000i64..1000),
        shift in (-100_000i64..100_000, -100_000i64..100_000),
    ) {
        let mk = |dx: i64, dy: i64| -> Vec<(RegionId, GeoPoint)> {
            sites
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| (format!("s{i:02}").into(), GeoPoint::new((x + dx) as f64, (y + dy) as f64).unwrap()))
                .collect()
        };
        let here = voronoi_member(&GeoPoint::new(p.0 as f64, p.1 as f64).unwrap(), &mk(0, 0)).unwrap();
        let moved = GeoPoint::new((p.0 + shift.0) as f64, (p.1 + shift.1) as f64).unwrap();
        prop_assert_eq!(here, voronoi_member(&moved, &mk(shift.0, shift.1)).unwrap());
    }
}

#[test]
fn voronoi_matches_argmin_with_ties() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sites: Vec<(String, (f64, f64))> = (0..20)
        .map(|i| {
            (
                format!("site-{i:02}"),
                (rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0)),
            )
        })
        .collect();
    let as_regions: Vec<(RegionId, GeoPoint)> = sites
        .iter()
        .map(|(id, (x, y))| (id.as_str().into(), GeoPoint::new(*x, *y).unwrap()))
        .collect();
    for _ in 0..1000 {
        let p = (rng.gen_range(-100.0..1100.0), rng.gen_range(-100.0..1100.0));
        let got = voronoi_member(&GeoPoint::new(p.0, p.1).unwrap(), &as_regions).unwrap();
        assert_eq!(Some(got.as_str()), voronoi_argmin(p, &sites));
    }
    // four sites at the same distance; insertion order must not matter
    let mut tied = vec![
        ("d".to_string(), (10.0, 0.0)),
        ("b".to_string(), (-10.0, 0.0)),
        ("c".to_string(), (0.0, 10.0)),
        ("e".to_string(), (0.0, -10.0)),
    ];
    for _ in 0..6 {
        tied.shuffle(&mut rng);
        let regions: Vec<(RegionId, GeoPoint)> = tied
            .iter()
            .map(|(id, (x, y))| (id.as_str().into(), GeoPoint::new(*x, *y).unwrap()))
            .collect();
        assert_eq!(
            voronoi_member(&GeoPoint::new(0.0, 0.0).unwrap(), &regions)
                .unwrap()
                .as_str(),
            "b"
        );
        assert_eq!(voronoi_argmin((0.0, 0.0), &tied), Some("b"));
    }
    assert!(voronoi_member(&GeoPoint::new(0.0, 0.0).unwrap(), &[]).is_err());
}

#[test]
fn visits_roll_up_along_the_ancestor_chain() {
    let store = fixture_store(3);
    let naive = Regions::from_store(&store);
    let mut total = 0;
    for sem in store.semantic_trajectories() {
        let mut expected = Vec::new();
        for ep in sem.base.episodes.iter().filter(|e| e.kind == EpisodeKind::Stop) {
            let c = ep.representative_point();
            if let Some(r) = naive.deepest((c.x(), c.y())) {
                expected.push((ep.time.begin().seconds(), r.clone(), false));
                expected.extend(
                    naive
                        .ancestors(&r)
                        .into_iter()
                        .map(|a| (ep.time.begin().seconds(), a, true)),
                );
            }
        }
        let mut got: Vec<_> = visits(sem, store.forest())
            .into_iter()
            .map(|v| (v.time.begin().seconds(), v.region_id.to_string(), v.via_descendant))
            .collect();
        got.sort();
        expected.sort();
        total += got.iter().filter(|v| v.2).count();
        assert_eq!(got, expected, "{}", sem.object_id());
    }
    assert!(total > 0, "fixture should produce roll-up visits");
}

#[test]
fn forest_rejects_unknown_parent_and_cycles() {
    let rect = GeometryDef::Polygon {
        ring: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]],
    };
    let def = |id: &str, parent: Option<&str>| RegionDef {
        id: id.into(),
        name: id.into(),
        category: "c".into(),
        parent: parent.map(Into::into),
        geometry: rect.clone(),
    };
    assert!(build_forest(&[def("a", Some("zz"))]).is_err());
    assert!(build_forest(&[def("a", Some("b")), def("b", Some("a"))]).is_err());
    assert!(build_forest(&[def("a", None), def("a", None)]).is_err());
    let f = build_forest(&[def("a", None), def("b", Some("a")), def("c", Some("b"))]).unwrap();
    assert_eq!(f.ancestors(&"c".into()), vec![RegionId::from("b"), RegionId::from("a")]);
}
