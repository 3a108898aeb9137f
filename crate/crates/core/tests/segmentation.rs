use mobtraj_core::geometry::{centroid, GeoPoint, Shape};
use mobtraj_core::model::EpisodeKind;
use mobtraj_core::segmentation::{detect_stops, stop_ranges, SegmentationParams};
use mobtraj_testkit::gen::{raw_trajectory, trace};
use mobtraj_testkit::oracle::{expected_episodes, quadratic_stop_ranges};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn stops_match_quadratic_definition(seed in any::<u64>(), n in 1usize..100, eps in 1.0f64..60.0, tau in 1i64..900) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = trace(&mut rng, n);
        let raw = raw_trajectory("M", &pts);
        let params = SegmentationParams::new(eps, tau).unwrap();
        let stops = quadratic_stop_ranges(&pts, eps, tau);
        prop_assert_eq!(stop_ranges(&raw, &params), stops.clone());

        let st = detect_stops(&raw, &params);
        st.check_invariants().unwrap();
        let shapes: Vec<_> = st
            .episodes
            .iter()
            .map(|e| (e.kind, e.start_index, e.end_index, e.shares_start, e.shares_end))
            .collect();
        prop_assert_eq!(shapes, expected_episodes(n, &stops));
    }

    #[test]
    fn owned_ranges_partition_the_fixes(seed in any::<u64>(), n in 1usize..100, eps in 1.0f64..60.0, tau in 1i64..900) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = trace(&mut rng, n);
        let st = detect_stops(&raw_trajectory("M", &pts), &SegmentationParams::new(eps, tau).unwrap());
        let mut owner = vec![0usize; n];
        for ep in &st.episodes {
            for i in ep.owned_range() {
                owner[i] += 1;
            }
        }
        prop_assert!(owner.iter().all(|&c| c == 1));
        for w in st.episodes.windows(2) {
            prop_assert_ne!(w[0].kind, w[1].kind);
        }
    }

    #[test]
    fn episode_geometry_and_time_follow_the_fixes(seed in any::<u64>(), n in 1usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = trace(&mut rng, n);
        let st = detect_stops(&raw_trajectory("M", &pts), &SegmentationParams::new(25.0, 120).unwrap());
        prop_assert_eq!(st.begin.time.begin().seconds(), pts[0].2);
        prop_assert_eq!(st.end.time.end().seconds(), pts[n - 1].2);
        for ep in &st.episodes {
            let (s, e) = (ep.start_index, ep.end_index);
            prop_assert_eq!(ep.time.begin().seconds(), pts[s].2);
            prop_assert_eq!(ep.time.end().seconds(), pts[e].2);
            let fixes: Vec<GeoPoint> = pts[s..=e].iter().map(|&(x, y, _)| GeoPoint::new(x, y).unwrap()).collect();
            match (&ep.kind, &ep.geometry.shape) {
                (EpisodeKind::Stop, Shape::Point(p)) => {
                    prop_assert!(ep.duration_secs() >= 120);
                    prop_assert_eq!(*p, centroid(&fixes).unwrap());
                }
                (EpisodeKind::Move, Shape::Line(l)) => {
                    // a one-fix move repeats its vertex to stay a valid line
                    let expected = if fixes.len() == 1 { vec![fixes[0], fixes[0]] } else { fixes };
                    prop_assert_eq!(l.vertices(), &expected[..]);
                }
                other => prop_assert!(false, "unexpected episode shape {:?}", other),
            }
        }
    }
}

#[test]
fn dwell_between_trips_is_one_stop() {
    // travel, 10 minutes within a few meters, travel
    let mut pts = Vec::new();
    for i in 0..5 {
        pts.push((i as f64 * 200.0, 0.0, i * 60));
    }
    for i in 0..11 {
        pts.push((1000.0 + (i % 3) as f64, 2.0, 300 + i * 60));
    }
    for i in 1..4 {
        pts.push((1000.0 + i as f64 * 200.0, 0.0, 900 + i * 60));
    }
    let st = detect_stops(&raw_trajectory("M", &pts), &SegmentationParams::new(10.0, 600).unwrap());
    let kinds: Vec<_> = st
        .episodes
        .iter()
        .map(|e| (e.kind, e.start_index, e.end_index))
        .collect();
    assert_eq!(
        kinds,
        [
            (EpisodeKind::Move, 0, 5),
            (EpisodeKind::Stop, 5, 15),
            (EpisodeKind::Move, 15, 18)
        ]
    );
}

#[test]
fn single_fix_is_a_move() {
    let st = detect_stops(
        &raw_trajectory("M", &[(1.0, 2.0, 5)]),
        &SegmentationParams::new(5.0, 60).unwrap(),
    );
    assert_eq!(st.episodes.len(), 1);
    assert_eq!(st.episodes[0].kind, EpisodeKind::Move);
    st.check_invariants().unwrap();
}
