//! Stop/move segmentation of raw trajectories and place annotation of the
//! resulting episodes.
//!
//! A stop is found by anchoring at a fix and extending forward while every
//! following fix stays within `eps` meters of the anchor. If the extended
//! window lasts at least `tau` seconds it becomes a stop and scanning resumes
//! after it; otherwise the anchor advances by one fix. Everything not covered
//! by a stop is movement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{centroid, GeoPoint, Polyline, SpatialObject};
use crate::ids::{EventId, RegionId};
use crate::model::{
    Annotation, Episode, EpisodeKind, RawTrajectory, Role, SemanticTag, SemanticTrajectory, SpaceTimeEvent,
    StructuredTrajectory,
};
use crate::regions::RegionForest;
use crate::time::TimeInterval;

/// Spatial neighbourhood radius (meters) and minimum stop duration (seconds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationParams {
    eps: f64,
    tau: i64,
}

impl SegmentationParams {
    pub fn new(eps: f64, tau: i64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::validation(format!("eps must be > 0, got {eps}")));
        }
        if tau <= 0 {
            return Err(Error::validation(format!("tau must be > 0, got {tau}")));
        }
        Ok(SegmentationParams { eps, tau })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn tau(&self) -> i64 {
        self.tau
    }
}

/// Inclusive index ranges of the stops found by the anchor scan.
pub fn stop_ranges(raw: &RawTrajectory, params: &SegmentationParams) -> Vec<(usize, usize)> {
    let pts = raw.points();
    let n = pts.len();
    let mut stops = Vec::new();
    let mut i = 0;
    while i < n {
        let anchor = &pts[i].position;
        let mut j = i;
        while j + 1 < n && pts[j + 1].position.distance(anchor) <= params.eps {
            j += 1;
        }
        if pts[j].t.seconds() - pts[i].t.seconds() >= params.tau {
            stops.push((i, j));
            i = j + 1;
        } else {
            i += 1;
        }
    }
    stops
}

fn span(raw: &RawTrajectory, start: usize, end: usize) -> TimeInterval {
    let pts = raw.points();
    TimeInterval::new(pts[start].t, pts[end].t).expect("raw timestamps increase")
}

fn move_episode(raw: &RawTrajectory, start: usize, end: usize, shares_start: bool, shares_end: bool) -> Episode {
    let mut vertices: Vec<GeoPoint> = raw.points()[start..=end].iter().map(|p| p.position).collect();
    if vertices.len() == 1 {
        vertices.push(vertices[0]);
    }
    Episode {
        kind: EpisodeKind::Move,
        start_index: start,
        end_index: end,
        time: span(raw, start, end),
        geometry: SpatialObject::line(Polyline::new(vertices).expect("two or more vertices")),
        shares_start,
        shares_end,
    }
}

fn stop_episode(raw: &RawTrajectory, start: usize, end: usize) -> Episode {
    let positions: Vec<GeoPoint> = raw.points()[start..=end].iter().map(|p| p.position).collect();
    Episode {
        kind: EpisodeKind::Stop,
        start_index: start,
        end_index: end,
        time: span(raw, start, end),
        geometry: SpatialObject::point(centroid(&positions).expect("non-empty stop")),
        shares_start: false,
        shares_end: false,
    }
}

fn boundary_event(raw: &RawTrajectory, index: usize, suffix: &str) -> SpaceTimeEvent {
    let p = &raw.points()[index];
    let mut ev = SpaceTimeEvent::new(
        EventId::new(format!("{}#{suffix}", raw.object_id())),
        raw.object_id().clone(),
        SpatialObject::point(p.position),
        TimeInterval::instant(p.t),
    );
    ev.device_id = p.device_id.clone();
    ev
}

/// Segments a raw trajectory into alternating stop and move episodes with
/// begin/end events at the first and last fix.
pub fn detect_stops(raw: &RawTrajectory, params: &SegmentationParams) -> StructuredTrajectory {
    let n = raw.len();
    let mut episodes = Vec::new();
    let mut cursor = 0;
    let mut prev_stop_end: Option<usize> = None;
    for (s, e) in stop_ranges(raw, params) {
        match prev_stop_end {
            Some(prev) => episodes.push(move_episode(raw, prev, s, true, true)),
            None if s > 0 => episodes.push(move_episode(raw, 0, s, false, true)),
            None => {}
        }
        episodes.push(stop_episode(raw, s, e));
        cursor = e + 1;
        prev_stop_end = Some(e);
    }
    if cursor < n {
        let start = prev_stop_end.unwrap_or(0);
        episodes.push(move_episode(raw, start, n - 1, prev_stop_end.is_some(), false));
    }
    StructuredTrajectory {
        object_id: raw.object_id().clone(),
        source: raw.clone(),
        begin: boundary_event(raw, 0, "begin"),
        end: boundary_event(raw, n - 1, "end"),
        episodes,
    }
}

fn tag_for(forest: &RegionForest, region: &RegionId, role: Role) -> SemanticTag {
    let r = forest.get(region).expect("region comes from this forest");
    SemanticTag {
        place_name: r.name.clone(),
        category: r.category.clone(),
        role,
    }
}

/// Labels episodes with places: a stop gets the deepest region containing
/// its centroid, a move the distinct regions its vertices fall in.
pub fn annotate(st: &StructuredTrajectory, forest: &RegionForest) -> SemanticTrajectory {
    let annotations: Vec<Option<Annotation>> = st
        .episodes
        .iter()
        .map(|ep| match ep.kind {
            EpisodeKind::Stop => forest.deepest_region(&ep.representative_point()).map(|id| Annotation {
                tag: tag_for(forest, &id, Role::Stop),
                region_ids: vec![id],
            }),
            EpisodeKind::Move => {
                let mut crossed: Vec<RegionId> = Vec::new();
                for v in ep.geometry.vertices() {
                    if let Some(id) = forest.deepest_region(v) {
                        if !crossed.contains(&id) {
                            crossed.push(id);
                        }
                    }
                }
                crossed.first().cloned().map(|first| Annotation {
                    tag: tag_for(forest, &first, Role::Move),
                    region_ids: crossed,
                })
            }
        })
        .collect();

    let relabel = |a: &Option<Annotation>, role| a.as_ref().map(|a| SemanticTag { role, ..a.tag.clone() });
    SemanticTrajectory {
        begin_tag: annotations.first().and_then(|a| relabel(a, Role::Begin)),
        end_tag: annotations.last().and_then(|a| relabel(a, Role::End)),
        base: st.clone(),
        annotations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use crate::model::{validate_raw, RawPoint};
    use crate::time::TimeInstant;

    fn raw(pts: &[(f64, f64, i64)]) -> RawTrajectory {
        validate_raw(
            "MO",
            pts.iter()
                .map(|&(x, y, t)| RawPoint::new(GeoPoint::new(x, y).unwrap(), TimeInstant::new(t).unwrap()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn coincident_points_force_a_stop() {
        let r = raw(&[(0.0, 0.0, 0), (0.0, 0.0, 300), (0.0, 0.0, 600), (1000.0, 0.0, 900)]);
        let st = detect_stops(&r, &SegmentationParams::new(50.0, 600).unwrap());
        st.check_invariants().unwrap();
        assert_eq!(st.episodes.len(), 2);
        let stop = &st.episodes[0];
        assert_eq!((stop.kind, stop.start_index, stop.end_index), (EpisodeKind::Stop, 0, 2));
        assert_eq!(stop.time, TimeInterval::from_secs(0, 600).unwrap());
        assert_eq!(stop.geometry.shape, Shape::Point(GeoPoint::new(0.0, 0.0).unwrap()));
        let mv = &st.episodes[1];
        assert_eq!((mv.kind, mv.start_index, mv.end_index), (EpisodeKind::Move, 2, 3));
        assert_eq!(mv.owned_range(), 3..4);
        assert_eq!(st.begin.time.begin().seconds(), 0);
        assert_eq!(st.end.time.end().seconds(), 900);
    }

    #[test]
    fn displacement_beyond_eps_is_a_single_move() {
        let r = raw(&[(0.0, 0.0, 0), (100.0, 0.0, 60)]);
        let st = detect_stops(&r, &SegmentationParams::new(50.0, 300).unwrap());
        assert_eq!(st.episodes.len(), 1);
        assert_eq!(st.episodes[0].kind, EpisodeKind::Move);
        assert_eq!((st.episodes[0].start_index, st.episodes[0].end_index), (0, 1));
        st.check_invariants().unwrap();
    }

    #[test]
    fn back_to_back_stops_get_a_connector_move() {
        let r = raw(&[(0.0, 0.0, 0), (0.0, 0.0, 100), (500.0, 0.0, 200), (500.0, 0.0, 300)]);
        let st = detect_stops(&r, &SegmentationParams::new(10.0, 100).unwrap());
        let kinds: Vec<_> = st.episodes.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, [EpisodeKind::Stop, EpisodeKind::Move, EpisodeKind::Stop]);
        assert!(st.episodes[1].owned_range().is_empty());
        assert_eq!(st.episodes[1].time, TimeInterval::from_secs(100, 200).unwrap());
        st.check_invariants().unwrap();
    }

    #[test]
    fn single_fix_is_a_degenerate_move() {
        let r = raw(&[(3.0, 4.0, 10)]);
        let st = detect_stops(&r, &SegmentationParams::new(1.0, 1).unwrap());
        assert_eq!(st.episodes.len(), 1);
        assert_eq!(st.episodes[0].geometry.vertices().len(), 2);
        st.check_invariants().unwrap();
    }

    #[test]
    fn params_validated() {
        assert!(SegmentationParams::new(0.0, 10).is_err());
        assert!(SegmentationParams::new(f64::NAN, 10).is_err());
        assert!(SegmentationParams::new(1.0, 0).is_err());
    }

    #[test]
    fn empty_forest_leaves_everything_unannotated() {
        let r = raw(&[(0.0, 0.0, 0), (0.0, 0.0, 600), (900.0, 0.0, 700)]);
        let st = detect_stops(&r, &SegmentationParams::new(5.0, 60).unwrap());
        let sem = annotate(&st, &RegionForest::default());
        assert_eq!(sem.annotations.len(), st.episodes.len());
        assert!(sem.annotations.iter().all(Option::is_none));
        assert_eq!(sem.base, st);
    }
}
