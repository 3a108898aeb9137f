use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GeoPoint, SpatialObject};
use crate::ids::{DeviceId, ObjectId, RegionId};
use crate::model::event::{SemanticTag, SpaceTimeEvent};
use crate::time::{TimeInstant, TimeInterval};

/// One position fix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawPoint {
    pub position: GeoPoint,
    pub t: TimeInstant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device_id: Option<DeviceId>,
}

impl RawPoint {
    pub fn new(position: GeoPoint, t: TimeInstant) -> Self {
        RawPoint {
            position,
            t,
            device_id: None,
        }
    }
}

/// Time-ordered position fixes of one moving object.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawTrajectory {
    object_id: ObjectId,
    points: Vec<RawPoint>,
}

impl RawTrajectory {
    pub fn object_id(&self) -> &ObjectId {
        &self.object_id
    }

    pub fn points(&self) -> &[RawPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<RawPoint> {
        self.points
    }
}

/// Builds a raw trajectory, rejecting empty input and any timestamp that
/// does not strictly follow its predecessor.
pub fn validate_raw(object_id: impl Into<ObjectId>, points: Vec<RawPoint>) -> Result<RawTrajectory> {
    if points.is_empty() {
        return Err(Error::Argument("raw trajectory needs at least one point".into()));
    }
    for (i, w) in points.windows(2).enumerate() {
        if w[1].t <= w[0].t {
            return Err(Error::NonIncreasingTime {
                index: i + 1,
                previous: w[0].t.seconds(),
                t: w[1].t.seconds(),
            });
        }
    }
    Ok(RawTrajectory {
        object_id: object_id.into(),
        points,
    })
}

impl<'de> Deserialize<'de> for RawTrajectory {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            object_id: ObjectId,
            points: Vec<RawPoint>,
        }
        let w = Wire::deserialize(d)?;
        validate_raw(w.object_id, w.points).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpisodeKind {
    Stop,
    Move,
}

/// A stop or move segment over an inclusive index range of the source points.
///
/// Stops own their endpoints. A move that follows (precedes) a stop starts
/// (ends) on that stop's boundary fix so that its polyline and interval are
/// connected; such shared fixes are excluded by [`Episode::owned_range`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub kind: EpisodeKind,
    pub start_index: usize,
    pub end_index: usize,
    pub time: TimeInterval,
    pub geometry: SpatialObject,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub shares_start: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub shares_end: bool,
}

impl Episode {
    /// Indices this episode owns exclusively; over a structured trajectory
    /// these ranges partition the source points. A move connecting two
    /// back-to-back stops owns nothing.
    pub fn owned_range(&self) -> Range<usize> {
        let start = self.start_index + usize::from(self.shares_start);
        let end = self.end_index + 1 - usize::from(self.shares_end);
        start..end.max(start)
    }

    pub fn duration_secs(&self) -> i64 {
        self.time.duration_secs()
    }

    pub fn representative_point(&self) -> GeoPoint {
        self.geometry.representative_point()
    }
}

/// Begin/End plus alternating stop and move episodes over a raw trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredTrajectory {
    pub object_id: ObjectId,
    pub source: RawTrajectory,
    pub begin: SpaceTimeEvent,
    pub end: SpaceTimeEvent,
    pub episodes: Vec<Episode>,
}

impl StructuredTrajectory {
    pub fn stops(&self) -> impl Iterator<Item = &Episode> {
        self.episodes.iter().filter(|e| e.kind == EpisodeKind::Stop)
    }

    pub fn moves(&self) -> impl Iterator<Item = &Episode> {
        self.episodes.iter().filter(|e| e.kind == EpisodeKind::Move)
    }

    /// Verifies the partition, alternation and begin/end ordering invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.source.len();
        let mut next = 0usize;
        for (i, ep) in self.episodes.iter().enumerate() {
            if ep.start_index > ep.end_index || ep.end_index >= n {
                return Err(Error::validation(format!("episode {i} has a bad index range")));
            }
            let owned = ep.owned_range();
            if owned.start != next || (owned.is_empty() && ep.kind == EpisodeKind::Stop) {
                return Err(Error::validation(format!(
                    "episode {i} does not continue the partition at index {next}"
                )));
            }
            next = owned.end;
            if i > 0 && self.episodes[i - 1].kind == ep.kind {
                return Err(Error::validation(format!("episodes {} and {i} share a kind", i - 1)));
            }
            let shape_ok = match ep.kind {
                EpisodeKind::Stop => matches!(ep.geometry.shape, crate::geometry::Shape::Point(_)),
                EpisodeKind::Move => matches!(ep.geometry.shape, crate::geometry::Shape::Line(_)),
            };
            if !shape_ok {
                return Err(Error::validation(format!("episode {i} has the wrong geometry type")));
            }
        }
        if next != n {
            return Err(Error::validation("episodes do not cover every source point"));
        }
        if let (Some(first), Some(last)) = (self.episodes.first(), self.episodes.last()) {
            if self.begin.time.begin() > first.time.begin() || self.end.time.end() < last.time.end() {
                return Err(Error::validation("begin/end events are outside the episode span"));
            }
        }
        Ok(())
    }
}

/// Place annotation of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub tag: SemanticTag,
    /// Stop: the single deepest containing region. Move: distinct regions
    /// crossed by its vertices, in order of first appearance.
    pub region_ids: Vec<RegionId>,
}

/// A structured trajectory with per-episode place annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticTrajectory {
    pub base: StructuredTrajectory,
    pub annotations: Vec<Option<Annotation>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub begin_tag: Option<SemanticTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_tag: Option<SemanticTag>,
}

impl SemanticTrajectory {
    pub fn object_id(&self) -> &ObjectId {
        &self.base.object_id
    }

    /// Episodes paired with their annotations.
    pub fn annotated(&self) -> impl Iterator<Item = (&Episode, &Annotation)> {
        self.base
            .episodes
            .iter()
            .zip(&self.annotations)
            .filter_map(|(e, a)| a.as_ref().map(|a| (e, a)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rp(x: f64, t: i64) -> RawPoint {
        RawPoint::new(GeoPoint::new(x, 0.0).unwrap(), TimeInstant::new(t).unwrap())
    }

    #[test]
    fn minimal_valid_raw() {
        let raw = validate_raw("MO", vec![rp(0.0, 0), rp(1.0, 10)]).unwrap();
        assert_eq!(raw.len(), 2);
    }

    #[test]
    fn duplicate_timestamp_rejected_at_index_1() {
        let err = validate_raw("MO", vec![rp(0.0, 10), rp(1.0, 10)]).unwrap_err();
        assert!(matches!(err, Error::NonIncreasingTime { index: 1, .. }), "{err:?}");
    }

    #[test]
    fn empty_raw_is_argument_error() {
        assert!(matches!(validate_raw("MO", vec![]), Err(Error::Argument(_))));
    }

    #[test]
    fn deserialization_revalidates() {
        let json = r#"{"object_id":"MO","points":[{"position":[0,0],"t":5},{"position":[1,0],"t":4}]}"#;
        assert!(serde_json::from_str::<RawTrajectory>(json).is_err());
    }
}
