//! Physical and virtual activities, processes, and space-time paths.
//!
//! Activities are stored on their own and linked to events through
//! begin/end associations, so one activity may start at one event and end
//! at another.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GeoPoint;
use crate::ids::{ActivityId, EventId, ObjectId, ProcessId};
use crate::model::{compare_events, SpaceTimeEvent};
use crate::store::TrajectoryStore;
use crate::time::TimeInterval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActivityKind {
    Physical,
    Virtual,
}

impl ActivityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActivityKind::Physical => "Physical",
            ActivityKind::Virtual => "Virtual",
        }
    }
}

impl std::str::FromStr for ActivityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Physical" => Ok(ActivityKind::Physical),
            "Virtual" => Ok(ActivityKind::Virtual),
            other => Err(Error::validation(format!(
                "activity kind must be Physical or Virtual, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub id: ActivityId,
    pub object_id: ObjectId,
    pub kind: ActivityKind,
    pub label: String,
    pub time: TimeInterval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<GeoPoint>,
}

impl Activity {
    pub fn validate(&self) -> Result<()> {
        if self.id.as_str().is_empty() || self.object_id.as_str().is_empty() {
            return Err(Error::validation("activity and object ids must be non-empty"));
        }
        if self.kind == ActivityKind::Physical && self.location.is_none() {
            return Err(Error::validation(format!(
                "physical activity `{}` has no location",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Process {
    pub id: ProcessId,
    pub name: String,
    pub activities: Vec<ActivityId>,
}

impl Process {
    pub(crate) fn validate(&self, known: &BTreeMap<ActivityId, Activity>) -> Result<()> {
        let acts = self
            .activities
            .iter()
            .map(|id| known.get(id).ok_or_else(|| Error::not_found("activity", id.as_str())))
            .collect::<Result<Vec<_>>>()?;
        let Some(first) = acts.first() else {
            return Err(Error::Argument(format!("process `{}` has no activities", self.id)));
        };
        if let Some(other) = acts.iter().find(|a| a.object_id != first.object_id) {
            return Err(Error::ObjectMismatch(format!(
                "process `{}` mixes objects `{}` and `{}`",
                self.id, first.object_id, other.object_id
            )));
        }
        if acts.windows(2).any(|w| w[0].time.begin() > w[1].time.begin()) {
            return Err(Error::validation(format!(
                "process `{}` activities are not ordered by begin time",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttachRole {
    BeginsAt,
    EndsAt,
}

/// Links an activity to the event where it begins or ends.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Association {
    pub event_id: EventId,
    pub activity_id: ActivityId,
    pub role: AttachRole,
}

impl Association {
    pub(crate) fn key(&self) -> String {
        format!("{}|{}|{:?}", self.event_id, self.activity_id, self.role)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathEntry {
    pub event: SpaceTimeEvent,
    pub begin_activities: Vec<Activity>,
    pub end_activities: Vec<Activity>,
}

/// Time-ordered events of one object with the activities that begin and
/// end at each.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceTimePath {
    pub object_id: ObjectId,
    pub entries: Vec<PathEntry>,
}

fn by_begin(a: &Activity, b: &Activity) -> std::cmp::Ordering {
    (a.time.begin(), &a.id).cmp(&(b.time.begin(), &b.id))
}

impl TrajectoryStore {
    /// Records that an activity begins or ends at an event. Attaching the
    /// same pair twice is a no-op.
    pub fn attach_activity(&mut self, event: &EventId, activity: &ActivityId, role: AttachRole) -> Result<Association> {
        let ev = self
            .event(event)
            .ok_or_else(|| Error::not_found("event", event.as_str()))?;
        let act = self
            .activity(activity)
            .ok_or_else(|| Error::not_found("activity", activity.as_str()))?;
        if ev.object_id != act.object_id {
            return Err(Error::ObjectMismatch(format!(
                "activity `{activity}` belongs to `{}` but event `{event}` to `{}`",
                act.object_id, ev.object_id
            )));
        }
        let assoc = Association {
            event_id: event.clone(),
            activity_id: activity.clone(),
            role,
        };
        if self.data.associations.insert(assoc.clone()) {
            self.bump();
        }
        Ok(assoc)
    }

    /// Groups activities of one object into a process ordered by begin time.
    /// The process id is its name; composing again under the same name
    /// replaces it.
    pub fn compose_process(&mut self, name: &str, activity_ids: &[ActivityId]) -> Result<Process> {
        if activity_ids.is_empty() {
            return Err(Error::Argument(format!("process `{name}` needs at least one activity")));
        }
        let mut acts = activity_ids
            .iter()
            .map(|id| {
                self.activity(id)
                    .ok_or_else(|| Error::not_found("activity", id.as_str()))
            })
            .collect::<Result<Vec<_>>>()?;
        acts.sort_by(|a, b| by_begin(a, b));
        let process = Process {
            id: ProcessId::new(name),
            name: name.to_string(),
            activities: acts.iter().map(|a| a.id.clone()).collect(),
        };
        process.validate(&self.data.activities)?;
        self.data.processes.insert(process.id.clone(), process.clone());
        self.bump();
        Ok(process)
    }

    pub fn build_path(&self, object: &ObjectId) -> Result<SpaceTimePath> {
        let mut events: Vec<&SpaceTimeEvent> = self.events_of(object).collect();
        if events.is_empty() {
            return Err(Error::not_found("object", object.as_str()));
        }
        events.sort_by(|a, b| compare_events(a, b));
        let entries = events
            .into_iter()
            .map(|ev| {
                let mut begin = Vec::new();
                let mut end = Vec::new();
                for a in self.data.associations.iter().filter(|a| a.event_id == ev.id) {
                    if let Some(act) = self.activity(&a.activity_id) {
                        match a.role {
                            AttachRole::BeginsAt => begin.push(act.clone()),
                            AttachRole::EndsAt => end.push(act.clone()),
                        }
                    }
                }
                begin.sort_by(by_begin);
                end.sort_by(by_begin);
                PathEntry {
                    event: ev.clone(),
                    begin_activities: begin,
                    end_activities: end,
                }
            })
            .collect();
        Ok(SpaceTimePath {
            object_id: object.clone(),
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SpatialObject;
    use crate::store::Entity;

    fn event(id: &str, obj: &str, t: i64) -> SpaceTimeEvent {
        SpaceTimeEvent::new(
            id,
            obj,
            SpatialObject::point(GeoPoint::new(0.0, 0.0).unwrap()),
            TimeInterval::from_secs(t, t).unwrap(),
        )
    }

    fn activity(id: &str, obj: &str, kind: ActivityKind, label: &str, b: i64) -> Activity {
        Activity {
            id: id.into(),
            object_id: obj.into(),
            kind,
            label: label.into(),
            time: TimeInterval::from_secs(b, b + 60).unwrap(),
            location: (kind == ActivityKind::Physical).then(|| GeoPoint::new(1.0, 1.0).unwrap()),
        }
    }

    fn fixture() -> TrajectoryStore {
        let mut s = TrajectoryStore::new();
        for e in [
            event("E1", "A", 0),
            event("E2", "A", 100),
            event("E3", "A", 200),
            event("F1", "B", 0),
        ] {
            s.upsert(Entity::Event(e)).unwrap();
        }
        for a in [
            activity("email", "A", ActivityKind::Virtual, "send email", 0),
            activity("drive", "A", ActivityKind::Physical, "drive to work", 28_800),
            activity("lunch", "A", ActivityKind::Physical, "have lunch", 43_200),
            activity("walk", "B", ActivityKind::Physical, "walk to school", 0),
        ] {
            s.upsert(Entity::Activity(a)).unwrap();
        }
        s
    }

    #[test]
    fn attach_is_idempotent_and_checks_objects() {
        let mut s = fixture();
        s.attach_activity(&"E1".into(), &"email".into(), AttachRole::BeginsAt)
            .unwrap();
        let rev = s.revision();
        s.attach_activity(&"E1".into(), &"email".into(), AttachRole::BeginsAt)
            .unwrap();
        assert_eq!(s.revision(), rev);
        assert_eq!(s.associations().count(), 1);
        assert!(matches!(
            s.attach_activity(&"F1".into(), &"email".into(), AttachRole::BeginsAt),
            Err(Error::ObjectMismatch(_))
        ));
        assert!(matches!(
            s.attach_activity(&"E9".into(), &"email".into(), AttachRole::EndsAt),
            Err(Error::NotFound { .. })
        ));
        // begin and end at the same event is allowed
        s.attach_activity(&"E1".into(), &"email".into(), AttachRole::EndsAt)
            .unwrap();
    }

    #[test]
    fn path_is_time_ordered() {
        let mut s = fixture();
        s.attach_activity(&"E3".into(), &"lunch".into(), AttachRole::BeginsAt)
            .unwrap();
        s.attach_activity(&"E1".into(), &"email".into(), AttachRole::BeginsAt)
            .unwrap();
        s.attach_activity(&"E2".into(), &"drive".into(), AttachRole::EndsAt)
            .unwrap();
        let p = s.build_path(&"A".into()).unwrap();
        let ids: Vec<_> = p.entries.iter().map(|e| e.event.id.as_str()).collect();
        assert_eq!(ids, ["E1", "E2", "E3"]);
        assert_eq!(p.entries[1].end_activities[0].label, "drive to work");
        assert!(p
            .entries
            .iter()
            .flat_map(|e| &e.begin_activities)
            .all(|a| a.object_id == p.object_id));
        assert!(s.build_path(&"nobody".into()).is_err());
    }

    #[test]
    fn equal_intervals_tie_break_on_id() {
        let mut s = TrajectoryStore::new();
        s.upsert(Entity::Event(event("e2", "A", 5))).unwrap();
        s.upsert(Entity::Event(event("e1", "A", 5))).unwrap();
        let p = s.build_path(&"A".into()).unwrap();
        assert_eq!(p.entries[0].event.id.as_str(), "e1");
    }

    #[test]
    fn process_sorted_and_validated() {
        let mut s = fixture();
        let p = s.compose_process("day", &["lunch".into(), "drive".into()]).unwrap();
        assert_eq!(p.activities, vec![ActivityId::from("drive"), "lunch".into()]);
        let single = s.compose_process("solo", &["email".into()]).unwrap();
        assert_eq!(single.activities.len(), 1);
        assert!(matches!(
            s.compose_process("mixed", &["drive".into(), "walk".into()]),
            Err(Error::ObjectMismatch(_))
        ));
        assert!(matches!(s.compose_process("none", &[]), Err(Error::Argument(_))));
    }

    #[test]
    fn physical_needs_location() {
        let mut a = activity("x", "A", ActivityKind::Physical, "walk", 0);
        a.location = None;
        assert!(a.validate().is_err());
        assert!(activity("y", "A", ActivityKind::Virtual, "call", 0).validate().is_ok());
    }
}
