use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SpatialObject;
use crate::ids::{DeviceId, EventId, ObjectId};
use crate::time::TimeInterval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Begin,
    End,
    Stop,
    Move,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Begin => "begin",
            Role::End => "end",
            Role::Stop => "stop",
            Role::Move => "move",
        }
    }
}

/// Place label attached to an event or episode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SemanticTag {
    pub place_name: String,
    pub category: String,
    pub role: Role,
}

impl SemanticTag {
    pub fn new(place_name: impl Into<String>, category: impl Into<String>, role: Role) -> Result<Self> {
        let place_name = place_name.into();
        if place_name.is_empty() && role != Role::Move {
            return Err(Error::validation(format!(
                "{} tag requires a place name",
                role.as_str()
            )));
        }
        Ok(SemanticTag {
            place_name,
            category: category.into(),
            role,
        })
    }
}

/// Something that happened somewhere, over some time, to one moving object.
/// Events nest: `children` lists sub-events whose intervals lie inside this one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeEvent {
    pub id: EventId,
    pub object_id: ObjectId,
    pub spatial: SpatialObject,
    pub time: TimeInterval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device_id: Option<DeviceId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantic: Option<SemanticTag>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<EventId>,
}

impl SpaceTimeEvent {
    pub fn new(
        id: impl Into<EventId>,
        object_id: impl Into<ObjectId>,
        spatial: SpatialObject,
        time: TimeInterval,
    ) -> Self {
        SpaceTimeEvent {
            id: id.into(),
            object_id: object_id.into(),
            spatial,
            time,
            device_id: None,
            semantic: None,
            children: Vec::new(),
        }
    }

    pub fn with_device(mut self, device: impl Into<DeviceId>) -> Self {
        self.device_id = Some(device.into());
        self
    }

    pub fn with_semantic(mut self, tag: SemanticTag) -> Self {
        self.semantic = Some(tag);
        self
    }
}

fn parent_of<'a>(events: &'a BTreeMap<EventId, SpaceTimeEvent>, child: &EventId) -> Option<&'a EventId> {
    events.values().find(|e| e.children.contains(child)).map(|e| &e.id)
}

/// Appends `child` under `parent`, keeping the event forest acyclic,
/// single-parented and time-nested. On error nothing is modified.
pub fn add_child_event(
    parent: &EventId,
    child: &EventId,
    events: &mut BTreeMap<EventId, SpaceTimeEvent>,
) -> Result<()> {
    let parent_ev = events
        .get(parent)
        .ok_or_else(|| Error::not_found("event", parent.as_str()))?;
    let child_ev = events
        .get(child)
        .ok_or_else(|| Error::not_found("event", child.as_str()))?;

    if parent == child {
        return Err(Error::Cycle(vec![parent.to_string(), child.to_string()]));
    }
    // A cycle appears iff `child` is already an ancestor of `parent`.
    let mut chain = vec![parent.to_string()];
    let mut cursor = parent;
    while let Some(up) = parent_of(events, cursor) {
        chain.push(up.to_string());
        if up == child {
            chain.reverse();
            chain.push(child.to_string());
            return Err(Error::Cycle(chain));
        }
        cursor = up;
    }
    if let Some(existing) = parent_of(events, child) {
        return Err(Error::AlreadyParented {
            child: child.to_string(),
            parent: existing.to_string(),
        });
    }
    if !parent_ev.time.contains(&child_ev.time) {
        return Err(Error::NotContained {
            parent: parent.to_string(),
            child: child.to_string(),
        });
    }
    events
        .get_mut(parent)
        .expect("checked above")
        .children
        .push(child.clone());
    Ok(())
}

/// Checks every tree invariant over a whole event collection.
pub fn validate_event_forest(events: &BTreeMap<EventId, SpaceTimeEvent>) -> Result<()> {
    let mut parent: BTreeMap<&EventId, &EventId> = BTreeMap::new();
    for ev in events.values() {
        let mut seen = BTreeSet::new();
        for c in &ev.children {
            if !seen.insert(c) {
                return Err(Error::validation(format!("event `{}` lists child `{c}` twice", ev.id)));
            }
            let child = events.get(c).ok_or_else(|| Error::not_found("event", c.as_str()))?;
            if let Some(p) = parent.insert(c, &ev.id) {
                return Err(Error::AlreadyParented {
                    child: c.to_string(),
                    parent: p.to_string(),
                });
            }
            if !ev.time.contains(&child.time) {
                return Err(Error::NotContained {
                    parent: ev.id.to_string(),
                    child: c.to_string(),
                });
            }
        }
    }
    // With single parents, a cycle shows up as an ancestor walk that revisits a node.
    for start in events.keys() {
        let mut visited = vec![start];
        let mut cursor = start;
        while let Some(&up) = parent.get(cursor) {
            if let Some(pos) = visited.iter().position(|v| *v == up) {
                let mut ids: Vec<String> = visited[pos..].iter().map(|v| v.to_string()).collect();
                ids.push(up.to_string());
                return Err(Error::Cycle(ids));
            }
            visited.push(up);
            cursor = up;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeoPoint;

    fn ev(id: &str, b: i64, e: i64) -> SpaceTimeEvent {
        SpaceTimeEvent::new(
            id,
            "MO",
            SpatialObject::point(GeoPoint::new(0.0, 0.0).unwrap()),
            TimeInterval::from_secs(b, e).unwrap(),
        )
    }

    fn store(evs: Vec<SpaceTimeEvent>) -> BTreeMap<EventId, SpaceTimeEvent> {
        evs.into_iter().map(|e| (e.id.clone(), e)).collect()
    }

    #[test]
    fn workshop_with_coffee_break() {
        // 09:00-17:00 and 10:30-11:00 as seconds of the day
        let mut events = store(vec![ev("workshop", 32_400, 61_200), ev("coffee", 37_800, 39_600)]);
        add_child_event(&"workshop".into(), &"coffee".into(), &mut events).unwrap();
        assert_eq!(
            events[&EventId::from("workshop")].children,
            vec![EventId::from("coffee")]
        );
        validate_event_forest(&events).unwrap();
    }

    #[test]
    fn containment_violation() {
        let mut events = store(vec![ev("p", 0, 10), ev("c", 5, 20)]);
        let err = add_child_event(&"p".into(), &"c".into(), &mut events).unwrap_err();
        assert!(matches!(err, Error::NotContained { .. }));
        assert!(events[&EventId::from("p")].children.is_empty());
    }

    #[test]
    fn two_cycle_rejected() {
        let mut events = store(vec![ev("A", 0, 10), ev("B", 0, 10)]);
        add_child_event(&"B".into(), &"A".into(), &mut events).unwrap();
        let err = add_child_event(&"A".into(), &"B".into(), &mut events).unwrap_err();
        assert!(matches!(err, Error::Cycle(_)), "{err:?}");
        assert!(matches!(
            add_child_event(&"A".into(), &"A".into(), &mut events),
            Err(Error::Cycle(_))
        ));
    }

    #[test]
    fn second_parent_rejected() {
        let mut events = store(vec![ev("p1", 0, 10), ev("p2", 0, 10), ev("c", 1, 2)]);
        add_child_event(&"p1".into(), &"c".into(), &mut events).unwrap();
        assert!(matches!(
            add_child_event(&"p2".into(), &"c".into(), &mut events),
            Err(Error::AlreadyParented { .. })
        ));
    }

    #[test]
    fn unknown_ids() {
        let mut events = store(vec![ev("p", 0, 10)]);
        assert!(matches!(
            add_child_event(&"p".into(), &"ghost".into(), &mut events),
            Err(Error::NotFound { .. })
        ));
    }

    #[test]
    fn tag_requires_place_for_stop() {
        assert!(SemanticTag::new("", "x", Role::Stop).is_err());
        assert!(SemanticTag::new("", "", Role::Move).is_ok());
    }
}
