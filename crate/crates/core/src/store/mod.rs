//! The in-memory trajectory store.
//!
//! One [`TrajectoryStore`] owns every entity collection. Mutations take
//! `&mut self`, so the borrow checker serializes writers; readers share
//! `&TrajectoryStore`. The grid index is published as an `Arc` and swapped
//! whole, so a reader holding an index never observes a partial rebuild.

mod export;
mod index;
mod snapshot;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use export::canonical_export;
pub use index::{build_index, window_query, GridIndex, IndexConfig, STWindow};
pub use snapshot::{load_snapshot, read_snapshot, save_snapshot, write_snapshot, SNAPSHOT_VERSION};

use crate::activity::{Activity, Association, Process};
use crate::error::{Error, Result};
use crate::ids::{ActivityId, DeviceId, EventId, ObjectId, ObservationId, ProcessId, RegionId};
use crate::model::{validate_event_forest, RawTrajectory, SemanticTrajectory, SpaceTimeEvent, StructuredTrajectory};
use crate::observation::{DeviceProxy, Observation};
use crate::regions::{build_forest, RegionDef, RegionForest};

/// Anything that can be upserted into the store.
#[derive(Debug, Clone)]
pub enum Entity {
    Event(SpaceTimeEvent),
    Raw(RawTrajectory),
    Structured(StructuredTrajectory),
    Semantic(SemanticTrajectory),
    Region(RegionDef),
    Activity(Activity),
    Process(Process),
    Device(DeviceProxy),
    Observation(Observation),
}

/// The persisted state. Kept separate from the derived forest and index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub(crate) struct Collections {
    pub events: BTreeMap<EventId, SpaceTimeEvent>,
    pub raw: BTreeMap<ObjectId, RawTrajectory>,
    pub structured: BTreeMap<ObjectId, StructuredTrajectory>,
    pub semantic: BTreeMap<ObjectId, SemanticTrajectory>,
    pub regions: BTreeMap<RegionId, RegionDef>,
    pub activities: BTreeMap<ActivityId, Activity>,
    pub processes: BTreeMap<ProcessId, Process>,
    pub associations: BTreeSet<Association>,
    pub devices: BTreeMap<DeviceId, DeviceProxy>,
    pub observations: BTreeMap<ObservationId, Observation>,
}

#[derive(Debug, Clone, Default)]
pub struct TrajectoryStore {
    pub(crate) data: Collections,
    forest: RegionForest,
    revision: u64,
    index_config: Option<IndexConfig>,
    index: Option<Arc<GridIndex>>,
}

impl TrajectoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Monotone mutation counter.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub(crate) fn bump(&mut self) -> u64 {
        self.revision += 1;
        self.revision
    }

    pub fn upsert(&mut self, entity: Entity) -> Result<u64> {
        match entity {
            Entity::Event(ev) => self.upsert_event(ev)?,
            Entity::Raw(raw) => {
                let object = raw.object_id().clone();
                if object.as_str().is_empty() {
                    return Err(Error::validation("object id is empty"));
                }
                // Presentations derived from the old fixes no longer apply.
                self.data.structured.remove(&object);
                self.data.semantic.remove(&object);
                self.data.raw.insert(object, raw);
            }
            Entity::Structured(st) => {
                st.check_invariants()?;
                self.data.semantic.remove(&st.object_id);
                self.data.structured.insert(st.object_id.clone(), st);
            }
            Entity::Semantic(sem) => {
                sem.base.check_invariants()?;
                if sem.annotations.len() != sem.base.episodes.len() {
                    return Err(Error::validation(format!(
                        "semantic trajectory of `{}` has {} annotations for {} episodes",
                        sem.object_id(),
                        sem.annotations.len(),
                        sem.base.episodes.len()
                    )));
                }
                self.data.semantic.insert(sem.object_id().clone(), sem);
            }
            Entity::Region(def) => {
                let mut defs = self.data.regions.clone();
                defs.insert(def.id.clone(), def);
                self.forest = build_forest(&defs.values().cloned().collect::<Vec<_>>())?;
                self.data.regions = defs;
            }
            Entity::Activity(a) => {
                a.validate()?;
                self.data.activities.insert(a.id.clone(), a);
            }
            Entity::Process(p) => {
                p.validate(&self.data.activities)?;
                self.data.processes.insert(p.id.clone(), p);
            }
            Entity::Device(d) => {
                d.validate()?;
                self.data.devices.insert(d.device_id.clone(), d);
            }
            Entity::Observation(o) => {
                o.validate()?;
                if !self.data.events.contains_key(&o.event_id) {
                    return Err(Error::not_found("event", o.event_id.as_str()));
                }
                self.data.observations.insert(o.id.clone(), o);
            }
        }
        Ok(self.bump())
    }

    /// Replaces the whole region set in one step.
    pub fn replace_regions(&mut self, defs: Vec<RegionDef>) -> Result<u64> {
        self.forest = build_forest(&defs)?;
        self.data.regions = defs.into_iter().map(|d| (d.id.clone(), d)).collect();
        Ok(self.bump())
    }

    fn upsert_event(&mut self, ev: SpaceTimeEvent) -> Result<()> {
        if ev.id.as_str().is_empty() || ev.object_id.as_str().is_empty() {
            return Err(Error::validation("event and object ids must be non-empty"));
        }
        if let Some(dev) = &ev.device_id {
            if !self.data.devices.is_empty() && !self.data.devices.contains_key(dev) {
                return Err(Error::DanglingDevice {
                    event: ev.id.to_string(),
                    device: dev.to_string(),
                });
            }
        }
        let simple = ev.children.is_empty()
            && self
                .data
                .events
                .get(&ev.id)
                .is_none_or(|old| old.children.is_empty() && old.time == ev.time);
        if simple {
            // Childless, and if it already existed its interval is unchanged:
            // no tree invariant can be affected.
            self.data.events.insert(ev.id.clone(), ev);
            return Ok(());
        }
        let previous = self.data.events.insert(ev.id.clone(), ev.clone());
        if let Err(e) = validate_event_forest(&self.data.events) {
            match previous {
                Some(old) => self.data.events.insert(ev.id.clone(), old),
                None => self.data.events.remove(&ev.id),
            };
            return Err(e);
        }
        Ok(())
    }

    pub fn add_child_event(&mut self, parent: &EventId, child: &EventId) -> Result<u64> {
        crate::model::add_child_event(parent, child, &mut self.data.events)?;
        Ok(self.bump())
    }

    pub fn event(&self, id: &EventId) -> Option<&SpaceTimeEvent> {
        self.data.events.get(id)
    }

    pub fn events(&self) -> impl Iterator<Item = &SpaceTimeEvent> {
        self.data.events.values()
    }

    pub fn events_of<'a>(&'a self, object: &'a ObjectId) -> impl Iterator<Item = &'a SpaceTimeEvent> + 'a {
        self.data.events.values().filter(move |e| &e.object_id == object)
    }

    pub fn raw(&self, object: &ObjectId) -> Option<&RawTrajectory> {
        self.data.raw.get(object)
    }

    pub fn raw_trajectories(&self) -> impl Iterator<Item = &RawTrajectory> {
        self.data.raw.values()
    }

    pub fn structured(&self, object: &ObjectId) -> Option<&StructuredTrajectory> {
        self.data.structured.get(object)
    }

    pub fn structured_trajectories(&self) -> impl Iterator<Item = &StructuredTrajectory> {
        self.data.structured.values()
    }

    pub fn semantic(&self, object: &ObjectId) -> Option<&SemanticTrajectory> {
        self.data.semantic.get(object)
    }

    pub fn semantic_trajectories(&self) -> impl Iterator<Item = &SemanticTrajectory> {
        self.data.semantic.values()
    }

    pub fn forest(&self) -> &RegionForest {
        &self.forest
    }

    pub fn region_defs(&self) -> impl Iterator<Item = &RegionDef> {
        self.data.regions.values()
    }

    pub fn activity(&self, id: &ActivityId) -> Option<&Activity> {
        self.data.activities.get(id)
    }

    pub fn activities(&self) -> impl Iterator<Item = &Activity> {
        self.data.activities.values()
    }

    pub fn process(&self, id: &ProcessId) -> Option<&Process> {
        self.data.processes.get(id)
    }

    pub fn associations(&self) -> impl Iterator<Item = &Association> {
        self.data.associations.iter()
    }

    pub fn device(&self, id: &DeviceId) -> Option<&DeviceProxy> {
        self.data.devices.get(id)
    }

    pub fn devices(&self) -> impl Iterator<Item = &DeviceProxy> {
        self.data.devices.values()
    }

    pub fn observation(&self, id: &ObservationId) -> Option<&Observation> {
        self.data.observations.get(id)
    }

    /// Object ids that have anything recorded: fixes, events or activities.
    pub fn object_ids(&self) -> BTreeSet<ObjectId> {
        self.data
            .raw
            .keys()
            .cloned()
            .chain(self.data.events.values().map(|e| e.object_id.clone()))
            .chain(self.data.activities.values().map(|a| a.object_id.clone()))
            .collect()
    }

    /// Builds a grid index over the current events and publishes it.
    pub fn rebuild_index(&mut self, config: IndexConfig) -> Result<Arc<GridIndex>> {
        let idx = Arc::new(build_index(config.cell_size, config.time_bucket, self)?);
        self.index_config = Some(config);
        self.index = Some(Arc::clone(&idx));
        Ok(idx)
    }

    pub fn index_config(&self) -> Option<IndexConfig> {
        self.index_config
    }

    /// The published index if it reflects the current revision.
    pub fn fresh_index(&self) -> Option<Arc<GridIndex>> {
        self.index
            .as_ref()
            .filter(|i| i.built_at_revision() == self.revision)
            .cloned()
    }

    pub(crate) fn from_parts(data: Collections, revision: u64, index_config: Option<IndexConfig>) -> Result<Self> {
        let defs: Vec<RegionDef> = data.regions.values().cloned().collect();
        let forest = build_forest(&defs)?;
        validate_event_forest(&data.events)?;
        let mut store = TrajectoryStore {
            data,
            forest,
            revision,
            index_config: None,
            index: None,
        };
        if let Some(cfg) = index_config {
            store.rebuild_index(cfg)?;
        }
        Ok(store)
    }
}
