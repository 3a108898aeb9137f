//! Row producers for each query source.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{GeoPoint, SpatialObject};
use crate::model::{Episode, EpisodeKind};
use crate::query::ast::Source;
use crate::query::fields::{field_table, FieldDef};
use crate::query::value::Value;
use crate::regions::visits;
use crate::store::{window_query, STWindow, TrajectoryStore};
use crate::time::{TimeInstant, TimeInterval};

/// One candidate result row. `values` line up with the source's fields.
#[derive(Debug, Clone)]
pub struct Row {
    pub values: Vec<Value>,
    /// Geometry tested by spatial predicates.
    pub geometry: SpatialObject,
    /// Interval tested by `window(...)`.
    pub time: TimeInterval,
}

/// Produces the rows of one named source.
pub trait QuerySource: Send + Sync {
    fn name(&self) -> &str;
    fn fields(&self) -> &'static [FieldDef];
    /// All rows, or a superset of those meeting `windows`. Sources may use
    /// the windows to prune; the evaluator applies them again exactly.
    fn rows(&self, store: &TrajectoryStore, windows: &[&STWindow]) -> Result<Vec<Row>>;
}

pub struct SourceRegistry {
    sources: BTreeMap<String, Box<dyn QuerySource>>,
}

impl Default for SourceRegistry {
    fn default() -> Self {
        let mut r = SourceRegistry::empty();
        r.register(Box::new(RawSource));
        r.register(Box::new(EpisodeSource(EpisodeKind::Stop)));
        r.register(Box::new(EpisodeSource(EpisodeKind::Move)));
        r.register(Box::new(SemanticSource));
        r.register(Box::new(RoiVisitSource));
        r.register(Box::new(PathSource));
        r.register(Box::new(DeviceSource));
        r
    }
}

impl SourceRegistry {
    pub fn empty() -> Self {
        SourceRegistry {
            sources: BTreeMap::new(),
        }
    }

    /// Adds a source, replacing any with the same name.
    pub fn register(&mut self, source: Box<dyn QuerySource>) {
        self.sources.insert(source.name().to_string(), source);
    }

    pub fn get(&self, name: &str) -> Option<&dyn QuerySource> {
        self.sources.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.sources.keys().map(String::as_str)
    }
}

fn instant(t: TimeInstant) -> Value {
    Value::Int(t.seconds())
}

fn s(v: impl Into<String>) -> Value {
    Value::Str(v.into())
}

fn region_name(store: &TrajectoryStore, p: &GeoPoint) -> String {
    store
        .forest()
        .deepest_region(p)
        .and_then(|id| store.forest().get(&id).map(|r| r.name.clone()))
        .unwrap_or_default()
}

fn window_span(windows: &[&STWindow]) -> Option<(i64, i64)> {
    windows.iter().fold(None, |acc, w| {
        let (b, e) = (w.time.begin().seconds(), w.time.end().seconds());
        Some(match acc {
            None => (b, e),
            Some((lo, hi)) => (lo.max(b), hi.min(e)),
        })
    })
}

struct RawSource;

impl QuerySource for RawSource {
    fn name(&self) -> &str {
        Source::Raw.as_str()
    }

    fn fields(&self) -> &'static [FieldDef] {
        field_table(Source::Raw)
    }

    fn rows(&self, store: &TrajectoryStore, windows: &[&STWindow]) -> Result<Vec<Row>> {
        let span = window_span(windows);
        let mut out = Vec::new();
        for raw in store.raw_trajectories() {
            let pts = raw.points();
            // points are time-ordered, so a window narrows to a slice
            let slice = match span {
                Some((lo, hi)) => {
                    let a = pts.partition_point(|p| p.t.seconds() < lo);
                    let b = pts.partition_point(|p| p.t.seconds() <= hi);
                    &pts[a..b.max(a)]
                }
                None => pts,
            };
            for p in slice {
                out.push(Row {
                    values: vec![
                        s(raw.object_id().as_str()),
                        instant(p.t),
                        Value::Num(p.position.x()),
                        Value::Num(p.position.y()),
                        s(""),
                    ],
                    geometry: SpatialObject::point(p.position),
                    time: TimeInterval::instant(p.t),
                });
            }
        }
        Ok(out)
    }
}

fn episode_values(object: &str, ep: &Episode) -> Vec<Value> {
    let c = ep.representative_point();
    vec![
        s(object),
        instant(ep.time.begin()),
        instant(ep.time.end()),
        Value::Int(ep.duration_secs()),
        Value::Num(c.x()),
        Value::Num(c.y()),
    ]
}

struct EpisodeSource(EpisodeKind);

impl QuerySource for EpisodeSource {
    fn name(&self) -> &str {
        match self.0 {
            EpisodeKind::Stop => Source::Stops.as_str(),
            EpisodeKind::Move => Source::Moves.as_str(),
        }
    }

    fn fields(&self) -> &'static [FieldDef] {
        field_table(Source::Stops)
    }

    fn rows(&self, store: &TrajectoryStore, _: &[&STWindow]) -> Result<Vec<Row>> {
        if store.structured_trajectories().next().is_none() && store.raw_trajectories().next().is_some() {
            return Err(Error::MissingPrerequisite(
                "trajectories have not been segmented; run `segment --eps <m> --tau <s>` first".into(),
            ));
        }
        let mut out = Vec::new();
        for st in store.structured_trajectories() {
            for ep in st.episodes.iter().filter(|e| e.kind == self.0) {
                let mut values = episode_values(st.object_id.as_str(), ep);
                values.push(s(""));
                out.push(Row {
                    values,
                    geometry: ep.geometry.clone(),
                    time: ep.time.clone(),
                });
            }
        }
        Ok(out)
    }
}

fn require_semantic(store: &TrajectoryStore) -> Result<()> {
    if store.semantic_trajectories().next().is_some() {
        return Ok(());
    }
    if store.structured_trajectories().next().is_some() {
        return Err(Error::MissingPrerequisite(
            "trajectories have not been annotated; run `annotate` first".into(),
        ));
    }
    if store.raw_trajectories().next().is_some() {
        return Err(Error::MissingPrerequisite(
            "trajectories have not been annotated; run `segment --eps <m> --tau <s>` and then `annotate`".into(),
        ));
    }
    Ok(())
}

struct SemanticSource;

impl QuerySource for SemanticSource {
    fn name(&self) -> &str {
        Source::Semantic.as_str()
    }

    fn fields(&self) -> &'static [FieldDef] {
        field_table(Source::Semantic)
    }

    fn rows(&self, store: &TrajectoryStore, _: &[&STWindow]) -> Result<Vec<Row>> {
        require_semantic(store)?;
        let mut out = Vec::new();
        for sem in store.semantic_trajectories() {
            for (ep, ann) in sem.annotated() {
                let mut values = episode_values(sem.object_id().as_str(), ep);
                values.push(s(ann.tag.place_name.clone()));
                values.push(s(ann.tag.category.clone()));
                values.push(s(ann.tag.role.as_str()));
                out.push(Row {
                    values,
                    geometry: ep.geometry.clone(),
                    time: ep.time.clone(),
                });
            }
        }
        Ok(out)
    }
}

struct RoiVisitSource;

impl QuerySource for RoiVisitSource {
    fn name(&self) -> &str {
        Source::RoiVisits.as_str()
    }

    fn fields(&self) -> &'static [FieldDef] {
        field_table(Source::RoiVisits)
    }

    fn rows(&self, store: &TrajectoryStore, _: &[&STWindow]) -> Result<Vec<Row>> {
        require_semantic(store)?;
        let forest = store.forest();
        let mut out = Vec::new();
        for sem in store.semantic_trajectories() {
            for v in visits(sem, forest) {
                let Some(region) = forest.get(&v.region_id) else {
                    continue;
                };
                out.push(Row {
                    values: vec![
                        s(v.object_id.as_str()),
                        s(region.name.clone()),
                        s(region.category.clone()),
                        instant(v.time.begin()),
                        instant(v.time.end()),
                        s(if v.via_descendant { "true" } else { "false" }),
                    ],
                    geometry: SpatialObject::point(v.location),
                    time: v.time,
                });
            }
        }
        Ok(out)
    }
}

struct PathSource;

impl QuerySource for PathSource {
    fn name(&self) -> &str {
        Source::StPath.as_str()
    }

    fn fields(&self) -> &'static [FieldDef] {
        field_table(Source::StPath)
    }

    fn rows(&self, store: &TrajectoryStore, _: &[&STWindow]) -> Result<Vec<Row>> {
        let mut out = Vec::new();
        for object in store.object_ids() {
            if store.events_of(&object).next().is_none() {
                continue;
            }
            let path = store.build_path(&object)?;
            for entry in &path.entries {
                let ev = &entry.event;
                for act in entry.begin_activities.iter().chain(&entry.end_activities) {
                    let at = act.location.unwrap_or_else(|| ev.spatial.representative_point());
                    out.push(Row {
                        values: vec![
                            s(object.as_str()),
                            instant(ev.time.begin()),
                            instant(ev.time.end()),
                            s(act.kind.as_str()),
                            s(act.label.clone()),
                            Value::Num(at.x()),
                            Value::Num(at.y()),
                        ],
                        geometry: SpatialObject::point(at),
                        time: ev.time.clone(),
                    });
                }
            }
        }
        Ok(out)
    }
}

struct DeviceSource;

impl QuerySource for DeviceSource {
    fn name(&self) -> &str {
        Source::Devices.as_str()
    }

    fn fields(&self) -> &'static [FieldDef] {
        field_table(Source::Devices)
    }

    fn rows(&self, store: &TrajectoryStore, windows: &[&STWindow]) -> Result<Vec<Row>> {
        let events: Vec<_> = match windows.first() {
            Some(w) => window_query(w, store)
                .into_iter()
                .filter_map(|id| store.event(&id))
                .collect(),
            None => store.events().collect(),
        };
        let mut out = Vec::new();
        for ev in events {
            // events naming an unregistered device have nothing to report
            let Some(dev) = ev.device_id.as_ref().and_then(|d| store.device(d)) else {
                continue;
            };
            let p = ev.spatial.representative_point();
            out.push(Row {
                values: vec![
                    s(dev.device_id.as_str()),
                    s(dev.kind.as_str()),
                    Value::Num(dev.reliability),
                    instant(ev.time.begin()),
                    s(region_name(store, &p)),
                    s(ev.object_id.as_str()),
                ],
                geometry: ev.spatial.clone(),
                time: ev.time.clone(),
            });
        }
        Ok(out)
    }
}
