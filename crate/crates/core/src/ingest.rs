//! File ingestion.
//!
//! | kind         | format                                               |
//! |--------------|------------------------------------------------------|
//! | points       | CSV `object_id,t,x,y,device_id`                      |
//! | regions      | one JSON region definition per line                  |
//! | devices      | CSV `device_id,kind,reliability,description`         |
//! | activities   | CSV `id,object_id,kind,label,t_begin,t_end,x,y`      |
//! | observations | CSV `id,event_id,feature,value,unit,t`               |
//!
//! A bad header fails the whole load. A bad row is counted and reported
//! with its line number (the header is line 1) and the rest of the file
//! still loads. Loading the same file twice leaves the store as it was
//! after the first load.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use crate::activity::{Activity, ActivityKind, AttachRole};
use crate::error::{Error, Result};
use crate::geometry::{GeoPoint, SpatialObject};
use crate::ids::{DeviceId, EventId, ObjectId};
use crate::model::{validate_raw, RawPoint, SpaceTimeEvent};
use crate::observation::{DeviceKind, DeviceProxy, Observation};
use crate::regions::{build_forest, RegionDef};
use crate::store::{Entity, TrajectoryStore};
use crate::time::{TimeInstant, TimeInterval};

const MAX_REPORTED: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IngestKind {
    Points,
    Regions,
    Devices,
    Activities,
    Observations,
}

impl IngestKind {
    fn header(self) -> Option<&'static [&'static str]> {
        match self {
            IngestKind::Points => Some(&["object_id", "t", "x", "y", "device_id"]),
            IngestKind::Regions => None,
            IngestKind::Devices => Some(&["device_id", "kind", "reliability", "description"]),
            IngestKind::Activities => Some(&["id", "object_id", "kind", "label", "t_begin", "t_end", "x", "y"]),
            IngestKind::Observations => Some(&["id", "event_id", "feature", "value", "unit", "t"]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestReport {
    pub file: PathBuf,
    pub accepted: usize,
    pub rejected: usize,
    /// The first few rejections as `(line, message)`.
    pub first_errors: Vec<(usize, String)>,
}

impl IngestReport {
    fn new(file: &Path) -> Self {
        IngestReport {
            file: file.to_path_buf(),
            accepted: 0,
            rejected: 0,
            first_errors: Vec::new(),
        }
    }

    fn reject(&mut self, line: usize, message: impl fmt::Display) {
        self.rejected += 1;
        if self.first_errors.len() < MAX_REPORTED {
            self.first_errors.push((line, message.to_string()));
        }
    }

    /// Rejections arrive out of order when a later step undoes an earlier
    /// acceptance, so the kept sample is re-sorted by line.
    fn finish(mut self) -> Self {
        self.first_errors.sort();
        self
    }
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} accepted, {} rejected",
            self.file.display(),
            self.accepted,
            self.rejected
        )?;
        for (line, msg) in &self.first_errors {
            write!(f, "\n  line {line}: {msg}")?;
        }
        Ok(())
    }
}

/// Reads `path` and loads it into the store.
pub fn load_file(kind: IngestKind, path: &Path, store: &mut TrajectoryStore) -> Result<IngestReport> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_str(kind, path, &text, store)
}

/// Loads already-read file content; `path` is only used in messages.
pub fn load_str(kind: IngestKind, path: &Path, text: &str, store: &mut TrajectoryStore) -> Result<IngestReport> {
    let report = IngestReport::new(path);
    let report = match kind {
        IngestKind::Regions => load_regions(text, store, report)?,
        _ => {
            let rows = csv_rows(kind, path, text)?;
            match kind {
                IngestKind::Points => load_points(rows, store, report)?,
                IngestKind::Devices => load_devices(rows, store, report),
                IngestKind::Activities => load_activities(rows, store, report),
                IngestKind::Observations => load_observations(rows, store, report),
                IngestKind::Regions => unreachable!(),
            }
        }
    };
    Ok(report.finish())
}

/// A data row: its line number, and its fields or the reason it could not be read.
type CsvRow = (usize, std::result::Result<Vec<String>, String>);

fn csv_rows(kind: IngestKind, path: &Path, text: &str) -> Result<Vec<CsvRow>> {
    let expected = kind.header().expect("csv kind");
    let header_error = |found: String| Error::Header {
        path: path.to_path_buf(),
        expected: expected.join(","),
        found,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(header_error("empty file".into())),
        Some(Err(e)) => return Err(header_error(e.to_string())),
        Some(Ok(h)) => h,
    };
    if header.iter().ne(expected.iter().copied()) {
        return Err(header_error(header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut out = Vec::new();
    for rec in records {
        match rec {
            Ok(r) => {
                let line = r.position().map_or(0, |p| p.line() as usize);
                if r.len() == 1 && r[0].is_empty() {
                    continue;
                }
                if r.len() != expected.len() {
                    out.push((
                        line,
                        Err(format!("expected {} fields, found {}", expected.len(), r.len())),
                    ));
                } else {
                    out.push((line, Ok(r.iter().map(str::to_string).collect())));
                }
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                out.push((line, Err(e.to_string())));
            }
        }
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(field: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("`{field}` is not a valid number: `{value}`"))
}

fn parse_time(field: &str, value: &str) -> std::result::Result<TimeInstant, String> {
    let t: i64 = value
        .parse()
        .map_err(|_| format!("`{field}` is not an integer epoch second: `{value}`"))?;
    TimeInstant::new(t).map_err(|e| e.to_string())
}

fn parse_point(x: &str, y: &str) -> std::result::Result<GeoPoint, String> {
    GeoPoint::new(parse_num("x", x)?, parse_num("y", y)?).map_err(|e| e.to_string())
}

fn non_empty<'a>(field: &str, value: &'a str) -> std::result::Result<&'a str, String> {
    if value.is_empty() {
        Err(format!("`{field}` is empty"))
    } else {
        Ok(value)
    }
}

struct Fix {
    line: usize,
    point: RawPoint,
}

fn load_points(rows: Vec<CsvRow>, store: &mut TrajectoryStore, mut report: IngestReport) -> Result<IngestReport> {
    let known_devices = store.devices().next().is_some();
    let mut per_object: BTreeMap<ObjectId, Vec<Fix>> = BTreeMap::new();
    for (line, row) in rows {
        let parsed = row.and_then(|f| {
            let object = non_empty("object_id", &f[0])?;
            let t = parse_time("t", &f[1])?;
            let position = parse_point(&f[2], &f[3])?;
            let device = (!f[4].is_empty()).then(|| DeviceId::new(f[4].as_str()));
            if let Some(d) = &device {
                if known_devices && store.device(d).is_none() {
                    return Err(format!("unknown device `{d}`"));
                }
            }
            let fixes = per_object.get(object).map(Vec::as_slice).unwrap_or_default();
            if let Some(last) = fixes.last() {
                if t <= last.point.t {
                    return Err(format!(
                        "timestamp {} for `{object}` does not increase (previous {} at line {})",
                        t.seconds(),
                        last.point.t.seconds(),
                        last.line
                    ));
                }
            }
            let mut point = RawPoint::new(position, t);
            point.device_id = device;
            Ok((ObjectId::new(object), point))
        });
        match parsed {
            Ok((object, point)) => {
                per_object.entry(object).or_default().push(Fix { line, point });
                report.accepted += 1;
            }
            Err(msg) => report.reject(line, msg),
        }
    }

    for (object, fixes) in per_object {
        // New fixes replace stored ones at the same timestamp.
        let mut merged: BTreeMap<TimeInstant, RawPoint> = store
            .raw(&object)
            .map(|r| r.points().iter().map(|p| (p.t, p.clone())).collect())
            .unwrap_or_default();
        for fix in &fixes {
            let p = &fix.point;
            let mut ev = SpaceTimeEvent::new(
                EventId::for_fix(&object, p.t.seconds()),
                object.clone(),
                SpatialObject::point(p.position),
                TimeInterval::instant(p.t),
            );
            ev.device_id = p.device_id.clone();
            if store.event(&ev.id) != Some(&ev) {
                if let Err(e) = store.upsert(Entity::Event(ev)) {
                    report.accepted -= 1;
                    report.reject(fix.line, e);
                    continue;
                }
            }
            merged.insert(p.t, p.clone());
        }
        let raw = validate_raw(object.clone(), merged.into_values().collect())?;
        if store.raw(&object) != Some(&raw) {
            store.upsert(Entity::Raw(raw))?;
        }
    }
    Ok(report)
}

/// Region definitions that cannot join the forest are rejected one by one
/// until the rest builds.
fn load_regions(text: &str, store: &mut TrajectoryStore, mut report: IngestReport) -> Result<IngestReport> {
    let mut incoming: BTreeMap<String, (usize, RegionDef)> = BTreeMap::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let def: RegionDef = match serde_json::from_str(trimmed) {
            Ok(d) => d,
            Err(e) => {
                report.reject(line, format!("invalid region record: {e}"));
                continue;
            }
        };
        let mut alone = def.clone();
        alone.parent = None;
        if let Err(e) = build_forest(std::slice::from_ref(&alone)) {
            report.reject(line, e);
            continue;
        }
        if let Some((prev, _)) = incoming.get(def.id.as_str()) {
            report.reject(line, format!("region `{}` already defined at line {prev}", def.id));
            continue;
        }
        incoming.insert(def.id.to_string(), (line, def));
        report.accepted += 1;
    }

    let existing: BTreeMap<String, RegionDef> = store.region_defs().map(|d| (d.id.to_string(), d.clone())).collect();
    loop {
        let mut all = existing.clone();
        for (id, (_, def)) in &incoming {
            all.insert(id.clone(), def.clone());
        }
        let defs: Vec<RegionDef> = all.into_values().collect();
        let culprits: Vec<String> = match build_forest(&defs) {
            Ok(_) => {
                if defs.iter().ne(store.region_defs()) {
                    store.replace_regions(defs)?;
                }
                return Ok(report);
            }
            Err(Error::UnknownParent { id, .. }) => vec![id],
            Err(Error::Cycle(ids)) => ids,
            Err(e) => return Err(e),
        };
        let message = describe_structural(&defs, &culprits);
        let blamed: BTreeSet<String> = culprits.into_iter().filter(|c| incoming.contains_key(c)).collect();
        if blamed.is_empty() {
            // only stored regions are involved, which validated paths never allow
            return Err(Error::validation(message));
        }
        for id in blamed {
            if let Some((line, _)) = incoming.remove(&id) {
                report.accepted -= 1;
                report.reject(line, &message);
            }
        }
    }
}

fn describe_structural(defs: &[RegionDef], culprits: &[String]) -> String {
    match culprits {
        [id] => {
            let parent = defs
                .iter()
                .find(|d| d.id.as_str() == id)
                .and_then(|d| d.parent.as_ref())
                .map_or_else(String::new, |p| p.to_string());
            format!("region `{id}` names unknown parent `{parent}`")
        }
        ids => format!("region parent links form a cycle: {}", ids.join(" -> ")),
    }
}

fn load_devices(rows: Vec<CsvRow>, store: &mut TrajectoryStore, mut report: IngestReport) -> IngestReport {
    for (line, row) in rows {
        let result = row.and_then(|f| {
            let device = DeviceProxy {
                device_id: non_empty("device_id", &f[0])?.into(),
                kind: f[1].parse::<DeviceKind>().map_err(|e| e.to_string())?,
                reliability: parse_num("reliability", &f[2])?,
                description: f[3].clone(),
            };
            if store.device(&device.device_id) == Some(&device) {
                return Ok(());
            }
            store
                .upsert(Entity::Device(device))
                .map(drop)
                .map_err(|e| e.to_string())
        });
        match result {
            Ok(()) => report.accepted += 1,
            Err(msg) => report.reject(line, msg),
        }
    }
    report
}

/// The object's latest event that begins at or before `t`, or its first
/// event when all begin later.
fn anchor_event(store: &TrajectoryStore, object: &ObjectId, t: TimeInstant) -> Option<EventId> {
    let mut events: Vec<&SpaceTimeEvent> = store.events_of(object).collect();
    events.sort_by(|a, b| crate::model::compare_events(a, b));
    events
        .iter()
        .rev()
        .find(|e| e.time.begin() <= t)
        .or_else(|| events.first())
        .map(|e| e.id.clone())
}

fn load_activities(rows: Vec<CsvRow>, store: &mut TrajectoryStore, mut report: IngestReport) -> IngestReport {
    for (line, row) in rows {
        let result = row.and_then(|f| {
            let kind: ActivityKind = f[2].parse().map_err(|e: Error| e.to_string())?;
            let location = match (f[6].is_empty(), f[7].is_empty()) {
                (true, true) => None,
                (false, false) => Some(parse_point(&f[6], &f[7])?),
                _ => return Err("`x` and `y` must both be given or both be empty".to_string()),
            };
            let time = TimeInterval::new(parse_time("t_begin", &f[4])?, parse_time("t_end", &f[5])?)
                .map_err(|e| e.to_string())?;
            let activity = Activity {
                id: non_empty("id", &f[0])?.into(),
                object_id: non_empty("object_id", &f[1])?.into(),
                kind,
                label: f[3].clone(),
                time,
                location,
            };
            activity.validate().map_err(|e| e.to_string())?;
            if store.activity(&activity.id) == Some(&activity) {
                return Ok(());
            }
            let id = activity.id.clone();
            let object = activity.object_id.clone();
            let (b, e) = (activity.time.begin(), activity.time.end());
            store.upsert(Entity::Activity(activity)).map_err(|e| e.to_string())?;
            store.data.associations.retain(|a| a.activity_id != id);
            for (t, role) in [(b, AttachRole::BeginsAt), (e, AttachRole::EndsAt)] {
                if let Some(ev) = anchor_event(store, &object, t) {
                    store.attach_activity(&ev, &id, role).map_err(|e| e.to_string())?;
                }
            }
            Ok(())
        });
        match result {
            Ok(()) => report.accepted += 1,
            Err(msg) => report.reject(line, msg),
        }
    }
    report
}

fn load_observations(rows: Vec<CsvRow>, store: &mut TrajectoryStore, mut report: IngestReport) -> IngestReport {
    for (line, row) in rows {
        let result = row.and_then(|f| {
            let obs = Observation {
                id: non_empty("id", &f[0])?.into(),
                event_id: non_empty("event_id", &f[1])?.into(),
                feature: non_empty("feature", &f[2])?.to_string(),
                value: parse_num("value", &f[3])?,
                unit: f[4].clone(),
                time: parse_time("t", &f[5])?,
            };
            if store.observation(&obs.id) == Some(&obs) {
                return Ok(());
            }
            store.record_observation(obs).map(drop).map_err(|e| e.to_string())
        });
        match result {
            Ok(()) => report.accepted += 1,
            Err(msg) => report.reject(line, msg),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(kind: IngestKind, text: &str, store: &mut TrajectoryStore) -> IngestReport {
        load_str(kind, Path::new("test.csv"), text, store).unwrap()
    }

    #[test]
    fn points_accept_and_synthesize_events() {
        let mut s = TrajectoryStore::new();
        let r = load(
            IngestKind::Points,
            "object_id,t,x,y,device_id\nMO,0,0,0,\nMO,60,1.5,0,gps-1\nMO2,0,5,5,\n",
            &mut s,
        );
        assert_eq!((r.accepted, r.rejected), (3, 0));
        assert_eq!(s.raw(&"MO".into()).unwrap().len(), 2);
        let ev = s.event(&"MO#60".into()).unwrap();
        assert_eq!(ev.device_id.as_ref().map(|d| d.as_str()), Some("gps-1"));
    }

    #[test]
    fn regression_rejected_with_line() {
        let mut s = TrajectoryStore::new();
        let text =
            "object_id,t,x,y,device_id\nA,0,0,0,\nA,10,0,0,\nB,0,0,0,\nA,20,0,0,\nB,5,0,0,\nA,15,0,0,\nA,30,0,0,\n";
        let r = load(IngestKind::Points, text, &mut s);
        assert_eq!((r.accepted, r.rejected), (6, 1));
        assert_eq!(r.first_errors[0].0, 7);
        assert!(
            r.first_errors[0].1.contains("does not increase"),
            "{:?}",
            r.first_errors
        );
    }

    #[test]
    fn bad_header_fails_load() {
        let mut s = TrajectoryStore::new();
        let e = load_str(IngestKind::Points, Path::new("p.csv"), "obj,t,x,y\nA,0,0,0\n", &mut s).unwrap_err();
        assert!(matches!(e, Error::Header { .. }), "{e:?}");
        assert!(load_str(IngestKind::Devices, Path::new("d.csv"), "", &mut s).is_err());
    }

    #[test]
    fn bad_rows_counted() {
        let mut s = TrajectoryStore::new();
        let r = load(
            IngestKind::Points,
            "object_id,t,x,y,device_id\nA,zero,0,0,\nA,0,0\n,5,0,0,\nA,-1,0,0,\nA,0,nan,0,\nA,1,0,0,\n",
            &mut s,
        );
        assert_eq!((r.accepted, r.rejected), (1, 5));
        let lines: Vec<usize> = r.first_errors.iter().map(|e| e.0).collect();
        assert_eq!(lines, [2, 3, 4, 5, 6]);
    }

    #[test]
    fn reload_is_noop() {
        let text = "object_id,t,x,y,device_id\nA,0,0,0,\nA,10,3,0,\n";
        let mut s = TrajectoryStore::new();
        load(IngestKind::Points, text, &mut s);
        let rev = s.revision();
        let r = load(IngestKind::Points, text, &mut s);
        assert_eq!((r.accepted, r.rejected), (2, 0));
        assert_eq!(s.revision(), rev);
    }

    #[test]
    fn regions_structural_rejections() {
        let mut s = TrajectoryStore::new();
        let text = [
            r#"{"id":"mall","name":"Mall","category":"commercial","parent":null,"geometry":{"type":"polygon","ring":[[0,0],[10,0],[10,10],[0,10]]}}"#,
            r#"{"id":"shop","name":"Shop","category":"commercial","parent":"mall","geometry":{"type":"polygon","ring":[[1,1],[2,1],[2,2]]}}"#,
            r#"{"id":"orphan","name":"O","category":"x","parent":"nowhere","geometry":{"type":"site","point":[5,5]}}"#,
            r#"{"id":"a","name":"A","category":"x","parent":"b","geometry":{"type":"site","point":[1,5]}}"#,
            r#"{"id":"b","name":"B","category":"x","parent":"a","geometry":{"type":"site","point":[2,5]}}"#,
            r#"not json"#,
            r#"{"id":"bowtie","name":"Bow","category":"x","parent":null,"geometry":{"type":"polygon","ring":[[0,0],[1,1],[1,0],[0,1]]}}"#,
        ]
        .join("\n");
        let r = load(IngestKind::Regions, &text, &mut s);
        assert_eq!((r.accepted, r.rejected), (2, 5));
        let lines: Vec<usize> = r.first_errors.iter().map(|e| e.0).collect();
        assert_eq!(lines, [3, 4, 5, 6, 7]);
        assert_eq!(s.forest().len(), 2);
    }

    #[test]
    fn activities_attach_to_nearest_prior_event() {
        let mut s = TrajectoryStore::new();
        load(
            IngestKind::Points,
            "object_id,t,x,y,device_id\nA,0,0,0,\nA,100,0,0,\nA,200,0,0,\n",
            &mut s,
        );
        let r = load(
            IngestKind::Activities,
            "id,object_id,kind,label,t_begin,t_end,x,y\nlunch,A,Physical,have lunch,150,250,1,1\ncall,A,Virtual,phone call,0,10,,\nbad,A,Physical,walk,0,10,,\n",
            &mut s,
        );
        assert_eq!((r.accepted, r.rejected), (2, 1));
        let p = s.build_path(&"A".into()).unwrap();
        assert_eq!(p.entries[1].begin_activities[0].id.as_str(), "lunch");
        assert_eq!(p.entries[2].end_activities[0].id.as_str(), "lunch");
        assert_eq!(p.entries[0].begin_activities[0].id.as_str(), "call");
    }

    #[test]
    fn devices_and_observations() {
        let mut s = TrajectoryStore::new();
        let r = load(
            IngestKind::Devices,
            "device_id,kind,reliability,description\ngps-1,GPS,0.95,phone\ncam,Webcam,0.5,x\nrf,RFID,1.5,x\n",
            &mut s,
        );
        assert_eq!((r.accepted, r.rejected), (1, 2));
        let r = load(
            IngestKind::Points,
            "object_id,t,x,y,device_id\nA,0,0,0,gps-1\nA,5,0,0,gps-9\n",
            &mut s,
        );
        assert_eq!((r.accepted, r.rejected), (1, 1));
        let r = load(
            IngestKind::Observations,
            "id,event_id,feature,value,unit,t\no1,A#0,fuel_level,42,L,0\no2,A#5,fuel_level,40,L,5\n",
            &mut s,
        );
        assert_eq!((r.accepted, r.rejected), (1, 1));
    }
}
