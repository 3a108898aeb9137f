use serde::Serialize;

use crate::store::TrajectoryStore;

fn line<T: Serialize>(out: &mut Vec<(String, String, String)>, kind: &str, id: impl ToString, v: &T) {
    let body = serde_json::to_string(v).expect("store entities serialize");
    out.push((kind.to_string(), id.to_string(), body));
}

/// Deterministic text dump: one `kind<TAB>id<TAB>json` line per entity,
/// sorted by kind then id. The revision counter is not part of the dump.
pub fn canonical_export(store: &TrajectoryStore) -> String {
    let d = &store.data;
    let mut lines = Vec::new();
    if let Some(cfg) = store.index_config() {
        line(&mut lines, "config", "index", &cfg);
    }
    for (id, v) in &d.events {
        line(&mut lines, "event", id, v);
    }
    for (id, v) in &d.raw {
        line(&mut lines, "raw", id, v);
    }
    for (id, v) in &d.structured {
        line(&mut lines, "structured", id, v);
    }
    for (id, v) in &d.semantic {
        line(&mut lines, "semantic", id, v);
    }
    for (id, v) in &d.regions {
        line(&mut lines, "region", id, v);
    }
    for (id, v) in &d.activities {
        line(&mut lines, "activity", id, v);
    }
    for (id, v) in &d.processes {
        line(&mut lines, "process", id, v);
    }
    for a in &d.associations {
        line(&mut lines, "association", a.key(), a);
    }
    for (id, v) in &d.devices {
        line(&mut lines, "device", id, v);
    }
    for (id, v) in &d.observations {
        line(&mut lines, "observation", id, v);
    }
    lines.sort();
    let mut out = String::new();
    for (kind, id, body) in lines {
        out.push_str(&kind);
        out.push('\t');
        out.push_str(&id);
        out.push('\t');
        out.push_str(&body);
        out.push('\n');
    }
    out
}
