//! A reference query evaluator written from the row model alone.
//!
//! It shares only the AST and the stored entities with the engine. Region
//! membership, window tests, `like` matching and visit roll-up are all
//! recomputed here from raw definitions.

use std::collections::{BTreeMap, BTreeSet};

use mobtraj_core::geometry::Shape;
use mobtraj_core::ids::EventId;
use mobtraj_core::model::EpisodeKind;
use mobtraj_core::query::{
    field_table, CmpOp, FieldType, Literal, Predicate, Projection, QueryAst, ResultTable, Source, Value,
};
use mobtraj_core::regions::{GeometryDef, RegionDef};
use mobtraj_core::store::TrajectoryStore;

use crate::oracle::{ancestor_chain, point_in_ring, voronoi_argmin};

struct Region {
    name: String,
    category: String,
    ring: Option<Vec<(f64, f64)>>,
}

/// Region definitions flattened for brute-force lookups.
pub struct Regions {
    regions: BTreeMap<String, Region>,
    parents: BTreeMap<String, Option<String>>,
    sites: Vec<(String, (f64, f64))>,
}

impl Regions {
    pub fn from_store(store: &TrajectoryStore) -> Self {
        Self::from_defs(store.region_defs())
    }

    pub fn from_defs<'a>(defs: impl IntoIterator<Item = &'a RegionDef>) -> Self {
        let mut regions = BTreeMap::new();
        let mut parents = BTreeMap::new();
        let mut sites = Vec::new();
        for d in defs {
            let ring = match &d.geometry {
                GeometryDef::Polygon { ring } => {
                    let mut r: Vec<(f64, f64)> = ring.iter().map(|&[x, y]| (x, y)).collect();
                    if r.len() > 1 && r.first() == r.last() {
                        r.pop();
                    }
                    Some(r)
                }
                GeometryDef::Site { point: [x, y] } => {
                    sites.push((d.id.to_string(), (*x, *y)));
                    None
                }
            };
            parents.insert(d.id.to_string(), d.parent.as_ref().map(|p| p.to_string()));
            regions.insert(
                d.id.to_string(),
                Region {
                    name: d.name.clone(),
                    category: d.category.clone(),
                    ring,
                },
            );
        }
        Regions {
            regions,
            parents,
            sites,
        }
    }

    fn own_hit(&self, id: &str, p: (f64, f64)) -> bool {
        match &self.regions[id].ring {
            Some(ring) => point_in_ring(p, ring),
            None => voronoi_argmin(p, &self.sites) == Some(id),
        }
    }

    /// Every region containing `p` under the hierarchical rule.
    pub fn members(&self, p: (f64, f64)) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for id in self.regions.keys() {
            if self.own_hit(id, p) {
                out.insert(id.clone());
                out.extend(ancestor_chain(id, &self.parents));
            }
        }
        out
    }

    pub fn depth(&self, id: &str) -> usize {
        ancestor_chain(id, &self.parents).len()
    }

    /// Deepest region whose own geometry contains `p`; smallest id on ties.
    pub fn deepest(&self, p: (f64, f64)) -> Option<String> {
        let mut best: Option<(usize, &String)> = None;
        for id in self.regions.keys() {
            if self.own_hit(id, p) {
                let d = self.depth(id);
                if best.is_none_or(|(bd, _)| d > bd) {
                    best = Some((d, id));
                }
            }
        }
        best.map(|(_, id)| id.clone())
    }

    pub fn name(&self, id: &str) -> &str {
        &self.regions[id].name
    }

    pub fn category(&self, id: &str) -> &str {
        &self.regions[id].category
    }

    pub fn ancestors(&self, id: &str) -> Vec<String> {
        ancestor_chain(id, &self.parents)
    }
}

struct NRow {
    values: BTreeMap<&'static str, Value>,
    vertices: Vec<(f64, f64)>,
    time: (i64, i64),
}

fn s(v: &str) -> Value {
    Value::Str(v.to_string())
}

fn rows(source: Source, store: &TrajectoryStore, regions: &Regions) -> Vec<NRow> {
    let mut out = Vec::new();
    match source {
        Source::Raw => {
            for raw in store.raw_trajectories() {
                for p in raw.points() {
                    let (x, y, t) = (p.position.x(), p.position.y(), p.t.seconds());
                    out.push(NRow {
                        values: BTreeMap::from([
                            ("object", s(raw.object_id().as_str())),
                            ("t", Value::Int(t)),
                            ("x", Value::Num(x)),
                            ("y", Value::Num(y)),
                        ]),
                        vertices: vec![(x, y)],
                        time: (t, t),
                    });
                }
            }
        }
        Source::Stops | Source::Moves => {
            let kind = if source == Source::Stops {
                EpisodeKind::Stop
            } else {
                EpisodeKind::Move
            };
            for st in store.structured_trajectories() {
                for ep in st.episodes.iter().filter(|e| e.kind == kind) {
                    let c = ep.representative_point();
                    let (b, e) = (ep.time.begin().seconds(), ep.time.end().seconds());
                    out.push(NRow {
                        values: BTreeMap::from([
                            ("object", s(st.object_id.as_str())),
                            ("t_begin", Value::Int(b)),
                            ("t_end", Value::Int(e)),
                            ("duration", Value::Int(e - b)),
                            ("x", Value::Num(c.x())),
                            ("y", Value::Num(c.y())),
                        ]),
                        vertices: ep.geometry.vertices().iter().map(|v| (v.x(), v.y())).collect(),
                        time: (b, e),
                    });
                }
            }
        }
        Source::Semantic => {
            for sem in store.semantic_trajectories() {
                for (ep, ann) in sem.base.episodes.iter().zip(&sem.annotations) {
                    let Some(ann) = ann else { continue };
                    let c = ep.representative_point();
                    let (b, e) = (ep.time.begin().seconds(), ep.time.end().seconds());
                    let role = match ep.kind {
                        EpisodeKind::Stop => "stop",
                        EpisodeKind::Move => "move",
                    };
                    out.push(NRow {
                        values: BTreeMap::from([
                            ("object", s(sem.base.object_id.as_str())),
                            ("t_begin", Value::Int(b)),
                            ("t_end", Value::Int(e)),
                            ("duration", Value::Int(e - b)),
                            ("x", Value::Num(c.x())),
                            ("y", Value::Num(c.y())),
                            ("place", s(&ann.tag.place_name)),
                            ("category", s(&ann.tag.category)),
                            ("role", s(role)),
                        ]),
                        vertices: ep.geometry.vertices().iter().map(|v| (v.x(), v.y())).collect(),
                        time: (b, e),
                    });
                }
            }
        }
        Source::RoiVisits => {
            for sem in store.semantic_trajectories() {
                for (ep, ann) in sem.base.episodes.iter().zip(&sem.annotations) {
                    let (Some(ann), EpisodeKind::Stop) = (ann, ep.kind) else {
                        continue;
                    };
                    let Some(direct) = ann.region_ids.first() else { continue };
                    let c = ep.representative_point();
                    let (b, e) = (ep.time.begin().seconds(), ep.time.end().seconds());
                    let chain = std::iter::once((direct.to_string(), false))
                        .chain(regions.ancestors(direct.as_str()).into_iter().map(|a| (a, true)));
                    for (id, via) in chain {
                        out.push(NRow {
                            values: BTreeMap::from([
                                ("object", s(sem.base.object_id.as_str())),
                                ("region", s(regions.name(&id))),
                                ("category", s(regions.category(&id))),
                                ("t_begin", Value::Int(b)),
                                ("t_end", Value::Int(e)),
                                ("via_descendant", s(if via { "true" } else { "false" })),
                            ]),
                            vertices: vec![(c.x(), c.y())],
                            time: (b, e),
                        });
                    }
                }
            }
        }
        Source::StPath => {
            for a in store.associations() {
                let (Some(ev), Some(act)) = (store.event(&a.event_id), store.activity(&a.activity_id)) else {
                    continue;
                };
                let at = act.location.unwrap_or_else(|| ev.spatial.representative_point());
                let (b, e) = (ev.time.begin().seconds(), ev.time.end().seconds());
                out.push(NRow {
                    values: BTreeMap::from([
                        ("object", s(ev.object_id.as_str())),
                        ("t_begin", Value::Int(b)),
                        ("t_end", Value::Int(e)),
                        ("activity_kind", s(act.kind.as_str())),
                        ("label", s(&act.label)),
                        ("x", Value::Num(at.x())),
                        ("y", Value::Num(at.y())),
                    ]),
                    vertices: vec![(at.x(), at.y())],
                    time: (b, e),
                });
            }
        }
        Source::Devices => {
            for ev in store.events() {
                let Some(dev) = ev.device_id.as_ref().and_then(|d| store.device(d)) else {
                    continue;
                };
                let p = ev.spatial.representative_point();
                let region = regions
                    .deepest((p.x(), p.y()))
                    .map(|id| regions.name(&id).to_string())
                    .unwrap_or_default();
                let (b, e) = (ev.time.begin().seconds(), ev.time.end().seconds());
                out.push(NRow {
                    values: BTreeMap::from([
                        ("device", s(dev.device_id.as_str())),
                        ("kind", s(dev.kind.as_str())),
                        ("reliability", Value::Num(dev.reliability)),
                        ("t", Value::Int(b)),
                        ("region", s(&region)),
                        ("object", s(ev.object_id.as_str())),
                    ]),
                    vertices: ev.spatial.vertices().iter().map(|v| (v.x(), v.y())).collect(),
                    time: (b, e),
                });
            }
        }
    }
    out
}

/// `%` matches any run of characters; everything else matches itself.
pub fn like(pattern: &[char], text: &[char]) -> bool {
    match pattern.split_first() {
        None => text.is_empty(),
        Some(('%', rest)) => (0..=text.len()).any(|k| like(rest, &text[k..])),
        Some((c, rest)) => text.first() == Some(c) && like(rest, &text[1..]),
    }
}

fn in_rect(p: (f64, f64), r: [f64; 4]) -> bool {
    p.0 >= r[0] && p.0 <= r[1] && p.1 >= r[2] && p.1 <= r[3]
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn on_span(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

fn segments_meet(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let (d1, d2, d3, d4) = (orient(c, d, a), orient(c, d, b), orient(a, b, c), orient(a, b, d));
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return true;
    }
    (d1 == 0.0 && on_span(c, d, a))
        || (d2 == 0.0 && on_span(c, d, b))
        || (d3 == 0.0 && on_span(a, b, c))
        || (d4 == 0.0 && on_span(a, b, d))
}

/// A polyline (or single point) meets a closed rectangle.
fn touches_rect(vertices: &[(f64, f64)], r: [f64; 4]) -> bool {
    if vertices.iter().any(|&v| in_rect(v, r)) {
        return true;
    }
    let corners = [(r[0], r[2]), (r[1], r[2]), (r[1], r[3]), (r[0], r[3])];
    vertices
        .windows(2)
        .any(|w| (0..4).any(|k| segments_meet(w[0], w[1], corners[k], corners[(k + 1) % 4])))
}

/// Every event whose interval overlaps `[t0, t1]` and whose geometry meets
/// the rectangle `[x_min, x_max, y_min, y_max]`, by linear scan.
pub fn scan_window(store: &TrajectoryStore, r: [f64; 4], t0: i64, t1: i64) -> BTreeSet<EventId> {
    store
        .events()
        .filter(|ev| ev.time.begin().seconds() <= t1 && t0 <= ev.time.end().seconds())
        .filter(|ev| {
            let vs: Vec<(f64, f64)> = ev.spatial.vertices().iter().map(|p| (p.x(), p.y())).collect();
            match &ev.spatial.shape {
                Shape::Area(_) => {
                    let mut closed = vs.clone();
                    closed.push(vs[0]);
                    touches_rect(&closed, r) || point_in_ring((r[0], r[2]), &vs)
                }
                _ => touches_rect(&vs, r),
            }
        })
        .map(|ev| ev.id.clone())
        .collect()
}

fn compare(v: &Value, lit: &Literal) -> std::cmp::Ordering {
    match (v, lit) {
        (Value::Str(a), Literal::Str(b)) => a.cmp(b),
        (Value::Num(a), Literal::Int(b)) => a.partial_cmp(&(*b as f64)).unwrap(),
        (Value::Num(a), Literal::Num(b)) => a.partial_cmp(b).unwrap(),
        (Value::Int(a), Literal::Int(b)) => a.cmp(b),
        (Value::Int(a), Literal::Duration { value, unit }) => a.cmp(&(value * unit.seconds())),
        _ => panic!("type mismatch should have been rejected by the parser"),
    }
}

fn op_holds(op: CmpOp, o: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match op {
        CmpOp::Eq => o == Equal,
        CmpOp::Ne => o != Equal,
        CmpOp::Lt => o == Less,
        CmpOp::Le => o == Less || o == Equal,
        CmpOp::Gt => o == Greater,
        CmpOp::Ge => o == Greater || o == Equal,
    }
}

/// Evaluates `ast` by brute force over every row of its source.
pub fn naive_evaluate(ast: &QueryAst, store: &TrajectoryStore) -> ResultTable {
    let regions = Regions::from_store(store);
    let fields = field_table(ast.source);
    let layers: BTreeSet<&str> = ast
        .predicates
        .iter()
        .filter_map(|p| match p {
            Predicate::IntersectsLayer(c) => Some(c.as_str()),
            _ => None,
        })
        .collect();
    let layer_source = fields.iter().any(|f| f.layer_only);

    let mut expanded = Vec::new();
    for row in rows(ast.source, store, &regions) {
        if layer_source && !layers.is_empty() {
            let mut names = BTreeSet::new();
            for &v in &row.vertices {
                for id in regions.members(v) {
                    if layers.contains(regions.category(&id)) {
                        names.insert(regions.name(&id).to_string());
                    }
                }
            }
            for n in names {
                let mut values = row.values.clone();
                values.insert("place", Value::Str(n));
                expanded.push(NRow {
                    values,
                    vertices: row.vertices.clone(),
                    time: row.time,
                });
            }
        } else {
            expanded.push(row);
        }
    }

    let keep = |row: &NRow| {
        ast.predicates.iter().all(|p| match p {
            Predicate::Compare { field, op, value } => op_holds(*op, compare(&row.values[field.as_str()], value)),
            Predicate::Like { field, pattern } => match &row.values[field.as_str()] {
                Value::Str(t) => like(&pattern.chars().collect::<Vec<_>>(), &t.chars().collect::<Vec<_>>()),
                _ => false,
            },
            Predicate::IntersectsLayer(cat) => row
                .vertices
                .iter()
                .any(|&v| regions.members(v).iter().any(|id| regions.category(id) == cat)),
            Predicate::WithinRegion(name) => row
                .vertices
                .iter()
                .all(|&v| regions.members(v).iter().any(|id| regions.name(id) == name)),
            Predicate::InWindow(w) => {
                let (t0, t1) = (w.time.begin().seconds(), w.time.end().seconds());
                row.time.0 <= t1
                    && t0 <= row.time.1
                    && touches_rect(&row.vertices, [w.rect.x_min, w.rect.x_max, w.rect.y_min, w.rect.y_max])
            }
        })
    };
    let kept: Vec<NRow> = expanded.into_iter().filter(|r| keep(r)).collect();

    let mut table = match (&ast.group_by, &ast.projection) {
        (Some(g), _) => {
            let mut counts: BTreeMap<Value, i64> = BTreeMap::new();
            for r in &kept {
                *counts.entry(r.values[g.as_str()].clone()).or_insert(0) += 1;
            }
            ResultTable {
                columns: vec![g.clone(), "count".into()],
                rows: counts.into_iter().map(|(v, c)| vec![v, Value::Int(c)]).collect(),
            }
        }
        (None, Projection::Count) => ResultTable {
            columns: vec!["count".into()],
            rows: vec![vec![Value::Int(kept.len() as i64)]],
        },
        (None, Projection::Fields(fs)) => ResultTable {
            columns: fs.clone(),
            rows: kept
                .iter()
                .map(|r| fs.iter().map(|f| r.values[f.as_str()].clone()).collect())
                .collect(),
        },
        (None, Projection::All) => {
            let names: Vec<&str> = fields
                .iter()
                .filter(|f| f.default && (!f.layer_only || !layers.is_empty()))
                .map(|f| f.name)
                .collect();
            ResultTable {
                columns: names.iter().map(|n| n.to_string()).collect(),
                rows: kept
                    .iter()
                    .map(|r| names.iter().map(|n| r.values[n].clone()).collect())
                    .collect(),
            }
        }
    };
    table.rows.sort();
    table
}

/// Whether a literal fits a field, restated from the field types.
pub fn literal_fits(ty: FieldType, lit: &Literal) -> bool {
    match ty {
        FieldType::Str => matches!(lit, Literal::Str(_)),
        FieldType::Num => matches!(lit, Literal::Int(_) | Literal::Num(_)),
        FieldType::Time => matches!(lit, Literal::Int(_)),
        FieldType::Duration => matches!(lit, Literal::Duration { .. }),
    }
}
