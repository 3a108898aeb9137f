use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::GeoPoint;
use crate::query::ast::{Literal, Predicate, Projection, QueryAst};
use crate::query::fields::FieldDef;
use crate::query::sources::{Row, SourceRegistry};
use crate::query::value::Value;
use crate::regions::RegionForest;
use crate::store::{STWindow, TrajectoryStore};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    /// Sorted lexicographically.
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Header line then one line per row, tab-separated.
    pub fn to_tsv(&self) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push('\t');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Evaluates against the built-in sources.
pub fn evaluate(ast: &QueryAst, store: &TrajectoryStore) -> Result<ResultTable> {
    evaluate_with(ast, store, &SourceRegistry::default())
}

pub fn evaluate_with(ast: &QueryAst, store: &TrajectoryStore, registry: &SourceRegistry) -> Result<ResultTable> {
    let name = ast.source.as_str();
    let source = registry
        .get(name)
        .ok_or_else(|| Error::Query(format!("no source registered under `{name}`")))?;
    let fields = source.fields();
    let column = |f: &str| -> Result<usize> {
        fields.iter().position(|d| d.name == f).ok_or_else(|| {
            let valid: Vec<&str> = fields.iter().map(|d| d.name).collect();
            Error::Query(format!(
                "`{f}` is not a field of {name}; valid fields: {}",
                valid.join(", ")
            ))
        })
    };

    let windows: Vec<&STWindow> = ast
        .predicates
        .iter()
        .filter_map(|p| match p {
            Predicate::InWindow(w) => Some(w),
            _ => None,
        })
        .collect();
    let layers: BTreeSet<&str> = ast
        .predicates
        .iter()
        .filter_map(|p| match p {
            Predicate::IntersectsLayer(c) => Some(c.as_str()),
            _ => None,
        })
        .collect();

    let mut rows = source.rows(store, &windows)?;
    let forest = store.forest();
    if let Some(place) = fields.iter().position(|d| d.layer_only) {
        if !layers.is_empty() {
            rows = expand_places(rows, place, &layers, forest);
        }
    }

    let mut kept = Vec::with_capacity(rows.len());
    for row in rows {
        let mut ok = true;
        for p in &ast.predicates {
            if !holds(p, &row, fields, &column, forest)? {
                ok = false;
                break;
            }
        }
        if ok {
            kept.push(row);
        }
    }

    let mut table = match (&ast.group_by, &ast.projection) {
        (Some(g), Projection::All | Projection::Count) => {
            let i = column(g)?;
            let mut counts: BTreeMap<Value, i64> = BTreeMap::new();
            for row in &kept {
                *counts.entry(row.values[i].clone()).or_default() += 1;
            }
            ResultTable {
                columns: vec![g.clone(), "count".into()],
                rows: counts.into_iter().map(|(v, n)| vec![v, Value::Int(n)]).collect(),
            }
        }
        (Some(_), Projection::Fields(_)) => {
            return Err(Error::Query(
                "`group by` can only be combined with `select count`".into(),
            ))
        }
        (None, Projection::Count) => ResultTable {
            columns: vec!["count".into()],
            rows: vec![vec![Value::Int(kept.len() as i64)]],
        },
        (None, projection) => {
            let names: Vec<&str> = match projection {
                Projection::Fields(fs) => fs.iter().map(String::as_str).collect(),
                _ => fields
                    .iter()
                    .filter(|d| d.default && (!d.layer_only || !layers.is_empty()))
                    .map(|d| d.name)
                    .collect(),
            };
            let idx = names.iter().map(|n| column(n)).collect::<Result<Vec<_>>>()?;
            ResultTable {
                columns: names.iter().map(|s| s.to_string()).collect(),
                rows: kept
                    .into_iter()
                    .map(|r| idx.iter().map(|&i| r.values[i].clone()).collect())
                    .collect(),
            }
        }
    };
    table.rows.sort();
    Ok(table)
}

/// One row per distinct name of a region in `layers` that the row touches.
fn expand_places(rows: Vec<Row>, place: usize, layers: &BTreeSet<&str>, forest: &RegionForest) -> Vec<Row> {
    let mut out = Vec::new();
    for row in rows {
        let names: BTreeSet<&str> = row
            .geometry
            .vertices()
            .iter()
            .flat_map(|v| forest.members_at(v))
            .filter_map(|id| forest.get(&id))
            .filter(|r| layers.contains(r.category.as_str()))
            .map(|r| r.name.as_str())
            .collect();
        for n in names {
            let mut r = row.clone();
            r.values[place] = Value::Str(n.to_string());
            out.push(r);
        }
    }
    out
}

fn touches_category(forest: &RegionForest, p: &GeoPoint, category: &str) -> bool {
    forest
        .members_at(p)
        .iter()
        .any(|id| forest.get(id).is_some_and(|r| r.category == category))
}

fn inside_named(forest: &RegionForest, p: &GeoPoint, name: &str) -> bool {
    forest
        .members_at(p)
        .iter()
        .any(|id| forest.get(id).is_some_and(|r| r.name == name))
}

fn holds(
    p: &Predicate,
    row: &Row,
    fields: &[FieldDef],
    column: &dyn Fn(&str) -> Result<usize>,
    forest: &RegionForest,
) -> Result<bool> {
    Ok(match p {
        Predicate::Compare { field, op, value } => {
            let i = column(field)?;
            if !fields[i].ty.accepts(value) {
                return Err(Error::Query(format!(
                    "cannot compare {} field `{field}` with a {} literal",
                    fields[i].ty.describe(),
                    value.describe()
                )));
            }
            op.holds(compare(&row.values[i], value)?)
        }
        Predicate::Like { field, pattern } => match &row.values[column(field)?] {
            Value::Str(s) => like_match(pattern, s),
            _ => {
                return Err(Error::Query(format!(
                    "`like` needs a string field, `{field}` is not one"
                )))
            }
        },
        Predicate::IntersectsLayer(cat) => row.geometry.vertices().iter().any(|v| touches_category(forest, v, cat)),
        Predicate::WithinRegion(name) => row.geometry.vertices().iter().all(|v| inside_named(forest, v, name)),
        Predicate::InWindow(w) => w.time.overlaps(&row.time) && row.geometry.intersects_rect(&w.rect),
    })
}

fn compare(v: &Value, lit: &Literal) -> Result<std::cmp::Ordering> {
    use std::cmp::Ordering::Equal;
    Ok(match (v, lit) {
        (Value::Str(a), Literal::Str(b)) => a.as_str().cmp(b.as_str()),
        (Value::Num(a), Literal::Int(b)) => a.partial_cmp(&(*b as f64)).unwrap_or(Equal),
        (Value::Num(a), Literal::Num(b)) => a.partial_cmp(b).unwrap_or(Equal),
        (Value::Int(a), Literal::Int(b)) => a.cmp(b),
        (Value::Int(a), Literal::Duration { value, unit }) => a.cmp(&value.saturating_mul(unit.seconds())),
        _ => {
            return Err(Error::Query(format!(
                "cannot compare value `{v}` with a {} literal",
                lit.describe()
            )))
        }
    })
}

/// SQL-style `like` where `%` matches any run of characters. Case-sensitive.
pub fn like_match(pattern: &str, text: &str) -> bool {
    let parts: Vec<&str> = pattern.split('%').collect();
    let [first, middle @ .., last] = parts.as_slice() else {
        return pattern == text;
    };
    let Some(mut rest) = text.strip_prefix(first) else {
        return false;
    };
    for m in middle {
        match rest.find(m) {
            Some(i) => rest = &rest[i + m.len()..],
            None => return false,
        }
    }
    rest.ends_with(last)
}
