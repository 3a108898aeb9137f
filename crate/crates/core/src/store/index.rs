//! Uniform space-time grid over events.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::ids::EventId;
use crate::model::SpaceTimeEvent;
use crate::store::TrajectoryStore;
use crate::time::TimeInterval;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexConfig {
    pub cell_size: f64,
    pub time_bucket: i64,
}

impl IndexConfig {
    pub const DEFAULT_CELL_SIZE: f64 = 100.0;
    pub const DEFAULT_TIME_BUCKET: i64 = 3600;

    pub fn new(cell_size: f64, time_bucket: i64) -> Result<Self> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::Argument(format!("cell size must be > 0, got {cell_size}")));
        }
        if time_bucket <= 0 {
            return Err(Error::Argument(format!("time bucket must be > 0, got {time_bucket}")));
        }
        Ok(IndexConfig { cell_size, time_bucket })
    }
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            cell_size: Self::DEFAULT_CELL_SIZE,
            time_bucket: Self::DEFAULT_TIME_BUCKET,
        }
    }
}

/// A closed spatial rectangle plus a closed time interval.
#[derive(Debug, Clone, PartialEq)]
pub struct STWindow {
    pub rect: Rect,
    pub time: TimeInterval,
}

impl STWindow {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, time: TimeInterval) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| !v.is_nan());
        if !finite || x_min > x_max || y_min > y_max {
            return Err(Error::validation(format!(
                "window bounds out of order: x [{x_min}, {x_max}], y [{y_min}, {y_max}]"
            )));
        }
        Ok(STWindow {
            rect: Rect {
                x_min,
                x_max,
                y_min,
                y_max,
            },
            time,
        })
    }

    /// Exact test used after grid pruning.
    pub fn matches(&self, ev: &SpaceTimeEvent) -> bool {
        self.time.overlaps(&ev.time) && ev.spatial.intersects_rect(&self.rect)
    }
}

type BucketKey = (i64, i64, i64);

#[derive(Debug, Clone)]
pub struct GridIndex {
    config: IndexConfig,
    buckets: BTreeMap<BucketKey, Vec<EventId>>,
    built_at_revision: u64,
}

fn cell_of(v: f64, size: f64) -> i64 {
    // `as` saturates, which keeps unbounded windows well-defined.
    (v / size).floor() as i64
}

impl GridIndex {
    pub fn config(&self) -> IndexConfig {
        self.config
    }

    pub fn built_at_revision(&self) -> u64 {
        self.built_at_revision
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn bucket(&self, key: (i64, i64, i64)) -> Option<&[EventId]> {
        self.buckets.get(&key).map(Vec::as_slice)
    }

    pub fn buckets(&self) -> impl Iterator<Item = (&(i64, i64, i64), &[EventId])> {
        self.buckets.iter().map(|(k, v)| (k, v.as_slice()))
    }

    fn key_range(&self, rect: &Rect, time: &TimeInterval) -> [(i64, i64); 3] {
        let c = self.config.cell_size;
        let b = self.config.time_bucket;
        [
            (cell_of(rect.x_min, c), cell_of(rect.x_max, c)),
            (cell_of(rect.y_min, c), cell_of(rect.y_max, c)),
            (time.begin().seconds() / b, time.end().seconds() / b),
        ]
    }

    /// Event ids from every bucket the window touches, before exact filtering.
    pub fn candidates(&self, w: &STWindow) -> BTreeSet<&EventId> {
        let [xs, ys, ts] = self.key_range(&w.rect, &w.time);
        let span = |(lo, hi): (i64, i64)| (i128::from(hi) - i128::from(lo) + 1).max(0);
        let cells = span(xs).saturating_mul(span(ys)).saturating_mul(span(ts));
        let in_range = |&(x, y, t): &BucketKey| {
            (xs.0..=xs.1).contains(&x) && (ys.0..=ys.1).contains(&y) && (ts.0..=ts.1).contains(&t)
        };
        let mut out = BTreeSet::new();
        if cells > self.buckets.len() as i128 {
            for (k, ids) in &self.buckets {
                if in_range(k) {
                    out.extend(ids);
                }
            }
        } else {
            for x in xs.0..=xs.1 {
                for y in ys.0..=ys.1 {
                    for t in ts.0..=ts.1 {
                        if let Some(ids) = self.buckets.get(&(x, y, t)) {
                            out.extend(ids);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Indexes every event of the store. Point events land in one cell per time
/// bucket; lines and areas in every cell their bounding box touches.
pub fn build_index(cell_size: f64, time_bucket: i64, store: &TrajectoryStore) -> Result<GridIndex> {
    let config = IndexConfig::new(cell_size, time_bucket)?;
    let mut idx = GridIndex {
        config,
        buckets: BTreeMap::new(),
        built_at_revision: store.revision(),
    };
    for ev in store.events() {
        let [xs, ys, ts] = idx.key_range(&ev.spatial.bbox(), &ev.time);
        for x in xs.0..=xs.1 {
            for y in ys.0..=ys.1 {
                for t in ts.0..=ts.1 {
                    idx.buckets.entry((x, y, t)).or_default().push(ev.id.clone());
                }
            }
        }
    }
    Ok(idx)
}

/// Events intersecting the window. Uses the store's published index when it
/// is current; otherwise filters every event directly.
pub fn window_query(w: &STWindow, store: &TrajectoryStore) -> BTreeSet<EventId> {
    match store.fresh_index() {
        Some(idx) => idx
            .candidates(w)
            .into_iter()
            .filter_map(|id| store.event(id))
            .filter(|ev| w.matches(ev))
            .map(|ev| ev.id.clone())
            .collect(),
        None => store
            .events()
            .filter(|ev| w.matches(ev))
            .map(|ev| ev.id.clone())
            .collect(),
    }
}
