//! Total orders over events and space-time paths.

use std::cmp::Ordering;

use crate::activity::SpaceTimePath;
use crate::error::{Error, Result};
use crate::model::SpaceTimeEvent;

/// Orders by `(begin, end, id)`.
pub fn compare_events(a: &SpaceTimeEvent, b: &SpaceTimeEvent) -> Ordering {
    (a.time.begin(), a.time.end(), &a.id).cmp(&(b.time.begin(), b.time.end(), &b.id))
}

/// Orders by first event, then object id. Empty paths have no position in
/// the order.
pub fn compare_paths(p: &SpaceTimePath, q: &SpaceTimePath) -> Result<Ordering> {
    fn first(path: &SpaceTimePath) -> Result<&SpaceTimeEvent> {
        path.entries
            .first()
            .map(|e| &e.event)
            .ok_or_else(|| Error::Argument(format!("space-time path of `{}` is empty", path.object_id)))
    }
    let (a, b) = (first(p)?, first(q)?);
    Ok(compare_events(a, b).then_with(|| p.object_id.cmp(&q.object_id)))
}
