//! Brute-force re-implementations used as test oracles. Each follows the
//! definition directly and makes no attempt to be fast.

use std::collections::BTreeMap;

use mobtraj_core::model::EpisodeKind;

/// Stop ranges straight from the anchor definition: at anchor `i`, `j` is
/// the largest index such that every fix in `i..=j` lies within `eps` of
/// fix `i`; `[i, j]` is a stop when it lasts at least `tau`, and the scan
/// resumes after `j`, otherwise at `i + 1`.
pub fn quadratic_stop_ranges(pts: &[(f64, f64, i64)], eps: f64, tau: i64) -> Vec<(usize, usize)> {
    let n = pts.len();
    let near = |a: usize, b: usize| {
        let (dx, dy) = (pts[a].0 - pts[b].0, pts[a].1 - pts[b].1);
        dx.hypot(dy) <= eps
    };
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let j = (i..n)
            .rev()
            .find(|&j| (i..=j).all(|k| near(i, k)))
            .expect("i itself qualifies");
        if pts[j].2 - pts[i].2 >= tau {
            out.push((i, j));
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Episode skeleton `(kind, start, end, shares_start, shares_end)`.
pub type EpisodeShape = (EpisodeKind, usize, usize, bool, bool);

/// Expected episodes for `n` fixes and the given stops. Moves fill every
/// gap and touch the fixes of adjacent stops; two back-to-back stops are
/// joined by a move over their shared boundary.
pub fn expected_episodes(n: usize, stops: &[(usize, usize)]) -> Vec<EpisodeShape> {
    let mut out = Vec::new();
    if stops.is_empty() {
        out.push((EpisodeKind::Move, 0, n - 1, false, false));
        return out;
    }
    if stops[0].0 > 0 {
        out.push((EpisodeKind::Move, 0, stops[0].0, false, true));
    }
    for (k, &(s, e)) in stops.iter().enumerate() {
        if k > 0 {
            out.push((EpisodeKind::Move, stops[k - 1].1, s, true, true));
        }
        out.push((EpisodeKind::Stop, s, e, false, false));
    }
    let last = stops[stops.len() - 1].1;
    if last < n - 1 {
        out.push((EpisodeKind::Move, last, n - 1, true, false));
    }
    out
}

/// Nearest site with ties resolved to the smallest id.
pub fn voronoi_argmin(p: (f64, f64), sites: &[(String, (f64, f64))]) -> Option<&str> {
    let mut best: Option<(f64, &str)> = None;
    for (id, (x, y)) in sites {
        let d = (p.0 - x).hypot(p.1 - y);
        best = match best {
            None => Some((d, id)),
            Some((bd, bid)) if d < bd || (d == bd && id.as_str() < bid) => Some((d, id)),
            keep => keep,
        };
    }
    best.map(|(_, id)| id)
}

/// Boundary-inclusive point-in-polygon by winding number.
pub fn point_in_ring(p: (f64, f64), ring: &[(f64, f64)]) -> bool {
    let n = ring.len();
    let mut winding = 0i32;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        let in_box = p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1);
        if cross == 0.0 && in_box {
            return true;
        }
        if a.1 <= p.1 {
            if b.1 > p.1 && cross > 0.0 {
                winding += 1;
            }
        } else if b.1 <= p.1 && cross < 0.0 {
            winding -= 1;
        }
    }
    winding != 0
}

/// Parent links by id, walked to produce `id`'s ancestors nearest first.
pub fn ancestor_chain(id: &str, parents: &BTreeMap<String, Option<String>>) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = parents.get(id).cloned().flatten();
    while let Some(p) = cur {
        cur = parents.get(&p).cloned().flatten();
        out.push(p);
    }
    out
}
