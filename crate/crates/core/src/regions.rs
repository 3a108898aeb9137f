//! Composite regions of interest.
//!
//! Regions form a forest. A region's geometry is either a polygon or a
//! Voronoi site (the region is then the set of points nearer to that site
//! than to any other site in the forest). Membership is hierarchical: a
//! point inside a child is also inside every ancestor, whether or not the
//! ancestor's own geometry covers it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, GeoPoint, Polygon};
use crate::ids::{ObjectId, RegionId};
use crate::model::{EpisodeKind, SemanticTrajectory};
use crate::time::TimeInterval;

/// Geometry as written in region definition files, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GeometryDef {
    Polygon { ring: Vec<[f64; 2]> },
    Site { point: [f64; 2] },
}

/// One line of a regions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionDef {
    pub id: RegionId,
    pub name: String,
    pub category: String,
    pub parent: Option<RegionId>,
    pub geometry: GeometryDef,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegionGeometry {
    Area(Polygon),
    Site(GeoPoint),
}

impl RegionGeometry {
    fn from_def(def: &GeometryDef) -> Result<Self> {
        match def {
            GeometryDef::Polygon { ring } => {
                let pts = ring
                    .iter()
                    .map(|&[x, y]| GeoPoint::new(x, y))
                    .collect::<Result<Vec<_>>>()?;
                Ok(RegionGeometry::Area(Polygon::new(pts)?))
            }
            GeometryDef::Site { point: [x, y] } => Ok(RegionGeometry::Site(GeoPoint::new(*x, *y)?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectOfInterest {
    pub id: RegionId,
    pub name: String,
    pub category: String,
    pub geometry: RegionGeometry,
    pub parent: Option<RegionId>,
    pub children: Vec<RegionId>,
    pub depth: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegionForest {
    regions: BTreeMap<RegionId, ObjectOfInterest>,
    roots: Vec<RegionId>,
    sites: Vec<(RegionId, GeoPoint)>,
}

/// Validates definitions and links them into a forest. Children keep the
/// order in which their definitions appear.
pub fn build_forest(defs: &[RegionDef]) -> Result<RegionForest> {
    let mut regions: BTreeMap<RegionId, ObjectOfInterest> = BTreeMap::new();
    for d in defs {
        if d.id.as_str().is_empty() {
            return Err(Error::validation("region id is empty"));
        }
        let geometry =
            RegionGeometry::from_def(&d.geometry).map_err(|e| Error::validation(format!("region `{}`: {e}", d.id)))?;
        let node = ObjectOfInterest {
            id: d.id.clone(),
            name: d.name.clone(),
            category: d.category.clone(),
            geometry,
            parent: d.parent.clone(),
            children: Vec::new(),
            depth: 0,
        };
        if regions.insert(d.id.clone(), node).is_some() {
            return Err(Error::Duplicate {
                kind: "region",
                id: d.id.to_string(),
            });
        }
    }
    for d in defs {
        if let Some(p) = &d.parent {
            if !regions.contains_key(p) {
                return Err(Error::UnknownParent {
                    id: d.id.to_string(),
                    parent: p.to_string(),
                });
            }
        }
    }
    // Each node has at most one parent, so a cycle is an ancestor walk that
    // comes back to a node already on the walk.
    for d in defs {
        let mut walk = vec![&d.id];
        let mut cursor = &d.id;
        while let Some(p) = regions[cursor].parent.as_ref() {
            if let Some(pos) = walk.iter().position(|w| *w == p) {
                let mut ids: Vec<String> = walk[pos..].iter().map(|w| w.to_string()).collect();
                ids.push(p.to_string());
                return Err(Error::Cycle(ids));
            }
            walk.push(p);
            cursor = p;
        }
    }

    let mut roots = Vec::new();
    for d in defs {
        match &d.parent {
            Some(p) => regions.get_mut(p).expect("checked").children.push(d.id.clone()),
            None => roots.push(d.id.clone()),
        }
    }
    let mut stack: Vec<(RegionId, usize)> = roots.iter().map(|r| (r.clone(), 0)).collect();
    while let Some((id, depth)) = stack.pop() {
        let node = regions.get_mut(&id).expect("linked");
        node.depth = depth;
        stack.extend(node.children.iter().map(|c| (c.clone(), depth + 1)));
    }
    let sites = regions
        .values()
        .filter_map(|r| match r.geometry {
            RegionGeometry::Site(p) => Some((r.id.clone(), p)),
            RegionGeometry::Area(_) => None,
        })
        .collect();
    Ok(RegionForest { regions, roots, sites })
}

/// Nearest site to `p`; equal distances resolve to the smallest id.
pub fn voronoi_member(p: &GeoPoint, sites: &[(RegionId, GeoPoint)]) -> Result<RegionId> {
    sites
        .iter()
        .map(|(id, s)| (distance(p, s), id))
        .min_by(|(da, ia), (db, ib)| da.total_cmp(db).then_with(|| ia.cmp(ib)))
        .map(|(_, id)| id.clone())
        .ok_or_else(|| Error::Argument("voronoi membership over an empty site set".into()))
}

impl RegionForest {
    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn get(&self, id: &RegionId) -> Option<&ObjectOfInterest> {
        self.regions.get(id)
    }

    pub fn regions(&self) -> impl Iterator<Item = &ObjectOfInterest> {
        self.regions.values()
    }

    pub fn roots(&self) -> &[RegionId] {
        &self.roots
    }

    pub fn sites(&self) -> &[(RegionId, GeoPoint)] {
        &self.sites
    }

    /// Ancestors of `id`, nearest first.
    pub fn ancestors(&self, id: &RegionId) -> Vec<RegionId> {
        let mut out = Vec::new();
        let mut cursor = self.regions.get(id).and_then(|r| r.parent.as_ref());
        while let Some(p) = cursor {
            out.push(p.clone());
            cursor = self.regions[p].parent.as_ref();
        }
        out
    }

    fn own_geometry_contains(&self, region: &ObjectOfInterest, p: &GeoPoint) -> bool {
        match &region.geometry {
            RegionGeometry::Area(poly) => poly.contains(p),
            RegionGeometry::Site(_) => voronoi_member(p, &self.sites).is_ok_and(|id| id == region.id),
        }
    }

    /// Composite membership: own geometry or any descendant.
    pub fn is_member(&self, p: &GeoPoint, id: &RegionId) -> Result<bool> {
        let region = self
            .regions
            .get(id)
            .ok_or_else(|| Error::not_found("region", id.as_str()))?;
        Ok(self.is_member_node(p, region))
    }

    fn is_member_node(&self, p: &GeoPoint, region: &ObjectOfInterest) -> bool {
        self.own_geometry_contains(region, p)
            || region.children.iter().any(|c| self.is_member_node(p, &self.regions[c]))
    }

    /// Regions whose own geometry contains `p`.
    fn direct_hits<'a>(&'a self, p: &'a GeoPoint) -> impl Iterator<Item = &'a ObjectOfInterest> + 'a {
        let site = voronoi_member(p, &self.sites).ok();
        self.regions.values().filter(move |r| match &r.geometry {
            RegionGeometry::Area(poly) => poly.contains(p),
            RegionGeometry::Site(_) => site.as_ref() == Some(&r.id),
        })
    }

    /// Every region `p` is a member of.
    pub fn members_at(&self, p: &GeoPoint) -> BTreeSet<RegionId> {
        let mut out = BTreeSet::new();
        for r in self.direct_hits(p) {
            if out.insert(r.id.clone()) {
                for a in self.ancestors(&r.id) {
                    if !out.insert(a) {
                        break;
                    }
                }
            }
        }
        out
    }

    /// The deepest region containing `p`; ties at equal depth go to the
    /// smallest id.
    pub fn deepest_region(&self, p: &GeoPoint) -> Option<RegionId> {
        // Any member that is not a direct hit has a deeper member below it,
        // so the deepest member is always a direct hit.
        self.direct_hits(p)
            .min_by(|a, b| b.depth.cmp(&a.depth).then_with(|| a.id.cmp(&b.id)))
            .map(|r| r.id.clone())
    }
}

/// A stop dwelling inside a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub object_id: ObjectId,
    pub region_id: RegionId,
    pub time: TimeInterval,
    pub via_descendant: bool,
    /// Where the stop was (its centroid).
    pub location: GeoPoint,
}

/// Visits of a semantic trajectory: one per annotated stop for its region,
/// plus one per ancestor of that region flagged `via_descendant`.
pub fn visits(semantic: &SemanticTrajectory, forest: &RegionForest) -> Vec<Visit> {
    let mut out = Vec::new();
    for (ep, ann) in semantic.annotated() {
        if ep.kind != EpisodeKind::Stop {
            continue;
        }
        let Some(region) = ann.region_ids.first() else { continue };
        if forest.get(region).is_none() {
            continue;
        }
        let location = ep.representative_point();
        let mk = |region_id: RegionId, via_descendant| Visit {
            object_id: semantic.object_id().clone(),
            region_id,
            time: ep.time.clone(),
            via_descendant,
            location,
        };
        out.push(mk(region.clone(), false));
        out.extend(forest.ancestors(region).into_iter().map(|a| mk(a, true)));
    }
    out.sort_by_key(|v| (v.time.begin(), v.time.end()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(id: &str, parent: Option<&str>, x0: f64, y0: f64, x1: f64, y1: f64) -> RegionDef {
        RegionDef {
            id: id.into(),
            name: id.to_string(),
            category: "commercial".into(),
            parent: parent.map(RegionId::from),
            geometry: GeometryDef::Polygon {
                ring: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
            },
        }
    }

    fn site(id: &str, x: f64, y: f64) -> RegionDef {
        RegionDef {
            id: id.into(),
            name: id.to_string(),
            category: "cell".into(),
            parent: None,
            geometry: GeometryDef::Site { point: [x, y] },
        }
    }

    fn pt(x: f64, y: f64) -> GeoPoint {
        GeoPoint::new(x, y).unwrap()
    }

    #[test]
    fn empty_definitions_give_empty_forest() {
        let f = build_forest(&[]).unwrap();
        assert!(f.is_empty());
        assert_eq!(f.deepest_region(&pt(0.0, 0.0)), None);
    }

    #[test]
    fn two_cycle_is_named() {
        let err = build_forest(&[
            rect("A", Some("B"), 0.0, 0.0, 1.0, 1.0),
            rect("B", Some("A"), 0.0, 0.0, 1.0, 1.0),
        ])
        .unwrap_err();
        match err {
            Error::Cycle(ids) => {
                assert!(ids.contains(&"A".to_string()) && ids.contains(&"B".to_string()));
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn unknown_parent_and_duplicate() {
        assert!(matches!(
            build_forest(&[rect("A", Some("Z"), 0.0, 0.0, 1.0, 1.0)]),
            Err(Error::UnknownParent { .. })
        ));
        assert!(matches!(
            build_forest(&[rect("A", None, 0.0, 0.0, 1.0, 1.0), rect("A", None, 0.0, 0.0, 1.0, 1.0)]),
            Err(Error::Duplicate { .. })
        ));
    }

    #[test]
    fn invalid_polygon_rejected() {
        let mut bad = rect("A", None, 0.0, 0.0, 1.0, 1.0);
        bad.geometry = GeometryDef::Polygon {
            ring: vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]],
        };
        assert!(matches!(build_forest(&[bad]), Err(Error::Validation(_))));
    }

    #[test]
    fn voronoi_nearest_and_tie() {
        let sites = vec![
            (RegionId::from("A"), pt(0.0, 0.0)),
            (RegionId::from("B"), pt(10.0, 0.0)),
        ];
        assert_eq!(voronoi_member(&pt(2.0, 1.0), &sites).unwrap(), RegionId::from("A"));
        assert_eq!(voronoi_member(&pt(5.0, 0.0), &sites).unwrap(), RegionId::from("A"));
        let rev: Vec<_> = sites.iter().rev().cloned().collect();
        assert_eq!(voronoi_member(&pt(5.0, 0.0), &rev).unwrap(), RegionId::from("A"));
        assert!(voronoi_member(&pt(0.0, 0.0), &[]).is_err());
    }

    #[test]
    fn site_regions_partition_the_plane() {
        let f = build_forest(&[site("A", 0.0, 0.0), site("B", 10.0, 0.0)]).unwrap();
        assert!(f.is_member(&pt(-100.0, 50.0), &"A".into()).unwrap());
        assert!(!f.is_member(&pt(-100.0, 50.0), &"B".into()).unwrap());
        assert_eq!(f.deepest_region(&pt(9.0, 9.0)), Some("B".into()));
    }

    #[test]
    fn composite_membership_and_depth() {
        let f = build_forest(&[
            rect("supermarket", None, 0.0, 0.0, 100.0, 100.0),
            rect("non-food", Some("supermarket"), 50.0, 0.0, 100.0, 100.0),
            rect("cosmetics", Some("non-food"), 60.0, 10.0, 70.0, 20.0),
            // child outside its parent's polygon
            rect("annex", Some("supermarket"), 200.0, 200.0, 210.0, 210.0),
        ])
        .unwrap();
        let p = pt(65.0, 15.0);
        assert_eq!(f.deepest_region(&p), Some("cosmetics".into()));
        assert_eq!(f.get(&"cosmetics".into()).unwrap().depth, 2);
        let q = pt(205.0, 205.0);
        assert!(f.is_member(&q, &"supermarket".into()).unwrap());
        assert_eq!(f.deepest_region(&q), Some("annex".into()));
        assert_eq!(
            f.members_at(&p).into_iter().collect::<Vec<_>>(),
            vec![RegionId::from("cosmetics"), "non-food".into(), "supermarket".into()]
        );
        assert!(f.is_member(&p, &"ghost".into()).is_err());
        assert_eq!(f.deepest_region(&pt(-5.0, -5.0)), None);
    }
}
