//! Presentation factory.
//!
//! Each presentation kind is produced by a [`PresentationBuilder`]
//! registered under a name. Callers go through [`TrajectoryFactory`] and
//! never construct presentations directly, so new kinds can be added with
//! [`TrajectoryFactory::register`] without touching call sites.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::activity::SpaceTimePath;
use crate::error::{Error, Result};
use crate::ids::ObjectId;
use crate::model::{RawTrajectory, SemanticTrajectory, StructuredTrajectory};
use crate::regions::{visits, Visit};
use crate::segmentation::{annotate, detect_stops, SegmentationParams};
use crate::store::TrajectoryStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PresentationKind {
    Raw,
    Structured,
    Semantic,
    Roi,
    SpaceTimePath,
}

impl PresentationKind {
    pub const ALL: [PresentationKind; 5] = [
        PresentationKind::Raw,
        PresentationKind::Structured,
        PresentationKind::Semantic,
        PresentationKind::Roi,
        PresentationKind::SpaceTimePath,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresentationKind::Raw => "raw",
            PresentationKind::Structured => "structured",
            PresentationKind::Semantic => "semantic",
            PresentationKind::Roi => "roi",
            PresentationKind::SpaceTimePath => "stpath",
        }
    }
}

impl fmt::Display for PresentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresentationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownPresentation(s.to_string()))
    }
}

/// A trajectory described by the regions it dwelt in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoiTrajectory {
    pub object_id: ObjectId,
    pub visits: Vec<Visit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Presentation {
    Raw(RawTrajectory),
    Structured(StructuredTrajectory),
    Semantic(SemanticTrajectory),
    Roi(RoiTrajectory),
    #[serde(rename = "stpath")]
    SpaceTimePath(SpaceTimePath),
    /// Output of a builder registered outside this crate.
    Other {
        kind: String,
        value: serde_json::Value,
    },
}

/// What a builder may draw on: the store, and optionally segmentation
/// parameters to recompute stops instead of using stored ones.
#[derive(Clone, Copy)]
pub struct PresentationContext<'a> {
    pub store: &'a TrajectoryStore,
    pub params: Option<SegmentationParams>,
}

impl<'a> PresentationContext<'a> {
    pub fn new(store: &'a TrajectoryStore) -> Self {
        PresentationContext { store, params: None }
    }

    pub fn with_params(mut self, params: SegmentationParams) -> Self {
        self.params = Some(params);
        self
    }

    fn raw(&self, object: &ObjectId) -> Result<&'a RawTrajectory> {
        self.store
            .raw(object)
            .ok_or_else(|| Error::MissingPrerequisite(format!("no position fixes loaded for `{object}`")))
    }

    fn structured(&self, object: &ObjectId) -> Result<StructuredTrajectory> {
        match self.params {
            Some(params) => Ok(detect_stops(self.raw(object)?, &params)),
            None => self.store.structured(object).cloned().ok_or_else(|| {
                Error::MissingPrerequisite(format!(
                    "`{object}` has not been segmented; run `segment --eps <m> --tau <s>` first"
                ))
            }),
        }
    }

    fn semantic(&self, object: &ObjectId) -> Result<SemanticTrajectory> {
        let forest = self.store.forest();
        if forest.is_empty() {
            return Err(Error::MissingPrerequisite(
                "no regions loaded; run `load-regions <file>` first".into(),
            ));
        }
        if self.params.is_none() {
            if let Some(sem) = self.store.semantic(object) {
                return Ok(sem.clone());
            }
        }
        Ok(annotate(&self.structured(object)?, forest))
    }
}

pub trait PresentationBuilder: Send + Sync {
    fn name(&self) -> &str;
    fn build(&self, object: &ObjectId, ctx: &PresentationContext<'_>) -> Result<Presentation>;
}

struct RawBuilder;
struct StructuredBuilder;
struct SemanticBuilder;
struct RoiBuilder;
struct PathBuilder;

impl PresentationBuilder for RawBuilder {
    fn name(&self) -> &str {
        PresentationKind::Raw.as_str()
    }

    fn build(&self, object: &ObjectId, ctx: &PresentationContext<'_>) -> Result<Presentation> {
        Ok(Presentation::Raw(ctx.raw(object)?.clone()))
    }
}

impl PresentationBuilder for StructuredBuilder {
    fn name(&self) -> &str {
        PresentationKind::Structured.as_str()
    }

    fn build(&self, object: &ObjectId, ctx: &PresentationContext<'_>) -> Result<Presentation> {
        ctx.structured(object).map(Presentation::Structured)
    }
}

impl PresentationBuilder for SemanticBuilder {
    fn name(&self) -> &str {
        PresentationKind::Semantic.as_str()
    }

    fn build(&self, object: &ObjectId, ctx: &PresentationContext<'_>) -> Result<Presentation> {
        ctx.semantic(object).map(Presentation::Semantic)
    }
}

impl PresentationBuilder for RoiBuilder {
    fn name(&self) -> &str {
        PresentationKind::Roi.as_str()
    }

    fn build(&self, object: &ObjectId, ctx: &PresentationContext<'_>) -> Result<Presentation> {
        let sem = ctx.semantic(object)?;
        Ok(Presentation::Roi(RoiTrajectory {
            object_id: object.clone(),
            visits: visits(&sem, ctx.store.forest()),
        }))
    }
}

impl PresentationBuilder for PathBuilder {
    fn name(&self) -> &str {
        PresentationKind::SpaceTimePath.as_str()
    }

    fn build(&self, object: &ObjectId, ctx: &PresentationContext<'_>) -> Result<Presentation> {
        ctx.store.build_path(object).map(Presentation::SpaceTimePath)
    }
}

/// Name-keyed registry of presentation builders.
pub struct TrajectoryFactory {
    builders: BTreeMap<String, Box<dyn PresentationBuilder>>,
}

impl Default for TrajectoryFactory {
    fn default() -> Self {
        let mut f = TrajectoryFactory::empty();
        f.register(Box::new(RawBuilder));
        f.register(Box::new(StructuredBuilder));
        f.register(Box::new(SemanticBuilder));
        f.register(Box::new(RoiBuilder));
        f.register(Box::new(PathBuilder));
        f
    }
}

impl TrajectoryFactory {
    pub fn empty() -> Self {
        TrajectoryFactory {
            builders: BTreeMap::new(),
        }
    }

    /// Adds a builder, replacing any previous one with the same name.
    pub fn register(&mut self, builder: Box<dyn PresentationBuilder>) {
        self.builders.insert(builder.name().to_string(), builder);
    }

    pub fn kinds(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn create(&self, kind: &str, object: &ObjectId, ctx: &PresentationContext<'_>) -> Result<Presentation> {
        self.builders
            .get(kind)
            .ok_or_else(|| Error::UnknownPresentation(kind.to_string()))?
            .build(object, ctx)
    }
}

/// Builds a presentation with the built-in builders.
pub fn create_presentation(
    kind: PresentationKind,
    object: &ObjectId,
    ctx: &PresentationContext<'_>,
) -> Result<Presentation> {
    TrajectoryFactory::default().create(kind.as_str(), object, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeoPoint;
    use crate::model::{validate_raw, RawPoint};
    use crate::store::Entity;
    use crate::time::TimeInstant;

    fn store() -> TrajectoryStore {
        let mut s = TrajectoryStore::new();
        let pts = [(0.0, 0), (0.0, 300), (0.0, 600), (1000.0, 900)]
            .iter()
            .map(|&(x, t)| RawPoint::new(GeoPoint::new(x, 0.0).unwrap(), TimeInstant::new(t).unwrap()))
            .collect();
        s.upsert(Entity::Raw(validate_raw("MO", pts).unwrap())).unwrap();
        s
    }

    #[test]
    fn raw_pass_through() {
        let s = store();
        let p = create_presentation(PresentationKind::Raw, &"MO".into(), &PresentationContext::new(&s)).unwrap();
        assert_eq!(p, Presentation::Raw(s.raw(&"MO".into()).unwrap().clone()));
    }

    #[test]
    fn semantic_without_regions_is_missing_prerequisite() {
        let s = store();
        let ctx = PresentationContext::new(&s).with_params(SegmentationParams::new(50.0, 600).unwrap());
        let err = create_presentation(PresentationKind::Semantic, &"MO".into(), &ctx).unwrap_err();
        assert!(matches!(err, Error::MissingPrerequisite(_)), "{err:?}");
    }

    #[test]
    fn structured_delegates_to_detect_stops() {
        let s = store();
        let params = SegmentationParams::new(50.0, 600).unwrap();
        let ctx = PresentationContext::new(&s).with_params(params);
        let p = create_presentation(PresentationKind::Structured, &"MO".into(), &ctx).unwrap();
        assert_eq!(
            p,
            Presentation::Structured(detect_stops(s.raw(&"MO".into()).unwrap(), &params))
        );
        // deterministic
        assert_eq!(
            p,
            create_presentation(PresentationKind::Structured, &"MO".into(), &ctx).unwrap()
        );
        // without params and nothing stored
        assert!(matches!(
            create_presentation(
                PresentationKind::Structured,
                &"MO".into(),
                &PresentationContext::new(&s)
            ),
            Err(Error::MissingPrerequisite(_))
        ));
    }

    #[test]
    fn unknown_kind_and_custom_registration() {
        struct PointCount;
        impl PresentationBuilder for PointCount {
            fn name(&self) -> &str {
                "point-count"
            }
            fn build(&self, object: &ObjectId, ctx: &PresentationContext<'_>) -> Result<Presentation> {
                let n = ctx.store.raw(object).map_or(0, |r| r.len());
                Ok(Presentation::Other {
                    kind: "point-count".into(),
                    value: n.into(),
                })
            }
        }
        let s = store();
        let mut f = TrajectoryFactory::default();
        assert!(matches!(
            f.create("point-count", &"MO".into(), &PresentationContext::new(&s)),
            Err(Error::UnknownPresentation(_))
        ));
        f.register(Box::new(PointCount));
        let p = f
            .create("point-count", &"MO".into(), &PresentationContext::new(&s))
            .unwrap();
        assert_eq!(
            p,
            Presentation::Other {
                kind: "point-count".into(),
                value: 4.into()
            }
        );
        assert!("bogus".parse::<PresentationKind>().is_err());
        assert_eq!(
            "stpath".parse::<PresentationKind>().unwrap(),
            PresentationKind::SpaceTimePath
        );
    }
}
