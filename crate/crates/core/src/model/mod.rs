//! The trajectory meta-model: events, the raw/structured/semantic
//! presentations, ordering, and the presentation factory.

mod event;
mod factory;
mod order;
mod trajectory;

pub use event::{add_child_event, validate_event_forest, Role, SemanticTag, SpaceTimeEvent};
pub use factory::{
    create_presentation, Presentation, PresentationBuilder, PresentationContext, PresentationKind, RoiTrajectory,
    TrajectoryFactory,
};
pub use order::{compare_events, compare_paths};
pub use trajectory::{
    validate_raw, Annotation, Episode, EpisodeKind, RawPoint, RawTrajectory, SemanticTrajectory, StructuredTrajectory,
};
