use crate::query::ast::{Literal, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldType {
    Str,
    Num,
    /// Seconds since epoch; compared against integer literals.
    Time,
    /// Seconds; compared against duration literals only.
    Duration,
}

impl FieldType {
    pub fn accepts(self, lit: &Literal) -> bool {
        matches!(
            (self, lit),
            (FieldType::Str, Literal::Str(_))
                | (FieldType::Num, Literal::Int(_) | Literal::Num(_))
                | (FieldType::Time, Literal::Int(_))
                | (FieldType::Duration, Literal::Duration { .. })
        )
    }

    pub fn describe(self) -> &'static str {
        match self {
            FieldType::Str => "string",
            FieldType::Num => "numeric",
            FieldType::Time => "integer time",
            FieldType::Duration => "duration",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldDef {
    pub name: &'static str,
    pub ty: FieldType,
    /// Part of the default projection.
    pub default: bool,
    /// Only defined when the query has an `intersects(layer ...)` predicate.
    pub layer_only: bool,
}

const fn f(name: &'static str, ty: FieldType) -> FieldDef {
    FieldDef {
        name,
        ty,
        default: true,
        layer_only: false,
    }
}

const fn hidden(name: &'static str, ty: FieldType) -> FieldDef {
    FieldDef {
        name,
        ty,
        default: false,
        layer_only: false,
    }
}

const fn layer_place() -> FieldDef {
    FieldDef {
        name: "place",
        ty: FieldType::Str,
        default: true,
        layer_only: true,
    }
}

use FieldType::{Duration as D, Num as N, Str as S, Time as T};

const RAW: &[FieldDef] = &[f("object", S), f("t", T), f("x", N), f("y", N), layer_place()];

const EPISODES: &[FieldDef] = &[
    f("object", S),
    f("t_begin", T),
    f("t_end", T),
    f("duration", D),
    f("x", N),
    f("y", N),
    layer_place(),
];

const SEMANTIC: &[FieldDef] = &[
    f("object", S),
    f("t_begin", T),
    f("t_end", T),
    f("duration", D),
    f("x", N),
    f("y", N),
    f("place", S),
    f("category", S),
    f("role", S),
];

const ROI_VISITS: &[FieldDef] = &[
    f("object", S),
    f("region", S),
    f("category", S),
    f("t_begin", T),
    f("t_end", T),
    f("via_descendant", S),
];

const STPATH: &[FieldDef] = &[
    f("object", S),
    f("t_begin", T),
    f("t_end", T),
    f("activity_kind", S),
    f("label", S),
    f("x", N),
    f("y", N),
];

const DEVICES: &[FieldDef] = &[
    f("device", S),
    f("kind", S),
    f("reliability", N),
    f("t", T),
    f("region", S),
    hidden("object", S),
];

/// Fields each source's rows carry, in default column order.
pub fn field_table(source: Source) -> &'static [FieldDef] {
    match source {
        Source::Raw => RAW,
        Source::Stops | Source::Moves => EPISODES,
        Source::Semantic => SEMANTIC,
        Source::RoiVisits => ROI_VISITS,
        Source::StPath => STPATH,
        Source::Devices => DEVICES,
    }
}
