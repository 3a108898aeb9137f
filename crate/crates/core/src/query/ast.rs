use std::fmt;
use std::str::FromStr;

use crate::store::STWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Raw,
    Stops,
    Moves,
    Semantic,
    RoiVisits,
    StPath,
    Devices,
}

impl Source {
    pub const ALL: [Source; 7] = [
        Source::Raw,
        Source::Stops,
        Source::Moves,
        Source::Semantic,
        Source::RoiVisits,
        Source::StPath,
        Source::Devices,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Raw => "raw",
            Source::Stops => "stops",
            Source::Moves => "moves",
            Source::Semantic => "semantic",
            Source::RoiVisits => "roi-visits",
            Source::StPath => "stpath",
            Source::Devices => "devices",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Source::ALL.into_iter().find(|src| src.as_str() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DurationUnit {
    Seconds,
    Minutes,
    Hours,
}

impl DurationUnit {
    pub fn suffix(self) -> &'static str {
        match self {
            DurationUnit::Seconds => "s",
            DurationUnit::Minutes => "min",
            DurationUnit::Hours => "h",
        }
    }

    pub fn seconds(self) -> i64 {
        match self {
            DurationUnit::Seconds => 1,
            DurationUnit::Minutes => 60,
            DurationUnit::Hours => 3600,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Str(String),
    /// An integer; valid against number and time fields.
    Int(i64),
    Num(f64),
    Duration {
        value: i64,
        unit: DurationUnit,
    },
}

impl Literal {
    pub fn describe(&self) -> &'static str {
        match self {
            Literal::Str(_) => "string",
            Literal::Int(_) => "integer",
            Literal::Num(_) => "number",
            Literal::Duration { .. } => "duration",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Compare {
        field: String,
        op: CmpOp,
        value: Literal,
    },
    Like {
        field: String,
        pattern: String,
    },
    /// Row geometry touches a region of this category.
    IntersectsLayer(String),
    /// Row geometry lies inside a region with this name.
    WithinRegion(String),
    InWindow(STWindow),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    /// No `select` clause: every default field of the source.
    All,
    Count,
    Fields(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryAst {
    pub source: Source,
    /// Conjunction.
    pub predicates: Vec<Predicate>,
    pub group_by: Option<String>,
    pub projection: Projection,
}

/// Syntax or field-validation error with its position in the query text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("query error at line {line}, column {column} (byte {offset}): expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    pub(crate) fn at(text: &str, offset: usize, expected: impl Into<String>, found: impl Into<String>) -> Self {
        let offset = offset.min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
        ParseError {
            offset,
            line,
            column,
            expected: expected.into(),
            found: found.into(),
        }
    }
}
