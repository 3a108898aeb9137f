//! A small query language over the store.
//!
//! ```text
//! <source> [where <pred> {and <pred>}] [group by <field>] [select count | <field> {, <field>}]
//! ```
//!
//! Sources are `raw`, `stops`, `moves`, `semantic`, `roi-visits`, `stpath`
//! and `devices`. Predicates compare a field with a literal, match a string
//! field with `like` (`%` is the wildcard), or test row geometry with
//! `intersects(layer "<category>")`, `within(region "<name>")` and
//! `window(x_min, x_max, y_min, y_max, t0, t1)`. Durations carry a unit:
//! `600s`, `10min`, `2h`.

mod ast;
mod eval;
mod fields;
mod lexer;
mod parser;
mod print;
mod sources;
mod value;

pub use ast::{CmpOp, DurationUnit, Literal, ParseError, Predicate, Projection, QueryAst, Source};
pub use eval::{evaluate, evaluate_with, like_match, ResultTable};
pub use fields::{field_table, FieldDef, FieldType};
pub use parser::parse;
pub use print::pretty_print;
pub use sources::{QuerySource, Row, SourceRegistry};
pub use value::Value;
