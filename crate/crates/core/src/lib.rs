//! In-memory moving-object trajectory engine.
//!
//! Position fixes are loaded as raw trajectories, segmented into stops and
//! moves, annotated with places from a forest of composite regions of
//! interest, and linked to activities and capture devices. A small query
//! language answers questions over every presentation.
//!
//! ```
//! use mobtraj_core::{query, store::TrajectoryStore};
//!
//! let store = TrajectoryStore::new();
//! let ast = query::parse("stops where duration > 10min select object").unwrap();
//! let table = query::evaluate(&ast, &store).unwrap();
//! assert_eq!(table.columns, vec!["object"]);
//! assert!(table.rows.is_empty());
//! ```

pub mod activity;
pub mod error;
pub mod geometry;
pub mod ids;
pub mod ingest;
pub mod model;
pub mod observation;
pub mod query;
pub mod regions;
pub mod segmentation;
pub mod store;
pub mod time;

pub use error::{Error, Result};
