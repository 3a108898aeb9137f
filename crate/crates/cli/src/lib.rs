//! Command-line driver. Every subcommand loads the working store from its
//! snapshot file, acts on it, and writes it back if anything changed.

use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use mobtraj_core::ids::ObjectId;
use mobtraj_core::ingest::{load_file, IngestKind};
use mobtraj_core::model::{PresentationContext, TrajectoryFactory};
use mobtraj_core::query::{evaluate, parse};
use mobtraj_core::segmentation::{annotate, detect_stops, SegmentationParams};
use mobtraj_core::store::{load_snapshot, save_snapshot, Entity, IndexConfig, TrajectoryStore};
use mobtraj_core::Error;

pub const DEFAULT_STORE: &str = "mobtraj.snapshot";

#[derive(Debug, Parser)]
#[command(name = "mobtraj", version, about = "Moving-object trajectory engine")]
struct Cli {
    /// Snapshot file holding the working store
    #[arg(long, global = true, env = "MOBTRAJ_STORE", default_value = DEFAULT_STORE)]
    store: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load position fixes (CSV: object_id,t,x,y,device_id)
    LoadPoints { file: PathBuf },
    /// Load region definitions (one JSON record per line)
    LoadRegions { file: PathBuf },
    /// Load capture devices (CSV: device_id,kind,reliability,description)
    LoadDevices { file: PathBuf },
    /// Load activities (CSV: id,object_id,kind,label,t_begin,t_end,x,y)
    LoadActivities { file: PathBuf },
    /// Load observations (CSV: id,event_id,feature,value,unit,t)
    LoadObservations { file: PathBuf },
    /// Split raw trajectories into stops and moves
    Segment {
        /// Stop radius in meters
        #[arg(long)]
        eps: f64,
        /// Minimum stop duration in seconds
        #[arg(long)]
        tau: i64,
        /// Only this object
        #[arg(long)]
        object: Option<String>,
    },
    /// Tag segmented episodes with the regions they occur in
    Annotate,
    /// Build the spatio-temporal grid index
    Index {
        #[arg(long, default_value_t = IndexConfig::DEFAULT_CELL_SIZE)]
        cell_size: f64,
        #[arg(long, default_value_t = IndexConfig::DEFAULT_TIME_BUCKET)]
        time_bucket: i64,
    },
    /// Run a query and print a tab-separated table
    Query { dsl: String },
    /// Print one presentation of an object as JSON
    Export {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        object: String,
    },
    /// Write the working store to a snapshot file
    Save { file: PathBuf },
    /// Replace the working store with a snapshot file
    Load { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CliOutput {
    fn ok(stdout: String) -> Self {
        CliOutput {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: String) -> Self {
        CliOutput {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

/// A failure while talking to the working store file is ours, not the user's.
struct Internal(Error);

enum Failure {
    User(Error),
    Internal(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::User(e)
    }
}

impl From<Internal> for Failure {
    fn from(e: Internal) -> Self {
        Failure::Internal(e.0)
    }
}

/// Runs one invocation. `argv[0]` is the program name. Exit codes: 0 on
/// success, 1 on a usage or input error, 2 on an internal failure.
pub fn run_cli<I, S>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliOutput::ok(text),
                _ => CliOutput::fail(1, text),
            };
        }
    };
    match catch_unwind(AssertUnwindSafe(|| execute(cli))) {
        Ok(Ok(out)) => CliOutput::ok(out),
        Ok(Err(Failure::User(e))) => CliOutput::fail(1, format!("error: {e}\n")),
        Ok(Err(Failure::Internal(e))) => CliOutput::fail(2, format!("internal error: {e}\n")),
        Err(_) => CliOutput::fail(2, "internal error: unexpected panic\n".into()),
    }
}

fn open_store(path: &Path) -> Result<TrajectoryStore, Failure> {
    if path.exists() {
        load_snapshot(path).map_err(Failure::User)
    } else {
        Ok(TrajectoryStore::new())
    }
}

fn persist(path: &Path, store: &TrajectoryStore) -> Result<(), Internal> {
    save_snapshot(path, store).map_err(Internal)
}

fn execute(cli: Cli) -> Result<String, Failure> {
    let mut store = open_store(&cli.store)?;
    let before = store.revision();
    let mut out = String::new();
    match cli.command {
        Command::LoadPoints { file } => ingest(IngestKind::Points, &file, &mut store, &mut out)?,
        Command::LoadRegions { file } => ingest(IngestKind::Regions, &file, &mut store, &mut out)?,
        Command::LoadDevices { file } => ingest(IngestKind::Devices, &file, &mut store, &mut out)?,
        Command::LoadActivities { file } => ingest(IngestKind::Activities, &file, &mut store, &mut out)?,
        Command::LoadObservations { file } => ingest(IngestKind::Observations, &file, &mut store, &mut out)?,
        Command::Segment { eps, tau, object } => {
            let params = SegmentationParams::new(eps, tau)?;
            let objects: Vec<ObjectId> = match object {
                Some(o) => {
                    let id = ObjectId::from(o);
                    if store.raw(&id).is_none() {
                        return Err(Error::NotFound {
                            kind: "object",
                            id: id.to_string(),
                        }
                        .into());
                    }
                    vec![id]
                }
                None => store.raw_trajectories().map(|r| r.object_id().clone()).collect(),
            };
            let mut stops = 0;
            for id in &objects {
                let st = detect_stops(store.raw(id).expect("listed"), &params);
                stops += st.stops().count();
                store.upsert(Entity::Structured(st))?;
            }
            let _ = writeln!(out, "segmented {} object(s), {stops} stop(s)", objects.len());
        }
        Command::Annotate => {
            if store.forest().is_empty() {
                return Err(
                    Error::MissingPrerequisite("no regions loaded; run `load-regions <file>` first".into()).into(),
                );
            }
            let structured: Vec<_> = store.structured_trajectories().cloned().collect();
            if structured.is_empty() {
                return Err(Error::MissingPrerequisite(
                    "nothing to annotate; run `segment --eps <m> --tau <s>` first".into(),
                )
                .into());
            }
            let mut tagged = 0;
            for st in &structured {
                let sem = annotate(st, store.forest());
                tagged += sem.annotated().count();
                store.upsert(Entity::Semantic(sem))?;
            }
            let _ = writeln!(
                out,
                "annotated {} object(s), {tagged} episode(s) tagged",
                structured.len()
            );
        }
        Command::Index { cell_size, time_bucket } => {
            let idx = store.rebuild_index(IndexConfig::new(cell_size, time_bucket)?)?;
            let _ = writeln!(out, "indexed {} bucket(s)", idx.bucket_count());
            // the index configuration is part of the snapshot
            persist(&cli.store, &store)?;
            return Ok(out);
        }
        Command::Query { dsl } => {
            let ast = parse(&dsl).map_err(Error::from)?;
            out = evaluate(&ast, &store)?.to_tsv();
        }
        Command::Export { kind, object } => {
            let ctx = PresentationContext::new(&store);
            let p = TrajectoryFactory::default().create(&kind, &ObjectId::from(object), &ctx)?;
            out = serde_json::to_string_pretty(&p).expect("presentations serialize to JSON");
            out.push('\n');
        }
        Command::Save { file } => {
            save_snapshot(&file, &store)?;
            let _ = writeln!(out, "saved {}", file.display());
        }
        Command::Load { file } => {
            let loaded = load_snapshot(&file)?;
            persist(&cli.store, &loaded)?;
            let _ = writeln!(out, "loaded {}", file.display());
            return Ok(out);
        }
    }
    if store.revision() != before {
        persist(&cli.store, &store)?;
    }
    Ok(out)
}

fn ingest(kind: IngestKind, file: &Path, store: &mut TrajectoryStore, out: &mut String) -> Result<(), Failure> {
    let report = load_file(kind, file, store)?;
    let _ = writeln!(out, "{report}");
    Ok(())
}
