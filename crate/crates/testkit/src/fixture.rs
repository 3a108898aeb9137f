//! Seeded synthetic city: 12 regions, 4 devices, 10 objects with 200
//! fixes each, 8 activities and a handful of observations.
//!
//! Objects alternate between dwelling at a waypoint (jittered fixes a
//! minute apart) and travelling in a straight line to the next one.

use std::fmt::Write;
use std::path::Path;

use mobtraj_core::ingest::{load_str, IngestKind};
use mobtraj_core::segmentation::{annotate, detect_stops, SegmentationParams};
use mobtraj_core::store::{Entity, IndexConfig, TrajectoryStore};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const OBJECTS: usize = 10;
pub const POINTS_PER_OBJECT: usize = 200;
pub const EPS: f64 = 30.0;
pub const TAU: i64 = 300;
pub const STEP_SECS: i64 = 60;

/// The Hypermarket tree, two roads, an airport with a gate, and two
/// neighbourhood sites covering everything else. Site ids sort after the
/// polygons so depth ties resolve to the named place.
pub const REGIONS: &str = r#"{"id":"hyper","name":"Hypermarket","category":"commercial","parent":null,"geometry":{"type":"polygon","ring":[[200,200],[800,200],[800,800],[200,800]]}}
{"id":"parking","name":"prepaid parking","category":"parking","parent":"hyper","geometry":{"type":"polygon","ring":[[220,220],[400,220],[400,400],[220,400]]}}
{"id":"bank","name":"bank","category":"bank","parent":"hyper","geometry":{"type":"polygon","ring":[[420,220],[500,220],[500,300],[420,300]]}}
{"id":"supermarket","name":"supermarket","category":"commercial","parent":"hyper","geometry":{"type":"polygon","ring":[[520,220],[780,220],[780,500],[520,500]]}}
{"id":"dept-store","name":"department store","category":"commercial","parent":"hyper","geometry":{"type":"polygon","ring":[[220,520],[500,520],[500,780],[220,780]]}}
{"id":"restaurant","name":"restaurant","category":"restaurant","parent":"hyper","geometry":{"type":"polygon","ring":[[600,600],[780,600],[780,780],[600,780]]}}
{"id":"main-road","name":"Main Road","category":"road","parent":null,"geometry":{"type":"polygon","ring":[[0,1000],[2000,1000],[2000,1040],[0,1040]]}}
{"id":"ring-road","name":"Ring Road","category":"road","parent":null,"geometry":{"type":"polygon","ring":[[1000,0],[1040,0],[1040,2000],[1000,2000]]}}
{"id":"airport","name":"Airport","category":"transport","parent":null,"geometry":{"type":"polygon","ring":[[1400,1400],[1900,1400],[1900,1900],[1400,1900]]}}
{"id":"gate-a","name":"Gate A","category":"transport","parent":"airport","geometry":{"type":"polygon","ring":[[1600,1600],[1700,1600],[1700,1700],[1600,1700]]}}
{"id":"zone-east","name":"East","category":"neighbourhood","parent":null,"geometry":{"type":"site","point":[1500,500]}}
{"id":"zone-north","name":"North","category":"neighbourhood","parent":null,"geometry":{"type":"site","point":[500,1500]}}
"#;

pub const DEVICES: &str = "device_id,kind,reliability,description
gps-1,GPS,0.95,handset GPS
cam-1,Camera,0.7,entrance camera
cell-1,CellLocation,0.6,cell tower triangulation
rfid-1,RFID,0.99,loyalty card reader
";

const DEVICE_IDS: [&str; 4] = ["gps-1", "cam-1", "cell-1", "rfid-1"];

const WAYPOINTS: [(f64, f64); 14] = [
    (310.0, 310.0),   // parking
    (460.0, 260.0),   // bank
    (650.0, 360.0),   // supermarket
    (360.0, 650.0),   // department store
    (690.0, 690.0),   // restaurant
    (550.0, 550.0),   // hypermarket concourse
    (1200.0, 1020.0), // main road
    (1020.0, 300.0),  // ring road
    (1500.0, 1500.0), // airport
    (1650.0, 1650.0), // gate
    (300.0, 1600.0),  // north
    (1600.0, 300.0),  // east
    (1800.0, 1100.0), // east, near the main road
    (1020.0, 1700.0), // ring road, north
];

/// File contents in the ingest formats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureFiles {
    pub regions: String,
    pub devices: String,
    pub points: String,
    pub activities: String,
    pub observations: String,
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

pub fn object_id(i: usize) -> String {
    format!("MO-{i:02}")
}

/// Fixes of one object as `(x, y, t, device)`.
fn simulate(rng: &mut ChaCha8Rng, start: i64) -> Vec<(f64, f64, i64, String)> {
    let device = DEVICE_IDS[rng.gen_range(0..DEVICE_IDS.len())];
    let mut out = Vec::with_capacity(POINTS_PER_OBJECT);
    let mut t = start;
    let mut here = WAYPOINTS[rng.gen_range(0..WAYPOINTS.len())];
    let mut push = |x: f64, y: f64, rng: &mut ChaCha8Rng, out: &mut Vec<_>| {
        let dev = if rng.gen_bool(0.85) {
            device.to_string()
        } else {
            String::new()
        };
        out.push((round1(x), round1(y), t, dev));
        t += STEP_SECS;
    };
    while out.len() < POINTS_PER_OBJECT {
        let dwell = rng.gen_range(3..=20);
        for _ in 0..dwell {
            if out.len() == POINTS_PER_OBJECT {
                break;
            }
            let (jx, jy) = (rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
            push(here.0 + jx, here.1 + jy, rng, &mut out);
        }
        let next = loop {
            let w = WAYPOINTS[rng.gen_range(0..WAYPOINTS.len())];
            if w != here {
                break w;
            }
        };
        let speed = rng.gen_range(4.0..12.0);
        let dist = (next.0 - here.0).hypot(next.1 - here.1);
        let steps = (dist / (speed * STEP_SECS as f64)).ceil() as usize;
        for k in 1..steps {
            if out.len() == POINTS_PER_OBJECT {
                break;
            }
            let f = k as f64 / steps as f64;
            push(
                here.0 + f * (next.0 - here.0),
                here.1 + f * (next.1 - here.1),
                rng,
                &mut out,
            );
        }
        here = next;
    }
    out
}

pub fn fixture_files(seed: u64) -> FixtureFiles {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = String::from("object_id,t,x,y,device_id\n");
    let mut activities = String::from("id,object_id,kind,label,t_begin,t_end,x,y\n");
    let mut observations = String::from("id,event_id,feature,value,unit,t\n");
    let labels = [
        "shopping",
        "send email",
        "lunch",
        "phone call",
        "check in",
        "video call",
        "parking",
        "online order",
    ];
    for i in 0..OBJECTS {
        let object = object_id(i);
        let start = i as i64 * 37;
        let fixes = simulate(&mut rng, start);
        for (x, y, t, dev) in &fixes {
            let _ = writeln!(points, "{object},{t},{x},{y},{dev}");
        }
        if i < labels.len() {
            let k = rng.gen_range(0..fixes.len() - 20);
            let (x, y, t_begin, _) = &fixes[k];
            let t_end = t_begin + rng.gen_range(10..60) * STEP_SECS;
            if i % 2 == 0 {
                let _ = writeln!(
                    activities,
                    "act-{i},{object},Physical,{},{t_begin},{t_end},{x},{y}",
                    labels[i]
                );
            } else {
                let _ = writeln!(activities, "act-{i},{object},Virtual,{},{t_begin},{t_end},,", labels[i]);
            }
        }
        let (_, _, t0, _) = &fixes[0];
        let _ = writeln!(
            observations,
            "obs-{i},{object}#{t0},fuel_level,{},L,{t0}",
            rng.gen_range(5..60)
        );
    }
    FixtureFiles {
        regions: REGIONS.to_string(),
        devices: DEVICES.to_string(),
        points,
        activities,
        observations,
    }
}

/// Loads files into a fresh store in dependency order.
pub fn load_files(files: &FixtureFiles) -> TrajectoryStore {
    let mut store = TrajectoryStore::new();
    for (kind, name, text) in [
        (IngestKind::Regions, "regions.jsonl", &files.regions),
        (IngestKind::Devices, "devices.csv", &files.devices),
        (IngestKind::Points, "points.csv", &files.points),
        (IngestKind::Activities, "activities.csv", &files.activities),
        (IngestKind::Observations, "observations.csv", &files.observations),
    ] {
        let report = load_str(kind, Path::new(name), text, &mut store).expect("fixture loads");
        assert_eq!(report.rejected, 0, "fixture rows rejected: {report}");
    }
    store
}

/// Segments and annotates every object.
pub fn enrich(store: &mut TrajectoryStore) {
    let params = SegmentationParams::new(EPS, TAU).expect("valid params");
    let raws: Vec<_> = store.raw_trajectories().cloned().collect();
    for raw in &raws {
        store
            .upsert(Entity::Structured(detect_stops(raw, &params)))
            .expect("segment");
    }
    let structured: Vec<_> = store.structured_trajectories().cloned().collect();
    for st in &structured {
        let sem = annotate(st, store.forest());
        store.upsert(Entity::Semantic(sem)).expect("annotate");
    }
}

/// Loaded, segmented, annotated and indexed.
pub fn fixture_store(seed: u64) -> TrajectoryStore {
    let mut store = load_files(&fixture_files(seed));
    enrich(&mut store);
    store.rebuild_index(IndexConfig::default()).expect("index");
    store
}
