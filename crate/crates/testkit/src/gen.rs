//! Random queries. `ast` builds syntax trees directly; `canonical_text`
//! writes query strings token by token in canonical spelling, without
//! going through the printer. Also random position traces.

use mobtraj_core::geometry::GeoPoint;
use mobtraj_core::model::{validate_raw, RawPoint, RawTrajectory};
use mobtraj_core::query::{
    field_table, CmpOp, DurationUnit, FieldDef, FieldType, Literal, Predicate, Projection, QueryAst, Source,
};
use mobtraj_core::store::STWindow;
use mobtraj_core::time::{TimeInstant, TimeInterval};
use rand::seq::SliceRandom;
use rand::Rng;

const OPS: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
const UNITS: [DurationUnit; 3] = [DurationUnit::Seconds, DurationUnit::Minutes, DurationUnit::Hours];
const WORDS: [&str; 10] = [
    "Main Road",
    "bank",
    "road",
    "%air%",
    "a%b",
    "",
    "MO-01",
    "x y z",
    "Gate A",
    "%",
];

fn word(rng: &mut impl Rng) -> String {
    if rng.gen_bool(0.7) {
        WORDS.choose(rng).expect("non-empty").to_string()
    } else {
        let len = rng.gen_range(0..8);
        (0..len)
            .map(|_| *b"abcXYZ019 _-%.#".choose(rng).expect("non-empty") as char)
            .collect()
    }
}

fn float(rng: &mut impl Rng) -> f64 {
    match rng.gen_range(0..5) {
        0 => rng.gen_range(-10.0..10.0),
        1 => rng.gen_range(-1e6..1e6),
        2 => f64::from(rng.gen_range(-1000..1000)),
        3 => rng.gen_range(-1e-3..1e-3),
        _ => rng.gen::<f64>() * 10f64.powi(rng.gen_range(-30..30)),
    }
}

fn usable(fields: &'static [FieldDef], layer: bool) -> Vec<&'static FieldDef> {
    fields.iter().filter(|f| layer || !f.layer_only).collect()
}

fn literal(rng: &mut impl Rng, ty: FieldType) -> Literal {
    match ty {
        FieldType::Str => Literal::Str(word(rng)),
        FieldType::Num if rng.gen_bool(0.5) => Literal::Int(rng.gen_range(-100_000..100_000)),
        FieldType::Num => Literal::Num(float(rng)),
        FieldType::Time => Literal::Int(if rng.gen_bool(0.1) {
            rng.gen()
        } else {
            rng.gen_range(0..100_000)
        }),
        FieldType::Duration => Literal::Duration {
            value: rng.gen_range(0..100_000),
            unit: *UNITS.choose(rng).expect("non-empty"),
        },
    }
}

fn window(rng: &mut impl Rng) -> STWindow {
    let (a, b) = (float(rng), float(rng));
    let (c, d) = (float(rng), float(rng));
    let (t0, t1) = (rng.gen_range(0..1_000_000), rng.gen_range(0..1_000_000));
    STWindow::new(
        a.min(b),
        a.max(b),
        c.min(d),
        c.max(d),
        TimeInterval::from_secs(t0.min(t1), t0.max(t1)).expect("ordered"),
    )
    .expect("ordered")
}

/// A random valid query.
pub fn ast(rng: &mut impl Rng) -> QueryAst {
    let source = *Source::ALL.choose(rng).expect("non-empty");
    let fields = field_table(source);
    let mut predicates = Vec::new();
    let layer = rng.gen_bool(0.3);
    if layer {
        predicates.push(Predicate::IntersectsLayer(word(rng)));
    }
    let candidates = usable(fields, layer);
    for _ in 0..rng.gen_range(0..4) {
        let p = match rng.gen_range(0..6) {
            0 => Predicate::IntersectsLayer(word(rng)),
            1 => Predicate::WithinRegion(word(rng)),
            2 => Predicate::InWindow(window(rng)),
            3 => {
                let strs: Vec<_> = candidates.iter().filter(|f| f.ty == FieldType::Str).collect();
                match strs.choose(rng) {
                    Some(f) => Predicate::Like {
                        field: f.name.to_string(),
                        pattern: word(rng),
                    },
                    None => continue,
                }
            }
            _ => {
                let f = candidates.choose(rng).expect("every source has plain fields");
                Predicate::Compare {
                    field: f.name.to_string(),
                    op: *OPS.choose(rng).expect("non-empty"),
                    value: literal(rng, f.ty),
                }
            }
        };
        predicates.push(p);
    }
    predicates.shuffle(rng);
    let (group_by, projection) = if rng.gen_bool(0.3) {
        let g = candidates.choose(rng).expect("non-empty").name.to_string();
        (
            Some(g),
            if rng.gen_bool(0.5) {
                Projection::Count
            } else {
                Projection::All
            },
        )
    } else {
        let projection = match rng.gen_range(0..3) {
            0 => Projection::All,
            1 => Projection::Count,
            _ => {
                let n = rng.gen_range(1..=candidates.len());
                Projection::Fields(
                    (0..n)
                        .map(|_| candidates.choose(rng).expect("non-empty").name.to_string())
                        .collect(),
                )
            }
        };
        (None, projection)
    };
    QueryAst {
        source,
        predicates,
        group_by,
        projection,
    }
}

fn decimal(rng: &mut impl Rng, always_point: bool) -> String {
    let sign = if rng.gen_bool(0.3) { "-" } else { "" };
    let int = rng.gen_range(0..100_000u32).to_string();
    let frac_digits = rng.gen_range(0..4);
    if frac_digits == 0 {
        return if always_point {
            format!("{sign}{int}.0")
        } else {
            format!("{sign}{int}")
        };
    }
    let mut frac: String = (0..frac_digits)
        .map(|_| char::from(b'0' + rng.gen_range(0..10u8)))
        .collect();
    frac.push(char::from(b'1' + rng.gen_range(0..9u8)));
    format!("{sign}{int}.{frac}")
}

fn literal_text(rng: &mut impl Rng, ty: FieldType) -> String {
    match ty {
        FieldType::Str => format!("\"{}\"", word(rng)),
        FieldType::Num if rng.gen_bool(0.5) => rng.gen_range(-100_000..100_000).to_string(),
        FieldType::Num => decimal(rng, true),
        FieldType::Time => rng.gen_range(0..10_000_000).to_string(),
        FieldType::Duration => format!(
            "{}{}",
            rng.gen_range(0..100_000),
            ["s", "min", "h"].choose(rng).expect("non-empty")
        ),
    }
}

fn ordered_decimals(rng: &mut impl Rng) -> (String, String) {
    let (a, b) = (decimal(rng, false), decimal(rng, false));
    let (fa, fb): (f64, f64) = (a.parse().expect("decimal"), b.parse().expect("decimal"));
    let canon = |s: String, v: f64| if v == 0.0 { "0".to_string() } else { s };
    let (a, b) = (canon(a, fa), canon(b, fb));
    if fa <= fb {
        (a, b)
    } else {
        (b, a)
    }
}

/// A random valid query string already in canonical form.
pub fn canonical_text(rng: &mut impl Rng) -> String {
    let source = *Source::ALL.choose(rng).expect("non-empty");
    let mut out = source.as_str().to_string();
    let layer = rng.gen_bool(0.3);
    let candidates = usable(field_table(source), layer);
    let mut preds = Vec::new();
    if layer {
        preds.push(format!("intersects(layer \"{}\")", word(rng)));
    }
    for _ in 0..rng.gen_range(0..4) {
        let p = match rng.gen_range(0..6) {
            0 => format!("intersects(layer \"{}\")", word(rng)),
            1 => format!("within(region \"{}\")", word(rng)),
            2 => {
                let (x0, x1) = ordered_decimals(rng);
                let (y0, y1) = ordered_decimals(rng);
                let (t0, t1) = (rng.gen_range(0..1_000_000), rng.gen_range(0..1_000_000));
                format!("window({x0}, {x1}, {y0}, {y1}, {}, {})", t0.min(t1), t0.max(t1))
            }
            3 => {
                let strs: Vec<_> = candidates.iter().filter(|f| f.ty == FieldType::Str).collect();
                match strs.choose(rng) {
                    Some(f) => format!("{} like \"{}\"", f.name, word(rng)),
                    None => continue,
                }
            }
            _ => {
                let f = candidates.choose(rng).expect("non-empty");
                let op = OPS.choose(rng).expect("non-empty").as_str();
                format!("{} {op} {}", f.name, literal_text(rng, f.ty))
            }
        };
        preds.push(p);
    }
    preds.shuffle(rng);
    for (i, p) in preds.iter().enumerate() {
        out.push_str(if i == 0 { " where " } else { " and " });
        out.push_str(p);
    }
    if rng.gen_bool(0.3) {
        out.push_str(" group by ");
        out.push_str(candidates.choose(rng).expect("non-empty").name);
        if rng.gen_bool(0.5) {
            out.push_str(" select count");
        }
    } else {
        match rng.gen_range(0..3) {
            0 => {}
            1 => out.push_str(" select count"),
            _ => {
                let n = rng.gen_range(1..=candidates.len());
                let names: Vec<&str> = (0..n)
                    .map(|_| candidates.choose(rng).expect("non-empty").name)
                    .collect();
                out.push_str(" select ");
                out.push_str(&names.join(", "));
            }
        }
    }
    out
}

/// A trace of `n` fixes mixing dwells (small jitter) and travel, with
/// strictly increasing irregular timestamps.
pub fn trace(rng: &mut impl Rng, n: usize) -> Vec<(f64, f64, i64)> {
    let mut out = Vec::with_capacity(n);
    let (mut x, mut y) = (rng.gen_range(-500.0..500.0), rng.gen_range(-500.0..500.0));
    let mut t = rng.gen_range(0..1000);
    let mut dwelling = rng.gen_bool(0.5);
    while out.len() < n {
        if rng.gen_bool(0.15) {
            dwelling = !dwelling;
        }
        if dwelling {
            out.push((x + rng.gen_range(-10.0..10.0), y + rng.gen_range(-10.0..10.0), t));
        } else {
            x += rng.gen_range(-80.0..80.0);
            y += rng.gen_range(-80.0..80.0);
            out.push((x, y, t));
        }
        t += rng.gen_range(1..120);
    }
    out
}

pub fn raw_trajectory(object: &str, pts: &[(f64, f64, i64)]) -> RawTrajectory {
    let points = pts
        .iter()
        .map(|&(x, y, t)| {
            RawPoint::new(
                GeoPoint::new(x, y).expect("finite"),
                TimeInstant::new(t).expect("in range"),
            )
        })
        .collect();
    validate_raw(object, points).expect("valid trace")
}
