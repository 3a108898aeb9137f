//! Planar spatial primitives.
//!
//! Coordinates are Cartesian meters in a caller-chosen projection. Nothing
//! here knows about geodesy; the [`SpatialReference`] tag is carried along
//! opaquely so that data from different sources can at least be told apart.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct GeoPoint {
    x: f64,
    y: f64,
}

impl GeoPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::validation(format!("coordinates must be finite, got ({x}, {y})")));
        }
        Ok(GeoPoint { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn distance(&self, other: &GeoPoint) -> f64 {
        distance(self, other)
    }
}

impl TryFrom<[f64; 2]> for GeoPoint {
    type Error = Error;

    fn try_from([x, y]: [f64; 2]) -> Result<Self> {
        GeoPoint::new(x, y)
    }
}

impl From<GeoPoint> for [f64; 2] {
    fn from(p: GeoPoint) -> Self {
        [p.x, p.y]
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Euclidean distance in meters.
pub fn distance(a: &GeoPoint, b: &GeoPoint) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Arithmetic mean of a non-empty point list.
pub fn centroid(points: &[GeoPoint]) -> Result<GeoPoint> {
    if points.is_empty() {
        return Err(Error::Argument("centroid of an empty point list".into()));
    }
    let n = points.len() as f64;
    // Summing in sorted order makes the result independent of input order.
    let sorted_sum = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.into_iter().sum::<f64>()
    };
    let sx = sorted_sum(points.iter().map(|p| p.x).collect());
    let sy = sorted_sum(points.iter().map(|p| p.y).collect());
    let (mut x, mut y) = (sx / n, sy / n);
    // Rounding may push the mean a hair outside the input hull; keep it
    // inside the bounding box.
    let bbox = Rect::bounding(points.iter().copied()).expect("non-empty");
    x = x.clamp(bbox.x_min, bbox.x_max);
    y = y.clamp(bbox.y_min, bbox.y_max);
    Ok(GeoPoint { x, y })
}

/// Signed area of the parallelogram (b - a) x (c - a).
fn orient(a: &GeoPoint, b: &GeoPoint, c: &GeoPoint) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn within_span(a: &GeoPoint, b: &GeoPoint, p: &GeoPoint) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// True when `p` lies on the closed segment `a`-`b`.
pub fn on_segment(a: &GeoPoint, b: &GeoPoint, p: &GeoPoint) -> bool {
    orient(a, b, p) == 0.0 && within_span(a, b, p)
}

/// Closed-segment intersection test, touching endpoints included.
pub fn segments_intersect(a: &GeoPoint, b: &GeoPoint, c: &GeoPoint, d: &GeoPoint) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && within_span(c, d, a))
        || (d2 == 0.0 && within_span(c, d, b))
        || (d3 == 0.0 && within_span(a, b, c))
        || (d4 == 0.0 && within_span(a, b, d))
}

/// Axis-aligned closed rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn bounding(points: impl IntoIterator<Item = GeoPoint>) -> Option<Rect> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let init = Rect {
            x_min: first.x,
            x_max: first.x,
            y_min: first.y,
            y_max: first.y,
        };
        Some(it.fold(init, |r, p| Rect {
            x_min: r.x_min.min(p.x),
            x_max: r.x_max.max(p.x),
            y_min: r.y_min.min(p.y),
            y_max: r.y_max.max(p.y),
        }))
    }

    pub fn contains(&self, p: &GeoPoint) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x_min <= other.x_max && other.x_min <= self.x_max && self.y_min <= other.y_max && other.y_min <= self.y_max
    }

    /// Corners in counter-clockwise order. Degenerate rectangles repeat corners.
    fn corners(&self) -> [GeoPoint; 4] {
        [
            GeoPoint {
                x: self.x_min,
                y: self.y_min,
            },
            GeoPoint {
                x: self.x_max,
                y: self.y_min,
            },
            GeoPoint {
                x: self.x_max,
                y: self.y_max,
            },
            GeoPoint {
                x: self.x_min,
                y: self.y_max,
            },
        ]
    }

    fn segment_touches(&self, a: &GeoPoint, b: &GeoPoint) -> bool {
        if self.contains(a) || self.contains(b) {
            return true;
        }
        let c = self.corners();
        (0..4).any(|i| segments_intersect(a, b, &c[i], &c[(i + 1) % 4]))
    }
}

/// An ordered chain of at least two vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<GeoPoint>", into = "Vec<GeoPoint>")]
pub struct Polyline {
    vertices: Vec<GeoPoint>,
}

impl Polyline {
    pub fn new(vertices: Vec<GeoPoint>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::validation(format!(
                "polyline needs at least 2 vertices, got {}",
                vertices.len()
            )));
        }
        Ok(Polyline { vertices })
    }

    pub fn vertices(&self) -> &[GeoPoint] {
        &self.vertices
    }
}

impl TryFrom<Vec<GeoPoint>> for Polyline {
    type Error = Error;

    fn try_from(v: Vec<GeoPoint>) -> Result<Self> {
        Polyline::new(v)
    }
}

impl From<Polyline> for Vec<GeoPoint> {
    fn from(p: Polyline) -> Self {
        p.vertices
    }
}

/// A simple polygon given by its ring; the closing edge is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<GeoPoint>", into = "Vec<GeoPoint>")]
pub struct Polygon {
    ring: Vec<GeoPoint>,
}

impl Polygon {
    /// Validates the ring. A trailing vertex equal to the first is treated
    /// as an explicit closure and dropped.
    pub fn new(mut ring: Vec<GeoPoint>) -> Result<Self> {
        if ring.len() > 3 && ring.first() == ring.last() {
            ring.pop();
        }
        let n = ring.len();
        if n < 3 {
            return Err(Error::validation(format!("polygon needs at least 3 vertices, got {n}")));
        }
        for i in 0..n {
            if ring[i] == ring[(i + 1) % n] {
                return Err(Error::validation(format!(
                    "polygon has repeated consecutive vertex {} at index {}",
                    ring[i],
                    (i + 1) % n
                )));
            }
        }
        for i in 0..n {
            let (a, b) = (&ring[i], &ring[(i + 1) % n]);
            for j in (i + 1)..n {
                let (c, d) = (&ring[j], &ring[(j + 1) % n]);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let bad = if adjacent {
                    // Shared vertex only; the far endpoints must not fold back
                    // onto the neighbouring edge.
                    let (shared_next, other) = if j == i + 1 { (d, a) } else { (c, b) };
                    on_segment(a, b, shared_next) || on_segment(c, d, other)
                } else {
                    segments_intersect(a, b, c, d)
                };
                if bad {
                    return Err(Error::validation(format!(
                        "polygon ring self-intersects between edges {i} and {j}"
                    )));
                }
            }
        }
        Ok(Polygon { ring })
    }

    pub fn ring(&self) -> &[GeoPoint] {
        &self.ring
    }

    pub fn edges(&self) -> impl Iterator<Item = (&GeoPoint, &GeoPoint)> {
        let n = self.ring.len();
        (0..n).map(move |i| (&self.ring[i], &self.ring[(i + 1) % n]))
    }

    pub fn bbox(&self) -> Rect {
        Rect::bounding(self.ring.iter().copied()).expect("polygon has vertices")
    }

    pub fn contains(&self, p: &GeoPoint) -> bool {
        point_in_polygon(p, self)
    }
}

impl TryFrom<Vec<GeoPoint>> for Polygon {
    type Error = Error;

    fn try_from(v: Vec<GeoPoint>) -> Result<Self> {
        Polygon::new(v)
    }
}

impl From<Polygon> for Vec<GeoPoint> {
    fn from(p: Polygon) -> Self {
        p.ring
    }
}

/// Boundary-inclusive point-in-polygon: explicit on-edge test, then
/// even-odd ray casting towards +x.
pub fn point_in_polygon(p: &GeoPoint, poly: &Polygon) -> bool {
    if poly.edges().any(|(a, b)| on_segment(a, b, p)) {
        return true;
    }
    let mut inside = false;
    for (a, b) in poly.edges() {
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Opaque spatial reference tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SpatialReference(String);

impl SpatialReference {
    pub const LOCAL_PLANAR: &'static str = "local-planar-m";

    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::validation("spatial reference name is empty"));
        }
        Ok(SpatialReference(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Default for SpatialReference {
    fn default() -> Self {
        SpatialReference(Self::LOCAL_PLANAR.to_string())
    }
}

impl TryFrom<String> for SpatialReference {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        SpatialReference::new(s)
    }
}

impl From<SpatialReference> for String {
    fn from(r: SpatialReference) -> Self {
        r.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Point(GeoPoint),
    Line(Polyline),
    Area(Polygon),
}

/// Point, line or area geometry tagged with its reference system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialObject {
    pub shape: Shape,
    #[serde(default)]
    pub crs: SpatialReference,
}

impl SpatialObject {
    pub fn point(p: GeoPoint) -> Self {
        SpatialObject {
            shape: Shape::Point(p),
            crs: SpatialReference::default(),
        }
    }

    pub fn line(l: Polyline) -> Self {
        SpatialObject {
            shape: Shape::Line(l),
            crs: SpatialReference::default(),
        }
    }

    pub fn area(a: Polygon) -> Self {
        SpatialObject {
            shape: Shape::Area(a),
            crs: SpatialReference::default(),
        }
    }

    pub fn vertices(&self) -> &[GeoPoint] {
        match &self.shape {
            Shape::Point(p) => std::slice::from_ref(p),
            Shape::Line(l) => l.vertices(),
            Shape::Area(a) => a.ring(),
        }
    }

    pub fn bbox(&self) -> Rect {
        Rect::bounding(self.vertices().iter().copied()).expect("geometry has vertices")
    }

    /// The point used when a single location is needed (tables, region lookup).
    pub fn representative_point(&self) -> GeoPoint {
        match &self.shape {
            Shape::Point(p) => *p,
            _ => centroid(self.vertices()).expect("geometry has vertices"),
        }
    }

    /// Exact closed intersection with an axis-aligned rectangle.
    pub fn intersects_rect(&self, r: &Rect) -> bool {
        if !self.bbox().overlaps(r) {
            return false;
        }
        match &self.shape {
            Shape::Point(p) => r.contains(p),
            Shape::Line(l) => l.vertices().windows(2).any(|w| r.segment_touches(&w[0], &w[1])),
            Shape::Area(a) => {
                a.edges().any(|(p, q)| r.segment_touches(p, q)) || r.corners().iter().any(|c| point_in_polygon(c, a))
            }
        }
    }
}
