//! Planar geometry: points, polyline routes, truncation arithmetic and
//! per-robot local coordinate frames.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance used for visibility-threshold bands and point-set matching.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn approx_eq(&self, other: &Point, eps: f64) -> bool {
        (self.x - other.x).abs() <= eps && (self.y - other.y).abs() <= eps
    }

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }
}

pub fn squared_distance(p: Point, q: Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    dx * dx + dy * dy
}

pub fn distance(p: Point, q: Point) -> f64 {
    squared_distance(p, q).sqrt()
}

/// Length of the realized prefix of a route of length `total` when the
/// adversary stops the robot at truncation parameter `z`.
///
/// Routes no longer than `delta` are always traversed completely.
pub fn truncated_length(total: f64, delta: f64, z: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return invalid(format!("truncation parameter z={z} outside [0,1]"));
    }
    if total < 0.0 || delta < 0.0 {
        return invalid(format!("negative length (total={total}, delta={delta})"));
    }
    if total <= delta {
        return Ok(total);
    }
    Ok(delta + z * (total - delta))
}

/// A simple polyline. A single vertex denotes the stay-put route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Route {
    vertices: Vec<Point>,
    cumulative: Vec<f64>,
}

impl TryFrom<Vec<Point>> for Route {
    type Error = Error;

    fn try_from(v: Vec<Point>) -> Result<Self> {
        Route::new(v)
    }
}

impl From<Route> for Vec<Point> {
    fn from(r: Route) -> Self {
        r.vertices
    }
}

impl Route {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.is_empty() {
            return invalid("route needs at least one vertex");
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return invalid(format!("non-finite route vertex {p:?}"));
        }
        let mut cumulative = Vec::with_capacity(vertices.len());
        cumulative.push(0.0);
        for w in vertices.windows(2) {
            let len = distance(w[0], w[1]);
            if len == 0.0 {
                return Err(Error::NonSimpleRoute(format!(
                    "zero-length segment at {:?}",
                    w[0]
                )));
            }
            cumulative.push(cumulative.last().unwrap() + len);
        }
        check_simple(&vertices)?;
        Ok(Route {
            vertices,
            cumulative,
        })
    }

    pub fn stay(p: Point) -> Self {
        Route {
            vertices: vec![p],
            cumulative: vec![0.0],
        }
    }

    pub fn segment(from: Point, to: Point) -> Result<Self> {
        if from == to {
            Ok(Route::stay(from))
        } else {
            Route::new(vec![from, to])
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn start(&self) -> Point {
        self.vertices[0]
    }

    pub fn end(&self) -> Point {
        *self.vertices.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn is_stay(&self) -> bool {
        self.vertices.len() == 1
    }

    /// Point at arclength `s`. Both endpoints are returned exactly.
    pub fn point_along(&self, s: f64) -> Result<Point> {
        let len = self.length();
        if !(s >= -EPS && s <= len + EPS) {
            return invalid(format!("arclength {s} outside [0, {len}]"));
        }
        if s <= 0.0 {
            return Ok(self.start());
        }
        if s >= len {
            return Ok(self.end());
        }
        // first cumulative entry strictly greater than s closes the segment
        let k = self.cumulative.partition_point(|&c| c <= s);
        let (a, b) = (self.vertices[k - 1], self.vertices[k]);
        let seg = self.cumulative[k] - self.cumulative[k - 1];
        Ok(a.lerp(b, (s - self.cumulative[k - 1]) / seg))
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Result<Route> {
        if self.is_stay() {
            return Ok(Route::stay(f(self.start())));
        }
        Route::new(self.vertices.iter().map(|&p| f(p)).collect())
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    let (u, v) = (a.sub(o), b.sub(o));
    u.x * v.y - u.y * v.x
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

fn check_simple(v: &[Point]) -> Result<()> {
    let nseg = v.len().saturating_sub(1);
    for i in 0..nseg {
        // adjacent segments may only share their common vertex
        if i + 1 < nseg {
            let (a, b, c) = (v[i], v[i + 1], v[i + 2]);
            let ab = b.sub(a);
            let bc = c.sub(b);
            if cross(a, b, c) == 0.0 && ab.x * bc.x + ab.y * bc.y < 0.0 {
                return Err(Error::NonSimpleRoute(format!(
                    "segments {i} and {} fold back at {b:?}",
                    i + 1
                )));
            }
        }
        for k in i + 2..nseg {
            if segments_intersect(v[i], v[i + 1], v[k], v[k + 1]) {
                return Err(Error::NonSimpleRoute(format!(
                    "segments {i} and {k} intersect"
                )));
            }
        }
    }
    Ok(())
}

/// A robot's private coordinate system: origin at its current position,
/// fixed rotation and unit length relative to the global frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFrame {
    pub origin: Point,
    pub rotation: f64,
    pub unit: f64,
}

impl LocalFrame {
    pub fn new(origin: Point, rotation: f64, unit: f64) -> Result<Self> {
        if !(unit > 0.0 && unit.is_finite()) {
            return invalid(format!("frame unit must be positive, got {unit}"));
        }
        if !rotation.is_finite() || !origin.is_finite() {
            return invalid("frame parameters must be finite");
        }
        Ok(LocalFrame {
            origin,
            rotation,
            unit,
        })
    }

    pub fn identity_at(origin: Point) -> Self {
        LocalFrame {
            origin,
            rotation: 0.0,
            unit: 1.0,
        }
    }

    pub fn with_origin(&self, origin: Point) -> Self {
        LocalFrame { origin, ..*self }
    }

    pub fn to_local(&self, g: Point) -> Point {
        let d = g.sub(self.origin);
        let (sin, cos) = self.rotation.sin_cos();
        Point::new(
            (cos * d.x + sin * d.y) / self.unit,
            (-sin * d.x + cos * d.y) / self.unit,
        )
    }

    pub fn to_global(&self, l: Point) -> Point {
        if l == Point::ORIGIN {
            return self.origin;
        }
        let (sin, cos) = self.rotation.sin_cos();
        Point::new(
            self.origin.x + self.unit * (cos * l.x - sin * l.y),
            self.origin.y + self.unit * (sin * l.x + cos * l.y),
        )
    }
}
