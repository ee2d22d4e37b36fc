//! Planar primitives and guarded predicates.
//!
//! Every tolerance here is relative: it is multiplied by a length scale of
//! `max(1, largest coordinate magnitude of the inputs)`. For scenes built
//! around a circle centred near the origin this is the usual
//! `max(1, circumradius)` scene scale.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Relative threshold below which points are treated as coincident.
pub const DEGENERACY_EPS: f64 = 1e-9;
/// Absolute threshold on `|a1*b2 - a2*b1|` for two normalized lines.
pub const PARALLEL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("points coincide (separation {separation:e} below threshold)")]
    CoincidentPoints { separation: f64 },
    #[error("lines are nearly parallel (determinant {det:e})")]
    NearParallel { det: f64 },
    #[error("point cloud is degenerate: all points coincide")]
    DegenerateCloud,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("circumcircle input points are collinear")]
    CollinearInput,
    #[error("circle radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("coordinates must be finite")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Rotate about the origin by `angle` radians (counterclockwise).
    #[inline]
    pub fn rotated(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Rotate about `pivot` by `angle` radians.
    pub fn rotated_about(self, pivot: Point, angle: f64) -> Point {
        pivot + (self - pivot).rotated(angle)
    }

    /// Polar angle in `(-pi, pi]`.
    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn magnitude(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Line in implicit form `a*x + b*y + c = 0` with `a^2 + b^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Line {
    /// Build from raw coefficients, normalizing `(a, b)` to unit length.
    /// Returns `None` when `(a, b)` vanishes or anything is non-finite.
    pub fn from_coefficients(a: f64, b: f64, c: f64) -> Option<Line> {
        let n = a.hypot(b);
        if !(n > 0.0) || !n.is_finite() || !c.is_finite() {
            return None;
        }
        Some(Line { a: a / n, b: b / n, c: c / n })
    }

    /// Line through `p` with unit normal `normal`.
    pub fn with_normal(p: Point, normal: Point) -> Option<Line> {
        let n = normal.norm();
        if !(n > 0.0) {
            return None;
        }
        let (a, b) = (normal.x / n, normal.y / n);
        Some(Line { a, b, c: -(a * p.x + b * p.y) })
    }

    #[inline]
    pub fn normal(&self) -> Point {
        Point::new(self.a, self.b)
    }

    /// Unit direction, the normal rotated clockwise by 90 degrees, so that
    /// `line_through(p, q)` has direction along `q - p`.
    #[inline]
    pub fn direction(&self) -> Point {
        Point::new(self.b, -self.a)
    }

    /// Signed distance of `p` from the line.
    #[inline]
    pub fn eval(&self, p: Point) -> f64 {
        self.a * p.x + self.b * p.y + self.c
    }

    #[inline]
    pub fn distance(&self, p: Point) -> f64 {
        self.eval(p).abs()
    }

    #[inline]
    pub fn flipped(&self) -> Line {
        Line { a: -self.a, b: -self.b, c: -self.c }
    }

    /// The point of the line closest to the origin.
    pub fn anchor(&self) -> Point {
        Point::new(-self.c * self.a, -self.c * self.b)
    }

    pub fn is_normalized(&self) -> bool {
        (self.a * self.a + self.b * self.b - 1.0).abs() <= 1e-12
    }

    /// Image of the line under `p -> rot(p) * scale + shift`.
    pub fn transformed(&self, rotation: f64, scale: f64, shift: Point) -> Line {
        let n = self.normal().rotated(rotation);
        let p = self.anchor().rotated(rotation) * scale + shift;
        Line { a: n.x, b: n.y, c: -(n.x * p.x + n.y * p.y) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Result<Circle, GeometryError> {
        if !center.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeometryError::InvalidRadius(radius));
        }
        Ok(Circle { center, radius })
    }

    pub fn unit() -> Circle {
        Circle { center: Point::ORIGIN, radius: 1.0 }
    }

    /// Reference length for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.radius.max(1.0)
    }
}

/// Largest perpendicular offset in a point cloud and the index it occurred at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub which: usize,
}

fn local_scale(points: &[Point]) -> f64 {
    points.iter().fold(1.0_f64, |s, p| s.max(p.magnitude()))
}

pub fn point_on_circle(circle: &Circle, angle: f64) -> Point {
    let (s, c) = angle.sin_cos();
    Point::new(circle.center.x + circle.radius * c, circle.center.y + circle.radius * s)
}

/// Line through `p` and `q`; `(a, b)` is the left-hand normal of `q - p`.
pub fn line_through(p: Point, q: Point) -> Result<Line, GeometryError> {
    let d = q - p;
    let separation = d.norm();
    if !(separation > DEGENERACY_EPS * local_scale(&[p, q])) {
        return Err(GeometryError::CoincidentPoints { separation });
    }
    let (a, b) = (-d.y / separation, d.x / separation);
    // Anchor at the midpoint so both endpoints carry the same rounding.
    let m = Point::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
    Ok(Line { a, b, c: -(a * m.x + b * m.y) })
}

pub fn foot_of_perpendicular(p: Point, line: &Line) -> Point {
    let s = line.eval(p);
    Point::new(p.x - s * line.a, p.y - s * line.b)
}

pub fn line_intersection(l1: &Line, l2: &Line) -> Result<Point, GeometryError> {
    let det = l1.a * l2.b - l2.a * l1.b;
    if det.abs() < PARALLEL_EPS {
        return Err(GeometryError::NearParallel { det });
    }
    Ok(Point::new(
        (l1.b * l2.c - l2.b * l1.c) / det,
        (l1.c * l2.a - l2.c * l1.a) / det,
    ))
}

/// Total-least-squares line through `points` and the worst perpendicular
/// offset from it.
///
/// The normal is the minor eigenvector of the centred scatter matrix,
/// oriented so that `a >= 0` (ties broken by `b >= 0`).
pub fn collinearity_residual(points: &[Point]) -> Result<(Line, ResidualReport), GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::TooFewPoints { needed: 3, got: points.len() });
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let line = tls_line(points, local_scale(points))?;
    Ok((line, residual_report(&line, points)))
}

pub(crate) fn tls_line(points: &[Point], scale: f64) -> Result<Line, GeometryError> {
    let inv_n = 1.0 / points.len() as f64;
    let centroid = points.iter().fold(Point::ORIGIN, |acc, &p| acc + p) * inv_n;

    let (mut sxx, mut sxy, mut syy, mut spread) = (0.0, 0.0, 0.0, 0.0_f64);
    for &p in points {
        let d = p - centroid;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
        spread = spread.max(d.norm());
    }
    if !(spread > DEGENERACY_EPS * scale) {
        return Err(GeometryError::DegenerateCloud);
    }

    // Principal axis of the scatter; the normal is perpendicular to it.
    let major = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (s, c) = major.sin_cos();
    let (mut a, mut b) = (-s, c);
    if a < 0.0 || (a == 0.0 && b < 0.0) {
        a = -a;
        b = -b;
    }
    Ok(Line { a, b, c: -(a * centroid.x + b * centroid.y) })
}

pub(crate) fn residual_report(line: &Line, points: &[Point]) -> ResidualReport {
    let mut report = ResidualReport { max_abs: 0.0, which: 0 };
    for (i, &p) in points.iter().enumerate() {
        let d = line.distance(p);
        if d > report.max_abs {
            report = ResidualReport { max_abs: d, which: i };
        }
    }
    report
}

pub fn circumcircle(a: Point, b: Point, c: Point) -> Result<Circle, GeometryError> {
    let scale = local_scale(&[a, b, c]);
    match collinearity_residual(&[a, b, c]) {
        Ok((_, r)) if r.max_abs > DEGENERACY_EPS * scale => {}
        Ok(_) | Err(GeometryError::DegenerateCloud) => return Err(GeometryError::CollinearInput),
        Err(e) => return Err(e),
    }
    // Solve relative to the centroid so every permutation sees the same origin.
    let g = (a + b + c) * (1.0 / 3.0);
    let (a, b, c) = (a - g, b - g, c - g);
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    let (a2, b2, c2) = (a.dot(a), b.dot(b), c.dot(c));
    let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    let center = Point::new(ux, uy);
    let radius = (center.distance(a) + center.distance(b) + center.distance(c)) / 3.0;
    Circle::new(center + g, radius)
}
