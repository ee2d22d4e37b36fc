//! Simson-Wallace lines of triangles and of inscribed n-gons.
//!
//! For a triangle the line carries the three feet of the perpendiculars
//! dropped from a probe point on the circumcircle onto the side lines. For
//! n > 3 vertices the construction recurses: omitting each vertex in turn
//! gives n inscribed (n-1)-gons, and the feet of the perpendiculars from the
//! probe onto their n lines are again collinear.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::geometry::{
    foot_of_perpendicular, line_through, point_on_circle, residual_report, tls_line, Circle,
    GeometryError, Line, Point, ResidualReport, DEGENERACY_EPS,
};

/// Probe angles closer than this to a vertex mark the result degenerate.
pub const VERTEX_EPS: f64 = 1e-6;
pub const MAX_VERTICES: usize = 12;

const TRIANGLE_COLLINEARITY_TOL: f64 = 1e-10;
const COLLINEARITY_TOL_CAP: f64 = 1e-7;

/// Relative collinearity tolerance for an n-gon: 1e-10 for triangles,
/// loosened 100x per recursion level and capped at 1e-7.
pub fn collinearity_tol(n: usize) -> f64 {
    let levels = n.saturating_sub(3) as i32;
    (TRIANGLE_COLLINEARITY_TOL * 100f64.powi(levels)).min(COLLINEARITY_TOL_CAP)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolygonError {
    #[error("polygon needs between 3 and {MAX_VERTICES} vertices, got {0}")]
    VertexCount(usize),
    #[error("vertex angle {0} is not finite")]
    NonFinite(f64),
    #[error("vertices {first} and {second} are closer than the minimum angular separation")]
    VerticesTooClose { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimsonError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("probe angle {0} is not finite")]
    NonFiniteProbe(f64),
    #[error("operation requires a triangle, polygon has {0} vertices")]
    NotATriangle(usize),
}

/// A circle together with vertex angles on it. Vertices are stored as
/// angles, so they are concyclic by construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InscribedPolygon {
    circle: Circle,
    angles: Vec<f64>,
}

impl InscribedPolygon {
    /// Angles are reduced to `[0, 2pi)` and sorted.
    pub fn new(circle: Circle, angles: impl IntoIterator<Item = f64>) -> Result<Self, PolygonError> {
        let mut angles: Vec<f64> = angles
            .into_iter()
            .map(|a| if a.is_finite() { Ok(a.rem_euclid(TAU)) } else { Err(PolygonError::NonFinite(a)) })
            .collect::<Result<_, _>>()?;
        // rem_euclid can round up to exactly TAU
        for a in &mut angles {
            if *a >= TAU {
                *a = 0.0;
            }
        }
        let n = angles.len();
        if !(3..=MAX_VERTICES).contains(&n) {
            return Err(PolygonError::VertexCount(n));
        }
        angles.sort_by(f64::total_cmp);
        for i in 0..n {
            let j = (i + 1) % n;
            let gap = if j == 0 { angles[0] + TAU - angles[i] } else { angles[j] - angles[i] };
            if !(gap >= DEGENERACY_EPS) {
                return Err(PolygonError::VerticesTooClose { first: i, second: j });
            }
        }
        Ok(Self { circle, angles })
    }

    /// Regular n-gon with a vertex at polar angle `phase`.
    pub fn regular(circle: Circle, n: usize, phase: f64) -> Result<Self, PolygonError> {
        if !phase.is_finite() {
            return Err(PolygonError::NonFinite(phase));
        }
        Self::new(circle, (0..n).map(|j| phase + TAU * j as f64 / n as f64))
    }

    pub fn circle(&self) -> &Circle {
        &self.circle
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn vertex(&self, i: usize) -> Point {
        point_on_circle(&self.circle, self.angles[i])
    }

    pub fn vertices(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.vertex(i)).collect()
    }

    pub fn scale(&self) -> f64 {
        self.circle.scale()
    }

    /// Smallest angular distance from `theta` to any vertex.
    pub fn vertex_gap(&self, theta: f64) -> f64 {
        self.angles
            .iter()
            .map(|&a| {
                let d = (theta - a).rem_euclid(TAU);
                d.min(TAU - d)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_vertex_adjacent(&self, theta: f64) -> bool {
        self.vertex_gap(theta) < VERTEX_EPS
    }

    /// Similarity image: rotate about the circle centre, scale, then shift.
    pub fn transformed(&self, rotation: f64, scale: f64, shift: Point) -> Result<Self, PolygonError> {
        let circle = Circle {
            center: self.circle.center * scale + shift,
            radius: self.circle.radius * scale,
        };
        Self::new(circle, self.angles.iter().map(|a| a + rotation))
    }

    /// Reflection across the horizontal line through the circle centre.
    pub fn mirrored(&self) -> Result<Self, PolygonError> {
        Self::new(self.circle, self.angles.iter().map(|a| -a))
    }
}

/// Position of the probe point P on the polygon's circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub theta: f64,
}

impl ProbePoint {
    pub fn new(theta: f64) -> Self {
        Self { theta }
    }

    pub fn on(&self, circle: &Circle) -> Point {
        point_on_circle(circle, self.theta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimsonResult {
    pub line: Line,
    pub feet: Vec<Point>,
    pub residual: ResidualReport,
    pub degenerate: bool,
}

/// Index pairs of the triangle sides, in the order (I,II), (I,III), (II,III).
const TRIANGLE_SIDES: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

pub fn side_lines(poly: &InscribedPolygon) -> Result<[Line; 3], SimsonError> {
    if poly.len() != 3 {
        return Err(SimsonError::NotATriangle(poly.len()));
    }
    let v = poly.vertices();
    let mut out = [Line { a: 1.0, b: 0.0, c: 0.0 }; 3];
    for (slot, (i, j)) in out.iter_mut().zip(TRIANGLE_SIDES) {
        *slot = line_through(v[i], v[j])?;
    }
    Ok(out)
}

fn check_probe(p: &ProbePoint) -> Result<(), SimsonError> {
    if p.theta.is_finite() {
        Ok(())
    } else {
        Err(SimsonError::NonFiniteProbe(p.theta))
    }
}

/// Feet on the three sides of `tri` and the line through the two feet that
/// are farthest apart.
fn triangle_construction(tri: [Point; 3], probe: Point) -> Result<([Point; 3], Line), GeometryError> {
    let mut feet = [Point::ORIGIN; 3];
    for (slot, (i, j)) in feet.iter_mut().zip(TRIANGLE_SIDES) {
        *slot = foot_of_perpendicular(probe, &line_through(tri[i], tri[j])?);
    }
    let (mut best, mut best_d) = ((0, 1), -1.0);
    for (i, j) in TRIANGLE_SIDES {
        let d = feet[i].distance(feet[j]);
        if d > best_d {
            best = (i, j);
            best_d = d;
        }
    }
    let line = line_through(feet[best.0], feet[best.1])?;
    Ok((feet, line))
}

pub fn simson_line_triangle(poly: &InscribedPolygon, p: ProbePoint) -> Result<SimsonResult, SimsonError> {
    if poly.len() != 3 {
        return Err(SimsonError::NotATriangle(poly.len()));
    }
    check_probe(&p)?;
    let v = poly.vertices();
    let probe = p.on(poly.circle());
    let (feet, line) = triangle_construction([v[0], v[1], v[2]], probe)?;
    Ok(SimsonResult {
        line,
        residual: residual_report(&line, &feet),
        feet: feet.to_vec(),
        degenerate: poly.is_vertex_adjacent(p.theta),
    })
}

/// Memoized recursion over vertex subsets, scoped to one top-level call.
struct Recursion<'a> {
    vertices: &'a [Point],
    circle: &'a Circle,
    probe: Point,
    scale: f64,
    memo: Vec<Option<Line>>,
}

impl<'a> Recursion<'a> {
    fn new(vertices: &'a [Point], circle: &'a Circle, probe: Point) -> Self {
        Self {
            vertices,
            circle,
            probe,
            scale: circle.scale(),
            memo: vec![None; 1 << vertices.len()],
        }
    }

    fn line(&mut self, mask: u16) -> Result<Line, GeometryError> {
        if let Some(line) = self.memo[mask as usize] {
            return Ok(line);
        }
        let line = if mask.count_ones() == 3 {
            let mut tri = [Point::ORIGIN; 3];
            for (slot, i) in tri.iter_mut().zip(bits(mask)) {
                *slot = self.vertices[i];
            }
            triangle_construction(tri, self.probe)?.1
        } else {
            let feet = self.feet(mask)?;
            self.fit(&feet)?
        };
        self.memo[mask as usize] = Some(line);
        Ok(line)
    }

    /// Feet of the perpendiculars onto the lines of each vertex-omitted
    /// subset of `mask`, in ascending order of the omitted vertex.
    fn feet(&mut self, mask: u16) -> Result<Vec<Point>, GeometryError> {
        bits(mask)
            .map(|i| {
                let sub = self.line(mask & !(1 << i))?;
                Ok(foot_of_perpendicular(self.probe, &sub))
            })
            .collect()
    }

    fn fit(&self, feet: &[Point]) -> Result<Line, GeometryError> {
        match tls_line(feet, self.scale) {
            Err(GeometryError::DegenerateCloud) => {
                // All feet collapsed onto one point; fall back to the line
                // through it parallel to the tangent at the probe.
                let g = feet.iter().fold(Point::ORIGIN, |acc, &p| acc + p) * (1.0 / feet.len() as f64);
                Line::with_normal(g, self.probe - self.circle.center).ok_or(GeometryError::DegenerateCloud)
            }
            other => other,
        }
    }
}

fn bits(mask: u16) -> impl Iterator<Item = usize> {
    (0..16).filter(move |i| mask & (1 << i) != 0)
}

pub fn simson_line_polygon(poly: &InscribedPolygon, p: ProbePoint) -> Result<SimsonResult, SimsonError> {
    if poly.len() == 3 {
        return simson_line_triangle(poly, p);
    }
    check_probe(&p)?;
    let degenerate = poly.is_vertex_adjacent(p.theta);
    let vertices = poly.vertices();
    let probe = p.on(poly.circle());
    let mut rec = Recursion::new(&vertices, poly.circle(), probe);
    let full: u16 = ((1u32 << poly.len()) - 1) as u16;

    let feet = rec.feet(full)?;
    let line = match tls_line(&feet, poly.scale()) {
        Ok(line) => line,
        Err(GeometryError::DegenerateCloud) if degenerate => rec.fit(&feet)?,
        Err(e) => return Err(e.into()),
    };
    Ok(SimsonResult {
        residual: residual_report(&line, &feet),
        line,
        feet,
        degenerate,
    })
}

/// Display layer of a construction element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Sides,
    Perpendiculars,
    Feet,
    SubSimsonLines,
    SimsonLine,
    Locus,
    HypocycloidOverlay,
    Envelope,
}

impl Layer {
    pub const ALL: [Layer; 8] = [
        Layer::Sides,
        Layer::Perpendiculars,
        Layer::Feet,
        Layer::SubSimsonLines,
        Layer::SimsonLine,
        Layer::Locus,
        Layer::HypocycloidOverlay,
        Layer::Envelope,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Layer::Sides => "sides",
            Layer::Perpendiculars => "perpendiculars",
            Layer::Feet => "feet",
            Layer::SubSimsonLines => "sub_simson_lines",
            Layer::SimsonLine => "simson_line",
            Layer::Locus => "locus",
            Layer::HypocycloidOverlay => "hypocycloid_overlay",
            Layer::Envelope => "envelope",
        }
    }

    pub fn from_id(id: &str) -> Option<Layer> {
        Layer::ALL.into_iter().find(|l| l.id() == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceObject {
    Line { line: Line },
    /// Perpendicular dropped from the probe, with its supporting line.
    Perpendicular { from: Point, foot: Point, line: Line },
    Point { point: Point },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub layer: Layer,
    pub label: String,
    pub object: TraceObject,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionTrace {
    pub polygon: InscribedPolygon,
    pub probe: ProbePoint,
    pub probe_point: Point,
    pub steps: Vec<TraceStep>,
    pub result: SimsonResult,
}

impl ConstructionTrace {
    pub fn count(&self, layer: Layer) -> usize {
        self.steps.iter().filter(|s| s.layer == layer).count()
    }
}

const ROMAN: [&str; MAX_VERTICES] =
    ["I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X", "XI", "XII"];

pub fn vertex_label(i: usize) -> &'static str {
    ROMAN[i]
}

fn foot_label(i: usize) -> String {
    char::from(b'A' + i as u8).to_string()
}

fn perpendicular(probe: Point, target: &Line, foot: Point) -> TraceObject {
    // The perpendicular through P has the target's direction as its normal.
    let line = Line::with_normal(probe, target.direction()).expect("unit direction");
    TraceObject::Perpendicular { from: probe, foot, line }
}

/// Every intermediate object of the ruler construction, in drawing order.
///
/// Triangles emit side lines, perpendiculars, feet and the Simson line.
/// Larger polygons emit the n sub-polygon Simson lines, the perpendiculars
/// from P onto them, their feet and the final line.
pub fn construction_trace(poly: &InscribedPolygon, p: ProbePoint) -> Result<ConstructionTrace, SimsonError> {
    let result = simson_line_polygon(poly, p)?;
    let probe = p.on(poly.circle());
    let n = poly.len();
    let mut steps = Vec::with_capacity(3 * n + 1);

    let targets: Vec<(String, Line)> = if n == 3 {
        let sides = side_lines(poly)?;
        TRIANGLE_SIDES
            .iter()
            .zip(sides)
            .map(|(&(i, j), l)| (format!("{}{}", vertex_label(i), vertex_label(j)), l))
            .collect()
    } else {
        let vertices = poly.vertices();
        let mut rec = Recursion::new(&vertices, poly.circle(), probe);
        let full: u16 = ((1u32 << n) - 1) as u16;
        (0..n)
            .map(|i| Ok((format!("omit {}", vertex_label(i)), rec.line(full & !(1 << i))?)))
            .collect::<Result<_, GeometryError>>()?
    };

    let target_layer = if n == 3 { Layer::Sides } else { Layer::SubSimsonLines };
    for (label, line) in &targets {
        steps.push(TraceStep {
            layer: target_layer,
            label: label.clone(),
            object: TraceObject::Line { line: *line },
        });
    }
    for ((label, line), foot) in targets.iter().zip(&result.feet) {
        steps.push(TraceStep {
            layer: Layer::Perpendiculars,
            label: format!("P -> {label}"),
            object: perpendicular(probe, line, *foot),
        });
    }
    for (i, foot) in result.feet.iter().enumerate() {
        steps.push(TraceStep {
            layer: Layer::Feet,
            label: foot_label(i),
            object: TraceObject::Point { point: *foot },
        });
    }
    steps.push(TraceStep {
        layer: Layer::SimsonLine,
        label: "simson".to_string(),
        object: TraceObject::Line { line: result.line },
    });

    Ok(ConstructionTrace {
        polygon: poly.clone(),
        probe: p,
        probe_point: probe,
        steps,
        result,
    })
}
