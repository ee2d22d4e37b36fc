//! Envelope of the Simson-Wallace line family.
//!
//! The probe sweeps the circle on a uniform grid, one Simson line per grid
//! angle. Each envelope point solves `L(theta) = 0`, `L'(theta) = 0`, where
//! `L'` is a central finite difference of the sign-aligned coefficients.
//! Cusps show up as sharp minima of the trace speed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::geometry::{Line, Point};
use crate::simson::{simson_line_polygon, InscribedPolygon, ProbePoint, SimsonError, VERTEX_EPS};

pub const MIN_FAMILY_SAMPLES: usize = 32;
pub const MIN_CUSP_SAMPLES: usize = 64;
/// Cusps are speed minima below this fraction of the median speed.
pub const CUSP_SPEED_FACTOR: f64 = 0.1;
/// Smallest `|det|` accepted for the envelope 2x2 solve.
pub const DET_THRESHOLD: f64 = 1e-8;
/// Smallest step of the forward-difference fallback, in radians.
pub const MIN_DELTA: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvelopeError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("family thetas and lines differ in length ({thetas} vs {lines})")]
    LengthMismatch { thetas: usize, lines: usize },
    #[error("family thetas must be strictly increasing within [0, 2pi)")]
    UnorderedThetas,
    #[error(transparent)]
    Simson(#[from] SimsonError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineFamily {
    pub poly: InscribedPolygon,
    pub thetas: Vec<f64>,
    pub lines: Vec<Line>,
}

impl LineFamily {
    /// Wrap precomputed lines. Lines are sign-aligned in sequence.
    pub fn from_lines(poly: InscribedPolygon, thetas: Vec<f64>, mut lines: Vec<Line>) -> Result<Self, EnvelopeError> {
        if thetas.len() != lines.len() {
            return Err(EnvelopeError::LengthMismatch { thetas: thetas.len(), lines: lines.len() });
        }
        let ordered = thetas.windows(2).all(|w| w[0] < w[1])
            && thetas.first().is_none_or(|&t| t >= 0.0)
            && thetas.last().is_none_or(|&t| t < TAU + MIN_DELTA);
        if !ordered {
            return Err(EnvelopeError::UnorderedThetas);
        }
        align_signs(&mut lines);
        Ok(Self { poly, thetas, lines })
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

/// Uniform probe grid over `[0, 2pi)`. Angles within `VERTEX_EPS` of a
/// vertex are pushed forward until they clear it.
pub fn probe_grid(poly: &InscribedPolygon, n_samples: usize) -> Vec<f64> {
    (0..n_samples)
        .map(|i| {
            let mut theta = TAU * i as f64 / n_samples as f64;
            while poly.is_vertex_adjacent(theta) {
                theta += VERTEX_EPS;
            }
            theta
        })
        .collect()
}

pub fn build_family(poly: &InscribedPolygon, n_samples: usize) -> Result<LineFamily, EnvelopeError> {
    if n_samples < MIN_FAMILY_SAMPLES {
        return Err(EnvelopeError::TooFewSamples { needed: MIN_FAMILY_SAMPLES, got: n_samples });
    }
    let thetas = probe_grid(poly, n_samples);
    let mut lines = thetas
        .par_iter()
        .map(|&t| simson_line_polygon(poly, ProbePoint::new(t)).map(|r| r.line))
        .collect::<Result<Vec<_>, _>>()?;
    align_signs(&mut lines);
    Ok(LineFamily { poly: poly.clone(), thetas, lines })
}

/// Flip lines so consecutive normals never point apart.
pub fn align_signs(lines: &mut [Line]) {
    for i in 1..lines.len() {
        if lines[i].normal().dot(lines[i - 1].normal()) < 0.0 {
            lines[i] = lines[i].flipped();
        }
    }
}

fn aligned_to(line: Line, reference: &Line) -> Line {
    if line.normal().dot(reference.normal()) < 0.0 {
        line.flipped()
    } else {
        line
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeTrace {
    pub thetas: Vec<f64>,
    pub points: Vec<Point>,
    /// Central-difference speed `|dP/dtheta|` per sample.
    pub speeds: Vec<f64>,
    pub cusp_indices: Vec<usize>,
    /// Probe angles whose envelope point could not be solved.
    pub dropped: Vec<f64>,
}

impl EnvelopeTrace {
    /// Build a trace from ordered samples of a closed curve.
    pub fn from_points(thetas: Vec<f64>, points: Vec<Point>) -> Self {
        let speeds = speeds(&thetas, &points);
        let mut trace = EnvelopeTrace { thetas, points, speeds, cusp_indices: Vec::new(), dropped: Vec::new() };
        trace.cusp_indices = detect_cusps(&trace).iter().map(|c| c.index).collect();
        trace
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn forward_gap(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(TAU);
    if d == 0.0 {
        TAU
    } else {
        d
    }
}

fn solve_tangency(line: &Line, derivative: &Line) -> Option<Point> {
    let det = line.a * derivative.b - derivative.a * line.b;
    if !(det.abs() >= DET_THRESHOLD) {
        return None;
    }
    Some(Point::new(
        (line.b * derivative.c - derivative.b * line.c) / det,
        (line.c * derivative.a - derivative.c * line.a) / det,
    ))
}

/// Second-order derivative estimate on a possibly non-uniform stencil.
fn central_difference(prev: &Line, mid: &Line, next: &Line, h_prev: f64, h_next: f64) -> Line {
    let w = 1.0 / (h_prev * h_next * (h_prev + h_next));
    let d = |fm: f64, f0: f64, fp: f64| {
        (h_prev * h_prev * (fp - f0) + h_next * h_next * (f0 - fm)) * w
    };
    Line {
        a: d(prev.a, mid.a, next.a),
        b: d(prev.b, mid.b, next.b),
        c: d(prev.c, mid.c, next.c),
    }
}

/// Intersect `L(theta)` with `L(theta + delta)`, halving `delta` until the
/// system is well conditioned.
fn fallback_point(
    resample: &(dyn Fn(f64) -> Option<Line> + Sync),
    theta: f64,
    line: &Line,
    mut delta: f64,
) -> Option<Point> {
    while delta >= MIN_DELTA {
        if let Some(other) = resample(theta + delta) {
            let other = aligned_to(other, line);
            let slope = Line {
                a: (other.a - line.a) / delta,
                b: (other.b - line.b) / delta,
                c: (other.c - line.c) / delta,
            };
            if let Some(p) = solve_tangency(line, &slope) {
                return Some(p);
            }
        }
        delta *= 0.5;
    }
    None
}

pub fn envelope_points(family: &LineFamily) -> Result<EnvelopeTrace, EnvelopeError> {
    let poly = &family.poly;
    envelope_points_with(family, &|theta| {
        simson_line_polygon(poly, ProbePoint::new(theta)).ok().map(|r| r.line)
    })
}

/// `resample` recomputes a family member off the grid for the fallback.
fn envelope_points_with(
    family: &LineFamily,
    resample: &(dyn Fn(f64) -> Option<Line> + Sync),
) -> Result<EnvelopeTrace, EnvelopeError> {
    let n = family.len();
    if n < MIN_FAMILY_SAMPLES {
        return Err(EnvelopeError::TooFewSamples { needed: MIN_FAMILY_SAMPLES, got: n });
    }
    let (thetas, lines) = (&family.thetas, &family.lines);
    let solved: Vec<Option<Point>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (ip, inext) = ((i + n - 1) % n, (i + 1) % n);
            let mid = lines[i];
            let prev = aligned_to(lines[ip], &mid);
            let next = aligned_to(lines[inext], &mid);
            let h_prev = forward_gap(thetas[ip], thetas[i]);
            let h_next = forward_gap(thetas[i], thetas[inext]);
            let derivative = central_difference(&prev, &mid, &next, h_prev, h_next);
            solve_tangency(&mid, &derivative)
                .or_else(|| fallback_point(resample, thetas[i], &mid, h_next))
        })
        .collect();

    let mut kept_thetas = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    let mut dropped = Vec::new();
    for (&theta, p) in thetas.iter().zip(solved) {
        match p {
            Some(p) => {
                kept_thetas.push(theta);
                points.push(p);
            }
            None => dropped.push(theta),
        }
    }
    let mut trace = EnvelopeTrace::from_points(kept_thetas, points);
    trace.dropped = dropped;
    Ok(trace)
}

fn speeds(thetas: &[f64], points: &[Point]) -> Vec<f64> {
    let n = points.len();
    if n < 3 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let (ip, inext) = ((i + n - 1) % n, (i + 1) % n);
            let span = forward_gap(thetas[ip], thetas[i]) + forward_gap(thetas[i], thetas[inext]);
            points[inext].distance(points[ip]) / span
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cusp {
    pub index: usize,
    pub theta: f64,
    pub point: Point,
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        0.5 * (sorted[m - 1] + sorted[m])
    }
}

/// Speed minima below `CUSP_SPEED_FACTOR * median(speed)`, wrapping around
/// the closed trace, refined by a parabola through the three speeds.
///
/// A minimum must be strictly below its predecessor and no larger than its
/// successor, so a two-sample plateau yields exactly one cusp.
pub fn detect_cusps(trace: &EnvelopeTrace) -> Vec<Cusp> {
    let n = trace.len();
    if n < MIN_CUSP_SAMPLES || trace.speeds.len() != n {
        return Vec::new();
    }
    let s = &trace.speeds;
    let threshold = CUSP_SPEED_FACTOR * median(s);
    let mut cusps = Vec::new();
    for i in 0..n {
        let (ip, inext) = ((i + n - 1) % n, (i + 1) % n);
        if !(s[i] < threshold && s[i] < s[ip] && s[i] <= s[inext]) {
            continue;
        }
        let curvature = s[ip] - 2.0 * s[i] + s[inext];
        let u = if curvature > 0.0 {
            (0.5 * (s[ip] - s[inext]) / curvature).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let (pm, p0, pp) = (trace.points[ip], trace.points[i], trace.points[inext]);
        let point = p0 + (pp - pm) * (0.5 * u) + (pp - p0 * 2.0 + pm) * (0.5 * u * u);
        let h = if u >= 0.0 {
            forward_gap(trace.thetas[i], trace.thetas[inext])
        } else {
            forward_gap(trace.thetas[ip], trace.thetas[i])
        };
        let theta = (trace.thetas[i] + u * h).rem_euclid(TAU);
        cusps.push(Cusp { index: i, theta, point });
    }
    cusps
}
