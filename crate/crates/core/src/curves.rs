//! Hypocycloids: the curve traced by a point of a circle of radius `r`
//! rolling inside a fixed circle of radius `R = k * r`.
//!
//! With integer `k` the curve closes after one turn and has `k` cusps.
//! `k = 3` is the deltoid, `k = 4` the astroid.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurveError {
    #[error("a hypocycloid needs at least 3 cusps, got {0}")]
    TooFewCusps(u32),
    #[error("fixed radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("radius ratio {0} is not an integer; the curve would not close")]
    NonIntegerRatio(f64),
    #[error("center and phase must be finite")]
    NonFinite,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
}

/// A closed hypocycloid. The rolling radius is `fixed_radius / cusps`;
/// one cusp sits at polar angle `phase` about `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypocycloidSpec {
    pub center: Point,
    pub fixed_radius: f64,
    pub cusps: u32,
    pub phase: f64,
}

impl HypocycloidSpec {
    pub fn new(center: Point, fixed_radius: f64, cusps: u32, phase: f64) -> Result<Self, CurveError> {
        if cusps < 3 {
            return Err(CurveError::TooFewCusps(cusps));
        }
        if !(fixed_radius > 0.0) || !fixed_radius.is_finite() {
            return Err(CurveError::InvalidRadius(fixed_radius));
        }
        if !center.is_finite() || !phase.is_finite() {
            return Err(CurveError::NonFinite);
        }
        Ok(Self { center, fixed_radius, cusps, phase })
    }

    /// From the two circle radii; `fixed / rolling` must be an integer >= 3.
    pub fn from_radii(center: Point, fixed: f64, rolling: f64, phase: f64) -> Result<Self, CurveError> {
        if !(rolling > 0.0) || !rolling.is_finite() {
            return Err(CurveError::InvalidRadius(rolling));
        }
        let ratio = fixed / rolling;
        let k = ratio.round();
        if (ratio - k).abs() > 1e-9 * ratio.abs().max(1.0) {
            return Err(CurveError::NonIntegerRatio(ratio));
        }
        if k < 3.0 {
            return Err(CurveError::TooFewCusps(k.max(0.0) as u32));
        }
        Self::new(center, fixed, k as u32, phase)
    }

    /// The deltoid with rolling radius `r`, centred at the origin.
    pub fn deltoid(r: f64) -> Result<Self, CurveError> {
        Self::new(Point::ORIGIN, 3.0 * r, 3, 0.0)
    }

    pub fn rolling_radius(&self) -> f64 {
        self.fixed_radius / f64::from(self.cusps)
    }

    /// Distance from the centre to the points of the curve nearest to it.
    pub fn inner_radius(&self) -> f64 {
        self.fixed_radius - 2.0 * self.rolling_radius()
    }
}

/// Point of the unrotated, untranslated curve with unit fixed radius.
/// This is the normalized frame the fitter works in.
#[inline]
pub(crate) fn canonical_point(k: u32, t: f64) -> Point {
    let k = f64::from(k);
    let r = 1.0 / k;
    let big = 1.0 - r;
    let m = k - 1.0;
    let (s, c) = t.sin_cos();
    let (sm, cm) = (m * t).sin_cos();
    Point::new(big * c + r * cm, big * s - r * sm)
}

pub fn hypocycloid_point(spec: &HypocycloidSpec, t: f64) -> Point {
    spec.center + canonical_point(spec.cusps, t).rotated(spec.phase) * spec.fixed_radius
}

/// Derivative of [`hypocycloid_point`] with respect to `t`.
pub fn hypocycloid_velocity(spec: &HypocycloidSpec, t: f64) -> Point {
    let k = f64::from(spec.cusps);
    let m = k - 1.0;
    let big = spec.fixed_radius * (1.0 - 1.0 / k);
    let (s, c) = t.sin_cos();
    let (sm, cm) = (m * t).sin_cos();
    Point::new(-big * (s + sm), big * (c - cm)).rotated(spec.phase)
}

/// Parameters of the `k` cusps, `2 pi j / k`. The phase rotates the curve
/// rather than shifting the parameter, so these do not depend on it.
pub fn cusp_params(spec: &HypocycloidSpec) -> Vec<f64> {
    let k = spec.cusps;
    (0..k).map(|j| TAU * f64::from(j) / f64::from(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub params: Vec<f64>,
    pub points: Vec<Point>,
}

/// Uniform samples over `[0, 2pi)`; the closing point is implied.
pub fn sample_hypocycloid(spec: &HypocycloidSpec, n_samples: usize) -> Result<CurveSample, CurveError> {
    if n_samples < 3 {
        return Err(CurveError::TooFewSamples { needed: 3, got: n_samples });
    }
    let params: Vec<f64> = (0..n_samples).map(|i| TAU * i as f64 / n_samples as f64).collect();
    let points = params.iter().map(|&t| hypocycloid_point(spec, t)).collect();
    Ok(CurveSample { params, points })
}
