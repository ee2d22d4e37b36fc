//! Simson-Wallace line laboratory.
//!
//! Builds the Simson-Wallace line of a point on the circumcircle of an
//! inscribed polygon (recursively for more than three vertices), sweeps the
//! point around the circle to extract the envelope of the resulting line
//! family, and checks that the envelope is an n-cusped hypocycloid.
//!
//! - [`geometry`]: points, normalized lines, circles, TLS collinearity.
//! - [`simson`]: inscribed polygons, Simson lines and construction traces.
//! - [`curves`]: hypocycloid evaluation and sampling.
//! - [`envelope`]: line families, envelope extraction, cusp detection.
//! - [`fitting`]: hypocycloid fitting and verification reports.
//! - [`scene`]: scene files, SVG rendering, canonical report JSON.

pub mod curves;
pub mod envelope;
pub mod fitting;
pub mod geometry;
pub mod scene;
pub mod simson;

pub use curves::{cusp_params, hypocycloid_point, sample_hypocycloid, CurveSample, HypocycloidSpec};
pub use envelope::{build_family, detect_cusps, envelope_points, EnvelopeTrace, LineFamily};
pub use fitting::{fit_hypocycloid, scalene_report, verify_claim, FitReport};
pub use geometry::{Circle, Line, Point, ResidualReport};
pub use simson::{
    construction_trace, simson_line_polygon, simson_line_triangle, ConstructionTrace, InscribedPolygon, Layer,
    ProbePoint, SimsonResult,
};
pub use scene::{parse_scene, render_svg, write_report, Artifacts, Scene, SceneError};
