//! Declarative scene files, the SVG renderer and canonical report JSON.
//!
//! A scene is UTF-8 JSON:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "circle": { "center": { "x": 0.0, "y": 0.0 }, "radius": 1.0 },
//!   "polygon": { "kind": "regular", "n": 3, "phase": 1.5707963267948966 },
//!   "probe_theta": 0.7,
//!   "display": { "perpendiculars": false },
//!   "samples": 100
//! }
//! ```
//!
//! Unknown fields are rejected everywhere. `polygon` may instead be
//! `{ "kind": "angles", "values": [...] }`.

pub mod report;
pub mod svg;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::geometry::Circle;
use crate::simson::{InscribedPolygon, Layer, PolygonError, MAX_VERTICES};

pub use report::{parse_report, to_canonical_json, write_report, ReportError};
pub use svg::{render_svg, Artifacts, RenderDoc, RenderError};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SAMPLES: usize = 100;
pub const MIN_SAMPLES: usize = 32;
/// Upper bound on family sizes a scene may request.
pub const MAX_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path} out of range: {message}")]
    Range { path: String, message: String },
}

impl SceneError {
    pub fn path(&self) -> &str {
        match self {
            SceneError::Schema { path, .. } | SceneError::Range { path, .. } => path,
        }
    }

    /// Re-roots the field path under `prefix` (for scenes embedded in a larger document).
    pub fn prefixed(self, prefix: &str) -> Self {
        let join = |path: String| if path == "." { prefix.to_string() } else { format!("{prefix}.{path}") };
        match self {
            SceneError::Schema { path, message } => SceneError::Schema { path: join(path), message },
            SceneError::Range { path, message } => SceneError::Range { path: join(path), message },
        }
    }

    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        SceneError::Schema { path: path.into(), message: message.into() }
    }

    fn range(path: impl Into<String>, message: impl Into<String>) -> Self {
        SceneError::Range { path: path.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolygonSpec {
    Regular { n: usize, phase: f64 },
    Angles { values: Vec<f64> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegularFields {
    #[allow(dead_code)]
    kind: String,
    n: usize,
    #[serde(default)]
    phase: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnglesFields {
    #[allow(dead_code)]
    kind: String,
    values: Vec<f64>,
}

impl PolygonSpec {
    /// Routes on `kind` by hand: serde's tagged enums buffer their content
    /// and lose the path of errors inside it.
    fn from_value(value: serde_json::Value) -> Result<PolygonSpec, SceneError> {
        let kind = match value.get("kind") {
            Some(serde_json::Value::String(k)) => k.clone(),
            Some(_) => return Err(SceneError::schema("polygon.kind", "expected a string")),
            None if value.is_object() => return Err(SceneError::schema("polygon.kind", "missing field")),
            None => return Err(SceneError::schema("polygon", "expected an object")),
        };
        let sub = |e: SceneError| e.prefixed("polygon");
        match kind.as_str() {
            "regular" => {
                let f: RegularFields = serde_path_to_error::deserialize(value).map_err(schema_error).map_err(sub)?;
                Ok(PolygonSpec::Regular { n: f.n, phase: f.phase })
            }
            "angles" => {
                let f: AnglesFields = serde_path_to_error::deserialize(value).map_err(schema_error).map_err(sub)?;
                Ok(PolygonSpec::Angles { values: f.values })
            }
            other => Err(SceneError::schema(
                "polygon.kind",
                format!("unknown variant {other:?}, expected \"regular\" or \"angles\""),
            )),
        }
    }
}

fn yes() -> bool {
    true
}

/// Layer visibility. Everything is shown unless switched off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Display {
    #[serde(default = "yes")]
    pub polygon: bool,
    #[serde(default = "yes")]
    pub sides: bool,
    #[serde(default = "yes")]
    pub perpendiculars: bool,
    #[serde(default = "yes")]
    pub feet: bool,
    #[serde(default = "yes")]
    pub sub_simson_lines: bool,
    #[serde(default = "yes")]
    pub simson_line: bool,
    #[serde(default = "yes")]
    pub locus: bool,
    #[serde(default = "yes")]
    pub envelope: bool,
    #[serde(default = "yes")]
    pub hypocycloid_overlay: bool,
}

impl Default for Display {
    fn default() -> Self {
        Display {
            polygon: true,
            sides: true,
            perpendiculars: true,
            feet: true,
            sub_simson_lines: true,
            simson_line: true,
            locus: true,
            envelope: true,
            hypocycloid_overlay: true,
        }
    }
}

impl Display {
    pub const TOGGLES: [&'static str; 9] = [
        "polygon",
        "sides",
        "perpendiculars",
        "feet",
        "sub_simson_lines",
        "simson_line",
        "locus",
        "envelope",
        "hypocycloid_overlay",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut bool> {
        Some(match name {
            "polygon" => &mut self.polygon,
            "sides" => &mut self.sides,
            "perpendiculars" => &mut self.perpendiculars,
            "feet" => &mut self.feet,
            "sub_simson_lines" => &mut self.sub_simson_lines,
            "simson_line" => &mut self.simson_line,
            "locus" => &mut self.locus,
            "envelope" => &mut self.envelope,
            "hypocycloid_overlay" => &mut self.hypocycloid_overlay,
            _ => return None,
        })
    }

    /// Switches a toggle by its JSON key.
    pub fn set(&mut self, name: &str, visible: bool) -> Result<(), SceneError> {
        let slot = self.slot(name).ok_or_else(|| SceneError::Schema {
            path: format!("display.{name}"),
            message: format!("unknown layer toggle, expected one of {}", Display::TOGGLES.join(", ")),
        })?;
        *slot = visible;
        Ok(())
    }

    pub fn shows(&self, layer: Layer) -> bool {
        match layer {
            Layer::Sides => self.sides,
            Layer::Perpendiculars => self.perpendiculars,
            Layer::Feet => self.feet,
            Layer::SubSimsonLines => self.sub_simson_lines,
            Layer::SimsonLine => self.simson_line,
            Layer::Locus => self.locus,
            Layer::HypocycloidOverlay => self.hypocycloid_overlay,
            Layer::Envelope => self.envelope,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stroke {
    /// `#rgb`, `#rrggbb` or a lowercase named colour.
    pub color: String,
    /// Width in pixels.
    pub width: f64,
}

impl Stroke {
    pub fn new(color: &str, width: f64) -> Self {
        Stroke { color: color.to_string(), width }
    }

    fn validate(&self, path: &str) -> Result<(), SceneError> {
        let c = self.color.as_str();
        let hex = c.strip_prefix('#').is_some_and(|h| {
            (h.len() == 3 || h.len() == 6) && h.bytes().all(|b| b.is_ascii_hexdigit())
        });
        let named = !c.is_empty() && c.len() <= 32 && c.bytes().all(|b| b.is_ascii_lowercase());
        if !hex && !named {
            return Err(SceneError::range(format!("{path}.color"), format!("{c:?} is not a colour")));
        }
        if !(self.width > 0.0 && self.width <= 100.0) {
            return Err(SceneError::range(format!("{path}.width"), "must be in (0, 100]"));
        }
        Ok(())
    }
}

/// On-disk form of a scene. `polygon` stays raw until [`PolygonSpec::from_value`].
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    schema_version: u32,
    circle: Circle,
    polygon: serde_json::Value,
    #[serde(default)]
    probe_theta: f64,
    #[serde(default)]
    display: Display,
    #[serde(default = "default_samples")]
    samples: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    styles: BTreeMap<Layer, Stroke>,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

/// A validated scene. The polygon spec is kept as written; `polygon()` is
/// its resolved form.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    spec: PolygonSpec,
    polygon: InscribedPolygon,
    probe_theta: f64,
    display: Display,
    samples: usize,
    styles: BTreeMap<Layer, Stroke>,
}

fn resolve(circle: Circle, spec: &PolygonSpec) -> Result<InscribedPolygon, SceneError> {
    let polygon_error = |path: &str, e: PolygonError| SceneError::range(path, e.to_string());
    match *spec {
        PolygonSpec::Regular { n, phase } => {
            if !(3..=MAX_VERTICES).contains(&n) {
                return Err(SceneError::range("polygon.n", format!("{n} is outside 3..={MAX_VERTICES}")));
            }
            if !phase.is_finite() {
                return Err(SceneError::range("polygon.phase", "must be finite"));
            }
            InscribedPolygon::regular(circle, n, phase).map_err(|e| polygon_error("polygon", e))
        }
        PolygonSpec::Angles { ref values } => {
            InscribedPolygon::new(circle, values.iter().copied()).map_err(|e| polygon_error("polygon.values", e))
        }
    }
}

impl Scene {
    /// Scene on the given circle with default probe, display and sampling.
    pub fn new(circle: Circle, spec: PolygonSpec) -> Result<Scene, SceneError> {
        let polygon = resolve(circle, &spec)?;
        Ok(Scene {
            spec,
            polygon,
            probe_theta: 0.0,
            display: Display::default(),
            samples: DEFAULT_SAMPLES,
            styles: BTreeMap::new(),
        })
    }

    /// Regular n-gon on the unit circle.
    pub fn regular(n: usize, phase: f64) -> Result<Scene, SceneError> {
        Scene::new(Circle::unit(), PolygonSpec::Regular { n, phase })
    }

    fn from_file(file: SceneFile) -> Result<Scene, SceneError> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(SceneError::range(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", file.schema_version),
            ));
        }
        let circle = Circle::new(file.circle.center, file.circle.radius)
            .map_err(|e| SceneError::range("circle.radius", e.to_string()))?;
        let mut scene = Scene::new(circle, PolygonSpec::from_value(file.polygon)?)?;
        scene.set_probe_theta(file.probe_theta)?;
        scene.set_samples(file.samples)?;
        scene.display = file.display;
        for (layer, stroke) in &file.styles {
            stroke.validate(&format!("styles.{}", layer.id()))?;
        }
        scene.styles = file.styles;
        Ok(scene)
    }

    pub fn circle(&self) -> &Circle {
        self.polygon.circle()
    }

    pub fn polygon_spec(&self) -> &PolygonSpec {
        &self.spec
    }

    pub fn polygon(&self) -> &InscribedPolygon {
        &self.polygon
    }

    pub fn probe_theta(&self) -> f64 {
        self.probe_theta
    }

    pub fn set_probe_theta(&mut self, theta: f64) -> Result<(), SceneError> {
        if !theta.is_finite() {
            return Err(SceneError::range("probe_theta", "must be finite"));
        }
        self.probe_theta = theta;
        Ok(())
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn set_samples(&mut self, samples: usize) -> Result<(), SceneError> {
        if !(MIN_SAMPLES..=MAX_SAMPLES).contains(&samples) {
            return Err(SceneError::range(
                "samples",
                format!("{samples} is outside {MIN_SAMPLES}..={MAX_SAMPLES}"),
            ));
        }
        self.samples = samples;
        Ok(())
    }

    pub fn display(&self) -> &Display {
        &self.display
    }

    pub fn display_mut(&mut self) -> &mut Display {
        &mut self.display
    }

    pub fn styles(&self) -> &BTreeMap<Layer, Stroke> {
        &self.styles
    }

    /// Stroke for a layer: the scene's override, else the default palette.
    pub fn stroke(&self, layer: Layer) -> Stroke {
        self.styles.get(&layer).cloned().unwrap_or_else(|| svg::default_stroke(layer, self.polygon.len()))
    }

    fn to_file(&self) -> SceneFile {
        SceneFile {
            schema_version: SCHEMA_VERSION,
            circle: *self.circle(),
            polygon: serde_json::to_value(&self.spec).expect("polygon serializes"),
            probe_theta: self.probe_theta,
            display: self.display,
            samples: self.samples,
            styles: self.styles.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_file()).expect("scene serializes");
        text.push('\n');
        text
    }
}

/// Parses and validates scene JSON.
pub fn parse_scene(text: &str) -> Result<Scene, SceneError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: SceneFile = serde_path_to_error::deserialize(&mut de).map_err(schema_error)?;
    de.end().map_err(|e| SceneError::Schema { path: ".".into(), message: e.to_string() })?;
    Scene::from_file(file)
}

/// Validates a scene already parsed into a JSON value.
pub fn scene_from_value(value: serde_json::Value) -> Result<Scene, SceneError> {
    let file: SceneFile = serde_path_to_error::deserialize(value).map_err(schema_error)?;
    Scene::from_file(file)
}

fn schema_error<E: std::fmt::Display>(e: serde_path_to_error::Error<E>) -> SceneError {
    SceneError::Schema { path: e.path().to_string(), message: e.inner().to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use std::f64::consts::{PI, TAU};

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "circle": { "center": { "x": 0, "y": 0 }, "radius": 1 },
        "polygon": { "kind": "regular", "n": 3 }
    }"#;

    #[test]
    fn minimal_triangle() {
        let scene = parse_scene(MINIMAL).unwrap();
        let a = scene.polygon().angles();
        assert_eq!(a.len(), 3);
        assert!((a[1] - a[0] - TAU / 3.0).abs() < 1e-15);
        assert!((a[2] - a[1] - TAU / 3.0).abs() < 1e-15);
        assert_eq!(scene.samples(), DEFAULT_SAMPLES);
        assert_eq!(scene.probe_theta(), 0.0);
        assert_eq!(*scene.display(), Display::default());
    }

    #[test]
    fn n_two_names_the_field() {
        let err = parse_scene(&MINIMAL.replace("\"n\": 3", "\"n\": 2")).unwrap_err();
        assert!(matches!(err, SceneError::Range { .. }));
        assert_eq!(err.path(), "polygon.n");
        let err = parse_scene(&MINIMAL.replace("\"n\": 3", "\"n\": 13")).unwrap_err();
        assert_eq!(err.path(), "polygon.n");
    }

    #[test]
    fn few_samples_rejected() {
        let text = MINIMAL.replace("\"radius\": 1 }", "\"radius\": 1 }, \"samples\": 31");
        assert_eq!(parse_scene(&text).unwrap_err().path(), "samples");
        let text = MINIMAL.replace("\"radius\": 1 }", "\"radius\": 1 }, \"samples\": 32");
        assert_eq!(parse_scene(&text).unwrap().samples(), 32);
    }

    #[test]
    fn unknown_fields_rejected_with_path() {
        let text = MINIMAL.replace("\"n\": 3", "\"n\": 3, \"sides\": 4");
        let err = parse_scene(&text).unwrap_err();
        assert!(matches!(err, SceneError::Schema { .. }), "{err}");
        let text = MINIMAL.replace("\"radius\": 1 }", "\"radius\": 1 }, \"display\": { \"grid\": false }");
        let err = parse_scene(&text).unwrap_err();
        assert_eq!(err.path(), "display.grid");
        let text = MINIMAL.replace("\"radius\": 1 }", "\"radius\": 1, \"z\": 0 }");
        assert!(parse_scene(&text).unwrap_err().path().starts_with("circle"));
    }

    #[test]
    fn type_errors_carry_paths() {
        let err = parse_scene(&MINIMAL.replace("\"n\": 3", "\"n\": \"three\"")).unwrap_err();
        assert_eq!(err.path(), "polygon.n");
        let err = parse_scene(&MINIMAL.replace("\"x\": 0", "\"x\": []")).unwrap_err();
        assert_eq!(err.path(), "circle.center.x");
        let err = parse_scene(&MINIMAL.replace("\"regular\"", "\"star\"")).unwrap_err();
        assert_eq!(err.path(), "polygon.kind");
        let err = parse_scene(&MINIMAL.replace("\"n\": 3", "\"n\": 3, \"values\": []")).unwrap_err();
        assert_eq!(err.path(), "polygon.values");
        assert!(matches!(parse_scene("{").unwrap_err(), SceneError::Schema { .. }));
        assert!(parse_scene(&format!("{MINIMAL} 7")).is_err());
    }

    #[test]
    fn invalid_radius_and_version() {
        let err = parse_scene(&MINIMAL.replace("\"radius\": 1", "\"radius\": -2")).unwrap_err();
        assert_eq!(err.path(), "circle.radius");
        let err = parse_scene(&MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 2")).unwrap_err();
        assert_eq!(err.path(), "schema_version");
        assert!(parse_scene(&MINIMAL.replace("\"schema_version\": 1,", "")).is_err());
    }

    #[test]
    fn explicit_angles() {
        let text = MINIMAL.replace(
            "{ \"kind\": \"regular\", \"n\": 3 }",
            "{ \"kind\": \"angles\", \"values\": [3.0, 0.5, -1.0, 1.7] }",
        );
        let scene = parse_scene(&text).unwrap();
        assert_eq!(scene.polygon().len(), 4);
        assert!(scene.polygon().angles().windows(2).all(|w| w[0] < w[1]));

        let dup = MINIMAL.replace(
            "{ \"kind\": \"regular\", \"n\": 3 }",
            "{ \"kind\": \"angles\", \"values\": [0.0, 0.0, 1.0] }",
        );
        assert_eq!(parse_scene(&dup).unwrap_err().path(), "polygon.values");
        let short = MINIMAL.replace(
            "{ \"kind\": \"regular\", \"n\": 3 }",
            "{ \"kind\": \"angles\", \"values\": [0.0, 1.0] }",
        );
        assert_eq!(parse_scene(&short).unwrap_err().path(), "polygon.values");
    }

    #[test]
    fn styles_are_validated() {
        let with = |styles: &str| MINIMAL.replace("\"radius\": 1 }", &format!("\"radius\": 1 }}, \"styles\": {styles}"));
        let scene = parse_scene(&with(r##"{ "envelope": { "color": "#ff0000", "width": 3 } }"##)).unwrap();
        assert_eq!(scene.stroke(Layer::Envelope), Stroke::new("#ff0000", 3.0));
        let err = parse_scene(&with(r#"{ "envelope": { "color": "\"/><script", "width": 3 } }"#)).unwrap_err();
        assert_eq!(err.path(), "styles.envelope.color");
        let err = parse_scene(&with(r#"{ "feet": { "color": "red", "width": 0 } }"#)).unwrap_err();
        assert_eq!(err.path(), "styles.feet.width");
        assert!(parse_scene(&with(r#"{ "grid": { "color": "red", "width": 1 } }"#)).is_err());
    }

    #[test]
    fn round_trip() {
        let mut scene = Scene::new(
            Circle::new(Point::new(0.25, -3.5), 2.75).unwrap(),
            PolygonSpec::Angles { values: vec![0.1, 2.0, 4.4, 5.9] },
        )
        .unwrap();
        scene.set_probe_theta(PI / 7.0).unwrap();
        scene.set_samples(720).unwrap();
        scene.display_mut().set("perpendiculars", false).unwrap();
        let text = scene.to_json();
        let back = parse_scene(&text).unwrap();
        assert_eq!(back, scene);
        assert_eq!(back.to_json(), text);

        let minimal = parse_scene(MINIMAL).unwrap();
        assert_eq!(parse_scene(&minimal.to_json()).unwrap(), minimal);
    }

    #[test]
    fn toggles_by_name() {
        let mut d = Display::default();
        for name in Display::TOGGLES {
            d.set(name, false).unwrap();
        }
        assert!(Layer::ALL.iter().all(|&l| !d.shows(l)));
        assert!(!d.polygon);
        assert!(d.set("grid", false).is_err());
    }

    #[test]
    fn embedded_paths_are_prefixed() {
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        v["polygon"]["n"] = 1.into();
        let err = scene_from_value(v).unwrap_err().prefixed("scene");
        assert_eq!(err.path(), "scene.polygon.n");
    }
}
