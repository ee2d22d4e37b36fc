//! The `/v1` kernel protocol, independent of the HTTP server.
//!
//! Every request is a JSON object:
//!
//! ```json
//! { "op": "simson", "scene": { ... }, "theta": 0.7 }
//! ```
//!
//! `op` is required on `/v1` and optional (but must agree) on `/v1/<op>`.
//! Other optional fields: `samples` (envelope, verify, render), `expected_cusps`
//! (verify) and `envelope` (render: also draw the family and envelope).
//! Responses are canonical JSON. Errors are
//! `{ "error": { "kind": ..., "path": ..., "message": ... } }`.

use serde::Deserialize;
use serde_json::{json, Value};
use wallace_core::envelope::{build_family, detect_cusps, envelope_points};
use wallace_core::fitting::report_for_trace;
use wallace_core::scene::{render_svg, scene_from_value, to_canonical_json, write_report, Artifacts, Scene};
use wallace_core::simson::{construction_trace, ProbePoint};

use crate::args::VERIFY_SAMPLES;

pub const OPS: [&str; 4] = ["simson", "envelope", "verify", "render"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub body: String,
}

impl Response {
    fn ok(value: &Value) -> Self {
        Response { status: 200, body: to_canonical_json(value) }
    }

    fn error(status: u16, kind: &str, path: &str, message: impl Into<String>) -> Self {
        let body = json!({ "error": { "kind": kind, "path": path, "message": message.into() } });
        Response { status, body: to_canonical_json(&body) }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Request {
    op: Option<String>,
    scene: Value,
    theta: Option<f64>,
    samples: Option<usize>,
    expected_cusps: Option<u32>,
    envelope: Option<bool>,
}

/// Handles one request. `route_op` is the `<op>` of `/v1/<op>`, if any.
pub fn dispatch(route_op: Option<&str>, body: &str) -> Response {
    if let Some(op) = route_op.filter(|op| !OPS.contains(op)) {
        return Response::error(404, "not_found", "op", format!("unknown operation {op:?}"));
    }
    let mut de = serde_json::Deserializer::from_str(body);
    let request: Request = match serde_path_to_error::deserialize(&mut de) {
        Ok(r) => r,
        Err(e) => return Response::error(400, "schema", &e.path().to_string(), e.inner().to_string()),
    };
    if let Err(e) = de.end() {
        return Response::error(400, "schema", ".", e.to_string());
    }
    let op = match (route_op, request.op.as_deref()) {
        (Some(route), Some(body_op)) if route != body_op => {
            return Response::error(400, "schema", "op", format!("{body_op:?} conflicts with the route {route:?}"));
        }
        (Some(route), _) => route.to_string(),
        (None, Some(op)) if OPS.contains(&op) => op.to_string(),
        (None, Some(op)) => {
            return Response::error(400, "schema", "op", format!("unknown operation {op:?}, expected one of {OPS:?}"))
        }
        (None, None) => return Response::error(400, "schema", "op", "missing field"),
    };
    let mut scene = match scene_from_value(request.scene) {
        Ok(s) => s,
        Err(e) => {
            let e = e.prefixed("scene");
            let kind = match e {
                wallace_core::SceneError::Schema { .. } => "schema",
                wallace_core::SceneError::Range { .. } => "range",
            };
            return Response::error(400, kind, e.path(), e.to_string());
        }
    };
    if let Some(theta) = request.theta {
        if let Err(e) = scene.set_probe_theta(theta) {
            return Response::error(400, "range", "theta", e.to_string());
        }
    }
    if let Some(samples) = request.samples {
        if let Err(e) = scene.set_samples(samples) {
            return Response::error(400, "range", "samples", e.to_string());
        }
    }
    match op.as_str() {
        "simson" => simson(&scene),
        "envelope" => envelope(&scene),
        "verify" => verify(&scene, request.samples.unwrap_or(VERIFY_SAMPLES), request.expected_cusps),
        _ => render(&scene, request.envelope.unwrap_or(false)),
    }
}

fn internal(e: impl std::fmt::Display) -> Response {
    Response::error(500, "internal", ".", e.to_string())
}

fn simson(scene: &Scene) -> Response {
    let theta = scene.probe_theta();
    let trace = match construction_trace(scene.polygon(), ProbePoint::new(theta)) {
        Ok(t) => t,
        Err(e) => return Response::error(400, "geometry", "theta", e.to_string()),
    };
    let mut value = serde_json::to_value(&trace.result).expect("result serializes");
    let obj = value.as_object_mut().expect("object");
    obj.insert("theta".into(), json!(theta));
    obj.insert("probe_point".into(), serde_json::to_value(trace.probe_point).expect("point serializes"));
    obj.insert("steps".into(), serde_json::to_value(&trace.steps).expect("steps serialize"));
    Response::ok(&value)
}

fn envelope(scene: &Scene) -> Response {
    let family = match build_family(scene.polygon(), scene.samples()) {
        Ok(f) => f,
        Err(e) => return internal(e),
    };
    let trace = match envelope_points(&family) {
        Ok(t) => t,
        Err(e) => return internal(e),
    };
    let cusps = detect_cusps(&trace);
    let mut value = serde_json::to_value(&trace).expect("trace serializes");
    let obj = value.as_object_mut().expect("object");
    obj.insert("cusps".into(), serde_json::to_value(&cusps).expect("cusps serialize"));
    obj.insert("family".into(), json!({ "thetas": family.thetas, "lines": family.lines }));
    Response::ok(&value)
}

fn verify(scene: &Scene, samples: usize, expected: Option<u32>) -> Response {
    let poly = scene.polygon();
    let k = expected.unwrap_or(poly.len() as u32);
    if !(3..=64).contains(&k) {
        return Response::error(400, "range", "expected_cusps", format!("{k} is outside 3..=64"));
    }
    let result = build_family(poly, samples)
        .and_then(|f| envelope_points(&f))
        .map_err(|e| e.to_string())
        .and_then(|t| report_for_trace(poly, &t, samples, k).map_err(|e| e.to_string()));
    match result {
        Ok(report) => Response { status: 200, body: write_report(&report) },
        Err(e) => internal(e),
    }
}

fn render(scene: &Scene, with_envelope: bool) -> Response {
    let trace = match construction_trace(scene.polygon(), ProbePoint::new(scene.probe_theta())) {
        Ok(t) => t,
        Err(e) => return Response::error(400, "geometry", "theta", e.to_string()),
    };
    let mut artifacts = Artifacts { trace: Some(&trace), ..Default::default() };
    let family;
    let env;
    let cusps;
    if with_envelope {
        family = match build_family(scene.polygon(), scene.samples()) {
            Ok(f) => f,
            Err(e) => return internal(e),
        };
        env = match envelope_points(&family) {
            Ok(t) => t,
            Err(e) => return internal(e),
        };
        cusps = detect_cusps(&env);
        artifacts.family = Some(&family);
        artifacts.envelope = Some(&env);
        artifacts.cusps = &cusps;
    }
    match render_svg(scene, &artifacts) {
        Ok(svg) => Response::ok(&json!({ "svg": svg })),
        Err(e) => internal(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCENE: &str = r#"{"schema_version": 1, "circle": {"center": {"x": 0, "y": 0}, "radius": 1},
                           "polygon": {"kind": "regular", "n": 3, "phase": 1.5707963267948966}}"#;

    fn body(extra: &str) -> String {
        format!(r#"{{"scene": {SCENE}{extra}}}"#)
    }

    fn error_path(r: &Response) -> String {
        let v: Value = serde_json::from_str(&r.body).unwrap();
        v["error"]["path"].as_str().unwrap().to_string()
    }

    #[test]
    fn simson_echoes_kernel_result() {
        let r = dispatch(Some("simson"), &body(r#", "theta": 0.7"#));
        assert_eq!(r.status, 200, "{}", r.body);
        let v: Value = serde_json::from_str(&r.body).unwrap();
        assert_eq!(v["feet"].as_array().unwrap().len(), 3);
        assert_eq!(v["degenerate"], Value::Bool(false));
        assert_eq!(v["steps"].as_array().unwrap().len(), 10);
        assert!(v["line"]["a"].is_number());
    }

    #[test]
    fn op_routing_on_root() {
        let r = dispatch(None, &body(r#", "op": "simson", "theta": 0.7"#));
        assert_eq!(r.status, 200);
        assert_eq!(r, dispatch(Some("simson"), &body(r#", "theta": 0.7"#)));
        let r = dispatch(None, &body(""));
        assert_eq!((r.status, error_path(&r).as_str()), (400, "op"));
        let r = dispatch(None, &body(r#", "op": "fly""#));
        assert_eq!((r.status, error_path(&r).as_str()), (400, "op"));
        let r = dispatch(Some("simson"), &body(r#", "op": "verify""#));
        assert_eq!((r.status, error_path(&r).as_str()), (400, "op"));
        assert_eq!(dispatch(Some("fly"), &body("")).status, 404);
    }

    #[test]
    fn envelope_returns_trace_and_family() {
        let r = dispatch(Some("envelope"), &body(r#", "samples": 100"#));
        assert_eq!(r.status, 200, "{}", r.body);
        let v: Value = serde_json::from_str(&r.body).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 100);
        assert_eq!(v["cusps"].as_array().unwrap().len(), 3);
        assert_eq!(v["family"]["lines"].as_array().unwrap().len(), 100);
    }

    #[test]
    fn verify_and_render() {
        let r = dispatch(Some("verify"), &body(r#", "samples": 720"#));
        assert_eq!(r.status, 200);
        let v: Value = serde_json::from_str(&r.body).unwrap();
        assert_eq!(v["passed"], Value::Bool(true));
        assert_eq!(v["schema_version"], Value::from(1));
        let r = dispatch(Some("render"), &body(r#", "theta": 0.7"#));
        let v: Value = serde_json::from_str(&r.body).unwrap();
        assert!(v["svg"].as_str().unwrap().starts_with("<?xml"));
    }

    #[test]
    fn malformed_bodies_name_the_field() {
        let cases = [
            (body(r#", "theta": "x""#), "theta"),
            (body(r#", "colour": 1"#), "."),
            (body(r#", "samples": 4"#), "samples"),
            (SCENE.replace('{', "{\"scene\": {").replacen("\"n\": 3", "\"n\": 2", 1), "."),
            (body("").replace("\"n\": 3", "\"n\": 2"), "scene.polygon.n"),
            (body("").replace("\"radius\": 1", "\"radius\": \"big\""), "scene.circle.radius"),
            ("not json".to_string(), "."),
            ("{}".to_string(), "."),
        ];
        for (text, path) in cases {
            let r = dispatch(Some("simson"), &text);
            assert_eq!(r.status, 400, "{text}: {}", r.body);
            if path != "." {
                assert_eq!(error_path(&r), path, "{text}");
            }
        }
    }

    #[test]
    fn probe_on_vertex_is_flagged() {
        let r = dispatch(Some("simson"), &body(r#", "theta": 1.5707963267948966"#));
        assert_eq!(r.status, 200, "{}", r.body);
        let v: Value = serde_json::from_str(&r.body).unwrap();
        assert_eq!(v["degenerate"], Value::Bool(true));
    }
}
