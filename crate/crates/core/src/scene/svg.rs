//! SVG rendering of scenes and their computed artifacts.
//!
//! Output is byte-stable: numbers use fixed six-decimal formatting, element
//! order is fixed, and nothing depends on locale or time.

use std::fmt::Write as _;

use super::{Scene, Stroke};
use crate::curves::CurveSample;
use crate::envelope::{Cusp, EnvelopeTrace, LineFamily};
use crate::geometry::{Line, Point};
use crate::simson::{vertex_label, ConstructionTrace, Layer, TraceObject};

pub const WIDTH: u32 = 800;
pub const HEIGHT: u32 = 800;
/// Fraction of the smaller canvas dimension spanned by the framed diameter.
pub const FRAME_FILL: f64 = 0.8;

const GREEN: &str = "#2f9e44";
const BLUE: &str = "#1c62c4";
const ORANGE: &str = "#f08c00";
const BLACK: &str = "#000000";
const CIRCLE_COLOR: &str = "#868e96";
const POLYGON_COLOR: &str = "#495057";
const PROBE_COLOR: &str = "#e03131";

const MARKER_RADIUS: f64 = 3.5;
const FONT_SIZE: f64 = 16.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("{artifact} was computed for a different polygon than the scene's")]
    InconsistentArtifacts { artifact: &'static str },
}

/// Palette: triangle-level construction in green and blue, polygon-level
/// feet and final line in orange, envelope in black.
pub fn default_stroke(layer: Layer, n: usize) -> Stroke {
    let top = if n == 3 { BLUE } else { ORANGE };
    match layer {
        Layer::Sides => Stroke::new(GREEN, 1.5),
        Layer::Perpendiculars => Stroke::new(GREEN, 1.0),
        Layer::Feet => Stroke::new(top, 1.0),
        Layer::SubSimsonLines => Stroke::new(BLUE, 1.0),
        Layer::SimsonLine => Stroke::new(top, 2.0),
        Layer::Locus => Stroke::new("#74a0d8", 0.5),
        Layer::HypocycloidOverlay => Stroke::new("#c2255c", 1.5),
        Layer::Envelope => Stroke::new(BLACK, 2.0),
    }
}

/// Everything that can be drawn on top of a scene. All fields are optional.
#[derive(Debug, Clone, Copy, Default)]
pub struct Artifacts<'a> {
    pub trace: Option<&'a ConstructionTrace>,
    /// Family of Simson lines, drawn on the locus layer.
    pub family: Option<&'a LineFamily>,
    /// Further locus lines, e.g. those accumulated by an animation.
    pub locus: &'a [Line],
    pub envelope: Option<&'a EnvelopeTrace>,
    /// Cusp markers, drawn with the envelope.
    pub cusps: &'a [Cusp],
    pub curve: Option<&'a CurveSample>,
    /// Smallest radius, about the circle centre, that the frame must show.
    pub frame_radius: Option<f64>,
}

/// Drawable in pixel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Segment { from: Point, to: Point },
    Polyline { points: Vec<Point> },
    Circle { center: Point, radius: f64 },
    Marker { at: Point },
    Label { at: Point, text: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub id: String,
    pub stroke: Stroke,
    pub elements: Vec<Element>,
}

/// A laid-out figure, ready to serialize.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderDoc {
    pub width: u32,
    pub height: u32,
    /// Pixels per scene unit.
    pub scale: f64,
    /// Scene point drawn at the canvas centre.
    pub origin: Point,
    pub groups: Vec<Group>,
}

struct View {
    origin: Point,
    scale: f64,
    w: f64,
    h: f64,
}

impl View {
    fn px(&self, p: Point) -> Point {
        Point::new(
            0.5 * self.w + self.scale * (p.x - self.origin.x),
            0.5 * self.h - self.scale * (p.y - self.origin.y),
        )
    }

    fn clamp(&self, p: Point) -> Point {
        Point::new(p.x.clamp(0.0, self.w), p.y.clamp(0.0, self.h))
    }

    /// Liang–Barsky clip of `p + t d`, `t` in `[t0, t1]`, to the canvas.
    fn clip(&self, p: Point, d: Point, mut t0: f64, mut t1: f64) -> Option<(Point, Point)> {
        for (q, r) in [(-d.x, p.x), (d.x, self.w - p.x), (-d.y, p.y), (d.y, self.h - p.y)] {
            if q == 0.0 {
                if r < 0.0 {
                    return None;
                }
            } else {
                let t = r / q;
                if q < 0.0 {
                    t0 = t0.max(t);
                } else {
                    t1 = t1.min(t);
                }
            }
        }
        if t0 > t1 || !t0.is_finite() || !t1.is_finite() {
            return None;
        }
        Some((self.clamp(p + d * t0), self.clamp(p + d * t1)))
    }

    fn line(&self, line: &Line) -> Option<Element> {
        let foot = self.origin - line.normal() * line.eval(self.origin);
        let d = line.direction();
        let (from, to) = self.clip(self.px(foot), Point::new(d.x, -d.y), f64::NEG_INFINITY, f64::INFINITY)?;
        (from != to).then_some(Element::Segment { from, to })
    }

    /// Clipped polyline, split into the runs that stay on the canvas.
    fn polyline(&self, points: &[Point], closed: bool) -> Vec<Element> {
        let mut px: Vec<Point> = points.iter().map(|&p| self.px(p)).collect();
        if closed && px.len() > 2 {
            px.push(px[0]);
        }
        let mut runs = Vec::new();
        let mut run: Vec<Point> = Vec::new();
        for w in px.windows(2) {
            match self.clip(w[0], w[1] - w[0], 0.0, 1.0) {
                Some((a, b)) => {
                    if run.last() != Some(&a) {
                        if run.len() > 1 {
                            runs.push(std::mem::take(&mut run));
                        }
                        run.clear();
                        run.push(a);
                    }
                    run.push(b);
                }
                None => {
                    if run.len() > 1 {
                        runs.push(std::mem::take(&mut run));
                    }
                    run.clear();
                }
            }
        }
        if run.len() > 1 {
            runs.push(run);
        }
        runs.into_iter().map(|points| Element::Polyline { points }).collect()
    }

    fn inside(&self, p: Point) -> bool {
        (0.0..=self.w).contains(&p.x) && (0.0..=self.h).contains(&p.y)
    }

    fn marker(&self, p: Point) -> Option<Element> {
        let at = self.px(p);
        self.inside(at).then_some(Element::Marker { at })
    }

    fn label(&self, p: Point, offset: Point, text: &str) -> Option<Element> {
        let at = self.px(p) + offset;
        self.inside(at).then(|| Element::Label { at, text: text.to_string() })
    }
}

fn frame(scene: &Scene, artifacts: &Artifacts<'_>) -> View {
    let c = scene.circle().center;
    let reach = |points: &[Point]| points.iter().map(|p| p.distance(c)).filter(|d| d.is_finite()).fold(0.0, f64::max);
    let mut radius = scene.circle().radius.max(artifacts.frame_radius.unwrap_or(0.0));
    if let Some(env) = artifacts.envelope {
        radius = radius.max(reach(&env.points));
    }
    if let Some(curve) = artifacts.curve {
        radius = radius.max(reach(&curve.points));
    }
    let (w, h) = (f64::from(WIDTH), f64::from(HEIGHT));
    View { origin: c, scale: 0.5 * FRAME_FILL * w.min(h) / radius, w, h }
}

impl RenderDoc {
    pub fn build(scene: &Scene, artifacts: &Artifacts<'_>) -> Result<RenderDoc, RenderError> {
        if artifacts.trace.is_some_and(|t| &t.polygon != scene.polygon()) {
            return Err(RenderError::InconsistentArtifacts { artifact: "construction trace" });
        }
        if artifacts.family.is_some_and(|f| &f.poly != scene.polygon()) {
            return Err(RenderError::InconsistentArtifacts { artifact: "line family" });
        }
        let view = frame(scene, artifacts);
        let display = scene.display();
        let poly = scene.polygon();
        let circle = scene.circle();
        let mut groups = Vec::new();

        groups.push(Group {
            id: "circle".into(),
            stroke: Stroke::new(CIRCLE_COLOR, 1.0),
            elements: vec![Element::Circle { center: view.px(circle.center), radius: view.scale * circle.radius }],
        });

        if display.polygon {
            let vertices = poly.vertices();
            let mut elements = view.polyline(&vertices, true);
            for (i, v) in vertices.iter().enumerate() {
                let out = (*v - circle.center) * (1.0 / circle.radius);
                let offset = Point::new(14.0 * out.x - 6.0, -14.0 * out.y + 6.0);
                elements.extend(view.label(*v, offset, vertex_label(i)));
            }
            groups.push(Group { id: "polygon".into(), stroke: Stroke::new(POLYGON_COLOR, 1.0), elements });
        }

        if let Some(trace) = artifacts.trace {
            let mut order: Vec<Layer> = Vec::new();
            for step in &trace.steps {
                if !order.contains(&step.layer) {
                    order.push(step.layer);
                }
            }
            for layer in order.into_iter().filter(|&l| display.shows(l)) {
                let mut elements = Vec::new();
                for step in trace.steps.iter().filter(|s| s.layer == layer) {
                    match &step.object {
                        TraceObject::Line { line } | TraceObject::Perpendicular { line, .. } => {
                            elements.extend(view.line(line));
                        }
                        TraceObject::Point { point } => {
                            elements.extend(view.marker(*point));
                            elements.extend(view.label(*point, Point::new(6.0, -6.0), &step.label));
                        }
                    }
                }
                groups.push(Group { id: layer.id().into(), stroke: scene.stroke(layer), elements });
            }
            let mut elements = Vec::new();
            elements.extend(view.marker(trace.probe_point));
            elements.extend(view.label(trace.probe_point, Point::new(6.0, -6.0), "P"));
            groups.push(Group { id: "probe".into(), stroke: Stroke::new(PROBE_COLOR, 1.0), elements });
        }

        let family = artifacts.family.map_or(&[][..], |f| &f.lines[..]);
        if display.locus && !(family.is_empty() && artifacts.locus.is_empty()) {
            let elements = family.iter().chain(artifacts.locus).filter_map(|l| view.line(l)).collect();
            groups.push(Group { id: Layer::Locus.id().into(), stroke: scene.stroke(Layer::Locus), elements });
        }

        if let Some(curve) = artifacts.curve.filter(|_| display.hypocycloid_overlay) {
            let layer = Layer::HypocycloidOverlay;
            groups.push(Group {
                id: layer.id().into(),
                stroke: scene.stroke(layer),
                elements: view.polyline(&curve.points, true),
            });
        }

        if let Some(env) = artifacts.envelope.filter(|_| display.envelope) {
            let mut elements = view.polyline(&env.points, true);
            elements.extend(artifacts.cusps.iter().filter_map(|c| view.marker(c.point)));
            groups.push(Group { id: Layer::Envelope.id().into(), stroke: scene.stroke(Layer::Envelope), elements });
        }

        Ok(RenderDoc { width: WIDTH, height: HEIGHT, scale: view.scale, origin: view.origin, groups })
    }

    pub fn group(&self, id: &str) -> Option<&Group> {
        self.groups.iter().find(|g| g.id == id)
    }

    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
            w = self.width,
            h = self.height
        );
        for g in &self.groups {
            let color = &g.stroke.color;
            let _ = writeln!(
                s,
                "  <g id=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{}\">",
                g.id,
                num(g.stroke.width)
            );
            for e in &g.elements {
                s.push_str("    ");
                match e {
                    Element::Segment { from, to } => {
                        let _ = write!(
                            s,
                            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                            num(from.x),
                            num(from.y),
                            num(to.x),
                            num(to.y)
                        );
                    }
                    Element::Polyline { points } => {
                        s.push_str("<polyline points=\"");
                        for (i, p) in points.iter().enumerate() {
                            if i > 0 {
                                s.push(' ');
                            }
                            let _ = write!(s, "{},{}", num(p.x), num(p.y));
                        }
                        s.push_str("\"/>");
                    }
                    Element::Circle { center, radius } => {
                        let _ = write!(s, "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>", num(center.x), num(center.y), num(*radius));
                    }
                    Element::Marker { at } => {
                        let _ = write!(
                            s,
                            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{color}\" stroke=\"none\"/>",
                            num(at.x),
                            num(at.y),
                            num(MARKER_RADIUS)
                        );
                    }
                    Element::Label { at, text } => {
                        let _ = write!(
                            s,
                            "<text x=\"{}\" y=\"{}\" font-family=\"serif\" font-size=\"{}\" fill=\"{color}\" stroke=\"none\">{}</text>",
                            num(at.x),
                            num(at.y),
                            num(FONT_SIZE),
                            escape(text)
                        );
                    }
                }
                s.push('\n');
            }
            s.push_str("  </g>\n");
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Renders a scene and its artifacts as an SVG 1.1 document.
pub fn render_svg(scene: &Scene, artifacts: &Artifacts<'_>) -> Result<String, RenderError> {
    Ok(RenderDoc::build(scene, artifacts)?.to_svg())
}

/// Fixed six-decimal formatting, with negative zero printed as zero.
pub fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{sample_hypocycloid, HypocycloidSpec};
    use crate::envelope::{build_family, detect_cusps, envelope_points};
    use crate::simson::{construction_trace, ProbePoint};
    use std::f64::consts::FRAC_PI_2;

    fn triangle_scene() -> Scene {
        let mut s = Scene::regular(3, FRAC_PI_2).unwrap();
        s.set_probe_theta(0.7).unwrap();
        s
    }

    fn endpoints(doc: &RenderDoc) -> Vec<Point> {
        let mut out = Vec::new();
        for g in &doc.groups {
            for e in &g.elements {
                match e {
                    Element::Segment { from, to } => out.extend([*from, *to]),
                    Element::Polyline { points } => out.extend(points.iter().copied()),
                    _ => {}
                }
            }
        }
        out
    }

    #[test]
    fn number_format() {
        assert_eq!(num(-0.0), "0.000000");
        assert_eq!(num(-1e-9), "0.000000");
        assert_eq!(num(1.25), "1.250000");
        assert_eq!(num(-399.9999996), "-400.000000");
    }

    #[test]
    fn clipping_stays_on_canvas() {
        let scene = triangle_scene();
        let trace = construction_trace(scene.polygon(), ProbePoint::new(0.7)).unwrap();
        let family = build_family(scene.polygon(), 100).unwrap();
        let doc = RenderDoc::build(&scene, &Artifacts { trace: Some(&trace), family: Some(&family), ..Default::default() })
            .unwrap();
        let pts = endpoints(&doc);
        assert!(pts.len() > 200);
        for p in pts {
            assert!((0.0..=800.0).contains(&p.x) && (0.0..=800.0).contains(&p.y), "{p:?}");
        }
    }

    #[test]
    fn lines_missing_the_canvas_are_dropped() {
        let scene = triangle_scene();
        let far = Line::from_coefficients(1.0, 0.0, -100.0).unwrap();
        let doc = RenderDoc::build(&scene, &Artifacts { locus: &[far], ..Default::default() }).unwrap();
        assert!(doc.group("locus").unwrap().elements.is_empty());
    }

    #[test]
    fn polyline_leaving_the_canvas_is_split() {
        let scene = triangle_scene();
        let view = frame(&scene, &Artifacts::default());
        let pts = [Point::new(0.0, 0.0), Point::new(3.0, 0.0), Point::new(3.0, 0.5), Point::new(0.0, 0.5)];
        let runs = view.polyline(&pts, false);
        assert_eq!(runs.len(), 2);
        for r in &runs {
            let Element::Polyline { points } = r else { panic!() };
            assert_eq!(points.len(), 2);
            assert!(points.iter().all(|p| view.inside(*p)));
        }
    }

    #[test]
    fn every_trace_element_lands_in_its_group() {
        for n in [3, 5] {
            let scene = Scene::regular(n, 0.3).unwrap();
            let trace = construction_trace(scene.polygon(), ProbePoint::new(0.0)).unwrap();
            let doc = RenderDoc::build(&scene, &Artifacts { trace: Some(&trace), ..Default::default() }).unwrap();
            for layer in [Layer::Sides, Layer::SubSimsonLines, Layer::Perpendiculars, Layer::SimsonLine] {
                let drawn = doc.group(layer.id()).map_or(0, |g| g.elements.len());
                assert_eq!(drawn, trace.count(layer), "n = {n}, {layer:?}");
            }
            let feet = doc.group("feet").unwrap();
            let markers = feet.elements.iter().filter(|e| matches!(e, Element::Marker { .. })).count();
            assert_eq!(markers, n);
        }
    }

    #[test]
    fn hidden_layers_are_omitted() {
        let mut scene = triangle_scene();
        scene.display_mut().set("perpendiculars", false).unwrap();
        scene.display_mut().set("polygon", false).unwrap();
        let trace = construction_trace(scene.polygon(), ProbePoint::new(0.7)).unwrap();
        let svg = render_svg(&scene, &Artifacts { trace: Some(&trace), ..Default::default() }).unwrap();
        assert!(!svg.contains("id=\"perpendiculars\""));
        assert!(!svg.contains("id=\"polygon\""));
        assert!(svg.contains("id=\"sides\""));
        assert!(!svg.contains("opacity"));
    }

    #[test]
    fn group_order_and_palette() {
        let scene = Scene::regular(4, 0.0).unwrap();
        let trace = construction_trace(scene.polygon(), ProbePoint::new(1.0)).unwrap();
        let family = build_family(scene.polygon(), 100).unwrap();
        let env = envelope_points(&family).unwrap();
        let spec = HypocycloidSpec::new(Point::ORIGIN, 1.5, 4, 0.0).unwrap();
        let curve = sample_hypocycloid(&spec, 200).unwrap();
        let doc = RenderDoc::build(
            &scene,
            &Artifacts {
                trace: Some(&trace),
                family: Some(&family),
                envelope: Some(&env),
                curve: Some(&curve),
                ..Default::default()
            },
        )
        .unwrap();
        let ids: Vec<&str> = doc.groups.iter().map(|g| g.id.as_str()).collect();
        assert_eq!(
            ids,
            [
                "circle",
                "polygon",
                "sub_simson_lines",
                "perpendiculars",
                "feet",
                "simson_line",
                "probe",
                "locus",
                "hypocycloid_overlay",
                "envelope"
            ]
        );
        assert_eq!(doc.group("simson_line").unwrap().stroke.color, ORANGE);
        assert_eq!(doc.group("feet").unwrap().stroke.color, ORANGE);
        assert_eq!(doc.group("sub_simson_lines").unwrap().stroke.color, BLUE);
        assert_eq!(doc.group("perpendiculars").unwrap().stroke.color, GREEN);
        assert_eq!(doc.group("envelope").unwrap().stroke.color, BLACK);

        let tri = triangle_scene();
        let trace = construction_trace(tri.polygon(), ProbePoint::new(0.7)).unwrap();
        let doc = RenderDoc::build(&tri, &Artifacts { trace: Some(&trace), ..Default::default() }).unwrap();
        assert_eq!(doc.group("sides").unwrap().stroke.color, GREEN);
        assert_eq!(doc.group("feet").unwrap().stroke.color, BLUE);
        assert_eq!(doc.group("simson_line").unwrap().stroke.color, BLUE);
    }

    #[test]
    fn frame_fits_circle_or_envelope() {
        let scene = triangle_scene();
        let doc = RenderDoc::build(&scene, &Artifacts::default()).unwrap();
        assert!((doc.scale - 320.0).abs() < 1e-12);

        let family = build_family(scene.polygon(), 400).unwrap();
        let env = envelope_points(&family).unwrap();
        let cusps = detect_cusps(&env);
        let doc =
            RenderDoc::build(&scene, &Artifacts { envelope: Some(&env), cusps: &cusps, ..Default::default() }).unwrap();
        // deltoid cusps reach 1.5 R
        assert!((doc.scale * 1.5 - 320.0).abs() < 1.0, "{}", doc.scale);
        let g = doc.group("envelope").unwrap();
        assert_eq!(g.elements.iter().filter(|e| matches!(e, Element::Marker { .. })).count(), 3);
        assert_eq!(g.elements.iter().filter(|e| matches!(e, Element::Polyline { .. })).count(), 1);
    }

    #[test]
    fn mismatched_polygon_is_rejected() {
        let scene = triangle_scene();
        let other = Scene::regular(3, 0.0).unwrap();
        let trace = construction_trace(other.polygon(), ProbePoint::new(0.7)).unwrap();
        let err = render_svg(&scene, &Artifacts { trace: Some(&trace), ..Default::default() }).unwrap_err();
        assert!(matches!(err, RenderError::InconsistentArtifacts { .. }));
        let family = build_family(other.polygon(), 64).unwrap();
        assert!(render_svg(&scene, &Artifacts { family: Some(&family), ..Default::default() }).is_err());
    }

    #[test]
    fn deterministic() {
        let scene = triangle_scene();
        let run = || {
            let trace = construction_trace(scene.polygon(), ProbePoint::new(0.7)).unwrap();
            let family = build_family(scene.polygon(), 100).unwrap();
            let env = envelope_points(&family).unwrap();
            render_svg(&scene, &Artifacts { trace: Some(&trace), family: Some(&family), envelope: Some(&env), ..Default::default() })
                .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn labels_are_escaped() {
        assert_eq!(escape("P -> <a & b>"), "P -&gt; &lt;a &amp; b&gt;");
    }
}
