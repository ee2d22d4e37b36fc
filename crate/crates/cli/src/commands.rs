use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use tempfile::NamedTempFile;
use wallace_core::curves::sample_hypocycloid;
use wallace_core::envelope::{build_family, detect_cusps, envelope_points, probe_grid, EnvelopeTrace};
use wallace_core::fitting::report_for_trace;
use wallace_core::scene::{parse_scene, render_svg, to_canonical_json, write_report, Artifacts, Scene};
use wallace_core::simson::{construction_trace, ProbePoint};

use crate::args::{AnimateArgs, Command, EnvelopeArgs, RenderArgs, SceneArgs, VerifyArgs, VERIFY_SAMPLES};

/// Samples of a fitted overlay curve.
const OVERLAY_SAMPLES: usize = 720;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad scene, flag value or input file.
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::VerificationFailed => 3,
        }
    }
}

/// Runs a single-shot subcommand. `serve` is handled by [`crate::serve`].
pub fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Render(args) => run_render(&args).map(|()| Outcome::Success),
        Command::Envelope(args) => run_envelope(&args).map(|()| Outcome::Success),
        Command::Verify(args) => run_verify(&args),
        Command::Animate(args) => run_animate(&args).map(|()| Outcome::Success),
        Command::Serve(args) => crate::serve::run_serve(&args).map(|()| Outcome::Success),
    }
}

/// `regular:<n>[:<phase>]`, phase defaulting to a vertex at the top.
fn parse_shorthand(spec: &str) -> Result<Scene, CliError> {
    let bad = || CliError::Input(format!("invalid scene shorthand {spec:?}, expected regular:<n>[:<phase>]"));
    let mut parts = spec.split(':').skip(1);
    let n = parts.next().and_then(|s| s.parse::<usize>().ok()).ok_or_else(bad)?;
    let phase = match parts.next() {
        Some(p) => p.parse::<f64>().ok().filter(|p| p.is_finite()).ok_or_else(bad)?,
        None => FRAC_PI_2,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Scene::regular(n, phase).map_err(input)
}

pub fn load_scene(args: &SceneArgs) -> Result<Scene, CliError> {
    let mut scene = if args.scene.starts_with("regular:") {
        parse_shorthand(&args.scene)?
    } else {
        let text = fs::read_to_string(&args.scene).map_err(|e| CliError::Input(format!("{}: {e}", args.scene)))?;
        parse_scene(&text).map_err(|e| CliError::Input(format!("{}: {e}", args.scene)))?
    };
    if let Some(samples) = args.samples {
        scene.set_samples(samples).map_err(input)?;
    }
    for name in &args.hide {
        scene.display_mut().set(name, false).map_err(input)?;
    }
    for name in &args.show {
        scene.display_mut().set(name, true).map_err(input)?;
    }
    Ok(scene)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let fail = |e: &dyn std::fmt::Display| CliError::Internal(format!("cannot write {}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

pub fn render(scene: &Scene, theta: f64) -> Result<String, CliError> {
    let trace = construction_trace(scene.polygon(), ProbePoint::new(theta))
        .map_err(|e| CliError::Input(format!("no construction at theta = {theta}: {e}")))?;
    render_svg(scene, &Artifacts { trace: Some(&trace), ..Default::default() }).map_err(internal)
}

fn run_render(args: &RenderArgs) -> Result<(), CliError> {
    let mut scene = load_scene(&args.scene)?;
    if let Some(theta) = args.theta {
        scene.set_probe_theta(theta).map_err(input)?;
    }
    let svg = render(&scene, scene.probe_theta())?;
    write_atomic(&args.output, &svg)
}

pub struct EnvelopeFigure {
    pub svg: String,
    pub trace: EnvelopeTrace,
}

pub fn envelope_figure(scene: &Scene, overlay: bool) -> Result<EnvelopeFigure, CliError> {
    let poly = scene.polygon();
    let family = build_family(poly, scene.samples()).map_err(internal)?;
    let trace = envelope_points(&family).map_err(internal)?;
    let cusps = detect_cusps(&trace);
    let curve = if overlay {
        let report = report_for_trace(poly, &trace, scene.samples(), poly.len() as u32).map_err(internal)?;
        Some(sample_hypocycloid(&report.spec, OVERLAY_SAMPLES).map_err(internal)?)
    } else {
        None
    };
    let svg = render_svg(
        scene,
        &Artifacts {
            family: Some(&family),
            envelope: Some(&trace),
            cusps: &cusps,
            curve: curve.as_ref(),
            ..Default::default()
        },
    )
    .map_err(internal)?;
    Ok(EnvelopeFigure { svg, trace })
}

fn run_envelope(args: &EnvelopeArgs) -> Result<(), CliError> {
    let scene = load_scene(&args.scene)?;
    let figure = envelope_figure(&scene, args.overlay)?;
    if let Some(path) = &args.trace_json {
        write_atomic(path, &to_canonical_json(&figure.trace))?;
    }
    write_atomic(&args.output, &figure.svg)
}

/// Radial ripple that no hypocycloid fits; exercises the failure path.
fn corrupt(trace: &EnvelopeTrace, scene: &Scene) -> EnvelopeTrace {
    let c = scene.circle().center;
    let points = trace
        .thetas
        .iter()
        .zip(&trace.points)
        .map(|(&t, &p)| c + (p - c) * (1.0 + 0.2 * (37.0 * t).sin()))
        .collect();
    let mut out = EnvelopeTrace::from_points(trace.thetas.clone(), points);
    out.dropped = trace.dropped.clone();
    out
}

fn run_verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let scene = load_scene(&args.scene)?;
    let samples = args.scene.samples.unwrap_or(VERIFY_SAMPLES);
    let poly = scene.polygon();
    let cusps = args.cusps.unwrap_or(poly.len() as u32);
    if !(3..=64).contains(&cusps) {
        return Err(CliError::Input(format!("--cusps {cusps} is outside 3..=64")));
    }
    let family = build_family(poly, samples).map_err(internal)?;
    let mut trace = envelope_points(&family).map_err(internal)?;
    if args.corrupt_trace {
        trace = corrupt(&trace, &scene);
    }
    let report = report_for_trace(poly, &trace, samples, cusps).map_err(internal)?;
    write_atomic(&args.output, &write_report(&report))?;
    println!(
        "{}: {} cusps detected, rms {:.3e}, max deviation {:.3e} (R = {:.6})",
        if report.passed { "passed" } else { "FAILED" },
        report.n_cusps_detected,
        report.rms,
        report.max_dev,
        report.spec.fixed_radius
    );
    Ok(if report.passed { Outcome::Success } else { Outcome::VerificationFailed })
}

pub fn frame_name(i: usize) -> String {
    format!("frame_{:04}.svg", i + 1)
}

fn run_animate(args: &AnimateArgs) -> Result<(), CliError> {
    let scene = load_scene(&args.scene)?;
    let poly = scene.polygon();
    fs::create_dir_all(&args.output).map_err(|e| internal(format!("{}: {e}", args.output.display())))?;

    // Frame every image to the full envelope so the view does not jump.
    let c = scene.circle().center;
    let frame_radius = build_family(poly, scene.samples())
        .and_then(|f| envelope_points(&f))
        .ok()
        .map(|t| t.points.iter().map(|p| p.distance(c)).fold(0.0, f64::max));

    let thetas = probe_grid(poly, args.frames as usize);
    let mut locus = Vec::with_capacity(thetas.len());
    for (i, &theta) in thetas.iter().enumerate() {
        let trace = construction_trace(poly, ProbePoint::new(theta)).map_err(internal)?;
        locus.push(trace.result.line);
        let mut frame = scene.clone();
        frame.set_probe_theta(theta).map_err(internal)?;
        let svg = render_svg(&frame, &Artifacts { trace: Some(&trace), locus: &locus, frame_radius, ..Default::default() })
            .map_err(internal)?;
        write_atomic(&args.output.join(frame_name(i)), &svg)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand() {
        let s = parse_shorthand("regular:5").unwrap();
        assert_eq!(s.polygon().len(), 5);
        assert!(s.polygon().angles().iter().any(|a| (a - FRAC_PI_2).abs() < 1e-15));
        let s = parse_shorthand("regular:4:0").unwrap();
        assert_eq!(s.polygon().angles()[0], 0.0);
        for bad in ["regular:", "regular:x", "regular:4:y", "regular:4:0:1", "regular:2", "regular:13"] {
            assert!(matches!(parse_shorthand(bad), Err(CliError::Input(_))), "{bad}");
        }
    }

    #[test]
    fn frame_names() {
        assert_eq!(frame_name(0), "frame_0001.svg");
        assert_eq!(frame_name(99), "frame_0100.svg");
    }
}
