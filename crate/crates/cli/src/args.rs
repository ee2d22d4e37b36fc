use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

pub const DEFAULT_PORT: u16 = 8757;
pub const PORT_ENV: &str = "WALLACE_PORT";
/// Family size used by `verify` unless overridden.
pub const VERIFY_SAMPLES: usize = 1440;

#[derive(Debug, Parser)]
#[command(name = "wallace", version, about = "Simson-Wallace lines, their envelopes, and hypocycloid checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw the Simson-Wallace construction for one probe point.
    Render(RenderArgs),
    /// Draw the line family and its envelope.
    Envelope(EnvelopeArgs),
    /// Fit a hypocycloid to the envelope and write a JSON report.
    Verify(VerifyArgs),
    /// Write one SVG per probe position, accumulating the line locus.
    Animate(AnimateArgs),
    /// Serve the kernel protocol over local HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    /// Scene JSON file, or `regular:<n>[:<phase>]` for a regular n-gon on the unit circle.
    #[arg(long, value_name = "FILE|regular:N[:PHASE]")]
    pub scene: String,
    /// Override the scene's line-family size.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Hide layers (comma separated display keys).
    #[arg(long, value_delimiter = ',', value_name = "LAYER")]
    pub hide: Vec<String>,
    /// Show layers the scene hides.
    #[arg(long, value_delimiter = ',', value_name = "LAYER")]
    pub show: Vec<String>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Probe angle in radians (defaults to the scene's probe_theta).
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Also fit and draw an n-cusped hypocycloid over the envelope.
    #[arg(long)]
    pub overlay: bool,
    /// Dump the extracted envelope trace as JSON.
    #[arg(long, value_name = "FILE")]
    pub trace_json: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Expected cusp count (defaults to the number of vertices).
    #[arg(long)]
    pub cusps: Option<u32>,
    /// Test hook: distort the envelope trace before fitting.
    #[arg(long, hide = true)]
    pub corrupt_trace: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnimateArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..=10_000))]
    pub frames: u32,
    /// Output directory for frame_0001.svg, frame_0002.svg, ...
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = PORT_ENV, default_value_t = DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
}
