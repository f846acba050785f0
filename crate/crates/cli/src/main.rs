//! `qvortex`: generate or simulate complex fields, extract vortex-core
//! lines, and export frames and analytics.
//!
//! Exit codes: 0 success, 2 format error, 3 numerical error, 4 contract
//! violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qvortex::analysis::{analytics_csv, filter_by_length, FrameAnalytics};
use qvortex::field::{
    gen_calm, gen_crossing_vortices, gen_straight_vortex, gen_uniform, gen_vortex_ring, random_ring_scene,
    Complex64, NlkgState, PotentialParams, RandomPotential,
};
use qvortex::io::{
    frame_file_name, read_field, read_lines, write_field, write_lines, DomainInfo, LineFileFrame, Manifest,
    Precision,
};
use qvortex::pipeline::{run_pipeline, PipelineConfig, PipelineError};
use qvortex::{Axis, Boundary, ComplexField3D, Dims, Error, ErrorClass, FormatError, Vec3};

#[derive(Parser)]
#[command(name = "qvortex", version, about = "Quantum vortex-core line extraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an analytic field as QVF1.
    Gen(GenArgs),
    /// Run the forced NLKG solver, writing QVF1 snapshots.
    Sim(SimArgs),
    /// Extract vortex lines from QVF1 fields.
    Extract(ExtractArgs),
    /// Compute analytics over line frames.
    Stats(StatsArgs),
    /// Convert line frames to QVL1 or JSON and write a manifest.
    Export(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Uniform,
    Straight,
    Ring,
    Crossing,
    Rings,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum PrecisionArg {
    F32,
    #[default]
    F64,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::F32 => Precision::F32,
            PrecisionArg::F64 => Precision::F64,
        }
    }
}

#[derive(Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum LineFormatArg {
    #[default]
    Qvl,
    Json,
}

impl LineFormatArg {
    fn extension(self) -> &'static str {
        match self {
            LineFormatArg::Qvl => "qvl",
            LineFormatArg::Json => "json",
        }
    }
}

#[derive(Args)]
struct GridArgs {
    /// Nodes per axis.
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Grid spacing Δx.
    #[arg(long, default_value_t = 0.5)]
    spacing: f64,
}

impl GridArgs {
    fn dims(&self) -> Result<Dims, Error> {
        Dims::cube(self.n)
    }

    fn center(&self) -> Vec3 {
        Vec3::repeat((self.n - 1) as f64 * self.spacing / 2.0)
    }
}

fn parse_vec3(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|_| format!("expected x,y,z; got {s:?}"))
}

fn parse_vec2(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 2]>::try_from(parts).map_err(|_| format!("expected u,v; got {s:?}"))
}

fn parse_blocks(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<usize> = s
        .split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    <[usize; 3]>::try_from(parts).map_err(|_| format!("expected AxBxC; got {s:?}"))
}

#[derive(Args)]
struct GenArgs {
    kind: GenKind,
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t)]
    precision: PrecisionArg,
    /// Core axis (straight) or ring normal (ring).
    #[arg(long, default_value = "z")]
    axis: Axis,
    /// In-plane core position of a straight vortex [default: slightly off the grid center].
    #[arg(long, value_parser = parse_vec2)]
    core: Option<[f64; 2]>,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    winding: i32,
    /// Ring center or crossing point [default: slightly off the grid center].
    #[arg(long, value_parser = parse_vec3)]
    center: Option<[f64; 3]>,
    /// Ring radius, in Δx.
    #[arg(long, default_value_t = 10.0)]
    radius: f64,
    /// Number of rings (rings).
    #[arg(long, default_value_t = 3)]
    count: usize,
    /// Ring radius range in Δx (rings).
    #[arg(long, default_value_t = 5.0)]
    radius_min: f64,
    #[arg(long, default_value_t = 12.0)]
    radius_max: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Start from this QVF1 field instead of the calm state.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    steps: u64,
    /// Snapshot interval, in steps.
    #[arg(long, default_value_t = 100)]
    every: u64,
    #[arg(long, default_value_t = 0.02)]
    dt: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long = "X0", default_value_t = 2.0)]
    x0: f64,
    #[arg(long = "V0", default_value_t = 55.0)]
    v0: f64,
    #[arg(long = "T0", default_value_t = 0.16)]
    t0: f64,
    /// Disable the random potential.
    #[arg(long)]
    no_potential: bool,
    /// Amplitude of the complex noise added to the calm start.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    /// Start the calm state in its uniform rotation `∂ₜΦ = −i√λ Φ`
    /// instead of at rest.
    #[arg(long)]
    rotating: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "f32")]
    precision: PrecisionArg,
}

#[derive(Args, Clone)]
struct PipelineArgs {
    /// Reduction box side, in cells.
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    epsilon: f64,
    /// Polyline resampling step, in Δx.
    #[arg(long, default_value_t = 0.5)]
    resample_step: f64,
    #[arg(long)]
    no_localize: bool,
    #[arg(long, value_parser = parse_blocks, default_value = "4x4x4")]
    blocks: [usize; 3],
}

impl PipelineArgs {
    fn config(&self, frame: u32) -> PipelineConfig {
        PipelineConfig {
            k: self.k,
            epsilon: self.epsilon,
            resample_step: self.resample_step,
            localize: !self.no_localize,
            blocks: self.blocks,
            frame,
        }
    }
}

#[derive(Args)]
struct ExtractArgs {
    /// QVF1 files, or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    format: LineFormatArg,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct StatsArgs {
    /// Line frames (QVL1 or JSON), or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Keep only lines with length ≥ min.
    #[arg(long)]
    min: Option<f64>,
    /// Keep only lines with length < max.
    #[arg(long)]
    max: Option<f64>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also write per-frame JSON analytics.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Line frames (QVL1 or JSON), or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    format: LineFormatArg,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Pipeline(PipelineError),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Pipeline(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Format(FormatError::Io(e)))
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        let class = match self {
            CliError::Core(e) => e.class(),
            CliError::Pipeline(e) => e.class(),
            CliError::Usage(_) => ErrorClass::Contract,
        };
        match class {
            ErrorClass::Format => 2,
            ErrorClass::Numerical => 3,
            ErrorClass::Contract => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Pipeline(e) => e.fmt(f),
            CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Files under `inputs` with one of `extensions`; directories expand to
/// their sorted contents.
fn expand_inputs(inputs: &[PathBuf], extensions: &[&str]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.extension()
                        .and_then(|e| e.to_str())
                        .is_some_and(|e| extensions.contains(&e))
                        && p.file_stem().and_then(|s| s.to_str()).is_some_and(|s| s.starts_with("frame_"))
                })
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(input.clone());
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage(format!("no input files found in {inputs:?}")));
    }
    Ok(out)
}

/// Frame index from a `frame_NNNNNN.*` name, else the position in the list.
fn frame_index(path: &Path, position: usize) -> u32 {
    path.file_stem()
        .and_then(|s| s.to_str())
        .and_then(|s| s.strip_prefix("frame_"))
        .and_then(|s| s.parse().ok())
        .unwrap_or(position as u32)
}

fn default_offset(grid: &GridArgs) -> Vec3 {
    // keep analytic cores off the node lattice
    grid.center() + Vec3::new(0.13, -0.21, 0.07) * grid.spacing
}

fn cmd_gen(args: &GenArgs) -> CliResult<()> {
    let dims = args.grid.dims()?;
    let dx = args.grid.spacing;
    let field = match args.kind {
        GenKind::Uniform => gen_uniform(dims, dx, Complex64::new(1.0, 0.0))?,
        GenKind::Straight => {
            let core = args.core.unwrap_or_else(|| {
                let c = default_offset(&args.grid);
                let (u, v) = args.axis.in_plane();
                [c[u.index()], c[v.index()]]
            });
            gen_straight_vortex(dims, dx, args.axis, core, args.winding)?
        }
        GenKind::Ring => {
            let center = args.center.map(Vec3::from).unwrap_or_else(|| default_offset(&args.grid));
            gen_vortex_ring(dims, dx, center, args.radius * dx, args.axis)?
        }
        GenKind::Crossing => {
            let point = args.center.map(Vec3::from).unwrap_or_else(|| default_offset(&args.grid));
            gen_crossing_vortices(dims, dx, point)?
        }
        GenKind::Rings => {
            let range = (args.radius_min * dx, args.radius_max * dx);
            random_ring_scene(dims, dx, args.count, range, args.seed)?.0
        }
    };
    write_field(&args.out, &field, args.precision.into())?;
    Ok(())
}

fn cmd_sim(args: &SimArgs) -> CliResult<()> {
    if args.every == 0 {
        return Err(CliError::Usage("--every must be positive".into()));
    }
    let initial = match &args.init {
        Some(path) => read_field(path)?,
        None => gen_calm(args.grid.dims()?, args.grid.spacing, Boundary::Periodic, args.noise, args.seed)?,
    };
    let potential = if args.no_potential {
        None
    } else {
        let params = PotentialParams { x0: args.x0, t0: args.t0, v0: args.v0, seed: args.seed };
        Some(match initial.boundary() {
            Boundary::Periodic => RandomPotential::periodic(params, initial.extent())?,
            Boundary::Clamped => RandomPotential::new(params)?,
        })
    };
    fs::create_dir_all(&args.out_dir)?;
    let velocity: Option<Vec<_>> = (args.rotating && args.lambda > 0.0).then(|| {
        let w = Complex64::new(0.0, -args.lambda.sqrt());
        initial.values().iter().map(|v| v * w).collect()
    });
    let mut state = NlkgState::with_velocity(initial, velocity.as_deref(), args.lambda, args.dt, potential.as_ref())?;
    let precision = args.precision.into();
    let snapshot = |state: &NlkgState| -> CliResult<()> {
        let step = state.steps_taken();
        let index = u32::try_from(step).map_err(|_| CliError::Usage(format!("step {step} exceeds u32")))?;
        write_field(args.out_dir.join(frame_file_name(index, "qvf")), &state.current, precision)?;
        Ok(())
    };
    snapshot(&state)?;
    for _ in 0..args.steps {
        state.advance(potential.as_ref())?;
        if state.steps_taken() % args.every == 0 {
            snapshot(&state)?;
        }
    }
    Ok(())
}

fn write_outputs(
    out_dir: &Path,
    format: LineFormatArg,
    frames: &[LineFileFrame],
    analytics: Option<&[FrameAnalytics]>,
) -> CliResult<()> {
    fs::create_dir_all(out_dir)?;
    let Some(first) = frames.first() else {
        return Ok(());
    };
    let mut manifest = Manifest::new(first.domain);
    for f in frames {
        let name = frame_file_name(f.frame, format.extension());
        write_lines(out_dir.join(&name), f)?;
        manifest.push(f.frame, name, f.time);
    }
    manifest.write(out_dir.join("manifest.json"))?;
    if let Some(analytics) = analytics {
        fs::write(out_dir.join("analytics.csv"), analytics_csv(analytics))?;
        let json = serde_json::to_string_pretty(analytics).map_err(|e| Error::Format(FormatError::Json(e)))?;
        fs::write(out_dir.join("analytics.json"), json + "\n")?;
    }
    Ok(())
}

fn cmd_extract(args: &ExtractArgs) -> CliResult<()> {
    let inputs = expand_inputs(&args.inputs, &["qvf"])?;
    let mut frames = Vec::with_capacity(inputs.len());
    let mut analytics = Vec::with_capacity(inputs.len());
    let mut domain: Option<DomainInfo> = None;
    for (position, path) in inputs.iter().enumerate() {
        let field = read_field(path)?;
        let this = DomainInfo::new(field.dims(), field.spacing(), field.boundary());
        if domain.is_some_and(|d| d != this) {
            return Err(CliError::Usage(format!("{} has a different domain than earlier inputs", path.display())));
        }
        domain = Some(this);
        let out = extract_one(&field, &args.pipeline, frame_index(path, position))?;
        frames.push(out.0);
        analytics.push(out.1);
    }
    frames.sort_by_key(|f| f.frame);
    analytics.sort_by_key(|a| a.frame);
    if frames.windows(2).any(|w| w[0].frame == w[1].frame) {
        return Err(CliError::Usage("duplicate frame indices among inputs".into()));
    }
    write_outputs(&args.out_dir, args.format, &frames, Some(&analytics))
}

fn extract_one(field: &ComplexField3D, args: &PipelineArgs, frame: u32) -> CliResult<(LineFileFrame, FrameAnalytics)> {
    let out = run_pipeline(field, &args.config(frame))?;
    Ok((out.line_frame(field), out.analytics))
}

fn read_frames(inputs: &[PathBuf]) -> CliResult<Vec<LineFileFrame>> {
    let mut frames = expand_inputs(inputs, &["qvl", "json"])?
        .iter()
        .map(read_lines)
        .collect::<Result<Vec<_>, _>>()?;
    for f in &frames {
        f.validate()?;
    }
    frames.sort_by_key(|f| f.frame);
    Ok(frames)
}

fn cmd_stats(args: &StatsArgs) -> CliResult<()> {
    let frames = read_frames(&args.inputs)?;
    let (min, max) = (args.min.unwrap_or(0.0), args.max.unwrap_or(f64::INFINITY));
    let mut analytics = Vec::with_capacity(frames.len());
    let mut selections = Vec::with_capacity(frames.len());
    for f in &frames {
        let lines = f.vortex_lines();
        let kept: Vec<_> = filter_by_length(&lines, min, max)?.into_iter().cloned().collect();
        selections.push(serde_json::json!({
            "frame": f.frame,
            "line_ids": kept.iter().map(|l| l.id).collect::<Vec<_>>(),
        }));
        analytics.push(FrameAnalytics::compute(f.frame, &kept, &f.reconnection_events(), None)?);
    }
    let csv = analytics_csv(&analytics);
    match &args.csv {
        Some(path) => fs::write(path, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(path) = &args.json {
        let doc = serde_json::json!({
            "length_range": [min, if max.is_finite() { serde_json::json!(max) } else { serde_json::Value::Null }],
            "frames": analytics,
            "selections": selections,
        });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(FormatError::Json(e)))?;
        fs::write(path, text + "\n")?;
    }
    Ok(())
}

fn cmd_export(args: &ExportArgs) -> CliResult<()> {
    let frames = read_frames(&args.inputs)?;
    write_outputs(&args.out_dir, args.format, &frames, None)
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Sim(a) => cmd_sim(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Export(a) => cmd_export(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version go to stdout; malformed arguments are a
            // contract violation rather than clap's default code
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qvortex: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
