//! The `surfmotif` command line. Every rendering subcommand first builds a
//! scene document and then runs the same pipeline as the HTTP service.

use std::ffi::OsString;
use std::io::Write;
use std::net::IpAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use surfmotif::motif::{catalog_json, LayoutMode, MotifLayout};
use surfmotif::render::{ImageFormat, Shading};
use surfmotif::scene::SceneDoc;
use surfmotif::Rgb;

use crate::diagnostics::validate;
use crate::pipeline::{self, parse_size, CurveFormat, CurveRequest, FacadeError, LiftRequest, Limits, MeshFormat};
use crate::service::{self, Config};

#[derive(Debug, Parser)]
#[command(name = "surfmotif", version, about = "Render algebraic surfaces and hypocycloid motifs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a scene file or a preset to PNG or PPM.
    Render(RenderArgs),
    /// Sample a modified hypocycloid and write SVG or JSON.
    Curve(CurveArgs),
    /// Lift a hypocycloid to a surface mesh and write OBJ or JSON.
    Lift(LiftArgs),
    /// Render a preset and repeat it in a Fibonacci or grid layout.
    Motif(MotifArgs),
    /// Parse an equation and print its diagnostics as JSON.
    Validate { equation: String },
    /// Print the preset catalogue as JSON.
    Presets,
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Png,
    Ppm,
}

impl From<FormatArg> for ImageFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Png => ImageFormat::Png,
            FormatArg::Ppm => ImageFormat::Ppm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ShadingArg {
    Flat,
    Lit,
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    /// Preset name; fills in whatever the scene leaves out.
    #[arg(long)]
    pub preset: Option<String>,
    /// Equation, e.g. "x^2+y^2+z^2-1".
    #[arg(long, short = 'e')]
    pub equation: Option<String>,
    /// Parameter binding, repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    #[arg(long)]
    pub zoom: Option<f64>,
    #[arg(long, value_name = "STEPS")]
    pub steps: Option<u32>,
    #[arg(long, value_enum)]
    pub shading: Option<ShadingArg>,
    /// 2×2 supersampling.
    #[arg(long)]
    pub supersample: bool,
    /// Output format; defaults to the scene's, then the file extension.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, short = 'o', value_name = "FILE")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Scene JSON file.
    pub scene: Option<PathBuf>,
    #[command(flatten)]
    pub common: SceneArgs,
    #[arg(long, value_name = "WxH", value_parser = parse_size)]
    pub size: Option<(u32, u32)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    #[value(alias = "fibonacci")]
    Fib,
    Grid,
}

#[derive(Debug, Args)]
pub struct MotifArgs {
    #[command(flatten)]
    pub common: SceneArgs,
    #[arg(long, value_enum)]
    pub layout: LayoutArg,
    /// Number of Fibonacci copies, or rows and columns of the grid.
    #[arg(long)]
    pub n: u32,
    /// Canvas size.
    #[arg(long, value_name = "WxH", value_parser = parse_size, default_value = "1024x1024")]
    pub size: (u32, u32),
    /// Flip alternate grid cells.
    #[arg(long)]
    pub mirror: bool,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub theta_max: Option<f64>,
    /// Stroke colour as #rrggbb.
    #[arg(long)]
    pub stroke: Option<Rgb>,
    /// Write SVG here. With neither --svg nor --json, SVG goes to stdout.
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
    /// Write the polyline as JSON here.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long)]
    pub ntheta: usize,
    #[arg(long)]
    pub nphi: usize,
    #[arg(long)]
    pub phi_min: Option<f64>,
    #[arg(long)]
    pub theta_max: Option<f64>,
    /// Write OBJ here. With neither --obj nor --json, OBJ goes to stdout.
    #[arg(long, value_name = "FILE")]
    pub obj: Option<PathBuf>,
    /// Write the mesh as JSON here.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Defaults to $SURFMOTIF_PORT, then 8080.
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: IpAddr,
    /// Largest image served; defaults to $SURFMOTIF_MAX_SIZE, then 2048x2048.
    #[arg(long, value_name = "WxH", value_parser = parse_size)]
    pub max_size: Option<(u32, u32)>,
    /// Requests admitted at once before answering 429.
    #[arg(long)]
    pub queue: Option<usize>,
}

fn parse_param(text: &str) -> Result<(String, f64), String> {
    let (name, value) = text.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got '{text}'"))?;
    let value = value.trim().parse().map_err(|_| format!("'{value}' is not a number"))?;
    Ok((name.trim().to_string(), value))
}

/// A failed command: exit status 1 for usage, 2 for bad input.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }
}

impl From<FacadeError> for Failure {
    fn from(e: FacadeError) -> Self {
        Failure::input(e.to_string())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn print_stdout(bytes: &[u8]) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| Failure::input(e.to_string()))
}

/// Applies the shared flags on top of `doc`.
fn apply_scene_args(mut doc: SceneDoc, args: &SceneArgs) -> SceneDoc {
    if args.preset.is_some() {
        doc.preset.clone_from(&args.preset);
    }
    if args.equation.is_some() {
        doc.equation.clone_from(&args.equation);
    }
    for (name, value) in &args.params {
        doc.params.insert(name.clone(), *value);
    }
    doc.zoom = args.zoom.or(doc.zoom);
    doc.steps = args.steps.or(doc.steps);
    if let Some(s) = args.shading {
        doc.shading = Some(match s {
            ShadingArg::Flat => Shading::Flat,
            ShadingArg::Lit => Shading::Lit,
        });
    }
    doc.supersample |= args.supersample;
    doc
}

/// Runs a materialized document and writes the image. Format precedence:
/// `--format`, then the document, then the output extension.
fn render_document(doc: SceneDoc, args: &SceneArgs) -> Result<(), Failure> {
    let format =
        args.format.map(ImageFormat::from).or(doc.format).unwrap_or_else(|| ImageFormat::from_path(&args.output));
    let resolved = pipeline::prepare(&doc, &Limits::UNBOUNDED)?;
    let rendered = pipeline::render(&resolved, Some(format))?;
    write_file(&args.output, &rendered.payload.body)?;
    if let Some(stats) = rendered.diagnostics.stats {
        let (w, h) = resolved.output_size();
        eprintln!("wrote {} ({w}x{h}, {} hits, {:.0} ms)", args.output.display(), stats.hits, stats.wall_ms);
        if stats.eval_errors > 0 {
            eprintln!("warning: {} rays hit evaluation errors and were left as background", stats.eval_errors);
        }
    }
    Ok(())
}

fn render(args: RenderArgs) -> Result<(), Failure> {
    let mut doc = match &args.scene {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
            SceneDoc::from_json(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?
        }
        None => SceneDoc::default(),
    };
    if args.scene.is_none() && args.common.preset.is_none() && args.common.equation.is_none() {
        return Err(Failure { code: 1, message: "render needs a scene file, --preset or --equation".into() });
    }
    if let Some((w, h)) = args.size {
        doc.width = Some(w);
        doc.height = Some(h);
    }
    let doc = apply_scene_args(doc, &args.common);
    render_document(doc, &args.common)
}

fn motif(args: MotifArgs) -> Result<(), Failure> {
    if args.common.preset.is_none() && args.common.equation.is_none() {
        return Err(Failure { code: 1, message: "motif needs --preset or --equation".into() });
    }
    let mode = match args.layout {
        LayoutArg::Fib => LayoutMode::Fibonacci,
        LayoutArg::Grid => LayoutMode::Grid,
    };
    let (canvas_width, canvas_height) = args.size;
    let doc = SceneDoc {
        motif: Some(MotifLayout { mode, count: args.n, mirror: args.mirror, canvas_width, canvas_height }),
        ..SceneDoc::default()
    };
    let doc = apply_scene_args(doc, &args.common);
    render_document(doc, &args.common)
}

fn curve(args: CurveArgs) -> Result<(), Failure> {
    let mut req = CurveRequest {
        a: args.a,
        b: args.b,
        samples: args.samples,
        theta_max: args.theta_max,
        transform: None,
        stroke: args.stroke,
        format: CurveFormat::Svg,
    };
    let limits = Limits::UNBOUNDED;
    if args.svg.is_none() && args.json.is_none() {
        return print_stdout(&pipeline::curve(&req, &limits)?.body);
    }
    if let Some(path) = &args.svg {
        write_file(path, &pipeline::curve(&req, &limits)?.body)?;
    }
    if let Some(path) = &args.json {
        req.format = CurveFormat::Json;
        write_file(path, &pipeline::curve(&req, &limits)?.body)?;
    }
    Ok(())
}

fn lift(args: LiftArgs) -> Result<(), Failure> {
    let mut req = LiftRequest {
        a: args.a,
        b: args.b,
        n_theta: args.ntheta,
        n_phi: args.nphi,
        phi_min: args.phi_min,
        theta_max: args.theta_max,
        format: MeshFormat::Obj,
    };
    let limits = Limits::UNBOUNDED;
    if args.obj.is_none() && args.json.is_none() {
        return print_stdout(&pipeline::lift(&req, &limits)?.body);
    }
    if let Some(path) = &args.obj {
        write_file(path, &pipeline::lift(&req, &limits)?.body)?;
    }
    if let Some(path) = &args.json {
        req.format = MeshFormat::Json;
        write_file(path, &pipeline::lift(&req, &limits)?.body)?;
    }
    Ok(())
}

fn validate_cmd(equation: &str) -> Result<(), Failure> {
    let d = validate(equation);
    println!("{}", d.to_json());
    if d.is_ok() {
        Ok(())
    } else {
        let p = &d.errors[0];
        Err(Failure::input(format!("offset {}: {}", p.offset, p.message)))
    }
}

fn serve(args: ServeArgs) -> Result<(), Failure> {
    let mut config = Config::from_env().map_err(|m| Failure { code: 1, message: m })?;
    config.bind = args.bind;
    config.port = args.port.unwrap_or(config.port);
    if let Some((w, h)) = args.max_size {
        config.limits = Limits { max_width: w, max_height: h, ..config.limits };
    }
    config.queue = args.queue.unwrap_or(config.queue);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::input(e.to_string()))?;
    runtime.block_on(service::serve(config)).map_err(|e| Failure::input(format!("cannot serve: {e}")))
}

pub fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Render(args) => render(args),
        Command::Curve(args) => curve(args),
        Command::Lift(args) => lift(args),
        Command::Motif(args) => motif(args),
        Command::Validate { equation } => validate_cmd(&equation),
        Command::Presets => {
            println!("{}", catalog_json());
            Ok(())
        }
        Command::Serve(args) => serve(args),
    }
}

/// Parses `argv`, runs the command and returns the process exit status.
/// Errors go to stderr prefixed with `error:`.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
