//! Command-line flags and the validated run configuration built from them.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hhbox::chains::Tolerances;
use hhbox::convexity::SamplingPlan;
use hhbox::corpus::{Corpus, Member};
use hhbox::{parse, Box64, Expr, QuadSpec, Rule};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "hhbox",
    version,
    about = "Check convexity and Hermite-Hadamard chains on boxes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convexity certificates, the inequality chain for the box dimension
    /// and, on request, the intermediate inequalities and an H-scan.
    Verify(VerifyArgs),
    /// Scan the mapping H on a parameter grid and check its bounds,
    /// monotonicity and coordinate convexity.
    Hscan(HscanArgs),
    /// Run every check over the builtin corpus.
    Corpus(CorpusArgs),
}

#[derive(Debug, Args)]
pub struct FunctionArgs {
    /// Expression in x, y, z, e.g. "x^2 + y^2 + z^2".
    #[arg(
        long = "f",
        value_name = "EXPR",
        conflicts_with = "builtin",
        allow_hyphen_values = true
    )]
    pub expr: Option<String>,
    /// Name of a corpus function, e.g. sumsq.
    #[arg(long, value_name = "NAME")]
    pub builtin: Option<String>,
    /// Bounds as lo,hi per axis in x, y, z order. Defaults to the unit box
    /// of the function's dimension.
    #[arg(
        long = "box",
        value_name = "BOUNDS",
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub bounds: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SettingsArgs {
    #[arg(long, value_enum, default_value_t = RuleArg::Gauss5)]
    pub rule: RuleArg,
    /// Panels per axis for chain terms.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Panels per axis for each H value.
    #[arg(long = "h-n", default_value_t = 2)]
    pub h_n: usize,
    /// Refinement factor used for the error estimates.
    #[arg(long, default_value_t = 2)]
    pub refine: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid points per axis for convexity sampling.
    #[arg(long = "grid-points", default_value_t = 5)]
    pub grid_points: usize,
    #[arg(long = "random-pairs", default_value_t = 256)]
    pub random_pairs: usize,
    #[arg(long = "tol-abs")]
    pub tol_abs: Option<f64>,
    #[arg(long = "tol-convexity")]
    pub tol_convexity: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report path. Relative paths resolve against $HHBOX_OUT_DIR when it
    /// is set; without --out the report goes to $HHBOX_OUT_DIR or stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Add wall-clock timings to the report. Reports are then no longer
    /// byte-identical across runs.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    #[command(flatten)]
    pub settings: SettingsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Also evaluate the nine intermediate inequalities (3D boxes).
    #[arg(long)]
    pub intermediates: bool,
    /// Also scan H on a grid of this many points per axis.
    #[arg(long, value_name = "K")]
    pub hgrid: Option<usize>,
    #[arg(long, value_enum, default_value_t = ConvexityMode::Both)]
    pub convexity: ConvexityMode,
}

#[derive(Debug, Args)]
pub struct HscanArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    #[command(flatten)]
    pub settings: SettingsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, value_name = "K", default_value_t = 9)]
    pub hgrid: usize,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[command(flatten)]
    pub settings: SettingsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, value_name = "K", default_value_t = 9)]
    pub hgrid: usize,
    /// Only run members whose function name contains this text.
    #[arg(long)]
    pub filter: Option<String>,
    /// Add a concave function labelled convex; the run must then fail.
    #[arg(long)]
    pub inject_concave: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleArg {
    Midpoint,
    Simpson,
    Gauss5,
}

impl From<RuleArg> for Rule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Midpoint => Rule::Midpoint,
            RuleArg::Simpson => Rule::Simpson,
            RuleArg::Gauss5 => Rule::Gauss5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvexityMode {
    Both,
    Joint,
    Coordinates,
    None,
}

impl ConvexityMode {
    pub fn joint(self) -> bool {
        matches!(self, ConvexityMode::Both | ConvexityMode::Joint)
    }

    pub fn coordinates(self) -> bool {
        matches!(self, ConvexityMode::Both | ConvexityMode::Coordinates)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Verify,
    Hscan,
    Corpus,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Verify => "verify",
            CommandKind::Hscan => "hscan",
            CommandKind::Corpus => "corpus",
        }
    }
}

/// Where the function came from. The parsed form is echoed so reports show
/// exactly what was evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionSource {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    pub text: String,
    pub parsed: String,
    pub arity: usize,
    #[serde(skip)]
    pub expr: Expr,
}

impl FunctionSource {
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let expr = parse(text).map_err(|e| CliError::Usage(format!("--f: {e}")))?;
        Ok(Self {
            builtin: None,
            text: text.to_string(),
            parsed: expr.to_string(),
            arity: expr.arity(),
            expr,
        })
    }

    pub fn from_member(m: &Member) -> Result<Self, CliError> {
        let mut s = Self::from_text(&m.expr)?;
        s.builtin = Some(m.name.clone());
        Ok(s)
    }
}

/// Settings common to every command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub quad: QuadSpec,
    pub h_quad: QuadSpec,
    pub sampling: SamplingPlan,
    pub tolerances: Tolerances<f64>,
}

impl Settings {
    pub fn from_args(a: &SettingsArgs) -> Result<Self, CliError> {
        let rule = Rule::from(a.rule);
        let spec = |n| QuadSpec {
            rule,
            subdivisions: n,
            refinement_factor: a.refine,
        };
        let (quad, h_quad) = (spec(a.n), spec(a.h_n));
        quad.validate()
            .map_err(|e| CliError::Usage(format!("--n/--refine: {e}")))?;
        h_quad
            .validate()
            .map_err(|e| CliError::Usage(format!("--h-n: {e}")))?;
        let sampling = SamplingPlan {
            grid_points_per_axis: a.grid_points,
            random_pairs: a.random_pairs,
            seed: a.seed,
        };
        sampling
            .validate()
            .map_err(|e| CliError::Usage(format!("--grid-points: {e}")))?;
        let defaults = Tolerances::<f64>::default();
        let positive = |v: Option<f64>, default: f64, flag: &str| match v {
            None => Ok(default),
            Some(t) if t.is_finite() && t > 0.0 => Ok(t),
            Some(t) => Err(CliError::Usage(format!(
                "{flag} must be positive and finite, got {t}"
            ))),
        };
        let tolerances = Tolerances {
            abs: positive(a.tol_abs, defaults.abs, "--tol-abs")?,
            convexity: positive(a.tol_convexity, defaults.convexity, "--tol-convexity")?,
        };
        Ok(Self {
            quad,
            h_quad,
            sampling,
            tolerances,
        })
    }
}

/// Fully validated configuration of one run. Serialized into the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSource>,
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    pub bx: Option<Box64>,
    #[serde(flatten)]
    pub settings: Settings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hgrid: Option<usize>,
    pub intermediates: bool,
    pub convexity: ConvexityMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter: Option<String>,
    pub inject_concave: bool,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub timings: bool,
}

fn resolve_function(a: &FunctionArgs) -> Result<FunctionSource, CliError> {
    match (&a.expr, &a.builtin) {
        (Some(text), _) => FunctionSource::from_text(text),
        (None, Some(name)) => {
            let corpus = Corpus::builtin();
            let member = corpus.function(name).ok_or_else(|| {
                let names: Vec<&str> = corpus.functions.iter().map(|m| m.name.as_str()).collect();
                CliError::Usage(format!(
                    "unknown builtin `{name}` (available: {})",
                    names.join(", ")
                ))
            })?;
            FunctionSource::from_member(member)
        }
        (None, None) => Err(CliError::Usage(
            "one of --f or --builtin is required".into(),
        )),
    }
}

fn resolve_box(a: &FunctionArgs, f: &FunctionSource) -> Result<Box64, CliError> {
    let bx = match &a.bounds {
        Some(flat) => Box64::from_flat(flat).map_err(|e| CliError::Usage(format!("--box: {e}")))?,
        None => {
            let dim = f
                .builtin
                .as_deref()
                .and_then(|n| Corpus::builtin().function(n))
                .map_or(f.arity, |m| m.dim);
            Box64::new(&vec![(0.0, 1.0); dim]).expect("unit box is valid")
        }
    };
    if bx.dim() < f.arity {
        return Err(CliError::Usage(format!(
            "`{}` uses {} variables but the box has dimension {}",
            f.text,
            f.arity,
            bx.dim()
        )));
    }
    Ok(bx)
}

fn check_hgrid(k: usize, bx: Option<&Box64>) -> Result<(), CliError> {
    if k < 3 {
        return Err(CliError::Usage(format!(
            "--hgrid must be at least 3, got {k}"
        )));
    }
    if let Some(bx) = bx {
        if bx.dim() < 2 {
            return Err(CliError::Usage(
                "H is defined on 2D and 3D boxes only".into(),
            ));
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn from_command(command: &Command) -> Result<Self, CliError> {
        match command {
            Command::Verify(a) => {
                let f = resolve_function(&a.function)?;
                let bx = resolve_box(&a.function, &f)?;
                if let Some(k) = a.hgrid {
                    check_hgrid(k, Some(&bx))?;
                }
                Ok(Self {
                    command: CommandKind::Verify,
                    function: Some(f),
                    bx: Some(bx),
                    settings: Settings::from_args(&a.settings)?,
                    hgrid: a.hgrid,
                    intermediates: a.intermediates,
                    convexity: a.convexity,
                    filter: None,
                    inject_concave: false,
                    format: a.output.format,
                    out: a.output.out.clone(),
                    timings: a.output.timings,
                })
            }
            Command::Hscan(a) => {
                let f = resolve_function(&a.function)?;
                let bx = resolve_box(&a.function, &f)?;
                check_hgrid(a.hgrid, Some(&bx))?;
                Ok(Self {
                    command: CommandKind::Hscan,
                    function: Some(f),
                    bx: Some(bx),
                    settings: Settings::from_args(&a.settings)?,
                    hgrid: Some(a.hgrid),
                    intermediates: false,
                    convexity: ConvexityMode::None,
                    filter: None,
                    inject_concave: false,
                    format: a.output.format,
                    out: a.output.out.clone(),
                    timings: a.output.timings,
                })
            }
            Command::Corpus(a) => {
                check_hgrid(a.hgrid, None)?;
                Ok(Self {
                    command: CommandKind::Corpus,
                    function: None,
                    bx: None,
                    settings: Settings::from_args(&a.settings)?,
                    hgrid: Some(a.hgrid),
                    intermediates: true,
                    convexity: ConvexityMode::Both,
                    filter: a.filter.clone(),
                    inject_concave: a.inject_concave,
                    format: a.output.format,
                    out: a.output.out.clone(),
                    timings: a.output.timings,
                })
            }
        }
    }
}
