use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tcrf::engine::DerivativeOp;
use tcrf::scale_distribution::DistributionKind;
use tcrf::Error;

#[derive(Debug, Parser)]
#[command(
    name = "tcrf",
    version,
    about = "Time-causal and time-recursive receptive fields"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the composed temporal kernel and its first two derivatives as CSV.
    Kernels(KernelsArgs),
    /// Print mean delays and kernel maxima for a range of cascade lengths.
    Delays(DelaysArgs),
    /// Filter a video stream frame by frame.
    Filter(FilterArgs),
    /// Export a sampled spatio-temporal receptive field.
    RfModel(RfModelArgs),
}

/// Cascade length and time-constant distribution.
#[derive(Debug, Args)]
pub struct CascadeArgs {
    /// Number of first-order stages.
    #[arg(long = "K", default_value_t = 7)]
    pub stages: usize,
    /// Equal time constants.
    #[arg(long, conflicts_with = "c")]
    pub uniform: bool,
    /// Logarithmic distribution parameter (decimal, sqrt2 or 2^0.75).
    #[arg(long, value_parser = parse_c)]
    pub c: Option<f64>,
}

impl CascadeArgs {
    pub fn kind(&self) -> DistributionKind {
        if self.uniform {
            DistributionKind::Uniform
        } else {
            DistributionKind::Logarithmic {
                c: self.c.unwrap_or(std::f64::consts::SQRT_2),
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct KernelsArgs {
    #[command(flatten)]
    pub cascade: CascadeArgs,
    /// Temporal variance of the composed kernel.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Upper end of the sampled interval; defaults to mean + 6 standard deviations.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Measure {
    Mean,
    Max,
    Both,
}

#[derive(Debug, Args)]
pub struct DelaysArgs {
    /// Single value, inclusive range `a..b`, or comma list.
    #[arg(long = "K", value_parser = parse_stage_list, default_value = "2..8")]
    pub stages: StageList,
    /// Only the equal-time-constant column.
    #[arg(long, conflicts_with = "c")]
    pub uniform: bool,
    /// Comma-separated distribution parameters.
    #[arg(long, value_parser = parse_c, value_delimiter = ',')]
    pub c: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = Measure::Both)]
    pub measure: Measure,
}

#[derive(Debug, Clone)]
pub struct StageList(pub Vec<usize>);

#[derive(Debug, Clone, Copy, ValueEnum, Default)]
pub enum StartupArg {
    #[default]
    Zero,
    FirstFrame,
}

#[derive(Debug, Clone, Copy, ValueEnum, Default)]
pub enum InterpArg {
    #[default]
    Linear,
    Cubic,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Directory of P5 PGM frames, or raw f32 file with a `.hdr` sidecar.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub cascade: CascadeArgs,
    /// Temporal variance of the coarsest level, in frames^2.
    #[arg(long, conflicts_with = "sigma_t")]
    pub tau: Option<f64>,
    /// Temporal standard deviation in seconds.
    #[arg(long)]
    pub sigma_t: Option<f64>,
    #[arg(long, default_value_t = tcrf::receptive_field::DEFAULT_FRAME_RATE)]
    pub frame_rate: f64,
    /// Spatial variance in pixel^2.
    #[arg(long, conflicts_with = "sigma_x")]
    pub s: Option<f64>,
    /// Spatial standard deviation in degrees.
    #[arg(long)]
    pub sigma_x: Option<f64>,
    #[arg(long, default_value_t = tcrf::receptive_field::DEFAULT_PIXELS_PER_DEGREE)]
    pub ppd: f64,
    /// Comma-separated operators such as L, xt, xxt, yytt.
    #[arg(long, value_parser = parse_op, value_delimiter = ',', default_value = "L")]
    pub ops: Vec<DerivativeOp>,
    /// `top`, `all`, or comma-separated zero-based level indices.
    #[arg(long, default_value = "top")]
    pub scales: String,
    #[arg(long, value_enum, default_value_t = StartupArg::Zero)]
    pub startup: StartupArg,
    /// Image velocity in pixels per frame, `v1,v2`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub velocity: Option<(f64, f64)>,
    #[arg(long, value_enum, default_value_t = InterpArg::Linear)]
    pub interp: InterpArg,
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    /// Also write an 8-bit PGM preview of every map.
    #[arg(long)]
    pub preview: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RfFormat {
    Csv,
    Raw,
}

#[derive(Debug, Args)]
pub struct RfModelArgs {
    /// One of a, b, c, d.
    #[arg(long, conflicts_with_all = ["alpha", "alpha2", "beta", "sigma_x", "sigma_t", "v", "v2"])]
    pub preset: Option<String>,
    /// Derivative order along x1.
    #[arg(long, default_value_t = 0)]
    pub alpha: u8,
    /// Derivative order along x2.
    #[arg(long, default_value_t = 0)]
    pub alpha2: u8,
    /// Temporal derivative order.
    #[arg(long, default_value_t = 0)]
    pub beta: u8,
    /// Spatial standard deviation in degrees.
    #[arg(long, default_value_t = 0.5)]
    pub sigma_x: f64,
    /// Temporal standard deviation in seconds.
    #[arg(long, default_value_t = 0.05)]
    pub sigma_t: f64,
    /// Velocity along x1 in degrees per millisecond.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub v: f64,
    /// Velocity along x2 in degrees per millisecond.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub v2: f64,
    #[command(flatten)]
    pub cascade: CascadeArgs,
    #[arg(long, default_value_t = tcrf::receptive_field::DEFAULT_PIXELS_PER_DEGREE)]
    pub ppd: f64,
    #[arg(long, default_value_t = tcrf::receptive_field::DEFAULT_FRAME_RATE)]
    pub frame_rate: f64,
    /// Half width of the sampled domain in pixels.
    #[arg(long)]
    pub half_width: Option<usize>,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long, value_enum, default_value_t = RfFormat::Csv)]
    pub format: RfFormat,
    /// Output file; required for raw output, stdout for CSV when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> String {
    Error::InvalidParameter(msg.into()).to_string()
}

pub fn parse_c(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let value = match t {
        "sqrt2" | "sqrt(2)" => std::f64::consts::SQRT_2,
        "2^0.75" | "2^(3/4)" => 2f64.powf(0.75),
        _ => t
            .parse::<f64>()
            .map_err(|_| invalid(format!("cannot read distribution parameter '{text}'")))?,
    };
    if !(value.is_finite() && value > 1.0) {
        return Err(invalid(format!(
            "distribution parameter must exceed 1, got {text}"
        )));
    }
    Ok(value)
}

pub fn parse_stage_list(text: &str) -> Result<StageList, String> {
    let bad = || invalid(format!("cannot read stage list '{text}'"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let stages = if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        text.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    Ok(StageList(stages))
}

pub fn parse_op(text: &str) -> Result<DerivativeOp, String> {
    text.parse().map_err(|e: Error| e.to_string())
}

pub fn parse_pair(text: &str) -> Result<(f64, f64), String> {
    let bad = || invalid(format!("expected 'v1,v2', got '{text}'"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}
