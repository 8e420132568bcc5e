use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pswf_radon::{MChoice, Method};

#[derive(Debug, Parser)]
#[command(
    name = "pswf-radon",
    version,
    about = "Band-limited Hankel inversion experiments: phantoms, forward data, reconstructions and m-sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Format of the main output file.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Directory for cached PSWF bases.
    #[arg(long, global = true, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a phantom on [0, σ].
    Phantom(PhantomCmd),
    /// Simulate Hankel data of a phantom, with optional noise.
    Forward(ForwardCmd),
    /// Reconstruct f from Hankel data.
    Reconstruct(ReconstructCmd),
    /// Residual curve over a range of m.
    Sweep(SweepCmd),
    /// Quick numerical checks of the installation.
    Selftest,
    /// Run a complete experiment described by a JSON config.
    Run(RunCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhantomKind {
    TwoStep,
    Harmonic,
    Custom,
}

#[derive(Debug, Args)]
pub struct PhantomOpts {
    #[arg(long, value_enum, default_value_t = PhantomKind::TwoStep)]
    pub phantom: PhantomKind,

    /// Frequency of the harmonic phantom sin(ωs).
    #[arg(long)]
    pub omega: Option<f64>,

    /// Interval `LO:HI` of a two-step phantom; repeat for several. Defaults
    /// to [0.15, 0.3] and [0.5, 0.75].
    #[arg(long = "interval", value_name = "LO:HI")]
    pub intervals: Vec<String>,

    /// `s,re,im` CSV holding the custom phantom (real parts are used).
    #[arg(long, value_name = "FILE")]
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PhantomCmd {
    #[command(flatten)]
    pub phantom: PhantomOpts,

    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,

    /// Number of samples on [0, σ].
    #[arg(long, default_value_t = 256)]
    pub n: usize,

    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ForwardCmd {
    #[command(flatten)]
    pub phantom: PhantomOpts,

    /// Order ν of the transform (integer or half-integer).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub nu: f64,

    /// Band limit: data are known on [0, r].
    #[arg(long, default_value_t = 10.0)]
    pub r: f64,

    /// Support radius of f.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,

    /// Number of data samples on [0, r].
    #[arg(long, default_value_t = 256)]
    pub n: usize,

    /// Number of phantom samples on [0, σ] used by the quadrature.
    #[arg(long, default_value_t = 256)]
    pub n_phantom: usize,

    /// Relative noise level ‖η‖/‖h‖.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub noise: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Regenerate from a sidecar written by an earlier run; the phantom
    /// and numeric flags are then ignored.
    #[arg(long, value_name = "FILE")]
    pub from_meta: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    /// Sidecar path; defaults to the output path with extension `meta.json`.
    #[arg(long, value_name = "FILE")]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Naive,
    PswfCormack,
    PswfFbp,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Naive => Method::Naive,
            MethodArg::PswfCormack => Method::PswfCormack,
            MethodArg::PswfFbp => Method::PswfFbp,
        }
    }
}

/// Where the data come from and what they describe.
#[derive(Debug, Args)]
pub struct DataOpts {
    /// Hankel data: `t,re,im` CSV, or a JSON dataset.
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,

    /// Sidecar with ν, r and σ; looked up next to the data when omitted.
    #[arg(long, value_name = "FILE")]
    pub meta: Option<PathBuf>,

    #[arg(long, allow_negative_numbers = true)]
    pub nu: Option<f64>,

    #[arg(long)]
    pub r: Option<f64>,

    #[arg(long)]
    pub sigma: Option<f64>,

    #[arg(long, value_enum, default_value_t = MethodArg::PswfCormack)]
    pub method: MethodArg,

    /// Output samples on [0, σ].
    #[arg(long, default_value_t = 256)]
    pub n_out: usize,

    /// FBP image nodes per axis.
    #[arg(long, default_value_t = 512)]
    pub grid_n: usize,

    /// Width of the raised-cosine taper on the Radon data near |y| = 1.
    #[arg(long)]
    pub smooth_cutoff: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReconstructCmd {
    #[command(flatten)]
    pub data: DataOpts,

    /// Regularization index, or `auto` for residual minimization.
    #[arg(long, default_value = "auto", value_parser = parse_m)]
    pub m: MChoice,

    /// Reconstruction `s,re,im`.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    /// JSON report.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,

    /// SVG plot of f̃ and the naive inverse (and f when known).
    #[arg(long, value_name = "FILE")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    #[command(flatten)]
    pub data: DataOpts,

    #[arg(long, default_value_t = 0)]
    pub m_min: usize,

    /// Defaults to the largest admissible m for the bandwidth.
    #[arg(long)]
    pub m_max: Option<usize>,

    /// Curve `m,residual,naive`.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunCmd {
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
}

fn parse_m(s: &str) -> Result<MChoice, String> {
    s.parse().map_err(|e: pswf_radon::Error| e.to_string())
}
