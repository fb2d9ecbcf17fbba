use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polyergo::harness::DEFAULT_SEED;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "polyergo", version, about = "Polynomial ergodic averages, Gauss sums and circle-method multipliers")]
pub struct Cli {
    /// JSON object whose keys override the subcommand options.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Directory receiving CSV/JSON artifacts and the run manifest.
    #[arg(long, global = true, default_value = "polyergo-out")]
    pub out: PathBuf,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the multi-index set Γ, optionally lifting a polynomial mapping through it.
    Gamma(GammaArgs),
    /// Averages M_N f of a lattice function.
    Avg(AvgArgs),
    /// r-variation of a sequence.
    Variation(VariationArgs),
    /// Every reduced Gauss sum G(a/q) up to a modulus bound.
    Gauss(GaussArgs),
    /// Largest Gauss sum per modulus and the fitted decay exponent.
    Decay(DecayArgs),
    /// Major/minor arc classification over a torus grid.
    Arcs(ArcsArgs),
    /// Multipliers m_N, Φ_N, ν_N, Ω_N^t or Λ_N^t at a point or over a grid.
    Multiplier(MultiplierArgs),
    /// The λ-indexed splitting schedule.
    Schedule(ScheduleArgs),
    /// Ergodic averages in a rotation or cyclic system along a dyadic N grid.
    Ergodic(ErgodicArgs),
    /// Run a named suite of numerical checks; exits nonzero on failure.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GammaSpec {
    /// Number of variables of the canonical mapping.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Largest exponent of each variable.
    #[arg(long, default_value_t = 2)]
    pub n0: u32,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GammaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub gamma: GammaSpec,
    /// Polynomial mapping to lift (shorthand like `5n^2+3n`, inline JSON or a .json path).
    #[arg(long)]
    pub poly: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AvgMethod {
    Direct,
    Transform,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AvgArgs {
    /// Polynomial mapping P.
    #[arg(long, default_value = "n^2")]
    pub poly: String,
    /// Average along the canonical mapping of Γ(k, n0) instead of --poly.
    #[arg(long)]
    pub canonical: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub gamma: GammaSpec,
    /// Lattice file written by the library (f64 values); random input when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Lower corner of the random input box.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lo: Option<Vec<i64>>,
    /// Upper corner of the random input box.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub hi: Option<Vec<i64>>,
    /// Number of random nonzero entries.
    #[arg(long, default_value_t = 40)]
    pub nonzeros: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 4, 8])]
    pub n: Vec<u64>,
    #[arg(long, value_enum, default_value = "direct")]
    pub method: AvgMethod,
    /// Also write sup over the listed N of M_N |f|.
    #[arg(long)]
    pub maximal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariationMode {
    Exact,
    Brute,
    WithSup,
    LongShort,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VariationArgs {
    /// CSV with `value` or `index,value` per line; random values when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Length of the random sequence, indexed from 1.
    #[arg(long, default_value_t = 32)]
    pub len: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [2.0f64])]
    pub r: Vec<f64>,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: VariationMode,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GaussArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub gamma: GammaSpec,
    #[arg(long, default_value_t = 1)]
    pub qmin: i64,
    #[arg(long, default_value_t = 16)]
    pub qmax: i64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DecayArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub gamma: GammaSpec,
    #[arg(long, default_value_t = 3)]
    pub qmin: i64,
    #[arg(long, default_value_t = 127)]
    pub qmax: i64,
    /// Restrict to odd moduli.
    #[arg(long)]
    pub odd: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points per axis of the torus grid.
    #[arg(long, default_value_t = 64)]
    pub grid: u64,
    /// Grid shift numerator; points are (j + num/den) / grid.
    #[arg(long, default_value_t = 0)]
    pub shift_num: i64,
    #[arg(long, default_value_t = 1)]
    pub shift_den: i64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ArcsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub gamma: GammaSpec,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridSpec,
    #[arg(long, default_value_t = 1024)]
    pub n: u64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    /// Also report shells 𝔑^u at dyadic scale 2^shell_n around centers of level --shell-s.
    #[arg(long)]
    pub shell_n: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub shell_s: u32,
    #[arg(long, default_value_t = 0)]
    pub u_min: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiplierKindArg {
    M,
    Phi,
    Nu,
    Omega,
    Lambda,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MultiplierArgs {
    #[arg(long, value_enum, default_value = "m")]
    pub kind: MultiplierKindArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub gamma: GammaSpec,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridSpec,
    /// A single frequency instead of the grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi: Option<Vec<f64>>,
    /// Read --xi as integer numerators over this denominator.
    #[arg(long)]
    pub xi_den: Option<i64>,
    #[arg(long, default_value_t = 64)]
    pub n: u64,
    /// Level of Ω and Λ.
    #[arg(long, default_value_t = 1)]
    pub t: u32,
    /// Highest level of ν.
    #[arg(long, default_value_t = 7)]
    pub s_max: u32,
    /// Add |m_N - value| to each row.
    #[arg(long)]
    pub error: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// Decay exponent; read from a `decay` manifest when absent.
    #[arg(long)]
    pub delta_hat: Option<f64>,
    /// Manifest written by `decay`.
    #[arg(long)]
    pub delta_manifest: Option<PathBuf>,
    /// Dimension d; defaults to |Γ(k, n0)|.
    #[arg(long)]
    pub d: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub gamma: GammaSpec,
    /// Largest dyadic scale listed in the CSV.
    #[arg(long, default_value_t = 64)]
    pub j_max: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Rotation,
    Cyclic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableKind {
    Character,
    Indicator,
    Constant,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ErgodicArgs {
    #[arg(long, value_enum, default_value = "rotation")]
    pub system: SystemKind,
    /// Rotation vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [std::f64::consts::SQRT_2 - 1.0])]
    pub alpha: Vec<f64>,
    /// Starting points sampled for the rotation.
    #[arg(long, default_value_t = 4)]
    pub samples: usize,
    /// Moduli of the cyclic shift.
    #[arg(long, value_delimiter = ',', default_values_t = [64u64])]
    pub modulus: Vec<u64>,
    #[arg(long, value_enum, default_value = "character")]
    pub observable: ObservableKind,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [1i64])]
    pub freq: Vec<i64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0u64])]
    pub point: Vec<u64>,
    #[arg(long, default_value = "n^2")]
    pub poly: String,
    /// The N grid is 2^n_lo, ..., 2^n_hi.
    #[arg(long, default_value_t = 4)]
    pub n_lo: u32,
    #[arg(long, default_value_t = 12)]
    pub n_hi: u32,
    /// Variation exponent of the convergence report.
    #[arg(long, default_value_t = 2.5)]
    pub r: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Suite name: averaging, variation, gauss, nu, major-arc, phi, lifting,
    /// transference, maximal, weyl, bump, residue, single-term or all.
    pub suite: String,
}
