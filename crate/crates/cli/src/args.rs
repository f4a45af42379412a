use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "rlnc-lab", version, about = "Failure probabilities of random linear network coding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form butterfly failure probabilities.
    Formula(FormulaArgs),
    /// Exact failure probabilities by exhaustive enumeration.
    Enumerate(EngineArgs),
    /// Monte Carlo estimates.
    Simulate(SimulateArgs),
    /// Exact failure probabilities as polynomials in the erasure probability p.
    Polynomial(PolynomialArgs),
    /// Smallest field order reaching a network success probability.
    Threshold(ThresholdArgs),
    /// Table over a range of field orders and erasure probabilities.
    Sweep(SweepArgs),
    /// Large-field limits and convergence rates.
    Limits(LimitsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Significant digits in rendered decimals.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=60))]
    pub precision: u32,
}

#[derive(Debug, Args)]
pub struct FormulaArgs {
    /// Field order as gf(q); any integer q >= 2.
    #[arg(long)]
    pub field: String,
    /// Channel failure probability, a/b or decimal.
    #[arg(long)]
    pub erasure: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// builtin:butterfly or a path to a network file.
    #[arg(long, default_value = rlnc_lab::network::BUILTIN_BUTTERFLY)]
    pub network: String,
    #[arg(long)]
    pub field: String,
    #[arg(long)]
    pub erasure: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PolynomialArgs {
    #[arg(long, default_value = rlnc_lab::network::BUILTIN_BUTTERFLY)]
    pub network: String,
    #[arg(long)]
    pub field: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Required network success probability, strictly between 0 and 1.
    #[arg(long)]
    pub success: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Field orders: a..b (inclusive) or a comma list, e.g. 2..4 or 2,3,4.
    #[arg(long)]
    pub fields: String,
    /// Comma list of erasure probabilities.
    #[arg(long, default_value = "0")]
    pub erasures: String,
    /// Any of formula, enumerate, simulate, rate.
    #[arg(long, default_value = "formula,rate")]
    pub columns: String,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    #[arg(long, default_value = "0")]
    pub erasure: String,
    /// Field orders for the rate rows.
    #[arg(long, default_value = "10,100,1000,10000")]
    pub fields: String,
    #[command(flatten)]
    pub output: Output,
}
