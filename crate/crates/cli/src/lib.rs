//! Command-line front end for `rlnc-lab`.
//!
//! Exit codes: 0 on success, 2 for parse or configuration errors, 3 when an
//! exhaustive enumeration would exceed its budget.

pub mod args;
pub mod report;

use std::io::{self, Write};

use num_traits::{One, Zero};
use thiserror::Error;

use rlnc_lab::closed_form::{self, FormulaInput, Target};
use rlnc_lab::exact::{self, integer, ExactRational};
use rlnc_lab::field::{is_prime_power, parse_field_order, FieldSpec};
use rlnc_lab::network::NetworkSpec;
use rlnc_lab::probability::{
    self, ErasureModel, ExactEnumeration, FailureProbabilities, IntervalMethod, ProbabilityError,
};

use crate::args::{
    Cli, Command, EngineArgs, FormulaArgs, LimitsArgs, PolynomialArgs, SimulateArgs, SweepArgs, ThresholdArgs,
};
use crate::report::*;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

/// Environment variable fixing the worker count.
pub const THREADS_VAR: &str = "RLNC_LAB_THREADS";

const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Budget(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Budget(_) => EXIT_BUDGET,
            _ => EXIT_CONFIG,
        }
    }
}

fn parse_err(e: impl std::fmt::Display) -> CliError {
    CliError::Parse(e.to_string())
}

impl From<ProbabilityError> for CliError {
    fn from(e: ProbabilityError) -> Self {
        match e {
            ProbabilityError::SearchSpaceTooLarge { .. } => Self::Budget(e.to_string()),
            other => Self::Parse(other.to_string()),
        }
    }
}

/// Sizes the global worker pool from `RLNC_LAB_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Parse(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(parse_err)
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Formula(a) => formula(a, out),
        Command::Enumerate(a) => enumerate(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Polynomial(a) => polynomial(a, out),
        Command::Threshold(a) => threshold(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Limits(a) => limits(a, out),
    }
}

fn probability_arg(text: &str) -> Result<ExactRational, CliError> {
    let p = exact::parse_rational(text).map_err(parse_err)?;
    if p < ExactRational::zero() || p > ExactRational::one() {
        return Err(CliError::Parse(format!("probability must lie in [0, 1], got {text:?}")));
    }
    Ok(p)
}

fn field_arg(text: &str) -> Result<FieldSpec, CliError> {
    FieldSpec::parse(text).map_err(parse_err)
}

fn network_arg(reference: &str) -> Result<NetworkSpec, CliError> {
    NetworkSpec::load(reference).map_err(parse_err)
}

/// `2..4` (inclusive), `2,3,4`, or a mix such as `2..4,8`.
pub fn parse_orders(text: &str) -> Result<Vec<u64>, CliError> {
    let mut orders = Vec::new();
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let number = |s: &str| -> Result<u64, CliError> {
            let q: u64 = s.trim().parse().map_err(|_| CliError::Parse(format!("bad field order {s:?}")))?;
            if q < 2 {
                return Err(CliError::Parse(format!("field order must be at least 2, got {q}")));
            }
            Ok(q)
        };
        match token.split_once("..") {
            Some((a, b)) => orders.extend(number(a)?..=number(b)?),
            None => orders.push(number(token)?),
        }
    }
    Ok(orders)
}

fn value(x: &ExactRational, precision: u32) -> ExactValue {
    ExactValue { exact: x.to_string(), decimal: exact::render_decimal(x, precision as usize) }
}

fn decimal(x: &ExactRational, precision: u32) -> String {
    exact::render_decimal(x, precision as usize)
}

fn decimal_f64(x: f64, precision: u32) -> String {
    decimal(&exact::from_f64(x), precision)
}

fn exact_row(target: &str, failure: &ExactRational, precision: u32) -> ExactRow {
    ExactRow {
        target: target.to_string(),
        failure: value(failure, precision),
        success: value(&(ExactRational::one() - failure), precision),
        successes: None,
    }
}

fn formula(a: &FormulaArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let q = parse_field_order(&a.field).map_err(parse_err)?;
    let p = a.erasure.as_deref().map(probability_arg).transpose()?.unwrap_or_else(ExactRational::zero);
    let input = FormulaInput::new(q, p.clone()).map_err(parse_err)?;
    let prec = a.output.precision;
    let sink = closed_form::butterfly_failure(&input, Target::Sink);
    let rows = vec![
        exact_row("t1", &sink, prec),
        exact_row("t2", &sink, prec),
        exact_row("network", &closed_form::butterfly_failure(&input, Target::Network), prec),
        exact_row("average", &closed_form::butterfly_failure(&input, Target::Average), prec),
    ];
    let report = FormulaReport {
        schema_version: SCHEMA_VERSION,
        command: "formula".into(),
        field_order: q,
        erasure: value(&p, prec),
        rows,
    };
    Ok(emit(&report, a.output.format, out)?)
}

fn failure_rows(f: &FailureProbabilities, precision: u32) -> Vec<ExactRow> {
    let exact = |p: &probability::Probability| p.as_exact().cloned().unwrap_or_default();
    let mut rows: Vec<ExactRow> =
        f.per_sink.iter().map(|(name, p)| exact_row(name, &exact(p), precision)).collect();
    rows.push(exact_row("network", &exact(&f.network), precision));
    rows.push(exact_row("average", &exact(&f.average), precision));
    rows
}

fn engine_inputs(a: &EngineArgs) -> Result<(NetworkSpec, FieldSpec, Option<ErasureModel>), CliError> {
    let spec = network_arg(&a.network)?;
    let field = field_arg(&a.field)?;
    let model = match &a.erasure {
        Some(text) => Some(ErasureModel::new(probability_arg(text)?)?),
        None => None,
    };
    Ok((spec, field, model))
}

fn enumerate(a: &EngineArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (spec, field, model) = engine_inputs(a)?;
    let prec = a.output.precision;
    let e: ExactEnumeration = probability::enumerate_exact(&spec, &field, model.as_ref())?;
    let mut rows = failure_rows(&e.failure, prec);
    let counts = (0..spec.sinks.len())
        .map(|s| e.sink_success_count(s))
        .chain([e.network_success_count()]);
    for (row, count) in rows.iter_mut().zip(counts) {
        row.successes = count.map(|c| format!("{c}/{}", e.assignments));
    }
    let report = EnumerateReport {
        schema_version: SCHEMA_VERSION,
        command: "enumerate".into(),
        network: a.network.clone(),
        field_order: field.order() as u64,
        erasure: model.as_ref().map(|m| value(m.p(), prec)),
        assignments: e.assignments,
        patterns: e.patterns,
        rows,
    };
    Ok(emit(&report, a.output.format, out)?)
}

fn estimate_row(target: &str, p: &probability::Probability, precision: u32) -> EstimateRow {
    let est = p.as_estimate().cloned().unwrap_or_else(|| probability::Estimate::from_mean(p.to_f64(), 1, 0));
    let ci = est.confidence_interval(Z_95);
    let failures = exact::from_f64(est.mean);
    EstimateRow {
        target: target.to_string(),
        failure: decimal(&failures, precision),
        success: decimal(&(ExactRational::one() - &failures), precision),
        std_error: decimal_f64(est.std_error, precision),
        ci_low: decimal_f64(ci.low, precision),
        ci_high: decimal_f64(ci.high, precision),
        interval: match ci.method {
            IntervalMethod::Normal => "normal",
            IntervalMethod::Wilson => "wilson",
        }
        .into(),
    }
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (spec, field, model) = engine_inputs(&a.engine)?;
    let prec = a.engine.output.precision;
    let f = probability::monte_carlo(&spec, &field, model.as_ref(), a.trials, a.seed)?;
    let mut rows: Vec<EstimateRow> = f.per_sink.iter().map(|(n, p)| estimate_row(n, p, prec)).collect();
    rows.push(estimate_row("network", &f.network, prec));
    rows.push(estimate_row("average", &f.average, prec));
    let report = SimulateReport {
        schema_version: SCHEMA_VERSION,
        command: "simulate".into(),
        network: a.engine.network.clone(),
        field_order: field.order() as u64,
        erasure: model.as_ref().map(|m| value(m.p(), prec)),
        trials: a.trials,
        seed: a.seed,
        confidence: "0.95".into(),
        rows,
    };
    Ok(emit(&report, a.engine.output.format, out)?)
}

fn polynomial(a: &PolynomialArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = network_arg(&a.network)?;
    let field = field_arg(&a.field)?;
    let polys = probability::erasure_polynomial(&spec, &field)?;
    let row = |target: &str, failure: &exact::Polynomial| PolynomialRow {
        target: target.to_string(),
        failure: failure.to_string(),
        success: failure.complement().to_string(),
    };
    let mut rows: Vec<PolynomialRow> = polys.per_sink.iter().map(|(n, p)| row(n, p)).collect();
    rows.push(row("network", &polys.network));
    rows.push(row("average", &polys.average));
    let report = PolynomialReport {
        schema_version: SCHEMA_VERSION,
        command: "polynomial".into(),
        network: a.network.clone(),
        field_order: field.order() as u64,
        variable: "p".into(),
        rows,
    };
    Ok(emit(&report, a.output.format, out)?)
}

fn threshold(a: &ThresholdArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let target = exact::parse_rational(&a.success).map_err(parse_err)?;
    let t = closed_form::threshold_search(&target).map_err(parse_err)?;
    let prec = a.output.precision;
    let mut qs = vec![t.minimal_integer_q];
    if t.minimal_integer_q > 2 {
        qs.insert(0, t.minimal_integer_q - 1);
    }
    if t.minimal_prime_power_q != t.minimal_integer_q {
        qs.push(t.minimal_prime_power_q);
    }
    let rows = qs
        .into_iter()
        .map(|q| {
            let s = closed_form::network_success(q);
            ThresholdRow { q, meets_target: s >= target, network_success: value(&s, prec), prime_power: is_prime_power(q) }
        })
        .collect();
    let report = ThresholdReport {
        schema_version: SCHEMA_VERSION,
        command: "threshold".into(),
        target_success: value(&target, prec),
        minimal_integer_q: t.minimal_integer_q,
        minimal_prime_power_q: t.minimal_prime_power_q,
        rows,
    };
    Ok(emit(&report, a.output.format, out)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Formula,
    Enumerate,
    Simulate,
    Rate,
}

impl Column {
    fn parse(text: &str) -> Result<Vec<Self>, CliError> {
        let mut cols = Vec::new();
        for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let c = match token {
                "formula" => Self::Formula,
                "enumerate" => Self::Enumerate,
                "simulate" => Self::Simulate,
                "rate" => Self::Rate,
                other => return Err(CliError::Parse(format!("unknown column {other:?}"))),
            };
            if !cols.contains(&c) {
                cols.push(c);
            }
        }
        Ok(cols)
    }

    fn header(self) -> &'static [&'static str] {
        match self {
            Self::Formula => &["formula_sink_failure", "formula_network_failure", "formula_average_failure", "formula_network_success"],
            Self::Enumerate => {
                &["enumerate_sink_failure", "enumerate_network_failure", "enumerate_average_failure", "enumerate_network_success"]
            }
            Self::Simulate => &[
                "simulate_sink_failure",
                "simulate_network_failure",
                "simulate_average_failure",
                "simulate_network_success",
                "simulate_network_std_error",
            ],
            Self::Rate => &["rate_sink", "rate_network"],
        }
    }
}

/// `q * (P(q, p) - lim P)`; plain `q * P(q)` at `p = 0`.
fn rate(q: u64, p: &ExactRational, target: Target) -> Result<ExactRational, CliError> {
    let input = FormulaInput::new(q, p.clone()).map_err(parse_err)?;
    let limit = closed_form::limit_failure(p, target).map_err(parse_err)?;
    Ok(integer(q) * (closed_form::butterfly_failure(&input, target) - limit))
}

fn sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let orders = parse_orders(&a.fields)?;
    let erasures: Vec<ExactRational> =
        a.erasures.split(',').map(str::trim).filter(|t| !t.is_empty()).map(probability_arg).collect::<Result<_, _>>()?;
    let columns = Column::parse(&a.columns)?;
    if columns.contains(&Column::Simulate) && a.trials.is_none() {
        return Err(CliError::Parse("the simulate column needs --trials".into()));
    }
    let prec = a.output.precision;
    let butterfly = rlnc_lab::build_butterfly();
    let mut header = vec!["q".to_string(), "p".to_string()];
    header.extend(columns.iter().flat_map(|c| c.header().iter().map(|h| h.to_string())));
    let mut rows = Vec::new();
    for &q in &orders {
        for p in &erasures {
            let mut row = vec![q.to_string(), p.to_string()];
            let model = ErasureModel::new(p.clone())?;
            let field = FieldSpec::of_order(q).ok();
            for col in &columns {
                let width = col.header().len();
                match col {
                    Column::Formula => {
                        let input = FormulaInput::new(q, p.clone()).map_err(parse_err)?;
                        let net = closed_form::butterfly_failure(&input, Target::Network);
                        row.push(decimal(&closed_form::butterfly_failure(&input, Target::Sink), prec));
                        row.push(decimal(&net, prec));
                        row.push(decimal(&closed_form::butterfly_failure(&input, Target::Average), prec));
                        row.push(decimal(&(ExactRational::one() - &net), prec));
                    }
                    Column::Enumerate => {
                        let result = field.as_ref().map(|f| probability::enumerate_exact(&butterfly, f, Some(&model)));
                        match result {
                            Some(Ok(e)) => {
                                let get = |p: &probability::Probability| p.as_exact().cloned().unwrap_or_default();
                                let net = get(&e.failure.network);
                                row.push(decimal(&get(&e.failure.per_sink[0].1), prec));
                                row.push(decimal(&net, prec));
                                row.push(decimal(&get(&e.failure.average), prec));
                                row.push(decimal(&(ExactRational::one() - &net), prec));
                            }
                            Some(Err(ProbabilityError::SearchSpaceTooLarge { .. })) | None => {
                                row.extend(std::iter::repeat_n(String::new(), width))
                            }
                            Some(Err(e)) => return Err(e.into()),
                        }
                    }
                    Column::Simulate => match &field {
                        Some(f) => {
                            let trials = a.trials.unwrap_or_default();
                            let m = probability::monte_carlo(&butterfly, f, Some(&model), trials, a.seed)?;
                            let net = m.network.to_f64();
                            let se = m.network.as_estimate().map(|e| e.std_error).unwrap_or_default();
                            row.push(decimal_f64(m.per_sink[0].1.to_f64(), prec));
                            row.push(decimal_f64(net, prec));
                            row.push(decimal_f64(m.average.to_f64(), prec));
                            row.push(decimal(&(ExactRational::one() - exact::from_f64(net)), prec));
                            row.push(decimal_f64(se, prec));
                        }
                        None => row.extend(std::iter::repeat_n(String::new(), width)),
                    },
                    Column::Rate => {
                        row.push(decimal(&rate(q, p, Target::Sink)?, prec));
                        row.push(decimal(&rate(q, p, Target::Network)?, prec));
                    }
                }
            }
            rows.push(row);
        }
    }
    let report = SweepReport { schema_version: SCHEMA_VERSION, command: "sweep".into(), header, rows };
    Ok(emit(&report, a.output.format, out)?)
}

fn limits(a: &LimitsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let p = probability_arg(&a.erasure)?;
    let prec = a.output.precision;
    let limits = Target::ALL
        .iter()
        .map(|&t| {
            let failure = closed_form::limit_failure(&p, t).map_err(parse_err)?;
            Ok(LimitRow { target: t.name().to_string(), failure: value(&failure, prec) })
        })
        .collect::<Result<_, CliError>>()?;
    let rates = parse_orders(&a.fields)?
        .into_iter()
        .map(|q| {
            let input = FormulaInput::new(q, p.clone()).map_err(parse_err)?;
            Ok(RateRow {
                q,
                sink_failure: decimal(&closed_form::butterfly_failure(&input, Target::Sink), prec),
                network_failure: decimal(&closed_form::butterfly_failure(&input, Target::Network), prec),
                rate_sink: decimal(&rate(q, &p, Target::Sink)?, prec),
                rate_network: decimal(&rate(q, &p, Target::Network)?, prec),
            })
        })
        .collect::<Result<_, CliError>>()?;
    let report = LimitsReport {
        schema_version: SCHEMA_VERSION,
        command: "limits".into(),
        erasure: value(&p, prec),
        limits,
        rates,
    };
    Ok(emit(&report, a.output.format, out)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_lists() {
        assert_eq!(parse_orders("2..4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_orders("2, 3,4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_orders("2..3,8").unwrap(), vec![2, 3, 8]);
        assert!(parse_orders("5..4").unwrap().is_empty());
        assert!(parse_orders("1..4").is_err());
        assert!(parse_orders("x").is_err());
    }

    #[test]
    fn rate_at_zero_is_scaled_failure() {
        let zero = ExactRational::zero();
        assert_eq!(rate(2, &zero, Target::Sink).unwrap(), exact::rational(125, 64));
    }

    #[test]
    fn columns() {
        assert_eq!(Column::parse("rate,formula,rate").unwrap(), vec![Column::Rate, Column::Formula]);
        assert!(Column::parse("nope").is_err());
    }
}
