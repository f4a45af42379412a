//! Typed reports and their table / CSV / JSON renderings.
//!
//! Every numeric value in a report is a string: exact values as reduced
//! rationals, everything else as rendered decimals.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::args::Format;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactValue {
    pub exact: String,
    pub decimal: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactRow {
    pub target: String,
    pub failure: ExactValue,
    pub success: ExactValue,
    /// `successes/assignments`, present when a single erasure pattern was counted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub successes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaReport {
    pub schema_version: u32,
    pub command: String,
    pub field_order: u64,
    pub erasure: ExactValue,
    pub rows: Vec<ExactRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerateReport {
    pub schema_version: u32,
    pub command: String,
    pub network: String,
    pub field_order: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erasure: Option<ExactValue>,
    pub assignments: u64,
    pub patterns: u64,
    pub rows: Vec<ExactRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub target: String,
    pub failure: String,
    pub success: String,
    pub std_error: String,
    pub ci_low: String,
    pub ci_high: String,
    /// `normal` or `wilson`
    pub interval: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub schema_version: u32,
    pub command: String,
    pub network: String,
    pub field_order: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erasure: Option<ExactValue>,
    pub trials: u64,
    pub seed: u64,
    pub confidence: String,
    pub rows: Vec<EstimateRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialRow {
    pub target: String,
    pub failure: String,
    pub success: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialReport {
    pub schema_version: u32,
    pub command: String,
    pub network: String,
    pub field_order: u64,
    pub variable: String,
    pub rows: Vec<PolynomialRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub q: u64,
    pub network_success: ExactValue,
    pub meets_target: bool,
    pub prime_power: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub schema_version: u32,
    pub command: String,
    pub target_success: ExactValue,
    pub minimal_integer_q: u64,
    pub minimal_prime_power_q: u64,
    pub rows: Vec<ThresholdRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub command: String,
    pub header: Vec<String>,
    /// Empty cells mark values that could not be computed for that row.
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitRow {
    pub target: String,
    pub failure: ExactValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateRow {
    pub q: u64,
    pub sink_failure: String,
    pub network_failure: String,
    /// `q * (P_sink(q, p) - P_sink(inf, p))`
    pub rate_sink: String,
    pub rate_network: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitsReport {
    pub schema_version: u32,
    pub command: String,
    pub erasure: ExactValue,
    pub limits: Vec<LimitRow>,
    pub rates: Vec<RateRow>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write_aligned(&self, out: &mut dyn Write) -> io::Result<()> {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        writeln!(out, "{}", line(&self.header))?;
        for row in &self.rows {
            writeln!(out, "{}", line(row))?;
        }
        Ok(())
    }

    fn write_csv(&self, out: &mut dyn Write) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }
}

pub trait Report: Serialize {
    /// Scalar facts shown above the table in table format.
    fn meta(&self) -> Vec<(&'static str, String)>;
    fn table(&self) -> Table;
}

pub fn emit<R: Report>(report: &R, format: Format, out: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)
        }
        Format::Csv => report.table().write_csv(out),
        Format::Table => {
            let meta = report.meta();
            for (k, v) in &meta {
                writeln!(out, "{k}: {v}")?;
            }
            if !meta.is_empty() {
                writeln!(out)?;
            }
            report.table().write_aligned(out)
        }
    }
}

fn exact_table(rows: &[ExactRow], with_counts: bool) -> Table {
    let mut header = vec!["target", "failure", "failure_decimal", "success", "success_decimal"];
    if with_counts {
        header.push("successes");
    }
    let mut t = Table::new(&header);
    for r in rows {
        let mut row = vec![
            r.target.clone(),
            r.failure.exact.clone(),
            r.failure.decimal.clone(),
            r.success.exact.clone(),
            r.success.decimal.clone(),
        ];
        if with_counts {
            row.push(r.successes.clone().unwrap_or_default());
        }
        t.push(row);
    }
    t
}

impl Report for FormulaReport {
    fn meta(&self) -> Vec<(&'static str, String)> {
        vec![
            ("network", rlnc_lab::network::BUILTIN_BUTTERFLY.to_string()),
            ("field order", self.field_order.to_string()),
            ("erasure p", self.erasure.exact.clone()),
        ]
    }

    fn table(&self) -> Table {
        exact_table(&self.rows, false)
    }
}

impl Report for EnumerateReport {
    fn meta(&self) -> Vec<(&'static str, String)> {
        let mut m = vec![("network", self.network.clone()), ("field order", self.field_order.to_string())];
        if let Some(e) = &self.erasure {
            m.push(("erasure p", e.exact.clone()));
        }
        m.push(("assignments", self.assignments.to_string()));
        m.push(("erasure patterns", self.patterns.to_string()));
        m
    }

    fn table(&self) -> Table {
        exact_table(&self.rows, self.rows.iter().any(|r| r.successes.is_some()))
    }
}

impl Report for SimulateReport {
    fn meta(&self) -> Vec<(&'static str, String)> {
        let mut m = vec![("network", self.network.clone()), ("field order", self.field_order.to_string())];
        if let Some(e) = &self.erasure {
            m.push(("erasure p", e.exact.clone()));
        }
        m.push(("trials", self.trials.to_string()));
        m.push(("seed", self.seed.to_string()));
        m.push(("confidence", self.confidence.clone()));
        m
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&["target", "failure", "success", "std_error", "ci_low", "ci_high", "interval"]);
        for r in &self.rows {
            t.push(vec![
                r.target.clone(),
                r.failure.clone(),
                r.success.clone(),
                r.std_error.clone(),
                r.ci_low.clone(),
                r.ci_high.clone(),
                r.interval.clone(),
            ]);
        }
        t
    }
}

impl Report for PolynomialReport {
    fn meta(&self) -> Vec<(&'static str, String)> {
        vec![
            ("network", self.network.clone()),
            ("field order", self.field_order.to_string()),
            ("variable", self.variable.clone()),
        ]
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&["target", "failure", "success"]);
        for r in &self.rows {
            t.push(vec![r.target.clone(), r.failure.clone(), r.success.clone()]);
        }
        t
    }
}

impl Report for ThresholdReport {
    fn meta(&self) -> Vec<(&'static str, String)> {
        vec![
            ("target success", self.target_success.exact.clone()),
            ("minimal integer q", self.minimal_integer_q.to_string()),
            ("minimal field order", self.minimal_prime_power_q.to_string()),
        ]
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&["q", "network_success", "network_success_decimal", "meets_target", "prime_power"]);
        for r in &self.rows {
            t.push(vec![
                r.q.to_string(),
                r.network_success.exact.clone(),
                r.network_success.decimal.clone(),
                r.meets_target.to_string(),
                r.prime_power.to_string(),
            ]);
        }
        t
    }
}

impl Report for SweepReport {
    fn meta(&self) -> Vec<(&'static str, String)> {
        Vec::new()
    }

    fn table(&self) -> Table {
        Table { header: self.header.clone(), rows: self.rows.clone() }
    }
}

impl Report for LimitsReport {
    fn meta(&self) -> Vec<(&'static str, String)> {
        let mut m = vec![("erasure p", self.erasure.exact.clone())];
        for l in &self.limits {
            let key = match l.target.as_str() {
                "sink" => "limit sink failure",
                "network" => "limit network failure",
                _ => "limit average failure",
            };
            m.push((key, format!("{} ({})", l.failure.exact, l.failure.decimal)));
        }
        m
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&["q", "sink_failure", "network_failure", "rate_sink", "rate_network"]);
        for r in &self.rates {
            t.push(vec![
                r.q.to_string(),
                r.sink_failure.clone(),
                r.network_failure.clone(),
                r.rate_sink.clone(),
                r.rate_network.clone(),
            ]);
        }
        t
    }
}
