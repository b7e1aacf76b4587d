//! Report assembly and emission for the `cqid` command-line runner.
//!
//! A run produces a single [`Report`]: a config echo plus an ordered list
//! of rows, each row one named quantity produced by one library operation.
//! Reports serialize to human-readable text, a structured JSON document,
//! or a delimiter-separated table for external plotting. All three
//! emitters are deterministic: a fixed config and seed reproduce the
//! output byte for byte.

use serde::Serialize;

/// One reported quantity.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub experiment: String,
    pub quantity: String,
    pub value: RowValue,
    /// Auxiliary flag column (witness indices, labels, tolerances).
    pub flag: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum RowValue {
    Number(f64),
    Integer(u64),
    Boolean(bool),
    Text(String),
}

impl std::fmt::Display for RowValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RowValue::Number(x) => write!(f, "{x}"),
            RowValue::Integer(x) => write!(f, "{x}"),
            RowValue::Boolean(x) => write!(f, "{x}"),
            RowValue::Text(x) => write!(f, "{x}"),
        }
    }
}

/// A complete run report: config echo, version, rows.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<String>,
    pub seed: u64,
    pub tolerance: f64,
    pub dim_guard: usize,
    pub enumeration_guard: u64,
    pub version: String,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn new(
        command: &str,
        inputs: &[String],
        seed: u64,
        tolerance: f64,
        guards: &cqid_core::Guards,
    ) -> Self {
        Report {
            command: command.to_string(),
            inputs: inputs.to_vec(),
            seed,
            tolerance,
            dim_guard: guards.dim_guard,
            enumeration_guard: guards.enumeration_guard,
            version: env!("CARGO_PKG_VERSION").to_string(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, quantity: &str, value: RowValue, flag: &str) {
        self.rows.push(ReportRow {
            experiment: self.command.clone(),
            quantity: quantity.to_string(),
            value,
            flag: flag.to_string(),
        });
    }

    pub fn number(&mut self, quantity: &str, value: f64) {
        self.push(quantity, RowValue::Number(value), "");
    }

    pub fn integer(&mut self, quantity: &str, value: u64) {
        self.push(quantity, RowValue::Integer(value), "");
    }

    pub fn boolean(&mut self, quantity: &str, value: bool) {
        self.push(quantity, RowValue::Boolean(value), "");
    }

    pub fn text(&mut self, quantity: &str, value: &str) {
        self.push(quantity, RowValue::Text(value.to_string()), "");
    }
}

/// Output format of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

pub fn emit(report: &Report, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => emit_text(report),
        OutputFormat::Json => emit_json(report),
        OutputFormat::Csv => emit_plot_data(report),
    }
}

pub fn emit_text(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# cqid {} — {} (seed {}, tol {})\n",
        report.version, report.command, report.seed, report.tolerance
    ));
    for input in &report.inputs {
        out.push_str(&format!("# input: {input}\n"));
    }
    let width = report
        .rows
        .iter()
        .map(|r| r.quantity.len())
        .max()
        .unwrap_or(0);
    for row in &report.rows {
        if row.flag.is_empty() {
            out.push_str(&format!("{:width$}  {}\n", row.quantity, row.value));
        } else {
            out.push_str(&format!(
                "{:width$}  {}  [{}]\n",
                row.quantity, row.value, row.flag
            ));
        }
    }
    out
}

pub fn emit_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    s.push('\n');
    s
}

/// One row per report row, stable column order, comma separated; quotes
/// only where a field contains a delimiter.
pub fn emit_plot_data(report: &Report) -> String {
    let mut out = String::from("experiment,quantity,value,flag\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&row.experiment),
            csv_field(&row.quantity),
            csv_field(&row.value.to_string()),
            csv_field(&row.flag)
        ));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
