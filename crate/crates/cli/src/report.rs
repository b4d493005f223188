use std::collections::BTreeMap;
use std::io::Write;

use hardy_lab::quadrature::QuadratureSpec;
use hardy_lab::sharpness::ReportRow;
use serde::Serialize;
use serde_json::Value;

pub const COLUMNS: [&str; 13] = [
    "command",
    "n",
    "p",
    "q",
    "pbar1",
    "pbar2",
    "beta",
    "family_param",
    "numerical_ratio",
    "closed_form_constant",
    "lower_bound",
    "relative_gap",
    "anchor",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub quadrature: QuadratureSpec,
    pub seed: u64,
    pub constants: BTreeMap<String, f64>,
    pub checks: BTreeMap<String, f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub header: Header,
    pub rows: Vec<ReportRow>,
}

/// 17 significant digits.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn optional(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

fn header_value(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => n.as_f64().map(float).unwrap_or_default(),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(header_value).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

impl Report {
    pub fn write(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer(&mut *out, self)?;
                writeln!(out)
            }
            Format::Csv => self.write_csv(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let h = &self.header;
        writeln!(out, "# command: {}", h.command)?;
        for (k, v) in &h.parameters {
            writeln!(out, "# parameter.{k}: {}", header_value(v))?;
        }
        writeln!(out, "# quadrature.rel_tol: {}", float(h.quadrature.rel_tol))?;
        writeln!(out, "# quadrature.abs_tol: {}", float(h.quadrature.abs_tol))?;
        writeln!(out, "# quadrature.max_subdivisions: {}", h.quadrature.max_subdivisions)?;
        writeln!(out, "# quadrature.tail_tol: {}", float(h.quadrature.tail_tol))?;
        writeln!(out, "# seed: {}", h.seed)?;
        for (k, v) in &h.constants {
            writeln!(out, "# constant.{k}: {}", float(*v))?;
        }
        for (k, v) in &h.checks {
            writeln!(out, "# check.{k}: {}", float(*v))?;
        }
        writeln!(out, "# passed: {}", h.passed)?;

        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                r.command.clone(),
                r.n.to_string(),
                float(r.p),
                optional(r.q),
                float(r.pbar1),
                float(r.pbar2),
                optional(r.beta),
                optional(r.family_param),
                float(r.numerical_ratio),
                float(r.closed_form_constant),
                optional(r.lower_bound),
                float(r.relative_gap),
                r.anchor.clone(),
            ])?;
        }
        w.flush()
    }
}
