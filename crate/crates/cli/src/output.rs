//! Row schema and the CSV / JSON-lines writers.

use std::io::Write;

use rcbound::bounds::{BoundRequest, BoundResult, ChannelSpec, Flag};
use rcbound::ratesearch::RateCurveRow;
use serde::Serialize;

/// Bumped whenever a column is added, removed, renamed or reordered.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn join_flags(flags: &[Flag]) -> String {
    flags.iter().map(Flag::name).collect::<Vec<_>>().join(";")
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Output of `bound`.
#[derive(Debug, Serialize)]
pub struct BoundRow {
    pub channel: &'static str,
    pub delta_or_gamma: f64,
    pub n: u32,
    pub log2_m: f64,
    pub method: String,
    pub epsilon: f64,
    /// Natural log of epsilon; stays informative below the smallest double.
    pub ln_epsilon: Option<f64>,
    pub err_est: f64,
    pub flags: String,
}

impl BoundRow {
    pub fn new(req: &BoundRequest, r: &BoundResult) -> Self {
        BoundRow {
            channel: req.channel.name(),
            delta_or_gamma: req.channel.parameter(),
            n: req.n,
            log2_m: req.m.log2_m(),
            method: req.method.to_string(),
            epsilon: r.epsilon(),
            ln_epsilon: finite(r.log_epsilon.ln()),
            err_est: r.err_est,
            flags: join_flags(&r.flags),
        }
    }
}

/// Output of `sweep`, one per `(n, method)` cell.
#[derive(Debug, Serialize)]
pub struct RateRow {
    pub channel: &'static str,
    pub delta_or_gamma: f64,
    pub n: u32,
    pub epsilon_target: f64,
    pub method: String,
    pub rate: f64,
    pub log2_m: f64,
    pub achieved_epsilon: Option<f64>,
    pub err_est: Option<f64>,
    pub flags: String,
    pub error: Option<String>,
}

impl RateRow {
    pub fn new(channel: &ChannelSpec, target: f64, r: &RateCurveRow) -> Self {
        RateRow {
            channel: channel.name(),
            delta_or_gamma: channel.parameter(),
            n: r.n,
            epsilon_target: target,
            method: r.method.to_string(),
            rate: r.rate,
            log2_m: r.log2_m,
            achieved_epsilon: finite(r.achieved_epsilon),
            err_est: finite(r.err_est),
            flags: join_flags(&r.flags),
            error: r.error.clone(),
        }
    }
}

/// Output of `validate`, one per check.
#[derive(Debug, Serialize)]
pub struct CheckRow {
    pub suite: &'static str,
    pub check: String,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub status: &'static str,
}

#[derive(Serialize)]
struct Versioned<'a, T> {
    schema_version: u32,
    #[serde(flatten)]
    row: &'a T,
}

/// Streams rows in one format, flushing after each so partial output survives.
pub struct RowWriter {
    format: Format,
    csv: Option<csv::Writer<Box<dyn Write>>>,
    raw: Option<Box<dyn Write>>,
}

impl RowWriter {
    pub fn new(format: Format, sink: Box<dyn Write>) -> Self {
        match format {
            Format::Csv => RowWriter { format, csv: Some(csv::Writer::from_writer(sink)), raw: None },
            Format::Json => RowWriter { format, csv: None, raw: Some(sink) },
        }
    }

    pub fn write<T: Serialize>(&mut self, row: &T) -> anyhow::Result<()> {
        match self.format {
            Format::Csv => {
                let w = self.csv.as_mut().expect("csv sink");
                w.serialize(row)?;
                w.flush()?;
            }
            Format::Json => {
                let w = self.raw.as_mut().expect("json sink");
                serde_json::to_writer(&mut *w, &Versioned { schema_version: SCHEMA_VERSION, row })?;
                w.write_all(b"\n")?;
                w.flush()?;
            }
        }
        Ok(())
    }
}
