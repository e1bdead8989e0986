use std::io::Write;

use serde::Serialize;
use shuffle_parity::stats::RateEstimate;

use crate::config::{ExperimentConfig, Format};

/// One CSV line. Cells that do not apply to a command are left empty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub command: &'static str,
    pub d: usize,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub eps: f64,
    pub c: Option<u32>,
    pub trials: Option<u64>,
    pub metric: String,
    pub value: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub rows: Vec<Row>,
    pub assertions: Vec<Assertion>,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Report {
        Report {
            config_hash: config.hash(),
            config: config.clone(),
            rows: Vec::new(),
            assertions: Vec::new(),
        }
    }

    /// A row carrying the config's own d, k, n, eps, c and trials.
    pub fn base_row(&self, metric: &str, value: f64) -> Row {
        let cfg = &self.config;
        Row {
            command: cfg.command.name(),
            d: cfg.d,
            k: Some(cfg.k),
            n: Some(cfg.n),
            m: cfg.m,
            eps: cfg.eps,
            c: Some(cfg.c),
            trials: Some(cfg.trials),
            metric: metric.to_owned(),
            value,
            ci_low: None,
            ci_high: None,
            seed: cfg.seed,
            config_hash: self.config_hash.clone(),
        }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn value(&mut self, metric: &str, value: f64) {
        let row = self.base_row(metric, value);
        self.push(row);
    }

    pub fn rate(&mut self, metric: &str, rate: &RateEstimate) {
        let mut row = self.base_row(metric, rate.rate);
        row.trials = Some(rate.trials);
        row.ci_low = Some(rate.low);
        row.ci_high = Some(rate.high);
        self.push(row);
    }

    /// Records an assertion and its 0/1 row.
    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.value(&format!("assert:{name}"), if passed { 1.0 } else { 0.0 });
        self.assertions.push(Assertion {
            name: name.to_owned(),
            passed,
            detail,
        });
    }

    pub fn row(&self, metric: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn write<W: Write>(&self, format: Format, mut out: W) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                let mut writer = csv::Writer::from_writer(out);
                for row in &self.rows {
                    writer.serialize(row)?;
                }
                writer.flush()
            }
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, self)?;
                out.write_all(b"\n")
            }
        }
    }
}
