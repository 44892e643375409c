//! Sweep records and their CSV / newline-delimited JSON encodings.

use std::io::Write;

use serde::Serialize;

use crate::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Levels reported for empirical and theoretical `K̄^(L)`.
pub const KBAR_LEVELS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub schema: u32,
    pub experiment_id: String,
    pub n: usize,
    pub gamma: f64,
    pub epsilon: f64,
    /// `None` for the uniform rule.
    pub beta: Option<f64>,
    pub level_policy: &'static str,
    pub l_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub r_n: f64,
    pub cell_side: f64,
    pub mean_hops: f64,
    pub stderr: f64,
    pub skip_fraction: f64,
    /// `None` when every destination is in the source's cell.
    pub capacity_estimate: Option<f64>,
    pub theory_hop_exponent: f64,
    pub theory_capacity: f64,
    /// Mean direct hops measured alongside hierarchical traffic.
    pub e1_hops: Option<f64>,
    /// Share of the prescribed level mix that the trials reached.
    pub level_coverage: Option<f64>,
    pub excluded_sources: usize,
    pub k_bar_empirical: [f64; KBAR_LEVELS],
    pub k_bar_theory: [f64; KBAR_LEVELS],
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentRecord {
    pub fn csv_header() -> String {
        let mut cols: Vec<String> = [
            "schema",
            "experiment_id",
            "n",
            "gamma",
            "epsilon",
            "beta",
            "level_policy",
            "l_max",
            "trials",
            "seed",
            "r_n",
            "cell_side",
            "mean_hops",
            "stderr",
            "skip_fraction",
            "capacity_estimate",
            "theory_hop_exponent",
            "theory_capacity",
            "e1_hops",
            "level_coverage",
            "excluded_sources",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        cols.extend((1..=KBAR_LEVELS).map(|l| format!("k_bar_emp_{l}")));
        cols.extend((1..=KBAR_LEVELS).map(|l| format!("k_bar_theory_{l}")));
        cols.push("wall_time_ms".into());
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![
            self.schema.to_string(),
            self.experiment_id.clone(),
            self.n.to_string(),
            self.gamma.to_string(),
            self.epsilon.to_string(),
            self.beta.map_or_else(|| "uniform".to_string(), |b| b.to_string()),
            self.level_policy.to_string(),
            self.l_max.to_string(),
            self.trials.to_string(),
            self.seed.to_string(),
            self.r_n.to_string(),
            self.cell_side.to_string(),
            self.mean_hops.to_string(),
            self.stderr.to_string(),
            self.skip_fraction.to_string(),
            opt(self.capacity_estimate),
            self.theory_hop_exponent.to_string(),
            self.theory_capacity.to_string(),
            opt(self.e1_hops),
            opt(self.level_coverage),
            self.excluded_sources.to_string(),
        ];
        cols.extend(self.k_bar_empirical.iter().map(f64::to_string));
        cols.extend(self.k_bar_theory.iter().map(f64::to_string));
        cols.push(self.wall_time_ms.to_string());
        cols.join(",")
    }

    /// Whether every numeric field is finite.
    pub fn is_finite(&self) -> bool {
        let opts = [self.beta, self.capacity_estimate, self.e1_hops, self.level_coverage];
        [
            self.gamma,
            self.epsilon,
            self.r_n,
            self.cell_side,
            self.mean_hops,
            self.stderr,
            self.skip_fraction,
            self.theory_hop_exponent,
            self.theory_capacity,
        ]
        .iter()
        .chain(self.k_bar_empirical.iter())
        .chain(self.k_bar_theory.iter())
        .chain(opts.iter().flatten())
        .all(|v| v.is_finite())
    }
}

/// Streams records in one of the output formats.
pub struct RecordWriter<W: Write> {
    out: W,
    format: OutputFormat,
    started: bool,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(out: W, format: OutputFormat) -> Self {
        Self {
            out,
            format,
            started: false,
        }
    }

    /// Writes the CSV header (no-op for JSON); called once before any record.
    pub fn begin(&mut self) -> Result<()> {
        if !self.started {
            self.started = true;
            if self.format == OutputFormat::Csv {
                writeln!(self.out, "{}", ExperimentRecord::csv_header())?;
                self.out.flush()?;
            }
        }
        Ok(())
    }

    pub fn write(&mut self, record: &ExperimentRecord) -> Result<()> {
        self.begin()?;
        match self.format {
            OutputFormat::Csv => writeln!(self.out, "{}", record.csv_row())?,
            OutputFormat::Json => {
                serde_json::to_writer(&mut self.out, record)?;
                writeln!(self.out)?;
            }
        }
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
