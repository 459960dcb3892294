//! CSV and metadata writers. Floats carry 12 significant digits so files
//! compare byte for byte across identical runs.

use std::fs::File;
use std::path::{Path, PathBuf};

use dexp3m::analysis::{RatioAudit, RegretReport, SimplexAudit, VirtualSlotMap};
use dexp3m::policy::PolicyParams;
use serde::Serialize;

use crate::error::{CliError, Result};

/// `%.12g`-style formatting.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Everything computed for one seed.
#[derive(Debug, Clone)]
pub struct SeedResult {
    pub seed: u64,
    pub params: PolicyParams,
    pub total_delay: usize,
    pub report: RegretReport,
    pub slots: VirtualSlotMap,
    pub ratios: RatioAudit,
    pub simplex: SimplexAudit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
}

pub fn mean_stderr(values: &[f64]) -> MeanStderr {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stderr = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    MeanStderr { mean, stderr }
}

struct Sheet {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl Sheet {
    fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(CliError::io(&path))?;
        let mut sheet = Self {
            path,
            writer: csv::Writer::from_writer(file),
        };
        sheet.row(header.iter().map(|s| s.to_string()))?;
        Ok(sheet)
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) -> Result<()> {
        let fields: Vec<String> = fields.into_iter().collect();
        self.writer.write_record(&fields).map_err(|source| CliError::Csv {
            path: self.path.clone(),
            source,
        })
    }

    fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(CliError::io(&self.path))
    }
}

/// Writes `regret.csv`, `diagnostics.csv`, `audit.csv` and `summary.csv`.
/// `results` must already be sorted by seed.
pub fn write_run_tables(dir: &Path, results: &[SeedResult]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;

    let mut regret = Sheet::create(
        dir,
        "regret.csv",
        &[
            "seed",
            "t",
            "pseudo_regret_cumulative",
            "realized_regret_cumulative",
            "bound_value",
        ],
    )?;
    for r in results {
        let rep = &r.report;
        for t in 0..rep.pseudo_curve.len() {
            regret.row([
                r.seed.to_string(),
                (t + 1).to_string(),
                fmt_float(rep.pseudo_curve[t]),
                fmt_float(rep.realized_curve[t]),
                fmt_float(rep.bound_curve[t]),
            ])?;
        }
    }
    regret.finish()?;

    let mut diag = Sheet::create(
        dir,
        "diagnostics.csv",
        &["seed", "tau", "t_of_tau", "l_before", "s_tilde"],
    )?;
    for r in results {
        for slot in &r.slots.rows {
            diag.row([
                r.seed.to_string(),
                slot.tau.to_string(),
                slot.t_of_tau.to_string(),
                slot.l_before.to_string(),
                slot.s_tilde.to_string(),
            ])?;
        }
    }
    diag.finish()?;

    let mut audit = Sheet::create(
        dir,
        "audit.csv",
        &[
            "seed",
            "slots",
            "max_decrease_ratio",
            "decrease_bound",
            "decrease_ok",
            "max_increase_ratio",
            "increase_bound",
            "increase_ok",
            "min_probability",
            "probability_floor",
            "floor_violations",
            "sum_violations",
        ],
    )?;
    for r in results {
        let a = &r.ratios;
        audit.row([
            r.seed.to_string(),
            a.slots.to_string(),
            fmt_float(a.max_decrease_ratio),
            fmt_float(a.decrease_bound),
            a.decrease_ok.map_or("n/a".to_string(), |ok| ok.to_string()),
            fmt_float(a.max_increase_ratio),
            fmt_float(a.increase_bound),
            a.increase_ok.to_string(),
            fmt_float(r.simplex.min_probability),
            fmt_float(r.params.floor()),
            r.simplex.floor_violations.to_string(),
            r.simplex.sum_violations.to_string(),
        ])?;
    }
    audit.finish()?;

    let mut summary = Sheet::create(
        dir,
        "summary.csv",
        &[
            "seed",
            "final_pseudo_regret",
            "final_realized_regret",
            "bound_value",
            "gamma",
            "delta1",
            "delta2",
            "total_delay",
        ],
    )?;
    for r in results {
        summary.row([
            r.seed.to_string(),
            fmt_float(r.report.pseudo_regret),
            fmt_float(r.report.realized_regret),
            fmt_float(r.report.bound_value),
            fmt_float(r.params.gamma),
            fmt_float(r.params.delta1),
            fmt_float(r.params.delta2),
            r.total_delay.to_string(),
        ])?;
    }
    let pick = |f: fn(&SeedResult) -> f64| -> MeanStderr {
        mean_stderr(&results.iter().map(f).collect::<Vec<_>>())
    };
    let stats = [
        pick(|r| r.report.pseudo_regret),
        pick(|r| r.report.realized_regret),
        pick(|r| r.report.bound_value),
        pick(|r| r.params.gamma),
        pick(|r| r.params.delta1),
        pick(|r| r.params.delta2),
        pick(|r| r.total_delay as f64),
    ];
    summary.row(std::iter::once("mean".to_string()).chain(stats.iter().map(|s| fmt_float(s.mean))))?;
    summary.row(std::iter::once("stderr".to_string()).chain(stats.iter().map(|s| fmt_float(s.stderr))))?;
    summary.finish()
}

/// One row of `scaling.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub value: usize,
    pub seeds: usize,
    pub pseudo: MeanStderr,
    pub realized: MeanStderr,
    pub bound: f64,
}

pub fn write_scaling(dir: &Path, axis: &str, rows: &[ScalingRow]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let mut sheet = Sheet::create(
        dir,
        "scaling.csv",
        &[
            "axis",
            "value",
            "seeds",
            "mean_pseudo_regret",
            "stderr_pseudo_regret",
            "mean_realized_regret",
            "stderr_realized_regret",
            "mean_bound_value",
            "regret_over_bound",
        ],
    )?;
    for r in rows {
        sheet.row([
            axis.to_string(),
            r.value.to_string(),
            r.seeds.to_string(),
            fmt_float(r.pseudo.mean),
            fmt_float(r.pseudo.stderr),
            fmt_float(r.realized.mean),
            fmt_float(r.realized.stderr),
            fmt_float(r.bound),
            fmt_float(r.pseudo.mean / r.bound),
        ])?;
    }
    sheet.finish()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("cannot serialize metadata: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(CliError::io(path))
}
