//! Output schemas and writers: JSON reports for estimation and testing,
//! the kernel-constant CSV, and the simulation tables with their manifest.

use std::io::Write;
use std::path::Path;

use donut_rd::{
    DgpSpec, FailureCounts, KernelConstants, KernelId, SpecTestResult, StudyResult, TestMethod,
};
use serde::Serialize;

use crate::CliError;

/// Estimation report: the interval and its ingredients plus the full
/// effective configuration.
#[derive(Debug, Serialize)]
pub struct EstimateReport {
    pub tau_hat: f64,
    pub b_bar: f64,
    pub s_hat: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub cv: f64,
    pub bias_ratio: f64,
    pub eff_n_plus: usize,
    pub eff_n_minus: usize,
    pub h_used: f64,
    pub h_was_selected: bool,
    pub d: f64,
    pub kernel: KernelId,
    #[serde(rename = "M")]
    pub m: f64,
    pub alpha: f64,
    pub cutoff: f64,
    pub nn_j: usize,
    pub data: String,
}

/// Configuration echo attached to a specification-test report.
#[derive(Debug, Serialize)]
pub struct TestConfig {
    pub method: TestMethod,
    pub h_used: f64,
    pub h_was_selected: bool,
    pub d: f64,
    pub kernel: KernelId,
    #[serde(rename = "M")]
    pub m: f64,
    pub alpha: f64,
    pub cutoff: f64,
    pub nn_j: usize,
    pub data: String,
}

/// Specification-test report: configuration echo plus the full result.
#[derive(Debug, Serialize)]
pub struct TestReport {
    pub config: TestConfig,
    pub result: SpecTestResult,
}

/// Reproduction metadata written next to the simulation tables.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub seed: u64,
    pub generator: String,
    pub version: String,
    pub reps: usize,
    pub l_grid: Vec<f64>,
    pub dgp: DgpSpec,
    pub diagnostics: Vec<RowDiagnostics>,
}

/// Per-row selection and failure diagnostics for the manifest.
#[derive(Debug, Serialize)]
pub struct RowDiagnostics {
    pub l: f64,
    pub mean_h_regular: f64,
    pub mean_h_donut: f64,
    pub mean_c_donut: f64,
    pub failures: FailureCounts,
}

pub fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serialization cannot fail")
    );
}

/// Write the kernel-constant table: one row per donut ratio, twelve
/// significant digits per cell.
pub fn write_constants_csv<W: Write>(
    out: W,
    rows: &[(KernelConstants, f64, f64, f64)],
) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Io(format!("writing constants table: {e}"));
    writer
        .write_record([
            "c",
            "B",
            "S",
            "S_tilde",
            "B_ratio",
            "S_ratio",
            "ci_length_ratio",
        ])
        .map_err(io)?;
    for (k, b_ratio, s_ratio, length_ratio) in rows {
        writer
            .write_record([
                format!("{:.11e}", k.c),
                format!("{:.11e}", k.bias),
                format!("{:.11e}", k.variance),
                format!("{:.11e}", k.cross),
                format!("{:.11e}", b_ratio),
                format!("{:.11e}", s_ratio),
                format!("{:.11e}", length_ratio),
            ])
            .map_err(io)?;
    }
    writer.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// Format a distortion strength: integral values print as integers so table
/// rows read like the originals.
fn fmt_l(l: f64) -> String {
    if l.fract() == 0.0 && l.abs() < 1e15 {
        format!("{}", l as i64)
    } else {
        format!("{l}")
    }
}

fn cell(v: f64) -> String {
    format!("{v:.6}")
}

fn write_table(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), CliError> {
    let io = |e: String| CliError::Io(format!("writing {}: {e}", path.display()));
    let mut writer = csv::Writer::from_path(path).map_err(|e| io(e.to_string()))?;
    writer
        .write_record(header)
        .map_err(|e| io(e.to_string()))?;
    for row in rows {
        writer.write_record(&row).map_err(|e| io(e.to_string()))?;
    }
    writer.flush().map_err(|e| io(e.to_string()))
}

/// Write table1.csv (point estimation), table2.csv (inference), table3.csv
/// (specification tests), and manifest.json into `dir`.
pub fn write_study(dir: &Path, study: &StudyResult) -> Result<(), CliError> {
    write_table(
        &dir.join("table1.csv"),
        &[
            "L",
            "regular_bias",
            "donut_bias",
            "regular_sd",
            "donut_sd",
            "regular_rmse",
            "donut_rmse",
        ],
        study
            .rows
            .iter()
            .map(|r| {
                vec![
                    fmt_l(r.l),
                    cell(r.regular.bias),
                    cell(r.donut.bias),
                    cell(r.regular.sd),
                    cell(r.donut.sd),
                    cell(r.regular.rmse),
                    cell(r.donut.rmse),
                ]
            })
            .collect(),
    )?;
    write_table(
        &dir.join("table2.csv"),
        &[
            "L",
            "regular_coverage",
            "donut_coverage",
            "regular_length",
            "donut_length",
        ],
        study
            .rows
            .iter()
            .map(|r| {
                vec![
                    fmt_l(r.l),
                    cell(r.regular.coverage),
                    cell(r.donut.coverage),
                    cell(r.regular.length),
                    cell(r.donut.length),
                ]
            })
            .collect(),
    )?;
    write_table(
        &dir.join("table3.csv"),
        &["L", "delta_reject", "gamma_reject"],
        study
            .rows
            .iter()
            .map(|r| vec![fmt_l(r.l), cell(r.delta_reject), cell(r.gamma_reject)])
            .collect(),
    )?;

    let manifest = Manifest {
        seed: study.master_seed,
        generator: study.generator.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        reps: study.reps,
        l_grid: study.rows.iter().map(|r| r.l).collect(),
        dgp: study.dgp,
        diagnostics: study
            .rows
            .iter()
            .map(|r| RowDiagnostics {
                l: r.l,
                mean_h_regular: r.regular.mean_h,
                mean_h_donut: r.donut.mean_h,
                mean_c_donut: r.mean_c_donut,
                failures: r.failures,
            })
            .collect(),
    };
    let path = dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest)
        .expect("manifest serialization cannot fail");
    std::fs::write(&path, body + "\n")
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}
