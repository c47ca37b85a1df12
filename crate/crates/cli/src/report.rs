//! CSV rows and the JSON report.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dbar_core::spectral::LambdaReport;
use dbar_core::witness::WitnessCertificate;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// Column order of every CSV the runner writes.
pub const COLUMNS: [&str; 11] = [
    "experiment",
    "domain",
    "neighborhood",
    "h",
    "dofs",
    "lambda",
    "residual",
    "witness_bound",
    "alpha",
    "r_quotient",
    "pass",
];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    pub domain: String,
    pub neighborhood: String,
    pub h: Option<f64>,
    pub dofs: Option<usize>,
    pub lambda: Option<f64>,
    pub residual: Option<f64>,
    pub witness_bound: Option<f64>,
    /// Decimal text of `α`, exact in the exponent even where a double underflows.
    pub alpha: Option<String>,
    pub r_quotient: Option<f64>,
    pub pass: bool,
}

impl Row {
    pub fn lambda(experiment: &str, domain: &str, r: &LambdaReport) -> Self {
        Row {
            experiment: experiment.into(),
            domain: domain.into(),
            neighborhood: r.neighborhood.clone(),
            h: Some(r.h),
            dofs: Some(r.dofs),
            lambda: Some(r.lambda),
            residual: Some(r.residual),
            pass: true,
            ..Default::default()
        }
    }
}

/// `exp(log_alpha)` as `m.mmmmmmmmme-N` text.
pub fn alpha_text(log_alpha: f64) -> String {
    let l10 = log_alpha / std::f64::consts::LN_10;
    let mut e = l10.floor();
    let mut m = 10f64.powf(l10 - e);
    if m >= 9.9999999995 {
        m /= 10.0;
        e += 1.0;
    }
    format!("{m:.9}e{}", e as i64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub certificates: Vec<WitnessCertificate>,
    pub rows: Vec<Row>,
    /// Whole-study checks that no single row carries.
    pub checks: Vec<Check>,
    /// Experiment-specific ledgers.
    pub details: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass) && self.checks.iter().all(|c| c.pass)
    }
}

pub fn write_csv(path: &Path, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).context(format!("creating {}", path.display()))?;
    if rows.is_empty() {
        w.write_record(COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<experiment>.csv` and `<experiment>.json` under `dir`.
pub fn write_report(dir: &Path, report: &Report) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).context(format!("creating {}", dir.display()))?;
    let csv = dir.join(format!("{}.csv", report.experiment));
    let json = dir.join(format!("{}.json", report.experiment));
    write_csv(&csv, &report.rows)?;
    let mut f = File::create(&json).context(format!("creating {}", json.display()))?;
    serde_json::to_writer_pretty(&mut f, report)?;
    writeln!(f)?;
    Ok((csv, json))
}

/// Certificates stored in an earlier report; each is revalidated.
pub fn load_certificates(path: &Path) -> Result<Vec<WitnessCertificate>> {
    let text = std::fs::read_to_string(path).context(format!("reading {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).context(format!("parsing {}", path.display()))?;
    let list = v
        .get("certificates")
        .and_then(|c| c.as_array())
        .context(format!("{} has no certificates", path.display()))?;
    list.iter()
        .map(|c| Ok(WitnessCertificate::from_json(&c.to_string())?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_text_survives_underflow() {
        assert_eq!(alpha_text((0.25f64).ln()), "2.500000000e-1");
        let s = alpha_text(-769.5);
        assert!(s.ends_with("e-335"), "{s}");
        let m: f64 = s.split('e').next().unwrap().parse().unwrap();
        assert!((m.log10() - 335.0 - (-769.5 / std::f64::consts::LN_10)).abs() < 1e-9);
    }

    #[test]
    fn empty_csv_still_has_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_csv(&p, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap().trim(), COLUMNS.join(","));
    }

    #[test]
    fn header_matches_schema() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_csv(&p, &[Row::default()]).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        assert_eq!(text.lines().next().unwrap(), COLUMNS.join(","));
    }
}
