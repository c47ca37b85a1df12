//! Run configuration: a TOML file with one table per experiment, plus flag overrides.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dbar_core::spectral::SolverOptions;
use serde::{Deserialize, Serialize};

/// Bad input from the user; the binary exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    DiscExample,
    ShrinkStudy,
    MkhSuite,
    Probe,
    Anchors,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::DiscExample => "disc-example",
            Experiment::ShrinkStudy => "shrink-study",
            Experiment::MkhSuite => "mkh-suite",
            Experiment::Probe => "probe",
            Experiment::Anchors => "anchors",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct RunSection {
    pub seed: u64,
    pub quad_tol: f64,
    pub solver_tol: f64,
    pub dense_threshold: usize,
    pub threads: usize,
    pub out: PathBuf,
    /// A previous JSON report whose certificates are reused.
    pub certificates: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 0,
            quad_tol: 1e-8,
            solver_tol: 1e-9,
            dense_threshold: 1200,
            threads: 1,
            out: PathBuf::from("out"),
            certificates: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct DiscSection {
    pub j: Vec<u32>,
}

impl Default for DiscSection {
    fn default() -> Self {
        DiscSection { j: (2..=8).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct ShrinkSection {
    pub radii: Vec<f64>,
    pub points_per_radius: f64,
    /// Neighbourhood indices for the `U_j`, `V_j` rows.
    pub j: Vec<u32>,
}

impl Default for ShrinkSection {
    fn default() -> Self {
        ShrinkSection {
            radii: vec![0.4, 0.2, 0.1],
            points_per_radius: 6.0,
            j: vec![2, 3, 4, 5, 6],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct MkhSection {
    pub h: Vec<f64>,
    pub forms: usize,
    pub c: f64,
    /// Spacing of the witness check.
    pub witness_h: f64,
}

impl Default for MkhSection {
    fn default() -> Self {
        MkhSection {
            h: vec![0.25, 0.125, 0.0625],
            forms: 100,
            c: 1.0,
            witness_h: 0.0625,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct ProbeSection {
    pub j: Vec<u32>,
    /// Defaults to `1/(16 max R_j)`.
    pub epsilon: Option<f64>,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection {
            j: (2..=8).collect(),
            epsilon: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct AnchorSection {
    pub side: f64,
    pub h: Vec<f64>,
}

impl Default for AnchorSection {
    fn default() -> Self {
        AnchorSection {
            side: 1.0,
            h: vec![1.0 / 8.0, 1.0 / 10.0, 1.0 / 12.0],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub disc_example: DiscSection,
    pub shrink_study: ShrinkSection,
    pub mkh_suite: MkhSection,
    pub probe: ProbeSection,
    pub anchors: AnchorSection,
}

/// Command-line values that replace config keys.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub quad_tol: Option<f64>,
    pub solver_tol: Option<f64>,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        match toml::from_str(s) {
            Ok(c) => Ok(c),
            Err(e) => usage(format!("config: {}", e.message())),
        }
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).context(format!("reading config {}", p.display()))?;
                Self::from_toml_str(&text)
            }
        }
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        let r = &mut self.run;
        if let Some(v) = &o.out {
            r.out = v.clone();
        }
        r.seed = o.seed.unwrap_or(r.seed);
        r.quad_tol = o.quad_tol.unwrap_or(r.quad_tol);
        r.solver_tol = o.solver_tol.unwrap_or(r.solver_tol);
        r.threads = o.threads.unwrap_or(r.threads);
        self
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.run.solver_tol,
            seed: self.run.seed,
            dense_threshold: self.run.dense_threshold,
        }
    }

    /// Checks the keys used by `exp`, naming the first offending one.
    pub fn validate(&self, exp: Experiment) -> Result<()> {
        let r = &self.run;
        positive("quad-tol", r.quad_tol)?;
        positive("solver-tol", r.solver_tol)?;
        if r.threads == 0 {
            return usage("threads must be at least 1");
        }
        let js = |key: &str, js: &[u32]| -> Result<()> {
            nonempty(key, js)?;
            if js.iter().any(|&j| j < 2) {
                return usage(format!("{key}: j must be at least 2"));
            }
            Ok(())
        };
        match exp {
            Experiment::DiscExample => js("disc-example.j", &self.disc_example.j),
            Experiment::ShrinkStudy => {
                let s = &self.shrink_study;
                nonempty("shrink-study.radii", &s.radii)?;
                for &r in &s.radii {
                    positive("shrink-study.radii", r)?;
                }
                positive("shrink-study.points-per-radius", s.points_per_radius)?;
                if !s.j.is_empty() {
                    js("shrink-study.j", &s.j)?;
                }
                Ok(())
            }
            Experiment::MkhSuite => {
                let m = &self.mkh_suite;
                spacings(&m.h)?;
                spacings(&[m.witness_h])?;
                if m.forms == 0 {
                    return usage("mkh-suite.forms must be at least 1");
                }
                if !(m.c >= 0.0) {
                    return usage("mkh-suite.c must be non-negative");
                }
                Ok(())
            }
            Experiment::Probe => {
                js("probe.j", &self.probe.j)?;
                if let Some(e) = self.probe.epsilon {
                    positive("probe.epsilon", e)?;
                }
                Ok(())
            }
            Experiment::Anchors => {
                positive("anchors.side", self.anchors.side)?;
                spacings(&self.anchors.h)
            }
        }
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        usage(format!("{key} must be positive"))
    }
}

fn nonempty<T>(key: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        usage(format!("{key} must not be empty"))
    } else {
        Ok(())
    }
}

fn spacings(hs: &[f64]) -> Result<()> {
    nonempty("h", hs)?;
    if hs.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return usage("h must be positive");
    }
    Ok(())
}
