//! Experiment runners.

use anyhow::{Context, Result};
use dbar_core::spectral::{compactness_probe, ProbeReport};
use dbar_core::studies::{
    cube_anchor, disc_example, mkh_suite, mkh_witness, probe_epsilon, quadrature_anchors, shrink_study, witness_ledger,
    witness_transfer, MkhLevel, NeighbourhoodLambda, POINTS_PER_RADIUS, MKH_SUPPORT,
};
use dbar_core::witness::{WitnessCertificate, WitnessSpec};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Experiment, ExperimentConfig};
use crate::report::{alpha_text, Check, Report, Row};

/// Largest tolerated `max/min` of `λ_h(U_j)` across a shrink study.
pub const TREND_RATIO: f64 = 2.0;

/// Slack of the exact min property and of probe ledgers.
pub const MIN_SLACK: f64 = 1e-8;

/// Certificates for `js`, reusing stored ones with the same `j` and tolerance.
pub fn certificates(cfg: &ExperimentConfig, js: &[u32]) -> Result<Vec<WitnessCertificate>> {
    let stored = match &cfg.run.certificates {
        Some(p) => crate::report::load_certificates(p)?,
        None => Vec::new(),
    };
    let tol = cfg.run.quad_tol;
    js.par_iter()
        .map(|&j| {
            if let Some(c) = stored.iter().find(|c| c.alpha.j == j && c.alpha.quad_tol == tol) {
                return Ok(c.clone());
            }
            Ok(disc_example(j, tol).context(format!("witness certificate for j = {j}"))?.certificate)
        })
        .collect()
}

fn disc_row(exp: &str, c: &WitnessCertificate) -> Row {
    let q = &c.quotient;
    Row {
        experiment: exp.into(),
        domain: "model".into(),
        neighborhood: format!("V_{}", q.j),
        witness_bound: Some(q.bound()),
        alpha: Some(alpha_text(c.alpha.log_alpha)),
        r_quotient: Some(q.r),
        pass: c.alpha.passes() && q.r <= q.bound() + dbar_core::studies::BOUND_SLACK,
        ..Default::default()
    }
}

pub fn run(cfg: &ExperimentConfig, exp: Experiment) -> Result<Report> {
    cfg.validate(exp)?;
    let name = exp.name();
    let mut certs = Vec::new();
    let mut checks = Vec::new();
    let (rows, details) = match exp {
        Experiment::DiscExample => {
            certs = certificates(cfg, &cfg.disc_example.j)?;
            let rows: Vec<Row> = certs.iter().map(|c| disc_row(name, c)).collect();
            let max_r = certs.iter().map(|c| c.quotient.r).fold(0.0, f64::max);
            (rows, json!({ "max_r": max_r }))
        }
        Experiment::ShrinkStudy => shrink(cfg, name, &mut certs, &mut checks)?,
        Experiment::MkhSuite => mkh(cfg, name, &mut certs, &mut checks)?,
        Experiment::Probe => probe(cfg, name, &mut certs, &mut checks)?,
        Experiment::Anchors => anchors(cfg, name, &mut checks)?,
    };
    Ok(Report {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: name.into(),
        seed: cfg.run.seed,
        config: cfg.clone(),
        certificates: certs,
        rows,
        checks,
        details,
    })
}

type Study = (Vec<Row>, serde_json::Value);

fn shrink(cfg: &ExperimentConfig, name: &str, certs: &mut Vec<WitnessCertificate>, checks: &mut Vec<Check>) -> Result<Study> {
    let s = &cfg.shrink_study;
    let opts = cfg.solver_options();
    let reps = s
        .radii
        .par_iter()
        .map(|&r| Ok(shrink_study(&[r], s.points_per_radius, &opts)?.remove(0)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (k, r) in reps.iter().enumerate() {
        let mut row = Row::lambda(name, "pseudoconvex", r);
        row.pass = k == 0 || r.lambda > reps[k - 1].lambda;
        rows.push(row);
    }
    let mut transfer = Vec::new();
    if !s.j.is_empty() {
        *certs = certificates(cfg, &s.j)?;
        transfer = certs
            .par_iter()
            .map(|c| Ok(witness_transfer(c, &opts)?))
            .collect::<Result<Vec<_>>>()?;
        let nb_row = |n: &NeighbourhoodLambda, c: &WitnessCertificate| {
            let mut row = Row::lambda(name, "model", &n.report);
            row.h = Some(n.h2);
            row.witness_bound = Some(c.quotient.bound());
            row.alpha = Some(alpha_text(c.alpha.log_alpha));
            row.r_quotient = Some(n.witness_quotient);
            row.pass = n.min_gap() >= -MIN_SLACK;
            row
        };
        for (t, c) in transfer.iter().zip(certs.iter()) {
            rows.push(nb_row(&t.u, c));
            rows.push(nb_row(&t.v, c));
        }
        let lam: Vec<f64> = transfer.iter().map(|t| t.u.report.lambda).collect();
        let ratio = lam.iter().cloned().fold(0.0, f64::max) / lam.iter().cloned().fold(f64::INFINITY, f64::min);
        checks.push(Check {
            name: "U_j trend".into(),
            pass: ratio <= TREND_RATIO,
            detail: format!("max/min lambda_h(U_j) = {ratio:.4} against {TREND_RATIO}"),
        });
    }
    Ok((rows, json!({ "shrink": reps, "transfer": transfer })))
}

fn mkh(cfg: &ExperimentConfig, name: &str, certs: &mut Vec<WitnessCertificate>, checks: &mut Vec<Check>) -> Result<Study> {
    let m = &cfg.mkh_suite;
    let levels: Vec<MkhLevel> = m
        .h
        .par_iter()
        .map(|&h| Ok(mkh_suite(&[h], m.forms, cfg.run.seed, m.c)?.remove(0)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<Row> = levels
        .iter()
        .map(|l| Row {
            experiment: name.into(),
            domain: "model".into(),
            neighborhood: format!("{} balls r={MKH_SUPPORT}", m.forms),
            h: Some(l.h),
            pass: l.failures() == 0,
            ..Default::default()
        })
        .collect();
    let viol: Vec<f64> = levels.iter().map(|l| l.max_violation()).collect();
    checks.push(Check {
        name: "violations shrink".into(),
        pass: viol.windows(2).all(|w| w[1] <= w[0]),
        detail: format!("largest normalised violation per level {viol:?}"),
    });
    *certs = certificates(cfg, &[2])?;
    let spec = WitnessSpec::from_certificate(&certs[0].alpha);
    let wit = mkh_witness(&spec, m.witness_h, m.c)?;
    rows.push(Row {
        experiment: name.into(),
        domain: "model".into(),
        neighborhood: "V_2 witness".into(),
        h: Some(m.witness_h),
        pass: wit.pass,
        ..Default::default()
    });
    Ok((rows, json!({ "levels": levels, "witness": wit })))
}

fn probe(cfg: &ExperimentConfig, name: &str, certs: &mut Vec<WitnessCertificate>, checks: &mut Vec<Check>) -> Result<Study> {
    *certs = certificates(cfg, &cfg.probe.j)?;
    let ledger = witness_ledger(certs)?;
    let eps = cfg.probe.epsilon.unwrap_or_else(|| probe_epsilon(certs));
    let a: ProbeReport = compactness_probe("witness", ledger.clone(), eps)?;
    let b: ProbeReport = compactness_probe("witness", ledger, 2.0 * eps)?;
    let rows = certs
        .iter()
        .zip(&a.ledger)
        .map(|(c, e)| {
            let slack = e.norm_sqr - a.epsilon * e.q - a.d_min * e.minus1;
            Row {
                experiment: name.into(),
                domain: "model".into(),
                neighborhood: format!("V_{}", c.alpha.j),
                h: Some(1.0 / (POINTS_PER_RADIUS * c.alpha.j as f64)),
                lambda: Some(e.q / e.norm_sqr),
                witness_bound: Some(c.quotient.bound()),
                alpha: Some(alpha_text(c.alpha.log_alpha)),
                r_quotient: Some(c.quotient.r),
                pass: slack <= 1e-9 * e.norm_sqr,
                ..Default::default()
            }
        })
        .collect();
    checks.push(Check {
        name: "d_min finite".into(),
        pass: a.d_min.is_finite(),
        detail: format!("d_min = {} at epsilon = {eps}", a.d_min),
    });
    checks.push(Check {
        name: "d_min non-increasing in epsilon".into(),
        pass: b.d_min <= a.d_min,
        detail: format!("d_min = {} at 2 epsilon", b.d_min),
    });
    Ok((rows, json!({ "epsilon": a, "doubled": b })))
}

fn anchors(cfg: &ExperimentConfig, name: &str, checks: &mut Vec<Check>) -> Result<Study> {
    let a = &cfg.anchors;
    let opts = cfg.solver_options();
    let cube = a
        .h
        .par_iter()
        .map(|&h| Ok(cube_anchor(a.side, &[h], &opts)?.remove(0)))
        .collect::<Result<Vec<_>>>()?;
    let rows = cube
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let mut row = Row::lambda(name, &format!("cube(L={})", a.side), &c.report);
            row.pass = if k == 0 { c.rel_error <= 0.2 } else { c.rel_error < cube[k - 1].rel_error };
            row
        })
        .collect();
    let quad = quadrature_anchors(cfg.run.quad_tol)?;
    checks.push(Check {
        name: "quadrature anchors".into(),
        pass: quad.iter().all(|q| q.pass()),
        detail: quad
            .iter()
            .map(|q| format!("{}: {:.2e}", q.name, q.rel_error))
            .collect::<Vec<_>>()
            .join("; "),
    });
    Ok((rows, json!({ "cube": cube, "quadrature": quad })))
}
