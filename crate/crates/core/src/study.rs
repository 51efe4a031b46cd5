//! Replicated generate-and-fit experiments comparing the spurious-event model
//! with the plain model on the reference designs.

use std::fmt::Write as _;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augment::{fit_component, run_chain, AugmentModel, ChainConfig, LatentLabels};
use crate::error::{Error, Result};
use crate::events::RiskSet;
use crate::model::{ModelSpec, INTERCEPT};
use crate::ppois::{Component, FitOptions};
use crate::report::{combine, plain_report, FitReport};
use crate::rng::{derive_seed, rng_from_seed};
use crate::simulate::{generate, GeneratorSpec, REFERENCE_SPURIOUS, REFERENCE_TRUE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dg {
    /// Constant spurious rate.
    #[serde(rename = "DG1")]
    Dg1,
    /// No spurious events.
    #[serde(rename = "DG2")]
    Dg2,
}

impl Dg {
    pub fn label(self) -> &'static str {
        match self {
            Dg::Dg1 => "DG1",
            Dg::Dg2 => "DG2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// 100 replications, 20 actors, 300 true events.
    Desk,
    /// 1000 replications, 40 actors, 500 true events.
    Paper,
}

impl Scale {
    pub fn reps(self) -> usize {
        match self {
            Scale::Desk => 100,
            Scale::Paper => 1000,
        }
    }

    pub fn n_actors(self) -> usize {
        match self {
            Scale::Desk => 20,
            Scale::Paper => 40,
        }
    }

    pub fn true_events(self) -> usize {
        match self {
            Scale::Desk => 300,
            Scale::Paper => 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub dg: Dg,
    pub reps: usize,
    pub n_actors: usize,
    pub true_events: usize,
    pub seed: u64,
    pub chain: ChainConfig,
    pub fit: FitOptions,
}

impl StudyConfig {
    pub fn new(dg: Dg, scale: Scale, seed: u64) -> Self {
        StudyConfig {
            dg,
            reps: scale.reps(),
            n_actors: scale.n_actors(),
            true_events: scale.true_events(),
            seed,
            chain: ChainConfig::default(),
            fit: FitOptions::default(),
        }
    }

    pub fn generator(&self) -> GeneratorSpec {
        match self.dg {
            Dg::Dg1 => GeneratorSpec::dg1(self.n_actors, self.true_events),
            Dg::Dg2 => GeneratorSpec::dg2(self.n_actors, self.true_events),
        }
    }
}

/// Outcome of one replication.
#[derive(Debug)]
pub struct Replication {
    pub realized_pfe: f64,
    pub remse: Result<FitReport>,
    pub rem: Result<FitReport>,
}

/// Generates one dataset and fits both models. The fitted models match the
/// generating design: constant baseline, the five reference statistics, and
/// an intercept-only spurious component.
pub fn run_replication(cfg: &StudyConfig, index: usize) -> Result<Replication> {
    let mut rng = rng_from_seed(derive_seed(cfg.seed, index as u64));
    let sim = generate(&cfg.generator(), &mut rng)?;
    let chain_seed: u64 = rng.random();
    let stream = &sim.stream;
    let true_spec = ModelSpec {
        statistics: cfg.generator().true_intensity.spec.statistics,
        spline: None,
    };
    let rs = RiskSet::all_pairs(stream.actors().len());

    let remse = (|| {
        let model = AugmentModel::new(
            stream,
            true_spec.clone(),
            Some(ModelSpec::intercept_only()),
            rs.clone(),
            cfg.fit,
        )?;
        let chain = run_chain(
            stream,
            &model,
            &ChainConfig {
                seed: chain_seed,
                ..cfg.chain
            },
        )?;
        let mut r = combine(&model, &chain.draws)?;
        r.burn_in = chain.burn_in;
        r.failed_psteps = chain.failed_psteps;
        Ok(r)
    })();

    let rem = (|| {
        let model = AugmentModel::new(stream, true_spec.clone(), None, rs.clone(), cfg.fit)?;
        let fit = fit_component(
            stream,
            &model,
            &LatentLabels::all_true(stream.len()),
            Component::True,
            None,
        )?;
        Ok(plain_report(&model.true_model, &fit))
    })();

    Ok(Replication {
        realized_pfe: sim.realized_pfe,
        remse,
        rem,
    })
}

/// `√((1/S) Σ_s ‖ϑ̄_s − ϑ‖²)`
pub fn rmse(estimates: &[DVector<f64>], truth: &DVector<f64>) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Config("rmse needs at least one estimate".into()));
    }
    let mut acc = 0.0;
    for e in estimates {
        if e.len() != truth.len() {
            return Err(Error::LengthMismatch {
                expected: truth.len(),
                got: e.len(),
            });
        }
        acc += (e - truth).norm_squared();
    }
    Ok((acc / estimates.len() as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub component: Component,
    pub name: String,
    /// `None` for a component that is absent from the generating process.
    pub truth: Option<f64>,
    pub ave: f64,
    pub rmse: Option<f64>,
    pub cp: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodSummary {
    pub model: String,
    pub rows: Vec<CoefficientRow>,
    /// RMSE of the whole true-component vector.
    pub vector_rmse: f64,
    pub mean_pfe_estimate: f64,
    pub fitted: usize,
    pub failures: usize,
    pub failure_messages: Vec<String>,
}

impl MethodSummary {
    pub fn row(&self, component: Component, name: &str) -> Option<&CoefficientRow> {
        self.rows
            .iter()
            .find(|r| r.component == component && r.name == name)
    }

    pub fn true_rows(&self) -> impl Iterator<Item = &CoefficientRow> {
        self.rows.iter().filter(|r| r.component == Component::True)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub mean_realized_pfe: f64,
    pub remse: MethodSummary,
    pub rem: MethodSummary,
    /// Replications whose data generation failed.
    pub failures: usize,
}

fn truth_for(dg: Dg, component: Component, name: &str, index: usize) -> Option<f64> {
    match component {
        Component::True => REFERENCE_TRUE.get(index).copied(),
        Component::Spurious if name == INTERCEPT && dg == Dg::Dg1 => Some(REFERENCE_SPURIOUS),
        Component::Spurious => None,
    }
}

fn summarize(dg: Dg, model: &str, results: &[&Result<FitReport>]) -> Result<MethodSummary> {
    let ok: Vec<&FitReport> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let failure_messages: Vec<String> = results
        .iter()
        .filter_map(|r| r.as_ref().err().map(ToString::to_string))
        .collect();
    let Some(first) = ok.first() else {
        return Err(Error::Config(format!("every {model} fit failed")));
    };
    let s = ok.len() as f64;
    let mut rows = Vec::new();
    let mut true_index = 0;
    for (j, c) in first.coefficients.iter().enumerate() {
        let idx = if c.component == Component::True {
            true_index += 1;
            true_index - 1
        } else {
            0
        };
        let truth = truth_for(dg, c.component, &c.name, idx);
        let ave = ok.iter().map(|r| r.coefficients[j].mean).sum::<f64>() / s;
        let (rmse, cp) = match truth {
            Some(t) => (
                Some((ok.iter().map(|r| (r.coefficients[j].mean - t).powi(2)).sum::<f64>() / s).sqrt()),
                Some(
                    ok.iter()
                        .filter(|r| r.coefficients[j].ci_low <= t && t <= r.coefficients[j].ci_high)
                        .count() as f64
                        / s,
                ),
            ),
            None => (None, None),
        };
        rows.push(CoefficientRow {
            component: c.component,
            name: c.name.clone(),
            truth,
            ave,
            rmse,
            cp,
        });
    }
    let truth = DVector::from_column_slice(&REFERENCE_TRUE);
    let est: Vec<DVector<f64>> = ok
        .iter()
        .map(|r| DVector::from_iterator(truth.len(), r.true_coefficients().map(|c| c.mean)))
        .collect();
    Ok(MethodSummary {
        model: model.into(),
        rows,
        vector_rmse: rmse(&est, &truth)?,
        mean_pfe_estimate: ok.iter().map(|r| r.pfe_estimate).sum::<f64>() / s,
        fitted: ok.len(),
        failures: failure_messages.len(),
        failure_messages,
    })
}

/// Runs all replications in parallel (each with its own derived seed) and
/// aggregates AVE, RMSE and coverage per coefficient.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    if cfg.reps < 2 {
        return Err(Error::Config("a study needs at least two replications".into()));
    }
    let reps: Vec<Result<Replication>> = (0..cfg.reps)
        .into_par_iter()
        .map(|i| run_replication(cfg, i))
        .collect();
    let mut failures = 0;
    let ok: Vec<Replication> = reps
        .into_iter()
        .filter_map(|r| match r {
            Ok(r) => Some(r),
            Err(e) => {
                log::warn!("replication failed: {e}");
                failures += 1;
                None
            }
        })
        .collect();
    if ok.is_empty() {
        return Err(Error::Config("every replication failed".into()));
    }
    let remse: Vec<_> = ok.iter().map(|r| &r.remse).collect();
    let rem: Vec<_> = ok.iter().map(|r| &r.rem).collect();
    Ok(StudyResult {
        config: cfg.clone(),
        mean_realized_pfe: ok.iter().map(|r| r.realized_pfe).sum::<f64>() / ok.len() as f64,
        remse: summarize(cfg.dg, "REMSE", &remse)?,
        rem: summarize(cfg.dg, "REM", &rem)?,
        failures,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| format!("{x:.4}"))
}

fn component_name(c: Component) -> &'static str {
    match c {
        Component::True => "true",
        Component::Spurious => "spurious",
    }
}

/// Long-format CSV: one row per (model, coefficient), then summary rows.
pub fn table_csv(res: &StudyResult) -> String {
    let dg = res.config.dg.label();
    let mut s = String::from("dg,model,component,coefficient,truth,ave,rmse,cp\n");
    for m in [&res.remse, &res.rem] {
        for r in &m.rows {
            let _ = writeln!(
                s,
                "{dg},{},{},\"{}\",{},{:.4},{},{}",
                m.model,
                component_name(r.component),
                r.name,
                fmt_opt(r.truth),
                r.ave,
                fmt_opt(r.rmse),
                fmt_opt(r.cp)
            );
        }
        let _ = writeln!(s, "{dg},{},true,vector_rmse,NA,NA,{:.4},NA", m.model, m.vector_rmse);
        let _ = writeln!(
            s,
            "{dg},{},,pfe_estimate,{:.4},{:.4},NA,NA",
            m.model, res.mean_realized_pfe, m.mean_pfe_estimate
        );
    }
    s
}

/// Side-by-side markdown table of both models.
pub fn table_markdown(res: &StudyResult) -> String {
    let c = &res.config;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "### {} (S = {}, n = {}, {} true events, realized PFE {:.3} %)\n",
        c.dg.label(),
        c.reps,
        c.n_actors,
        c.true_events,
        res.mean_realized_pfe
    );
    let _ = writeln!(s, "| Coefficient | Truth | REMSE AVE | REMSE RMSE | REMSE CP | REM AVE | REM RMSE | REM CP |");
    let _ = writeln!(s, "|---|---:|---:|---:|---:|---:|---:|---:|");
    for r in res.remse.true_rows() {
        let other = res.rem.row(Component::True, &r.name);
        let _ = writeln!(
            s,
            "| {} | {} | {:.3} | {} | {} | {} | {} | {} |",
            r.name,
            fmt_opt(r.truth),
            r.ave,
            fmt_opt(r.rmse),
            fmt_opt(r.cp),
            other.map_or("NA".into(), |o| format!("{:.3}", o.ave)),
            fmt_opt(other.and_then(|o| o.rmse)),
            fmt_opt(other.and_then(|o| o.cp)),
        );
    }
    for r in res.remse.rows.iter().filter(|r| r.component == Component::Spurious) {
        let _ = writeln!(
            s,
            "| spurious {} | {} | {:.3} | {} | {} | | | |",
            r.name,
            fmt_opt(r.truth),
            r.ave,
            fmt_opt(r.rmse),
            fmt_opt(r.cp)
        );
    }
    let _ = writeln!(
        s,
        "| PFE estimate (%) | {:.3} | {:.4} | | | {:.4} | | |",
        res.mean_realized_pfe, res.remse.mean_pfe_estimate, res.rem.mean_pfe_estimate
    );
    let _ = writeln!(
        s,
        "\nVector RMSE: REMSE {:.4}, REM {:.4}. Failed fits: REMSE {}, REM {}; failed replications {}.",
        res.remse.vector_rmse, res.rem.vector_rmse, res.remse.failures, res.rem.failures, res.failures
    );
    s
}
