//! Data-augmentation sampler for the true/spurious decomposition.
//!
//! Each iteration imputes latent labels `z` given the current coefficients
//! (I-step), then refits both component intensities on the implied event
//! paths and draws new coefficients from their normal posterior
//! approximations (P-step).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{EventStream, RiskSet};
use crate::model::{check_identifiable, ComponentModel, ModelSpec};
use crate::netstats::{HistoryState, StatEvaluator};
use crate::ppois::{
    build_dataset, fit_intercept_only, fit_with_start, Component, FitOptions, FitResult,
    PoissonDataset,
};
use crate::rng::{derive_seed, rng_from_seed};

/// `z[m] = true` marks event `m` as a true event.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatentLabels {
    pub z: Vec<bool>,
}

impl LatentLabels {
    pub fn all_true(m: usize) -> Self {
        LatentLabels { z: vec![true; m] }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn spurious_count(&self) -> usize {
        self.z.iter().filter(|&&z| !z).count()
    }

    /// Percentage of events labelled spurious.
    pub fn pfe(&self) -> f64 {
        if self.z.is_empty() {
            0.0
        } else {
            100.0 * self.spurious_count() as f64 / self.z.len() as f64
        }
    }
}

/// Both component models, the risk set and solver settings.
#[derive(Clone, Debug)]
pub struct AugmentModel {
    pub true_model: ComponentModel,
    /// `None` fixes the spurious intensity at zero (plain REM).
    pub spurious_model: Option<ComponentModel>,
    pub risk_set: RiskSet,
    pub fit: FitOptions,
}

impl AugmentModel {
    pub fn new(
        stream: &EventStream,
        true_spec: ModelSpec,
        spurious_spec: Option<ModelSpec>,
        risk_set: RiskSet,
        fit: FitOptions,
    ) -> Result<Self> {
        if let Some(s) = &spurious_spec {
            check_identifiable(&true_spec, s)?;
        }
        risk_set.covers(stream)?;
        let h = stream.horizon();
        Ok(AugmentModel {
            true_model: ComponentModel::new(true_spec, h)?,
            spurious_model: spurious_spec.map(|s| ComponentModel::new(s, h)).transpose()?,
            risk_set,
            fit,
        })
    }

    pub fn has_spurious(&self) -> bool {
        self.spurious_model.is_some()
    }

    pub fn component(&self, c: Component) -> Option<&ComponentModel> {
        match c {
            Component::True => Some(&self.true_model),
            Component::Spurious => self.spurious_model.as_ref(),
        }
    }

    /// Coefficient names, true block first.
    pub fn names(&self) -> Vec<(Component, String)> {
        let mut out: Vec<_> = self
            .true_model
            .names()
            .iter()
            .map(|n| (Component::True, n.clone()))
            .collect();
        if let Some(s) = &self.spurious_model {
            out.extend(s.names().iter().map(|n| (Component::Spurious, n.clone())));
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.true_model.dim() + self.spurious_model.as_ref().map_or(0, |m| m.dim())
    }
}

/// Coefficient vector `ϑ = (ϑ₁, ϑ₀)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    pub true_part: DVector<f64>,
    pub spurious: Option<DVector<f64>>,
}

impl Coefficients {
    pub fn stacked(&self) -> DVector<f64> {
        let mut v: Vec<f64> = self.true_part.iter().copied().collect();
        if let Some(s) = &self.spurious {
            v.extend(s.iter());
        }
        DVector::from_vec(v)
    }
}

/// Labels of one I-step together with the acceptance probabilities used.
#[derive(Clone, Debug, PartialEq)]
pub struct ImputationSweep {
    pub labels: LatentLabels,
    /// `λ₁ / (λ₀ + λ₁)` at each event.
    pub probabilities: Vec<f64>,
}

/// `λ₁ / (λ₀ + λ₁)` from the two log-intensities.
pub fn acceptance_probability(log_true: f64, log_spurious: f64) -> f64 {
    1.0 / (1.0 + (log_spurious - log_true).exp())
}

/// Walks the events in order, drawing each label from the intensities under
/// the component histories implied by the labels drawn so far.
pub fn istep<R: Rng + ?Sized>(
    stream: &EventStream,
    model: &AugmentModel,
    theta: &Coefficients,
    rng: &mut R,
) -> Result<ImputationSweep> {
    let m_len = stream.len();
    let Some(spur) = &model.spurious_model else {
        return Ok(ImputationSweep {
            labels: LatentLabels::all_true(m_len),
            probabilities: vec![1.0; m_len],
        });
    };
    let theta0 = theta
        .spurious
        .as_ref()
        .ok_or_else(|| Error::Config("spurious coefficients missing".into()))?;
    let tm = &model.true_model;
    let n = stream.actors().len();
    let ev1 = StatEvaluator::new(tm.statistics(), stream.actors())?;
    let ev0 = StatEvaluator::new(spur.statistics(), stream.actors())?;
    let (mut h1, mut h0) = (HistoryState::new(n), HistoryState::new(n));
    let mut s1 = vec![0.0; ev1.len()];
    let mut s0 = vec![0.0; ev0.len()];
    let mut z = Vec::with_capacity(m_len);
    let mut probabilities = Vec::with_capacity(m_len);

    for (m, e) in stream.events().iter().enumerate() {
        ev1.row_into(&h1, e.dyad, &mut s1);
        ev0.row_into(&h0, e.dyad, &mut s0);
        let eta1 = tm.linear_predictor(theta.true_part.as_slice(), &tm.baseline_row(e.time)?, &s1);
        let eta0 = spur.linear_predictor(theta0.as_slice(), &spur.baseline_row(e.time)?, &s0);
        if eta1.exp() == 0.0 && eta0.exp() == 0.0 || eta1.is_nan() || eta0.is_nan() {
            return Err(Error::ZeroIntensity(m));
        }
        let p = acceptance_probability(eta1, eta0);
        let zm = rng.random_bool(p.clamp(0.0, 1.0));
        if zm {
            h1.apply_event(e.dyad);
        } else {
            h0.apply_event(e.dyad);
        }
        z.push(zm);
        probabilities.push(p);
    }
    Ok(ImputationSweep {
        labels: LatentLabels { z },
        probabilities,
    })
}

/// Result of one P-step.
#[derive(Clone, Debug)]
pub struct PosteriorDraw {
    pub labels: LatentLabels,
    pub true_fit: FitResult,
    pub spurious_fit: Option<FitResult>,
    /// Coefficients drawn from `N(ϑ̂, V)` of each component.
    pub sample: Coefficients,
}

impl PosteriorDraw {
    /// Stacked posterior means `ϑ̂`.
    pub fn mean(&self) -> DVector<f64> {
        Coefficients {
            true_part: self.true_fit.theta_hat.clone(),
            spurious: self.spurious_fit.as_ref().map(|f| f.theta_hat.clone()),
        }
        .stacked()
    }

    /// `blockdiag(V₁, V₀)`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let p1 = self.true_fit.dim();
        let p0 = self.spurious_fit.as_ref().map_or(0, |f| f.dim());
        let mut v = DMatrix::zeros(p1 + p0, p1 + p0);
        v.view_mut((0, 0), (p1, p1)).copy_from(&self.true_fit.covariance);
        if let Some(f) = &self.spurious_fit {
            v.view_mut((p1, p1), (p0, p0)).copy_from(&f.covariance);
        }
        v
    }
}

/// Variance given to non-intercept coefficients of a component without events.
pub const DEGENERATE_VARIANCE: f64 = 1e-8;

/// Intercept at the continuity-corrected rate, all other coefficients at zero.
fn degenerate_fit(data: &PoissonDataset) -> FitResult {
    let base = fit_intercept_only(data);
    let dim = data.dim();
    let mut theta = DVector::zeros(dim);
    theta[0] = base.theta_hat[0];
    let mut cov = DMatrix::from_diagonal_element(dim, dim, DEGENERATE_VARIANCE);
    cov[(0, 0)] = base.covariance[(0, 0)];
    FitResult {
        theta_hat: theta,
        covariance: cov,
        ..base
    }
}

/// Fits one component on the event path implied by `labels`.
pub fn fit_component(
    stream: &EventStream,
    model: &AugmentModel,
    labels: &LatentLabels,
    component: Component,
    start: Option<&DVector<f64>>,
) -> Result<FitResult> {
    let cm = model
        .component(component)
        .ok_or_else(|| Error::Config("component has no model".into()))?;
    let data = build_dataset(stream, &labels.z, component, cm, &model.risk_set)?;
    if cm.is_intercept_only() {
        return Ok(fit_intercept_only(&data));
    }
    if data.total_response() == 0 {
        return Ok(degenerate_fit(&data));
    }
    fit_with_start(&data, cm.penalty(), &model.fit, start)
}

fn sample_normal<R: Rng + ?Sized>(fit: &FitResult, rng: &mut R) -> Result<DVector<f64>> {
    let l = fit
        .covariance
        .clone()
        .cholesky()
        .ok_or_else(|| Error::RankDeficient(vec!["posterior covariance".into()]))?
        .l();
    let e = DVector::from_fn(fit.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok(&fit.theta_hat + l * e)
}

/// Refits both components given labels and samples new coefficients.
/// `warm` supplies starting values for the iterative solver.
pub fn pstep<R: Rng + ?Sized>(
    stream: &EventStream,
    model: &AugmentModel,
    labels: LatentLabels,
    warm: Option<&PosteriorDraw>,
    rng: &mut R,
) -> Result<PosteriorDraw> {
    let true_fit = fit_component(
        stream,
        model,
        &labels,
        Component::True,
        warm.map(|w| &w.true_fit.theta_hat),
    )?;
    let spurious_fit = if model.has_spurious() {
        Some(fit_component(
            stream,
            model,
            &labels,
            Component::Spurious,
            warm.and_then(|w| w.spurious_fit.as_ref()).map(|f| &f.theta_hat),
        )?)
    } else {
        None
    };
    let sample = Coefficients {
        true_part: sample_normal(&true_fit, rng)?,
        spurious: spurious_fit
            .as_ref()
            .map(|f| sample_normal(f, rng))
            .transpose()?,
    };
    Ok(PosteriorDraw {
        labels,
        true_fit,
        spurious_fit,
        sample,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    pub burn_in: usize,
    pub draws: usize,
    pub seed: u64,
    pub parallel_chains: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            burn_in: 30,
            draws: 30,
            seed: 1,
            parallel_chains: 1,
        }
    }
}

/// One row of the per-iteration diagnostic trace. Iteration 0 is the
/// initial random split.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub spurious_count: usize,
    /// Sampled `ϑ^{(d)}`, or the posterior mean for iteration 0.
    pub theta: Vec<f64>,
    pub failed: bool,
}

#[derive(Clone, Debug)]
pub struct ChainOutput {
    /// Retained draws from the last `draws` iterations.
    pub draws: Vec<PosteriorDraw>,
    pub trace: Vec<TraceRow>,
    pub failed_psteps: usize,
    pub burn_in: usize,
}

/// Runs `burn_in + draws` sampler iterations from a Bernoulli(0.5) split of
/// the events and keeps the last `draws`.
pub fn run_chain(stream: &EventStream, model: &AugmentModel, cfg: &ChainConfig) -> Result<ChainOutput> {
    if stream.is_empty() {
        return Err(Error::NoEvents);
    }
    let mut rng = rng_from_seed(cfg.seed);
    let init = if model.has_spurious() {
        LatentLabels {
            z: (0..stream.len()).map(|_| rng.random_bool(0.5)).collect(),
        }
    } else {
        LatentLabels::all_true(stream.len())
    };
    let first = pstep(stream, model, init, None, &mut rng)?;
    let mut theta = Coefficients {
        true_part: first.true_fit.theta_hat.clone(),
        spurious: first.spurious_fit.as_ref().map(|f| f.theta_hat.clone()),
    };
    let mut trace = vec![TraceRow {
        iteration: 0,
        spurious_count: first.labels.spurious_count(),
        theta: theta.stacked().as_slice().to_vec(),
        failed: false,
    }];
    let mut warm = first;
    let total = cfg.burn_in + cfg.draws;
    let mut draws = Vec::with_capacity(cfg.draws);
    let mut failed = 0;

    for d in 1..=total {
        let sweep = istep(stream, model, &theta, &mut rng)?;
        let spurious_count = sweep.labels.spurious_count();
        match pstep(stream, model, sweep.labels, Some(&warm), &mut rng) {
            Ok(draw) => {
                theta = draw.sample.clone();
                trace.push(TraceRow {
                    iteration: d,
                    spurious_count,
                    theta: theta.stacked().as_slice().to_vec(),
                    failed: false,
                });
                if d > cfg.burn_in {
                    draws.push(draw.clone());
                }
                warm = draw;
            }
            Err(e) => {
                log::warn!("P-step {d} failed: {e}");
                failed += 1;
                trace.push(TraceRow {
                    iteration: d,
                    spurious_count,
                    theta: theta.stacked().as_slice().to_vec(),
                    failed: true,
                });
                if 2 * failed > total {
                    return Err(Error::ChainFailed {
                        failures: failed,
                        attempts: d,
                        last: e.to_string(),
                    });
                }
            }
        }
    }
    Ok(ChainOutput {
        draws,
        trace,
        failed_psteps: failed,
        burn_in: cfg.burn_in,
    })
}

/// Independent chains with seeds `derive_seed(cfg.seed, c)`.
pub fn run_chains(stream: &EventStream, model: &AugmentModel, cfg: &ChainConfig) -> Result<Vec<ChainOutput>> {
    let n = cfg.parallel_chains.max(1);
    (0..n)
        .into_par_iter()
        .map(|c| {
            let sub = ChainConfig {
                seed: derive_seed(cfg.seed, c as u64),
                ..*cfg
            };
            run_chain(stream, model, &sub)
        })
        .collect()
}
