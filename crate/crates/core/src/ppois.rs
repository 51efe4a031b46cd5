//! Penalized Poisson regression on the piecewise-constant event likelihood.
//!
//! Between consecutive observed events the component intensities are held
//! constant, so each (interval, dyad) pair contributes a Poisson count with
//! exposure `t_m - t_{m-1}`. Rows share their baseline design within an
//! interval, so the data are kept as one block per interval holding the
//! statistic rows of every dyad at risk; the full design matrix is never
//! needed for fitting.
//!
//! The penalized log-likelihood is `ℓ(ϑ) - (γ/2) ϑᵀS̃ϑ`, whose negative Hessian
//! is `XᵀWX + γS̃` with `W = diag(μ)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{EventStream, RiskSet};
use crate::model::{ComponentModel, ExtendedPenalty};
use crate::netstats::{HistoryState, StatEvaluator};

/// Which part of the decomposed process a fit refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    True,
    Spurious,
}

impl Component {
    fn matches(self, z: bool) -> bool {
        z == (self == Component::True)
    }
}

/// Statistics and response of one inter-event interval.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalBlock {
    pub exposure: f64,
    /// `[1, B̃(midpoint)]`
    pub baseline: Vec<f64>,
    /// Risk-set slot of the dyad with a unit response, if the interval's event
    /// belongs to the fitted component.
    pub event: Option<usize>,
    /// Row-major `n_dyads × n_stats`.
    pub stats: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoissonDataset {
    names: Vec<String>,
    n_baseline: usize,
    n_stats: usize,
    n_dyads: usize,
    blocks: Vec<IntervalBlock>,
}

/// Builds the interval blocks for one component given latent labels
/// (`true` = true event). Statistics use the component's own history strictly
/// before each event; the spline is evaluated at the interval midpoint.
pub fn build_dataset(
    stream: &EventStream,
    labels: &[bool],
    component: Component,
    model: &ComponentModel,
    rs: &RiskSet,
) -> Result<PoissonDataset> {
    if labels.len() != stream.len() {
        return Err(Error::LengthMismatch {
            expected: stream.len(),
            got: labels.len(),
        });
    }
    let eval = StatEvaluator::new(model.statistics(), stream.actors())?;
    let q = eval.len();
    let n_dyads = rs.len();
    let mut state = HistoryState::new(stream.actors().len());
    let mut blocks = Vec::with_capacity(stream.len());
    let mut prev = 0.0;
    for (m, (e, &z)) in stream.events().iter().zip(labels).enumerate() {
        let exposure = e.time - prev;
        if exposure.is_nan() || exposure <= 0.0 {
            return Err(Error::ZeroLengthInterval(m));
        }
        let baseline = model.baseline_row(0.5 * (prev + e.time))?;
        let mut stats = vec![0.0; n_dyads * q];
        if q > 0 {
            for (row, &dyad) in stats.chunks_exact_mut(q).zip(rs.pairs()) {
                eval.row_into(&state, dyad, row);
            }
        }
        let mine = component.matches(z);
        let event = if mine {
            Some(
                rs.slot(e.dyad)
                    .ok_or(Error::NotInRiskSet(e.dyad.a(), e.dyad.b()))?,
            )
        } else {
            None
        };
        blocks.push(IntervalBlock {
            exposure,
            baseline,
            event,
            stats,
        });
        if mine {
            state.apply_event(e.dyad);
        }
        prev = e.time;
    }
    Ok(PoissonDataset {
        names: model.names().to_vec(),
        n_baseline: model.n_baseline(),
        n_stats: q,
        n_dyads,
        blocks,
    })
}

impl PoissonDataset {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.n_baseline + self.n_stats
    }

    pub fn n_rows(&self) -> usize {
        self.blocks.len() * self.n_dyads
    }

    pub fn n_dyads(&self) -> usize {
        self.n_dyads
    }

    pub fn blocks(&self) -> &[IntervalBlock] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [IntervalBlock] {
        &mut self.blocks
    }

    pub fn total_response(&self) -> usize {
        self.blocks.iter().filter(|b| b.event.is_some()).count()
    }

    /// `Σ_rows exposure = |ℛ| Σ_m δ_m`.
    pub fn total_exposure(&self) -> f64 {
        self.blocks.iter().map(|b| b.exposure).sum::<f64>() * self.n_dyads as f64
    }

    /// Dense `(X, y, log exposure)` with rows ordered interval-major.
    pub fn to_dense(&self) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
        let (rows, p) = (self.n_rows(), self.dim());
        let mut x = DMatrix::zeros(rows, p);
        let mut y = DVector::zeros(rows);
        let mut off = DVector::zeros(rows);
        let q = self.n_stats;
        for (m, b) in self.blocks.iter().enumerate() {
            for j in 0..self.n_dyads {
                let r = m * self.n_dyads + j;
                for (c, v) in b.baseline.iter().enumerate() {
                    x[(r, c)] = *v;
                }
                for c in 0..q {
                    x[(r, self.n_baseline + c)] = b.stats[j * q + c];
                }
                off[r] = b.exposure.ln();
                if b.event == Some(j) {
                    y[r] = 1.0;
                }
            }
        }
        (x, y, off)
    }
}

/// Log-likelihood, score and `XᵀWX` at one coefficient vector.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub loglik: f64,
    pub score: DVector<f64>,
    pub information: DMatrix<f64>,
}

const MAX_ETA: f64 = 700.0;
const CHUNK: usize = 32;

struct Partial {
    loglik: f64,
    grad: Vec<f64>,
    // upper triangle, row-major over dim × dim
    hess: Vec<f64>,
}

impl Partial {
    fn zeros(dim: usize, with_hess: bool) -> Self {
        Partial {
            loglik: 0.0,
            grad: if with_hess { vec![0.0; dim] } else { Vec::new() },
            hess: if with_hess { vec![0.0; dim * dim] } else { Vec::new() },
        }
    }

    fn add(&mut self, other: &Partial) {
        self.loglik += other.loglik;
        for (a, b) in self.grad.iter_mut().zip(&other.grad) {
            *a += b;
        }
        for (a, b) in self.hess.iter_mut().zip(&other.hess) {
            *a += b;
        }
    }
}

impl PoissonDataset {
    fn accumulate(&self, blocks: &[IntervalBlock], theta: &[f64], with_hess: bool) -> Partial {
        let nb = self.n_baseline;
        let q = self.n_stats;
        let dim = nb + q;
        let (tb, ts) = theta.split_at(nb);
        let mut acc = Partial::zeros(dim, with_hess);
        let mut a1 = vec![0.0; q];
        let mut a2 = vec![0.0; q * q];
        for b in blocks {
            let base: f64 =
                tb.iter().zip(&b.baseline).map(|(x, y)| x * y).sum::<f64>() + b.exposure.ln();
            let mut a0 = 0.0;
            if with_hess {
                a1.iter_mut().for_each(|v| *v = 0.0);
                a2.iter_mut().for_each(|v| *v = 0.0);
            }
            if q == 0 {
                a0 = self.n_dyads as f64 * base.min(MAX_ETA).exp();
            } else {
                for s in b.stats.chunks_exact(q) {
                    let lin: f64 = ts.iter().zip(s).map(|(x, y)| x * y).sum();
                    let mu = (base + lin).min(MAX_ETA).exp();
                    a0 += mu;
                    if with_hess {
                        for i in 0..q {
                            let ms = mu * s[i];
                            a1[i] += ms;
                            for j in i..q {
                                a2[i * q + j] += ms * s[j];
                            }
                        }
                    }
                }
            }
            acc.loglik -= a0;
            let event_stats = b.event.map(|j| &b.stats[j * q..(j + 1) * q]);
            if let Some(s) = event_stats {
                let lin: f64 = ts.iter().zip(s).map(|(x, y)| x * y).sum();
                acc.loglik += base + lin;
            }
            if !with_hess {
                continue;
            }
            let y = event_stats.is_some() as u8 as f64;
            let u = &b.baseline;
            for i in 0..nb {
                acc.grad[i] += u[i] * (y - a0);
                for j in i..nb {
                    acc.hess[i * dim + j] += a0 * u[i] * u[j];
                }
                for (j, a) in a1.iter().enumerate() {
                    acc.hess[i * dim + nb + j] += u[i] * a;
                }
            }
            for i in 0..q {
                acc.grad[nb + i] += event_stats.map_or(0.0, |s| s[i]) - a1[i];
                for j in i..q {
                    acc.hess[(nb + i) * dim + nb + j] += a2[i * q + j];
                }
            }
        }
        acc
    }

    fn partial(&self, theta: &[f64], with_hess: bool) -> Partial {
        // Fixed chunking and ordered reduction keep results independent of the thread count.
        let parts: Vec<Partial> = self
            .blocks
            .par_chunks(CHUNK)
            .map(|c| self.accumulate(c, theta, with_hess))
            .collect();
        let mut total = Partial::zeros(self.dim(), with_hess);
        for p in &parts {
            total.add(p);
        }
        total
    }

    pub fn loglik(&self, theta: &[f64]) -> f64 {
        self.partial(theta, false).loglik
    }

    pub fn evaluate(&self, theta: &[f64]) -> Evaluation {
        let dim = self.dim();
        let p = self.partial(theta, true);
        let info = DMatrix::from_fn(dim, dim, |i, j| {
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            p.hess[lo * dim + hi]
        });
        Evaluation {
            loglik: p.loglik,
            score: DVector::from_vec(p.grad),
            information: info,
        }
    }
}

/// Smoothing-parameter choice.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum GammaChoice {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for GammaChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GammaChoice::Auto => s.serialize_str("auto"),
            GammaChoice::Fixed(g) => s.serialize_f64(*g),
        }
    }
}

impl<'de> Deserialize<'de> for GammaChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(g) if g >= 0.0 && g.is_finite() => Ok(GammaChoice::Fixed(g)),
            Raw::Num(g) => Err(serde::de::Error::custom(format!("gamma must be >= 0, got {g}"))),
            Raw::Text(t) if t == "auto" => Ok(GammaChoice::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "gamma must be \"auto\" or a number, got `{t}`"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    pub max_irls_iter: usize,
    /// Relative change in penalized deviance at convergence.
    pub tol: f64,
    pub gamma: GammaChoice,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_irls_iter: 50,
            tol: 1e-8,
            gamma: GammaChoice::Auto,
        }
    }
}

/// Returned when no smoothing parameter is needed.
pub const DEFAULT_GAMMA: f64 = 1.0;
/// log10 range and size of the smoothing-parameter grid.
pub const GAMMA_GRID: (f64, f64, usize) = (-4.0, 6.0, 21);
const SCORE_TOL: f64 = 1e-8;
const DIVERGED: f64 = 25.0;

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub theta_hat: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub gamma: f64,
    pub penalized_loglik: f64,
    pub loglik: f64,
    pub iterations: usize,
    /// `tr((XᵀWX + γS̃)⁻¹ XᵀWX)`
    pub edf: f64,
    /// `ln |XᵀWX + γS̃|`
    pub log_det_hessian: f64,
}

impl FitResult {
    pub fn dim(&self) -> usize {
        self.theta_hat.len()
    }
}

pub fn penalized_loglik(data: &PoissonDataset, penalty: &ExtendedPenalty, gamma: f64, theta: &[f64]) -> f64 {
    let t = DVector::from_column_slice(theta);
    data.loglik(theta) - 0.5 * gamma * (t.transpose() * &penalty.matrix * &t)[(0, 0)]
}

pub fn penalized_score(
    data: &PoissonDataset,
    penalty: &ExtendedPenalty,
    gamma: f64,
    theta: &[f64],
) -> DVector<f64> {
    let t = DVector::from_column_slice(theta);
    data.evaluate(theta).score - gamma * (&penalty.matrix * t)
}

/// `XᵀWX` with `W = diag(μ)` at `theta`.
pub fn fisher_information(data: &PoissonDataset, theta: &[f64]) -> DMatrix<f64> {
    data.evaluate(theta).information
}

/// Columns whose pivots vanish in a Cholesky sweep of the scaled matrix.
fn deficient_columns(h: &DMatrix<f64>) -> Vec<usize> {
    let n = h.nrows();
    let scale: Vec<f64> = (0..n).map(|i| h[(i, i)].abs().sqrt()).collect();
    let mut l = DMatrix::<f64>::zeros(n, n);
    let mut bad = Vec::new();
    for j in 0..n {
        if scale[j] == 0.0 {
            bad.push(j);
            continue;
        }
        let mut d = 1.0;
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 1e-10 {
            bad.push(j);
            continue;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            if scale[i] == 0.0 {
                continue;
            }
            let mut s = h[(i, j)] / (scale[i] * scale[j]);
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    bad
}

fn initial_theta(data: &PoissonDataset) -> DVector<f64> {
    let mut t = DVector::zeros(data.dim());
    t[0] = (data.total_response() as f64 / data.total_exposure()).ln();
    t
}

/// Penalized maximum likelihood at a fixed smoothing parameter (Newton steps
/// on the penalized log-likelihood, i.e. IRLS with step halving).
pub fn fit_fixed_gamma(
    data: &PoissonDataset,
    penalty: &ExtendedPenalty,
    gamma: f64,
    opts: &FitOptions,
    start: Option<&DVector<f64>>,
) -> Result<FitResult> {
    if data.blocks.is_empty() || data.n_dyads == 0 {
        return Err(Error::NoEvents);
    }
    if data.total_response() == 0 {
        return Err(Error::NoEvents);
    }
    let s = &penalty.matrix;
    let pen_of = |t: &DVector<f64>| 0.5 * gamma * (t.transpose() * s * t)[(0, 0)];

    let mut theta = match start {
        Some(t) if t.len() == data.dim() && t.iter().all(|v| v.is_finite()) => t.clone(),
        _ => initial_theta(data),
    };
    let mut ev = data.evaluate(theta.as_slice());
    if !ev.loglik.is_finite() {
        theta = initial_theta(data);
        ev = data.evaluate(theta.as_slice());
    }
    let mut obj = ev.loglik - pen_of(&theta);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_irls_iter {
        iterations += 1;
        let h = &ev.information + s * gamma;
        let g = &ev.score - (s * &theta) * gamma;
        let Some(chol) = h.clone().cholesky() else {
            let bad = deficient_columns(&h);
            return Err(Error::RankDeficient(
                bad.into_iter().map(|j| data.names[j].clone()).collect(),
            ));
        };
        let delta = chol.solve(&g);

        let mut step = 1.0;
        let mut cand;
        let mut cand_obj;
        loop {
            cand = &theta + &delta * step;
            cand_obj = data.loglik(cand.as_slice()) - pen_of(&cand);
            if cand_obj.is_finite() && cand_obj >= obj - 1e-12 * (1.0 + obj.abs()) {
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
        let stalled = !(cand_obj.is_finite() && cand_obj >= obj - 1e-12 * (1.0 + obj.abs()));
        if stalled {
            converged = delta.amax() < 1e-9;
            break;
        }
        theta = cand;
        ev = data.evaluate(theta.as_slice());
        let new_obj = ev.loglik - pen_of(&theta);
        let change = ((new_obj - obj) * 2.0).abs() / (2.0 * new_obj.abs() + 0.1);
        obj = new_obj;
        let score = &ev.score - (s * &theta) * gamma;
        // γS̃ϑ cannot be resolved below its own rounding error
        let floor = SCORE_TOL.max(1e-14 * gamma * s.amax() * (1.0 + theta.amax()));
        if change < opts.tol && score.amax() < floor {
            converged = true;
            break;
        }
    }

    let diverging: Vec<String> = theta
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > DIVERGED)
        .map(|(j, _)| data.names[j].clone())
        .collect();
    if !converged {
        if !diverging.is_empty() {
            return Err(Error::Separation(diverging));
        }
        return Err(Error::NotConverged(iterations));
    }

    let h = &ev.information + s * gamma;
    let chol = h.clone().cholesky().ok_or_else(|| {
        Error::RankDeficient(
            deficient_columns(&h)
                .into_iter()
                .map(|j| data.names[j].clone())
                .collect(),
        )
    })?;
    let covariance = chol.inverse();
    let log_det_hessian = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let edf = (&covariance * &ev.information).trace();
    Ok(FitResult {
        theta_hat: theta,
        covariance,
        gamma,
        penalized_loglik: obj,
        loglik: ev.loglik,
        iterations,
        edf,
        log_det_hessian,
    })
}

/// Laplace approximation to the log marginal likelihood of the data given γ,
/// up to a γ-free constant:
/// `ℓ(ϑ̂) - (γ/2)ϑ̂ᵀS̃ϑ̂ + (r/2) ln γ - ½ ln|XᵀWX + γS̃|`.
pub fn laplace_marginal(fit: &FitResult, penalty: &ExtendedPenalty) -> f64 {
    let r = penalty.rank as f64;
    let log_gamma = if penalty.rank > 0 { fit.gamma.ln() } else { 0.0 };
    fit.penalized_loglik + 0.5 * r * log_gamma - 0.5 * fit.log_det_hessian
}

#[derive(Clone, Debug)]
pub struct GammaSelection {
    pub gamma: f64,
    pub fit: FitResult,
    /// `(γ, Laplace marginal)` at each grid point; failed fits show `-inf`.
    pub grid: Vec<(f64, f64)>,
}

pub fn gamma_grid() -> Vec<f64> {
    let (lo, hi, n) = GAMMA_GRID;
    (0..n)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Maximizes the Laplace marginal likelihood over a log-spaced grid, then
/// refines an interior maximum by golden-section search in `log10 γ` between
/// the neighbouring grid points.
pub fn select_gamma(
    data: &PoissonDataset,
    penalty: &ExtendedPenalty,
    opts: &FitOptions,
) -> Result<GammaSelection> {
    select_gamma_from(data, penalty, opts, None)
}

pub(crate) fn select_gamma_from(
    data: &PoissonDataset,
    penalty: &ExtendedPenalty,
    opts: &FitOptions,
    start: Option<&DVector<f64>>,
) -> Result<GammaSelection> {
    if penalty.rank == 0 {
        let fit = fit_fixed_gamma(data, penalty, DEFAULT_GAMMA, opts, start)?;
        return Ok(GammaSelection {
            gamma: DEFAULT_GAMMA,
            fit,
            grid: Vec::new(),
        });
    }
    let grid = gamma_grid();
    let mut fits: Vec<Option<FitResult>> = vec![None; grid.len()];
    let mut scores = vec![f64::NEG_INFINITY; grid.len()];
    let mut warm = start.cloned();
    let mut last_err = None;
    // heavy smoothing first: its fit is the best-conditioned warm start
    for i in (0..grid.len()).rev() {
        match fit_fixed_gamma(data, penalty, grid[i], opts, warm.as_ref()) {
            Ok(f) => {
                scores[i] = laplace_marginal(&f, penalty);
                warm = Some(f.theta_hat.clone());
                fits[i] = Some(f);
            }
            Err(e) => last_err = Some(e),
        }
    }
    let Some(best) = (0..grid.len())
        .filter(|&i| scores[i].is_finite())
        .max_by(|&a, &b| scores[a].total_cmp(&scores[b]))
    else {
        return Err(last_err.unwrap_or(Error::NotConverged(0)));
    };
    let table: Vec<(f64, f64)> = grid.iter().copied().zip(scores.iter().copied()).collect();
    let mut best_fit = fits[best].take().expect("finite score has a fit");
    let mut best_score = scores[best];

    if best > 0 && best + 1 < grid.len() {
        let (mut lo, mut hi) = (grid[best - 1].log10(), grid[best + 1].log10());
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let warm = best_fit.theta_hat.clone();
        let eval = |lg: f64| -> Option<FitResult> {
            fit_fixed_gamma(data, penalty, 10f64.powf(lg), opts, Some(&warm)).ok()
        };
        let score = |f: &Option<FitResult>| {
            f.as_ref()
                .map_or(f64::NEG_INFINITY, |f| laplace_marginal(f, penalty))
        };
        let mut x1 = hi - ratio * (hi - lo);
        let mut x2 = lo + ratio * (hi - lo);
        let mut f1 = eval(x1);
        let mut f2 = eval(x2);
        while hi - lo > 0.02 {
            if score(&f1) >= score(&f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - ratio * (hi - lo);
                f1 = eval(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + ratio * (hi - lo);
                f2 = eval(x2);
            }
        }
        for f in [f1, f2].into_iter().flatten() {
            let sc = laplace_marginal(&f, penalty);
            if sc > best_score {
                best_score = sc;
                best_fit = f;
            }
        }
    } else if scores.iter().filter(|s| s.is_finite()).count() < grid.len() {
        log::warn!("smoothing-parameter search fell back to grid point {}", grid[best]);
    }
    Ok(GammaSelection {
        gamma: best_fit.gamma,
        fit: best_fit,
        grid: table,
    })
}

/// Penalized fit with the configured smoothing parameter.
pub fn fit_penalized_poisson(
    data: &PoissonDataset,
    penalty: &ExtendedPenalty,
    opts: &FitOptions,
) -> Result<FitResult> {
    fit_with_start(data, penalty, opts, None)
}

pub(crate) fn fit_with_start(
    data: &PoissonDataset,
    penalty: &ExtendedPenalty,
    opts: &FitOptions,
    start: Option<&DVector<f64>>,
) -> Result<FitResult> {
    match opts.gamma {
        GammaChoice::Fixed(g) => fit_fixed_gamma(data, penalty, g, opts, start),
        GammaChoice::Auto => Ok(select_gamma_from(data, penalty, opts, start)?.fit),
    }
}

/// Closed-form constant-rate fit: `log(count / exposure)` with variance
/// `1 / count`. A zero count uses a half-event continuity correction.
pub fn fit_intercept_only(data: &PoissonDataset) -> FitResult {
    let count = data.total_response() as f64;
    let exposure = data.total_exposure();
    let eff = if count > 0.0 { count } else { 0.5 };
    let alpha = (eff / exposure).ln();
    let loglik = count * alpha + data.blocks.iter().filter(|b| b.event.is_some()).map(|b| b.exposure.ln()).sum::<f64>() - eff;
    FitResult {
        theta_hat: DVector::from_element(1, alpha),
        covariance: DMatrix::from_element(1, 1, 1.0 / eff),
        gamma: DEFAULT_GAMMA,
        penalized_loglik: loglik,
        loglik,
        iterations: 0,
        edf: 1.0,
        log_det_hessian: eff.ln(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{ActorTable, Dyad, Event, Label};
    use crate::model::ModelSpec;
    use crate::netstats::{StatKind, StatisticSpec};
    use approx::assert_abs_diff_eq;

    fn stream(pairs: &[(usize, usize, f64)], n: usize) -> EventStream {
        let events = pairs
            .iter()
            .map(|&(a, b, t)| Event {
                dyad: Dyad::new(a, b).unwrap(),
                time: t,
                label: Label::Unknown,
            })
            .collect();
        let h = pairs.last().map_or(1.0, |p| p.2);
        EventStream::new(events, h, ActorTable::new((0..n).map(|i| format!("{i}")))).unwrap()
    }

    #[test]
    fn rows_and_responses() {
        let s = stream(&[(0, 1, 1.0), (2, 3, 2.0), (0, 4, 3.5)], 5);
        let rs = RiskSet::all_pairs(5);
        let m = ComponentModel::new(ModelSpec::intercept_only(), s.horizon()).unwrap();
        let d = build_dataset(&s, &[true, false, true], Component::True, &m, &rs).unwrap();
        assert_eq!(d.n_rows(), 30);
        assert_eq!(d.total_response(), 2);
        let none = build_dataset(&s, &[false; 3], Component::True, &m, &rs).unwrap();
        assert_eq!(none.total_response(), 0);
        let (_, y, _) = none.to_dense();
        assert_eq!(y.sum(), 0.0);
        let spur = build_dataset(&s, &[true, false, true], Component::Spurious, &m, &rs).unwrap();
        assert_eq!(spur.total_response(), 1);
        assert!(build_dataset(&s, &[true], Component::True, &m, &rs).is_err());
    }

    #[test]
    fn history_is_strictly_before_each_event() {
        let s = stream(&[(0, 1, 1.0), (0, 1, 2.0)], 2);
        let rs = RiskSet::all_pairs(2);
        let spec = ModelSpec {
            statistics: vec![StatisticSpec::endogenous(StatKind::RepetitionCount)],
            spline: None,
        };
        let m = ComponentModel::new(spec, s.horizon()).unwrap();
        let d = build_dataset(&s, &[true, true], Component::True, &m, &rs).unwrap();
        assert_eq!(d.blocks()[0].stats, vec![0.0]);
        assert_eq!(d.blocks()[1].stats, vec![1.0]);
    }

    #[test]
    fn intercept_only_closed_form() {
        // 10 events among 5 dyads... exposure Σδ·|ℛ| = 10 · 10 = 100
        let pairs: Vec<(usize, usize, f64)> = (1..=10).map(|i| (i % 2, 2 + i % 3, i as f64)).collect();
        let s = stream(&pairs, 5);
        let rs = RiskSet::all_pairs(5);
        let m = ComponentModel::new(ModelSpec::intercept_only(), s.horizon()).unwrap();
        let d = build_dataset(&s, &[true; 10], Component::True, &m, &rs).unwrap();
        assert_abs_diff_eq!(d.total_exposure(), 100.0);
        let fit = fit_penalized_poisson(&d, m.penalty(), &FitOptions::default()).unwrap();
        assert_abs_diff_eq!(fit.theta_hat[0], 0.1f64.ln(), epsilon = 1e-8);
        let closed = fit_intercept_only(&d);
        assert_abs_diff_eq!(closed.theta_hat[0], fit.theta_hat[0], epsilon = 1e-8);
        assert_abs_diff_eq!(closed.covariance[(0, 0)], 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.covariance[(0, 0)], 0.1, epsilon = 1e-8);
    }

    #[test]
    fn empty_component_errors() {
        let s = stream(&[(0, 1, 1.0)], 3);
        let rs = RiskSet::all_pairs(3);
        let m = ComponentModel::new(ModelSpec::intercept_only(), 1.0).unwrap();
        let d = build_dataset(&s, &[false], Component::True, &m, &rs).unwrap();
        assert!(matches!(
            fit_penalized_poisson(&d, m.penalty(), &FitOptions::default()),
            Err(Error::NoEvents)
        ));
        let c = fit_intercept_only(&d);
        assert_abs_diff_eq!(c.covariance[(0, 0)], 2.0);
    }

    #[test]
    fn zero_column_is_rank_deficient() {
        // triangles never form with only two actors
        let s = stream(&[(0, 1, 1.0), (0, 1, 2.0), (0, 1, 3.0)], 2);
        let rs = RiskSet::all_pairs(2);
        let spec = ModelSpec {
            statistics: vec![StatisticSpec::endogenous(StatKind::Triangle)],
            spline: None,
        };
        let m = ComponentModel::new(spec, s.horizon()).unwrap();
        let d = build_dataset(&s, &[true; 3], Component::True, &m, &rs).unwrap();
        match fit_penalized_poisson(&d, m.penalty(), &FitOptions::default()) {
            Err(Error::RankDeficient(cols)) => assert_eq!(cols, vec!["triangle".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gamma_serde() {
        let o: FitOptions = serde_json::from_str(r#"{"gamma":"auto"}"#).unwrap();
        assert_eq!(o.gamma, GammaChoice::Auto);
        let o: FitOptions = serde_json::from_str(r#"{"gamma":12.5,"tol":1e-9}"#).unwrap();
        assert_eq!(o.gamma, GammaChoice::Fixed(12.5));
        assert_eq!(o.max_irls_iter, 50);
        assert!(serde_json::from_str::<FitOptions>(r#"{"gamma":"big"}"#).is_err());
        assert!(serde_json::from_str::<FitOptions>(r#"{"gamma":-1}"#).is_err());
        assert!(serde_json::from_str::<FitOptions>(r#"{"gama":1}"#).is_err());
    }

    #[test]
    fn grid_matches_configuration() {
        let g = gamma_grid();
        assert_eq!(g.len(), 21);
        assert_abs_diff_eq!(g[0], 1e-4, epsilon = 1e-18);
        assert_abs_diff_eq!(g[20], 1e6, epsilon = 1e-6);
    }
}
