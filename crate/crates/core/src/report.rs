//! Multiple-imputation summaries of sampler output.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::augment::{AugmentModel, PosteriorDraw};
use crate::error::{Error, Result};
use crate::model::ComponentModel;
use crate::ppois::{Component, FitResult};

pub const Z95: f64 = 1.96;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSummary {
    pub component: Component,
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    /// `mean / sd`
    pub z: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// `"REMSE"` with a spurious component, `"REM"` without.
    pub model: String,
    pub coefficients: Vec<CoefficientSummary>,
    pub posterior_mean: Vec<f64>,
    /// Within-draw plus inflated between-draw covariance.
    pub posterior_cov: Vec<Vec<f64>>,
    /// Mean percentage of events imputed as spurious.
    pub pfe_estimate: f64,
    pub draws_used: usize,
    pub burn_in: usize,
    pub failed_psteps: usize,
    /// Mean selected smoothing parameter of the true component.
    pub gamma_true: f64,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl FitReport {
    pub fn mean(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.posterior_mean)
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.posterior_mean.len();
        DMatrix::from_fn(n, n, |i, j| self.posterior_cov[i][j])
    }

    pub fn coefficient(&self, component: Component, name: &str) -> Option<&CoefficientSummary> {
        self.coefficients
            .iter()
            .find(|c| c.component == component && c.name == name)
    }

    pub fn true_coefficients(&self) -> impl Iterator<Item = &CoefficientSummary> {
        self.coefficients
            .iter()
            .filter(|c| c.component == Component::True)
    }

    fn build(
        names: Vec<(Component, String)>,
        mean: DVector<f64>,
        cov: DMatrix<f64>,
        has_spurious: bool,
    ) -> Self {
        let coefficients = names
            .into_iter()
            .enumerate()
            .map(|(i, (component, name))| {
                let sd = cov[(i, i)].max(0.0).sqrt();
                CoefficientSummary {
                    component,
                    name,
                    mean: mean[i],
                    sd,
                    z: mean[i] / sd,
                    ci_low: mean[i] - Z95 * sd,
                    ci_high: mean[i] + Z95 * sd,
                }
            })
            .collect();
        FitReport {
            model: if has_spurious { "REMSE" } else { "REM" }.into(),
            coefficients,
            posterior_mean: mean.as_slice().to_vec(),
            posterior_cov: matrix_rows(&cov),
            pfe_estimate: 0.0,
            draws_used: 0,
            burn_in: 0,
            failed_psteps: 0,
            gamma_true: 0.0,
        }
    }
}

/// Rubin's rules on posterior means and covariances. Returns `(ϑ̄, V̄ + B̄)`
/// with `B̄ = (K+1)/(K(K-1)) Σ (ϑ̂ₖ - ϑ̄)(ϑ̂ₖ - ϑ̄)ᵀ`.
pub fn mi_combine(means: &[DVector<f64>], covs: &[DMatrix<f64>]) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let k = means.len();
    if k < 2 {
        return Err(Error::TooFewDraws(k));
    }
    if covs.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            got: covs.len(),
        });
    }
    let kf = k as f64;
    let dim = means[0].len();
    let mut mean = DVector::zeros(dim);
    for m in means {
        mean += m;
    }
    mean /= kf;
    let mut within = DMatrix::zeros(dim, dim);
    for v in covs {
        within += v;
    }
    within /= kf;
    let mut between = DMatrix::zeros(dim, dim);
    for m in means {
        let d = m - &mean;
        between += &d * d.transpose();
    }
    between *= (kf + 1.0) / (kf * (kf - 1.0));
    Ok((mean, within + between))
}

/// Combines retained draws into a report.
pub fn combine(model: &AugmentModel, draws: &[PosteriorDraw]) -> Result<FitReport> {
    let means: Vec<_> = draws.iter().map(PosteriorDraw::mean).collect();
    let covs: Vec<_> = draws.iter().map(PosteriorDraw::covariance).collect();
    let (mean, cov) = mi_combine(&means, &covs)?;
    let mut r = FitReport::build(model.names(), mean, cov, model.has_spurious());
    let k = draws.len() as f64;
    r.pfe_estimate = draws.iter().map(|d| d.labels.pfe()).sum::<f64>() / k;
    r.gamma_true = draws.iter().map(|d| d.true_fit.gamma).sum::<f64>() / k;
    r.draws_used = draws.len();
    Ok(r)
}

/// Report of a single fit with every event taken as true.
pub fn plain_report(model: &ComponentModel, fit: &FitResult) -> FitReport {
    let names = model
        .names()
        .iter()
        .map(|n| (Component::True, n.clone()))
        .collect();
    let mut r = FitReport::build(names, fit.theta_hat.clone(), fit.covariance.clone(), false);
    r.draws_used = 1;
    r.gamma_true = fit.gamma;
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BaselinePoint {
    pub t: f64,
    /// `exp(β₀ + B̃(t)ᵀβ)`
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Baseline intensity of the true component on an equidistant grid with
/// pointwise 95% bands from the intercept/spline covariance block.
pub fn baseline_curve(report: &FitReport, model: &ComponentModel, points: usize) -> Result<Vec<BaselinePoint>> {
    let nb = model.n_baseline();
    let mean = report.mean();
    let cov = report.covariance();
    let beta = mean.rows(0, nb);
    let v = cov.view((0, 0), (nb, nb));
    let h = model.basis().map_or(1.0, |b| b.horizon());
    let points = points.max(2);
    (0..points)
        .map(|i| {
            let t = (h * i as f64 / (points - 1) as f64).min(h);
            let u = DVector::from_vec(model.baseline_row(t)?);
            let f = u.dot(&beta);
            let se = (u.transpose() * v * &u)[(0, 0)].max(0.0).sqrt();
            Ok(BaselinePoint {
                t,
                estimate: f.exp(),
                lower: (f - Z95 * se).exp(),
                upper: (f + Z95 * se).exp(),
            })
        })
        .collect()
}

/// Plain-text table of coefficients, intervals and Z values plus the PFE row.
/// Spline coefficients are summarized by the selected smoothing parameter.
pub fn summary_table(report: &FitReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", report.model);
    let _ = writeln!(
        s,
        "{:<10} {:<26} {:>10} {:>24} {:>9}",
        "component", "coefficient", "estimate", "95% CI", "Z"
    );
    for c in &report.coefficients {
        if c.name.starts_with("s(t)") {
            continue;
        }
        let comp = match c.component {
            Component::True => "true",
            Component::Spurious => "spurious",
        };
        let ci = format!("[{:.3}, {:.3}]", c.ci_low, c.ci_high);
        let _ = writeln!(
            s,
            "{:<10} {:<26} {:>10.3} {:>24} {:>9.3}",
            comp, c.name, c.mean, ci, c.z
        );
    }
    let n_spline = report.coefficients.iter().filter(|c| c.name.starts_with("s(t)")).count();
    if n_spline > 0 {
        let _ = writeln!(s, "baseline: {n_spline} spline coefficients, gamma = {:.4e}", report.gamma_true);
    }
    let _ = writeln!(s, "PFE (%)    {:.4}", report.pfe_estimate);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_draw_scalar_case() {
        let means = [DVector::from_element(1, 0.0), DVector::from_element(1, 2.0)];
        let covs = [DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, 1.0)];
        let (m, v) = mi_combine(&means, &covs).unwrap();
        assert_eq!(m[0], 1.0);
        assert_eq!(v[(0, 0)], 4.0);
    }

    #[test]
    fn identical_draws_have_no_between_term() {
        let m = DVector::from_vec(vec![0.3, -1.2]);
        let v = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.2]);
        let (mean, cov) = mi_combine(&[m.clone(), m.clone(), m.clone()], &[v.clone(), v.clone(), v.clone()]).unwrap();
        assert_eq!(mean, m);
        assert!((cov - v).amax() < 1e-15);
    }

    #[test]
    fn single_draw_rejected() {
        let m = DVector::from_element(1, 0.0);
        let v = DMatrix::from_element(1, 1, 1.0);
        assert!(matches!(mi_combine(&[m], &[v]), Err(Error::TooFewDraws(1))));
    }

    #[test]
    fn intervals_and_z() {
        let r = FitReport::build(
            vec![(Component::True, "x".into())],
            DVector::from_element(1, 2.0),
            DMatrix::from_element(1, 1, 0.25),
            false,
        );
        let c = &r.coefficients[0];
        assert_eq!(c.sd, 0.5);
        assert_eq!(c.z, 4.0);
        assert!((c.ci_low - (2.0 - 0.98)).abs() < 1e-15);
        assert!((c.ci_high - (2.0 + 0.98)).abs() < 1e-15);
        assert_eq!(r.model, "REM");
    }
}
