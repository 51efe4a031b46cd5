//! Declarative intensity specifications and their compiled design layout.
//!
//! A component intensity is `exp{β₀ + B̃(t)ᵀβ + θᵀs_ab(ℋ(t⁻))}`: a global
//! intercept, an optional sum-to-zero constrained spline baseline, and a list
//! of network statistics. Coefficient vectors follow that column order.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netstats::StatisticSpec;
use crate::smooth::{build_basis, build_penalty, SplineBasis, SplineConfig};

pub const INTERCEPT: &str = "(Intercept)";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub statistics: Vec<StatisticSpec>,
    /// Spline baseline; `None` means a constant baseline (intercept only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spline: Option<SplineConfig>,
}

impl ModelSpec {
    pub fn intercept_only() -> Self {
        ModelSpec::default()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for s in &self.statistics {
            s.validate()?;
            if !seen.insert(s) {
                return Err(Error::Config(format!("statistic `{s}` listed twice")));
            }
        }
        if let Some(sp) = &self.spline {
            if sp.num_basis < sp.degree + 1 {
                return Err(Error::Config(format!(
                    "spline.K = {} is below degree + 1 = {}",
                    sp.num_basis,
                    sp.degree + 1
                )));
            }
            if sp.penalty_order >= sp.num_basis {
                return Err(Error::PenaltyOrder {
                    order: sp.penalty_order,
                    k: sp.num_basis,
                });
            }
        }
        Ok(())
    }
}

/// Rejects a spurious-event specification that reuses any statistic of the
/// true-event specification; such a pair is not identifiable.
pub fn check_identifiable(true_model: &ModelSpec, spurious: &ModelSpec) -> Result<()> {
    let shared: Vec<String> = spurious
        .statistics
        .iter()
        .filter(|s| true_model.statistics.contains(s))
        .map(ToString::to_string)
        .collect();
    if shared.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "spurious-event model shares statistics with the true-event model: {}",
            shared.join(", ")
        )))
    }
}

/// Block-extended penalty `S̃` over the full coefficient vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedPenalty {
    pub matrix: DMatrix<f64>,
    pub rank: usize,
}

impl ExtendedPenalty {
    pub fn none(dim: usize) -> Self {
        ExtendedPenalty {
            matrix: DMatrix::zeros(dim, dim),
            rank: 0,
        }
    }
}

/// A [`ModelSpec`] bound to an observation window.
#[derive(Clone, Debug)]
pub struct ComponentModel {
    spec: ModelSpec,
    basis: Option<SplineBasis>,
    penalty: ExtendedPenalty,
    names: Vec<String>,
}

impl ComponentModel {
    pub fn new(spec: ModelSpec, horizon: f64) -> Result<Self> {
        spec.validate()?;
        let basis = match &spec.spline {
            Some(sp) => Some(build_basis(horizon, sp.num_basis, sp.degree)?),
            None => None,
        };
        let n_spline = basis.as_ref().map_or(0, |b| b.num_basis() - 1);
        let dim = 1 + n_spline + spec.statistics.len();

        let penalty = match (&basis, &spec.spline) {
            (Some(b), Some(sp)) => {
                let s = build_penalty(sp.num_basis, sp.penalty_order)?.constrained(b);
                let mut full = DMatrix::zeros(dim, dim);
                full.view_mut((1, 1), (n_spline, n_spline)).copy_from(&s);
                let eig = s.symmetric_eigen();
                let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
                let rank = eig
                    .eigenvalues
                    .iter()
                    .filter(|&&e| e > 1e-9 * top.max(1e-300))
                    .count();
                ExtendedPenalty { matrix: full, rank }
            }
            _ => ExtendedPenalty::none(dim),
        };

        let mut names = vec![INTERCEPT.to_string()];
        names.extend((1..=n_spline).map(|k| format!("s(t).{k}")));
        names.extend(spec.statistics.iter().map(ToString::to_string));
        Ok(ComponentModel {
            spec,
            basis,
            penalty,
            names,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn statistics(&self) -> &[StatisticSpec] {
        &self.spec.statistics
    }

    pub fn basis(&self) -> Option<&SplineBasis> {
        self.basis.as_ref()
    }

    pub fn penalty(&self) -> &ExtendedPenalty {
        &self.penalty
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Intercept plus spline columns.
    pub fn n_baseline(&self) -> usize {
        1 + self.basis.as_ref().map_or(0, |b| b.num_basis() - 1)
    }

    pub fn n_stats(&self) -> usize {
        self.spec.statistics.len()
    }

    pub fn is_intercept_only(&self) -> bool {
        self.dim() == 1
    }

    /// Baseline design `[1, B̃(t)]`.
    pub fn baseline_row(&self, t: f64) -> Result<Vec<f64>> {
        let mut row = vec![1.0];
        if let Some(b) = &self.basis {
            row.extend(b.eval_constrained(t)?);
        }
        Ok(row)
    }

    /// Log-intensity for given baseline row and statistic row.
    pub fn linear_predictor(&self, theta: &[f64], baseline: &[f64], stats: &[f64]) -> f64 {
        let nb = baseline.len();
        let base: f64 = theta[..nb].iter().zip(baseline).map(|(a, b)| a * b).sum();
        let slope: f64 = theta[nb..].iter().zip(stats).map(|(a, b)| a * b).sum();
        base + slope
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netstats::{reference_statistics, StatKind};

    #[test]
    fn layout_and_names() {
        let spec = ModelSpec {
            statistics: reference_statistics("cont", "cat"),
            spline: Some(SplineConfig::default()),
        };
        let m = ComponentModel::new(spec, 10.0).unwrap();
        assert_eq!(m.dim(), 1 + 9 + 5);
        assert_eq!(m.n_baseline(), 10);
        assert_eq!(m.names()[0], INTERCEPT);
        assert_eq!(m.names()[10], "degree_abs");
        assert_eq!(m.names()[13], "sum_cont(cont)");
        assert_eq!(m.penalty().rank, 8);
        assert_eq!(m.baseline_row(3.0).unwrap().len(), 10);
    }

    #[test]
    fn intercept_only_has_no_penalty() {
        let m = ComponentModel::new(ModelSpec::intercept_only(), 1.0).unwrap();
        assert!(m.is_intercept_only());
        assert_eq!(m.penalty().rank, 0);
    }

    #[test]
    fn overlapping_components_rejected() {
        let t = ModelSpec {
            statistics: reference_statistics("cont", "cat"),
            spline: None,
        };
        let ok = ModelSpec {
            statistics: vec![StatisticSpec::covariate(StatKind::SimCont, "cont")],
            spline: None,
        };
        assert!(check_identifiable(&t, &ok).is_ok());
        let bad = ModelSpec {
            statistics: vec![StatisticSpec::endogenous(StatKind::Triangle)],
            spline: None,
        };
        assert!(check_identifiable(&t, &bad).is_err());
        assert!(check_identifiable(&t, &ModelSpec::intercept_only()).is_ok());
    }

    #[test]
    fn duplicate_statistics_rejected() {
        let spec = ModelSpec {
            statistics: vec![
                StatisticSpec::endogenous(StatKind::Triangle),
                StatisticSpec::endogenous(StatKind::Triangle),
            ],
            spline: None,
        };
        assert!(spec.validate().is_err());
    }
}
