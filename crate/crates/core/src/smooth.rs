//! B-spline baselines with a difference penalty (P-splines).
//!
//! The log-baseline is `f(t) = B(t)ᵀα` on equidistant knots over `[0, horizon]`.
//! Identifiability against the global intercept comes from a reparametrization
//! `α = C β`, where the columns of `C` span the orthogonal complement of the
//! vector of basis means over a fixed evaluation grid.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of grid points used for the sum-to-zero constraint.
pub const CONSTRAINT_GRID: usize = 1001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplineConfig {
    #[serde(rename = "K")]
    pub num_basis: usize,
    pub degree: usize,
    pub penalty_order: usize,
}

impl Default for SplineConfig {
    fn default() -> Self {
        SplineConfig {
            num_basis: 10,
            degree: 3,
            penalty_order: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplineBasis {
    degree: usize,
    num_basis: usize,
    horizon: f64,
    knots: Vec<f64>,
    constraint: DMatrix<f64>,
}

/// Equidistant B-spline basis over `[0, horizon]` with `k` functions of the
/// given degree; boundary knots are repeated `degree + 1` times.
pub fn build_basis(horizon: f64, k: usize, degree: usize) -> Result<SplineBasis> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Spline(format!("horizon must be positive, got {horizon}")));
    }
    if k < degree + 1 {
        return Err(Error::Spline(format!(
            "need at least degree + 1 = {} basis functions, got {k}",
            degree + 1
        )));
    }
    let segments = k - degree;
    let mut knots = Vec::with_capacity(k + degree + 1);
    knots.extend(std::iter::repeat(0.0).take(degree + 1));
    for j in 1..segments {
        knots.push(horizon * j as f64 / segments as f64);
    }
    knots.extend(std::iter::repeat(horizon).take(degree + 1));

    let mut basis = SplineBasis {
        degree,
        num_basis: k,
        horizon,
        knots,
        constraint: DMatrix::zeros(k, k.saturating_sub(1)),
    };
    let mut means = DVector::zeros(k);
    for t in constraint_grid(horizon) {
        means += DVector::from_vec(basis.eval(t).expect("grid inside range"));
    }
    means /= CONSTRAINT_GRID as f64;
    basis.constraint = complement_basis(&means);
    Ok(basis)
}

/// Evaluation grid shared by the constraint and its checks.
pub fn constraint_grid(horizon: f64) -> impl Iterator<Item = f64> {
    // h·i/(n-1) can round one ulp past h
    (0..CONSTRAINT_GRID).map(move |i| (horizon * i as f64 / (CONSTRAINT_GRID - 1) as f64).min(horizon))
}

/// Orthonormal basis (k × (k-1)) of the complement of `v`, from a Householder reflector.
fn complement_basis(v: &DVector<f64>) -> DMatrix<f64> {
    let k = v.len();
    let norm = v.norm();
    let mut u = v.clone();
    // reflect v onto -sign(v0)·|v|·e1 for stability
    let alpha = if v[0] >= 0.0 { -norm } else { norm };
    u[0] -= alpha;
    let unorm2 = u.norm_squared();
    let mut h = DMatrix::identity(k, k);
    if unorm2 > 0.0 {
        h -= (&u * u.transpose()) * (2.0 / unorm2);
    }
    h.columns(1, k - 1).into_owned()
}

impl SplineBasis {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_basis(&self) -> usize {
        self.num_basis
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// `K × (K-1)` sum-to-zero reparametrization.
    pub fn constraint_transform(&self) -> &DMatrix<f64> {
        &self.constraint
    }

    /// Raw basis values at `t` (Cox–de Boor). At most `degree + 1` entries are
    /// nonzero and the entries sum to one.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.num_basis];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::OutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        let p = self.degree;
        let kn = &self.knots;
        // span index s with kn[s] <= t < kn[s+1]; the right end is closed.
        let s = if t >= self.horizon {
            self.num_basis - 1
        } else {
            let mut s = kn.partition_point(|&x| x <= t) - 1;
            s = s.clamp(p, self.num_basis - 1);
            s
        };
        let mut n = vec![0.0; p + 1];
        n[0] = 1.0;
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        for j in 1..=p {
            left[j] = t - kn[s + 1 - j];
            right[j] = kn[s + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                let temp = if denom > 0.0 { n[r] / denom } else { 0.0 };
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, v) in n.into_iter().enumerate() {
            out[s - p + r] = v;
        }
        Ok(())
    }

    /// Constrained basis row `B(t)ᵀC` of length `K - 1`.
    pub fn eval_constrained(&self, t: f64) -> Result<Vec<f64>> {
        let raw = DVector::from_vec(self.eval(t)?);
        Ok((self.constraint.transpose() * raw).as_slice().to_vec())
    }
}

pub fn eval_basis(basis: &SplineBasis, t: f64) -> Result<Vec<f64>> {
    basis.eval(t)
}

/// `Dᵀ D` for the `order`-th difference operator on `k` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyMatrix {
    pub order: usize,
    pub matrix: DMatrix<f64>,
}

pub fn difference_operator(k: usize, order: usize) -> Result<DMatrix<f64>> {
    if order >= k {
        return Err(Error::PenaltyOrder { order, k });
    }
    let mut d = DMatrix::identity(k, k);
    for _ in 0..order {
        let rows = d.nrows() - 1;
        let next = DMatrix::from_fn(rows, k, |i, j| d[(i + 1, j)] - d[(i, j)]);
        d = next;
    }
    Ok(d)
}

pub fn build_penalty(k: usize, order: usize) -> Result<PenaltyMatrix> {
    let d = difference_operator(k, order)?;
    Ok(PenaltyMatrix {
        order,
        matrix: d.transpose() * d,
    })
}

impl PenaltyMatrix {
    pub fn quadratic_form(&self, alpha: &[f64]) -> f64 {
        let a = DVector::from_column_slice(alpha);
        (a.transpose() * &self.matrix * a)[(0, 0)]
    }

    /// Penalty in constrained coordinates, `Cᵀ S C`.
    pub fn constrained(&self, basis: &SplineBasis) -> DMatrix<f64> {
        let c = basis.constraint_transform();
        c.transpose() * &self.matrix * c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn degree_zero_is_bin_indicators() {
        let b = build_basis(4.0, 4, 0).unwrap();
        assert_eq!(b.eval(2.5).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(b.eval(0.0).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(b.eval(1.0).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(b.eval(4.0).unwrap(), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn out_of_range_and_bad_configs() {
        let b = build_basis(2.0, 10, 3).unwrap();
        assert!(matches!(b.eval(-0.1), Err(Error::OutOfRange { .. })));
        assert!(matches!(b.eval(2.0001), Err(Error::OutOfRange { .. })));
        assert!(build_basis(0.0, 10, 3).is_err());
        assert!(build_basis(1.0, 3, 3).is_err());
        assert!(matches!(build_penalty(3, 3), Err(Error::PenaltyOrder { .. })));
    }

    #[test]
    fn partition_of_unity_and_support() {
        let b = build_basis(3.7, 10, 3).unwrap();
        for i in 0..=1000 {
            let t = 3.7 * i as f64 / 1000.0;
            let v = b.eval(t).unwrap();
            assert_abs_diff_eq!(v.iter().sum::<f64>(), 1.0, epsilon = 1e-10);
            assert!(v.iter().all(|&x| x >= 0.0));
            assert!(v.iter().filter(|&&x| x > 0.0).count() <= 4);
        }
    }

    #[test]
    fn first_order_penalty_matrix() {
        let s = build_penalty(3, 1).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[1., -1., 0., -1., 2., -1., 0., -1., 1.]);
        assert_eq!(s.matrix, expected);
    }

    #[test]
    fn constants_are_unpenalized() {
        for order in 1..4 {
            let s = build_penalty(8, order).unwrap();
            assert_abs_diff_eq!(s.quadratic_form(&[2.5; 8]), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn penalty_rank() {
        let s = build_penalty(10, 2).unwrap();
        let eig = s.matrix.clone().symmetric_eigen();
        let rank = eig.eigenvalues.iter().filter(|&&e| e > 1e-9).count();
        assert_eq!(rank, 8);
        assert!(eig.eigenvalues.iter().all(|&e| e > -1e-10));
    }

    #[test]
    fn constraint_columns_are_orthonormal() {
        let b = build_basis(5.0, 10, 3).unwrap();
        let c = b.constraint_transform();
        let gram = c.transpose() * c;
        assert_abs_diff_eq!(gram, DMatrix::identity(9, 9), epsilon = 1e-12);
    }

    #[test]
    fn grid_stays_inside_awkward_horizons() {
        for h in [105.23792787326875, 0.1 + 0.2, 7.0 / 3.0] {
            assert!(constraint_grid(h).all(|t| (0.0..=h).contains(&t)));
            assert!(build_basis(h, 8, 3).is_ok());
        }
    }
}
