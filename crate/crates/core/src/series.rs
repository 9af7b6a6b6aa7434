//! Shared domain types and risk evaluation.
//!
//! Windows handed to predictors are always ordered most-recent-first: the
//! residual for target `X_i` uses `(X_{i-1}, ..., X_{i-q})`.

use crate::basis::PredictorBasis;
use crate::error::{invalid, Error, Result};

/// An observed (or simulated) real-valued series with cached summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    b_emp: f64,
    var_emp: f64,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("time series must contain at least one value"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at position {i}")));
        }
        let n = values.len() as f64;
        let b_emp = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mean = values.iter().sum::<f64>() / n;
        let var_emp = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Ok(Self {
            values,
            b_emp,
            var_emp,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest absolute value, the empirical stand-in for the bound `B`.
    pub fn b_emp(&self) -> f64 {
        self.b_emp
    }

    /// Population variance (divisor `n`).
    pub fn var_emp(&self) -> f64 {
        self.var_emp
    }

    /// Split into `[0, at)` and `[at, n)`.
    pub fn split_at(&self, at: usize) -> Result<(TimeSeries, TimeSeries)> {
        if at == 0 || at >= self.len() {
            return Err(invalid(format!(
                "split point {at} must lie strictly inside 0..{}",
                self.len()
            )));
        }
        Ok((
            TimeSeries::new(self.values[..at].to_vec())?,
            TimeSeries::new(self.values[at..].to_vec())?,
        ))
    }

    /// Calls `f(window, target)` for every target index `i = q+1..n` (1-based),
    /// with the window ordered most-recent-first.
    pub fn for_each_window<F: FnMut(&[f64], f64)>(&self, q: usize, mut f: F) -> Result<()> {
        let n = self.len();
        if q == 0 {
            return Err(invalid("window length q must be at least 1"));
        }
        if n <= q {
            return Err(Error::SeriesTooShort { n, q });
        }
        let mut window = vec![0.0; q];
        for i in q..n {
            for (slot, v) in window.iter_mut().zip(self.values[i - q..i].iter().rev()) {
                *slot = *v;
            }
            f(&window, self.values[i]);
        }
        Ok(())
    }
}

/// A parameter vector stored by support set.
///
/// Support indices are 0-based (`j` addresses `g_{j+1}`), strictly increasing,
/// and carry nonzero coefficients only.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseParam {
    p: usize,
    support: Vec<usize>,
    coeffs: Vec<f64>,
    l1: f64,
}

impl SparseParam {
    pub fn zero(p: usize) -> Self {
        Self {
            p,
            support: Vec::new(),
            coeffs: Vec::new(),
            l1: 0.0,
        }
    }

    /// Builds from `(index, value)` pairs in any order. Zero values are dropped.
    pub fn from_pairs<I>(p: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut pairs: Vec<(usize, f64)> = pairs.into_iter().collect();
        pairs.sort_by_key(|&(j, _)| j);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(invalid(format!("duplicate support index {}", w[0].0)));
            }
        }
        let mut out = Self::zero(p);
        for (j, v) in pairs {
            if j >= p {
                return Err(invalid(format!("support index {j} out of range for p = {p}")));
            }
            if !v.is_finite() {
                return Err(invalid(format!("non-finite coefficient at index {j}")));
            }
            if v != 0.0 {
                out.support.push(j);
                out.coeffs.push(v);
                out.l1 += v.abs();
            }
        }
        Ok(out)
    }

    pub fn from_dense(values: &[f64]) -> Result<Self> {
        Self::from_pairs(values.len(), values.iter().copied().enumerate())
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn get(&self, j: usize) -> f64 {
        match self.support.binary_search(&j) {
            Ok(pos) => self.coeffs[pos],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.coeffs.iter().copied())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.p];
        for (j, v) in self.iter() {
            out[j] = v;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskReport {
    /// Mean squared one-step error.
    pub empirical_risk: f64,
    /// Number of residuals averaged, `n - q`.
    pub n_terms: usize,
}

/// Mean squared one-step error of an arbitrary window predictor over targets
/// `q+1..n`. Every risk in the crate, including baseline test errors, goes
/// through this function.
pub fn one_step_mse<F>(series: &TimeSeries, q: usize, mut predict: F) -> Result<RiskReport>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut sum = 0.0;
    let mut n_terms = 0usize;
    series.for_each_window(q, |window, target| {
        let resid = target - predict(window);
        sum += resid * resid;
        n_terms += 1;
    })?;
    Ok(RiskReport {
        empirical_risk: sum / n_terms as f64,
        n_terms,
    })
}

/// In-sample risk `r(θ) = (1/(n-q)) Σ_{i=q+1}^n [X_i - f_θ(X_{i-1}, ..., X_{i-q})]²`.
pub fn empirical_risk(
    series: &TimeSeries,
    basis: &PredictorBasis,
    theta: &SparseParam,
) -> Result<RiskReport> {
    if theta.p() != basis.p() {
        return Err(Error::DimensionMismatch {
            what: "parameter vs basis size",
            expected: basis.p(),
            found: theta.p(),
        });
    }
    let q = basis.q();
    if series.len() <= q {
        return Err(Error::SeriesTooShort { n: series.len(), q });
    }
    one_step_mse(series, q, |w| basis.predict_unchecked(theta, w))
}

/// Risk on a held-out segment; the Monte Carlo proxy for the prevision risk.
pub fn holdout_risk(
    theta: &SparseParam,
    basis: &PredictorBasis,
    test: &TimeSeries,
) -> Result<RiskReport> {
    empirical_risk(test, basis, theta)
}
