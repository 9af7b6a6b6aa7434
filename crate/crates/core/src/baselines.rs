//! Classical AR comparators: per-order fits, AIC order selection and the full
//! AR(q) model.
//!
//! Two estimators are available. [`ols_ar_fit`] is conditional least squares
//! with an intercept over a fixed residual range `q_align+1..n`, so every order
//! is compared on identical targets. [`yule_walker_fit`] solves the
//! Yule–Walker equations on the demeaned series by Levinson–Durbin recursion,
//! with the AIC convention of R's `ar()`.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::series::{one_step_mse, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArMethod {
    LeastSquares,
    YuleWalker,
}

impl ArMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ArMethod::LeastSquares => "ols",
            ArMethod::YuleWalker => "yule_walker",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "ols" | "least_squares" => Some(ArMethod::LeastSquares),
            "yule_walker" | "yw" => Some(ArMethod::YuleWalker),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub order: usize,
    /// `a_1..a_order`, lag order.
    pub coeffs: Vec<f64>,
    pub intercept: f64,
    /// Residual sum of squares over targets `q_align+1..n`.
    pub rss: f64,
    pub n_eff: usize,
    pub method: ArMethod,
    /// Criterion value used for order selection.
    pub aic: f64,
}

impl ArFit {
    /// Mean squared one-step error of this fit on `series`, evaluated with a
    /// window of length `q` (which must be at least the order).
    pub fn holdout_risk(&self, series: &TimeSeries, q: usize) -> Result<f64> {
        if q < self.order {
            return Err(invalid(format!(
                "window {q} shorter than AR order {}",
                self.order
            )));
        }
        Ok(one_step_mse(series, q, |w| self.predict_unchecked(w))?.empirical_risk)
    }

    fn predict_unchecked(&self, window: &[f64]) -> f64 {
        self.intercept
            + self
                .coeffs
                .iter()
                .zip(window)
                .map(|(a, w)| a * w)
                .sum::<f64>()
    }
}

/// `c + Σ a_j w_j` with `window` ordered most-recent-first.
pub fn predict_ar(fit: &ArFit, window: &[f64]) -> Result<f64> {
    if window.len() < fit.order {
        return Err(Error::DimensionMismatch {
            what: "AR prediction window",
            expected: fit.order,
            found: window.len(),
        });
    }
    Ok(fit.predict_unchecked(window))
}

fn check_orders(series: &TimeSeries, order: usize, q_align: usize) -> Result<()> {
    if order > q_align {
        return Err(invalid(format!(
            "AR order {order} exceeds alignment window {q_align}"
        )));
    }
    if q_align >= series.len() {
        return Err(Error::SeriesTooShort {
            n: series.len(),
            q: q_align,
        });
    }
    Ok(())
}

fn rss_on_range(series: &TimeSeries, q_align: usize, intercept: f64, coeffs: &[f64]) -> f64 {
    let x = series.values();
    (q_align..x.len())
        .map(|i| {
            let pred: f64 = intercept
                + coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, a)| a * x[i - 1 - j])
                    .sum::<f64>();
            (x[i] - pred).powi(2)
        })
        .sum()
}

fn aic_least_squares(rss: f64, n_eff: usize, order: usize) -> f64 {
    let n = n_eff as f64;
    // A perfect fit has AIC -inf; ties are resolved toward the smaller order.
    n * (rss / n).ln() + 2.0 * (order + 1) as f64
}

/// Conditional least squares: minimizes `Σ_{i=q_align+1}^n (X_i - c - Σ_{j<=order} a_j X_{i-j})²`.
pub fn ols_ar_fit(series: &TimeSeries, order: usize, q_align: usize) -> Result<ArFit> {
    check_orders(series, order, q_align)?;
    let x = series.values();
    let n_eff = x.len() - q_align;
    let cols = order + 1;
    if n_eff < cols {
        return Err(Error::RankDeficient { order });
    }
    let design = DMatrix::from_fn(n_eff, cols, |r, c| {
        if c == 0 {
            1.0
        } else {
            x[q_align + r - c]
        }
    });
    let target = DVector::from_iterator(n_eff, x[q_align..].iter().copied());
    let qr = design.qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if r.diagonal().iter().any(|v| v.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::RankDeficient { order });
    }
    let qty = qr.q().transpose() * &target;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient { order })?;
    let intercept = beta[0];
    let coeffs: Vec<f64> = beta.iter().skip(1).copied().collect();
    let rss = rss_on_range(series, q_align, intercept, &coeffs);
    Ok(ArFit {
        order,
        aic: aic_least_squares(rss, n_eff, order),
        coeffs,
        intercept,
        rss,
        n_eff,
        method: ArMethod::LeastSquares,
    })
}

/// Picks the order in `0..=max_order` minimizing
/// `n_eff log(rss / n_eff) + 2 (order + 1)`; ties go to the smaller order.
pub fn aic_select(series: &TimeSeries, max_order: usize, q_align: usize) -> Result<ArFit> {
    select_min_aic((0..=max_order).map(|k| ols_ar_fit(series, k, q_align)))
}

/// Rank-deficient candidates are skipped; other errors propagate.
fn select_min_aic<I: Iterator<Item = Result<ArFit>>>(fits: I) -> Result<ArFit> {
    let mut best: Option<ArFit> = None;
    let mut deficient = None;
    for fit in fits {
        let fit = match fit {
            Err(e @ Error::RankDeficient { .. }) => {
                deficient.get_or_insert(e);
                continue;
            }
            other => other?,
        };
        if best.as_ref().is_none_or(|b| fit.aic < b.aic) {
            best = Some(fit);
        }
    }
    best.ok_or_else(|| deficient.unwrap_or_else(|| invalid("no candidate orders")))
}

/// Autocovariances `γ_0..γ_maxlag` of the demeaned series, divisor `n`.
fn autocovariances(x: &[f64], max_lag: usize) -> (f64, Vec<f64>) {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let acov = (0..=max_lag)
        .map(|k| {
            (0..n - k)
                .map(|i| (x[i] - mean) * (x[i + k] - mean))
                .sum::<f64>()
                / n as f64
        })
        .collect();
    (mean, acov)
}

/// Levinson–Durbin recursion. Returns `(coefficients of every order 0..=max,
/// innovation variance of every order)`.
fn levinson_durbin(acov: &[f64], max_order: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut coeffs: Vec<Vec<f64>> = vec![Vec::new()];
    let mut vars = vec![acov[0]];
    if acov[0] <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    for k in 1..=max_order {
        let prev = &coeffs[k - 1];
        let num = acov[k] - prev.iter().enumerate().map(|(j, a)| a * acov[k - 1 - j]).sum::<f64>();
        let phi_kk = num / vars[k - 1];
        let mut next: Vec<f64> = prev
            .iter()
            .enumerate()
            .map(|(j, a)| a - phi_kk * prev[k - 2 - j])
            .collect();
        next.push(phi_kk);
        vars.push(vars[k - 1] * (1.0 - phi_kk * phi_kk));
        coeffs.push(next);
    }
    Ok((coeffs, vars))
}

fn yule_walker_all(
    series: &TimeSeries,
    max_order: usize,
    q_align: usize,
) -> Result<Vec<ArFit>> {
    check_orders(series, max_order, q_align)?;
    let x = series.values();
    let n = x.len();
    let (mean, acov) = autocovariances(x, max_order);
    let (coeffs, vars) = levinson_durbin(&acov, max_order)?;
    coeffs
        .into_iter()
        .zip(vars)
        .enumerate()
        .map(|(order, (a, v))| {
            if !(v > 0.0) {
                return Err(Error::RankDeficient { order });
            }
            let var_pred = v * n as f64 / (n - (order + 1)) as f64;
            let intercept = mean * (1.0 - a.iter().sum::<f64>());
            let rss = rss_on_range(series, q_align, intercept, &a);
            Ok(ArFit {
                order,
                aic: n as f64 * var_pred.ln() + 2.0 * order as f64,
                coeffs: a,
                intercept,
                rss,
                n_eff: n - q_align,
                method: ArMethod::YuleWalker,
            })
        })
        .collect()
}

/// Yule–Walker fit of one order. The reported `rss` uses targets `q_align+1..n`.
pub fn yule_walker_fit(series: &TimeSeries, order: usize, q_align: usize) -> Result<ArFit> {
    let mut all = yule_walker_all(series, order, q_align)?;
    Ok(all.pop().expect("orders 0..=order are always produced"))
}

/// Yule–Walker order selection with `AIC = n log(σ̂²_k n/(n-k-1)) + 2k`.
pub fn aic_select_yule_walker(
    series: &TimeSeries,
    max_order: usize,
    q_align: usize,
) -> Result<ArFit> {
    select_min_aic(yule_walker_all(series, max_order, q_align)?.into_iter().map(Ok))
}

pub fn fit_order(
    series: &TimeSeries,
    order: usize,
    q_align: usize,
    method: ArMethod,
) -> Result<ArFit> {
    match method {
        ArMethod::LeastSquares => ols_ar_fit(series, order, q_align),
        ArMethod::YuleWalker => yule_walker_fit(series, order, q_align),
    }
}

pub fn select_order(
    series: &TimeSeries,
    max_order: usize,
    q_align: usize,
    method: ArMethod,
) -> Result<ArFit> {
    match method {
        ArMethod::LeastSquares => aic_select(series, max_order, q_align),
        ArMethod::YuleWalker => aic_select_yule_walker(series, max_order, q_align),
    }
}
