//! Predictor dictionaries `g_1..g_p` on windows of the last `q` observations.
//!
//! Function ordering:
//! * `ArLinear`: `g_{j+1}(w) = w[j]`, i.e. lag order, `p = q`.
//! * `SignPattern`: `p = 2^q`; bit `k` of the function index is set when
//!   `w[k] <= 0`, with the most recent value in the least significant bit. Index
//!   0 is the all-positive pattern. Exactly one function is active per window.
//! * `Custom`: caller supplied, expected to be bounded.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::series::SparseParam;

/// Largest window length accepted for the sign-pattern dictionary.
pub const MAX_SIGN_PATTERN_Q: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    ArLinear,
    SignPattern,
    Custom,
}

type CustomFn = Arc<dyn Fn(usize, &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Evaluator {
    ArLinear,
    SignPattern,
    Custom(CustomFn),
}

#[derive(Clone)]
pub struct PredictorBasis {
    q: usize,
    p: usize,
    eval: Evaluator,
}

impl fmt::Debug for PredictorBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PredictorBasis")
            .field("kind", &self.kind())
            .field("q", &self.q)
            .field("p", &self.p)
            .finish()
    }
}

impl PredictorBasis {
    /// Builds one of the built-in dictionaries. Use [`PredictorBasis::custom`]
    /// for user functions.
    pub fn new(kind: BasisKind, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(invalid("window length q must be at least 1"));
        }
        match kind {
            BasisKind::ArLinear => Ok(Self {
                q,
                p: q,
                eval: Evaluator::ArLinear,
            }),
            BasisKind::SignPattern => {
                if q > MAX_SIGN_PATTERN_Q {
                    return Err(invalid(format!(
                        "sign-pattern dictionary needs q <= {MAX_SIGN_PATTERN_Q}, got {q}"
                    )));
                }
                Ok(Self {
                    q,
                    p: 1 << q,
                    eval: Evaluator::SignPattern,
                })
            }
            BasisKind::Custom => Err(invalid(
                "custom dictionaries are built with PredictorBasis::custom",
            )),
        }
    }

    pub fn custom<F>(q: usize, p: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, &[f64]) -> f64 + Send + Sync + 'static,
    {
        if q == 0 || p == 0 {
            return Err(invalid("custom dictionary needs q >= 1 and p >= 1"));
        }
        Ok(Self {
            q,
            p,
            eval: Evaluator::Custom(Arc::new(f)),
        })
    }

    pub fn kind(&self) -> BasisKind {
        match self.eval {
            Evaluator::ArLinear => BasisKind::ArLinear,
            Evaluator::SignPattern => BasisKind::SignPattern,
            Evaluator::Custom(_) => BasisKind::Custom,
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Index of the single active sign-pattern function for `window`.
    pub fn sign_pattern_index(window: &[f64]) -> usize {
        window
            .iter()
            .enumerate()
            .filter(|(_, v)| **v <= 0.0)
            .fold(0usize, |acc, (k, _)| acc | (1 << k))
    }

    /// Value of `g_{j+1}` on `window`.
    pub fn eval(&self, j: usize, window: &[f64]) -> f64 {
        debug_assert!(j < self.p);
        match &self.eval {
            Evaluator::ArLinear => window[j],
            Evaluator::SignPattern => {
                if Self::sign_pattern_index(window) == j {
                    1.0
                } else {
                    0.0
                }
            }
            Evaluator::Custom(f) => f(j, window),
        }
    }

    /// Visits every function that may be nonzero on `window`.
    pub fn for_each_feature<F: FnMut(usize, f64)>(&self, window: &[f64], mut f: F) {
        match &self.eval {
            Evaluator::ArLinear => window.iter().enumerate().for_each(|(j, &v)| f(j, v)),
            Evaluator::SignPattern => f(Self::sign_pattern_index(window), 1.0),
            Evaluator::Custom(g) => (0..self.p).for_each(|j| f(j, g(j, window))),
        }
    }

    /// `f_θ(window) = Σ_{j ∈ I} θ_j g_j(window)`.
    pub fn predict(&self, theta: &SparseParam, window: &[f64]) -> Result<f64> {
        if window.len() != self.q {
            return Err(Error::DimensionMismatch {
                what: "window length",
                expected: self.q,
                found: window.len(),
            });
        }
        if theta.p() != self.p {
            return Err(Error::DimensionMismatch {
                what: "parameter vs basis size",
                expected: self.p,
                found: theta.p(),
            });
        }
        Ok(self.predict_unchecked(theta, window))
    }

    pub(crate) fn predict_unchecked(&self, theta: &SparseParam, window: &[f64]) -> f64 {
        match &self.eval {
            Evaluator::SignPattern => theta.get(Self::sign_pattern_index(window)),
            _ => theta.iter().map(|(j, v)| v * self.eval(j, window)).sum(),
        }
    }
}
