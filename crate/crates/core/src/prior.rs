//! Hierarchical sparsity prior.
//!
//! A support size `k` is drawn with weight proportional to `2^{-k-1}` for
//! `k = 0..=k_max`, the support `I` uniformly among the `C(p, k)` subsets of that
//! size, and the coefficients uniformly on the `k`-dimensional ℓ1 ball of radius
//! `b + 1`. The `k = 0` component is a point mass at zero.
//!
//! Densities are taken with respect to counting measure over subsets times
//! Lebesgue measure on the corresponding coordinate subspace.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{invalid, Error, Result};
use crate::series::SparseParam;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    p: usize,
    b: f64,
    k_max: usize,
    log_norm: f64,
}

impl PriorSpec {
    /// `k_max` is clamped to `p`; support sizes above `p` carry no subsets.
    pub fn new(p: usize, b: f64, k_max: usize) -> Result<Self> {
        if p == 0 {
            return Err(invalid("prior dimension p must be at least 1"));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(invalid(format!("prior radius parameter b must be > 0, got {b}")));
        }
        if k_max == 0 {
            return Err(invalid("k_max must be at least 1"));
        }
        let k_max = k_max.min(p);
        // Σ_{k=0}^{k_max} 2^{-k-1} = 1 - 2^{-(k_max+1)}
        let log_norm = (-(0.5f64.powi(k_max as i32 + 1))).ln_1p();
        Ok(Self {
            p,
            b,
            k_max,
            log_norm,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Radius of the ℓ1 ball carrying the prior, `b + 1`.
    pub fn radius(&self) -> f64 {
        self.b + 1.0
    }

    /// Log of the renormalized weight of support size `k` (all subsets together).
    pub fn log_size_weight(&self, k: usize) -> f64 {
        -((k + 1) as f64) * std::f64::consts::LN_2 - self.log_norm
    }

    pub fn model_log_weight(&self, k: usize) -> Result<f64> {
        if k > self.k_max {
            return Err(Error::Constraint(format!(
                "support size {k} exceeds k_max = {}",
                self.k_max
            )));
        }
        Ok(self.log_size_weight(k) - ln_binomial(self.p, k))
    }
}

/// `ln C(n, k)` by direct summation; exact enough for the dimensions used here.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    (1..=k)
        .map(|i| ((n - k + i) as f64 / i as f64).ln())
        .sum()
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Log weight of one specific subset of size `k`: `log[2^{-k-1} / C(p,k)] - log Z`.
pub fn model_log_weight(k: usize, p: usize, k_max: usize) -> Result<f64> {
    if k > p.min(k_max) {
        return Err(Error::Constraint(format!(
            "support size {k} outside 0..={}",
            p.min(k_max)
        )));
    }
    PriorSpec::new(p, 1.0, k_max)?.model_log_weight(k)
}

/// `log[(2R)^k / k!]`, the volume of the `k`-dimensional ℓ1 ball of radius `R`.
/// The 0-dimensional ball has volume 1.
pub fn l1_ball_log_volume(k: usize, radius: f64) -> f64 {
    k as f64 * (2.0 * radius).ln() - ln_factorial(k)
}

pub fn log_prior_density(theta: &SparseParam, spec: &PriorSpec) -> Result<f64> {
    if theta.p() != spec.p {
        return Err(Error::DimensionMismatch {
            what: "parameter vs prior dimension",
            expected: spec.p,
            found: theta.p(),
        });
    }
    Ok(log_density_parts(theta.support_size(), theta.l1(), spec))
}

/// Log density from the support size and ℓ1 norm alone.
pub(crate) fn log_density_parts(k: usize, l1: f64, spec: &PriorSpec) -> f64 {
    if k > spec.k_max || l1 >= spec.radius() {
        return f64::NEG_INFINITY;
    }
    spec.log_size_weight(k) - ln_binomial(spec.p, k) - l1_ball_log_volume(k, spec.radius())
}

/// Uniform draw from the `k`-dimensional ℓ1 ball of radius `radius`.
///
/// Normalized exponentials give a uniform point on the simplex, the radius is
/// scaled by `U^{1/k}` and each coordinate gets an independent sign.
pub fn sample_l1_ball<R: Rng + ?Sized>(rng: &mut R, k: usize, radius: f64) -> Vec<f64> {
    if k == 0 {
        return Vec::new();
    }
    let e: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    let r = radius * rng.random::<f64>().powf(1.0 / k as f64);
    e.into_iter()
        .map(|v| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sign * r * v / total
        })
        .collect()
}

pub fn sample_prior<R: Rng + ?Sized>(spec: &PriorSpec, rng: &mut R) -> SparseParam {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut k = spec.k_max;
    for size in 0..=spec.k_max {
        acc += spec.log_size_weight(size).exp();
        if u < acc {
            k = size;
            break;
        }
    }
    let support = index::sample(rng, spec.p, k).into_vec();
    let values = sample_l1_ball(rng, k, spec.radius());
    SparseParam::from_pairs(spec.p, support.into_iter().zip(values))
        .expect("sampled support indices are distinct and in range")
}
