//! Computable pieces of the oracle inequality and of the tools behind it.
//!
//! * [`k_phi`]: the mixing aggregate `K = 1 + Σ_{r=1}^{n-q} sqrt(φ_{⌊r/q⌋})`.
//! * [`theorem_lambda`] / [`oracle_remainder`] / [`sparse_oracle_bound`]:
//!   the inverse temperature and remainder of the oracle inequality.
//! * [`kl_divergence`] and [`dv_check`]: Kullback divergence and the
//!   Donsker–Varadhan identity on finite spaces.
//! * [`samson_mc_check`]: Monte Carlo comparison of a log-MGF with the
//!   Bernstein-type bound `8 K N σ²(f) λ²`.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::rng::{self, MONTE_CARLO_STREAM};
use crate::simulate::{simulate_with, ProcessSpec};

/// Mixing coefficients `φ_r`. `phi0` is the value used at `r = 0`, where the
/// coefficient is not otherwise defined; the default convention is 1.
#[derive(Debug, Clone, PartialEq)]
pub enum MixingProfile {
    /// `values[r - 1] = φ_r`; coefficients beyond the listed ones are 0.
    Explicit { values: Vec<f64>, phi0: f64 },
    /// `φ_r = min(1, c ρ^r)`.
    Geometric { c: f64, rho: f64, phi0: f64 },
    /// `φ_r = 1` for `1 <= r <= m` and 0 afterwards.
    MDependent { m: usize, phi0: f64 },
}

impl MixingProfile {
    /// Independent sequence: `φ_r = 0` for `r >= 1`.
    pub fn iid() -> Self {
        MixingProfile::MDependent { m: 0, phi0: 1.0 }
    }

    fn phi0(&self) -> f64 {
        match *self {
            MixingProfile::Explicit { phi0, .. }
            | MixingProfile::Geometric { phi0, .. }
            | MixingProfile::MDependent { phi0, .. } => phi0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        if !unit(self.phi0()) {
            return Err(invalid("phi0 must lie in [0, 1]"));
        }
        match self {
            MixingProfile::Explicit { values, phi0 } => {
                if let Some(v) = values.iter().find(|v| !unit(**v)) {
                    return Err(invalid(format!("mixing coefficient {v} outside [0, 1]")));
                }
                let mut prev = *phi0;
                for (r, &v) in values.iter().enumerate() {
                    if v > prev {
                        return Err(invalid(format!(
                            "mixing coefficients must be non-increasing (φ_{} > φ_{})",
                            r + 1,
                            r
                        )));
                    }
                    prev = v;
                }
            }
            MixingProfile::Geometric { c, rho, .. } => {
                if !(c.is_finite() && *c >= 0.0) || !(0.0..1.0).contains(rho) {
                    return Err(invalid("geometric profile needs c >= 0 and 0 <= rho < 1"));
                }
            }
            MixingProfile::MDependent { .. } => {}
        }
        Ok(())
    }

    pub fn phi(&self, r: usize) -> f64 {
        if r == 0 {
            return self.phi0();
        }
        match self {
            MixingProfile::Explicit { values, .. } => values.get(r - 1).copied().unwrap_or(0.0),
            MixingProfile::Geometric { c, rho, .. } => (c * rho.powi(r as i32)).min(1.0),
            MixingProfile::MDependent { m, .. } => {
                if r <= *m {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `sup_n K_φ^(n)(q)`, the limit as `n → ∞` (the aggregate is nondecreasing in `n`).
    pub fn k_phi_sup(&self, q: usize) -> Result<f64> {
        self.validate()?;
        if q == 0 {
            return Err(invalid("q must be at least 1"));
        }
        // r = 1..q-1 hit φ_0; every k >= 1 covers r = kq..kq+q-1.
        let head = 1.0 + (q - 1) as f64 * self.phi0().sqrt();
        let tail: f64 = match self {
            MixingProfile::Explicit { values, .. } => values.iter().map(|v| v.sqrt()).sum(),
            MixingProfile::MDependent { m, .. } => *m as f64,
            MixingProfile::Geometric { c, rho, .. } => {
                if *c == 0.0 || *rho == 0.0 {
                    0.0
                } else {
                    // capped terms, then the geometric series sqrt(c) rho^{k/2}
                    let mut k = 1usize;
                    let mut capped = 0.0;
                    while c * rho.powi(k as i32) >= 1.0 {
                        capped += 1.0;
                        k += 1;
                    }
                    capped + c.sqrt() * rho.sqrt().powi(k as i32) / (1.0 - rho.sqrt())
                }
            }
        };
        Ok(head + q as f64 * tail)
    }
}

/// `K_φ^(n)(q) = 1 + Σ_{r=1}^{n-q} sqrt(φ_{⌊r/q⌋})`.
pub fn k_phi(profile: &MixingProfile, n: usize, q: usize) -> Result<f64> {
    profile.validate()?;
    if q == 0 || n <= q {
        return Err(invalid(format!("k_phi needs n > q >= 1, got n = {n}, q = {q}")));
    }
    Ok(1.0 + (1..=n - q).map(|r| profile.phi(r / q).sqrt()).sum::<f64>())
}

/// Scalars entering the oracle inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub n: usize,
    pub q: usize,
    pub p: usize,
    /// ℓ1 radius of the comparison class.
    pub b: f64,
    /// Bound on `|X_t|`.
    pub bound_x: f64,
    /// Upper bound `Φ(q)` on the mixing aggregate.
    pub phi_q: f64,
    pub eta: f64,
    pub epsilon: f64,
    /// Size of the comparison support `|I|`.
    pub support_size: usize,
}

impl BoundInputs {
    /// Largest admissible support size is strictly below this value.
    pub fn support_cap(&self) -> f64 {
        self.eta * (self.n - self.q) as f64 / (32.0 * self.phi_q * (2.0 + self.b).powi(2))
    }

    fn check_scalars(&self) -> Result<()> {
        if self.q == 0 || self.q >= self.n {
            return Err(Error::Constraint(format!(
                "q < n with q >= 1 (got q = {}, n = {})",
                self.q, self.n
            )));
        }
        if self.p == 0 {
            return Err(invalid("p must be at least 1"));
        }
        for (name, v) in [("b", self.b), ("B", self.bound_x)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.phi_q.is_finite() && self.phi_q >= 1.0) {
            return Err(Error::Constraint(format!(
                "Phi(q) >= K_phi >= 1 (got Phi(q) = {})",
                self.phi_q
            )));
        }
        let eta_cap = 16.0 / self.phi_q;
        if !(self.eta > 0.0 && self.eta <= eta_cap) {
            return Err(Error::Constraint(format!(
                "0 < eta <= 16/Phi(q) = {eta_cap} (got eta = {})",
                self.eta
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Constraint(format!(
                "0 < epsilon < 1 (got epsilon = {})",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Checks every admissibility condition, naming the violated inequality.
    pub fn validate(&self) -> Result<()> {
        self.check_scalars()?;
        if self.support_size > self.p {
            return Err(Error::Constraint(format!(
                "|I| <= p (got |I| = {}, p = {})",
                self.support_size, self.p
            )));
        }
        let cap = self.support_cap();
        if (self.support_size as f64) >= cap {
            return Err(Error::Constraint(format!(
                "|I| < eta (n-q) / (32 Phi(q) (2+b)^2) = {cap} (got |I| = {})",
                self.support_size
            )));
        }
        Ok(())
    }

    fn envelope(&self) -> f64 {
        64.0 * self.phi_q * (2.0 + self.b).powi(2) * self.bound_x.powi(2)
            / ((self.n - self.q) as f64 * self.eta)
    }
}

/// `λ = η (n - q) / (64 Φ(q) (2+b)² B²)`.
pub fn theorem_lambda(inputs: &BoundInputs) -> Result<f64> {
    inputs.check_scalars()?;
    Ok(inputs.eta * (inputs.n - inputs.q) as f64
        / (64.0 * inputs.phi_q * (2.0 + inputs.b).powi(2) * inputs.bound_x.powi(2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Remainder {
    /// The full remainder term.
    pub value: f64,
    /// `64 Φ(q) (2+b)² B² / ((n-q) η)`.
    pub envelope: f64,
    /// `|I| (B + 2 log(B b p e / |I| · sqrt(2η(n-q)/|I|)))`, zero when `|I| = 0`.
    pub support_term: f64,
    /// `2 log(2/ε)`.
    pub confidence_term: f64,
    /// `(2+η)/(2-η)`, the factor multiplying the approximation error.
    pub approximation_factor: f64,
}

pub fn oracle_remainder(inputs: &BoundInputs) -> Result<Remainder> {
    inputs.validate()?;
    let BoundInputs {
        n,
        q,
        p,
        b,
        bound_x,
        eta,
        epsilon,
        support_size,
        ..
    } = *inputs;
    let support_term = if support_size == 0 {
        0.0
    } else {
        let k = support_size as f64;
        let arg = bound_x * b * p as f64 * std::f64::consts::E / k
            * (2.0 * eta * (n - q) as f64 / k).sqrt();
        k * (bound_x + 2.0 * arg.ln())
    };
    let confidence_term = 2.0 * (2.0 / epsilon).ln();
    let envelope = inputs.envelope();
    Ok(Remainder {
        value: envelope * (support_term + confidence_term),
        envelope,
        support_term,
        confidence_term,
        approximation_factor: (2.0 + eta) / (2.0 - eta),
    })
}

/// Excess-risk bound when the best predictor has exactly `p0` nonzero
/// coordinates (the remainder with the approximation term vanishing).
pub fn sparse_oracle_bound(inputs: &BoundInputs, p0: usize) -> Result<f64> {
    let at_p0 = BoundInputs {
        support_size: p0,
        ..*inputs
    };
    at_p0.validate()?;
    let (n, q) = (at_p0.n as f64, at_p0.q as f64);
    let big_b = at_p0.bound_x;
    let lead = 64.0 * at_p0.phi_q * (2.0 + at_p0.b) * (2.0 + at_p0.b) * big_b * big_b
        / ((n - q) * at_p0.eta);
    let sparse = if p0 == 0 {
        0.0
    } else {
        let p0f = p0 as f64;
        let inner = (big_b * at_p0.b * at_p0.p as f64 * std::f64::consts::E / p0f).ln()
            + 0.5 * (2.0 * at_p0.eta * (n - q) / p0f).ln();
        p0f * (big_b + 2.0 * inner)
    };
    Ok(lead * (sparse + 2.0 * (2.0 / at_p0.epsilon).ln()))
}

fn check_distribution(d: &[f64], name: &str) -> Result<()> {
    if d.is_empty() {
        return Err(invalid(format!("{name} is empty")));
    }
    if d.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid(format!("{name} has negative or non-finite mass")));
    }
    let total: f64 = d.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("{name} sums to {total}, not 1")));
    }
    Ok(())
}

/// `K(ρ, π) = Σ ρ_i log(ρ_i / π_i)`, `+∞` when `ρ` charges a `π`-null point.
pub fn kl_divergence(rho: &[f64], pi: &[f64]) -> Result<f64> {
    if rho.len() != pi.len() {
        return Err(Error::DimensionMismatch {
            what: "distribution support",
            expected: pi.len(),
            found: rho.len(),
        });
    }
    check_distribution(rho, "rho")?;
    check_distribution(pi, "pi")?;
    let mut kl = 0.0;
    for (&r, &p) in rho.iter().zip(pi) {
        if r == 0.0 {
            continue;
        }
        if p == 0.0 {
            return Ok(f64::INFINITY);
        }
        kl += r * (r / p).ln();
    }
    // rounding can leave a tiny negative value for ρ ≈ π
    Ok(kl.max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DvReport {
    /// `log π[exp h]`.
    pub lhs: f64,
    /// `ρ[h] - K(ρ, π)` at the Gibbs measure.
    pub rhs: f64,
    /// The Gibbs measure `π{h} ∝ e^h π`.
    pub gibbs: Vec<f64>,
}

/// Both sides of `log π[e^h] = sup_ρ (ρ[h] - K(ρ, π))`, the supremum evaluated
/// at its maximizer `π{h}`.
pub fn dv_check(pi: &[f64], h: &[f64]) -> Result<DvReport> {
    check_distribution(pi, "pi")?;
    if h.len() != pi.len() {
        return Err(Error::DimensionMismatch {
            what: "function vs distribution support",
            expected: pi.len(),
            found: h.len(),
        });
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(invalid("h must be finite"));
    }
    let max = pi
        .iter()
        .zip(h)
        .filter(|(p, _)| **p > 0.0)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = pi.iter().zip(h).map(|(p, v)| p * (v - max).exp()).collect();
    let z: f64 = weights.iter().sum();
    let lhs = max + z.ln();
    let gibbs: Vec<f64> = weights.iter().map(|w| w / z).collect();
    // K(π{h}, π) = Σ g_i (h_i - lhs), so ρ[h] - K is computed termwise
    let rho_h: f64 = gibbs.iter().zip(h).map(|(g, v)| g * v).sum();
    let kl: f64 = gibbs
        .iter()
        .zip(h)
        .filter(|(g, _)| **g > 0.0)
        .map(|(g, v)| g * (v - lhs))
        .sum();
    Ok(DvReport {
        lhs,
        rhs: rho_h - kl,
        gibbs,
    })
}

/// Bounded test function for [`samson_mc_check`].
pub struct BoundedFn<'a> {
    pub f: &'a (dyn Fn(f64) -> f64 + Sync),
    /// `sup |f|`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamsonPoint {
    pub lambda: f64,
    /// Monte Carlo estimate of `log E exp(λ (S - E S))`.
    pub log_mgf: f64,
    /// Delta-method standard error of `log_mgf`.
    pub std_error: f64,
    /// `8 K N σ²(f) λ²`.
    pub bound: f64,
    /// Estimate exceeds the bound by more than 3 standard errors.
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamsonReport {
    pub k: f64,
    pub n_terms: usize,
    /// Pooled estimate of `Var f(Z_i)`.
    pub sigma2: f64,
    pub points: Vec<SamsonPoint>,
}

impl SamsonReport {
    pub fn violations(&self) -> usize {
        self.points.iter().filter(|p| p.violated).count()
    }
}

const MC_BLOCK: usize = 1024;

/// Monte Carlo check of `log E exp(λ(S_N(f) - E S_N(f))) <= 8 K N σ²(f) λ²`
/// with `S_N(f) = Σ_{i=1}^N f(X_i)`, for every `λ` in `lambdas`.
///
/// `K = 1 + Σ_{r=1}^N sqrt(φ_r)` comes from `profile`. Replications are
/// generated in fixed blocks, each on its own substream of `seed`, so the
/// report does not depend on the number of worker threads.
pub fn samson_mc_check(
    process: &ProcessSpec,
    profile: &MixingProfile,
    f: &BoundedFn<'_>,
    n_terms: usize,
    lambdas: &[f64],
    n_mc: usize,
    seed: u64,
) -> Result<SamsonReport> {
    if n_terms == 0 || n_mc < 2 {
        return Err(invalid("need N >= 1 and at least 2 replications"));
    }
    if !(f.bound.is_finite() && f.bound >= 0.0) {
        return Err(invalid("function bound must be finite and >= 0"));
    }
    let k = k_phi(profile, n_terms + 1, 1)?;
    let lambda_max = if f.bound == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (f.bound * k * k)
    };
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && **l <= lambda_max)) {
        return Err(Error::Constraint(format!(
            "0 < lambda <= 1/(M K^2) = {lambda_max} (got lambda = {l})"
        )));
    }
    process.validate()?;

    let n_blocks = n_mc.div_ceil(MC_BLOCK);
    // per replication: (S, Σ f, Σ f²)
    let draws: Vec<(f64, f64, f64)> = (0..n_blocks)
        .into_par_iter()
        .map(|block| -> Result<Vec<(f64, f64, f64)>> {
            let mut rng = rng::stream(
                rng::derive_seed(seed, &[block as u64]),
                MONTE_CARLO_STREAM,
            );
            let reps = MC_BLOCK.min(n_mc - block * MC_BLOCK);
            (0..reps)
                .map(|_| {
                    let x = simulate_with(process, n_terms, &mut rng)?;
                    let (mut s, mut s2) = (0.0, 0.0);
                    for &v in x.values() {
                        let fv = (f.f)(v);
                        s += fv;
                        s2 += fv * fv;
                    }
                    Ok((s, s, s2))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let m = draws.len() as f64;
    let mean_s = draws.iter().map(|d| d.0).sum::<f64>() / m;
    let total = m * n_terms as f64;
    let mean_f = draws.iter().map(|d| d.1).sum::<f64>() / total;
    let sigma2 = (draws.iter().map(|d| d.2).sum::<f64>() / total - mean_f * mean_f).max(0.0);

    let points = lambdas
        .iter()
        .map(|&lambda| {
            let e: Vec<f64> = draws
                .iter()
                .map(|d| (lambda * (d.0 - mean_s)).exp())
                .collect();
            let mean_e = e.iter().sum::<f64>() / m;
            let var_e = e.iter().map(|v| (v - mean_e).powi(2)).sum::<f64>() / (m - 1.0);
            let log_mgf = mean_e.ln();
            let std_error = (var_e / m).sqrt() / mean_e;
            let bound = 8.0 * k * n_terms as f64 * sigma2 * lambda * lambda;
            SamsonPoint {
                lambda,
                log_mgf,
                std_error,
                bound,
                violated: log_mgf - bound > 3.0 * std_error,
            }
        })
        .collect();
    Ok(SamsonReport {
        k,
        n_terms,
        sigma2,
        points,
    })
}
