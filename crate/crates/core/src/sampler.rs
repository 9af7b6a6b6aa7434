//! Reversible-jump sampling of the Gibbs measure and its posterior mean.
//!
//! The target on the union of coordinate subspaces has log density
//! `-λ r(θ) + log π(θ)` (see [`crate::prior`]). Three moves are used:
//!
//! * birth: add a coordinate chosen uniformly outside the support with a value
//!   drawn from `U(-s, s)`;
//! * death: drop a coordinate chosen uniformly from the support;
//! * update: Gaussian random walk on one support coordinate.
//!
//! The move type is drawn with fixed probabilities; a move that is unavailable
//! in the current state (death at `|I| = 0`, birth at `|I| = k_max`, update at
//! `|I| = 0`) leaves the state unchanged. Because the selection probabilities
//! do not depend on the state, the birth/death proposal ratio is
//! `P_death (p - k) 2s / (P_birth (k + 1))` and the dimension-matching Jacobian
//! is 1.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::basis::PredictorBasis;
use crate::error::{invalid, Error, Result};
use crate::prior::{log_density_parts, PriorSpec};
use crate::rng::{self, Rng, SAMPLER_STREAM};
use crate::series::{SparseParam, TimeSeries};

pub const DEFAULT_B: f64 = 10.0;
pub const DEFAULT_N_ITER: usize = 20_000;
pub const DEFAULT_N_BURN: usize = 10_000;
pub const DEFAULT_BIRTH_HALF_WIDTH: f64 = 0.5;

/// Largest dictionary for which the Gram matrix of the features is cached.
const MAX_GRAM_P: usize = 1024;

/// How the inverse temperature is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    /// `λ = n / var_emp` of the training series.
    Heuristic,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveProbs {
    pub birth: f64,
    pub death: f64,
    pub update: f64,
}

impl Default for MoveProbs {
    fn default() -> Self {
        Self {
            birth: 1.0 / 3.0,
            death: 1.0 / 3.0,
            update: 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub lambda: Temperature,
    /// ℓ1 radius parameter; the prior lives on the ball of radius `b + 1`.
    pub b: f64,
    pub n_iter: usize,
    pub n_burn: usize,
    pub move_probs: MoveProbs,
    /// Random-walk standard deviation; `None` means `0.1 (b + 1) / sqrt(p)`.
    pub update_step: Option<f64>,
    /// Half-width `s` of the uniform birth proposal.
    pub birth_proposal_scale: f64,
    /// Keep every `thin`-th state in the returned chain.
    pub thin: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            lambda: Temperature::Heuristic,
            b: DEFAULT_B,
            n_iter: DEFAULT_N_ITER,
            n_burn: DEFAULT_N_BURN,
            move_probs: MoveProbs::default(),
            update_step: None,
            birth_proposal_scale: DEFAULT_BIRTH_HALF_WIDTH,
            thin: 1,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if let Temperature::Fixed(l) = self.lambda {
            if !(l.is_finite() && l >= 0.0) {
                return Err(invalid(format!("lambda must be finite and >= 0, got {l}")));
            }
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(invalid(format!("b must be > 0, got {}", self.b)));
        }
        if self.n_burn >= self.n_iter {
            return Err(invalid(format!(
                "n_burn ({}) must be smaller than n_iter ({})",
                self.n_burn, self.n_iter
            )));
        }
        let MoveProbs {
            birth,
            death,
            update,
        } = self.move_probs;
        if [birth, death, update].iter().any(|v| !(v.is_finite() && *v >= 0.0))
            || ((birth + death + update) - 1.0).abs() > 1e-9
        {
            return Err(invalid(
                "move probabilities must be nonnegative and sum to 1",
            ));
        }
        if (birth == 0.0) != (death == 0.0) {
            return Err(invalid(
                "birth and death must both be enabled or both disabled",
            ));
        }
        if let Some(step) = self.update_step {
            if !(step.is_finite() && step > 0.0) {
                return Err(invalid(format!("update_step must be > 0, got {step}")));
            }
        }
        if !(self.birth_proposal_scale.is_finite() && self.birth_proposal_scale > 0.0) {
            return Err(invalid("birth_proposal_scale must be > 0"));
        }
        if self.thin == 0 {
            return Err(invalid("thin must be at least 1"));
        }
        Ok(())
    }

    fn resolved_update_step(&self, p: usize) -> f64 {
        self.update_step
            .unwrap_or(0.1 * (self.b + 1.0) / (p as f64).sqrt())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveTally {
    pub accepted: u64,
    pub proposed: u64,
}

impl MoveTally {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += accepted as u64;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AcceptStats {
    pub birth: MoveTally,
    pub death: MoveTally,
    pub update: MoveTally,
}

/// Recorded trajectory. `states[s]` is the state after iteration `(s + 1) * thin`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub states: Vec<SparseParam>,
    /// `-λ r(θ) + log π(θ)` for each recorded state.
    pub log_scores: Vec<f64>,
    pub accept: AcceptStats,
    pub thin: usize,
    pub lambda: f64,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Iteration number (1-based) of recorded state `s`.
    pub fn iteration(&self, s: usize) -> usize {
        (s + 1) * self.thin
    }
}

pub fn heuristic_lambda(series: &TimeSeries) -> Result<f64> {
    if series.var_emp() <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(series.len() as f64 / series.var_emp())
}

/// Residual-sum-of-squares evaluator for `θ ↦ Σ_i (X_i - f_θ(w_i))²`.
#[derive(Debug, Clone)]
pub(crate) enum RiskEngine {
    /// `RSS(θ) = yy - 2 θ·c + θᵀ G θ` with cached features cross products.
    Gram {
        p: usize,
        yy: f64,
        cross: Vec<f64>,
        gram: Vec<f64>,
    },
    /// Explicit residuals; used for dictionaries too large for a Gram matrix.
    Direct {
        basis: PredictorBasis,
        windows: Vec<f64>,
        residuals: Vec<f64>,
    },
}

impl RiskEngine {
    pub(crate) fn new(series: &TimeSeries, basis: &PredictorBasis) -> Result<(Self, usize)> {
        let q = basis.q();
        if series.len() <= q {
            return Err(Error::SeriesTooShort { n: series.len(), q });
        }
        let n_terms = series.len() - q;
        let p = basis.p();
        if p <= MAX_GRAM_P {
            let mut yy = 0.0;
            let mut cross = vec![0.0; p];
            let mut gram = vec![0.0; p * p];
            let mut feats: Vec<(usize, f64)> = Vec::with_capacity(p);
            series.for_each_window(q, |w, y| {
                feats.clear();
                basis.for_each_feature(w, |j, g| {
                    if g != 0.0 {
                        feats.push((j, g));
                    }
                });
                yy += y * y;
                for &(j, gj) in &feats {
                    cross[j] += y * gj;
                    for &(k, gk) in &feats {
                        gram[j * p + k] += gj * gk;
                    }
                }
            })?;
            Ok((RiskEngine::Gram { p, yy, cross, gram }, n_terms))
        } else {
            let mut windows = Vec::with_capacity(n_terms * q);
            let mut residuals = Vec::with_capacity(n_terms);
            series.for_each_window(q, |w, y| {
                windows.extend_from_slice(w);
                residuals.push(y);
            })?;
            Ok((
                RiskEngine::Direct {
                    basis: basis.clone(),
                    windows,
                    residuals,
                },
                n_terms,
            ))
        }
    }

    /// RSS of `θ` given as dense values plus its support. For `Direct`, the
    /// residuals must correspond to this `θ`.
    pub(crate) fn rss(&self, dense: &[f64], support: &[usize]) -> f64 {
        match self {
            RiskEngine::Gram { p, yy, cross, gram } => {
                let mut rss = *yy;
                for &j in support {
                    rss -= 2.0 * dense[j] * cross[j];
                    let row = &gram[j * p..(j + 1) * p];
                    rss += dense[j] * support.iter().map(|&k| row[k] * dense[k]).sum::<f64>();
                }
                rss
            }
            RiskEngine::Direct { residuals, .. } => residuals.iter().map(|r| r * r).sum(),
        }
    }

    /// Change in RSS when coordinate `j` moves by `delta`.
    fn delta_rss(&self, dense: &[f64], support: &[usize], j: usize, delta: f64) -> f64 {
        match self {
            RiskEngine::Gram { p, cross, gram, .. } => {
                let row = &gram[j * p..(j + 1) * p];
                let g_theta: f64 = support.iter().map(|&k| row[k] * dense[k]).sum();
                -2.0 * delta * (cross[j] - g_theta) + delta * delta * row[j]
            }
            RiskEngine::Direct {
                basis,
                windows,
                residuals,
            } => {
                let q = basis.q();
                let (mut rg, mut gg) = (0.0, 0.0);
                for (w, r) in windows.chunks_exact(q).zip(residuals) {
                    let g = basis.eval(j, w);
                    rg += r * g;
                    gg += g * g;
                }
                -2.0 * delta * rg + delta * delta * gg
            }
        }
    }

    fn apply(&mut self, j: usize, delta: f64) {
        if let RiskEngine::Direct {
            basis,
            windows,
            residuals,
        } = self
        {
            let q = basis.q();
            for (w, r) in windows.chunks_exact(q).zip(residuals.iter_mut()) {
                *r -= delta * basis.eval(j, w);
            }
        }
    }
}

/// Current chain state: dense coefficients plus an unordered support list.
#[derive(Debug, Clone)]
struct State {
    dense: Vec<f64>,
    support: Vec<usize>,
    l1: f64,
    rss: f64,
}

impl State {
    fn to_param(&self) -> SparseParam {
        SparseParam::from_pairs(
            self.dense.len(),
            self.support.iter().map(|&j| (j, self.dense[j])),
        )
        .expect("chain state is a valid sparse parameter")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Birth,
    Death,
    Update,
}

/// Transition machinery shared by the sampler and its detailed-balance checks.
pub(crate) struct Kernel {
    prior: PriorSpec,
    engine: RiskEngine,
    n_terms: f64,
    lambda: f64,
    probs: MoveProbs,
    birth_half_width: f64,
    update_step: f64,
    /// Log prior density by support size (for ℓ1 inside the ball).
    log_prior_by_k: Vec<f64>,
}

impl Kernel {
    pub(crate) fn new(
        series: &TimeSeries,
        basis: &PredictorBasis,
        lambda: f64,
        config: &SamplerConfig,
    ) -> Result<Self> {
        config.validate()?;
        let (engine, n_terms) = RiskEngine::new(series, basis)?;
        let p = basis.p();
        let prior = PriorSpec::new(p, config.b, series.len().min(p))?;
        let log_prior_by_k = (0..=prior.k_max())
            .map(|k| log_density_parts(k, 0.0, &prior))
            .collect();
        Ok(Self {
            prior,
            engine,
            n_terms: n_terms as f64,
            lambda,
            probs: config.move_probs,
            birth_half_width: config.birth_proposal_scale,
            update_step: config.resolved_update_step(p),
            log_prior_by_k,
        })
    }

    fn log_prior(&self, k: usize, l1: f64) -> f64 {
        if k > self.prior.k_max() || l1 >= self.prior.radius() {
            f64::NEG_INFINITY
        } else {
            self.log_prior_by_k[k]
        }
    }

    fn log_score(&self, k: usize, l1: f64, rss: f64) -> f64 {
        let lp = self.log_prior(k, l1);
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        // λ = 0 is exact tempering to the prior, even for huge RSS.
        if self.lambda == 0.0 {
            lp
        } else {
            lp - self.lambda * rss / self.n_terms
        }
    }

    fn initial_state(&self) -> State {
        let p = self.prior.p();
        let dense = vec![0.0; p];
        let rss = self.engine.rss(&dense, &[]);
        State {
            dense,
            support: Vec::new(),
            l1: 0.0,
            rss,
        }
    }

    /// Log acceptance ratio (before `min(0, ·)`) of a birth adding `j` with `value`.
    fn log_ratio_birth(&self, s: &State, j: usize, value: f64) -> (f64, f64) {
        let k = s.support.len();
        let p = self.prior.p();
        let d_rss = self.engine.delta_rss(&s.dense, &s.support, j, value);
        let new_score = self.log_score(k + 1, s.l1 + value.abs(), s.rss + d_rss);
        let old_score = self.log_score(k, s.l1, s.rss);
        let proposal = self.probs.death.ln() - ((k + 1) as f64).ln() - self.probs.birth.ln()
            + ((p - k) as f64).ln()
            + (2.0 * self.birth_half_width).ln();
        (new_score - old_score + proposal, d_rss)
    }

    /// Log acceptance ratio of a death removing support coordinate `j`.
    fn log_ratio_death(&self, s: &State, j: usize) -> (f64, f64) {
        let k = s.support.len();
        let p = self.prior.p();
        let value = s.dense[j];
        let d_rss = self.engine.delta_rss(&s.dense, &s.support, j, -value);
        if value.abs() >= self.birth_half_width {
            // the reverse birth cannot propose this value
            return (f64::NEG_INFINITY, d_rss);
        }
        let new_score = self.log_score(k - 1, s.l1 - value.abs(), s.rss + d_rss);
        let old_score = self.log_score(k, s.l1, s.rss);
        let proposal = self.probs.birth.ln() - ((p - k + 1) as f64).ln()
            - (2.0 * self.birth_half_width).ln()
            - self.probs.death.ln()
            + (k as f64).ln();
        (new_score - old_score + proposal, d_rss)
    }

    fn set_coord(&mut self, s: &mut State, j: usize, value: f64, d_rss: f64) {
        let old = s.dense[j];
        self.engine.apply(j, value - old);
        s.dense[j] = value;
        if old == 0.0 {
            s.support.push(j);
        } else if value == 0.0 {
            let pos = s.support.iter().position(|&i| i == j).expect("j in support");
            s.support.swap_remove(pos);
        }
        s.l1 = s.support.iter().map(|&i| s.dense[i].abs()).sum();
        s.rss = match self.engine {
            RiskEngine::Gram { .. } => self.engine.rss(&s.dense, &s.support),
            RiskEngine::Direct { .. } => s.rss + d_rss,
        };
    }

    fn pick_outside(&self, s: &State, rng: &mut Rng) -> usize {
        let p = self.prior.p();
        if 2 * s.support.len() < p {
            loop {
                let j = rng.random_range(0..p);
                if s.dense[j] == 0.0 {
                    return j;
                }
            }
        }
        let outside: Vec<usize> = (0..p).filter(|&j| s.dense[j] == 0.0).collect();
        outside[rng.random_range(0..outside.len())]
    }

    fn accept(log_ratio: f64, rng: &mut Rng) -> bool {
        log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio
    }

    fn step(&mut self, s: &mut State, rng: &mut Rng, stats: &mut AcceptStats) {
        let u: f64 = rng.random();
        let mv = if u < self.probs.birth {
            Move::Birth
        } else if u < self.probs.birth + self.probs.death {
            Move::Death
        } else {
            Move::Update
        };
        let k = s.support.len();
        match mv {
            Move::Birth => {
                if k >= self.prior.k_max() {
                    return;
                }
                let j = self.pick_outside(s, rng);
                let value = rng.random_range(-self.birth_half_width..self.birth_half_width);
                if value == 0.0 {
                    stats.birth.record(false);
                    return;
                }
                let (log_ratio, d_rss) = self.log_ratio_birth(s, j, value);
                let ok = Self::accept(log_ratio, rng);
                stats.birth.record(ok);
                if ok {
                    self.set_coord(s, j, value, d_rss);
                }
            }
            Move::Death => {
                if k == 0 {
                    return;
                }
                let j = s.support[rng.random_range(0..k)];
                let (log_ratio, d_rss) = self.log_ratio_death(s, j);
                let ok = Self::accept(log_ratio, rng);
                stats.death.record(ok);
                if ok {
                    self.set_coord(s, j, 0.0, d_rss);
                }
            }
            Move::Update => {
                if k == 0 {
                    return;
                }
                let j = s.support[rng.random_range(0..k)];
                let z: f64 = StandardNormal.sample(rng);
                let old = s.dense[j];
                let value = old + self.update_step * z;
                if value == 0.0 {
                    stats.update.record(false);
                    return;
                }
                let delta = value - old;
                let d_rss = self.engine.delta_rss(&s.dense, &s.support, j, delta);
                let new_l1 = s.l1 - old.abs() + value.abs();
                let log_ratio =
                    self.log_score(k, new_l1, s.rss + d_rss) - self.log_score(k, s.l1, s.rss);
                let ok = Self::accept(log_ratio, rng);
                stats.update.record(ok);
                if ok {
                    self.set_coord(s, j, value, d_rss);
                }
            }
        }
    }
}

fn resolve_lambda(series: &TimeSeries, t: Temperature) -> Result<f64> {
    match t {
        Temperature::Heuristic => heuristic_lambda(series),
        Temperature::Fixed(l) => Ok(l),
    }
}

/// Runs the sampler and calls `visit(iteration, state, log_score)` after every
/// iteration (1-based). Returns the acceptance tallies and the λ used.
fn drive<F>(
    series: &TimeSeries,
    basis: &PredictorBasis,
    config: &SamplerConfig,
    mut visit: F,
) -> Result<(AcceptStats, f64)>
where
    F: FnMut(usize, &State, f64),
{
    config.validate()?;
    let lambda = resolve_lambda(series, config.lambda)?;
    let mut kernel = Kernel::new(series, basis, lambda, config)?;
    let mut rng = rng::stream(config.seed, SAMPLER_STREAM);
    let mut state = kernel.initial_state();
    let mut stats = AcceptStats::default();
    for it in 1..=config.n_iter {
        kernel.step(&mut state, &mut rng, &mut stats);
        let score = kernel.log_score(state.support.len(), state.l1, state.rss);
        visit(it, &state, score);
    }
    Ok((stats, lambda))
}

/// Samples the Gibbs measure starting from `θ = 0`, recording every
/// `config.thin`-th state (burn-in included).
pub fn run_rjmcmc(
    series: &TimeSeries,
    basis: &PredictorBasis,
    config: &SamplerConfig,
) -> Result<Chain> {
    let mut states = Vec::with_capacity(config.n_iter / config.thin.max(1));
    let mut log_scores = Vec::with_capacity(states.capacity());
    let thin = config.thin;
    let (accept, lambda) = drive(series, basis, config, |it, s, score| {
        if it % thin == 0 {
            states.push(s.to_param());
            log_scores.push(score);
        }
    })?;
    Ok(Chain {
        states,
        log_scores,
        accept,
        thin,
        lambda,
    })
}

/// Coordinate-wise mean of the recorded states after iteration `n_burn`.
pub fn posterior_mean(chain: &Chain, n_burn: usize) -> Result<SparseParam> {
    let first = n_burn / chain.thin;
    let kept = chain.states.get(first..).unwrap_or(&[]);
    if kept.is_empty() {
        return Err(invalid(format!(
            "no states after burn-in {n_burn} (chain has {} states, thin {})",
            chain.len(),
            chain.thin
        )));
    }
    let p = kept[0].p();
    let mut sum = vec![0.0; p];
    for s in kept {
        for (j, v) in s.iter() {
            sum[j] += v;
        }
    }
    let m = kept.len() as f64;
    sum.iter_mut().for_each(|v| *v /= m);
    SparseParam::from_dense(&sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainDiagnostics {
    pub accept: AcceptStats,
    /// Average support size after burn-in.
    pub mean_support_size: f64,
    pub n_iter: usize,
    pub n_burn: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsFit {
    pub theta: SparseParam,
    pub lambda: f64,
    pub b: f64,
    pub diagnostics: ChainDiagnostics,
}

/// Runs the sampler and averages the post-burn-in states without storing the chain.
pub fn fit_gibbs(
    series: &TimeSeries,
    basis: &PredictorBasis,
    config: &SamplerConfig,
) -> Result<GibbsFit> {
    let p = basis.p();
    let mut sum = vec![0.0; p];
    let mut support_total = 0usize;
    let mut kept = 0usize;
    let thin = config.thin;
    let (accept, lambda) = drive(series, basis, config, |it, s, _| {
        if it > config.n_burn && it % thin == 0 {
            for &j in &s.support {
                sum[j] += s.dense[j];
            }
            support_total += s.support.len();
            kept += 1;
        }
    })?;
    if kept == 0 {
        return Err(invalid("no post-burn-in states were kept; reduce thin"));
    }
    sum.iter_mut().for_each(|v| *v /= kept as f64);
    Ok(GibbsFit {
        theta: SparseParam::from_dense(&sum)?,
        lambda,
        b: config.b,
        diagnostics: ChainDiagnostics {
            accept,
            mean_support_size: support_total as f64 / kept as f64,
            n_iter: config.n_iter,
            n_burn: config.n_burn,
        },
    })
}

/// Running `log Σ w_i` together with `Σ w_i t_i` for two coordinates.
struct WeightedSum {
    max: f64,
    mass: f64,
    first: [f64; 2],
}

impl WeightedSum {
    fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            mass: 0.0,
            first: [0.0; 2],
        }
    }

    fn add(&mut self, log_w: f64, t: [f64; 2]) {
        if log_w == f64::NEG_INFINITY {
            return;
        }
        if log_w > self.max {
            let scale = (self.max - log_w).exp();
            self.mass *= scale;
            self.first.iter_mut().for_each(|v| *v *= scale);
            self.max = log_w;
        }
        let w = (log_w - self.max).exp();
        self.mass += w;
        self.first[0] += w * t[0];
        self.first[1] += w * t[1];
    }

    fn merge(&mut self, other: &WeightedSum) {
        if other.mass == 0.0 {
            return;
        }
        let base = other.max;
        let (m, f) = (other.mass, other.first);
        // fold `other` in as a single weighted point per coordinate
        self.add(base + m.ln(), [f[0] / m, f[1] / m]);
    }
}

/// Trapezoid nodes and weights on `[-half, half]` with an even number of
/// intervals of length at most `step` (so 0 is a node).
fn trapezoid(half: f64, step: f64) -> Vec<(f64, f64)> {
    if half <= 0.0 {
        return vec![(0.0, 0.0)];
    }
    let mut m = (2.0 * half / step).ceil() as usize;
    m = m.max(2);
    m += m % 2;
    let h = 2.0 * half / m as f64;
    (0..=m)
        .map(|i| {
            let w = if i == 0 || i == m { 0.5 * h } else { h };
            (-half + i as f64 * h, w)
        })
        .collect()
}

/// Deterministic quadrature of the Gibbs posterior mean for dictionaries with
/// `p <= 2`: the `θ = 0` atom plus trapezoid rules on every coordinate
/// subspace intersected with the ℓ1 ball of radius `b + 1`.
pub fn grid_posterior_mean(
    series: &TimeSeries,
    basis: &PredictorBasis,
    lambda: f64,
    b: f64,
    grid_step: f64,
) -> Result<SparseParam> {
    Ok(grid_posterior(series, basis, lambda, b, grid_step)?.mean)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPosterior {
    pub mean: SparseParam,
    /// Posterior probability of each support size `0..=p`.
    pub support_size_probs: Vec<f64>,
}

/// [`grid_posterior_mean`] together with the posterior law of `|I|`.
pub fn grid_posterior(
    series: &TimeSeries,
    basis: &PredictorBasis,
    lambda: f64,
    b: f64,
    grid_step: f64,
) -> Result<GridPosterior> {
    let p = basis.p();
    if p > 2 {
        return Err(invalid(format!(
            "grid oracle supports p <= 2, got p = {p}"
        )));
    }
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(invalid("grid_step must be > 0"));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(invalid("lambda must be finite and >= 0"));
    }
    let config = SamplerConfig {
        lambda: Temperature::Fixed(lambda),
        b,
        ..SamplerConfig::default()
    };
    let kernel = Kernel::new(series, basis, lambda, &config)?;
    let radius = kernel.prior.radius();
    // Nodes lie in the closed ball; the boundary has measure zero, so the
    // subspace density is used without the strict ℓ1 check.
    let log_integrand = |dense: [f64; 2], k: usize| {
        let support: &[usize] = match k {
            0 => &[],
            1 if dense[1] == 0.0 => &[0],
            1 => &[1],
            _ => &[0, 1],
        };
        let lp = kernel.log_prior_by_k[k];
        if lambda == 0.0 {
            lp
        } else {
            lp - lambda * kernel.engine.rss(&dense, support) / kernel.n_terms
        }
    };

    let mut by_size = [WeightedSum::new(), WeightedSum::new(), WeightedSum::new()];
    by_size[0].add(log_integrand([0.0; 2], 0), [0.0; 2]);

    let line = trapezoid(radius, grid_step);
    for j in 0..p {
        for &(t, w) in &line {
            let mut dense = [0.0; 2];
            dense[j] = t;
            by_size[1].add(log_integrand(dense, 1) + w.ln(), dense);
        }
    }
    if p == 2 && kernel.prior.k_max() >= 2 {
        for &(t0, w0) in &line {
            let half = radius - t0.abs();
            if half <= 0.0 {
                continue;
            }
            for (t1, w1) in trapezoid(half, grid_step) {
                by_size[2].add(log_integrand([t0, t1], 2) + (w0 * w1).ln(), [t0, t1]);
            }
        }
    }
    let mut acc = WeightedSum::new();
    for part in &by_size {
        acc.merge(part);
    }
    let log_total = acc.max + acc.mass.ln();
    let support_size_probs = by_size[..=p]
        .iter()
        .map(|part| {
            if part.mass == 0.0 {
                0.0
            } else {
                (part.max + part.mass.ln() - log_total).exp()
            }
        })
        .collect();
    let mean: Vec<f64> = acc.first[..p].iter().map(|v| v / acc.mass).collect();
    Ok(GridPosterior {
        mean: SparseParam::from_dense(&mean)?,
        support_size_probs,
    })
}
