//! Simulators for the benchmark processes.
//!
//! Trajectories start from the zero state, run `burn_in` steps that are
//! discarded, and return the next `length` values. All randomness comes from
//! [`crate::rng::stream`] on [`crate::rng::SIMULATION_STREAM`], so a
//! `(spec, length, seed)` triple always gives bit-identical output.

use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{invalid, Error, Result};
use crate::rng::{self, Rng, SIMULATION_STREAM};
use crate::series::TimeSeries;

pub const DEFAULT_BURN_IN: usize = 1000;
/// Half-width of the uniform benchmark innovation.
pub const DEFAULT_UNIFORM_A: f64 = 0.70;
/// Standard deviation of the Gaussian benchmark innovation.
pub const DEFAULT_GAUSSIAN_SIGMA: f64 = 0.4;

/// Modulus tolerance used when classifying characteristic roots.
pub const ROOT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnovationSpec {
    /// `U[-a, a]`. `a = 0` is accepted as the degenerate zero-noise case.
    Uniform { a: f64 },
    /// `N(0, sigma²)`. `sigma = 0` is likewise degenerate.
    Gaussian { sigma: f64 },
}

impl InnovationSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InnovationSpec::Uniform { a } if !(a.is_finite() && a >= 0.0) => {
                Err(invalid(format!("uniform half-width must be >= 0, got {a}")))
            }
            InnovationSpec::Gaussian { sigma } if !(sigma.is_finite() && sigma >= 0.0) => Err(
                invalid(format!("gaussian sigma must be >= 0, got {sigma}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            InnovationSpec::Uniform { a } => a * a / 3.0,
            InnovationSpec::Gaussian { sigma } => sigma * sigma,
        }
    }

    /// Short name used in configuration and CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            InnovationSpec::Uniform { .. } => "uniform",
            InnovationSpec::Gaussian { .. } => "gaussian",
        }
    }

    fn sampler(&self) -> Result<Innovations> {
        self.validate()?;
        Ok(match *self {
            InnovationSpec::Uniform { a } if a == 0.0 => Innovations::Zero,
            InnovationSpec::Gaussian { sigma } if sigma == 0.0 => Innovations::Zero,
            InnovationSpec::Uniform { a } => Innovations::Uniform(
                Uniform::new_inclusive(-a, a).map_err(|e| invalid(e.to_string()))?,
            ),
            InnovationSpec::Gaussian { sigma } => {
                Innovations::Gaussian(Normal::new(0.0, sigma).map_err(|e| invalid(e.to_string()))?)
            }
        })
    }
}

enum Innovations {
    Zero,
    Uniform(Uniform<f64>),
    Gaussian(Normal<f64>),
}

impl Innovations {
    fn draw(&self, rng: &mut Rng) -> f64 {
        match self {
            Innovations::Zero => 0.0,
            Innovations::Uniform(d) => d.sample(rng),
            Innovations::Gaussian(d) => d.sample(rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProcessKind {
    /// `X_t = Σ_j a_j X_{t-j} + ε_t`.
    Ar(Vec<f64>),
    /// `X_t = ε_t + Σ_j b_j ε_{t-j}`.
    Ma(Vec<f64>),
    /// `X_t = cos(X_{t-1}) sin(X_{t-2}) + ε_t`.
    CosSin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub innovation: InnovationSpec,
    pub burn_in: usize,
}

impl ProcessSpec {
    pub fn ar(coeffs: Vec<f64>, innovation: InnovationSpec) -> Self {
        Self {
            kind: ProcessKind::Ar(coeffs),
            innovation,
            burn_in: DEFAULT_BURN_IN,
        }
    }

    pub fn ma(coeffs: Vec<f64>, innovation: InnovationSpec) -> Self {
        Self {
            kind: ProcessKind::Ma(coeffs),
            innovation,
            burn_in: DEFAULT_BURN_IN,
        }
    }

    pub fn cos_sin(innovation: InnovationSpec) -> Self {
        Self {
            kind: ProcessKind::CosSin,
            innovation,
            burn_in: DEFAULT_BURN_IN,
        }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.innovation.validate()?;
        match &self.kind {
            ProcessKind::Ar(a) => {
                if a.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("AR coefficients must be finite"));
                }
                if stationarity_check(a) == Stationarity::NonStationary {
                    return Err(Error::NonStationary(a.clone()));
                }
            }
            ProcessKind::Ma(b) => {
                if b.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("MA coefficients must be finite"));
                }
            }
            ProcessKind::CosSin => {}
        }
        Ok(())
    }
}

/// The three benchmark models of the simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BenchmarkModel {
    /// `X_t = 0.5 X_{t-1} + 0.1 X_{t-2} + ε_t`
    Ar2,
    /// `X_t = 0.6 X_{t-4} + 0.1 X_{t-8} + ε_t`
    SparseAr8,
    /// `X_t = cos(X_{t-1}) sin(X_{t-2}) + ε_t`
    CosSin,
}

impl BenchmarkModel {
    pub const ALL: [BenchmarkModel; 3] = [Self::Ar2, Self::SparseAr8, Self::CosSin];

    /// Name used in configuration files and CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ar2 => "align1",
            Self::SparseAr8 => "align2",
            Self::CosSin => "align3",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn spec(&self, innovation: InnovationSpec) -> ProcessSpec {
        match self {
            Self::Ar2 => ProcessSpec::ar(vec![0.5, 0.1], innovation),
            Self::SparseAr8 => {
                ProcessSpec::ar(vec![0.0, 0.0, 0.0, 0.6, 0.0, 0.0, 0.0, 0.1], innovation)
            }
            Self::CosSin => ProcessSpec::cos_sin(innovation),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stationarity {
    Stationary,
    NonStationary,
}

/// Classifies `1 - Σ a_j z^j`: stationary iff every root has `|z| > 1`.
///
/// Uses the step-down (Schur–Cohn) recursion: the roots lie outside the closed
/// unit disk iff every reflection coefficient has modulus below one, here
/// `< 1 - ROOT_TOLERANCE`.
pub fn stationarity_check(coeffs: &[f64]) -> Stationarity {
    let mut a = coeffs.to_vec();
    while let Some(&k) = a.last() {
        if !k.is_finite() || k.abs() >= 1.0 - ROOT_TOLERANCE {
            return Stationarity::NonStationary;
        }
        let m = a.len() - 1;
        let denom = 1.0 - k * k;
        a = (0..m).map(|j| (a[j] + k * a[m - 1 - j]) / denom).collect();
    }
    Stationarity::Stationary
}

/// Simulates `length` values after `spec.burn_in` discarded steps.
pub fn simulate(spec: &ProcessSpec, length: usize, seed: u64) -> Result<TimeSeries> {
    let mut rng = rng::stream(seed, SIMULATION_STREAM);
    simulate_with(spec, length, &mut rng)
}

pub fn simulate_with(spec: &ProcessSpec, length: usize, rng: &mut Rng) -> Result<TimeSeries> {
    if length == 0 {
        return Err(invalid("simulation length must be at least 1"));
    }
    spec.validate()?;
    let innovations = spec.innovation.sampler()?;
    let total = spec.burn_in + length;

    // Zero pre-sample history; `lag(t, j)` reads X_{t-j} with zeros before t = 0.
    let mut x = Vec::with_capacity(total);
    let lag = |x: &[f64], t: usize, j: usize| if t >= j { x[t - j] } else { 0.0 };
    match &spec.kind {
        ProcessKind::Ar(a) => {
            for t in 0..total {
                let mean: f64 = a.iter().enumerate().map(|(j, aj)| aj * lag(&x, t, j + 1)).sum();
                x.push(mean + innovations.draw(rng));
            }
        }
        ProcessKind::Ma(b) => {
            let mut eps = Vec::with_capacity(total);
            for t in 0..total {
                eps.push(innovations.draw(rng));
                let v = eps[t]
                    + b.iter()
                        .enumerate()
                        .map(|(j, bj)| bj * lag(&eps, t, j + 1))
                        .sum::<f64>();
                x.push(v);
            }
        }
        ProcessKind::CosSin => {
            for t in 0..total {
                let v = lag(&x, t, 1).cos() * lag(&x, t, 2).sin() + innovations.draw(rng);
                x.push(v);
            }
        }
    }
    TimeSeries::new(x.split_off(spec.burn_in))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn autocorr(x: &[f64], lag: usize) -> f64 {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let c0: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        let ck: f64 = (0..n - lag).map(|i| (x[i] - mean) * (x[i + lag] - mean)).sum();
        ck / c0
    }

    #[test]
    fn stationarity_examples() {
        assert_eq!(stationarity_check(&[0.5, 0.1]), Stationarity::Stationary);
        assert_eq!(stationarity_check(&[1.0]), Stationarity::NonStationary);
        assert_eq!(
            stationarity_check(&[0.0, 0.0, 0.0, 0.6, 0.0, 0.0, 0.0, 0.1]),
            Stationarity::Stationary
        );
        assert_eq!(stationarity_check(&[-1.0]), Stationarity::NonStationary);
        assert_eq!(stationarity_check(&[0.5, 0.5]), Stationarity::NonStationary);
        assert_eq!(stationarity_check(&[1.2, -0.5]), Stationarity::Stationary);
        assert_eq!(stationarity_check(&[0.0, 0.0]), Stationarity::Stationary);
    }

    fn from_real_roots(roots: &[f64]) -> Vec<f64> {
        // Π (1 - z/r) = 1 - Σ a_j z^j
        let mut poly = vec![1.0];
        for r in roots {
            let mut next = vec![0.0; poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c / r;
            }
            poly = next;
        }
        poly[1..].iter().map(|c| -c).collect()
    }

    #[test]
    fn stationarity_from_known_roots() {
        let outside = from_real_roots(&[1.01, -1.5, 3.0, -1.001]);
        assert_eq!(stationarity_check(&outside), Stationarity::Stationary);
        let inside = from_real_roots(&[1.5, -0.99, 4.0]);
        assert_eq!(stationarity_check(&inside), Stationarity::NonStationary);
        let on = from_real_roots(&[2.0, -1.0]);
        assert_eq!(stationarity_check(&on), Stationarity::NonStationary);
    }

    #[test]
    fn benchmark_models_have_documented_roots() {
        // 1 - 0.6 z^4 - 0.1 z^8 = 0  <=>  u = z^4 solves 0.1u² + 0.6u - 1 = 0.
        let u = (-0.6 + (0.36f64 + 0.4).sqrt()) / 0.2;
        assert!(u.powf(0.25) > 1.0);
        for m in BenchmarkModel::ALL {
            m.spec(InnovationSpec::Uniform { a: 0.7 }).validate().unwrap();
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        let u = InnovationSpec::Uniform { a: 0.7 };
        assert!(matches!(
            simulate(&ProcessSpec::ar(vec![1.0], u), 10, 1),
            Err(Error::NonStationary(_))
        ));
        let bad = InnovationSpec::Gaussian { sigma: -1.0 };
        assert!(simulate(&ProcessSpec::cos_sin(bad), 10, 1).is_err());
        assert!(simulate(&ProcessSpec::cos_sin(u), 0, 1).is_err());
    }

    #[test]
    fn zero_innovation_ar_is_zero() {
        let spec = ProcessSpec::ar(vec![0.5], InnovationSpec::Uniform { a: 0.0 });
        let s = simulate(&spec, 50, 99).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = BenchmarkModel::CosSin.spec(InnovationSpec::Gaussian { sigma: 0.4 });
        assert_eq!(simulate(&spec, 200, 3).unwrap(), simulate(&spec, 200, 3).unwrap());
        assert_ne!(simulate(&spec, 200, 3).unwrap(), simulate(&spec, 200, 4).unwrap());
    }

    #[test]
    fn burn_in_is_discarded() {
        let u = InnovationSpec::Uniform { a: 0.7 };
        let long = simulate(&ProcessSpec::ar(vec![0.5], u).with_burn_in(0), 30, 8).unwrap();
        let short = simulate(&ProcessSpec::ar(vec![0.5], u).with_burn_in(10), 20, 8).unwrap();
        assert_eq!(&long.values()[10..], short.values());
    }

    #[test]
    fn ar1_gaussian_variance() {
        let spec = ProcessSpec::ar(vec![0.5], InnovationSpec::Gaussian { sigma: 0.4 });
        let s = simulate(&spec, 100_000, 11).unwrap();
        let target = 0.16 / (1.0 - 0.25);
        assert!((s.var_emp() / target - 1.0).abs() < 0.05, "{}", s.var_emp());
    }

    #[test]
    fn ma2_uniform_variance_and_dependence() {
        let (b1, b2, a) = (0.6, -0.3, 0.7);
        let spec = ProcessSpec::ma(vec![b1, b2], InnovationSpec::Uniform { a });
        let s = simulate(&spec, 100_000, 12).unwrap();
        let target = (1.0 + b1 * b1 + b2 * b2) * a * a / 3.0;
        assert!((s.var_emp() / target - 1.0).abs() < 0.05);
        let band = 4.0 / (s.len() as f64).sqrt();
        for lag in 3..8 {
            assert!(autocorr(s.values(), lag).abs() < band, "lag {lag}");
        }
        assert!(autocorr(s.values(), 1).abs() > band);
    }

    #[test]
    fn uniform_processes_are_bounded() {
        let a = 0.7;
        let u = InnovationSpec::Uniform { a };
        for (model, envelope) in [
            (BenchmarkModel::Ar2, a / (1.0 - 0.6)),
            (BenchmarkModel::SparseAr8, a / (1.0 - 0.7)),
            (BenchmarkModel::CosSin, 1.0 + a),
        ] {
            let s = simulate(&model.spec(u), 20_000, 5).unwrap();
            assert!(s.b_emp() <= envelope, "{model:?}: {}", s.b_emp());
        }
    }
}
