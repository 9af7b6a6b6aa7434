//! Flat `key=value` configuration files.
//!
//! One entry per line, `#` starts a comment, keys carry a section prefix such
//! as `sampler.n_iter`. Every key must be consumed by the command reading the
//! file; leftovers are reported as unknown.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use pacgibbs_core::baselines::ArMethod;
use pacgibbs_core::sampler::{MoveProbs, SamplerConfig, Temperature};
use pacgibbs_core::simulate::{
    BenchmarkModel, InnovationSpec, DEFAULT_BURN_IN, DEFAULT_GAUSSIAN_SIGMA, DEFAULT_UNIFORM_A,
};

use crate::error::{invalid, CliResult};

#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    entries: BTreeMap<String, (usize, String)>,
}

impl KvConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key=value, got {raw:?}", i + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(invalid(format!("line {}: empty key", i + 1)));
            }
            if entries
                .insert(key.to_string(), (i + 1, value.trim().to_string()))
                .is_some()
            {
                return Err(invalid(format!("line {}: duplicate key {key}", i + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn load_opt(path: Option<&Path>) -> CliResult<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn take_str(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(_, v)| v)
    }

    pub fn take<T: FromStr>(&mut self, key: &str) -> CliResult<Option<T>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| invalid(format!("line {line}: cannot parse {key}={v}"))),
        }
    }

    pub fn take_list<T: FromStr>(&mut self, key: &str) -> CliResult<Option<Vec<T>>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| invalid(format!("line {line}: cannot parse {key}={v}")))
                })
                .collect::<CliResult<Vec<T>>>()
                .map(Some),
        }
    }

    /// Errors if any key was not consumed.
    pub fn finish(self) -> CliResult<()> {
        match self.entries.iter().next() {
            None => Ok(()),
            Some((k, (line, _))) => Err(invalid(format!("line {line}: unknown key {k}"))),
        }
    }
}

/// Reads `sampler.*` overrides on top of the defaults.
pub fn sampler_config(kv: &mut KvConfig) -> CliResult<SamplerConfig> {
    let mut c = SamplerConfig::default();
    if let Some(l) = kv.take_str("sampler.lambda") {
        c.lambda = if l == "heuristic" {
            Temperature::Heuristic
        } else {
            Temperature::Fixed(
                l.parse()
                    .map_err(|_| invalid(format!("sampler.lambda: expected number or heuristic, got {l}")))?,
            )
        };
    }
    if let Some(b) = kv.take("sampler.b")? {
        c.b = b;
    }
    if let Some(v) = kv.take("sampler.n_iter")? {
        c.n_iter = v;
    }
    if let Some(v) = kv.take("sampler.n_burn")? {
        c.n_burn = v;
    }
    if let Some(v) = kv.take("sampler.update_step")? {
        c.update_step = Some(v);
    }
    if let Some(v) = kv.take("sampler.birth_proposal_scale")? {
        c.birth_proposal_scale = v;
    }
    if let Some(v) = kv.take("sampler.thin")? {
        c.thin = v;
    }
    let birth = kv.take("sampler.move_birth")?;
    let death = kv.take("sampler.move_death")?;
    let update = kv.take("sampler.move_update")?;
    if birth.is_some() || death.is_some() || update.is_some() {
        let d = MoveProbs::default();
        c.move_probs = MoveProbs {
            birth: birth.unwrap_or(d.birth),
            death: death.unwrap_or(d.death),
            update: update.unwrap_or(d.update),
        };
    }
    c.validate()?;
    Ok(c)
}

pub fn baseline_method(kv: &mut KvConfig) -> CliResult<ArMethod> {
    match kv.take_str("baseline.method") {
        None => Ok(DEFAULT_BASELINE),
        Some(m) => ArMethod::from_name(&m)
            .ok_or_else(|| invalid(format!("baseline.method: unknown method {m}"))),
    }
}

/// Yule–Walker, the estimator behind R's `ar()`.
pub const DEFAULT_BASELINE: ArMethod = ArMethod::YuleWalker;

pub fn innovation(kv: &mut KvConfig, name: &str) -> CliResult<InnovationSpec> {
    let spec = match name {
        "uniform" => InnovationSpec::Uniform {
            a: kv.take("innovation.uniform.a")?.unwrap_or(DEFAULT_UNIFORM_A),
        },
        "gaussian" => InnovationSpec::Gaussian {
            sigma: kv
                .take("innovation.gaussian.sigma")?
                .unwrap_or(DEFAULT_GAUSSIAN_SIGMA),
        },
        other => return Err(invalid(format!("unknown innovation {other}"))),
    };
    spec.validate()?;
    Ok(spec)
}

pub fn model(name: &str) -> CliResult<BenchmarkModel> {
    BenchmarkModel::from_name(name).ok_or_else(|| {
        invalid(format!(
            "unknown model {name} (expected align1, align2 or align3)"
        ))
    })
}

pub const DEFAULT_Q: usize = 20;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub models: Vec<BenchmarkModel>,
    pub innovations: Vec<InnovationSpec>,
    pub n_values: Vec<usize>,
    pub replications: usize,
    pub q: usize,
    pub burn_in: usize,
    pub sampler: SamplerConfig,
    pub baseline: ArMethod,
    pub master_seed: u64,
    /// When false, `wall_ms` is written as 0 so outputs are byte-reproducible.
    pub record_wall_ms: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            models: BenchmarkModel::ALL.to_vec(),
            innovations: vec![
                InnovationSpec::Uniform {
                    a: DEFAULT_UNIFORM_A,
                },
                InnovationSpec::Gaussian {
                    sigma: DEFAULT_GAUSSIAN_SIGMA,
                },
            ],
            n_values: vec![100, 1000],
            replications: 20,
            q: DEFAULT_Q,
            burn_in: DEFAULT_BURN_IN,
            sampler: SamplerConfig::default(),
            baseline: DEFAULT_BASELINE,
            master_seed: 0,
            record_wall_ms: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_kv(mut kv: KvConfig) -> CliResult<Self> {
        let d = Self::default();
        let models = match kv.take_list::<String>("experiment.models")? {
            None => d.models,
            Some(names) => names.iter().map(|m| model(m)).collect::<CliResult<_>>()?,
        };
        let innovation_names = kv
            .take_list::<String>("experiment.innovations")?
            .unwrap_or_else(|| vec!["uniform".into(), "gaussian".into()]);
        let mut innovations = Vec::new();
        for name in &innovation_names {
            innovations.push(innovation(&mut kv, name)?);
        }
        // parameters of an innovation not listed are still accepted
        kv.take_str("innovation.uniform.a");
        kv.take_str("innovation.gaussian.sigma");
        let config = Self {
            models,
            innovations,
            n_values: kv.take_list("experiment.n_values")?.unwrap_or(d.n_values),
            replications: kv.take("experiment.replications")?.unwrap_or(d.replications),
            q: kv.take("experiment.q")?.unwrap_or(d.q),
            burn_in: kv.take("experiment.burn_in")?.unwrap_or(d.burn_in),
            master_seed: kv.take("experiment.master_seed")?.unwrap_or(d.master_seed),
            record_wall_ms: kv
                .take("experiment.record_wall_ms")?
                .unwrap_or(d.record_wall_ms),
            sampler: sampler_config(&mut kv)?,
            baseline: baseline_method(&mut kv)?,
        };
        kv.finish()?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.models.is_empty() || self.innovations.is_empty() || self.n_values.is_empty() {
            return Err(invalid("models, innovations and n_values must be non-empty"));
        }
        if self.replications == 0 {
            return Err(invalid("experiment.replications must be at least 1"));
        }
        if self.q == 0 {
            return Err(invalid("experiment.q must be at least 1"));
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n <= self.q + 1) {
            return Err(invalid(format!(
                "n = {n} leaves too few targets for q = {}",
                self.q
            )));
        }
        for m in &self.models {
            for i in &self.innovations {
                m.spec(*i).validate()?;
            }
        }
        self.sampler.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_sections() {
        let mut kv = KvConfig::parse("# header\nsampler.n_iter = 500 # inline\n\nexperiment.q=5\n").unwrap();
        assert_eq!(kv.take::<usize>("sampler.n_iter").unwrap(), Some(500));
        assert_eq!(kv.take::<usize>("experiment.q").unwrap(), Some(5));
        kv.finish().unwrap();
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(KvConfig::parse("novalue\n").is_err());
        assert!(KvConfig::parse("a=1\na=2\n").is_err());
        assert!(KvConfig::parse("=3\n").is_err());
        let kv = KvConfig::parse("mystery.key=1\n").unwrap();
        assert!(kv.finish().unwrap_err().to_string().contains("mystery.key"));
    }

    #[test]
    fn experiment_defaults() {
        let c = ExperimentConfig::from_kv(KvConfig::default()).unwrap();
        assert_eq!(c.models.len(), 3);
        assert_eq!(c.innovations.len(), 2);
        assert_eq!(c.n_values, vec![100, 1000]);
        assert_eq!(c.replications, 20);
        assert_eq!(c.q, 20);
        assert_eq!(c.sampler.b, 10.0);
    }

    #[test]
    fn experiment_overrides() {
        let kv = KvConfig::parse(
            "experiment.models=align2\nexperiment.innovations=gaussian\n\
             innovation.gaussian.sigma=0.5\nexperiment.n_values=50\n\
             sampler.lambda=3.5\nsampler.move_birth=0.25\nsampler.move_death=0.25\n\
             sampler.move_update=0.5\nbaseline.method=ols\n",
        )
        .unwrap();
        let c = ExperimentConfig::from_kv(kv).unwrap();
        assert_eq!(c.models, vec![BenchmarkModel::SparseAr8]);
        assert_eq!(c.innovations, vec![InnovationSpec::Gaussian { sigma: 0.5 }]);
        assert_eq!(c.sampler.lambda, Temperature::Fixed(3.5));
        assert_eq!(c.sampler.move_probs.update, 0.5);
        assert_eq!(c.baseline, ArMethod::LeastSquares);
    }

    #[test]
    fn experiment_rejects_invalid() {
        for text in [
            "experiment.replications=0\n",
            "experiment.models=align9\n",
            "experiment.n_values=21\n",
            "sampler.n_burn=30000\n",
            "innovation.uniform.a=-1\n",
            "baseline.method=burg\n",
        ] {
            let kv = KvConfig::parse(text).unwrap();
            assert!(ExperimentConfig::from_kv(kv).is_err(), "{text}");
        }
    }
}
