//! `simulate`, `fit` and `bounds`.

use std::fmt::Write as _;
use std::path::Path;

use pacgibbs_core::baselines::{fit_order, select_order, ArFit, ArMethod};
use pacgibbs_core::bounds::{oracle_remainder, sparse_oracle_bound, theorem_lambda, BoundInputs};
use pacgibbs_core::sampler::{fit_gibbs, Temperature};
use pacgibbs_core::simulate::{simulate, DEFAULT_BURN_IN};
use pacgibbs_core::{empirical_risk, BasisKind, PredictorBasis, TimeSeries};

use crate::config::{self, KvConfig, DEFAULT_Q};
use crate::error::{invalid, CliResult};

pub const SERIES_HEADER: &str = "index,value";

pub fn series_to_csv(series: &TimeSeries) -> String {
    let mut out = String::with_capacity(series.len() * 24);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for (i, v) in series.values().iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, v);
    }
    out
}

pub fn series_from_csv(text: &str) -> CliResult<TimeSeries> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == SERIES_HEADER => {}
        other => {
            return Err(invalid(format!(
                "series header must be {SERIES_HEADER:?}, got {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (_, v) = line
            .split_once(',')
            .ok_or_else(|| invalid(format!("row {}: expected index,value", i + 2)))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| invalid(format!("row {}: bad value {v:?}", i + 2)))?;
        values.push(v);
    }
    Ok(TimeSeries::new(values)?)
}

pub fn read_series(path: &Path) -> CliResult<TimeSeries> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read series {}: {e}", path.display())))?;
    series_from_csv(&text)
}

#[derive(Debug, Clone, Default)]
pub struct SimulateArgs {
    pub model: Option<String>,
    pub innovation: Option<String>,
    pub length: Option<usize>,
    pub seed: Option<u64>,
}

/// Keys: `simulate.model`, `simulate.innovation`, `simulate.length`,
/// `simulate.burn_in`, `simulate.seed` and the `innovation.*` parameters.
/// Command-line values take precedence.
pub fn cmd_simulate(mut kv: KvConfig, args: &SimulateArgs) -> CliResult<String> {
    let model_name = args
        .model
        .clone()
        .or(kv.take_str("simulate.model"))
        .unwrap_or_else(|| "align1".into());
    let innov_name = args
        .innovation
        .clone()
        .or(kv.take_str("simulate.innovation"))
        .unwrap_or_else(|| "uniform".into());
    let length = match args.length {
        Some(l) => {
            kv.take_str("simulate.length");
            l
        }
        None => kv
            .take("simulate.length")?
            .ok_or_else(|| invalid("simulation length missing (--length or simulate.length)"))?,
    };
    let config_seed = kv.take("simulate.seed")?;
    let seed = args.seed.or(config_seed).unwrap_or(0);
    let burn_in = kv.take("simulate.burn_in")?.unwrap_or(DEFAULT_BURN_IN);
    let model = config::model(&model_name)?;
    let innovation = config::innovation(&mut kv, &innov_name)?;
    kv.finish()?;
    let spec = model.spec(innovation).with_burn_in(burn_in);
    let series = simulate(&spec, length, seed)?;
    Ok(series_to_csv(&series))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    Gibbs,
    Aic,
    Full,
}

impl FitMethod {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "gibbs" => Some(FitMethod::Gibbs),
            "aic" => Some(FitMethod::Aic),
            "full" => Some(FitMethod::Full),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FitMethod::Gibbs => "gibbs",
            FitMethod::Aic => "aic",
            FitMethod::Full => "full",
        }
    }
}

fn write_ar_report(out: &mut String, fit: &ArFit) {
    let _ = writeln!(out, "estimator={}", fit.method.name());
    let _ = writeln!(out, "order={}", fit.order);
    let _ = writeln!(out, "aic={}", fit.aic);
    let _ = writeln!(out, "intercept={}", fit.intercept);
    for (j, a) in fit.coeffs.iter().enumerate() {
        let _ = writeln!(out, "coeff.{}={}", j + 1, a);
    }
}

/// Fits one estimator and renders a `key=value` report.
///
/// Keys: `fit.q` (default 20), `fit.seed`, the `sampler.*` overrides for
/// Gibbs and `baseline.method` for the AR baselines.
pub fn cmd_fit(
    mut kv: KvConfig,
    series: &TimeSeries,
    method: FitMethod,
    seed: Option<u64>,
) -> CliResult<String> {
    let q: usize = kv.take("fit.q")?.unwrap_or(DEFAULT_Q);
    let config_seed = kv.take("fit.seed")?;
    let mut sampler = config::sampler_config(&mut kv)?;
    let baseline = config::baseline_method(&mut kv)?;
    kv.finish()?;
    if series.len() <= q {
        return Err(invalid(format!(
            "series of length {} is too short for q = {q}",
            series.len()
        )));
    }

    let mut out = String::new();
    let _ = writeln!(out, "method={}", method.name());
    let _ = writeln!(out, "n={}", series.len());
    let _ = writeln!(out, "q={q}");
    match method {
        FitMethod::Gibbs => {
            sampler.seed = seed.or(config_seed).unwrap_or(0);
            let basis = PredictorBasis::new(BasisKind::ArLinear, q)?;
            let fit = fit_gibbs(series, &basis, &sampler)?;
            let risk = empirical_risk(series, &basis, &fit.theta)?;
            let acc = fit.diagnostics.accept;
            let _ = writeln!(out, "seed={}", sampler.seed);
            let _ = writeln!(out, "b={}", fit.b);
            let _ = writeln!(
                out,
                "lambda_source={}",
                match sampler.lambda {
                    Temperature::Heuristic => "heuristic",
                    Temperature::Fixed(_) => "fixed",
                }
            );
            let _ = writeln!(out, "lambda={}", fit.lambda);
            let _ = writeln!(out, "n_iter={}", sampler.n_iter);
            let _ = writeln!(out, "n_burn={}", sampler.n_burn);
            let _ = writeln!(out, "train_risk={}", risk.empirical_risk);
            let _ = writeln!(out, "accept.birth={}", acc.birth.rate());
            let _ = writeln!(out, "accept.death={}", acc.death.rate());
            let _ = writeln!(out, "accept.update={}", acc.update.rate());
            let _ = writeln!(out, "mean_support_size={}", fit.diagnostics.mean_support_size);
            let _ = writeln!(out, "support_size={}", fit.theta.support_size());
            for (j, v) in fit.theta.iter() {
                let _ = writeln!(out, "coeff.{}={}", j + 1, v);
            }
        }
        FitMethod::Aic | FitMethod::Full => {
            let fit = if method == FitMethod::Aic {
                select_order(series, q, q, baseline)?
            } else {
                fit_order(series, q, q, baseline)?
            };
            let _ = writeln!(out, "train_risk={}", fit.rss / fit.n_eff as f64);
            write_ar_report(&mut out, &fit);
        }
    }
    Ok(out)
}

/// Reads `BoundInputs` from bare keys (`n`, `q`, `p`, `b`, `B`, `Phi_q`, `eta`,
/// `epsilon`, `support_size`), optionally prefixed with `bounds.`.
pub fn bound_inputs(mut kv: KvConfig) -> CliResult<BoundInputs> {
    fn get<T: std::str::FromStr>(kv: &mut KvConfig, key: &str) -> CliResult<T> {
        let bare = kv.take(key)?;
        let prefixed = kv.take(&format!("bounds.{key}"))?;
        bare.or(prefixed)
            .ok_or_else(|| invalid(format!("missing bound input {key}")))
    }
    let inputs = BoundInputs {
        n: get(&mut kv, "n")?,
        q: get(&mut kv, "q")?,
        p: get(&mut kv, "p")?,
        b: get(&mut kv, "b")?,
        bound_x: get(&mut kv, "B")?,
        phi_q: get(&mut kv, "Phi_q")?,
        eta: get(&mut kv, "eta")?,
        epsilon: get(&mut kv, "epsilon")?,
        support_size: get(&mut kv, "support_size")?,
    };
    kv.finish()?;
    Ok(inputs)
}

pub fn cmd_bounds(kv: KvConfig) -> CliResult<String> {
    let inputs = bound_inputs(kv)?;
    let lambda = theorem_lambda(&inputs)?;
    let r = oracle_remainder(&inputs)?;
    let sparse = sparse_oracle_bound(&inputs, inputs.support_size)?;
    let mut out = String::new();
    let _ = writeln!(out, "lambda={lambda}");
    let _ = writeln!(out, "remainder={}", r.value);
    let _ = writeln!(out, "envelope={}", r.envelope);
    let _ = writeln!(out, "support_term={}", r.support_term);
    let _ = writeln!(out, "confidence_term={}", r.confidence_term);
    let _ = writeln!(out, "approximation_factor={}", r.approximation_factor);
    let _ = writeln!(out, "support_cap={}", inputs.support_cap());
    let _ = writeln!(out, "sparse_bound={sparse}");
    Ok(out)
}

/// Method names accepted by `--method` for `fit`.
pub fn parse_fit_method(name: &str) -> CliResult<FitMethod> {
    FitMethod::from_name(name)
        .ok_or_else(|| invalid(format!("unknown fit method {name} (gibbs, aic, full)")))
}

pub fn parse_baseline(name: &str) -> CliResult<ArMethod> {
    ArMethod::from_name(name).ok_or_else(|| invalid(format!("unknown baseline method {name}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let s = TimeSeries::new(vec![0.25, -1.5, 3.0e-7]).unwrap();
        let text = series_to_csv(&s);
        assert!(text.starts_with("index,value\n1,0.25\n"));
        assert_eq!(series_from_csv(&text).unwrap(), s);
    }

    #[test]
    fn malformed_csv() {
        assert!(series_from_csv("i,v\n1,2\n").is_err());
        assert!(series_from_csv("index,value\n1;2\n").is_err());
        assert!(series_from_csv("index,value\n1,abc\n").is_err());
        assert!(series_from_csv("index,value\n").is_err());
    }

    #[test]
    fn bounds_example() {
        let kv = KvConfig::parse(
            "n=1000\nq=20\np=20\nb=1\nB=1\nPhi_q=2\neta=1\nepsilon=0.05\nsupport_size=1\n",
        )
        .unwrap();
        let out = cmd_bounds(kv).unwrap();
        assert!(out.contains(&format!("lambda={}\n", 980.0 / 1152.0)));
        let over = KvConfig::parse(
            "n=1000\nq=20\np=20\nb=1\nB=1\nPhi_q=2\neta=9\nepsilon=0.05\nsupport_size=1\n",
        )
        .unwrap();
        let err = cmd_bounds(over).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("eta <= 16/Phi(q)"));
    }
}
