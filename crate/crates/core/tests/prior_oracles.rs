//! Quadrature and Monte Carlo oracles for the sparsity prior.

use pacgibbs_core::prior::{
    l1_ball_log_volume, log_prior_density, sample_l1_ball, sample_prior, PriorSpec,
};
use pacgibbs_core::rng;
use pacgibbs_core::SparseParam;
use rand::Rng as _;

/// Midpoint rule (even cell count) over the `k`-dimensional subspaces of a `p <= 2` prior, the
/// atom at zero included. Returns `∫ h dπ`.
fn integrate(spec: &PriorSpec, m: usize, h: impl Fn(&[f64]) -> f64) -> f64 {
    let p = spec.p();
    let r = spec.radius();
    let step = 2.0 * r / m as f64;
    let nodes: Vec<f64> = (0..m).map(|i| -r + (i as f64 + 0.5) * step).collect();
    let dens = |theta: &[f64]| {
        log_prior_density(&SparseParam::from_dense(theta).unwrap(), spec)
            .unwrap()
            .exp()
    };
    let mut total = dens(&vec![0.0; p]) * h(&vec![0.0; p]);
    for j in 0..p {
        for &t in &nodes {
            let mut v = vec![0.0; p];
            v[j] = t;
            total += dens(&v) * h(&v) * step;
        }
    }
    if p == 2 && spec.k_max() == 2 {
        // With an even cell count the diamond's edges run along cell diagonals:
        // a cell is inside, outside, or cut in half with its midpoint on the edge.
        for &a in &nodes {
            for &b in &nodes {
                let v = [a, b];
                let w = if (a.abs() + b.abs() - r).abs() < 1e-9 * r {
                    let shrunk = [a * (1.0 - 1e-9), b * (1.0 - 1e-9)];
                    0.5 * dens(&shrunk)
                } else {
                    dens(&v)
                };
                total += w * h(&v) * step * step;
            }
        }
    }
    total
}

#[test]
fn density_integrates_to_one() {
    for (p, k_max, b) in [(1, 1, 1.0), (2, 1, 0.5), (2, 2, 1.0), (2, 2, 3.0)] {
        let spec = PriorSpec::new(p, b, k_max).unwrap();
        let total = integrate(&spec, 2000, |_| 1.0);
        assert!((total - 1.0).abs() < 1e-6, "p={p} k_max={k_max} b={b}: {total}");
    }
}

#[test]
fn sampler_agrees_with_quadrature() {
    let spec = PriorSpec::new(2, 1.0, 2).unwrap();
    let h = |t: &[f64]| t[0] * t[0] + (t[1] > 0.5) as u8 as f64;
    let exact = integrate(&spec, 2000, h);
    let mut r = rng::stream(11, rng::MONTE_CARLO_STREAM);
    let n = 200_000;
    let draws: Vec<f64> = (0..n).map(|_| h(&sample_prior(&spec, &mut r).to_dense())).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let sd = (draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    assert!(
        (mean - exact).abs() < 4.0 * sd / (n as f64).sqrt(),
        "MC {mean} vs quadrature {exact}"
    );
}

#[test]
fn empty_support_frequency() {
    let spec = PriorSpec::new(20, 10.0, 20).unwrap();
    let expected = spec.log_size_weight(0).exp();
    let n = 100_000;
    let mut r = rng::stream(5, rng::MONTE_CARLO_STREAM);
    let zeros = (0..n)
        .filter(|_| sample_prior(&spec, &mut r).support_size() == 0)
        .count();
    let freq = zeros as f64 / n as f64;
    let sd = (expected * (1.0 - expected) / n as f64).sqrt();
    assert!((freq - expected).abs() < 3.0 * sd, "{freq} vs {expected}");
}

#[test]
fn one_dimensional_draws_are_uniform() {
    let spec = PriorSpec::new(1, 2.0, 1).unwrap();
    let r_max = spec.radius();
    let mut r = rng::stream(8, rng::MONTE_CARLO_STREAM);
    let mut xs = Vec::new();
    while xs.len() < 10_000 {
        let t = sample_prior(&spec, &mut r);
        if t.support_size() == 1 {
            xs.push(t.coeffs()[0]);
        }
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = (x + r_max) / (2.0 * r_max);
            (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
        })
        .fold(0.0, f64::max);
    // asymptotic 1% critical value
    assert!(ks < 1.628 / n.sqrt(), "KS statistic {ks}");
}

#[test]
fn ball_volume_hit_or_miss() {
    let mut r = rng::stream(21, rng::MONTE_CARLO_STREAM);
    for (k, radius) in [(1usize, 1.0f64), (2, 1.0), (2, 1.7), (3, 2.0), (3, 0.5)] {
        let n = 400_000;
        let hits = (0..n)
            .filter(|_| {
                (0..k)
                    .map(|_| r.random_range(-radius..radius).abs())
                    .sum::<f64>()
                    < radius
            })
            .count();
        let mc = (2.0 * radius).powi(k as i32) * hits as f64 / n as f64;
        let exact = l1_ball_log_volume(k, radius).exp();
        assert!((mc / exact - 1.0).abs() < 0.01, "k={k} R={radius}: {mc} vs {exact}");
    }
}

#[test]
fn ball_sampler_fills_the_ball_uniformly() {
    // P(‖θ‖₁ < R/2) = 2^{-k} under the uniform law
    let mut r = rng::stream(3, rng::MONTE_CARLO_STREAM);
    for k in 1..=4usize {
        let n = 100_000;
        let inner = (0..n)
            .filter(|_| sample_l1_ball(&mut r, k, 3.0).iter().map(|v| v.abs()).sum::<f64>() < 1.5)
            .count() as f64
            / n as f64;
        let p = 0.5f64.powi(k as i32);
        assert!((inner - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "k={k}: {inner}");
    }
}
