use pacgibbs_core::bounds::{
    dv_check, k_phi, kl_divergence, oracle_remainder, samson_mc_check, theorem_lambda,
    BoundInputs, BoundedFn, MixingProfile,
};
use pacgibbs_core::simulate::{InnovationSpec, ProcessSpec};
use proptest::prelude::*;

fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, len).prop_filter_map("all-zero weights", |w| {
        let total: f64 = w.iter().sum();
        (total > 1e-6).then(|| w.iter().map(|v| v / total).collect())
    })
}

fn positive_distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, len).prop_map(|w| {
        let total: f64 = w.iter().sum();
        w.iter().map(|v| v / total).collect()
    })
}

fn explicit_profile() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 0..12).prop_map(|mut v| {
        v.sort_by(|a, b| b.total_cmp(a));
        v
    })
}

fn admissible() -> impl Strategy<Value = BoundInputs> {
    (
        1usize..30,
        1usize..200,
        0.1f64..20.0,
        0.1f64..5.0,
        1.0f64..8.0,
        0.01f64..1.0,
        0.001f64..0.5,
    )
        .prop_map(|(q, p, b, bound_x, phi_q, eta_frac, epsilon)| BoundInputs {
            n: 0,
            q,
            p,
            b,
            bound_x,
            phi_q,
            eta: eta_frac * 16.0 / phi_q,
            epsilon,
            support_size: 0,
        })
}

proptest! {
    #[test]
    fn kl_is_nonnegative_and_zero_only_on_the_diagonal(rho in distribution(6), pi in positive_distribution(6)) {
        let kl = kl_divergence(&rho, &pi).unwrap();
        prop_assert!(kl >= 0.0);
        prop_assert_eq!(kl_divergence(&pi, &pi).unwrap(), 0.0);
        let gap = rho.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if gap > 1e-3 {
            prop_assert!(kl > 0.0);
        }
    }

    #[test]
    fn dv_identity_and_variational_bound(
        pi in distribution(7),
        h in prop::collection::vec(-20.0f64..20.0, 7),
        rho in distribution(7),
    ) {
        let r = dv_check(&pi, &h).unwrap();
        prop_assert!((r.lhs - r.rhs).abs() <= 1e-12 * (1.0 + r.lhs.abs()));
        prop_assert!((r.gibbs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let kl = kl_divergence(&rho, &pi).unwrap();
        if kl.is_finite() {
            let rho_h: f64 = rho.iter().zip(&h).map(|(a, b)| a * b).sum();
            prop_assert!(rho_h - kl <= r.lhs + 1e-10 * (1.0 + r.lhs.abs()));
        }
    }

    #[test]
    fn k_phi_at_least_one_and_monotone(
        values in explicit_profile(),
        n_extra in 1usize..200,
        q in 1usize..6,
        idx in 0usize..12,
        shrink in 0.0f64..1.0,
    ) {
        let n = q + n_extra;
        let full = MixingProfile::Explicit { values: values.clone(), phi0: 1.0 };
        let k = k_phi(&full, n, q).unwrap();
        prop_assert!(k >= 1.0);
        if !values.is_empty() {
            // lowering one coefficient (keeping monotonicity) cannot increase K
            let i = idx % values.len();
            let floor = values.get(i + 1).copied().unwrap_or(0.0);
            let mut lower = values.clone();
            lower[i] = floor + shrink * (values[i] - floor);
            let reduced = MixingProfile::Explicit { values: lower, phi0: 1.0 };
            prop_assert!(k_phi(&reduced, n, q).unwrap() <= k + 1e-12);
        }
    }

    #[test]
    fn lambda_round_trip(inputs in admissible(), n_extra in 1usize..100_000) {
        let inputs = BoundInputs { n: inputs.q + n_extra, ..inputs };
        let l = theorem_lambda(&inputs).unwrap();
        let back = l * 64.0 * inputs.phi_q * (2.0 + inputs.b).powi(2) * inputs.bound_x.powi(2)
            / (inputs.n - inputs.q) as f64;
        prop_assert!((back - inputs.eta).abs() <= 1e-12 * inputs.eta);
    }

    #[test]
    fn remainder_positive_and_decreasing_in_n(inputs in admissible(), support in 0usize..4) {
        // n large enough that the support cap admits |I| at the smallest n used
        let per_n = inputs.eta / (32.0 * inputs.phi_q * (2.0 + inputs.b).powi(2));
        let support = support.min(inputs.p);
        let n0 = inputs.q + ((support as f64 + 1.0) / per_n).ceil() as usize + 1;
        let mut last = f64::INFINITY;
        for n in [n0, 2 * n0, 5 * n0, 50 * n0] {
            let at = BoundInputs { n, support_size: support, ..inputs };
            let r = oracle_remainder(&at).unwrap();
            prop_assert!(r.value > 0.0);
            prop_assert!(r.value < last, "n={} value={} previous={}", n, r.value, last);
            last = r.value;
        }
    }
}

#[test]
fn small_lambda_log_mgf_is_half_the_variance_term() {
    // log E e^{λ(S - ES)} ≈ λ² Var(S)/2 = λ² N σ²/2 for independent terms
    let iid = ProcessSpec::ar(vec![], InnovationSpec::Uniform { a: 1.0 }).with_burn_in(0);
    let ident = |x: f64| x;
    let f = BoundedFn { f: &ident, bound: 1.0 };
    let report = samson_mc_check(&iid, &MixingProfile::iid(), &f, 50, &[0.05, 0.1], 100_000, 17).unwrap();
    assert_eq!(report.k, 1.0);
    assert!((report.sigma2 - 1.0 / 3.0).abs() < 0.005);
    for p in &report.points {
        let ratio = p.log_mgf / (p.lambda * p.lambda * 50.0 * report.sigma2);
        assert!((ratio - 0.5).abs() < 0.1, "λ={} ratio {ratio}", p.lambda);
        assert!(!p.violated);
    }
}
