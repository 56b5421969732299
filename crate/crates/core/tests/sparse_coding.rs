mod common;

use common::*;
use proptest::prelude::*;
use sparse_denoise::sparse_coding::{
    brute_force_best_subset, lasso_encode, objective, omp_encode, pdas_encode, LassoConfig,
    OmpConfig, PdasConfig,
};
use sparse_denoise::Dictionary;

fn kkt_holds(y: &[f64], dict: &Dictionary, support: &[usize], dense: &[f64]) -> bool {
    let (g, _) = dense_dual(y, dict.matrix(), dense);
    let h: Vec<f64> = (0..dense.len())
        .map(|j| if support.contains(&j) { 0.5 * dense[j] * dense[j] } else { 0.5 * g[j] * g[j] })
        .collect();
    let min_active = support.iter().map(|&j| h[j]).fold(f64::INFINITY, f64::min);
    let max_inactive = (0..h.len())
        .filter(|j| !support.contains(j))
        .map(|j| h[j])
        .fold(0.0, f64::max);
    let g_active = support.iter().map(|&j| g[j].abs()).fold(0.0, f64::max);
    let x_inactive_zero = (0..dense.len()).all(|j| support.contains(&j) || dense[j] == 0.0);
    min_active >= max_inactive * (1.0 - 1e-12) - 1e-12 && g_active <= 1e-8 && x_inactive_zero
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn converged_pdas_is_a_kkt_point(seed in any::<u64>(), t0 in 1usize..=4) {
        let mut r = rng(seed);
        let dict = random_dictionary(16, 32, &mut r);
        let y = random_signal(16, 10.0, &mut r);
        let out = pdas_encode(&y, &dict, &PdasConfig::new(t0).with_seed(seed)).unwrap();
        prop_assert_eq!(out.code.support_size(), t0);
        if out.converged {
            prop_assert!(kkt_holds(&y, &dict, out.code.support(), &out.code.to_dense()));
        }
    }

    #[test]
    fn oracle_is_never_beaten(seed in any::<u64>(), n in 4usize..8, extra in 1usize..6, t0 in 1usize..4) {
        let mut r = rng(seed);
        let dict = random_dictionary(n, n + extra, &mut r);
        let y = random_signal(n, 5.0, &mut r);
        let best = brute_force_best_subset(&y, &dict, t0).unwrap();
        let best_obj = objective(&y, &dict, &best).unwrap();
        let oracle = oracle_best_objective(&y, dict.matrix(), t0);
        prop_assert!((best_obj - oracle).abs() <= 1e-9 * (1.0 + oracle));
        let pdas = pdas_encode(&y, &dict, &PdasConfig::new(t0).with_seed(seed)).unwrap();
        let omp = omp_encode(&y, &dict, &OmpConfig::new(t0)).unwrap();
        prop_assert!(best_obj <= pdas.objective + 1e-9);
        prop_assert!(best_obj <= objective(&y, &dict, &omp.code).unwrap() + 1e-9);
    }

    #[test]
    fn orthonormal_dictionaries_agree(seed in any::<u64>(), n in 2usize..12, t in 1usize..12) {
        let t0 = t.min(n);
        let mut r = rng(seed);
        let dict = random_orthonormal(n, &mut r);
        let y = random_signal(n, 10.0, &mut r);
        let corr = dict.correlations(&y);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| corr[b].abs().total_cmp(&corr[a].abs()).then(a.cmp(&b)));
        let mut expected = order[..t0].to_vec();
        expected.sort_unstable();

        let pdas = pdas_encode(&y, &dict, &PdasConfig::new(t0).with_seed(seed)).unwrap();
        let omp = omp_encode(&y, &dict, &OmpConfig::new(t0)).unwrap();
        let brute = brute_force_best_subset(&y, &dict, t0).unwrap();
        let reference = objective(&y, &dict, &brute).unwrap();
        for code in [&pdas.code, &omp.code, &brute] {
            prop_assert_eq!(code.support(), &expected[..]);
            prop_assert!((objective(&y, &dict, code).unwrap() - reference).abs() <= 1e-10 * (1.0 + reference));
        }
    }

    #[test]
    fn omp_residual_never_grows(seed in any::<u64>(), t0 in 1usize..10) {
        let mut r = rng(seed);
        let dict = random_dictionary(12, 30, &mut r);
        let y = random_signal(12, 10.0, &mut r);
        let out = omp_encode(&y, &dict, &OmpConfig::new(t0)).unwrap();
        prop_assert!(out.residual_norms_sq.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        let (_, res) = dense_dual(&y, dict.matrix(), &out.code.to_dense());
        let last = *out.residual_norms_sq.last().unwrap();
        prop_assert!((res.iter().map(|v| v * v).sum::<f64>() - last).abs() <= 1e-8 * (1.0 + last));
    }

    #[test]
    fn lasso_is_optimal(seed in any::<u64>(), lambda in 0.01f64..20.0) {
        let mut r = rng(seed);
        let dict = random_dictionary(10, 20, &mut r);
        let y = random_signal(10, 10.0, &mut r);
        let out = lasso_encode(&y, &dict, &LassoConfig::new(lambda)).unwrap();
        prop_assume!(out.converged);
        let x = out.code.to_dense();
        let (g, res) = dense_dual(&y, dict.matrix(), &x);
        for j in 0..x.len() {
            let grad = 2.0 * g[j];
            if x[j] == 0.0 {
                prop_assert!(grad.abs() <= lambda + 1e-6);
            } else {
                prop_assert!((grad - lambda * x[j].signum()).abs() <= 1e-6);
            }
        }
        let value = |x: &[f64]| {
            let (_, res) = dense_dual(&y, dict.matrix(), x);
            res.iter().map(|v| v * v).sum::<f64>() + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
        };
        let base = res.iter().map(|v| v * v).sum::<f64>() + lambda * x.iter().map(|v| v.abs()).sum::<f64>();
        use rand::Rng;
        for _ in 0..100 {
            let moved: Vec<f64> = x.iter().map(|v| v + r.random_range(-1e-3..1e-3)).collect();
            prop_assert!(value(&moved) >= base - 1e-9);
        }
    }
}

#[test]
fn small_instances_report_pdas_oracle_match_rate() {
    let mut matches = 0;
    for seed in 0..100 {
        let mut r = rng(seed);
        let dict = random_dictionary(6, 10, &mut r);
        let y = random_signal(6, 5.0, &mut r);
        let out = pdas_encode(&y, &dict, &PdasConfig::new(2).with_seed(seed)).unwrap();
        let best = objective(&y, &dict, &brute_force_best_subset(&y, &dict, 2).unwrap()).unwrap();
        assert!(best <= out.objective + 1e-9);
        if out.converged {
            assert!(kkt_holds(&y, &dict, out.code.support(), &out.code.to_dense()));
        }
        matches += ((out.objective - best).abs() <= 1e-9 * (1.0 + best)) as usize;
    }
    println!("pdas matched the best subset on {matches}/100 instances");
    assert!(matches > 0);
}

#[test]
fn single_atom_lasso_is_soft_threshold() {
    let dict = Dictionary::new(nalgebra::DMatrix::from_column_slice(3, 1, &[0.6, 0.0, 0.8])).unwrap();
    let y = [3.0, 1.0, 4.0];
    // d^T y = 5; minimizer is S(5, lambda / 2)
    for (lambda, expected) in [(0.0, 5.0), (4.0, 3.0), (10.0, 0.0), (12.0, 0.0)] {
        let out = lasso_encode(&y, &dict, &LassoConfig::new(lambda)).unwrap();
        assert!((out.code.to_dense()[0] - expected).abs() <= 1e-10);
    }
}
