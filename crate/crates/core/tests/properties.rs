use onebit::analytic::{agreement_prob, exact_h0_tail, moments, TheoryMode};
use onebit::detector::{decide, statistic, sweep_thresholds, Decision};
use onebit::model::{pd_bound_factor, DetectorDirection, Hypothesis, ModelParams};
use onebit::montecarlo::{Parallelism, RunConfig, Simulator};
use onebit::signal::{factor_covariance, observe};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Parameters inside the positive-definite region, parameterized by the
/// fraction of the admissible correlation.
fn accepted_params() -> impl Strategy<Value = ModelParams> {
    (2usize..80, 1usize..4, 0.1f64..5.0, -0.99f64..0.99, 1e-6f64..2.0).prop_map(|(n, sensors, s2, frac, sigma2)| {
        let r = frac * s2 / pd_bound_factor(n);
        ModelParams { n, num_sensors: sensors, sigma_s2: s2, r, sigma2 }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn accepted_params_factor_exactly(params in accepted_params()) {
        prop_assert!(params.validate().is_ok());
        let factor = factor_covariance(&params).unwrap();
        let l = factor.reconstruct();
        for (i, row) in l.iter().enumerate() {
            for (j, &got) in row.iter().enumerate() {
                let target = match i.abs_diff(j) {
                    0 => params.sigma_s2,
                    1 => params.r,
                    _ => 0.0,
                };
                prop_assert!((got - target).abs() <= 1e-12, "({i},{j}) {got} vs {target}");
            }
        }
    }

    #[test]
    fn agreement_prob_bounds_and_sign(params in accepted_params()) {
        let p = agreement_prob(&params).p;
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert_eq!(p > 0.5, params.r > 0.0);
        let uncorrelated = ModelParams { r: 0.0, ..params };
        prop_assert_eq!(agreement_prob(&uncorrelated).p, 0.5);
    }

    #[test]
    fn consistent_variance_is_positive(params in accepted_params()) {
        let m = moments(&params, Hypothesis::H1, TheoryMode::Consistent);
        prop_assert!(m.variance > 0.0);
    }

    #[test]
    fn statistic_stays_in_range(params in accepted_params(), seed in any::<u64>(), h1 in any::<bool>()) {
        let h = if h1 { Hypothesis::H1 } else { Hypothesis::H0 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits = observe(&params, h, &mut rng).unwrap();
        prop_assert_eq!((bits.sensors(), bits.samples()), (params.num_sensors, params.n));
        prop_assert!(bits.as_slice().iter().all(|&b| b <= 1));
        let y = statistic(&bits).unwrap().0 as usize;
        prop_assert!(y <= params.pair_count());
    }

    #[test]
    fn decide_is_a_pure_function(y in 0u32..200, eta in -1.0f64..201.0, less in any::<bool>()) {
        let direction = if less { DetectorDirection::LessIsH1 } else { DetectorDirection::GreaterIsH1 };
        let s = onebit::detector::DetectionStatistic(y);
        prop_assert_eq!(decide(s, eta, direction), decide(s, eta, direction));
        let fires = if less { f64::from(y) <= eta } else { f64::from(y) >= eta };
        prop_assert_eq!(decide(s, eta, direction) == Decision::H1, fires);
    }

    #[test]
    fn exact_tail_hits_extremes(n in 2usize..60, sensors in 1usize..5) {
        let params = ModelParams { n, num_sensors: sensors, sigma_s2: 1.0, r: 0.1, sigma2: 1e-2 };
        prop_assert_eq!(exact_h0_tail(&params, 0), 1.0);
        prop_assert_eq!(exact_h0_tail(&params, params.pair_count() as u64 + 1), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn runs_ignore_worker_count(seed in any::<u64>(), workers in 2usize..9, sensors in 1usize..4) {
        let params = ModelParams { n: 12, num_sensors: sensors, sigma_s2: 1.0, r: 0.3, sigma2: 1e-2 };
        let cfg = RunConfig::new(params).with_trials(300).with_seed(seed);
        let serial = Simulator::new(cfg.clone()).parallelism(Parallelism::Serial).run().unwrap();
        let threaded = Simulator::new(cfg).parallelism(Parallelism::Threads(workers)).run().unwrap();
        prop_assert_eq!(serial.h0.values(), threaded.h0.values());
        prop_assert_eq!(serial.h1.values(), threaded.h1.values());
    }

    #[test]
    fn empirical_roc_is_monotone_with_endpoints(seed in any::<u64>(), r in prop_oneof![-0.45f64..-0.05, 0.05f64..0.45]) {
        let params = ModelParams { n: 10, num_sensors: 2, sigma_s2: 1.0, r, sigma2: 1e-2 };
        let cfg = RunConfig::new(params).with_trials(200).with_seed(seed);
        let curve = Simulator::new(cfg).run().unwrap().empirical_curve();
        prop_assert!(curve.is_monotone());
        let first = curve.points.first().unwrap();
        let last = curve.points.last().unwrap();
        let (all, none) = if r > 0.0 { (first, last) } else { (last, first) };
        prop_assert_eq!((all.pfa, all.pd), (1.0, 1.0));
        prop_assert_eq!((none.pfa, none.pd), (0.0, 0.0));
        prop_assert_eq!(curve.points.len(), sweep_thresholds(&params).len());
    }
}
