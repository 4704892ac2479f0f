use proptest::prelude::*;
use std::sync::OnceLock;
use trustax::dynamic_solver::{observed_modulus, solve_vfi, DynamicModel, PolicySchedule, SolverConfig};
use trustax::economy::GridSpec;
use trustax::monitoring::{next_prior_lottery, one_step_kernel, MonitoringTech, TransitionMatrix};
use trustax::simulator::{replay_step, simulate_paths, SimConfig};

const N: usize = 21;

fn small_config() -> SolverConfig {
    SolverConfig {
        theta_grid_size: N,
        grid: GridSpec::new(5, 21, 0.99),
        ..SolverConfig::default()
    }
}

fn model() -> &'static DynamicModel {
    static MODEL: OnceLock<DynamicModel> = OnceLock::new();
    MODEL.get_or_init(|| DynamicModel::new(&small_config()).unwrap())
}

fn policy() -> &'static PolicySchedule {
    static POLICY: OnceLock<PolicySchedule> = OnceLock::new();
    POLICY.get_or_init(|| solve_vfi(&small_config()).unwrap().policy)
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, N)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn posterior_is_a_martingale(theta in 0.0..=1.0f64, r in 0.0..10.0f64, eps in 0.0..=0.5f64, lambda in 0.0..=1.0f64) {
        let pi = TransitionMatrix::default();
        let mut tech = MonitoringTech::baseline().with_garbling(eps).unwrap();
        prop_assert!((one_step_kernel(theta, r, &tech, &pi).posterior_mean() - theta).abs() <= 1e-12);
        tech.reveal_weight = lambda;
        let mean = next_prior_lottery(theta, r, &tech, &pi).mean();
        prop_assert!((mean - pi.propagate(theta)).abs() <= 1e-12);
    }

    #[test]
    fn garbling_shrinks_separation(r in 0.0..10.0f64, e1 in 0.0..0.5f64, e2 in 0.0..0.5f64) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let sep = |eps: f64| {
            let (h, o) = MonitoringTech::baseline().with_garbling(eps).unwrap().likelihoods(r);
            h - o
        };
        prop_assert!(sep(hi) <= sep(lo) + 1e-15);
        prop_assert!(sep(hi) >= 0.0);
    }

    #[test]
    fn bellman_is_monotone(v in values(), bump in prop::collection::vec(0.0..2.0f64, N)) {
        let w: Vec<f64> = v.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let (tv, tw) = (model().apply(&v), model().apply(&w));
        prop_assert!(tv.iter().zip(&tw).all(|(a, b)| *a <= b + 1e-12));
    }

    #[test]
    fn bellman_preserves_convexity(
        a in -1.0..1.0f64,
        b in 0.0..2.0f64,
        kinks in prop::collection::vec((0.0..1.0f64, 0.0..3.0f64), 1..5),
    ) {
        let thetas = model().thetas();
        let v: Vec<f64> = thetas
            .iter()
            .map(|&t| a + b * t + kinks.iter().map(|&(k, c)| c * (t - k).max(0.0)).sum::<f64>())
            .collect();
        let tv = model().apply(&v);
        let min_d2 = tv.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).fold(f64::INFINITY, f64::min);
        prop_assert!(min_d2 >= -1e-6, "second difference {}", min_d2);
    }

    #[test]
    fn contraction_bound(v in values(), w in values()) {
        prop_assume!(v != w);
        let q = observed_modulus(model(), &v, &w).unwrap();
        prop_assert!(q <= model().config().beta + 1e-9);
    }

    #[test]
    fn paths_replay_exactly(seed in any::<u64>(), theta0 in 0.05..0.95f64, lambda in 0.0..=1.0f64) {
        let cfg = small_config();
        let mut tech = cfg.tech.clone();
        tech.reveal_weight = lambda;
        let sim = SimConfig { horizon: 8, n_paths: 3, seed, initial_theta: theta0, mimic_prob: 0.0 };
        let set = simulate_paths(policy(), &tech, &cfg.transition, &sim).unwrap();
        for path in &set.paths {
            for r in &path.periods {
                let next = replay_step(r.theta, r.kernel_revenue, r.signal, r.gov_type, &tech, &cfg.transition);
                prop_assert!((next - r.theta_next).abs() <= 1e-12);
            }
            for w in path.periods.windows(2) {
                prop_assert_eq!(w[1].theta, w[0].theta_next);
            }
        }
    }
}
