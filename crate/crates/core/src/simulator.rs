//! Monte Carlo paths of hidden types, policy, signals, and beliefs.
//!
//! Each path draws from its own ChaCha stream keyed by the path index, so a
//! path is the same whether it is simulated alone or among thousands.

use crate::dynamic_solver::PolicySchedule;
use crate::economy::Instruments;
use crate::error::{Result, SolverError};
use crate::monitoring::{BeliefStep, GovType, MonitoringTech, TransitionMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub horizon: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub initial_theta: f64,
    /// Probability that an opportunist delivers anyway.
    pub mimic_prob: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon: 50,
            n_paths: 100,
            seed: 42,
            initial_theta: 0.8,
            mimic_prob: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.n_paths == 0 {
            return Err(SolverError::invalid("horizon and n_paths must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.initial_theta) {
            return Err(SolverError::invalid("initial_theta must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.mimic_prob) {
            return Err(SolverError::invalid("mimic_prob must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodRecord {
    pub t: usize,
    pub gov_type: GovType,
    pub theta: f64,
    pub instruments: Instruments,
    pub revenue: f64,
    pub kernel_revenue: f64,
    /// Whether the government delivered the announced revenue.
    pub delivered: bool,
    pub public_goods: f64,
    /// `None` when the period was settled by verification instead of a signal.
    pub signal: Option<bool>,
    pub theta_next: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimPath {
    pub path_id: u64,
    pub periods: Vec<PeriodRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub paths: Vec<SimPath>,
}

/// Next belief implied by one period's public outcome.
pub fn replay_step(
    theta: f64,
    kernel_revenue: f64,
    signal: Option<bool>,
    gov_type: GovType,
    tech: &MonitoringTech,
    pi: &TransitionMatrix,
) -> f64 {
    let posterior = match signal {
        Some(s) => {
            let (qh, qo) = tech.likelihoods(kernel_revenue);
            let step = BeliefStep::from_likelihoods(theta, qh, qo, pi);
            if s {
                step.posterior_up
            } else {
                step.posterior_down
            }
        }
        None => match gov_type {
            GovType::Honest => 1.0,
            GovType::Opportunist => 0.0,
        },
    };
    pi.propagate(posterior).clamp(0.0, 1.0)
}

fn draw(rng: &mut ChaCha8Rng, p: f64) -> bool {
    rng.random::<f64>() < p
}

fn simulate_one(
    path_id: u64,
    policy: &PolicySchedule,
    tech: &MonitoringTech,
    pi: &TransitionMatrix,
    sim: &SimConfig,
) -> SimPath {
    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    rng.set_stream(path_id);
    let mut gov_type = if draw(&mut rng, sim.initial_theta) {
        GovType::Honest
    } else {
        GovType::Opportunist
    };
    let mut theta = sim.initial_theta;
    let mut periods = Vec::with_capacity(sim.horizon);
    for t in 0..sim.horizon {
        let revenue = policy.revenue_at(theta);
        let kernel_revenue = policy.kernel_revenue_at(theta);
        let instruments = policy.nearest(theta).instruments;
        let delivered = match gov_type {
            GovType::Honest => true,
            GovType::Opportunist => draw(&mut rng, sim.mimic_prob),
        };
        let public_goods = if delivered { revenue } else { 0.0 };
        let verified = tech.reveal_weight > 0.0 && draw(&mut rng, tech.reveal_weight);
        let signal = if verified {
            None
        } else {
            Some(draw(&mut rng, tech.realized_signal_prob(gov_type, kernel_revenue, public_goods)))
        };
        let theta_next = replay_step(theta, kernel_revenue, signal, gov_type, tech, pi);
        periods.push(PeriodRecord {
            t,
            gov_type,
            theta,
            instruments,
            revenue,
            kernel_revenue,
            delivered,
            public_goods,
            signal,
            theta_next,
        });
        let stay = match gov_type {
            GovType::Honest => pi.pi_hh,
            GovType::Opportunist => pi.pi_oo,
        };
        if !draw(&mut rng, stay) {
            gov_type = match gov_type {
                GovType::Honest => GovType::Opportunist,
                GovType::Opportunist => GovType::Honest,
            };
        }
        theta = theta_next;
    }
    SimPath { path_id, periods }
}

/// Simulates `n_paths` independent paths; identical inputs give identical paths.
pub fn simulate_paths(
    policy: &PolicySchedule,
    tech: &MonitoringTech,
    pi: &TransitionMatrix,
    sim: &SimConfig,
) -> Result<PathSet> {
    sim.validate()?;
    tech.validate()?;
    if policy.points.len() < 2 {
        return Err(SolverError::invalid("policy needs at least two grid points"));
    }
    let paths = (0..sim.n_paths as u64)
        .into_par_iter()
        .map(|id| simulate_one(id, policy, tech, pi, sim))
        .collect();
    Ok(PathSet { paths })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryProbe {
    pub theta: f64,
    pub revenue: f64,
    /// Next prior after an unfavorable signal.
    pub theta_down: f64,
    /// Next prior after a favorable signal.
    pub theta_up: f64,
    pub revenue_down: f64,
    pub revenue_up: f64,
    /// Revenue at the pre-propagation posteriors, for comparison.
    pub revenue_posterior_down: f64,
    pub revenue_posterior_up: f64,
    pub informative: bool,
}

impl HistoryProbe {
    pub fn weak_ok(&self) -> bool {
        self.revenue_down <= self.revenue && self.revenue <= self.revenue_up
    }

    pub fn strict_ok(&self) -> bool {
        self.revenue_down < self.revenue && self.revenue < self.revenue_up
    }

    /// Strictness is expected when signals move beliefs and all three revenues are positive.
    pub fn interior(&self) -> bool {
        self.informative && self.revenue_down > 0.0
    }

    pub fn passed(&self) -> bool {
        self.weak_ok() && (!self.interior() || self.strict_ok())
    }

    pub fn posterior_weak_ok(&self) -> bool {
        self.revenue_posterior_down <= self.revenue && self.revenue <= self.revenue_posterior_up
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryReport {
    pub probes: Vec<HistoryProbe>,
}

impl HistoryReport {
    pub fn passed(&self) -> bool {
        self.probes.iter().all(HistoryProbe::passed)
    }
}

/// Checks that the optimal scale steps up after a favorable signal and down after an unfavorable one.
pub fn verify_history_dependence(
    policy: &PolicySchedule,
    tech: &MonitoringTech,
    pi: &TransitionMatrix,
    theta_probes: &[f64],
) -> Result<HistoryReport> {
    if theta_probes.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
        return Err(SolverError::invalid("history probes must lie in (0, 1)"));
    }
    let probes = theta_probes
        .iter()
        .map(|&theta| {
            let revenue = policy.revenue_at(theta);
            let (qh, qo) = tech.likelihoods(policy.kernel_revenue_at(theta));
            let step = BeliefStep::from_likelihoods(theta, qh, qo, pi);
            HistoryProbe {
                theta,
                revenue,
                theta_down: step.theta_down,
                theta_up: step.theta_up,
                revenue_down: policy.revenue_at(step.theta_down),
                revenue_up: policy.revenue_at(step.theta_up),
                revenue_posterior_down: policy.revenue_at(step.posterior_down),
                revenue_posterior_up: policy.revenue_at(step.posterior_up),
                informative: step.theta_up != step.theta_down,
            }
        })
        .collect();
    Ok(HistoryReport { probes })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantiles {
    pub mean: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

impl Quantiles {
    fn of(mut xs: Vec<f64>) -> Self {
        xs.sort_by(f64::total_cmp);
        let n = xs.len();
        let at = |q: f64| xs[((q * (n - 1) as f64).round() as usize).min(n - 1)];
        Self {
            mean: xs.iter().sum::<f64>() / n as f64,
            q10: at(0.1),
            q50: at(0.5),
            q90: at(0.9),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodStats {
    pub t: usize,
    pub theta: Quantiles,
    pub revenue: Quantiles,
    pub delivery_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LongRunStats {
    pub per_period: Vec<PeriodStats>,
    /// Counts of terminal beliefs in ten equal bins on `[0, 1]`.
    pub terminal_histogram: [usize; 10],
}

pub fn long_run_stats(set: &PathSet) -> Result<LongRunStats> {
    let horizon = set.paths.first().map_or(0, |p| p.periods.len());
    if horizon == 0 || set.paths.iter().any(|p| p.periods.len() != horizon) {
        return Err(SolverError::invalid("path set is empty or ragged"));
    }
    let n = set.paths.len() as f64;
    let per_period = (0..horizon)
        .map(|t| {
            let col = || set.paths.iter().map(move |p| &p.periods[t]);
            PeriodStats {
                t,
                theta: Quantiles::of(col().map(|r| r.theta).collect()),
                revenue: Quantiles::of(col().map(|r| r.revenue).collect()),
                delivery_rate: col().filter(|r| r.delivered).count() as f64 / n,
            }
        })
        .collect();
    let mut terminal_histogram = [0; 10];
    for p in &set.paths {
        let b = p.periods[horizon - 1].theta_next;
        terminal_histogram[((b * 10.0) as usize).min(9)] += 1;
    }
    Ok(LongRunStats {
        per_period,
        terminal_histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic_solver::{solve_vfi, PolicyPoint, SolverConfig};
    use crate::economy::GridSpec;
    use crate::monitoring::apply_enforcement;

    fn flat_policy(r: f64) -> PolicySchedule {
        PolicySchedule {
            points: (0..11)
                .map(|i| PolicyPoint {
                    theta: i as f64 / 10.0,
                    instruments: Instruments::new(0.0, 0.3).unwrap(),
                    net_of_tax: 0.7,
                    revenue: r,
                    kernel_revenue: r,
                    value: 0.0,
                })
                .collect(),
        }
    }

    fn uninformative() -> MonitoringTech {
        MonitoringTech::baseline().with_garbling(0.5).unwrap()
    }

    #[test]
    fn deterministic_and_stream_stable() {
        let pol = flat_policy(0.4);
        let tech = MonitoringTech::baseline();
        let pi = TransitionMatrix::default();
        let sim = SimConfig { horizon: 20, n_paths: 8, ..SimConfig::default() };
        let a = simulate_paths(&pol, &tech, &pi, &sim).unwrap();
        let b = simulate_paths(&pol, &tech, &pi, &sim).unwrap();
        assert_eq!(a, b);
        let fewer = simulate_paths(&pol, &tech, &pi, &SimConfig { n_paths: 3, ..sim }).unwrap();
        assert_eq!(fewer.paths[..], a.paths[..3]);
    }

    #[test]
    fn replay_reproduces_beliefs() {
        let pi = TransitionMatrix::default();
        for tech in [MonitoringTech::baseline(), apply_enforcement(&MonitoringTech::baseline(), 0.3).unwrap()] {
            let set = simulate_paths(&flat_policy(0.4), &tech, &pi, &SimConfig::default()).unwrap();
            for p in &set.paths {
                for r in &p.periods {
                    let again = replay_step(r.theta, r.kernel_revenue, r.signal, r.gov_type, &tech, &pi);
                    assert!((again - r.theta_next).abs() <= 1e-12);
                }
                for w in p.periods.windows(2) {
                    assert_eq!(w[0].theta_next, w[1].theta);
                }
            }
        }
    }

    #[test]
    fn honest_absorbing_world_delivers() {
        let pi = TransitionMatrix::new(1.0, 0.9).unwrap();
        let sim = SimConfig { initial_theta: 1.0, ..SimConfig::default() };
        let set = simulate_paths(&flat_policy(0.4), &MonitoringTech::baseline(), &pi, &sim).unwrap();
        for r in set.paths.iter().flat_map(|p| &p.periods) {
            assert_eq!(r.gov_type, GovType::Honest);
            assert_eq!(r.public_goods, r.revenue);
        }
        let stats = long_run_stats(&set).unwrap();
        assert!(stats.per_period.iter().all(|s| s.delivery_rate == 1.0));
    }

    #[test]
    fn uninformative_beliefs_settle_at_half() {
        let sim = SimConfig { horizon: 80, n_paths: 50, initial_theta: 0.95, ..SimConfig::default() };
        let set = simulate_paths(&flat_policy(0.4), &uninformative(), &TransitionMatrix::default(), &sim).unwrap();
        let stats = long_run_stats(&set).unwrap();
        assert_eq!(stats.terminal_histogram[5], 50);
        let last = stats.per_period.last().unwrap();
        assert!((last.theta.mean - 0.5).abs() < 1e-6);
    }

    #[test]
    fn single_path_stats_are_the_path() {
        let sim = SimConfig { n_paths: 1, horizon: 5, ..SimConfig::default() };
        let set = simulate_paths(&flat_policy(0.2), &MonitoringTech::baseline(), &TransitionMatrix::default(), &sim).unwrap();
        let stats = long_run_stats(&set).unwrap();
        for (s, r) in stats.per_period.iter().zip(&set.paths[0].periods) {
            assert_eq!(s.theta.mean, r.theta);
            assert_eq!(s.theta.q10, r.theta);
            assert_eq!(s.revenue.q90, r.revenue);
        }
    }

    #[test]
    fn signal_frequency_matches_kernel() {
        // One-period paths from θ₀ = 1 isolate the honest type at a fixed revenue.
        let tech = MonitoringTech::baseline();
        let sim = SimConfig { horizon: 1, n_paths: 100_000, initial_theta: 1.0, ..SimConfig::default() };
        let set = simulate_paths(&flat_policy(0.5), &tech, &TransitionMatrix::default(), &sim).unwrap();
        let hits = set.paths.iter().filter(|p| p.periods[0].signal == Some(true)).count() as f64;
        let q = tech.signal_prob(GovType::Honest, 0.5);
        let n = sim.n_paths as f64;
        let se = (q * (1.0 - q) / n).sqrt();
        assert!((hits / n - q).abs() < 4.0 * se);
    }

    #[test]
    fn opportunist_diverts_unless_mimicking() {
        let pi = TransitionMatrix::new(0.9, 1.0).unwrap();
        let sim = SimConfig { initial_theta: 0.0, horizon: 10, n_paths: 20, ..SimConfig::default() };
        let set = simulate_paths(&flat_policy(0.4), &MonitoringTech::baseline(), &pi, &sim).unwrap();
        assert!(set.paths.iter().flat_map(|p| &p.periods).all(|r| !r.delivered && r.public_goods == 0.0));
        let mimic = SimConfig { mimic_prob: 1.0, ..sim };
        let set = simulate_paths(&flat_policy(0.4), &MonitoringTech::baseline(), &pi, &mimic).unwrap();
        assert!(set.paths.iter().flat_map(|p| &p.periods).all(|r| r.delivered));
    }

    #[test]
    fn history_dependence_on_solved_policy() {
        let cfg = SolverConfig {
            theta_grid_size: 81,
            grid: GridSpec::new(3, 61, 0.99),
            ..SolverConfig::default()
        };
        let out = solve_vfi(&cfg).unwrap();
        let rep = verify_history_dependence(&out.policy, &cfg.tech, &cfg.transition, &[0.8, 0.3]).unwrap();
        assert!(rep.probes[0].weak_ok(), "{:?}", rep.probes[0]);
        let zero = rep.probes[1];
        assert_eq!((zero.revenue, zero.revenue_down), (0.0, 0.0));

        let flat = verify_history_dependence(&out.policy, &uninformative(), &cfg.transition, &[0.8]).unwrap();
        let p = flat.probes[0];
        assert!(!p.informative);
        assert_eq!(p.revenue_down, p.revenue_up);
        assert!(verify_history_dependence(&out.policy, &cfg.tech, &cfg.transition, &[1.0]).is_err());
    }
}
