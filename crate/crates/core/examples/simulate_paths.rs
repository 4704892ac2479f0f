//! Seeded Monte Carlo of beliefs and revenue under the dynamic policy.

use trustax::dynamic_solver::{solve_vfi, SolverConfig};
use trustax::simulator::{long_run_stats, simulate_paths, verify_history_dependence, SimConfig};

fn main() -> trustax::Result<()> {
    let cfg = SolverConfig::default();
    let policy = solve_vfi(&cfg)?.policy;
    let sim = SimConfig { horizon: 40, n_paths: 500, ..SimConfig::default() };
    let set = simulate_paths(&policy, &cfg.tech, &cfg.transition, &sim)?;

    let stats = long_run_stats(&set)?;
    for p in stats.per_period.iter().step_by(10) {
        println!(
            "t {:>2}: theta mean {:.3} [{:.3}, {:.3}], R mean {:.4}, delivered {:.2}",
            p.t, p.theta.mean, p.theta.q10, p.theta.q90, p.revenue.mean, p.delivery_rate
        );
    }
    println!("terminal beliefs by decile: {:?}", stats.terminal_histogram);

    let report = verify_history_dependence(&policy, &cfg.tech, &cfg.transition, &[0.7, 0.8, 0.9])?;
    for p in &report.probes {
        println!(
            "theta {:.1}: R* after bad/none/good signal {:.4} / {:.4} / {:.4} ({})",
            p.theta,
            p.revenue_down,
            p.revenue,
            p.revenue_up,
            if p.passed() { "ordered" } else { "not ordered" }
        );
    }
    Ok(())
}
