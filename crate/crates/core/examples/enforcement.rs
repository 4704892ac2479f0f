//! Earmarking and verification: how they move the cutoff and the revenue schedule.

use trustax::dynamic_solver::SolverConfig;
use trustax::experiments::sweep_enforcement;
use trustax::static_solver::StaticSolver;

fn main() -> trustax::Result<()> {
    let cfg = SolverConfig::default();
    for phi in [0.0, 0.25, 0.5] {
        let solver = StaticSolver::new(cfg.economy, cfg.grid, cfg.costs, phi)?;
        println!("phi {phi:.2}: static cutoff {:.6}", solver.measured_cutoff(1e-8)?);
    }

    let res = sweep_enforcement(&cfg, &[0.0, 0.5, 1.0], &[0.0, 0.5])?;
    for level in &res.levels {
        let (lambda, phi) = (level.params[0].1, level.params[1].1);
        println!(
            "lambda {lambda:.1}, phi {phi:.1}: dynamic cutoff {:.4}, R*(0.6) {:.5}, R*(0.8) {:.5}",
            level.cutoff,
            level.policy.revenue_at(0.6),
            level.policy.revenue_at(0.8)
        );
    }
    println!("revenue ordering holds: {}", res.verdict.revenue_ok());
    Ok(())
}
