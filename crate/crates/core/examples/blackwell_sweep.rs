//! Garbles the signal at increasing levels and compares the optimal revenue schedules.

use trustax::dynamic_solver::SolverConfig;
use trustax::experiments::sweep_garbling;

fn main() -> trustax::Result<()> {
    let res = sweep_garbling(&SolverConfig::default(), &[0.0, 0.1, 0.2, 0.3])?;
    for level in &res.levels {
        let r = level.revenues();
        println!(
            "eps {:.1}: cutoff {:.4}, R*(0.7) {:.5}, R*(1) {:.5}, {} iterations",
            level.params[0].1,
            level.cutoff,
            level.policy.revenue_at(0.7),
            r[r.len() - 1],
            level.iterations
        );
    }
    match res.verdict.revenue_violation {
        None => println!("R* weakly falls with garbling everywhere"),
        Some(v) => println!("ordering breaks at theta {:.4} by {:.2e}", v.theta, v.excess),
    }
    println!("cutoff ordering holds: {}", res.verdict.cutoff_ok());
    Ok(())
}
