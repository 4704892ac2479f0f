//! One-period optimum across beliefs, and the trust cutoff below which nothing is taxed.

use trustax::economy::{Economy, GridSpec};
use trustax::static_solver::{earmark_adjusted_cutoff, static_cutoff, InstrumentCosts, StaticSolver};

fn main() -> trustax::Result<()> {
    let economy = Economy::quant();
    let solver = StaticSolver::new(economy, GridSpec::default(), InstrumentCosts::ZERO, 0.0)?;
    let theta_bar = static_cutoff(&economy)?;
    println!("trust cutoff {theta_bar:.9} (bisected: {:.9})", solver.measured_cutoff(1e-9)?);
    println!("with half the revenue earmarked: {:.6}", earmark_adjusted_cutoff(theta_bar, 0.5));

    println!("{:>6} {:>9} {:>9} {:>7} {:>7}", "theta", "R*", "S*", "tau_L", "tau_B");
    for theta in [0.3, 0.55, 0.6, 0.7, 0.8, 0.9, 0.95] {
        let s = solver.solve(theta)?;
        println!(
            "{theta:>6.2} {:>9.5} {:>9.5} {:>7.4} {:>7.4}",
            s.revenue(),
            s.allocation.net_of_tax,
            s.instruments.tau_l,
            s.instruments.tau_b
        );
    }
    Ok(())
}
