//! Optimal revenue and output tax at the reference beliefs, next to the reference coordinates.

use trustax::dynamic_solver::SolverConfig;
use trustax::experiments::replicate_figures;

fn main() -> trustax::Result<()> {
    let tables = replicate_figures(&SolverConfig::default())?;
    println!("{:>6} {:>8} {:>8} {:>8} {:>8}", "theta", "R*", "ref", "tau_Y", "ref");
    for r in &tables.rows {
        println!(
            "{:>6.2} {:>8.4} {:>8.3} {:>8.4} {:>8.3}",
            r.theta, r.revenue, r.reference_revenue, r.output_tax, r.reference_output_tax
        );
    }
    println!(
        "max deviations: R* {:.4}, tau_Y {:.4}; labor tax never used: {}",
        tables.max_revenue_deviation(),
        tables.max_output_tax_deviation(),
        tables.max_labor_tax() == 0.0
    );
    Ok(())
}
