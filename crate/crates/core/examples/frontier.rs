//! Instrument mixes that implement the same allocation, and what breaks the tie between them.

use trustax::dynamic_solver::SolverConfig;
use trustax::economy::{Economy, EconomyPrimitives, GridSpec};
use trustax::experiments::instrument_specific_variant;
use trustax::static_solver::{enumerate_frontier, select_mix_by_cost, InstrumentCosts, StaticSolver};

fn main() -> trustax::Result<()> {
    // Decreasing returns pin the mix down; a linear technology leaves a whole curve.
    for power in [0.5, 1.0] {
        let prims = EconomyPrimitives { production_power: power, ..EconomyPrimitives::baseline() };
        let economy = Economy::general(prims);
        let sol = StaticSolver::new(economy, GridSpec::default(), InstrumentCosts::ZERO, 0.0)?.solve(0.95)?;
        let frontier = enumerate_frontier(sol.allocation.net_of_tax, sol.revenue(), &economy, 1e-6)?;
        println!(
            "production power {power}: S* {:.4}, R* {:.4}, {} mixes",
            frontier.target_s,
            frontier.target_r,
            frontier.cardinality()
        );
        if frontier.cardinality() > 1 {
            let costs = InstrumentCosts::new(0.2, 0.1)?;
            let pick = select_mix_by_cost(&frontier.instruments(), &costs)?;
            println!("  cheapest with costs (0.2, 0.1): tau_L {:.4}, tau_B {:.4}", pick.tau_l, pick.tau_b);
        }
    }

    // When monitoring weighs the instruments differently, the solver tilts toward the better-watched one.
    let cfg = SolverConfig::default();
    for weights in [(1.0, 1.0), (2.0, 0.0), (0.0, 2.0)] {
        let rep = instrument_specific_variant(&cfg, weights, 0.6, 1e-6)?;
        println!(
            "weights {weights:?}: tau_L {:.4}, tau_B {:.4}, labor share {:.3}, cutoff {:.4}",
            rep.chosen.tau_l, rep.chosen.tau_b, rep.labor_share, rep.cutoff
        );
    }
    Ok(())
}
