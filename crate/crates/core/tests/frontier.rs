//! With a linear technology the set of mixes implementing one allocation is a curve,
//! so mix-equivalence and its failure under instrument-weighted monitoring are visible.

use trustax::dynamic_solver::SolverConfig;
use trustax::economy::{Economy, EconomyPrimitives};
use trustax::experiments::instrument_specific_variant;
use trustax::static_solver::{enumerate_frontier, InstrumentCosts, StaticSolver};

fn linear() -> SolverConfig {
    let prims = EconomyPrimitives { production_power: 1.0, ..EconomyPrimitives::baseline() };
    SolverConfig { economy: Economy::general(prims), ..SolverConfig::default() }
}

#[test]
fn members_share_welfare() {
    let cfg = linear();
    let sol = StaticSolver::new(cfg.economy, cfg.grid, InstrumentCosts::ZERO, 0.0).unwrap().solve(0.8).unwrap();
    let f = enumerate_frontier(sol.allocation.net_of_tax, sol.revenue(), &cfg.economy, 1e-6).unwrap();
    assert!(f.cardinality() > 100);
    let w: Vec<f64> = f.members.iter().map(|m| m.welfare(0.8, 0.0, &InstrumentCosts::ZERO)).collect();
    let spread = w.iter().copied().fold(f64::MIN, f64::max) - w.iter().copied().fold(f64::MAX, f64::min);
    assert!(spread <= 1e-8, "welfare spread {spread}");
}

#[test]
fn weighted_monitoring_separates_members() {
    let cfg = linear();
    let even = instrument_specific_variant(&cfg, (1.0, 1.0), 0.6, 1e-6).unwrap();
    let tilted = instrument_specific_variant(&cfg, (0.0, 2.0), 0.6, 1e-6).unwrap();
    assert!(even.frontier_size > 1 && tilted.frontier_size > 1);
    assert!(even.continuation_spread <= 1e-10, "{}", even.continuation_spread);
    assert!(tilted.welfare_spread <= 1e-8);
    assert!(tilted.continuation_spread > 1e-6, "{}", tilted.continuation_spread);
}
