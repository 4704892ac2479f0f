//! Value-function iteration on the belief grid, with shape checks and the dynamic cutoff.

use trustax::dynamic_solver::{contraction_test, dynamic_cutoff, shape_diagnostics, solve_vfi, SolverConfig};
use trustax::static_solver::static_cutoff;

fn main() -> trustax::Result<()> {
    let cfg = SolverConfig::default();
    let out = solve_vfi(&cfg)?;
    println!("converged in {} iterations, last gap {:.2e}", out.iterations, out.final_gap);

    let shape = shape_diagnostics(&out.value, &out.policy);
    println!(
        "V increasing: {}, V convex: {}, R* increasing: {}",
        shape.v_increasing(),
        shape.v_convex(),
        shape.r_increasing()
    );
    println!(
        "dynamic cutoff {:.5} vs static {:.5}",
        dynamic_cutoff(&out.policy),
        static_cutoff(&cfg.economy)?
    );

    for theta in [0.5, 0.6, 0.7, 0.8, 0.9, 1.0] {
        let p = out.policy.nearest(theta);
        println!("theta {:.2}: R* {:.5}, V {:.5}", p.theta, p.revenue, p.value);
    }

    // Largest observed Lipschitz ratio over random value-function pairs.
    println!("observed modulus {:.4} (beta {})", contraction_test(&cfg, 1, 5)?, cfg.beta);
    Ok(())
}
