//! Bayes updating from a binary signal, propagation through type persistence,
//! and a look at how informative the monitoring kernel is.

use trustax::monitoring::{
    informativeness_diagnostic, next_prior_lottery, one_step_kernel, threshold_tech, MonitoringTech,
    TransitionMatrix,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tech = MonitoringTech::baseline();
    let pi = TransitionMatrix::default();

    for r in [0.0, 0.2, 0.5, 1.0] {
        let step = one_step_kernel(0.7, r, &tech, &pi);
        println!(
            "R {r:.1}: P(s=1) {:.4}, next prior {:.4} / {:.4}, mean posterior {:.12}",
            step.p1, step.theta_down, step.theta_up, step.posterior_mean()
        );
    }

    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
    let report = informativeness_diagnostic(&tech, &grid)?;
    println!(
        "odds ratio rising: {}, separation rising: {}, informative at zero: {}",
        report.odds_ratio_nondecreasing, report.separation_nondecreasing, report.informative_at_zero
    );

    // Partial verification adds two branches that reveal the type outright.
    let mut verified = tech.clone();
    verified.reveal_weight = 0.3;
    for (p, b) in next_prior_lottery(0.7, 0.5, &verified, &pi).branches() {
        println!("  prob {p:.4} -> prior {b:.4}");
    }

    let threshold = threshold_tech(0.3, 0.1)?;
    println!("threshold kernel at R = 0.2, 0.4: {:?}, {:?}", threshold.likelihoods(0.2), threshold.likelihoods(0.4));
    Ok(())
}
