//! Signal kernels, Bayesian updating, and prior propagation.
//!
//! A [`MonitoringTech`] maps announced (kernel) revenue to type-indexed
//! probabilities of a favorable signal. Kernels can be garbled with symmetric
//! bit-flip noise, mixed with a perfectly revealing verification component,
//! and made instrument-specific through per-instrument revenue weights.

use thiserror::Error;

/// Signal probabilities are clamped to `[PROB_FLOOR, 1 − PROB_FLOOR]`.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonitoringError {
    #[error("invalid monitoring parameter: {0}")]
    InvalidParameter(String),
    #[error("revenue grid must be nonempty and ascending")]
    InvalidGrid,
}

fn invalid(msg: impl Into<String>) -> MonitoringError {
    MonitoringError::InvalidParameter(msg.into())
}

/// Government type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GovType {
    Honest,
    Opportunist,
}

impl GovType {
    pub fn label(&self) -> &'static str {
        match self {
            GovType::Honest => "H",
            GovType::Opportunist => "O",
        }
    }
}

/// The ungarbled favorable-signal schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalKernel {
    /// `q_H(R) = a_H + b_H R/(R+1)`, `q_O(R) = b_O R/(R+1)`.
    Ratio { a_h: f64, b_h: f64, b_o: f64 },
    /// `s = 1{G ≥ κ}` seen through bit-flip noise `ε`; the opportunist delivers nothing.
    Threshold { kappa: f64, eps: f64 },
    /// Piecewise-linear tables on an ascending revenue grid (flat extrapolation).
    Tabulated {
        revenue: Vec<f64>,
        q_h: Vec<f64>,
        q_o: Vec<f64>,
    },
}

fn table_lookup(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] * (1.0 - w) + ys[i + 1] * w
}

impl SignalKernel {
    fn raw(&self, ty: GovType, r: f64) -> f64 {
        match self {
            SignalKernel::Ratio { a_h, b_h, b_o } => {
                let x = r / (r + 1.0);
                match ty {
                    GovType::Honest => a_h + b_h * x,
                    GovType::Opportunist => b_o * x,
                }
            }
            SignalKernel::Threshold { kappa, eps } => match ty {
                GovType::Honest => threshold_prob(r, *kappa, *eps),
                GovType::Opportunist => *eps,
            },
            SignalKernel::Tabulated { revenue, q_h, q_o } => match ty {
                GovType::Honest => table_lookup(revenue, q_h, r),
                GovType::Opportunist => table_lookup(revenue, q_o, r),
            },
        }
    }
}

/// Probability of `s = 1` when the delivered amount `g` is compared to `κ`.
pub fn threshold_prob(g: f64, kappa: f64, eps: f64) -> f64 {
    if g >= kappa {
        1.0 - eps
    } else {
        eps
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitoringTech {
    pub kernel: SignalKernel,
    /// Bit-flip garbling level in `[0, 0.5]`.
    pub garble_eps: f64,
    /// Weight λ of the perfectly revealing verification component.
    pub reveal_weight: f64,
    /// Informativeness weights `(w_L, w_B)` on labor- and broad-attributed revenue.
    pub mix_weights: (f64, f64),
}

impl Default for MonitoringTech {
    fn default() -> Self {
        Self::baseline()
    }
}

impl MonitoringTech {
    /// `q_H = 0.2 + 0.8 R/(R+1)`, `q_O = 0.1 R/(R+1)`.
    pub fn baseline() -> Self {
        Self::ratio(0.2, 0.8, 0.1).expect("baseline ratio kernel is valid")
    }

    pub fn ratio(a_h: f64, b_h: f64, b_o: f64) -> Result<Self, MonitoringError> {
        let tech = Self::from_kernel(SignalKernel::Ratio { a_h, b_h, b_o });
        tech.validate()?;
        Ok(tech)
    }

    pub fn tabulated(revenue: Vec<f64>, q_h: Vec<f64>, q_o: Vec<f64>) -> Result<Self, MonitoringError> {
        let tech = Self::from_kernel(SignalKernel::Tabulated { revenue, q_h, q_o });
        tech.validate()?;
        Ok(tech)
    }

    fn from_kernel(kernel: SignalKernel) -> Self {
        Self {
            kernel,
            garble_eps: 0.0,
            reveal_weight: 0.0,
            mix_weights: (1.0, 1.0),
        }
    }

    pub fn with_garbling(mut self, eps: f64) -> Result<Self, MonitoringError> {
        self.garble_eps = eps;
        self.validate()?;
        Ok(self)
    }

    pub fn with_mix_weights(mut self, w_l: f64, w_b: f64) -> Result<Self, MonitoringError> {
        self.mix_weights = (w_l, w_b);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), MonitoringError> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(0.0..=0.5).contains(&self.garble_eps) {
            return Err(invalid("garbling level must lie in [0, 0.5]"));
        }
        if !unit(self.reveal_weight) {
            return Err(invalid("verification weight must lie in [0, 1]"));
        }
        let (w_l, w_b) = self.mix_weights;
        if !(w_l >= 0.0 && w_b >= 0.0) {
            return Err(invalid("mix weights must be nonnegative"));
        }
        match &self.kernel {
            SignalKernel::Ratio { a_h, b_h, b_o } => {
                if !(unit(*a_h) && unit(a_h + b_h) && *b_h >= 0.0 && unit(*b_o)) {
                    return Err(invalid("ratio kernel probabilities must stay in [0, 1]"));
                }
            }
            SignalKernel::Threshold { kappa, eps } => {
                if !(*kappa >= 0.0) || !(0.0..=0.5).contains(eps) {
                    return Err(invalid("threshold kernel needs κ ≥ 0 and ε ∈ [0, 0.5]"));
                }
            }
            SignalKernel::Tabulated { revenue, q_h, q_o } => {
                if revenue.is_empty() || revenue.len() != q_h.len() || revenue.len() != q_o.len() {
                    return Err(invalid("tabulated kernel needs equal nonempty columns"));
                }
                if revenue.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(invalid("tabulated revenue grid must be strictly ascending"));
                }
                if q_h.iter().chain(q_o.iter()).any(|&q| !unit(q)) {
                    return Err(invalid("tabulated probabilities must lie in [0, 1]"));
                }
            }
        }
        Ok(())
    }

    /// Garbled and clamped probability of a favorable signal.
    pub fn signal_prob(&self, ty: GovType, kernel_revenue: f64) -> f64 {
        self.finish(self.kernel.raw(ty, kernel_revenue))
    }

    fn finish(&self, q: f64) -> f64 {
        let eps = self.garble_eps;
        let q = (1.0 - eps) * q + eps * (1.0 - q);
        q.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
    }

    /// `(q_H, q_O)` at the given kernel revenue.
    pub fn likelihoods(&self, kernel_revenue: f64) -> (f64, f64) {
        (
            self.signal_prob(GovType::Honest, kernel_revenue),
            self.signal_prob(GovType::Opportunist, kernel_revenue),
        )
    }

    /// Probability that the realized signal is favorable when `delivered` is
    /// actually provided. Threshold kernels read the delivered amount; other
    /// kernels are type-indexed on announced revenue.
    pub fn realized_signal_prob(&self, ty: GovType, kernel_revenue: f64, delivered: f64) -> f64 {
        match &self.kernel {
            SignalKernel::Threshold { kappa, eps } => {
                self.finish(threshold_prob(delivered, *kappa, *eps))
            }
            _ => self.signal_prob(ty, kernel_revenue),
        }
    }

    /// Revenue seen by the kernel: `w_L R_L + w_B R_B`.
    pub fn kernel_revenue(&self, labor_part: f64, broad_part: f64) -> f64 {
        let (w_l, w_b) = self.mix_weights;
        if w_l == 1.0 && w_b == 1.0 {
            labor_part + broad_part
        } else {
            w_l * labor_part + w_b * broad_part
        }
    }

    pub fn is_instrument_symmetric(&self) -> bool {
        self.mix_weights.0 == self.mix_weights.1
    }
}

/// Threshold signal with bit-flip noise `eps ∈ (0, 0.5)`.
pub fn threshold_tech(kappa: f64, eps: f64) -> Result<MonitoringTech, MonitoringError> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid("threshold bit-flip must lie in (0, 0.5)"));
    }
    let tech = MonitoringTech::from_kernel(SignalKernel::Threshold { kappa, eps });
    tech.validate()?;
    Ok(tech)
}

/// Adds a perfectly revealing component with weight λ.
pub fn apply_enforcement(tech: &MonitoringTech, lambda: f64) -> Result<MonitoringTech, MonitoringError> {
    let mut out = tech.clone();
    out.reveal_weight = lambda;
    out.validate()?;
    Ok(out)
}

pub fn signal_prob(tech: &MonitoringTech, ty: GovType, revenue: f64) -> f64 {
    tech.signal_prob(ty, revenue)
}

/// Two-state type chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    pub pi_hh: f64,
    pub pi_oo: f64,
}

impl Default for TransitionMatrix {
    fn default() -> Self {
        Self {
            pi_hh: 0.9,
            pi_oo: 0.9,
        }
    }
}

impl TransitionMatrix {
    pub fn new(pi_hh: f64, pi_oo: f64) -> Result<Self, MonitoringError> {
        if (0.0..=1.0).contains(&pi_hh) && (0.0..=1.0).contains(&pi_oo) {
            Ok(Self { pi_hh, pi_oo })
        } else {
            Err(invalid("transition probabilities must lie in [0, 1]"))
        }
    }

    /// `Φ(θ̂) = π_HH θ̂ + (1 − π_OO)(1 − θ̂)`.
    pub fn propagate(&self, theta_hat: f64) -> f64 {
        self.pi_hh * theta_hat + (1.0 - self.pi_oo) * (1.0 - theta_hat)
    }
}

pub fn propagate_prior(theta_hat: f64, pi: &TransitionMatrix) -> f64 {
    pi.propagate(theta_hat)
}

fn posterior_from(theta: f64, like_h: f64, like_o: f64) -> f64 {
    let num = theta * like_h;
    let den = num + (1.0 - theta) * like_o;
    (num / den).clamp(0.0, 1.0)
}

/// Posterior probability of the honest type after signal `s`.
pub fn bayes_posterior(theta: f64, revenue: f64, favorable: bool, tech: &MonitoringTech) -> f64 {
    let (qh, qo) = tech.likelihoods(revenue);
    if favorable {
        posterior_from(theta, qh, qo)
    } else {
        posterior_from(theta, 1.0 - qh, 1.0 - qo)
    }
}

/// Signal probability and the two propagated next priors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefStep {
    pub p1: f64,
    /// Posterior after `s = 1`, before propagation.
    pub posterior_up: f64,
    /// Posterior after `s = 0`, before propagation.
    pub posterior_down: f64,
    pub theta_up: f64,
    pub theta_down: f64,
}

impl BeliefStep {
    pub fn from_likelihoods(theta: f64, qh: f64, qo: f64, pi: &TransitionMatrix) -> Self {
        let p1 = theta * qh + (1.0 - theta) * qo;
        let posterior_up = posterior_from(theta, qh, qo);
        let posterior_down = posterior_from(theta, 1.0 - qh, 1.0 - qo);
        Self {
            p1,
            posterior_up,
            posterior_down,
            theta_up: pi.propagate(posterior_up).clamp(0.0, 1.0),
            theta_down: pi.propagate(posterior_down).clamp(0.0, 1.0),
        }
    }

    /// `p1 θ̂₁ + (1 − p1) θ̂₀`, which equals the prior.
    pub fn posterior_mean(&self) -> f64 {
        self.p1 * self.posterior_up + (1.0 - self.p1) * self.posterior_down
    }
}

/// One Bayes step under the signal experiment (ignores the verification component).
pub fn one_step_kernel(
    theta: f64,
    revenue: f64,
    tech: &MonitoringTech,
    pi: &TransitionMatrix,
) -> BeliefStep {
    let (qh, qo) = tech.likelihoods(revenue);
    BeliefStep::from_likelihoods(theta, qh, qo, pi)
}

/// Distribution over next priors, including the verification branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefLottery {
    branches: [(f64, f64); 4],
    len: usize,
}

impl BeliefLottery {
    pub fn new(theta: f64, step: &BeliefStep, reveal_weight: f64, pi: &TransitionMatrix) -> Self {
        let base = 1.0 - reveal_weight;
        let mut branches = [(0.0, 0.0); 4];
        branches[0] = (base * step.p1, step.theta_up);
        branches[1] = (base * (1.0 - step.p1), step.theta_down);
        if reveal_weight > 0.0 {
            branches[2] = (reveal_weight * theta, pi.propagate(1.0));
            branches[3] = (reveal_weight * (1.0 - theta), pi.propagate(0.0));
            Self { branches, len: 4 }
        } else {
            Self { branches, len: 2 }
        }
    }

    /// `(probability, next prior)` pairs.
    pub fn branches(&self) -> &[(f64, f64)] {
        &self.branches[..self.len]
    }

    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.branches().iter().map(|&(p, b)| p * f(b)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|b| b)
    }
}

/// Next-prior lottery at `(θ, R)` for the full (possibly enforced) technology.
pub fn next_prior_lottery(
    theta: f64,
    revenue: f64,
    tech: &MonitoringTech,
    pi: &TransitionMatrix,
) -> BeliefLottery {
    let step = one_step_kernel(theta, revenue, tech, pi);
    BeliefLottery::new(theta, &step, tech.reveal_weight, pi)
}

/// Monotonicity diagnostics on an ascending revenue grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InformativenessReport {
    /// `q_H(1−q_O) / (q_O(1−q_H))` at each grid point (clamped probabilities).
    pub odds_ratios: Vec<f64>,
    pub odds_ratio_nondecreasing: bool,
    /// `q_H − q_O` nondecreasing on the grid.
    pub separation_nondecreasing: bool,
    /// `q_H(0) ≠ q_O(0)`.
    pub informative_at_zero: bool,
}

pub fn informativeness_diagnostic(
    tech: &MonitoringTech,
    revenue_grid: &[f64],
) -> Result<InformativenessReport, MonitoringError> {
    if revenue_grid.is_empty() || revenue_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(MonitoringError::InvalidGrid);
    }
    let probs: Vec<(f64, f64)> = revenue_grid.iter().map(|&r| tech.likelihoods(r)).collect();
    let odds_ratios: Vec<f64> = probs
        .iter()
        .map(|&(h, o)| h * (1.0 - o) / (o * (1.0 - h)))
        .collect();
    let nondecreasing = |xs: &[f64]| {
        xs.windows(2)
            .all(|w| w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0))
    };
    let separation: Vec<f64> = probs.iter().map(|&(h, o)| h - o).collect();
    let (h0, o0) = tech.likelihoods(0.0);
    Ok(InformativenessReport {
        odds_ratio_nondecreasing: nondecreasing(&odds_ratios),
        separation_nondecreasing: nondecreasing(&separation),
        informative_at_zero: (h0 - o0).abs() > PROB_FLOOR,
        odds_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn baseline_signal_probabilities() {
        let tech = MonitoringTech::baseline();
        assert!(close(signal_prob(&tech, GovType::Honest, 1.0), 0.6, 1e-15));
        assert!(close(signal_prob(&tech, GovType::Opportunist, 1.0), 0.05, 1e-15));
        assert_eq!(signal_prob(&tech, GovType::Opportunist, 0.0), PROB_FLOOR);
    }

    #[test]
    fn fully_garbled_is_uninformative() {
        let tech = MonitoringTech::baseline().with_garbling(0.5).unwrap();
        for r in [0.0, 0.3, 2.0] {
            assert_eq!(tech.likelihoods(r), (0.5, 0.5));
        }
        let step = one_step_kernel(0.5, 1.0, &tech, &TransitionMatrix::default());
        assert!(close(step.theta_up, 0.5, 1e-15));
        assert!(close(step.theta_down, 0.5, 1e-15));
    }

    #[test]
    fn bayes_examples() {
        let tech = MonitoringTech::baseline();
        assert!(close(bayes_posterior(0.5, 1.0, true, &tech), 0.923077, 1e-6));
        assert!(close(bayes_posterior(0.5, 1.0, false, &tech), 0.296296, 1e-6));
        assert_eq!(bayes_posterior(1.0, 1.0, true, &tech), 1.0);
        assert_eq!(bayes_posterior(1.0, 1.0, false, &tech), 1.0);
        assert_eq!(bayes_posterior(0.0, 0.0, true, &tech), 0.0);
    }

    #[test]
    fn propagation_examples() {
        let pi = TransitionMatrix::default();
        assert!(close(propagate_prior(1.0, &pi), 0.9, 1e-15));
        assert!(close(propagate_prior(0.0, &pi), 0.1, 1e-15));
        assert!(close(propagate_prior(12.0 / 13.0, &pi), 0.838462, 1e-6));
    }

    #[test]
    fn one_step_example() {
        let step = one_step_kernel(0.5, 1.0, &MonitoringTech::baseline(), &TransitionMatrix::default());
        assert!(close(step.p1, 0.325, 1e-12));
        assert!(close(step.theta_up, 0.838462, 1e-6));
        assert!(close(step.theta_down, 0.337037, 1e-6));
    }

    #[test]
    fn martingale_at_fixed_point() {
        let step = one_step_kernel(0.7, 0.3, &MonitoringTech::baseline(), &TransitionMatrix::default());
        assert!((step.posterior_mean() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn enforcement_examples() {
        let pi = TransitionMatrix::default();
        let base = MonitoringTech::baseline();
        let same = apply_enforcement(&base, 0.0).unwrap();
        assert_eq!(
            next_prior_lottery(0.4, 1.0, &same, &pi).branches(),
            next_prior_lottery(0.4, 1.0, &base, &pi).branches()
        );

        let full = apply_enforcement(&base, 1.0).unwrap();
        let lot = next_prior_lottery(0.3, 1.0, &full, &pi);
        let mass: f64 = lot
            .branches()
            .iter()
            .filter(|(p, _)| *p > 0.0)
            .map(|(p, b)| {
                assert!(close(*b, 0.9, 1e-15) || close(*b, 0.1, 1e-15));
                *p
            })
            .sum();
        assert!(close(mass, 1.0, 1e-15));
        assert!(close(lot.mean(), 0.3 * 0.9 + 0.7 * 0.1, 1e-15));

        let half = apply_enforcement(&base, 0.5).unwrap();
        let lot = next_prior_lottery(0.5, 1.0, &half, &pi);
        assert!(close(lot.mean(), pi.propagate(0.5), 1e-12));

        assert!(apply_enforcement(&base, 1.5).is_err());
    }

    #[test]
    fn threshold_examples() {
        let tech = threshold_tech(0.1, 0.2).unwrap();
        assert!(close(tech.signal_prob(GovType::Honest, 0.5), 0.8, 1e-15));
        assert!(close(tech.signal_prob(GovType::Opportunist, 0.5), 0.2, 1e-15));
        assert!(close(tech.signal_prob(GovType::Honest, 0.05), 0.2, 1e-15));
        assert!(threshold_tech(0.1, 0.5).is_err());
        let nearly = threshold_tech(0.1, 0.5 - 1e-13).unwrap();
        let (h, o) = nearly.likelihoods(1.0);
        assert!((h - o).abs() < 1e-12);
    }

    #[test]
    fn informativeness_of_baseline_kernel() {
        let rep = informativeness_diagnostic(&MonitoringTech::baseline(), &[0.0, 0.5, 1.0, 2.0]).unwrap();
        assert!(rep.informative_at_zero);
        assert!(rep.separation_nondecreasing);
        // q_O(0) = 0 sends the odds ratio to the clamp ceiling at R = 0, after
        // which it drops before rising again.
        assert!(!rep.odds_ratio_nondecreasing);
        assert!(rep.odds_ratios[1] < rep.odds_ratios[2] && rep.odds_ratios[2] < rep.odds_ratios[3]);
    }

    #[test]
    fn informativeness_of_garbled_and_threshold() {
        let garbled = MonitoringTech::baseline().with_garbling(0.5).unwrap();
        let rep = informativeness_diagnostic(&garbled, &[0.0, 0.5, 1.0]).unwrap();
        assert!(rep.odds_ratio_nondecreasing && rep.separation_nondecreasing);
        assert!(rep.odds_ratios.iter().all(|&x| close(x, 1.0, 1e-12)));
        assert!(!rep.informative_at_zero);

        let thr = threshold_tech(0.75, 0.2).unwrap();
        let rep = informativeness_diagnostic(&thr, &[0.0, 0.5, 1.0, 2.0]).unwrap();
        assert!(rep.odds_ratio_nondecreasing);
        let jumps = rep.odds_ratios.windows(2).filter(|w| w[1] > w[0] + 1e-12).count();
        assert_eq!(jumps, 1);
        assert!(!rep.informative_at_zero);

        assert!(informativeness_diagnostic(&thr, &[]).is_err());
        assert!(informativeness_diagnostic(&thr, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn tabulated_kernel_interpolates() {
        let tech = MonitoringTech::tabulated(vec![0.0, 1.0], vec![0.2, 0.6], vec![0.1, 0.1]).unwrap();
        assert!(close(tech.signal_prob(GovType::Honest, 0.5), 0.4, 1e-15));
        assert!(close(tech.signal_prob(GovType::Honest, 3.0), 0.6, 1e-15));
        assert!(MonitoringTech::tabulated(vec![1.0, 0.0], vec![0.2, 0.6], vec![0.1, 0.1]).is_err());
    }

    #[test]
    fn boundary_beliefs_absorb() {
        let tech = MonitoringTech::baseline();
        let pi = TransitionMatrix::default();
        for r in [0.0, 0.4, 5.0] {
            let up = one_step_kernel(1.0, r, &tech, &pi);
            assert_eq!((up.posterior_up, up.posterior_down), (1.0, 1.0));
            let down = one_step_kernel(0.0, r, &tech, &pi);
            assert_eq!((down.posterior_up, down.posterior_down), (0.0, 0.0));
        }
    }
}
