//! Comparative statics over monitoring quality, enforcement, and persistence,
//! plus the instrument-weighted monitoring variant and figure replication.

use crate::dynamic_solver::{
    continuation_for_instruments, dynamic_cutoff, solve_vfi, PolicySchedule, SolverConfig, VfiOutcome,
};
use crate::economy::{Economy, Instruments};
use crate::error::{Result, SolverError};
use crate::monitoring::{apply_enforcement, TransitionMatrix};
use crate::static_solver::{enumerate_frontier, StaticSolver};

/// Pointwise revenue-ordering tolerance used by every sweep.
pub const REVENUE_ORDER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepLevel {
    /// `(name, value)` pairs identifying the level, e.g. `("eps", 0.1)`.
    pub params: Vec<(&'static str, f64)>,
    pub policy: PolicySchedule,
    pub values: Vec<f64>,
    pub cutoff: f64,
    pub iterations: usize,
}

impl SweepLevel {
    fn from_outcome(params: Vec<(&'static str, f64)>, out: VfiOutcome) -> Self {
        Self {
            params,
            cutoff: dynamic_cutoff(&out.policy),
            values: out.value.values().to_vec(),
            policy: out.policy,
            iterations: out.iterations,
        }
    }

    pub fn revenues(&self) -> Vec<f64> {
        self.policy.revenues()
    }
}

/// First violation found when checking an ordering between two levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub theta: f64,
    pub lower_level: usize,
    pub upper_level: usize,
    /// Amount by which the inequality fails, beyond tolerance.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepVerdict {
    pub revenue_violation: Option<Violation>,
    pub cutoff_violation: Option<Violation>,
}

impl SweepVerdict {
    pub fn revenue_ok(&self) -> bool {
        self.revenue_violation.is_none()
    }

    pub fn cutoff_ok(&self) -> bool {
        self.cutoff_violation.is_none()
    }

    pub fn passed(&self) -> bool {
        self.revenue_ok() && self.cutoff_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: &'static str,
    pub thetas: Vec<f64>,
    pub theta_step: f64,
    pub levels: Vec<SweepLevel>,
    /// Level pairs `(a, b)` for which more of the axis should weakly raise `R*`
    /// from `a` to `b` (or lower it, see `revenue_rises`).
    pub comparisons: Vec<(usize, usize)>,
    /// Whether `R*` is expected to rise along each comparison.
    pub revenue_rises: bool,
    pub verdict: SweepVerdict,
}

impl SweepResult {
    /// Whether the comparison from `a` to `b` holds at grid index `i`.
    pub fn row_ok(&self, a: usize, b: usize, i: usize) -> bool {
        let (ra, rb) = (self.levels[a].policy.points[i].revenue, self.levels[b].policy.points[i].revenue);
        if self.revenue_rises {
            rb >= ra - REVENUE_ORDER_TOL
        } else {
            rb <= ra + REVENUE_ORDER_TOL
        }
    }
}

fn judge(
    levels: &[SweepLevel],
    comparisons: &[(usize, usize)],
    revenue_rises: bool,
    step: f64,
) -> SweepVerdict {
    let mut revenue_violation = None;
    let mut cutoff_violation = None;
    for &(a, b) in comparisons {
        let (la, lb) = (&levels[a], &levels[b]);
        for (pa, pb) in la.policy.points.iter().zip(&lb.policy.points) {
            let diff = if revenue_rises { pa.revenue - pb.revenue } else { pb.revenue - pa.revenue };
            if diff > REVENUE_ORDER_TOL && revenue_violation.is_none() {
                revenue_violation = Some(Violation {
                    theta: pa.theta,
                    lower_level: a,
                    upper_level: b,
                    excess: diff - REVENUE_ORDER_TOL,
                });
            }
        }
        // Higher revenue goes with a lower cutoff.
        let diff = if revenue_rises { lb.cutoff - la.cutoff } else { la.cutoff - lb.cutoff };
        if diff > step && cutoff_violation.is_none() {
            cutoff_violation = Some(Violation {
                theta: lb.cutoff,
                lower_level: a,
                upper_level: b,
                excess: diff - step,
            });
        }
    }
    SweepVerdict {
        revenue_violation,
        cutoff_violation,
    }
}

fn strictly_ascending(xs: &[f64], name: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(SolverError::invalid(format!("{name} list is empty")));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SolverError::invalid(format!("{name} list must be strictly ascending")));
    }
    Ok(())
}

fn chain(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|k| (k - 1, k)).collect()
}

fn finish(
    axis: &'static str,
    config: &SolverConfig,
    levels: Vec<SweepLevel>,
    comparisons: Vec<(usize, usize)>,
    revenue_rises: bool,
) -> SweepResult {
    let step = config.theta_step();
    let verdict = judge(&levels, &comparisons, revenue_rises, step);
    SweepResult {
        axis,
        thetas: config.theta_grid(),
        theta_step: step,
        levels,
        comparisons,
        revenue_rises,
        verdict,
    }
}

/// Bit-flip garbling levels; more garbling should weakly lower `R*` and raise the cutoff.
pub fn sweep_garbling(config: &SolverConfig, eps_list: &[f64]) -> Result<SweepResult> {
    strictly_ascending(eps_list, "eps")?;
    if eps_list.iter().any(|&e| !(0.0..0.5).contains(&e)) {
        return Err(SolverError::invalid("garbling levels must lie in [0, 0.5)"));
    }
    let mut levels = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let cfg = SolverConfig {
            tech: config.tech.clone().with_garbling(eps)?,
            ..config.clone()
        };
        levels.push(SweepLevel::from_outcome(vec![("eps", eps)], solve_vfi(&cfg)?));
    }
    Ok(finish("garble", config, levels, chain(eps_list.len()), false))
}

/// Product grid of verification weight λ and earmark share φ; more of either
/// should weakly raise `R*` and lower the cutoff.
pub fn sweep_enforcement(config: &SolverConfig, lambda_list: &[f64], phi_list: &[f64]) -> Result<SweepResult> {
    strictly_ascending(lambda_list, "lambda")?;
    strictly_ascending(phi_list, "phi")?;
    if lambda_list.iter().chain(phi_list).any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(SolverError::invalid("lambda and phi must lie in [0, 1]"));
    }
    let n_phi = phi_list.len();
    let mut levels = Vec::with_capacity(lambda_list.len() * n_phi);
    for &lambda in lambda_list {
        for &phi in phi_list {
            let cfg = SolverConfig {
                tech: apply_enforcement(&config.tech, lambda)?,
                phi,
                ..config.clone()
            };
            levels.push(SweepLevel::from_outcome(vec![("lambda", lambda), ("phi", phi)], solve_vfi(&cfg)?));
        }
    }
    let mut comparisons = Vec::new();
    for a in 0..lambda_list.len() {
        for b in 0..n_phi {
            let k = a * n_phi + b;
            if b + 1 < n_phi {
                comparisons.push((k, k + 1));
            }
            if a + 1 < lambda_list.len() {
                comparisons.push((k, k + n_phi));
            }
        }
    }
    Ok(finish("enforce", config, levels, comparisons, true))
}

/// Type-persistence levels, each weakly more persistent than the last; `R*` should weakly rise.
pub fn sweep_persistence(config: &SolverConfig, pi_levels: &[(f64, f64)]) -> Result<SweepResult> {
    if pi_levels.is_empty() {
        return Err(SolverError::invalid("persistence list is empty"));
    }
    for w in pi_levels.windows(2) {
        let ((h0, o0), (h1, o1)) = (w[0], w[1]);
        if !(h1 >= h0 && o1 >= o0 && (h1, o1) != (h0, o0)) {
            return Err(SolverError::invalid("persistence levels must be componentwise ascending"));
        }
    }
    let mut levels = Vec::with_capacity(pi_levels.len());
    for &(hh, oo) in pi_levels {
        let cfg = SolverConfig {
            transition: TransitionMatrix::new(hh, oo)?,
            ..config.clone()
        };
        levels.push(SweepLevel::from_outcome(vec![("pi_hh", hh), ("pi_oo", oo)], solve_vfi(&cfg)?));
    }
    Ok(finish("persist", config, levels, chain(pi_levels.len()), true))
}

/// Outcome of solving with instrument-weighted monitoring at one belief.
#[derive(Debug, Clone, PartialEq)]
pub struct MixReport {
    pub mix_weights: (f64, f64),
    pub theta: f64,
    /// Mix chosen by the dynamic solver at `theta`.
    pub chosen: Instruments,
    /// Share of the chosen mix's revenue attributed to the labor tax.
    pub labor_share: f64,
    pub target_s: f64,
    pub target_r: f64,
    pub frontier_size: usize,
    /// Range of the continuation value across the frontier of the chosen `(S, R)`.
    pub continuation_spread: f64,
    /// Range of period welfare across the same frontier.
    pub welfare_spread: f64,
    pub cutoff: f64,
}

/// Solves with the kernel reading `w_L R_L + w_B R_B` and measures how much
/// the continuation value depends on the mix along the chosen frontier.
pub fn instrument_specific_variant(
    config: &SolverConfig,
    mix_weights: (f64, f64),
    theta: f64,
    frontier_tol: f64,
) -> Result<MixReport> {
    let (w_l, w_b) = mix_weights;
    let cfg = SolverConfig {
        tech: config.tech.clone().with_mix_weights(w_l, w_b)?,
        ..config.clone()
    };
    let out = solve_vfi(&cfg)?;
    let point = *out.policy.nearest(theta);
    let econ = &cfg.economy;
    let alloc = econ.allocation(point.instruments)?;
    let (r_l, _) = econ.revenue_split(point.instruments, &alloc);
    let labor_share = if alloc.revenue > 0.0 { r_l / alloc.revenue } else { 0.0 };

    let (continuation_spread, welfare_spread, frontier_size) = if alloc.revenue > 0.0 {
        let frontier = enumerate_frontier(alloc.net_of_tax, alloc.revenue, econ, frontier_tol)?;
        let conts: Vec<f64> = frontier
            .members
            .iter()
            .map(|m| continuation_for_instruments(&out.value, point.theta, m.instruments, &m.allocation, &cfg))
            .collect();
        let wels: Vec<f64> = frontier
            .members
            .iter()
            .map(|m| m.welfare(point.theta, cfg.phi, &cfg.costs))
            .collect();
        (range(&conts), range(&wels), frontier.cardinality())
    } else {
        (0.0, 0.0, 0)
    };
    Ok(MixReport {
        mix_weights,
        theta: point.theta,
        chosen: point.instruments,
        labor_share,
        target_s: alloc.net_of_tax,
        target_r: alloc.revenue,
        frontier_size,
        continuation_spread,
        welfare_spread,
        cutoff: dynamic_cutoff(&out.policy),
    })
}

fn range(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Beliefs at which the reference coordinates are read.
pub const FIGURE_THETAS: [f64; 16] = [
    0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95,
];

/// Reference coordinates for the optimal revenue scale.
pub const REFERENCE_REVENUE: [f64; 16] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.017, 0.143, 0.252, 0.345, 0.429, 0.505, 0.572, 0.631,
];

/// Reference coordinates for the output-tax rate of the implementing mix.
pub const REFERENCE_OUTPUT_TAX: [f64; 16] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.010, 0.085, 0.150, 0.205, 0.255, 0.300, 0.340, 0.375,
];

/// Largest allowed gap between computed and reference coordinates.
pub const FIGURE_TOL: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureRow {
    pub theta: f64,
    pub revenue: f64,
    pub reference_revenue: f64,
    pub output_tax: f64,
    pub reference_output_tax: f64,
    pub labor_tax: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureTables {
    pub rows: Vec<FigureRow>,
}

impl FigureTables {
    pub fn max_revenue_deviation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.revenue - r.reference_revenue).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_output_tax_deviation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.output_tax - r.reference_output_tax).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_labor_tax(&self) -> f64 {
        self.rows.iter().map(|r| r.labor_tax.abs()).fold(0.0, f64::max)
    }

    pub fn within_tolerance(&self) -> bool {
        self.max_revenue_deviation() <= FIGURE_TOL
            && self.max_output_tax_deviation() <= FIGURE_TOL
            && self.max_labor_tax() == 0.0
    }
}

/// Static optimum of the closed-form economy at the reference beliefs. The
/// instrument grid, costs and earmark share come from `config`.
pub fn replicate_figures(config: &SolverConfig) -> Result<FigureTables> {
    let economy = Economy::Quant {
        tau_max: config.grid.tau_max,
    };
    let solver = StaticSolver::new(economy, config.grid, config.costs, config.phi)?;
    let rows = FIGURE_THETAS
        .iter()
        .zip(REFERENCE_REVENUE.iter().zip(&REFERENCE_OUTPUT_TAX))
        .map(|(&theta, (&rr, &rt))| {
            let s = solver.solve(theta)?;
            Ok(FigureRow {
                theta,
                revenue: s.revenue(),
                reference_revenue: rr,
                output_tax: s.instruments.tau_b,
                reference_output_tax: rt,
                labor_tax: s.instruments.tau_l,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FigureTables { rows })
}
