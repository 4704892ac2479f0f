//! One-period benchmark with exogenous trust.

use crate::economy::{
    build_feasible_set, Allocation, Economy, FeasiblePoint, GridSpec, Instruments,
};
use crate::error::{Result, SolverError};
use crate::search::{grid_then_refine, tie_break_order};

/// Quadratic instrument costs `a(τ) = c_L τ_L² + c_B τ_B²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InstrumentCosts {
    pub c_l: f64,
    pub c_b: f64,
}

impl InstrumentCosts {
    pub const ZERO: InstrumentCosts = InstrumentCosts { c_l: 0.0, c_b: 0.0 };

    pub fn new(c_l: f64, c_b: f64) -> Result<Self> {
        if c_l >= 0.0 && c_b >= 0.0 {
            Ok(Self { c_l, c_b })
        } else {
            Err(SolverError::invalid("instrument cost coefficients must be nonnegative"))
        }
    }

    pub fn cost(&self, tau: Instruments) -> f64 {
        self.c_l * tau.tau_l * tau.tau_l + self.c_b * tau.tau_b * tau.tau_b
    }
}

/// Marginal value of a unit of revenue when a share φ is delivered regardless of type.
pub fn effective_weight(theta: f64, phi: f64) -> f64 {
    theta + (1.0 - theta) * phi
}

pub(crate) fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(SolverError::invalid(format!("{name} = {x} must lie in [0, 1]")))
    }
}

/// `U(C) − V(L) − a(τ)`; the part of the period payoff that does not scale with beliefs.
pub(crate) fn private_payoff(
    economy: &Economy,
    alloc: &Allocation,
    tau: Instruments,
    costs: &InstrumentCosts,
) -> Result<f64> {
    Ok(economy.private_utility(alloc)? - costs.cost(tau))
}

/// Period welfare `U(C) − V(L) + [θ + (1−θ)φ] R − a(τ)`.
pub fn static_welfare(
    theta: f64,
    instruments: Instruments,
    economy: &Economy,
    phi: f64,
    costs: &InstrumentCosts,
) -> Result<f64> {
    check_unit("theta", theta)?;
    check_unit("phi", phi)?;
    let alloc = economy.allocation(instruments)?;
    let base = private_payoff(economy, &alloc, instruments, costs)?;
    Ok(base + effective_weight(theta, phi) * alloc.revenue)
}

/// Trust cutoff `U'(Y⁰)` at the zero-tax allocation.
pub fn static_cutoff(economy: &Economy) -> Result<f64> {
    let zero = economy.zero_tax_allocation()?;
    Ok(economy.marginal_utility(zero.output))
}

/// Belief at which `θ + (1−θ)φ` reaches `theta_bar`; 0 when the earmark alone clears it.
pub fn earmark_adjusted_cutoff(theta_bar: f64, phi: f64) -> f64 {
    if phi >= 1.0 {
        return 0.0;
    }
    ((theta_bar - phi) / (1.0 - phi)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticSolution {
    pub theta: f64,
    pub instruments: Instruments,
    pub allocation: Allocation,
    pub welfare: f64,
    /// The zero-tax point won: the belief sits in the no-tax region.
    pub at_cutoff: bool,
}

impl StaticSolution {
    pub fn revenue(&self) -> f64 {
        self.allocation.revenue
    }
}

/// Static and dynamic trust cutoffs side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffReport {
    pub theta_bar_static: f64,
    pub theta_bar_dynamic: f64,
    pub gap: f64,
}

impl CutoffReport {
    pub fn new(theta_bar_static: f64, theta_bar_dynamic: f64) -> Self {
        Self {
            theta_bar_static,
            theta_bar_dynamic,
            gap: theta_bar_static - theta_bar_dynamic,
        }
    }

    /// Dynamic cutoff weakly below the static one up to `grid_step`.
    pub fn ordered(&self, grid_step: f64) -> bool {
        self.gap >= -grid_step
    }
}

/// Reusable static problem: the feasible set is built once and solved for many beliefs.
#[derive(Debug, Clone)]
pub struct StaticSolver {
    economy: Economy,
    grid: GridSpec,
    costs: InstrumentCosts,
    phi: f64,
    points: Vec<FeasiblePoint>,
    bases: Vec<f64>,
    order: Vec<usize>,
}

impl StaticSolver {
    pub fn new(economy: Economy, grid: GridSpec, costs: InstrumentCosts, phi: f64) -> Result<Self> {
        check_unit("phi", phi)?;
        economy.validate()?;
        let points = build_feasible_set(&economy, &grid)?;
        let bases = points
            .iter()
            .map(|p| private_payoff(&economy, &p.allocation, p.instruments, &costs))
            .collect::<Result<Vec<_>>>()?;
        let order = tie_break_order(&points);
        Ok(Self {
            economy,
            grid,
            costs,
            phi,
            points,
            bases,
            order,
        })
    }

    pub fn economy(&self) -> &Economy {
        &self.economy
    }

    pub fn solve(&self, theta: f64) -> Result<StaticSolution> {
        check_unit("theta", theta)?;
        let weight = effective_weight(theta, self.phi);
        let choice = grid_then_refine(
            &self.economy,
            &self.points,
            &self.order,
            (self.grid.tau_l_step(), self.grid.tau_b_step()),
            |j| self.bases[j] + weight * self.points[j].allocation.revenue,
            |tau, alloc| -> Result<f64> {
                Ok(private_payoff(&self.economy, alloc, tau, &self.costs)? + weight * alloc.revenue)
            },
        )?;
        Ok(StaticSolution {
            theta,
            instruments: choice.instruments,
            allocation: choice.allocation,
            welfare: choice.value,
            at_cutoff: choice.allocation.revenue == 0.0,
        })
    }

    /// Cutoff located by bisecting on the sign of the solved revenue.
    pub fn measured_cutoff(&self, tol: f64) -> Result<f64> {
        let taxes = |theta: f64| -> Result<bool> { Ok(self.solve(theta)?.revenue() > 0.0) };
        if taxes(0.0)? {
            return Ok(0.0);
        }
        if !taxes(1.0)? {
            return Ok(1.0);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if taxes(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Grid search plus local refinement of the static problem at one belief.
pub fn solve_static(
    theta: f64,
    economy: &Economy,
    grid: &GridSpec,
    costs: &InstrumentCosts,
    phi: f64,
) -> Result<StaticSolution> {
    StaticSolver::new(*economy, *grid, *costs, phi)?.solve(theta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierMember {
    pub instruments: Instruments,
    pub allocation: Allocation,
    /// `U(C) − V(L)` at the member's allocation.
    pub private_utility: f64,
}

impl FrontierMember {
    pub fn welfare(&self, theta: f64, phi: f64, costs: &InstrumentCosts) -> f64 {
        self.private_utility - costs.cost(self.instruments)
            + effective_weight(theta, phi) * self.allocation.revenue
    }
}

/// Instrument pairs implementing a target `(S, R)` within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    pub target_s: f64,
    pub target_r: f64,
    pub tol: f64,
    pub members: Vec<FrontierMember>,
}

impl Frontier {
    pub fn cardinality(&self) -> usize {
        self.members.len()
    }

    pub fn instruments(&self) -> Vec<Instruments> {
        self.members.iter().map(|m| m.instruments).collect()
    }
}

const FRONTIER_SCAN_POINTS: usize = 20_001;

/// Scans the `S = target_s` level curve, parametrized by τ_L on a fine grid,
/// and keeps points whose revenue is within `tol` of `target_r`. Sign changes of
/// `R − target_r` between neighbors are polished by bisection so that every
/// crossing of the curve is reported once. An empty result is valid.
pub fn enumerate_frontier(
    target_s: f64,
    target_r: f64,
    economy: &Economy,
    tol: f64,
) -> Result<Frontier> {
    if !(tol > 0.0) {
        return Err(SolverError::invalid("frontier tolerance must be positive"));
    }
    if !(target_s > 0.0 && target_s <= 1.0) {
        return Err(SolverError::invalid("target net-of-tax product must lie in (0, 1]"));
    }
    let tau_max = economy.tau_max();
    // τ_B implied by S on the level curve, if admissible.
    let on_curve = |tau_l: f64| -> Option<Instruments> {
        let tau_b = 1.0 - target_s / (1.0 - tau_l);
        let tau_b = if tau_b.abs() < 1e-15 { 0.0 } else { tau_b };
        if (0.0..=tau_max).contains(&tau_b) {
            Instruments::new(tau_l, tau_b).ok()
        } else {
            None
        }
    };
    let member = |tau: Instruments| -> Result<Option<FrontierMember>> {
        let allocation = economy.allocation(tau)?;
        if (allocation.net_of_tax - target_s).abs() > tol
            || (allocation.revenue - target_r).abs() > tol
        {
            return Ok(None);
        }
        let private_utility = economy.private_utility(&allocation)?;
        Ok(Some(FrontierMember {
            instruments: tau,
            allocation,
            private_utility,
        }))
    };

    let mut members = Vec::new();
    // (τ_L, R − target, was a member)
    let mut prev: Option<(f64, f64, bool)> = None;
    for i in 0..FRONTIER_SCAN_POINTS {
        let tau_l = tau_max * i as f64 / (FRONTIER_SCAN_POINTS - 1) as f64;
        let Some(tau) = on_curve(tau_l) else {
            prev = None;
            continue;
        };
        let gap = economy.allocation(tau)?.revenue - target_r;
        let hit = member(tau)?;
        let is_hit = hit.is_some();
        members.extend(hit);
        if let Some((prev_l, prev_gap, prev_hit)) = prev {
            // A crossing already represented by a scan hit is not polished again.
            if prev_gap * gap < 0.0 && !prev_hit && !is_hit {
                let (mut lo, mut hi, mut lo_gap) = (prev_l, tau_l, prev_gap);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let Some(t) = on_curve(mid) else { break };
                    let g = economy.allocation(t)?.revenue - target_r;
                    if g == 0.0 || hi - lo < 1e-15 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if (g < 0.0) == (lo_gap < 0.0) {
                        lo = mid;
                        lo_gap = g;
                    } else {
                        hi = mid;
                    }
                }
                if let Some(t) = on_curve(0.5 * (lo + hi)) {
                    if let Some(m) = member(t)? {
                        members.push(m);
                    }
                }
            }
        }
        prev = Some((tau_l, gap, is_hit));
    }
    members.sort_by(|a, b| a.instruments.tau_l.total_cmp(&b.instruments.tau_l));
    members.dedup_by(|a, b| (a.instruments.tau_l - b.instruments.tau_l).abs() < 1e-13);
    Ok(Frontier {
        target_s,
        target_r,
        tol,
        members,
    })
}

/// The frontier element with the smallest instrument cost; ties go to the smallest τ_L.
pub fn select_mix_by_cost(frontier: &[Instruments], costs: &InstrumentCosts) -> Result<Instruments> {
    frontier
        .iter()
        .copied()
        .min_by(|a, b| {
            costs
                .cost(*a)
                .total_cmp(&costs.cost(*b))
                .then(a.tau_l.total_cmp(&b.tau_l))
        })
        .ok_or(SolverError::EmptyFrontier)
}
