//! Value-function iteration on the belief grid.
//!
//! The iteration runs the Bellman operator restricted to the finite instrument
//! grid, which is an exact β-contraction. Once values converge, the policy is
//! extracted with the same grid argmax and local golden-section refinement the
//! static solver uses. With β = 0 the two solvers therefore agree to the last bit.

use crate::economy::{build_feasible_set, Allocation, Economy, FeasiblePoint, GridSpec, Instruments};
use crate::error::{Result, SolverError};
use crate::monitoring::{BeliefLottery, BeliefStep, MonitoringTech, TransitionMatrix};
use crate::search::{grid_then_refine, ordered_argmax, tie_break_order};
use crate::static_solver::{check_unit, effective_weight, private_payoff, InstrumentCosts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Revenue above which a policy counts as taxing.
pub const POSITIVE_REVENUE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub beta: f64,
    pub theta_grid_size: usize,
    pub stop_tol: f64,
    pub max_iters: usize,
    pub economy: Economy,
    pub tech: MonitoringTech,
    pub transition: TransitionMatrix,
    pub grid: GridSpec,
    pub costs: InstrumentCosts,
    pub phi: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta: 0.95,
            theta_grid_size: 401,
            stop_tol: 1e-9,
            max_iters: 10_000,
            economy: Economy::quant(),
            tech: MonitoringTech::baseline(),
            transition: TransitionMatrix::default(),
            grid: GridSpec::default(),
            costs: InstrumentCosts::ZERO,
            phi: 0.0,
        }
    }
}

impl SolverConfig {
    /// β = 0 is accepted and yields the one-period problem.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.beta) {
            return Err(SolverError::invalid(format!("beta = {} must lie in [0, 1)", self.beta)));
        }
        if self.theta_grid_size < 3 {
            return Err(SolverError::invalid("belief grid needs at least 3 points"));
        }
        if !(self.stop_tol > 0.0) {
            return Err(SolverError::invalid("stop_tol must be positive"));
        }
        if self.max_iters == 0 {
            return Err(SolverError::invalid("max_iters must be at least 1"));
        }
        check_unit("phi", self.phi)?;
        if self.costs.c_l < 0.0 || self.costs.c_b < 0.0 {
            return Err(SolverError::invalid("instrument cost coefficients must be nonnegative"));
        }
        self.economy.validate()?;
        self.tech.validate()?;
        TransitionMatrix::new(self.transition.pi_hh, self.transition.pi_oo)?;
        Ok(())
    }

    pub fn theta_grid(&self) -> Vec<f64> {
        uniform_grid(self.theta_grid_size)
    }

    pub fn theta_step(&self) -> f64 {
        1.0 / (self.theta_grid_size - 1) as f64
    }
}

pub(crate) fn uniform_grid(n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n).map(|i| i as f64 / last).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    theta_grid: Vec<f64>,
    values: Vec<f64>,
}

impl ValueFunction {
    pub fn new(theta_grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if theta_grid.len() != values.len() || theta_grid.len() < 2 {
            return Err(SolverError::invalid("grid and values must have equal length of at least 2"));
        }
        if theta_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SolverError::invalid("belief grid must be strictly ascending"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::invalid("values must be finite"));
        }
        Ok(Self { theta_grid, values })
    }

    pub fn constant(theta_grid: Vec<f64>, c: f64) -> Result<Self> {
        let values = vec![c; theta_grid.len()];
        Self::new(theta_grid, values)
    }

    pub fn theta_grid(&self) -> &[f64] {
        &self.theta_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Piecewise-linear interpolation, flat outside the grid.
    pub fn interpolate(&self, theta: f64) -> f64 {
        let g = &self.theta_grid;
        let n = g.len();
        if theta <= g[0] {
            return self.values[0];
        }
        if theta >= g[n - 1] {
            return self.values[n - 1];
        }
        let k = g.partition_point(|&x| x <= theta).clamp(1, n - 1) - 1;
        let w = (theta - g[k]) / (g[k + 1] - g[k]);
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }

    pub fn sup_distance(&self, other: &ValueFunction) -> f64 {
        sup_distance(&self.values, &other.values)
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyPoint {
    pub theta: f64,
    pub instruments: Instruments,
    pub net_of_tax: f64,
    pub revenue: f64,
    /// Revenue as seen by the monitoring kernel; equals `revenue` under symmetric weights.
    pub kernel_revenue: f64,
    /// Objective attained by the extracted instruments.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySchedule {
    pub points: Vec<PolicyPoint>,
}

impl PolicySchedule {
    pub fn thetas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.theta).collect()
    }

    pub fn revenues(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.revenue).collect()
    }

    /// `R*` interpolated linearly between grid beliefs.
    pub fn revenue_at(&self, theta: f64) -> f64 {
        self.interpolate(theta, |p| p.revenue)
    }

    /// Kernel revenue interpolated linearly between grid beliefs.
    pub fn kernel_revenue_at(&self, theta: f64) -> f64 {
        self.interpolate(theta, |p| p.kernel_revenue)
    }

    fn interpolate(&self, theta: f64, field: impl Fn(&PolicyPoint) -> f64) -> f64 {
        let pts = &self.points;
        let n = pts.len();
        if theta <= pts[0].theta {
            return field(&pts[0]);
        }
        if theta >= pts[n - 1].theta {
            return field(&pts[n - 1]);
        }
        let k = pts.partition_point(|p| p.theta <= theta).clamp(1, n - 1) - 1;
        let w = (theta - pts[k].theta) / (pts[k + 1].theta - pts[k].theta);
        field(&pts[k]) * (1.0 - w) + field(&pts[k + 1]) * w
    }

    /// Policy at the grid point nearest to `theta`.
    pub fn nearest(&self, theta: f64) -> &PolicyPoint {
        let k = self.points.partition_point(|p| p.theta < theta);
        if k == 0 {
            return &self.points[0];
        }
        if k == self.points.len() {
            return &self.points[k - 1];
        }
        let (a, b) = (&self.points[k - 1], &self.points[k]);
        if theta - a.theta <= b.theta - theta {
            a
        } else {
            b
        }
    }
}

/// Next-prior lottery for a given kernel revenue.
fn lottery(theta: f64, kernel_revenue: f64, tech: &MonitoringTech, pi: &TransitionMatrix) -> BeliefLottery {
    let (qh, qo) = tech.likelihoods(kernel_revenue);
    let step = BeliefStep::from_likelihoods(theta, qh, qo, pi);
    BeliefLottery::new(theta, &step, tech.reveal_weight, pi)
}

/// `β E[V(θ') | θ, R]` with V interpolated and next beliefs clamped to `[0, 1]`.
pub fn continuation_value(
    v: &ValueFunction,
    theta: f64,
    revenue: f64,
    tech: &MonitoringTech,
    pi: &TransitionMatrix,
    beta: f64,
) -> f64 {
    beta * lottery(theta, revenue, tech, pi).expect(|b| v.interpolate(b.clamp(0.0, 1.0)))
}

/// Continuation value when the kernel sees instrument-weighted revenue.
pub fn continuation_for_instruments(
    v: &ValueFunction,
    theta: f64,
    instruments: Instruments,
    allocation: &Allocation,
    config: &SolverConfig,
) -> f64 {
    let (r_l, r_b) = config.economy.revenue_split(instruments, allocation);
    let kr = config.tech.kernel_revenue(r_l, r_b);
    continuation_value(v, theta, kr, &config.tech, &config.transition, config.beta)
}

#[derive(Debug, Clone, Copy)]
struct Branch {
    prob: f64,
    lo: u32,
    frac: f64,
}

/// Bellman problem with everything that does not depend on V precomputed.
#[derive(Debug, Clone)]
pub struct DynamicModel {
    config: SolverConfig,
    thetas: Vec<f64>,
    points: Vec<FeasiblePoint>,
    order: Vec<usize>,
    bases: Vec<f64>,
    n_branches: usize,
    /// Per (θ, candidate), row-major by θ.
    branches: Vec<Branch>,
}

impl DynamicModel {
    pub fn new(config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let economy = &config.economy;
        let points = build_feasible_set(economy, &config.grid)?;
        let order = tie_break_order(&points);
        let bases = points
            .iter()
            .map(|p| private_payoff(economy, &p.allocation, p.instruments, &config.costs))
            .collect::<Result<Vec<_>>>()?;
        let kernel_rev: Vec<f64> = points
            .iter()
            .map(|p| {
                let (r_l, r_b) = economy.revenue_split(p.instruments, &p.allocation);
                config.tech.kernel_revenue(r_l, r_b)
            })
            .collect();
        let likelihoods: Vec<(f64, f64)> = kernel_rev.iter().map(|&r| config.tech.likelihoods(r)).collect();
        let thetas = config.theta_grid();
        let n = thetas.len();
        let n_branches = if config.tech.reveal_weight > 0.0 { 4 } else { 2 };
        let pi = config.transition;
        let reveal = config.tech.reveal_weight;
        let branches: Vec<Branch> = thetas
            .par_iter()
            .flat_map_iter(|&theta| {
                likelihoods.iter().flat_map(move |&(qh, qo)| {
                    let step = BeliefStep::from_likelihoods(theta, qh, qo, &pi);
                    let lot = BeliefLottery::new(theta, &step, reveal, &pi);
                    let mut out = [Branch { prob: 0.0, lo: 0, frac: 0.0 }; 4];
                    for (slot, &(p, b)) in out.iter_mut().zip(lot.branches()) {
                        *slot = locate(b, n, p);
                    }
                    out.into_iter().take(n_branches)
                })
            })
            .collect();
        Ok(Self {
            config: config.clone(),
            thetas,
            points,
            order,
            bases,
            n_branches,
            branches,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    fn weight(&self, i: usize) -> f64 {
        effective_weight(self.thetas[i], self.config.phi)
    }

    fn expected_value(&self, i: usize, j: usize, v: &[f64]) -> f64 {
        let start = (i * self.points.len() + j) * self.n_branches;
        self.branches[start..start + self.n_branches]
            .iter()
            .map(|b| {
                let k = b.lo as usize;
                b.prob * (v[k] * (1.0 - b.frac) + v[k + 1] * b.frac)
            })
            .sum()
    }

    fn grid_value(&self, i: usize, j: usize, v: &[f64]) -> f64 {
        let immediate = self.bases[j] + self.weight(i) * self.points[j].allocation.revenue;
        immediate + self.config.beta * self.expected_value(i, j, v)
    }

    /// Bellman operator over the instrument grid.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.thetas.len(), "value vector must match the belief grid");
        (0..self.thetas.len())
            .into_par_iter()
            .map(|i| ordered_argmax(&self.order, |j| self.grid_value(i, j, v)).1)
            .collect()
    }

    /// Argmax at each grid belief with local refinement of both rates.
    pub fn extract_policy(&self, v: &[f64]) -> Result<PolicySchedule> {
        let vf = ValueFunction::new(self.thetas.clone(), v.to_vec())?;
        let cfg = &self.config;
        let points = (0..self.thetas.len())
            .into_par_iter()
            .map(|i| {
                let theta = self.thetas[i];
                let weight = self.weight(i);
                let choice = grid_then_refine(
                    &cfg.economy,
                    &self.points,
                    &self.order,
                    (cfg.grid.tau_l_step(), cfg.grid.tau_b_step()),
                    |j| self.grid_value(i, j, v),
                    |tau, alloc| -> Result<f64> {
                        let immediate = private_payoff(&cfg.economy, alloc, tau, &cfg.costs)? + weight * alloc.revenue;
                        Ok(immediate + continuation_for_instruments(&vf, theta, tau, alloc, cfg))
                    },
                )?;
                let (r_l, r_b) = cfg.economy.revenue_split(choice.instruments, &choice.allocation);
                Ok(PolicyPoint {
                    theta,
                    instruments: choice.instruments,
                    net_of_tax: choice.allocation.net_of_tax,
                    revenue: choice.allocation.revenue,
                    kernel_revenue: cfg.tech.kernel_revenue(r_l, r_b),
                    value: choice.value,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PolicySchedule { points })
    }
}

fn locate(b: f64, n: usize, prob: f64) -> Branch {
    let x = b.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = (x.floor() as usize).min(n - 2);
    Branch {
        prob,
        lo: lo as u32,
        frac: x - lo as f64,
    }
}

/// One application of the Bellman operator: grid values plus the extracted policy.
pub fn bellman_apply(v: &ValueFunction, config: &SolverConfig) -> Result<(ValueFunction, PolicySchedule)> {
    let model = DynamicModel::new(config)?;
    if v.theta_grid() != model.thetas() {
        return Err(SolverError::invalid("value function is not defined on the solver's belief grid"));
    }
    let values = model.apply(v.values());
    let policy = model.extract_policy(v.values())?;
    Ok((ValueFunction::new(model.thetas.clone(), values)?, policy))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VfiOutcome {
    pub value: ValueFunction,
    pub policy: PolicySchedule,
    pub iterations: usize,
    pub final_gap: f64,
    /// Sup-norm gap after each application.
    pub gap_history: Vec<f64>,
}

/// Iterates from V ≡ 0 until the sup-norm gap drops below `stop_tol`.
pub fn solve_vfi(config: &SolverConfig) -> Result<VfiOutcome> {
    let model = DynamicModel::new(config)?;
    solve_model(&model)
}

pub fn solve_model(model: &DynamicModel) -> Result<VfiOutcome> {
    let cfg = model.config();
    let mut v = vec![0.0; model.thetas.len()];
    let mut gap_history = Vec::new();
    for k in 1..=cfg.max_iters {
        let next = model.apply(&v);
        let gap = sup_distance(&next, &v);
        gap_history.push(gap);
        v = next;
        if gap < cfg.stop_tol {
            let policy = model.extract_policy(&v)?;
            return Ok(VfiOutcome {
                value: ValueFunction::new(model.thetas.clone(), v)?,
                policy,
                iterations: k,
                final_gap: gap,
                gap_history,
            });
        }
    }
    Err(SolverError::NonConvergence {
        iterations: cfg.max_iters,
        gap: gap_history.last().copied().unwrap_or(f64::INFINITY),
    })
}

/// Midpoint between the first taxing grid belief and its predecessor; 1 if no belief taxes.
pub fn dynamic_cutoff(policy: &PolicySchedule) -> f64 {
    match policy.points.iter().position(|p| p.revenue > POSITIVE_REVENUE) {
        None => 1.0,
        Some(0) => policy.points[0].theta,
        Some(i) => 0.5 * (policy.points[i - 1].theta + policy.points[i].theta),
    }
}

pub const V_INCREASING_TOL: f64 = -1e-9;
pub const V_CONVEX_TOL: f64 = -1e-6;
pub const R_INCREASING_TOL: f64 = -1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeReport {
    pub min_first_diff_v: f64,
    pub min_second_diff_v: f64,
    pub min_first_diff_r: f64,
}

impl ShapeReport {
    pub fn v_increasing(&self) -> bool {
        self.min_first_diff_v >= V_INCREASING_TOL
    }

    pub fn v_convex(&self) -> bool {
        self.min_second_diff_v >= V_CONVEX_TOL
    }

    pub fn r_increasing(&self) -> bool {
        self.min_first_diff_r >= R_INCREASING_TOL
    }

    pub fn passes(&self) -> bool {
        self.v_increasing() && self.v_convex() && self.r_increasing()
    }
}

/// Minimum of the differences, 0 when there are none.
fn min_or_zero(it: impl Iterator<Item = f64>) -> f64 {
    let m = it.fold(f64::INFINITY, f64::min);
    if m.is_finite() {
        m
    } else {
        0.0
    }
}

pub fn shape_diagnostics(v: &ValueFunction, policy: &PolicySchedule) -> ShapeReport {
    let vals = v.values();
    let r = policy.revenues();
    ShapeReport {
        min_first_diff_v: min_or_zero(vals.windows(2).map(|w| w[1] - w[0])),
        min_second_diff_v: min_or_zero(vals.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0])),
        min_first_diff_r: min_or_zero(r.windows(2).map(|w| w[1] - w[0])),
    }
}

/// `‖TV₁ − TV₂‖∞ / ‖V₁ − V₂‖∞` for the grid operator.
pub fn observed_modulus(model: &DynamicModel, v1: &[f64], v2: &[f64]) -> Result<f64> {
    let d = sup_distance(v1, v2);
    if d == 0.0 {
        return Err(SolverError::DegeneratePair);
    }
    Ok(sup_distance(&model.apply(v1), &model.apply(v2)) / d)
}

/// Largest observed modulus over `trials` seeded random pairs with values in `[-5, 5]`.
pub fn contraction_test(config: &SolverConfig, seed: u64, trials: usize) -> Result<f64> {
    if trials == 0 {
        return Err(SolverError::invalid("trials must be at least 1"));
    }
    let model = DynamicModel::new(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = model.thetas.len();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let v1: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let v2: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        worst = worst.max(observed_modulus(&model, &v1, &v2)?);
    }
    Ok(worst)
}
