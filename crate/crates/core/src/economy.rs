//! Competitive private block: instruments, allocations, and revenue.
//!
//! Two backends live here. [`Economy::Quant`] is the closed-form log/quadratic/√L
//! economy with a labor tax and an output tax, where consumption is net of the
//! output tax. [`Economy::General`] solves the intratemporal condition
//! `V'(L) / U'(C) = S f'(L)` with `C = Y` for parametric primitives. The two
//! impose different budget conventions and are never mixed.

use thiserror::Error;

/// Default upper bound on each tax rate.
pub const DEFAULT_TAU_MAX: f64 = 0.99;

const ROOT_RESIDUAL_TOL: f64 = 1e-12;
const LABOR_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EconomyError {
    #[error("invalid instruments ({tau_l}, {tau_b}): rates must lie in [0, 1)")]
    InvalidInstruments { tau_l: f64, tau_b: f64 },
    #[error("instrument {value} exceeds the instrument domain cap {tau_max}")]
    OutsideDomain { value: f64, tau_max: f64 },
    #[error("net-of-tax product {0} outside (0, 1]")]
    InvalidNetOfTax(f64),
    #[error("intratemporal residual does not change sign on ({lo}, {hi})")]
    NoBracket { lo: f64, hi: f64 },
    #[error("invalid primitives: {0}")]
    InvalidPrimitives(String),
    #[error("instrument grid must have at least one point per instrument (got {n_tau_l} x {n_tau_b})")]
    EmptyGrid { n_tau_l: usize, n_tau_b: usize },
    #[error("private consumption {0} is not positive")]
    NonPositiveConsumption(f64),
}

/// A labor tax and a broad (output) tax.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Instruments {
    pub tau_l: f64,
    pub tau_b: f64,
}

impl Instruments {
    pub const ZERO: Instruments = Instruments {
        tau_l: 0.0,
        tau_b: 0.0,
    };

    pub fn new(tau_l: f64, tau_b: f64) -> Result<Self, EconomyError> {
        let ok = |t: f64| t.is_finite() && (0.0..1.0).contains(&t);
        if ok(tau_l) && ok(tau_b) {
            Ok(Self { tau_l, tau_b })
        } else {
            Err(EconomyError::InvalidInstruments { tau_l, tau_b })
        }
    }

    pub fn net_of_tax_product(&self) -> f64 {
        (1.0 - self.tau_l) * (1.0 - self.tau_b)
    }
}

/// `S(τ) = (1 − τ_L)(1 − τ_B)`.
pub fn net_of_tax_product(instruments: Instruments) -> f64 {
    instruments.net_of_tax_product()
}

/// One competitive outcome at a given instrument pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub consumption: f64,
    pub labor: f64,
    pub output: f64,
    pub net_of_tax: f64,
    pub revenue: f64,
    /// Public goods delivered by an honest government (equal to revenue).
    pub public_goods: f64,
}

/// Household utility of private consumption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Utility {
    Log,
    /// `C^(1−σ) / (1−σ)`, σ > 0 and σ ≠ 1.
    Crra { sigma: f64 },
}

impl Utility {
    pub fn value(&self, c: f64) -> f64 {
        match *self {
            Utility::Log => c.ln(),
            Utility::Crra { sigma } => c.powf(1.0 - sigma) / (1.0 - sigma),
        }
    }

    pub fn marginal(&self, c: f64) -> f64 {
        match *self {
            Utility::Log => 1.0 / c,
            Utility::Crra { sigma } => c.powf(-sigma),
        }
    }
}

/// Parametric family: `U` from [`Utility`], `V(L) = L^p / p`, `f(L) = A L^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconomyPrimitives {
    pub utility: Utility,
    pub labor_disutility_power: f64,
    pub production_scale: f64,
    pub production_power: f64,
    pub tau_max: f64,
}

impl Default for EconomyPrimitives {
    fn default() -> Self {
        Self::baseline()
    }
}

impl EconomyPrimitives {
    /// `U = ln C`, `V = L²/2`, `f = 2√L`.
    pub fn baseline() -> Self {
        Self {
            utility: Utility::Log,
            labor_disutility_power: 2.0,
            production_scale: 2.0,
            production_power: 0.5,
            tau_max: DEFAULT_TAU_MAX,
        }
    }

    pub fn disutility(&self, l: f64) -> f64 {
        let p = self.labor_disutility_power;
        l.powf(p) / p
    }

    pub fn marginal_disutility(&self, l: f64) -> f64 {
        l.powf(self.labor_disutility_power - 1.0)
    }

    pub fn production(&self, l: f64) -> f64 {
        self.production_scale * l.powf(self.production_power)
    }

    pub fn marginal_product(&self, l: f64) -> f64 {
        self.production_scale * self.production_power * l.powf(self.production_power - 1.0)
    }

    /// Checks parameter ranges and the curvature of `U`, `V`, `f` on a sample grid.
    pub fn validate(&self) -> Result<(), EconomyError> {
        let bad = |m: &str| Err(EconomyError::InvalidPrimitives(m.to_string()));
        if let Utility::Crra { sigma } = self.utility {
            if !(sigma > 0.0) || (sigma - 1.0).abs() < 1e-12 {
                return bad("CRRA curvature must be positive and different from 1");
            }
        }
        if !(self.labor_disutility_power >= 1.0) {
            return bad("labor disutility power must be at least 1");
        }
        if !(self.production_scale > 0.0) {
            return bad("production scale must be positive");
        }
        if !(self.production_power > 0.0 && self.production_power <= 1.0) {
            return bad("production power must lie in (0, 1]");
        }
        if !(self.tau_max >= 0.0 && self.tau_max < 1.0) {
            return bad("instrument cap must lie in [0, 1)");
        }
        if self.production(0.0) != 0.0 {
            return bad("f(0) must be 0");
        }
        let xs: Vec<f64> = (1..=50).map(|i| i as f64 * 0.1).collect();
        for w in xs.windows(3) {
            let (a, b, c) = (w[0], w[1], w[2]);
            let u = |x: f64| self.utility.value(x);
            if !(u(b) > u(a)) || u(a) + u(c) - 2.0 * u(b) > 1e-12 {
                return bad("U must be strictly increasing and concave");
            }
            let v = |x: f64| self.disutility(x);
            if !(v(b) > v(a)) || v(a) + v(c) - 2.0 * v(b) < -1e-12 {
                return bad("V must be increasing and convex");
            }
            let f = |x: f64| self.production(x);
            if !(f(b) > f(a)) || f(a) + f(c) - 2.0 * f(b) > 1e-12 {
                return bad("f must be strictly increasing and concave");
            }
        }
        Ok(())
    }
}

/// Closed-form allocation of the log/quadratic/√L economy with `(τ_L, τ_Y)`.
///
/// `L² = (1−τ_L)/(2−τ_L)`, `C = (1−τ_Y)(2−τ_L)√L`, `G = √L [τ_L(1−τ_Y) + 2τ_Y]`.
/// Announced revenue equals honest delivery.
pub fn solve_allocation_quant(instruments: Instruments) -> Allocation {
    let Instruments { tau_l, tau_b } = instruments;
    let labor = ((1.0 - tau_l) / (2.0 - tau_l)).sqrt();
    let root = labor.sqrt();
    let output = 2.0 * root;
    let consumption = (1.0 - tau_b) * (2.0 - tau_l) * root;
    let public_goods = root * (tau_l * (1.0 - tau_b) + 2.0 * tau_b);
    Allocation {
        consumption,
        labor,
        output,
        net_of_tax: instruments.net_of_tax_product(),
        revenue: public_goods,
        public_goods,
    }
}

fn intratemporal_residual(p: &EconomyPrimitives, s: f64, l: f64) -> f64 {
    let y = p.production(l);
    s * p.marginal_product(l) - p.marginal_disutility(l) / p.utility.marginal(y)
}

/// Labor solving `V'(L)/U'(f(L)) = S f'(L)` by bisection, with `C = Y = f(L)`.
pub fn solve_allocation_general(
    primitives: &EconomyPrimitives,
    net_of_tax: f64,
) -> Result<Allocation, EconomyError> {
    if !(net_of_tax > 0.0 && net_of_tax <= 1.0) {
        return Err(EconomyError::InvalidNetOfTax(net_of_tax));
    }
    let residual = |l: f64| intratemporal_residual(primitives, net_of_tax, l);
    let mut lo = LABOR_FLOOR;
    let mut hi = 1.0;
    if !(residual(lo) > 0.0) {
        return Err(EconomyError::NoBracket { lo, hi });
    }
    while residual(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(EconomyError::NoBracket { lo, hi });
        }
    }
    let mut labor = 0.5 * (lo + hi);
    for _ in 0..400 {
        labor = 0.5 * (lo + hi);
        let r = residual(labor);
        if r.abs() <= ROOT_RESIDUAL_TOL || hi - lo <= f64::EPSILON * hi {
            break;
        }
        if r > 0.0 {
            lo = labor;
        } else {
            hi = labor;
        }
    }
    let output = primitives.production(labor);
    Ok(Allocation {
        consumption: output,
        labor,
        output,
        net_of_tax,
        revenue: 0.0,
        public_goods: 0.0,
    })
}

/// Revenue attributed to each instrument: the labor term and the `τ_B Y` term.
fn revenue_parts_general(
    primitives: &EconomyPrimitives,
    instruments: Instruments,
    alloc: &Allocation,
) -> (f64, f64) {
    let labor_part = instruments.tau_l
        * (1.0 - instruments.tau_b)
        * primitives.marginal_product(alloc.labor)
        * alloc.labor;
    let broad_part = instruments.tau_b * alloc.output;
    (labor_part, broad_part)
}

/// `R(τ) = τ_L(1−τ_B) f'(L) L + τ_B Y` at the general competitive allocation.
pub fn revenue_general(
    primitives: &EconomyPrimitives,
    instruments: Instruments,
) -> Result<f64, EconomyError> {
    let alloc = solve_allocation_general(primitives, instruments.net_of_tax_product())?;
    let (a, b) = revenue_parts_general(primitives, instruments, &alloc);
    Ok(a + b)
}

/// Economy backend selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Economy {
    Quant { tau_max: f64 },
    General(EconomyPrimitives),
}

impl Default for Economy {
    fn default() -> Self {
        Economy::quant()
    }
}

impl Economy {
    pub fn quant() -> Self {
        Economy::Quant {
            tau_max: DEFAULT_TAU_MAX,
        }
    }

    pub fn general(primitives: EconomyPrimitives) -> Self {
        Economy::General(primitives)
    }

    pub fn tau_max(&self) -> f64 {
        match self {
            Economy::Quant { tau_max } => *tau_max,
            Economy::General(p) => p.tau_max,
        }
    }

    pub fn validate(&self) -> Result<(), EconomyError> {
        match self {
            Economy::Quant { tau_max } => {
                if (0.0..1.0).contains(tau_max) {
                    Ok(())
                } else {
                    Err(EconomyError::InvalidPrimitives(
                        "instrument cap must lie in [0, 1)".into(),
                    ))
                }
            }
            Economy::General(p) => p.validate(),
        }
    }

    fn check_domain(&self, instruments: Instruments) -> Result<(), EconomyError> {
        let tau_max = self.tau_max();
        for value in [instruments.tau_l, instruments.tau_b] {
            if !(0.0..1.0).contains(&value) {
                return Err(EconomyError::InvalidInstruments {
                    tau_l: instruments.tau_l,
                    tau_b: instruments.tau_b,
                });
            }
            if value > tau_max + 1e-12 {
                return Err(EconomyError::OutsideDomain { value, tau_max });
            }
        }
        Ok(())
    }

    /// Competitive allocation with `revenue` and `public_goods` filled in.
    pub fn allocation(&self, instruments: Instruments) -> Result<Allocation, EconomyError> {
        self.check_domain(instruments)?;
        match self {
            Economy::Quant { .. } => Ok(solve_allocation_quant(instruments)),
            Economy::General(p) => {
                let mut alloc = solve_allocation_general(p, instruments.net_of_tax_product())?;
                let (a, b) = revenue_parts_general(p, instruments, &alloc);
                alloc.revenue = a + b;
                alloc.public_goods = alloc.revenue;
                Ok(alloc)
            }
        }
    }

    /// Revenue split into (labor-attributed, broad-attributed) parts.
    pub fn revenue_split(&self, instruments: Instruments, alloc: &Allocation) -> (f64, f64) {
        match self {
            Economy::Quant { .. } => {
                let root = alloc.labor.sqrt();
                let labor_part = root * instruments.tau_l * (1.0 - instruments.tau_b);
                (labor_part, 2.0 * root * instruments.tau_b)
            }
            Economy::General(p) => revenue_parts_general(p, instruments, alloc),
        }
    }

    /// `U(C) − V(L)`; the general backend consumes `Y − R`.
    pub fn private_utility(&self, alloc: &Allocation) -> Result<f64, EconomyError> {
        match self {
            Economy::Quant { .. } => {
                Ok(alloc.consumption.ln() - 0.5 * alloc.labor * alloc.labor)
            }
            Economy::General(p) => {
                let c = alloc.output - alloc.revenue;
                if !(c > 0.0) {
                    return Err(EconomyError::NonPositiveConsumption(c));
                }
                Ok(p.utility.value(c) - p.disutility(alloc.labor))
            }
        }
    }

    pub fn marginal_utility(&self, consumption: f64) -> f64 {
        match self {
            Economy::Quant { .. } => 1.0 / consumption,
            Economy::General(p) => p.utility.marginal(consumption),
        }
    }

    pub fn zero_tax_allocation(&self) -> Result<Allocation, EconomyError> {
        self.allocation(Instruments::ZERO)
    }
}

/// Tensor-product instrument grid on `[0, τ_max]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n_tau_l: usize,
    pub n_tau_b: usize,
    pub tau_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_tau_l: 11,
            n_tau_b: 101,
            tau_max: DEFAULT_TAU_MAX,
        }
    }
}

impl GridSpec {
    pub fn new(n_tau_l: usize, n_tau_b: usize, tau_max: f64) -> Self {
        Self {
            n_tau_l,
            n_tau_b,
            tau_max,
        }
    }

    fn axis(n: usize, tau_max: f64) -> Vec<f64> {
        if n == 1 {
            return vec![0.0];
        }
        (0..n)
            .map(|i| tau_max * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn tau_l_axis(&self) -> Vec<f64> {
        Self::axis(self.n_tau_l, self.tau_max)
    }

    pub fn tau_b_axis(&self) -> Vec<f64> {
        Self::axis(self.n_tau_b, self.tau_max)
    }

    fn step(n: usize, tau_max: f64) -> f64 {
        if n <= 1 {
            0.0
        } else {
            tau_max / (n - 1) as f64
        }
    }

    /// Spacing of the labor-tax axis (0 for a single point).
    pub fn tau_l_step(&self) -> f64 {
        Self::step(self.n_tau_l, self.tau_max)
    }

    /// Spacing of the broad-tax axis (0 for a single point).
    pub fn tau_b_step(&self) -> f64 {
        Self::step(self.n_tau_b, self.tau_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasiblePoint {
    pub instruments: Instruments,
    pub allocation: Allocation,
}

/// Grid points with precomputed allocations, row-major with `τ_L` outer.
pub fn build_feasible_set(
    economy: &Economy,
    grid: &GridSpec,
) -> Result<Vec<FeasiblePoint>, EconomyError> {
    if grid.n_tau_l < 1 || grid.n_tau_b < 1 {
        return Err(EconomyError::EmptyGrid {
            n_tau_l: grid.n_tau_l,
            n_tau_b: grid.n_tau_b,
        });
    }
    let tau_bs = grid.tau_b_axis();
    let mut out = Vec::with_capacity(grid.n_tau_l * grid.n_tau_b);
    for tau_l in grid.tau_l_axis() {
        for &tau_b in &tau_bs {
            let instruments = Instruments::new(tau_l, tau_b)?;
            let allocation = economy.allocation(instruments)?;
            out.push(FeasiblePoint {
                instruments,
                allocation,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn net_of_tax_examples() {
        assert_eq!(net_of_tax_product(Instruments::ZERO), 1.0);
        assert_eq!(net_of_tax_product(Instruments::new(0.5, 0.0).unwrap()), 0.5);
        let s = net_of_tax_product(Instruments::new(0.2, 0.25).unwrap());
        assert!(close(s, 0.6, 1e-15));
    }

    #[test]
    fn instruments_reject_out_of_range() {
        assert!(Instruments::new(1.0, 0.0).is_err());
        assert!(Instruments::new(0.0, -0.1).is_err());
        assert!(Instruments::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn quant_allocation_examples() {
        let a = solve_allocation_quant(Instruments::ZERO);
        assert!(close(a.labor, std::f64::consts::FRAC_1_SQRT_2, 1e-6));
        assert!(close(a.output, 1.681793, 1e-6));
        assert!(close(a.consumption, 1.681793, 1e-6));
        assert_eq!(a.public_goods, 0.0);
        assert_eq!(a.net_of_tax, 1.0);

        let a = solve_allocation_quant(Instruments::new(0.0, 0.375).unwrap());
        assert!(close(a.consumption, 1.051121, 1e-6));
        assert!(close(a.public_goods, 0.630672, 1e-6));

        let a = solve_allocation_quant(Instruments::new(0.5, 0.0).unwrap());
        assert!(close(a.labor, 0.577350, 1e-6));
        assert!(close(a.consumption, 1.139754, 1e-6));
        assert!(close(a.public_goods, 0.379918, 1e-6));
        assert!(close(a.output - a.consumption, a.public_goods, 1e-10));
    }

    #[test]
    fn quant_domain_error_beyond_cap() {
        let econ = Economy::Quant { tau_max: 0.9 };
        let err = econ.allocation(Instruments::new(0.0, 0.95).unwrap());
        assert!(matches!(err, Err(EconomyError::OutsideDomain { .. })));
    }

    #[test]
    fn general_allocation_examples() {
        let p = EconomyPrimitives::baseline();
        let a = solve_allocation_general(&p, 1.0).unwrap();
        assert!(close(a.labor, 0.5f64.sqrt(), 1e-9));
        let a = solve_allocation_general(&p, 0.5).unwrap();
        assert!(close(a.labor, 0.5, 1e-9));
        assert_eq!(a.consumption, a.output);
    }

    #[test]
    fn general_labor_increasing_in_net_of_tax() {
        let p = EconomyPrimitives::baseline();
        let ls: Vec<f64> = (1..=100)
            .map(|i| solve_allocation_general(&p, i as f64 / 100.0).unwrap())
            .map(|a| a.labor)
            .collect();
        assert!(ls.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn general_rejects_bad_net_of_tax() {
        let p = EconomyPrimitives::baseline();
        assert!(solve_allocation_general(&p, 0.0).is_err());
        assert!(solve_allocation_general(&p, 1.5).is_err());
    }

    #[test]
    fn no_bracket_for_degenerate_primitives() {
        // Linear disutility with linear production and log utility: residual is
        // S·A − A·L, positive at the floor only when S > L_floor; with S tiny it fails.
        let p = EconomyPrimitives {
            utility: Utility::Log,
            labor_disutility_power: 1.0,
            production_scale: 1.0,
            production_power: 1.0,
            tau_max: DEFAULT_TAU_MAX,
        };
        assert!(matches!(
            solve_allocation_general(&p, 1e-10),
            Err(EconomyError::NoBracket { .. })
        ));
    }

    #[test]
    fn revenue_general_examples() {
        let p = EconomyPrimitives::baseline();
        assert_eq!(revenue_general(&p, Instruments::ZERO).unwrap(), 0.0);
        let r = revenue_general(&p, Instruments::new(0.0, 0.2).unwrap()).unwrap();
        // 2L² = S = 0.8, Y = 2√L, R = 0.2·Y.
        let oracle = 0.2 * 2.0 * (0.4f64).sqrt().sqrt();
        assert!(close(r, oracle, 1e-9));
        assert!(close(r, 0.318108, 1e-6));
        let grid = GridSpec::new(11, 11, 0.9);
        for t in build_feasible_set(&Economy::general(p), &grid).unwrap() {
            assert!(t.allocation.revenue >= 0.0);
        }
    }

    #[test]
    fn zero_tax_fixed_point_both_backends() {
        for econ in [Economy::quant(), Economy::general(EconomyPrimitives::baseline())] {
            let a = econ.zero_tax_allocation().unwrap();
            assert_eq!(a.net_of_tax, 1.0);
            assert_eq!(a.revenue, 0.0);
            assert_eq!(a.public_goods, 0.0);
        }
    }

    #[test]
    fn feasible_set_shapes() {
        let one = build_feasible_set(&Economy::quant(), &GridSpec::new(1, 1, 0.0)).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].instruments, Instruments::ZERO);

        let nine = build_feasible_set(&Economy::quant(), &GridSpec::new(3, 3, 0.8)).unwrap();
        assert_eq!(nine.len(), 9);
        assert_eq!(nine[0].instruments, Instruments::ZERO);
        assert_eq!(nine[1].instruments.tau_b, 0.4);
        assert_eq!(nine[3].instruments.tau_l, 0.4);
        for pt in &nine {
            let a = pt.allocation;
            assert!(close(a.output - a.consumption, a.public_goods, 1e-10));
        }

        assert!(matches!(
            build_feasible_set(&Economy::quant(), &GridSpec::new(0, 3, 0.8)),
            Err(EconomyError::EmptyGrid { .. })
        ));
    }

    #[test]
    fn revenue_split_sums_to_revenue() {
        let tau = Instruments::new(0.3, 0.2).unwrap();
        for econ in [Economy::quant(), Economy::general(EconomyPrimitives::baseline())] {
            let a = econ.allocation(tau).unwrap();
            let (l, b) = econ.revenue_split(tau, &a);
            assert!(close(l + b, a.revenue, 1e-12));
        }
    }

    #[test]
    fn baseline_primitives_validate() {
        EconomyPrimitives::baseline().validate().unwrap();
        let mut p = EconomyPrimitives::baseline();
        p.production_power = 1.5;
        assert!(p.validate().is_err());
    }
}
