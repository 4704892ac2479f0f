//! Grid argmax with deterministic tie-breaking and golden-section refinement.

use crate::economy::{Allocation, Economy, EconomyError, FeasiblePoint, Instruments};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Bracket tolerance for the one-dimensional refinement.
pub const REFINE_TOL: f64 = 1e-8;

/// Indices of `points` ordered by (revenue, τ_L, τ_B). Scanning in this order
/// and replacing only on a strict improvement breaks ties toward the smallest
/// revenue, then the smallest labor tax.
pub(crate) fn tie_break_order(points: &[FeasiblePoint]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&points[a], &points[b]);
        pa.allocation
            .revenue
            .total_cmp(&pb.allocation.revenue)
            .then(pa.instruments.tau_l.total_cmp(&pb.instruments.tau_l))
            .then(pa.instruments.tau_b.total_cmp(&pb.instruments.tau_b))
            .then(a.cmp(&b))
    });
    order
}

/// First index in `order` attaining the maximum of `value`.
pub(crate) fn ordered_argmax(order: &[usize], mut value: impl FnMut(usize) -> f64) -> (usize, f64) {
    let mut best = order[0];
    let mut best_val = value(best);
    for &j in &order[1..] {
        let v = value(j);
        if v > best_val {
            best = j;
            best_val = v;
        }
    }
    (best, best_val)
}

/// Maximizes `f` on `[lo, hi]`; returns the bracket midpoint and its value.
pub(crate) fn golden_section_max<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<(f64, f64), E> {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x)?;
    Ok((x, fx))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Choice {
    pub instruments: Instruments,
    pub allocation: Allocation,
    pub value: f64,
}

/// Grid argmax followed by coordinate refinement: golden-section passes on
/// τ_B, then τ_L, then τ_B again, each over one grid cell either side of the
/// incumbent. A refined point replaces the incumbent only when strictly better,
/// so boundary optima found on the grid are kept exactly.
pub(crate) fn grid_then_refine<E>(
    economy: &Economy,
    points: &[FeasiblePoint],
    order: &[usize],
    steps: (f64, f64),
    grid_value: impl FnMut(usize) -> f64,
    mut objective: impl FnMut(Instruments, &Allocation) -> Result<f64, E>,
) -> Result<Choice, E>
where
    E: From<EconomyError>,
{
    let (j, best_val) = ordered_argmax(order, grid_value);
    let winner = points[j];
    let mut choice = Choice {
        instruments: winner.instruments,
        allocation: winner.allocation,
        value: best_val,
    };
    let (step_l, step_b) = steps;
    let tau_max = economy.tau_max();
    let passes = [(false, step_b), (true, step_l), (false, step_b)];
    for (along_labor, step) in passes {
        if step <= 0.0 {
            continue;
        }
        let Instruments { tau_l, tau_b } = choice.instruments;
        let centre = if along_labor { tau_l } else { tau_b };
        let make = |x: f64| {
            if along_labor {
                Instruments::new(x, tau_b)
            } else {
                Instruments::new(tau_l, x)
            }
        };
        let mut eval = |x: f64| -> Result<f64, E> {
            let tau = make(x)?;
            let alloc = economy.allocation(tau)?;
            objective(tau, &alloc)
        };
        let lo = (centre - step).max(0.0);
        let hi = (centre + step).min(tau_max);
        let (x, val) = golden_section_max(&mut eval, lo, hi, REFINE_TOL)?;
        if val > choice.value {
            let instruments = make(x)?;
            choice = Choice {
                instruments,
                allocation: economy.allocation(instruments)?,
                value: val,
            };
        }
    }
    Ok(choice)
}
