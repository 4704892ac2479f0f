//! Commands behind the `trustax` binary. Each command validates the whole
//! configuration before touching the output directory, writes its files, and
//! returns a short summary for standard output.

use crate::config::{ConfigError, RunConfig};
use crate::dynamic_solver::{
    dynamic_cutoff, shape_diagnostics, solve_vfi, PolicyPoint, PolicySchedule, SolverConfig,
};
use crate::economy::Instruments;
use crate::error::SolverError;
use crate::experiments::{
    instrument_specific_variant, replicate_figures, sweep_enforcement, sweep_garbling, sweep_persistence,
    SweepResult, FIGURE_TOL,
};
use crate::simulator::{simulate_paths, verify_history_dependence};
use crate::static_solver::{earmark_adjusted_cutoff, static_cutoff, StaticSolver};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver failed: {0}")]
    Solver(#[from] SolverError),
    #[error("i/o failure on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("check failed: {0}")]
    Assertion(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io { .. } => 3,
            CliError::Assertion(_) => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Garble,
    Enforce,
    Persist,
    MixInfo,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Garble => "garble",
            SweepAxis::Enforce => "enforce",
            SweepAxis::Persist => "persist",
            SweepAxis::MixInfo => "mixinfo",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "garble" => Ok(SweepAxis::Garble),
            "enforce" => Ok(SweepAxis::Enforce),
            "persist" => Ok(SweepAxis::Persist),
            "mixinfo" => Ok(SweepAxis::MixInfo),
            other => Err(format!("unknown sweep axis {other:?} (expected garble, enforce, persist, mixinfo)")),
        }
    }
}

/// Resolved configuration and output directory for one invocation.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub config: RunConfig,
    pub out: PathBuf,
}

impl Invocation {
    /// Loads the config (or defaults), applies `--out` and `--seed`, and validates.
    pub fn prepare(config_path: Option<&Path>, out: Option<&Path>, seed: Option<u64>) -> CliResult<Self> {
        let mut config = match config_path {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = seed {
            config.seed = seed;
        }
        if let Some(out) = out {
            config.out_dir = out.display().to_string();
        }
        config.validate()?;
        let out = PathBuf::from(&config.out_dir);
        Ok(Self { config, out })
    }

    fn write(&self, name: &str, body: &str) -> CliResult<()> {
        std::fs::create_dir_all(&self.out).map_err(|source| CliError::Io {
            path: self.out.display().to_string(),
            source,
        })?;
        let path = self.out.join(name);
        let text = format!("{}\n{}", self.config.params_line(), body);
        std::fs::write(&path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Fixed nine-decimal rendering without negative zero.
pub fn fmt9(x: f64) -> String {
    let s = format!("{x:.9}");
    if s == "-0.000000000" {
        "0.000000000".into()
    } else {
        s
    }
}

const POLICY_HEADER: &str = "theta,R_star,S_star,tau_L,tau_B,value";

fn policy_row(out: &mut String, theta: f64, r: f64, s: f64, tau: Instruments, value: f64) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{}",
        fmt9(theta),
        fmt9(r),
        fmt9(s),
        fmt9(tau.tau_l),
        fmt9(tau.tau_b),
        fmt9(value)
    );
}

pub fn cmd_solve_static(inv: &Invocation) -> CliResult<String> {
    let cfg = &inv.config;
    let solver_cfg = cfg.solver_config()?;
    let solver = StaticSolver::new(solver_cfg.economy, solver_cfg.grid, solver_cfg.costs, solver_cfg.phi)?;
    let thetas = if cfg.theta_probes.is_empty() {
        solver_cfg.theta_grid()
    } else {
        cfg.theta_probes.clone()
    };
    let mut csv = format!("{POLICY_HEADER}\n");
    for &theta in &thetas {
        let s = solver.solve(theta)?;
        policy_row(&mut csv, theta, s.revenue(), s.allocation.net_of_tax, s.instruments, s.welfare);
    }
    let theta_bar = static_cutoff(&solver_cfg.economy)?;
    let adjusted = earmark_adjusted_cutoff(theta_bar, solver_cfg.phi);
    let cutoff = format!(
        "theta_bar = {}\ntheta_bar_earmark = {}\n",
        fmt9(theta_bar),
        fmt9(adjusted)
    );
    inv.write("static_policy.csv", &csv)?;
    inv.write("cutoff.txt", &cutoff)?;
    Ok(format!("static cutoff {} ({} beliefs solved)", fmt9(theta_bar), thetas.len()))
}

pub fn cmd_solve_dynamic(inv: &Invocation) -> CliResult<String> {
    let solver_cfg = inv.config.solver_config()?;
    let out = solve_vfi(&solver_cfg)?;
    let mut csv = format!("{POLICY_HEADER}\n");
    for p in &out.policy.points {
        policy_row(&mut csv, p.theta, p.revenue, p.net_of_tax, p.instruments, p.value);
    }
    let mut values = String::from("theta,value\n");
    for (t, v) in out.value.theta_grid().iter().zip(out.value.values()) {
        let _ = writeln!(values, "{},{}", fmt9(*t), fmt9(*v));
    }
    let shape = shape_diagnostics(&out.value, &out.policy);
    let cut = dynamic_cutoff(&out.policy);
    let theta_bar = earmark_adjusted_cutoff(static_cutoff(&solver_cfg.economy)?, solver_cfg.phi);
    let step = solver_cfg.theta_step();
    let diag = format!(
        "beta = {}\niterations = {}\nfinal_gap = {:e}\ndynamic_cutoff = {}\nstatic_cutoff = {}\ngrid_step = {}\n\
         cutoff_ordered = {}\nmin_first_diff_v = {:e}\nv_increasing = {}\nmin_second_diff_v = {:e}\nv_convex = {}\n\
         min_first_diff_r = {:e}\nr_increasing = {}\n",
        fmt9(solver_cfg.beta),
        out.iterations,
        out.final_gap,
        fmt9(cut),
        fmt9(theta_bar),
        fmt9(step),
        cut <= theta_bar + step,
        shape.min_first_diff_v,
        shape.v_increasing(),
        shape.min_second_diff_v,
        shape.v_convex(),
        shape.min_first_diff_r,
        shape.r_increasing(),
    );
    inv.write("dynamic_policy.csv", &csv)?;
    inv.write("value.csv", &values)?;
    inv.write("diagnostics.txt", &diag)?;
    Ok(format!(
        "converged in {} iterations (gap {:e}); dynamic cutoff {}",
        out.iterations,
        out.final_gap,
        fmt9(cut)
    ))
}

fn verdict(ok: Option<bool>) -> &'static str {
    match ok {
        None => "na",
        Some(true) => "pass",
        Some(false) => "fail",
    }
}

fn sweep_csv(res: &SweepResult) -> String {
    let names: Vec<&str> = res.levels[0].params.iter().map(|(n, _)| *n).collect();
    let mut csv = format!("{},theta,R_star,value,cutoff,verdict_revenue,verdict_cutoff\n", names.join(","));
    for (b, level) in res.levels.iter().enumerate() {
        let incoming: Vec<usize> = res.comparisons.iter().filter(|c| c.1 == b).map(|c| c.0).collect();
        let cutoff_ok = (!incoming.is_empty()).then(|| {
            incoming.iter().all(|&a| {
                let d = if res.revenue_rises {
                    level.cutoff - res.levels[a].cutoff
                } else {
                    res.levels[a].cutoff - level.cutoff
                };
                d <= res.theta_step
            })
        });
        let params: Vec<String> = level.params.iter().map(|(_, v)| fmt9(*v)).collect();
        for (i, p) in level.policy.points.iter().enumerate() {
            let rev_ok = (!incoming.is_empty()).then(|| incoming.iter().all(|&a| res.row_ok(a, b, i)));
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                params.join(","),
                fmt9(p.theta),
                fmt9(p.revenue),
                fmt9(level.values[i]),
                fmt9(level.cutoff),
                verdict(rev_ok),
                verdict(cutoff_ok)
            );
        }
    }
    csv
}

fn describe_level(res: &SweepResult, k: usize) -> String {
    res.levels[k]
        .params
        .iter()
        .map(|(n, v)| format!("{n}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn cmd_sweep(inv: &Invocation, axis: SweepAxis) -> CliResult<String> {
    let cfg = &inv.config;
    let solver_cfg = cfg.solver_config()?;
    if axis == SweepAxis::MixInfo {
        return sweep_mixinfo(inv, &solver_cfg);
    }
    let res = match axis {
        SweepAxis::Garble => sweep_garbling(&solver_cfg, &cfg.eps_list)?,
        SweepAxis::Enforce => sweep_enforcement(&solver_cfg, &cfg.lambda_list, &cfg.phi_list)?,
        SweepAxis::Persist => {
            let levels: Vec<(f64, f64)> = cfg.pi_levels.iter().map(|&[h, o]| (h, o)).collect();
            sweep_persistence(&solver_cfg, &levels)?
        }
        SweepAxis::MixInfo => unreachable!(),
    };
    inv.write(&format!("sweep_{}.csv", axis.name()), &sweep_csv(&res))?;
    let mut failures = Vec::new();
    if let Some(v) = res.verdict.revenue_violation {
        failures.push(format!(
            "R* ordering fails between [{}] and [{}] at theta={} by {:e}",
            describe_level(&res, v.lower_level),
            describe_level(&res, v.upper_level),
            fmt9(v.theta),
            v.excess
        ));
    }
    if let Some(v) = res.verdict.cutoff_violation {
        failures.push(format!(
            "cutoff ordering fails between [{}] and [{}] (cutoff {}) by {:e}",
            describe_level(&res, v.lower_level),
            describe_level(&res, v.upper_level),
            fmt9(v.theta),
            v.excess
        ));
    }
    if failures.is_empty() {
        Ok(format!("sweep {}: {} levels, all orderings hold", axis.name(), res.levels.len()))
    } else {
        Err(CliError::Assertion(failures.join("; ")))
    }
}

/// Spread tolerances for the instrument-weighted monitoring check.
const SYMMETRIC_SPREAD_TOL: f64 = 1e-10;
const ASYMMETRIC_SPREAD_MIN: f64 = 1e-6;

fn sweep_mixinfo(inv: &Invocation, solver_cfg: &SolverConfig) -> CliResult<String> {
    let cfg = &inv.config;
    let mut csv = String::from(
        "w_L,w_B,theta,tau_L,tau_B,labor_share,frontier_size,continuation_spread,welfare_spread,cutoff,verdict\n",
    );
    let mut failures = Vec::new();
    for &[w_l, w_b] in &cfg.mix_weights_list {
        let rep = instrument_specific_variant(solver_cfg, (w_l, w_b), cfg.mix_theta, cfg.frontier_tol)?;
        let ok = if w_l == w_b {
            rep.continuation_spread.abs() <= SYMMETRIC_SPREAD_TOL
        } else {
            rep.continuation_spread > ASYMMETRIC_SPREAD_MIN
        };
        if !ok {
            failures.push(format!(
                "weights ({w_l},{w_b}): continuation spread {:e} across {} frontier member(s)",
                rep.continuation_spread, rep.frontier_size
            ));
        }
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt9(w_l),
            fmt9(w_b),
            fmt9(rep.theta),
            fmt9(rep.chosen.tau_l),
            fmt9(rep.chosen.tau_b),
            fmt9(rep.labor_share),
            rep.frontier_size,
            fmt9(rep.continuation_spread),
            fmt9(rep.welfare_spread),
            fmt9(rep.cutoff),
            verdict(Some(ok))
        );
    }
    inv.write("sweep_mixinfo.csv", &csv)?;
    if failures.is_empty() {
        Ok(format!("sweep mixinfo: {} weightings, all checks hold", cfg.mix_weights_list.len()))
    } else {
        Err(CliError::Assertion(failures.join("; ")))
    }
}

/// Reads a `dynamic_policy.csv` written by `solve-dynamic`.
pub fn read_policy_csv(path: &Path, solver_cfg: &SolverConfig) -> CliResult<PolicySchedule> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let bad = |msg: String| SolverError::InvalidInput(format!("{}: {msg}", path.display()));
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    if lines.next() != Some(POLICY_HEADER) {
        return Err(bad("unexpected header".into()).into());
    }
    let mut points = Vec::new();
    for line in lines {
        let f: Vec<f64> = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(e.to_string()))?;
        if f.len() != 6 {
            return Err(bad(format!("expected 6 columns, got {}", f.len())).into());
        }
        let instruments = Instruments::new(f[3], f[4]).map_err(SolverError::from)?;
        let alloc = solver_cfg.economy.allocation(instruments).map_err(SolverError::from)?;
        let (r_l, r_b) = solver_cfg.economy.revenue_split(instruments, &alloc);
        let kernel_revenue = if solver_cfg.tech.mix_weights == (1.0, 1.0) {
            f[1]
        } else {
            solver_cfg.tech.kernel_revenue(r_l, r_b)
        };
        points.push(PolicyPoint {
            theta: f[0],
            instruments,
            net_of_tax: f[2],
            revenue: f[1],
            kernel_revenue,
            value: f[5],
        });
    }
    if points.len() < 2 || points.windows(2).any(|w| !(w[1].theta > w[0].theta)) {
        return Err(bad("need at least two rows with ascending theta".into()).into());
    }
    Ok(PolicySchedule { points })
}

pub fn cmd_simulate(inv: &Invocation) -> CliResult<String> {
    let cfg = &inv.config;
    let solver_cfg = cfg.solver_config()?;
    let sim = cfg.sim_config()?;
    let policy = if cfg.policy_file.is_empty() {
        solve_vfi(&solver_cfg)?.policy
    } else {
        read_policy_csv(Path::new(&cfg.policy_file), &solver_cfg)?
    };
    let set = simulate_paths(&policy, &solver_cfg.tech, &solver_cfg.transition, &sim)?;
    let mut csv = String::from("path_id,t,type,theta,tau_L,tau_B,R,G,s,theta_next\n");
    for p in &set.paths {
        for r in &p.periods {
            let s = match r.signal {
                Some(true) => "1",
                Some(false) => "0",
                None => "v",
            };
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{}",
                p.path_id,
                r.t,
                r.gov_type.label(),
                fmt9(r.theta),
                fmt9(r.instruments.tau_l),
                fmt9(r.instruments.tau_b),
                fmt9(r.revenue),
                fmt9(r.public_goods),
                s,
                fmt9(r.theta_next)
            );
        }
    }
    let report = verify_history_dependence(&policy, &solver_cfg.tech, &solver_cfg.transition, &cfg.history_probes)?;
    let mut hist = String::from(
        "theta,theta_down,theta_up,R_down,R,R_up,R_posterior_down,R_posterior_up,weak,strict_required,strict,verdict\n",
    );
    for p in &report.probes {
        let _ = writeln!(
            hist,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt9(p.theta),
            fmt9(p.theta_down),
            fmt9(p.theta_up),
            fmt9(p.revenue_down),
            fmt9(p.revenue),
            fmt9(p.revenue_up),
            fmt9(p.revenue_posterior_down),
            fmt9(p.revenue_posterior_up),
            p.weak_ok(),
            p.interior(),
            p.strict_ok(),
            verdict(Some(p.passed()))
        );
    }
    inv.write("paths.csv", &csv)?;
    inv.write("history_check.txt", &hist)?;
    let failed: Vec<String> = report
        .probes
        .iter()
        .filter(|p| !p.passed())
        .map(|p| format!("theta={}: R(down)={} R={} R(up)={}", fmt9(p.theta), fmt9(p.revenue_down), fmt9(p.revenue), fmt9(p.revenue_up)))
        .collect();
    if failed.is_empty() {
        Ok(format!("simulated {} paths of {} periods; history ordering holds", sim.n_paths, sim.horizon))
    } else {
        Err(CliError::Assertion(format!("history ordering fails at {}", failed.join("; "))))
    }
}

pub fn cmd_replicate_figures(inv: &Invocation) -> CliResult<String> {
    let solver_cfg = inv.config.solver_config()?;
    let tables = replicate_figures(&solver_cfg)?;
    let mut f1 = String::from("theta,R_star,R_reference\n");
    let mut f2 = String::from("theta,tau_Y,tau_L,tau_Y_reference\n");
    for r in &tables.rows {
        let _ = writeln!(f1, "{},{},{}", fmt9(r.theta), fmt9(r.revenue), fmt9(r.reference_revenue));
        let _ = writeln!(
            f2,
            "{},{},{},{}",
            fmt9(r.theta),
            fmt9(r.output_tax),
            fmt9(r.labor_tax),
            fmt9(r.reference_output_tax)
        );
    }
    inv.write("figure1.csv", &f1)?;
    inv.write("figure2.csv", &f2)?;
    let summary = format!(
        "max |R* - reference| = {}; max |tau_Y - reference| = {}; max |tau_L| = {}",
        fmt9(tables.max_revenue_deviation()),
        fmt9(tables.max_output_tax_deviation()),
        fmt9(tables.max_labor_tax())
    );
    if tables.within_tolerance() {
        Ok(summary)
    } else {
        Err(CliError::Assertion(format!("{summary} exceeds {FIGURE_TOL}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt9_drops_negative_zero() {
        assert_eq!(fmt9(-1e-13), "0.000000000");
        assert_eq!(fmt9(0.5946035575), "0.594603558");
        assert_eq!(fmt9(-0.25), "-0.250000000");
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("persist".parse::<SweepAxis>(), Ok(SweepAxis::Persist));
        assert!("tilt".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(ConfigError::Invalid("x".into())).exit_code(), 2);
        assert_eq!(CliError::Solver(SolverError::EmptyFrontier).exit_code(), 3);
        assert_eq!(CliError::Assertion("x".into()).exit_code(), 4);
    }

    #[test]
    fn policy_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let inv = Invocation {
            config: RunConfig {
                theta_grid_size: 11,
                n_tau_b: 21,
                ..RunConfig::default()
            },
            out: dir.path().to_path_buf(),
        };
        cmd_solve_dynamic(&inv).unwrap();
        let solver_cfg = inv.config.solver_config().unwrap();
        let pol = read_policy_csv(&dir.path().join("dynamic_policy.csv"), &solver_cfg).unwrap();
        assert_eq!(pol.points.len(), 11);
        let direct = solve_vfi(&solver_cfg).unwrap().policy;
        for (a, b) in pol.points.iter().zip(&direct.points) {
            assert!((a.revenue - b.revenue).abs() < 1e-9);
        }
    }
}
