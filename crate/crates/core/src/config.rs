//! Flat run configuration shared by every command.
//!
//! One key per scalar or list; unknown keys are rejected. Omitted keys take
//! the defaults below.

use crate::dynamic_solver::SolverConfig;
use crate::economy::{Economy, EconomyPrimitives, GridSpec, Utility, DEFAULT_TAU_MAX};
use crate::monitoring::{apply_enforcement, threshold_tech, MonitoringTech, TransitionMatrix};
use crate::simulator::SimConfig;
use crate::static_solver::InstrumentCosts;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed configuration: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub label: String,
    pub out_dir: String,

    // economy
    /// `"quant"` (closed form) or `"general"`.
    pub economy: String,
    /// `"log"` or `"crra"`.
    pub utility: String,
    pub sigma: f64,
    pub labor_power: f64,
    pub production_scale: f64,
    pub production_power: f64,
    pub tau_max: f64,
    pub n_tau_l: usize,
    pub n_tau_b: usize,

    // monitoring
    /// `"ratio"` or `"threshold"`.
    pub kernel: String,
    pub a_h: f64,
    pub b_h: f64,
    pub b_o: f64,
    pub kappa: f64,
    pub threshold_eps: f64,
    pub garble_eps: f64,
    pub lambda: f64,
    pub mix_w_l: f64,
    pub mix_w_b: f64,
    pub pi_hh: f64,
    pub pi_oo: f64,

    // objective
    pub c_l: f64,
    pub c_b: f64,
    pub phi: f64,

    // dynamic solver
    pub beta: f64,
    pub theta_grid_size: usize,
    pub stop_tol: f64,
    pub max_iters: usize,
    /// Beliefs for `solve-static`; empty means the belief grid.
    pub theta_probes: Vec<f64>,

    // sweeps
    pub eps_list: Vec<f64>,
    pub lambda_list: Vec<f64>,
    pub phi_list: Vec<f64>,
    pub pi_levels: Vec<[f64; 2]>,
    pub mix_weights_list: Vec<[f64; 2]>,
    pub mix_theta: f64,
    pub frontier_tol: f64,

    // simulation
    pub horizon: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub initial_theta: f64,
    pub mimic_prob: f64,
    pub history_probes: Vec<f64>,
    /// Previously written `dynamic_policy.csv`; empty means solve inline.
    pub policy_file: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self {
            label: "run".into(),
            out_dir: "out".into(),
            economy: "quant".into(),
            utility: "log".into(),
            sigma: 2.0,
            labor_power: 2.0,
            production_scale: 2.0,
            production_power: 0.5,
            tau_max: DEFAULT_TAU_MAX,
            n_tau_l: GridSpec::default().n_tau_l,
            n_tau_b: GridSpec::default().n_tau_b,
            kernel: "ratio".into(),
            a_h: 0.2,
            b_h: 0.8,
            b_o: 0.1,
            kappa: 0.3,
            threshold_eps: 0.1,
            garble_eps: 0.0,
            lambda: 0.0,
            mix_w_l: 1.0,
            mix_w_b: 1.0,
            pi_hh: 0.9,
            pi_oo: 0.9,
            c_l: 0.0,
            c_b: 0.0,
            phi: 0.0,
            beta: 0.95,
            theta_grid_size: 401,
            stop_tol: 1e-9,
            max_iters: 10_000,
            theta_probes: Vec::new(),
            eps_list: vec![0.0, 0.1, 0.2, 0.3],
            lambda_list: vec![0.0, 0.5, 1.0],
            phi_list: vec![0.0, 0.5],
            pi_levels: vec![[0.9, 0.9], [0.95, 0.95]],
            mix_weights_list: vec![[1.0, 1.0], [0.0, 2.0], [2.0, 0.0]],
            mix_theta: 0.6,
            frontier_tol: 1e-6,
            horizon: sim.horizon,
            n_paths: sim.n_paths,
            seed: sim.seed,
            initial_theta: sim.initial_theta,
            mimic_prob: sim.mimic_prob,
            history_probes: vec![0.7, 0.8, 0.9],
            policy_file: String::new(),
        }
    }
}

fn in_unit(name: &str, x: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {x} must lie in [0, 1]")))
    }
}

fn ascending(name: &str, xs: &[f64]) -> Result<(), ConfigError> {
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid(format!("{name} must be strictly ascending")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Range checks plus construction of every derived object.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, x) in [
            ("garble_eps", self.garble_eps),
            ("lambda", self.lambda),
            ("phi", self.phi),
            ("pi_hh", self.pi_hh),
            ("pi_oo", self.pi_oo),
            ("initial_theta", self.initial_theta),
            ("mimic_prob", self.mimic_prob),
            ("mix_theta", self.mix_theta),
        ] {
            in_unit(name, x)?;
        }
        for xs in [&self.theta_probes, &self.history_probes] {
            for &x in xs.iter() {
                in_unit("probe", x)?;
            }
        }
        if self.n_paths == 0 || self.horizon == 0 {
            return Err(invalid("n_paths and horizon must be at least 1"));
        }
        if !(self.frontier_tol > 0.0) {
            return Err(invalid("frontier_tol must be positive"));
        }
        ascending("eps_list", &self.eps_list)?;
        if self.eps_list.iter().any(|&e| !(0.0..0.5).contains(&e)) {
            return Err(invalid("eps_list entries must lie in [0, 0.5)"));
        }
        ascending("lambda_list", &self.lambda_list)?;
        ascending("phi_list", &self.phi_list)?;
        for &x in self.lambda_list.iter().chain(&self.phi_list) {
            in_unit("lambda_list/phi_list entry", x)?;
        }
        for w in self.pi_levels.windows(2) {
            let ([h0, o0], [h1, o1]) = (w[0], w[1]);
            if !(h1 >= h0 && o1 >= o0 && (h1, o1) != (h0, o0)) {
                return Err(invalid("pi_levels must be componentwise ascending"));
            }
        }
        for &[h, o] in &self.pi_levels {
            TransitionMatrix::new(h, o).map_err(|e| invalid(e.to_string()))?;
        }
        for &[w_l, w_b] in &self.mix_weights_list {
            if !(w_l >= 0.0 && w_b >= 0.0) {
                return Err(invalid("mix weights must be nonnegative"));
            }
        }
        self.solver_config()?;
        self.sim_config()?;
        Ok(())
    }

    pub fn economy(&self) -> Result<Economy, ConfigError> {
        let economy = match self.economy.as_str() {
            "quant" => Economy::Quant { tau_max: self.tau_max },
            "general" => {
                let utility = match self.utility.as_str() {
                    "log" => Utility::Log,
                    "crra" => Utility::Crra { sigma: self.sigma },
                    other => return Err(invalid(format!("unknown utility {other:?}"))),
                };
                Economy::General(EconomyPrimitives {
                    utility,
                    labor_disutility_power: self.labor_power,
                    production_scale: self.production_scale,
                    production_power: self.production_power,
                    tau_max: self.tau_max,
                })
            }
            other => return Err(invalid(format!("unknown economy {other:?}"))),
        };
        economy.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(economy)
    }

    pub fn tech(&self) -> Result<MonitoringTech, ConfigError> {
        let err = |e: crate::monitoring::MonitoringError| invalid(e.to_string());
        let base = match self.kernel.as_str() {
            "ratio" => MonitoringTech::ratio(self.a_h, self.b_h, self.b_o).map_err(err)?,
            "threshold" => threshold_tech(self.kappa, self.threshold_eps).map_err(err)?,
            other => return Err(invalid(format!("unknown kernel {other:?}"))),
        };
        let tech = base
            .with_garbling(self.garble_eps)
            .and_then(|t| t.with_mix_weights(self.mix_w_l, self.mix_w_b))
            .map_err(err)?;
        apply_enforcement(&tech, self.lambda).map_err(err)
    }

    pub fn grid(&self) -> Result<GridSpec, ConfigError> {
        if self.n_tau_l == 0 || self.n_tau_b == 0 {
            return Err(invalid("instrument grid sizes must be at least 1"));
        }
        Ok(GridSpec::new(self.n_tau_l, self.n_tau_b, self.tau_max))
    }

    pub fn solver_config(&self) -> Result<SolverConfig, ConfigError> {
        let cfg = SolverConfig {
            beta: self.beta,
            theta_grid_size: self.theta_grid_size,
            stop_tol: self.stop_tol,
            max_iters: self.max_iters,
            economy: self.economy()?,
            tech: self.tech()?,
            transition: TransitionMatrix::new(self.pi_hh, self.pi_oo).map_err(|e| invalid(e.to_string()))?,
            grid: self.grid()?,
            costs: InstrumentCosts::new(self.c_l, self.c_b).map_err(|e| invalid(e.to_string()))?,
            phi: self.phi,
        };
        cfg.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        let sim = SimConfig {
            horizon: self.horizon,
            n_paths: self.n_paths,
            seed: self.seed,
            initial_theta: self.initial_theta,
            mimic_prob: self.mimic_prob,
        };
        sim.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(sim)
    }

    /// Single-line rendering of the resolved configuration for output headers.
    pub fn params_line(&self) -> String {
        let body = toml::to_string(self).unwrap_or_default();
        let fields: Vec<&str> = body.lines().filter(|l| !l.trim().is_empty()).collect();
        format!("# params: {}", fields.join("; "))
    }
}
