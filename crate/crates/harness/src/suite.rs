//! Scenario definitions and the built-in 57-scenario suite.

use std::path::Path;

use anyhow::{ensure, Context, Result};
use serde::{Deserialize, Serialize};
use ucsolve::bnb::{solve_milp, BnbParams, MilpProblem, MilpStatus, RelaxationEngine};
use ucsolve::ucgen::{generate_instance, to_milp, Horizon, UcConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Simplex,
    Pdhg,
}

impl Engine {
    /// Baseline first.
    pub const ALL: [Engine; 2] = [Engine::Simplex, Engine::Pdhg];

    pub fn relaxation(self) -> RelaxationEngine {
        match self {
            Engine::Simplex => RelaxationEngine::Simplex,
            Engine::Pdhg => RelaxationEngine::PdhgCrossover,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Simplex => "simplex",
            Engine::Pdhg => "pdhg",
        }
    }
}

/// Branch-and-bound knobs for one engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineSettings {
    pub node_limit: usize,
    pub rel_mip_gap: f64,
    pub int_tol: f64,
    pub time_limit_seconds: Option<f64>,
    pub seed: u64,
    pub eps_rel: f64,
    pub pdhg_max_iters: usize,
}

impl Default for EngineSettings {
    fn default() -> Self {
        let p = BnbParams::new(RelaxationEngine::Simplex);
        EngineSettings {
            node_limit: p.node_limit,
            rel_mip_gap: p.rel_mip_gap,
            int_tol: p.int_tol,
            time_limit_seconds: p.time_limit_seconds,
            seed: p.seed,
            eps_rel: p.pdhg.eps_rel,
            pdhg_max_iters: p.pdhg.max_iters,
        }
    }
}

impl EngineSettings {
    pub fn params(&self, engine: Engine) -> BnbParams {
        let mut p = BnbParams::new(engine.relaxation());
        p.node_limit = self.node_limit;
        p.rel_mip_gap = self.rel_mip_gap;
        p.int_tol = self.int_tol;
        p.time_limit_seconds = self.time_limit_seconds;
        p.seed = self.seed;
        p.pdhg.eps_rel = self.eps_rel;
        p.pdhg.max_iters = self.pdhg_max_iters;
        p
    }
}

fn default_repetitions() -> usize {
    3
}

fn default_label() -> String {
    "all".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default = "default_label")]
    pub network: String,
    #[serde(default = "default_label")]
    pub division: String,
    pub uc_config: UcConfig,
    #[serde(default)]
    pub simplex: EngineSettings,
    #[serde(default)]
    pub pdhg: EngineSettings,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
}

impl Scenario {
    pub fn settings(&self, engine: Engine) -> &EngineSettings {
        match engine {
            Engine::Simplex => &self.simplex,
            Engine::Pdhg => &self.pdhg,
        }
    }

    pub fn milp(&self) -> MilpProblem {
        to_milp(&generate_instance(&self.uc_config))
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.repetitions >= 1, "scenario {}: repetitions must be at least 1", self.name);
        ensure!(
            !self.name.is_empty() && self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_'),
            "scenario name {:?} must be nonempty ASCII letters, digits, '-' or '_'",
            self.name
        );
        self.uc_config
            .validate()
            .map_err(|e| anyhow::anyhow!("scenario {}: {e}", self.name))
    }
}

pub fn load_suite(path: &Path) -> Result<Vec<Scenario>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let suite: Vec<Scenario> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut names = std::collections::HashSet::new();
    for s in &suite {
        s.validate()?;
        ensure!(names.insert(s.name.clone()), "duplicate scenario name {}", s.name);
    }
    Ok(suite)
}

/// Units per network in the built-in suite.
pub const NETWORK_UNITS: [usize; 3] = [1, 2, 3];
/// Steps per division: the 18/48/42-step horizons divided by six.
pub const DIVISION_STEPS: [(&str, usize); 3] = [("D1", 3), ("D2", 8), ("D3", 7)];
/// Scenarios per division within a network; 19 per network, 57 in total.
const PER_DIVISION: [usize; 3] = [7, 6, 6];

fn feasible(milp: &MilpProblem) -> bool {
    let mut p = BnbParams::new(RelaxationEngine::Simplex);
    p.node_limit = 10_000;
    matches!(solve_milp(milp, &p), Ok(s) if s.status == MilpStatus::Optimal)
}

/// 57 seeded scenarios spread over three networks and three divisions.
///
/// Each slot takes the first seed in `1000 + slot, 101000 + slot, …` whose
/// instance has an integer-feasible schedule, so every scenario yields a score.
pub fn default_suite(repetitions: usize) -> Vec<Scenario> {
    let mut out = Vec::new();
    let mut slot = 0u64;
    for (n, &units) in NETWORK_UNITS.iter().enumerate() {
        for (d, &(division, steps)) in DIVISION_STEPS.iter().enumerate() {
            for k in 0..PER_DIVISION[d] {
                let mut seed = 1000 + slot;
                let cfg = loop {
                    let cfg = UcConfig::new(units, Horizon::Steps(steps), seed);
                    if feasible(&to_milp(&generate_instance(&cfg))) {
                        break cfg;
                    }
                    seed += 100_000;
                };
                out.push(Scenario {
                    name: format!("N{}-{division}-{k:02}", n + 1),
                    network: format!("N{}", n + 1),
                    division: division.to_string(),
                    uc_config: cfg,
                    simplex: EngineSettings::default(),
                    pdhg: EngineSettings::default(),
                    repetitions,
                });
                slot += 1;
            }
        }
    }
    out
}
