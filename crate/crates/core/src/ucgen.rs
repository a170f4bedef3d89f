//! Seeded DC unit-commitment instances and their MILP encoding.
//!
//! Variables are laid out unit-major, time-minor, four per (unit g, step t):
//! `u` (on), `v` (startup), `w` (shutdown), `p` (output), at index
//! `4·(g·T + t) + {0,1,2,3}`. Rows follow the same order, seven per
//! (g, t): logic, min-up, min-down, capacity-low, capacity-high, ramp-up,
//! ramp-down; then two per step: demand and reserve. All units start off
//! with zero output.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bnb::MilpProblem;
use crate::model::{GeneralLp, Relation, Sense, VarKind};

/// Scheduling horizons: 18, 48 and 42 steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Division {
    D1,
    D2,
    D3,
}

impl Division {
    pub fn steps(self) -> usize {
        match self {
            Division::D1 => 18,
            Division::D2 => 48,
            Division::D3 => 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Horizon {
    Steps(usize),
    Division(Division),
}

impl Horizon {
    pub fn steps(self) -> usize {
        match self {
            Horizon::Steps(t) => t,
            Horizon::Division(d) => d.steps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcConfig {
    pub n_units: usize,
    pub horizon: Horizon,
    /// MW, before the feasibility cap.
    pub demand_base: f64,
    pub demand_amplitude: f64,
    #[serde(default = "default_reserve")]
    pub reserve_fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_reserve() -> f64 {
    0.1
}

impl UcConfig {
    pub fn new(n_units: usize, horizon: Horizon, seed: u64) -> Self {
        UcConfig {
            n_units,
            horizon,
            // Large enough that the capacity cap always binds.
            demand_base: 1e6,
            demand_amplitude: 0.2,
            reserve_fraction: 0.1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n_units == 0 {
            return Err("n_units must be at least 1".into());
        }
        if self.horizon.steps() == 0 {
            return Err("horizon must be at least 1 step".into());
        }
        for (name, v) in [
            ("demand_amplitude", self.demand_amplitude),
            ("reserve_fraction", self.reserve_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must lie in [0, 1]"));
            }
        }
        if !(self.demand_base.is_finite() && self.demand_base >= 0.0) {
            return Err("demand_base must be finite and nonnegative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub p_min: f64,
    pub p_max: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub min_up: usize,
    pub min_down: usize,
    pub cost_marginal: f64,
    pub cost_noload: f64,
    pub cost_startup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcInstance {
    pub units: Vec<Unit>,
    pub demand: Vec<f64>,
    pub reserve_fraction: f64,
    pub seed: u64,
    pub config: UcConfig,
}

impl UcInstance {
    pub fn horizon(&self) -> usize {
        self.demand.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Draws unit data from fixed ranges and a sinusoidal demand profile.
///
/// Values are rounded to cents so instances survive the MPS text format
/// exactly. The demand base is capped so that total capacity covers the
/// peak demand plus reserve.
pub fn generate_instance(cfg: &UcConfig) -> UcInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let units: Vec<Unit> = (0..cfg.n_units)
        .map(|_| {
            let p_max = round2(rng.gen_range(50.0..=500.0));
            let p_min = round2(rng.gen_range(0.2..=0.5) * p_max);
            let ramp_up = round2(rng.gen_range(0.2..=0.6) * p_max);
            let ramp_down = round2(rng.gen_range(0.2..=0.6) * p_max);
            let min_up = rng.gen_range(1..=3);
            let min_down = rng.gen_range(1..=3);
            Unit {
                p_min,
                p_max,
                ramp_up,
                ramp_down,
                min_up,
                min_down,
                cost_marginal: round2(rng.gen_range(10.0..=50.0)),
                cost_noload: round2(rng.gen_range(100.0..=500.0)),
                cost_startup: round2(rng.gen_range(500.0..=5000.0)),
            }
        })
        .collect();
    let capacity: f64 = units.iter().map(|u| u.p_max).sum();
    let r = cfg.reserve_fraction;
    let amp = cfg.demand_amplitude;
    let cap = 0.7 * capacity / ((1.0 + r) * (1.0 + amp));
    let base = round2(cfg.demand_base.min(cap));
    let steps = cfg.horizon.steps();
    let demand = (1..=steps)
        .map(|t| round2(base * (1.0 + amp * (2.0 * PI * t as f64 / steps as f64).sin())))
        .collect();
    UcInstance {
        units,
        demand,
        reserve_fraction: r,
        seed: cfg.seed,
        config: cfg.clone(),
    }
}

/// Index of variable `kind` (0=u, 1=v, 2=w, 3=p) for unit `g` at step `t`.
pub fn var_index(horizon: usize, g: usize, t: usize, kind: usize) -> usize {
    4 * (g * horizon + t) + kind
}

pub fn to_milp(inst: &UcInstance) -> MilpProblem {
    let big_t = inst.horizon();
    let mut lp = GeneralLp::new(format!("UC{}", inst.seed), Sense::Minimize);
    for (g, unit) in inst.units.iter().enumerate() {
        for t in 0..big_t {
            lp.add_var(format!("u{g}_{t}"), unit.cost_noload, 0.0, 1.0, VarKind::Binary);
            lp.add_var(format!("v{g}_{t}"), unit.cost_startup, 0.0, 1.0, VarKind::Binary);
            lp.add_var(format!("w{g}_{t}"), 0.0, 0.0, 1.0, VarKind::Binary);
            lp.add_var(format!("p{g}_{t}"), unit.cost_marginal, 0.0, f64::INFINITY, VarKind::Continuous);
        }
    }
    let idx = |g: usize, t: usize, k: usize| var_index(big_t, g, t, k);
    for (g, unit) in inst.units.iter().enumerate() {
        for t in 0..big_t {
            let (u, v, w, p) = (idx(g, t, 0), idx(g, t, 1), idx(g, t, 2), idx(g, t, 3));
            // u_t − u_{t−1} − v_t + w_t = 0
            let mut logic = vec![(u, 1.0), (v, -1.0), (w, 1.0)];
            if t > 0 {
                logic.push((idx(g, t - 1, 0), -1.0));
            }
            lp.add_row(format!("lg{g}_{t}"), logic, Relation::Eq, 0.0);

            let up_from = (t + 1).saturating_sub(unit.min_up);
            let mut min_up: Vec<(usize, f64)> = (up_from..=t).map(|s| (idx(g, s, 1), 1.0)).collect();
            min_up.push((u, -1.0));
            lp.add_row(format!("mu{g}_{t}"), min_up, Relation::Le, 0.0);

            let down_from = (t + 1).saturating_sub(unit.min_down);
            let mut min_down: Vec<(usize, f64)> =
                (down_from..=t).map(|s| (idx(g, s, 2), 1.0)).collect();
            min_down.push((u, 1.0));
            lp.add_row(format!("md{g}_{t}"), min_down, Relation::Le, 1.0);

            lp.add_row(format!("cl{g}_{t}"), vec![(u, -unit.p_min), (p, 1.0)], Relation::Ge, 0.0);
            lp.add_row(format!("ch{g}_{t}"), vec![(u, -unit.p_max), (p, 1.0)], Relation::Le, 0.0);

            let mut ramp_up = vec![(p, 1.0), (v, -unit.p_max)];
            let mut ramp_down = vec![(p, -1.0), (w, -unit.p_max)];
            if t > 0 {
                ramp_up.push((idx(g, t - 1, 3), -1.0));
                ramp_down.push((idx(g, t - 1, 3), 1.0));
            }
            lp.add_row(format!("ru{g}_{t}"), ramp_up, Relation::Le, unit.ramp_up);
            lp.add_row(format!("rd{g}_{t}"), ramp_down, Relation::Le, unit.ramp_down);
        }
    }
    for t in 0..big_t {
        let d = inst.demand[t];
        let output = (0..inst.units.len()).map(|g| (idx(g, t, 3), 1.0)).collect();
        lp.add_row(format!("dm{t}"), output, Relation::Eq, d);
        let reserve = inst
            .units
            .iter()
            .enumerate()
            .map(|(g, unit)| (idx(g, t, 0), unit.p_max))
            .collect();
        lp.add_row(
            format!("rs{t}"),
            reserve,
            Relation::Ge,
            // Rounded up to cents so the requirement survives MPS text exactly.
            ((d * (1.0 + inst.reserve_fraction) * 100.0) - 1e-6).ceil() / 100.0,
        );
    }
    MilpProblem::new(lp).expect("generated model is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountProfile {
    pub binaries: usize,
    pub continuous: usize,
    pub constraints: usize,
}

/// Closed-form model size: `3GT` binaries, `GT` continuous, `7GT + 2T` rows.
pub fn count_profile(cfg: &UcConfig) -> CountProfile {
    let (g, t) = (cfg.n_units, cfg.horizon.steps());
    CountProfile {
        binaries: 3 * g * t,
        continuous: g * t,
        constraints: 7 * g * t + 2 * t,
    }
}
