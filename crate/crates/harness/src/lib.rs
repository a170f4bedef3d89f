//! Benchmark harness for the `ucsolve` pipeline: scenario suites, a
//! resumable runner writing `runs.csv`, and report aggregation.

pub mod bench;
pub mod report;
pub mod solve;
pub mod suite;

use std::path::Path;

use anyhow::{Context, Result};
use ucsolve::model::write_mps;
use ucsolve::ucgen::generate_instance;

use crate::suite::Scenario;

/// Writes `<name>.mps` and `<name>.json` for every scenario.
pub fn generate(scenarios: &[Scenario], out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for s in scenarios {
        let inst = generate_instance(&s.uc_config);
        let milp = ucsolve::ucgen::to_milp(&inst);
        std::fs::write(out_dir.join(format!("{}.mps", s.name)), write_mps(&milp.base)?)?;
        std::fs::write(out_dir.join(format!("{}.json", s.name)), inst.to_json())?;
    }
    Ok(())
}
