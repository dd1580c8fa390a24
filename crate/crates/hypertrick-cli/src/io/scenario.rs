use std::fs;
use std::path::Path;

use anyhow::Context;
use hypertrick_core::sim::Scenario;
use hypertrick_core::space::SearchSpace;

/// Reads a scenario JSON file. Structural validation (id sequences, list
/// lengths) happens in the simulator, not here.
pub fn read_scenario(path: &Path) -> anyhow::Result<Scenario> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario file {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("{} is not a valid scenario file", path.display()))
}

pub fn write_scenario(path: &Path, scenario: &Scenario) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(scenario)?;
    fs::write(path, text + "\n")
        .with_context(|| format!("cannot write scenario file {}", path.display()))
}

/// Reads a search-space JSON file (`{"params": {name: domain, ...}}`).
pub fn read_space(path: &Path) -> anyhow::Result<SearchSpace> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read space file {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("{} is not a valid search-space file", path.display()))
}
