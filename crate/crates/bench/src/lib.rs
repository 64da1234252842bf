//! Shared inputs for the benchmarks.

use pumpsim::scenario::bundled;
use pumpsim::ScenarioConfig;

/// A bundled scenario cut to `horizon_s` seconds.
pub fn scenario(name: &str, horizon_s: f64) -> ScenarioConfig {
    let mut cfg = bundled(name).expect("bundled scenario");
    cfg.horizon = horizon_s;
    cfg
}
