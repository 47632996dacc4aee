//! Scenario files: a TOML description of a metric, a force or constraint,
//! fields and fluid data, plus the checks and trajectories to run on them.

mod build;
mod report;
mod run;
pub mod spec;

pub use build::{compile, Compiled, CompiledFluid, CompiledHamiltonJacobi, MAX_SCENARIO_DIM};
pub use report::{
    scenario_digest, CheckReport, ResidualReport, TrajectoryMetric, TrajectoryReport,
    SCHEMA_VERSION,
};
pub use run::{run_scenario, RunOptions, NULL_SAMPLE_MARGIN};
pub use spec::*;

use crate::error::{Error, Result};

/// Scenarios shipped with the crate, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("steady-rotation", include_str!("../../scenarios/steady-rotation.toml")),
    ("flrw-decay", include_str!("../../scenarios/flrw-decay.toml")),
    ("static-unsteady", include_str!("../../scenarios/static-unsteady.toml")),
    ("relativistic-boost", include_str!("../../scenarios/relativistic-boost.toml")),
    ("oscillator-hj", include_str!("../../scenarios/oscillator-hj.toml")),
    ("lorentz", include_str!("../../scenarios/lorentz.toml")),
    ("time-constraint", include_str!("../../scenarios/time-constraint.toml")),
];

pub fn bundled(name: &str) -> Option<Scenario> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| Scenario::from_toml(src).expect("bundled scenarios are valid"))
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn from_toml(src: &str) -> Result<Self> {
        let scenario: Scenario =
            toml::from_str(src).map_err(|e| Error::Validation(format!("scenario TOML: {e}")))?;
        run::check_requirements(&compile(&scenario)?)?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}
