//! Scenario configuration: a TOML file with sections mirroring the model
//! structure, loaded, validated and rescaled into dimensionless form.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::domain::{derive_groups, DimensionlessGroups, Geometry, PhysicalParams};
use crate::error::{ConfigError, DomainError};

/// Which measurement period the scenario describes. Before the photovoltaic
/// asphalt was installed the asphalt reactivity is necessarily zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioTag {
    PreAsphalt,
    PostAsphalt,
}

/// Discretization and solver controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub nx: usize,
    pub ny: usize,
    pub steps_per_day: usize,
    pub theta: f64,
    pub solver_tol: f64,
    /// Run one unrecorded day first and start from its final field.
    pub warm_start: bool,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            nx: 30,
            ny: 30,
            steps_per_day: 240,
            theta: 1.0,
            solver_tol: 1e-11,
            warm_start: false,
        }
    }
}

/// Input file locations, resolved relative to the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub traffic: Option<PathBuf>,
    pub solar: Option<PathBuf>,
    pub measurements: Option<PathBuf>,
    /// Seasonal averaging window (inclusive; ISO dates).
    pub window_start: Option<NaiveDate>,
    pub window_end: Option<NaiveDate>,
}

/// Everything one scenario needs: geometry, physics, numerics and inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario_tag: ScenarioTag,
    pub geometry: Geometry,
    pub physical: PhysicalParams,
    pub numerics: Numerics,
    pub paths: Paths,
    /// Set once the geometry has been rescaled by the reference length.
    #[serde(skip)]
    pub dimensionless: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario_tag: ScenarioTag::PreAsphalt,
            geometry: Geometry::default(),
            physical: PhysicalParams::default(),
            numerics: Numerics::default(),
            paths: Paths::default(),
            dimensionless: false,
        }
    }
}

impl ScenarioConfig {
    /// Read and validate a config file. Referenced input files must exist;
    /// relative paths are taken relative to the config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: ScenarioConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for slot in [
            &mut cfg.paths.traffic,
            &mut cfg.paths.solar,
            &mut cfg.paths.measurements,
        ]
        .into_iter()
        .flatten()
        {
            if slot.is_relative() {
                *slot = base.join(&slot);
            }
            if !slot.exists() {
                return Err(ConfigError::MissingFile(slot.clone()));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.geometry.validate()?;
        self.physical.validate()?;
        derive_groups(&self.physical)?;
        if self.scenario_tag == ScenarioTag::PreAsphalt && self.physical.gamma != 0.0 {
            return Err(ConfigError::Invalid(format!(
                "a pre_asphalt scenario requires gamma = 0, got {}",
                self.physical.gamma
            )));
        }
        let n = &self.numerics;
        if n.nx == 0 || n.ny == 0 || n.steps_per_day == 0 {
            return Err(ConfigError::Invalid(
                "nx, ny and steps_per_day must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&n.theta) {
            return Err(ConfigError::Invalid(format!(
                "theta must lie in [0,1], got {}",
                n.theta
            )));
        }
        if !(n.solver_tol > 0.0 && n.solver_tol.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "solver_tol must be positive, got {}",
                n.solver_tol
            )));
        }
        if let (Some(a), Some(b)) = (self.paths.window_start, self.paths.window_end) {
            if a > b {
                return Err(ConfigError::Invalid(format!(
                    "window_start {a} is after window_end {b}"
                )));
            }
        }
        Ok(())
    }

    /// Rescale the geometry by the reference length so the solver sees the
    /// dimensionless domain; one simulated day spans t ∈ [0,1). Applying it
    /// twice is refused.
    pub fn nondimensionalize(mut self) -> Result<Self, DomainError> {
        if self.dimensionless {
            return Err(DomainError::AlreadyDimensionless);
        }
        self.physical.validate()?;
        self.geometry = self.geometry.scaled_by_reference(self.physical.l);
        self.dimensionless = true;
        Ok(self)
    }

    /// The dimensionless coefficients of this configuration.
    pub fn groups(&self) -> Result<DimensionlessGroups, DomainError> {
        derive_groups(&self.physical)
    }
}
