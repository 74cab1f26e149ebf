//! Simulation of roadside NO concentration over a street cross-section and
//! identification of its reaction parameters.
//!
//! The model is a dimensionless reaction–diffusion equation driven by a
//! traffic emission source and a solar conversion sink, with an ambient
//! exchange condition on the open boundary and an absorbing condition on the
//! photo-catalytic road surface. The crate provides:
//!
//! - [`domain`]: physical parameters, geometry and the dimensionless groups;
//! - [`signal`]: ingestion of traffic counts, solar events and measurements
//!   into daily forcing signals;
//! - [`fem`]: the Q2 finite element engine with θ-scheme time stepping;
//! - [`solver`]: one-day simulations and parameter sweeps;
//! - [`metrics`]: relative discrepancy and mass error against measurements;
//! - [`fit`]: the two-stage κ/γ identification procedure;
//! - [`config`]: the TOML scenario configuration.

pub mod config;
pub mod domain;
pub mod error;
pub mod fem;
pub mod fit;
pub mod metrics;
pub mod signal;
pub mod solver;

pub use config::{Numerics, Paths, ScenarioConfig, ScenarioTag};
pub use domain::{
    derive_groups, redimensionalize, DimensionlessGroups, Geometry, PhysicalParams, Point, Rect,
};
pub use error::{Error, Result};
pub use fem::{Field, Mesh};
pub use fit::{fit_gamma, fit_kappa, scan_objective, FitResult, ScanScale, SearchInterval};
pub use metrics::{mass_error, relative_discrepancy, DiscrepancyReport};
pub use signal::{
    average_seasonal_window, build_measurement_curve, build_solar_factor, build_traffic_density,
    read_measurements_csv, read_solar_csv, read_traffic_csv, ArchShape, DailySignal,
    SeasonalAverage, SeriesKind, SolarEvents, TimeSeries,
};
pub use solver::{run_day, run_day_observed, sweep_parameter, ModelParam, SimulationResult};
