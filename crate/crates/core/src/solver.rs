//! Drives one simulated day of the reaction–diffusion model and extracts the
//! probe time series.

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::domain::{derive_groups, redimensionalize};
use crate::error::SolverError;
use crate::fem::{assemble_box_load, build_mesh, evaluate_at, Field, StepCoeffs, System};
use crate::signal::DailySignal;

/// Output of one simulated day.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    /// (time-of-day fraction, concentration [μg/m³]) at the probe, one entry
    /// per time level including the initial one.
    pub probe_series: Vec<(f64, f64)>,
    pub final_field: Field,
    /// (time, total dimensionless mass 1ᵀM u) per time level.
    pub mass_history: Vec<(f64, f64)>,
    pub config_echo: ScenarioConfig,
}

impl SimulationResult {
    /// Peak probe concentration and the time it occurs.
    pub fn peak(&self) -> (f64, f64) {
        self.probe_series
            .iter()
            .fold((0.0, f64::NEG_INFINITY), |acc, &(t, v)| {
                if v > acc.1 {
                    (t, v)
                } else {
                    acc
                }
            })
    }
}

/// The two parameters the identification stage sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelParam {
    Kappa,
    Gamma,
}

/// Simulate one day. The configuration must be dimensionless and both
/// forcing signals normalized. With `warm_start` set, an unrecorded day is
/// run first and its final field becomes the initial condition.
pub fn run_day(
    cfg: &ScenarioConfig,
    m: &DailySignal,
    s: &DailySignal,
) -> Result<SimulationResult, SolverError> {
    run_day_inner(cfg, m, s, true, |_| {})
}

/// As [`run_day`], invoking `observer` on every recorded time level.
pub fn run_day_observed(
    cfg: &ScenarioConfig,
    m: &DailySignal,
    s: &DailySignal,
    observer: impl FnMut(&Field),
) -> Result<SimulationResult, SolverError> {
    run_day_inner(cfg, m, s, true, observer)
}

fn run_day_inner(
    cfg: &ScenarioConfig,
    m: &DailySignal,
    s: &DailySignal,
    include_asphalt: bool,
    mut observer: impl FnMut(&Field),
) -> Result<SimulationResult, SolverError> {
    if !cfg.dimensionless {
        return Err(SolverError::NotDimensionless);
    }
    if !m.is_normalized() {
        return Err(SolverError::NotNormalized("m"));
    }
    if !s.is_normalized() {
        return Err(SolverError::NotNormalized("s"));
    }
    let groups = derive_groups(&cfg.physical)?;
    let numerics = &cfg.numerics;
    let mesh = build_mesh(&cfg.geometry, numerics.nx, numerics.ny)?;
    let load = assemble_box_load(&mesh, &cfg.geometry.emission_box, 1.0)?;
    let mut system = System::new(&mesh, groups.ut_bar, numerics.solver_tol)?;

    let kappa_si = cfg.physical.kappa_si();
    let source = |t: f64| groups.a_f * m.eval(t);
    let sink = |t: f64| kappa_si * groups.a_s * s.eval(t);
    let robin = groups.robin_coeff;
    let asphalt = if include_asphalt {
        cfg.physical.gamma * groups.asphalt_coeff_base
    } else {
        0.0
    };

    let steps = numerics.steps_per_day;
    let dt = 1.0 / steps as f64;
    let probe = cfg.geometry.probe_point;

    let mut field = Field::uniform(mesh.n_nodes(), groups.u0_bar, 0.0);
    if numerics.warm_start {
        for k in 1..=steps {
            let t_prev = (k - 1) as f64 / steps as f64;
            let t_new = k as f64 / steps as f64;
            let coeffs = StepCoeffs {
                source: (source(t_prev), source(t_new)),
                sink: (sink(t_prev), sink(t_new)),
                robin,
                asphalt,
            };
            field = system.step_theta(&mesh, &field, dt, numerics.theta, &coeffs, &load)?;
        }
        field.time = 0.0;
    }

    let mut probe_series = Vec::with_capacity(steps + 1);
    let mut mass_history = Vec::with_capacity(steps + 1);
    let mut record = |field: &Field,
                      system: &System,
                      observer: &mut dyn FnMut(&Field)|
     -> Result<(), SolverError> {
        let value = evaluate_at(&mesh, field, probe.x, probe.y)?;
        probe_series.push((field.time, redimensionalize(value, &cfg.physical)));
        mass_history.push((field.time, system.total_mass(field)));
        observer(field);
        Ok(())
    };
    record(&field, &system, &mut observer)?;
    for k in 1..=steps {
        let t_prev = (k - 1) as f64 / steps as f64;
        let t_new = k as f64 / steps as f64;
        let coeffs = StepCoeffs {
            source: (source(t_prev), source(t_new)),
            sink: (sink(t_prev), sink(t_new)),
            robin,
            asphalt,
        };
        field = system.step_theta(&mesh, &field, dt, numerics.theta, &coeffs, &load)?;
        field.time = t_new;
        record(&field, &system, &mut observer)?;
    }

    Ok(SimulationResult {
        probe_series,
        final_field: field,
        mass_history,
        config_echo: cfg.clone(),
    })
}

/// Run one simulation per parameter value, everything else fixed. Runs are
/// independent and execute in parallel; results keep the input order.
pub fn sweep_parameter(
    cfg: &ScenarioConfig,
    m: &DailySignal,
    s: &DailySignal,
    which: ModelParam,
    values: &[f64],
) -> Result<Vec<SimulationResult>, SolverError> {
    if values.is_empty() {
        return Err(SolverError::EmptySweep);
    }
    values
        .par_iter()
        .map(|&v| {
            let mut cfg = cfg.clone();
            match which {
                ModelParam::Kappa => cfg.physical.kappa = v,
                ModelParam::Gamma => cfg.physical.gamma = v,
            }
            run_day(&cfg, m, s)
        })
        .collect()
}
