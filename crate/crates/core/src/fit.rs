//! Two-stage parameter identification.
//!
//! The reaction rate κ is fitted first on pre-installation data with the
//! asphalt term switched off; the asphalt reactivity γ is then fitted on
//! post-installation data with κ frozen. Each stage scans the search
//! interval coarsely, brackets the minimum and refines it by golden-section
//! search — the objective is a black-box PDE functional, so the search is
//! derivative-free.

use rayon::prelude::*;

use crate::config::{ScenarioConfig, ScenarioTag};
use crate::error::FitError;
use crate::metrics::relative_discrepancy;
use crate::signal::DailySignal;
use crate::solver::{run_day, ModelParam};

/// Coarse scan resolution over the search interval.
pub const DEFAULT_SCAN_POINTS: usize = 20;
/// The refinement stops once the bracket's relative width drops below this.
pub const REFINE_REL_WIDTH: f64 = 1e-3;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanScale {
    Linear,
    Log,
}

/// A compact search interval with the scale the scan is spaced on.
#[derive(Debug, Clone, Copy)]
pub struct SearchInterval {
    pub lower: f64,
    pub upper: f64,
    pub scale: ScanScale,
}

impl SearchInterval {
    pub fn new(lower: f64, upper: f64, scale: ScanScale) -> Result<Self, FitError> {
        if !(lower.is_finite() && upper.is_finite()) || lower < 0.0 || upper <= lower {
            return Err(FitError::InvalidInterval(format!(
                "need 0 <= lower < upper, got [{lower}, {upper}]"
            )));
        }
        if scale == ScanScale::Log && lower <= 0.0 {
            return Err(FitError::InvalidInterval(format!(
                "log scale needs lower > 0, got {lower}"
            )));
        }
        Ok(SearchInterval {
            lower,
            upper,
            scale,
        })
    }

    /// Default κ interval: 10² to 10⁶ 1/(day·UVI), log-spaced.
    pub fn default_kappa() -> Self {
        SearchInterval {
            lower: 1e2,
            upper: 1e6,
            scale: ScanScale::Log,
        }
    }

    /// Default γ interval: 0 to 0.1, linearly spaced.
    pub fn default_gamma() -> Self {
        SearchInterval {
            lower: 0.0,
            upper: 0.1,
            scale: ScanScale::Linear,
        }
    }

    fn to_scale(&self, v: f64) -> f64 {
        match self.scale {
            ScanScale::Linear => v,
            ScanScale::Log => v.ln(),
        }
    }

    fn from_scale(&self, x: f64) -> f64 {
        match self.scale {
            ScanScale::Linear => x,
            ScanScale::Log => x.exp(),
        }
    }

    /// `n` points spanning the interval on its scale, endpoints included.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let a = self.to_scale(self.lower);
        let b = self.to_scale(self.upper);
        (0..n)
            .map(|k| {
                if n == 1 {
                    self.from_scale(0.5 * (a + b))
                } else {
                    self.from_scale(a + (b - a) * k as f64 / (n - 1) as f64)
                }
            })
            .collect()
    }
}

/// Identified parameter with the scan curve and convergence metadata.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub best_value: f64,
    pub best_discrepancy: f64,
    /// (parameter value, relative discrepancy), sorted by value.
    pub scan_points: Vec<(f64, f64)>,
    pub refinement_iterations: usize,
    /// True when an interior minimum was bracketed and refined to tolerance.
    pub converged: bool,
    /// True when the scan minimum sat on an interval endpoint; the endpoint
    /// is reported without refinement past it.
    pub boundary_minimum: bool,
}

/// Scan-then-golden-section minimization of an arbitrary objective. The scan
/// runs in parallel; the refinement is sequential by nature.
pub fn minimize_scan_golden<F>(
    objective: F,
    interval: &SearchInterval,
    scan_points: usize,
) -> Result<FitResult, FitError>
where
    F: Fn(f64) -> Result<f64, FitError> + Sync,
{
    if scan_points < 3 {
        return Err(FitError::InvalidInterval(format!(
            "scan needs at least 3 points, got {scan_points}"
        )));
    }
    let values = interval.grid(scan_points);
    let discrepancies: Vec<f64> = values
        .par_iter()
        .map(|&v| objective(v))
        .collect::<Result<_, _>>()?;
    let scan: Vec<(f64, f64)> = values.iter().copied().zip(discrepancies).collect();

    let (mut best_idx, mut best) = (0usize, scan[0]);
    for (i, &pt) in scan.iter().enumerate() {
        if pt.1 < best.1 {
            best_idx = i;
            best = pt;
        }
    }

    if best_idx == 0 || best_idx == scan.len() - 1 {
        return Ok(FitResult {
            best_value: best.0,
            best_discrepancy: best.1,
            scan_points: scan,
            refinement_iterations: 0,
            converged: false,
            boundary_minimum: true,
        });
    }

    // Golden-section on the bracketing triple, on the interval's scale.
    let mut a = interval.to_scale(scan[best_idx - 1].0);
    let mut b = interval.to_scale(scan[best_idx + 1].0);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = objective(interval.from_scale(x1))?;
    let mut f2 = objective(interval.from_scale(x2))?;
    let mut iterations = 0usize;
    let tolerance_met = |a: f64, b: f64| {
        let (va, vb) = (interval.from_scale(a), interval.from_scale(b));
        let mid = 0.5 * (va.abs() + vb.abs());
        (vb - va).abs() <= REFINE_REL_WIDTH * mid.max(f64::MIN_POSITIVE)
    };
    while !tolerance_met(a, b) && iterations < 200 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = objective(interval.from_scale(x1))?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = objective(interval.from_scale(x2))?;
        }
        iterations += 1;
    }
    let (best_value, best_discrepancy) = if f1 < f2 {
        (interval.from_scale(x1), f1)
    } else {
        (interval.from_scale(x2), f2)
    };
    // The refined minimum can only improve on the scan minimum.
    let (best_value, best_discrepancy) = if best.1 < best_discrepancy {
        (best.0, best.1)
    } else {
        (best_value, best_discrepancy)
    };
    Ok(FitResult {
        best_value,
        best_discrepancy,
        scan_points: scan,
        refinement_iterations: iterations,
        converged: true,
        boundary_minimum: false,
    })
}

fn pde_objective<'a>(
    cfg: &'a ScenarioConfig,
    m: &'a DailySignal,
    s: &'a DailySignal,
    meas: &'a DailySignal,
    which: ModelParam,
) -> impl Fn(f64) -> Result<f64, FitError> + Sync + 'a {
    move |v: f64| {
        let mut cfg = cfg.clone();
        match which {
            ModelParam::Kappa => cfg.physical.kappa = v,
            ModelParam::Gamma => cfg.physical.gamma = v,
        }
        let result = run_day(&cfg, m, s)?;
        Ok(relative_discrepancy(&result.probe_series, meas)?)
    }
}

/// Stage one: identify κ against pre-installation measurements. The asphalt
/// reactivity is forced to zero for the search, as it is known to be before
/// the installation.
pub fn fit_kappa(
    cfg: &ScenarioConfig,
    m: &DailySignal,
    s: &DailySignal,
    meas_pre: &DailySignal,
    interval: &SearchInterval,
) -> Result<FitResult, FitError> {
    let mut cfg = cfg.clone();
    cfg.physical.gamma = 0.0;
    let objective = pde_objective(&cfg, m, s, meas_pre, ModelParam::Kappa);
    minimize_scan_golden(objective, interval, DEFAULT_SCAN_POINTS)
}

/// Stage two: identify γ against post-installation measurements with κ
/// frozen at the first stage's result.
pub fn fit_gamma(
    cfg: &ScenarioConfig,
    m: &DailySignal,
    s: &DailySignal,
    meas_post: &DailySignal,
    kappa_fixed: f64,
    interval: &SearchInterval,
) -> Result<FitResult, FitError> {
    if !(kappa_fixed > 0.0) {
        return Err(FitError::NonPositiveKappa(kappa_fixed));
    }
    let mut cfg = cfg.clone();
    cfg.scenario_tag = ScenarioTag::PostAsphalt;
    cfg.physical.kappa = kappa_fixed;
    let objective = pde_objective(&cfg, m, s, meas_post, ModelParam::Gamma);
    minimize_scan_golden(objective, interval, DEFAULT_SCAN_POINTS)
}

/// Evaluate the discrepancy over an explicit grid of parameter values — the
/// raw material for discrepancy-curve plots.
pub fn scan_objective(
    cfg: &ScenarioConfig,
    m: &DailySignal,
    s: &DailySignal,
    meas: &DailySignal,
    which: ModelParam,
    values: &[f64],
) -> Result<Vec<(f64, f64)>, FitError> {
    if values.is_empty() {
        return Err(FitError::EmptyScan);
    }
    let objective = pde_objective(cfg, m, s, meas, which);
    values.par_iter().map(|&v| Ok((v, objective(v)?))).collect()
}

/// Count the strict local minima of a scan curve (endpoints included).
pub fn local_minima_count(scan: &[(f64, f64)]) -> usize {
    let n = scan.len();
    if n < 2 {
        return n;
    }
    let mut count = 0;
    for i in 0..n {
        let left_higher = i == 0 || scan[i - 1].1 > scan[i].1;
        let right_higher = i == n - 1 || scan[i + 1].1 > scan[i].1;
        if left_higher && right_higher {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_quadratic_minimum() {
        // A stubbed objective in place of the solver.
        let interval = SearchInterval::new(0.0, 20.0, ScanScale::Linear).unwrap();
        let fit = minimize_scan_golden(|v| Ok((v - 5.0) * (v - 5.0)), &interval, 20).unwrap();
        assert!(fit.converged);
        assert!(!fit.boundary_minimum);
        assert!(
            (fit.best_value - 5.0).abs() <= 1e-3 * 5.0,
            "{}",
            fit.best_value
        );
    }

    #[test]
    fn golden_section_on_unimodal_fixtures() {
        // x - ln x on a log grid: minimum at 1.
        let interval = SearchInterval::new(0.01, 100.0, ScanScale::Log).unwrap();
        let fit = minimize_scan_golden(|v| Ok(v - v.ln()), &interval, 20).unwrap();
        assert!((fit.best_value - 1.0).abs() <= 2e-3, "{}", fit.best_value);

        // cosh(x - 3): minimum at 3.
        let interval = SearchInterval::new(0.0, 10.0, ScanScale::Linear).unwrap();
        let fit = minimize_scan_golden(|v| Ok((v - 3.0).cosh()), &interval, 25).unwrap();
        assert!(
            (fit.best_value - 3.0).abs() <= 3e-3 * 3.0,
            "{}",
            fit.best_value
        );

        // |x - 2| + 0.1: V-shaped, non-differentiable minimum.
        let interval = SearchInterval::new(0.0, 10.0, ScanScale::Linear).unwrap();
        let fit = minimize_scan_golden(|v| Ok((v - 2.0).abs() + 0.1), &interval, 20).unwrap();
        assert!(
            (fit.best_value - 2.0).abs() <= 2e-3 * 2.0,
            "{}",
            fit.best_value
        );
    }

    #[test]
    fn boundary_minimum_is_flagged_not_refined() {
        let interval = SearchInterval::new(1.0, 9.0, ScanScale::Linear).unwrap();
        let fit = minimize_scan_golden(Ok, &interval, 10).unwrap();
        assert!(fit.boundary_minimum);
        assert!(!fit.converged);
        assert_eq!(fit.best_value, 1.0);
        assert_eq!(fit.refinement_iterations, 0);
    }

    #[test]
    fn scan_points_keep_input_order_and_minimum_is_consistent() {
        let interval = SearchInterval::new(0.0, 8.0, ScanScale::Linear).unwrap();
        let fit = minimize_scan_golden(|v| Ok((v - 4.0).powi(2)), &interval, 9).unwrap();
        let values: Vec<f64> = fit.scan_points.iter().map(|p| p.0).collect();
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(values, sorted);
        for &(_, d) in &fit.scan_points {
            assert!(fit.best_discrepancy <= d + 1e-15);
        }
    }

    #[test]
    fn degenerate_intervals_are_rejected() {
        assert!(SearchInterval::new(0.0, 0.0, ScanScale::Linear).is_err());
        assert!(SearchInterval::new(2.0, 1.0, ScanScale::Linear).is_err());
        assert!(SearchInterval::new(0.0, 1.0, ScanScale::Log).is_err());
        assert!(SearchInterval::new(-1.0, 1.0, ScanScale::Linear).is_err());
    }

    fn tiny_setup() -> (
        crate::config::ScenarioConfig,
        crate::signal::DailySignal,
        crate::signal::DailySignal,
        crate::signal::DailySignal,
    ) {
        use crate::signal::{build_solar_factor, DailySignal, SolarEvents};
        let mut cfg = crate::config::ScenarioConfig::default();
        cfg.numerics.nx = 6;
        cfg.numerics.ny = 6;
        cfg.numerics.steps_per_day = 24;
        let cfg = cfg.nondimensionalize().unwrap();
        let m = DailySignal::constant(1.0);
        let s = build_solar_factor(SolarEvents::new(0.3, 0.5, 0.7).unwrap()).unwrap();
        let meas = DailySignal::constant(10.0);
        (cfg, m, s, meas)
    }

    #[test]
    fn scan_of_one_value_yields_one_pair() {
        let (cfg, m, s, meas) = tiny_setup();
        let scan = scan_objective(&cfg, &m, &s, &meas, ModelParam::Kappa, &[1.85e4]).unwrap();
        assert_eq!(scan.len(), 1);
        assert_eq!(scan[0].0, 1.85e4);
        assert!(scan[0].1.is_finite());
        assert!(matches!(
            scan_objective(&cfg, &m, &s, &meas, ModelParam::Kappa, &[]),
            Err(FitError::EmptyScan)
        ));
    }

    #[test]
    fn gamma_stage_uses_the_frozen_kappa_not_the_configs() {
        // The passed configuration's own kappa must be irrelevant once a
        // fixed kappa is handed to the gamma stage.
        let (cfg, m, s, meas) = tiny_setup();
        let kappa_fixed = 2.0e4;
        let interval = SearchInterval::new(0.0, 0.02, ScanScale::Linear).unwrap();
        let mut cfg_other = cfg.clone();
        cfg_other.physical.kappa = 123.0;
        let a = fit_gamma(&cfg, &m, &s, &meas, kappa_fixed, &interval).unwrap();
        let b = fit_gamma(&cfg_other, &m, &s, &meas, kappa_fixed, &interval).unwrap();
        assert_eq!(a.scan_points, b.scan_points);
        assert_eq!(a.best_value, b.best_value);
        // And the caller's configuration is untouched.
        assert_eq!(cfg_other.physical.kappa, 123.0);
        assert!(matches!(
            fit_gamma(&cfg, &m, &s, &meas, 0.0, &interval),
            Err(FitError::NonPositiveKappa(_))
        ));
    }

    #[test]
    fn local_minima_counting() {
        let v = |d: &[f64]| -> Vec<(f64, f64)> {
            d.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect()
        };
        assert_eq!(local_minima_count(&v(&[3.0, 2.0, 1.0, 2.0, 3.0])), 1);
        assert_eq!(local_minima_count(&v(&[1.0, 2.0, 3.0])), 1);
        assert_eq!(local_minima_count(&v(&[2.0, 1.0, 2.0, 1.5, 2.0])), 2);
    }
}
