//! Daily forcing signals: traffic density m(t), solar factor s(t) and
//! measured concentration curves.
//!
//! Traffic and measurement series are interpolated with periodic cubic
//! splines, clamped at zero, and (for forcings) normalized to unit integral
//! over the day. The solar factor is built from sunrise / solar noon / sunset
//! alone: two arches that vanish at sunrise and sunset and peak at noon, then
//! normalized the same way.

mod csv;
mod spline;

pub use csv::{read_measurements_csv, read_solar_csv, read_traffic_csv};
pub use spline::PeriodicSpline;

use chrono::NaiveDate;

use crate::error::SignalError;

/// Number of trapezoid panels used for all normalization integrals.
pub const NORMALIZATION_PANELS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Traffic,
    SolarEvents,
    Concentration,
}

impl SeriesKind {
    fn name(self) -> &'static str {
        match self {
            SeriesKind::Traffic => "traffic",
            SeriesKind::SolarEvents => "solar_events",
            SeriesKind::Concentration => "concentration",
        }
    }
}

/// Raw samples over one day: (time-of-day fraction, value).
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub kind: SeriesKind,
    pub samples: Vec<(f64, f64)>,
    /// Calendar day the samples belong to, when known.
    pub date: Option<NaiveDate>,
}

impl TimeSeries {
    pub fn new(kind: SeriesKind, samples: Vec<(f64, f64)>) -> Result<Self, SignalError> {
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(SignalError::NonMonotonicTimes(format!(
                    "{} does not exceed {}",
                    w[1].0, w[0].0
                )));
            }
        }
        if let (Some(first), Some(last)) = (samples.first(), samples.last()) {
            if first.0 < 0.0 || last.0 >= 1.0 {
                return Err(SignalError::NonMonotonicTimes(format!(
                    "sample times must lie in [0,1), got range [{}, {}]",
                    first.0, last.0
                )));
            }
        }
        Ok(TimeSeries {
            kind,
            samples,
            date: None,
        })
    }

    pub fn with_date(mut self, date: NaiveDate) -> Self {
        self.date = Some(date);
        self
    }

    /// Sum of the raw sample values (e.g. vehicles counted over the day).
    pub fn raw_total(&self) -> f64 {
        self.samples.iter().map(|&(_, v)| v).sum()
    }

    fn check_kind(&self, expected: SeriesKind) -> Result<(), SignalError> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(SignalError::KindMismatch {
                expected: expected.name(),
                got: self.kind.name(),
            })
        }
    }

    fn check_nonnegative(&self) -> Result<(), SignalError> {
        for &(t, v) in &self.samples {
            if v < 0.0 {
                return Err(SignalError::NegativeValue {
                    kind: self.kind.name(),
                    time: t,
                    value: v,
                });
            }
        }
        Ok(())
    }
}

/// The three solar anchor events as fractions of the day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarEvents {
    pub sunrise: f64,
    pub solar_noon: f64,
    pub sunset: f64,
}

impl SolarEvents {
    pub fn new(sunrise: f64, solar_noon: f64, sunset: f64) -> Result<Self, SignalError> {
        if !(0.0 < sunrise && sunrise < solar_noon && solar_noon < sunset && sunset < 1.0) {
            return Err(SignalError::InvalidEvents(format!(
                "need 0 < sunrise < solar_noon < sunset < 1, got ({sunrise}, {solar_noon}, {sunset})"
            )));
        }
        Ok(SolarEvents {
            sunrise,
            solar_noon,
            sunset,
        })
    }
}

/// Shape of the daylight arches between the anchor events. The argument runs
/// from 0 (sunrise or sunset) to 1 (solar noon); the shape must map 0 to 0
/// and 1 to 1. Pluggable so alternatives to the half-cosine can be tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArchShape {
    /// sin(πx/2): half of a cosine bump, C¹ at noon, kinked at the horizon.
    #[default]
    HalfCosine,
    /// x(2 - x): a parabola clipped at the horizon.
    ClippedQuadratic,
}

impl ArchShape {
    fn eval(self, x: f64) -> f64 {
        match self {
            ArchShape::HalfCosine => (std::f64::consts::FRAC_PI_2 * x).sin(),
            ArchShape::ClippedQuadratic => x * (2.0 - x),
        }
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Spline(PeriodicSpline),
    Arch {
        events: SolarEvents,
        arch: ArchShape,
    },
    Constant(f64),
}

impl Shape {
    fn eval_raw(&self, t: f64) -> f64 {
        match self {
            Shape::Spline(sp) => sp.eval(t),
            Shape::Arch { events, arch } => {
                let t = t - t.floor();
                if t <= events.sunrise || t >= events.sunset {
                    0.0
                } else if t <= events.solar_noon {
                    arch.eval((t - events.sunrise) / (events.solar_noon - events.sunrise))
                } else {
                    arch.eval((events.sunset - t) / (events.sunset - events.solar_noon))
                }
            }
            Shape::Constant(c) => *c,
        }
    }
}

/// A continuous, periodic, nonnegative function on the day.
///
/// Immutable after construction and cheap to share across threads.
#[derive(Debug, Clone)]
pub struct DailySignal {
    shape: Shape,
    scale: f64,
    normalized: bool,
    integral: f64,
    raw_daily_total: Option<f64>,
}

impl DailySignal {
    /// Evaluate at time-of-day fraction `t` (wrapped into the period).
    pub fn eval(&self, t: f64) -> f64 {
        self.shape.eval_raw(t).max(0.0) * self.scale
    }

    /// Whether the signal was scaled to unit integral.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Integral over one day of the stored evaluator.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    /// Daily total of the raw input samples, when meaningful (traffic counts).
    pub fn raw_daily_total(&self) -> Option<f64> {
        self.raw_daily_total
    }

    /// Abscissae where the signal is non-smooth: spline knots or solar events.
    /// Metric integration refines its grid with these.
    pub fn knots(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Spline(sp) => sp.knots().to_vec(),
            Shape::Arch { events, .. } => {
                vec![events.sunrise, events.solar_noon, events.sunset]
            }
            Shape::Constant(_) => Vec::new(),
        }
    }

    /// A constant signal; normalized exactly when `value == 1`.
    pub fn constant(value: f64) -> Self {
        DailySignal {
            shape: Shape::Constant(value),
            scale: 1.0,
            normalized: value == 1.0,
            integral: value,
            raw_daily_total: None,
        }
    }
}

/// Trapezoid rule over [0,1] with the given number of panels.
pub fn trapezoid_unit<F: Fn(f64) -> f64>(f: F, panels: usize) -> f64 {
    let h = 1.0 / panels as f64;
    let mut acc = 0.5 * (f(0.0) + f(1.0));
    for k in 1..panels {
        acc += f(k as f64 * h);
    }
    acc * h
}

fn clamped_integral(shape: &Shape) -> f64 {
    trapezoid_unit(|t| shape.eval_raw(t).max(0.0), NORMALIZATION_PANELS)
}

fn normalized_signal(shape: Shape, raw_total: Option<f64>) -> Result<DailySignal, SignalError> {
    let integral = clamped_integral(&shape);
    if !(integral > 0.0) {
        return Err(SignalError::NormalizationImpossible);
    }
    Ok(DailySignal {
        shape,
        scale: 1.0 / integral,
        normalized: true,
        integral: 1.0,
        raw_daily_total: raw_total,
    })
}

/// Traffic density m(t): periodic cubic spline through the hourly counts,
/// clamped at zero, scaled to unit integral.
pub fn build_traffic_density(ts: &TimeSeries) -> Result<DailySignal, SignalError> {
    ts.check_kind(SeriesKind::Traffic)?;
    ts.check_nonnegative()?;
    let (times, values): (Vec<f64>, Vec<f64>) = ts.samples.iter().copied().unzip();
    let sp = PeriodicSpline::fit(&times, &values)?;
    normalized_signal(Shape::Spline(sp), Some(ts.raw_total()))
}

/// Solar factor s(t) with the default half-cosine arches.
pub fn build_solar_factor(events: SolarEvents) -> Result<DailySignal, SignalError> {
    build_solar_factor_with(events, ArchShape::default())
}

/// Solar factor with an explicit arch shape: zero outside daylight, peak 1 at
/// solar noon before normalization, then scaled to unit integral.
pub fn build_solar_factor_with(
    events: SolarEvents,
    arch: ArchShape,
) -> Result<DailySignal, SignalError> {
    normalized_signal(Shape::Arch { events, arch }, None)
}

/// Measured concentration curve: periodic spline through the averaged-day
/// samples, clamped at zero, in the units of the input (not normalized).
pub fn build_measurement_curve(ts: &TimeSeries) -> Result<DailySignal, SignalError> {
    ts.check_kind(SeriesKind::Concentration)?;
    ts.check_nonnegative()?;
    if ts.samples.len() < 3 {
        return Err(SignalError::InsufficientData {
            needed: 3,
            got: ts.samples.len(),
        });
    }
    let (times, values): (Vec<f64>, Vec<f64>) = ts.samples.iter().copied().unzip();
    let sp = PeriodicSpline::fit(&times, &values)?;
    let shape = Shape::Spline(sp);
    let integral = clamped_integral(&shape);
    Ok(DailySignal {
        shape,
        scale: 1.0,
        normalized: false,
        integral,
        raw_daily_total: None,
    })
}

/// Per-slot mean over the days of a season.
#[derive(Debug, Clone)]
pub struct SeasonalAverage {
    pub series: TimeSeries,
    /// Number of days contributing to each slot of `series`.
    pub contributors: Vec<u32>,
    /// Days that fell inside the window.
    pub days_used: usize,
}

/// Average the per-day series whose date falls inside `window` (inclusive).
/// Slots missing from a day are skipped, not imputed. All days must share
/// one sampling grid; slots are matched with a 1e-9 time tolerance.
pub fn average_seasonal_window(
    days: &[TimeSeries],
    window: (NaiveDate, NaiveDate),
) -> Result<SeasonalAverage, SignalError> {
    const TIME_EPS: f64 = 1e-9;
    let selected: Vec<&TimeSeries> = days
        .iter()
        .filter(|d| match d.date {
            Some(date) => date >= window.0 && date <= window.1,
            None => false,
        })
        .collect();
    if selected.is_empty() {
        return Err(SignalError::NoData);
    }
    let kind = selected[0].kind;

    // Slots keyed by time; days must land on the shared grid.
    let mut slots: Vec<(f64, f64, u32)> = Vec::new();
    for day in &selected {
        day.check_kind(kind)?;
        for &(t, v) in &day.samples {
            match slots.binary_search_by(|probe| probe.0.partial_cmp(&t).unwrap()) {
                Ok(i) => {
                    slots[i].1 += v;
                    slots[i].2 += 1;
                }
                Err(i) => {
                    let near = |j: usize| (slots[j].0 - t).abs() <= TIME_EPS;
                    if i > 0 && near(i - 1) {
                        slots[i - 1].1 += v;
                        slots[i - 1].2 += 1;
                    } else if i < slots.len() && near(i) {
                        slots[i].1 += v;
                        slots[i].2 += 1;
                    } else {
                        slots.insert(i, (t, v, 1));
                    }
                }
            }
        }
    }
    let n_days = selected.len() as u32;
    for &(t, _, c) in &slots {
        if c > n_days {
            return Err(SignalError::GridMismatch(format!(
                "slot t={t} received {c} samples from {n_days} days"
            )));
        }
    }
    let samples: Vec<(f64, f64)> = slots
        .iter()
        .map(|&(t, sum, c)| (t, sum / c as f64))
        .collect();
    let contributors: Vec<u32> = slots.iter().map(|&(_, _, c)| c).collect();
    Ok(SeasonalAverage {
        series: TimeSeries::new(kind, samples)?,
        contributors,
        days_used: selected.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn hourly_series(f: impl Fn(f64) -> f64) -> TimeSeries {
        let samples = (0..24)
            .map(|h| {
                let t = h as f64 / 24.0;
                (t, f(t))
            })
            .collect();
        TimeSeries::new(SeriesKind::Traffic, samples).unwrap()
    }

    #[test]
    fn constant_counts_normalize_to_one() {
        let m = build_traffic_density(&hourly_series(|_| 17.0)).unwrap();
        for k in 0..100 {
            let t = k as f64 / 100.0;
            assert!((m.eval(t) - 1.0).abs() < 1e-9, "m({t}) = {}", m.eval(t));
        }
        assert!(m.is_normalized());
    }

    #[test]
    fn cosine_counts_have_unit_integral_and_peak_at_midnight() {
        let m = build_traffic_density(&hourly_series(|t| 1.0 + (2.0 * PI * t).cos())).unwrap();
        // Independent quadrature of the result.
        let integral = trapezoid_unit(|t| m.eval(t), 1_000_000);
        assert!((integral - 1.0).abs() <= 1e-6, "integral = {integral}");
        // Peak near t = 0: scan and check the argmax wraps close to midnight.
        let mut best = (0.0, f64::MIN);
        for k in 0..10_000 {
            let t = k as f64 / 10_000.0;
            let v = m.eval(t);
            if v > best.1 {
                best = (t, v);
            }
        }
        let dist = best.0.min(1.0 - best.0);
        assert!(dist < 0.05, "peak at t = {}", best.0);
    }

    #[test]
    fn reports_the_daily_total() {
        // The reference count of 72,278 vehicles per day.
        let per_hour = 72_278.0 / 24.0;
        let m = build_traffic_density(&hourly_series(|_| per_hour)).unwrap();
        assert!((m.raw_daily_total().unwrap() - 72_278.0).abs() < 1e-9);
    }

    #[test]
    fn all_zero_counts_cannot_be_normalized() {
        let err = build_traffic_density(&hourly_series(|_| 0.0)).unwrap_err();
        assert!(matches!(err, SignalError::NormalizationImpossible));
    }

    #[test]
    fn too_few_samples_is_an_error() {
        let ts = TimeSeries::new(SeriesKind::Traffic, vec![(0.0, 1.0), (0.5, 2.0)]).unwrap();
        assert!(matches!(
            build_traffic_density(&ts),
            Err(SignalError::InsufficientData { .. })
        ));
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let ts = TimeSeries::new(
            SeriesKind::Concentration,
            vec![(0.0, 1.0), (0.3, 2.0), (0.6, 1.5)],
        )
        .unwrap();
        assert!(matches!(
            build_traffic_density(&ts),
            Err(SignalError::KindMismatch { .. })
        ));
    }

    #[test]
    fn solar_factor_symmetric_events() {
        let ev = SolarEvents::new(0.25, 0.5, 0.75).unwrap();
        let s = build_solar_factor(ev).unwrap();
        let integral = trapezoid_unit(|t| s.eval(t), 1_000_000);
        assert!((integral - 1.0).abs() <= 1e-6);
        assert_eq!(s.eval(0.1), 0.0);
        assert_eq!(s.eval(0.9), 0.0);
        assert_eq!(s.eval(0.25), 0.0);
        assert_eq!(s.eval(0.75), 0.0);
        // Symmetric about noon.
        for k in 1..50 {
            let d = k as f64 * 0.005;
            assert!((s.eval(0.5 - d) - s.eval(0.5 + d)).abs() < 1e-12);
        }
        // Maximum at noon.
        let peak = s.eval(0.5);
        for k in 0..1000 {
            assert!(s.eval(k as f64 / 1000.0) <= peak + 1e-12);
        }
    }

    #[test]
    fn solar_factor_asymmetric_events_peak_and_continuity() {
        let ev = SolarEvents::new(0.3, 0.5, 0.8).unwrap();
        for arch in [ArchShape::HalfCosine, ArchShape::ClippedQuadratic] {
            let s = build_solar_factor_with(ev, arch).unwrap();
            // Both arch formulas give the same value at the junction.
            let eps = 1e-9;
            assert!((s.eval(0.5 - eps) - s.eval(0.5 + eps)).abs() < 1e-6);
            let mut best = (0.0, f64::MIN);
            for k in 0..10_000 {
                let t = k as f64 / 10_000.0;
                if s.eval(t) > best.1 {
                    best = (t, s.eval(t));
                }
            }
            assert!(
                (best.0 - 0.5).abs() < 1e-3,
                "argmax {} for {arch:?}",
                best.0
            );
        }
    }

    #[test]
    fn solar_events_must_be_ordered() {
        assert!(SolarEvents::new(0.5, 0.4, 0.8).is_err());
        assert!(SolarEvents::new(0.0, 0.5, 0.8).is_err());
        assert!(SolarEvents::new(0.2, 0.5, 1.0).is_err());
    }

    #[test]
    fn measurement_curve_keeps_units_and_samples() {
        let samples: Vec<(f64, f64)> = (0..48).map(|k| (k as f64 / 48.0, 37.0)).collect();
        let ts = TimeSeries::new(SeriesKind::Concentration, samples.clone()).unwrap();
        let curve = build_measurement_curve(&ts).unwrap();
        assert!(!curve.is_normalized());
        for k in 0..200 {
            let t = k as f64 / 200.0;
            assert!((curve.eval(t) - 37.0).abs() < 1e-10);
        }
        // Interpolation reproduces arbitrary samples.
        let wavy: Vec<(f64, f64)> = (0..48)
            .map(|k| {
                let t = k as f64 / 48.0;
                (t, 40.0 + 30.0 * (2.0 * PI * t).sin().abs())
            })
            .collect();
        let ts = TimeSeries::new(SeriesKind::Concentration, wavy.clone()).unwrap();
        let curve = build_measurement_curve(&ts).unwrap();
        for (t, v) in wavy {
            assert!((curve.eval(t) - v).abs() < 1e-10);
        }
    }

    #[test]
    fn averaging_one_day_is_identity() {
        let date = NaiveDate::from_ymd_opt(2016, 9, 10).unwrap();
        let day = TimeSeries::new(
            SeriesKind::Concentration,
            vec![(0.0, 10.0), (0.25, 20.0), (0.5, 15.0)],
        )
        .unwrap()
        .with_date(date);
        let avg = average_seasonal_window(std::slice::from_ref(&day), (date, date)).unwrap();
        assert_eq!(avg.series.samples, day.samples);
        assert_eq!(avg.contributors, vec![1, 1, 1]);
    }

    #[test]
    fn averaging_two_days_is_the_mean() {
        let d1 = NaiveDate::from_ymd_opt(2016, 9, 1).unwrap();
        let d2 = NaiveDate::from_ymd_opt(2016, 9, 2).unwrap();
        let mk = |date, scale: f64| {
            TimeSeries::new(
                SeriesKind::Concentration,
                vec![(0.0, scale), (0.5, 2.0 * scale)],
            )
            .unwrap()
            .with_date(date)
        };
        let avg = average_seasonal_window(&[mk(d1, 1.0), mk(d2, 3.0)], (d1, d2)).unwrap();
        assert_eq!(avg.series.samples, vec![(0.0, 2.0), (0.5, 4.0)]);
    }

    #[test]
    fn missing_slot_uses_remaining_days() {
        let dates: Vec<NaiveDate> = (1..=3)
            .map(|d| NaiveDate::from_ymd_opt(2016, 9, d).unwrap())
            .collect();
        // Slot t=0.5 missing on the third day; mean of 4 and 8 is 6.
        let days = vec![
            TimeSeries::new(SeriesKind::Concentration, vec![(0.0, 1.0), (0.5, 4.0)])
                .unwrap()
                .with_date(dates[0]),
            TimeSeries::new(SeriesKind::Concentration, vec![(0.0, 2.0), (0.5, 8.0)])
                .unwrap()
                .with_date(dates[1]),
            TimeSeries::new(SeriesKind::Concentration, vec![(0.0, 3.0)])
                .unwrap()
                .with_date(dates[2]),
        ];
        let avg = average_seasonal_window(&days, (dates[0], dates[2])).unwrap();
        assert_eq!(avg.series.samples, vec![(0.0, 2.0), (0.5, 6.0)]);
        assert_eq!(avg.contributors, vec![3, 2]);
        assert_eq!(avg.days_used, 3);
    }

    #[test]
    fn window_outside_data_is_an_error() {
        let date = NaiveDate::from_ymd_opt(2016, 9, 10).unwrap();
        let day = TimeSeries::new(SeriesKind::Concentration, vec![(0.0, 1.0)])
            .unwrap()
            .with_date(date);
        let w0 = NaiveDate::from_ymd_opt(2017, 1, 1).unwrap();
        let w1 = NaiveDate::from_ymd_opt(2017, 2, 1).unwrap();
        assert!(matches!(
            average_seasonal_window(&[day], (w0, w1)),
            Err(SignalError::NoData)
        ));
    }

    #[test]
    fn clamping_precedes_normalization() {
        // Data dipping negative between samples: spline undershoots, the
        // signal must not.
        let samples: Vec<(f64, f64)> = (0..24)
            .map(|h| {
                let t = h as f64 / 24.0;
                (t, if (6..=7).contains(&h) { 100.0 } else { 0.0 })
            })
            .collect();
        let ts = TimeSeries::new(SeriesKind::Traffic, samples).unwrap();
        let m = build_traffic_density(&ts).unwrap();
        for k in 0..10_000 {
            let v = m.eval(k as f64 / 10_000.0);
            assert!(v >= 0.0, "negative value {v}");
        }
        let integral = trapezoid_unit(|t| m.eval(t), 1_000_000);
        assert!((integral - 1.0).abs() <= 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        // Scaling every count by c > 0 leaves m(t) unchanged.
        #[test]
        fn traffic_density_is_scale_free(
            seed in prop::array::uniform24(0.1f64..100.0),
            c in 0.01f64..100.0,
        ) {
            let base = TimeSeries::new(
                SeriesKind::Traffic,
                (0..24).map(|h| (h as f64 / 24.0, seed[h])).collect(),
            ).unwrap();
            let scaled = TimeSeries::new(
                SeriesKind::Traffic,
                (0..24).map(|h| (h as f64 / 24.0, seed[h] * c)).collect(),
            ).unwrap();
            let m1 = build_traffic_density(&base).unwrap();
            let m2 = build_traffic_density(&scaled).unwrap();
            for k in 0..10_000 {
                let t = k as f64 / 10_000.0;
                prop_assert!((m1.eval(t) - m2.eval(t)).abs() <= 1e-9);
            }
        }

        // Spline evaluation reproduces the inputs at the sample abscissae.
        #[test]
        fn spline_reproduces_samples(values in prop::collection::vec(0.0f64..1e4, 3..40)) {
            let n = values.len();
            let times: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
            let sp = PeriodicSpline::fit(&times, &values).unwrap();
            for (t, v) in times.iter().zip(&values) {
                prop_assert!((sp.eval(*t) - v).abs() <= 1e-10);
            }
        }
    }
}
