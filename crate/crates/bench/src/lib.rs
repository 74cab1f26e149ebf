//! Shared fixtures for the benchmark targets.

use roadno_core::signal::{
    build_solar_factor, build_traffic_density, SeriesKind, SolarEvents, TimeSeries,
};
use roadno_core::DailySignal;

pub fn traffic_signal() -> DailySignal {
    let shape = [
        0.6, 0.4, 0.3, 0.3, 0.5, 1.5, 3.5, 5.5, 5.8, 5.0, 4.5, 4.3, 4.5, 4.8, 5.3, 5.9, 6.2, 6.0,
        5.2, 4.0, 3.0, 2.2, 1.5, 1.0,
    ];
    let ts = TimeSeries::new(
        SeriesKind::Traffic,
        (0..24)
            .map(|h| (h as f64 / 24.0, shape[h] * 1000.0))
            .collect(),
    )
    .unwrap();
    build_traffic_density(&ts).unwrap()
}

pub fn solar_signal() -> DailySignal {
    build_solar_factor(SolarEvents::new(0.33, 0.51, 0.73).unwrap()).unwrap()
}
