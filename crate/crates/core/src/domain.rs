//! Physical parameters, cross-section geometry and the dimensionless groups
//! that drive the solver.
//!
//! All user-facing quantities are held in the units they are usually quoted
//! in (lengths in m, diffusion in cm²/s, reaction rate in 1/(day·UVI),
//! concentrations in μg/m³). The fixed conversion table in [`units`] brings
//! them into one coherent system before any ratio is formed; everything past
//! [`derive_groups`] is dimensionless.

use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// Unit conversion constants. Only the conversions this model needs.
pub mod units {
    /// cm² → m².
    pub const M2_PER_CM2: f64 = 1e-4;
    /// 1/day → 1/s divisor.
    pub const SECONDS_PER_DAY: f64 = 86_400.0;
}

/// Baseline molecular diffusion coefficient of NO in air [cm²/s].
pub const D_BASELINE_CM2_S: f64 = 0.146;

/// Axis-aligned rectangle, `x0 <= x1`, `y0 <= y1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn is_valid(&self) -> bool {
        self.x0.is_finite()
            && self.y0.is_finite()
            && self.x1.is_finite()
            && self.y1.is_finite()
            && self.x1 > self.x0
            && self.y1 > self.y0
    }

    /// Containment allows shared edges, so a region may fill the whole domain.
    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn scaled(&self, factor: f64) -> Rect {
        Rect::new(
            self.x0 * factor,
            self.y0 * factor,
            self.x1 * factor,
            self.y1 * factor,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Street cross-section: domain rectangle, road segment on the bottom edge,
/// emission box and the probe location. Lengths in meters until the geometry
/// is rescaled by the reference length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Geometry {
    /// Domain width [m].
    pub width: f64,
    /// Domain height [m].
    pub height: f64,
    /// Width of the road segment, centered on the bottom edge [m].
    pub road_width: f64,
    /// Emission region of the traffic source [m].
    pub emission_box: Rect,
    /// Location where simulated concentration is sampled [m].
    pub probe_point: Point,
}

impl Default for Geometry {
    fn default() -> Self {
        // 40 m x 8 m cross-section, 15 m road, 15 x 0.4 m emission box whose
        // bottom edge sits 0.1 m above the asphalt, probe 1.75 m above the
        // road center.
        Geometry {
            width: 40.0,
            height: 8.0,
            road_width: 15.0,
            emission_box: Rect::new(12.5, 0.1, 27.5, 0.5),
            probe_point: Point::new(20.0, 1.75),
        }
    }
}

impl Geometry {
    /// Interval of the bottom edge occupied by the road, centered.
    pub fn road_span(&self) -> (f64, f64) {
        let lo = 0.5 * (self.width - self.road_width);
        (lo, lo + self.road_width)
    }

    pub fn domain_rect(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width, self.height)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if !(self.width > 0.0 && self.height > 0.0) || !self.width.is_finite() {
            return Err(DomainError::InvalidGeometry(format!(
                "domain must be a proper rectangle, got {} x {}",
                self.width, self.height
            )));
        }
        if !(self.road_width > 0.0 && self.road_width <= self.width) {
            return Err(DomainError::InvalidGeometry(format!(
                "road width {} must lie in (0, {}]",
                self.road_width, self.width
            )));
        }
        if !self.emission_box.is_valid() || !self.domain_rect().contains_rect(&self.emission_box) {
            return Err(DomainError::InvalidGeometry(
                "emission box must be a proper rectangle inside the domain".into(),
            ));
        }
        if !self
            .domain_rect()
            .contains_point(self.probe_point.x, self.probe_point.y)
        {
            return Err(DomainError::InvalidGeometry(format!(
                "probe point ({}, {}) lies outside the domain",
                self.probe_point.x, self.probe_point.y
            )));
        }
        Ok(())
    }

    /// Geometry with every length divided by `l`.
    pub fn scaled_by_reference(&self, l: f64) -> Geometry {
        let inv = 1.0 / l;
        Geometry {
            width: self.width * inv,
            height: self.height * inv,
            road_width: self.road_width * inv,
            emission_box: self.emission_box.scaled(inv),
            probe_point: Point::new(self.probe_point.x * inv, self.probe_point.y * inv),
        }
    }
}

/// Model parameters in their quoted units.
///
/// `sigma` is stored verbatim as printed; only the group `sigma L / D` ever
/// reaches the solver. The reference time is derived, never set: see
/// [`PhysicalParams::t_r`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicalParams {
    /// Diffusion-dispersion coefficient [cm²/s].
    pub d: f64,
    /// Reference length [m].
    pub l: f64,
    /// Reference concentration [μg/m³].
    pub u_r: f64,
    /// Initial concentration [μg/m³].
    pub u_0: f64,
    /// Threshold concentration for ambient exchange [μg/m³].
    pub u_t: f64,
    /// Environmental exchange parameter (number as printed).
    pub sigma: f64,
    /// Reference emission rate [μg/(m³·s)]; usually unknown, see `a_f`.
    pub f_r: Option<f64>,
    /// Direct value for the emission number, bypassing `f_r`.
    pub a_f: Option<f64>,
    /// Reference UV index [UVI].
    pub s_r: f64,
    /// Reaction rate NO → NO₂ [1/(day·UVI)].
    pub kappa: f64,
    /// Asphalt reactivity [-].
    pub gamma: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            d: 43.8,
            l: 40.0,
            u_r: 37.0,
            u_0: 37.0,
            u_t: 0.0,
            sigma: 300.0,
            f_r: None,
            a_f: Some(5.5),
            s_r: 1.0,
            kappa: 1.85e4,
            gamma: 0.0,
        }
    }
}

impl PhysicalParams {
    /// Diffusion coefficient in m²/s.
    pub fn d_si(&self) -> f64 {
        self.d * units::M2_PER_CM2
    }

    /// Reaction rate in 1/(s·UVI).
    pub fn kappa_si(&self) -> f64 {
        self.kappa / units::SECONDS_PER_DAY
    }

    /// Reference time t_r = L²/D [s]. Derived on every call so it can never
    /// drift from the current L and D.
    pub fn t_r(&self) -> f64 {
        self.l * self.l / self.d_si()
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        fn positive(field: &'static str, v: f64) -> Result<(), DomainError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(DomainError::InvalidParameter {
                    field,
                    reason: format!("must be positive and finite, got {v}"),
                })
            }
        }
        fn nonnegative(field: &'static str, v: f64) -> Result<(), DomainError> {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(DomainError::InvalidParameter {
                    field,
                    reason: format!("must be nonnegative and finite, got {v}"),
                })
            }
        }
        positive("D", self.d)?;
        positive("L", self.l)?;
        positive("u_r", self.u_r)?;
        positive("s_r", self.s_r)?;
        nonnegative("u_0", self.u_0)?;
        nonnegative("u_T", self.u_t)?;
        nonnegative("sigma", self.sigma)?;
        nonnegative("kappa", self.kappa)?;
        nonnegative("gamma", self.gamma)?;
        if let Some(f_r) = self.f_r {
            positive("f_r", f_r)?;
        }
        if let Some(a_f) = self.a_f {
            positive("A_f", a_f)?;
        }
        Ok(())
    }
}

/// The coefficients of the dimensionless problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessGroups {
    /// Emission number A_f = f_r L² / (u_r D).
    pub a_f: f64,
    /// Solar reaction number A_s = s_r L² / D.
    pub a_s: f64,
    /// Ambient exchange coefficient σL/D on the open boundary.
    pub robin_coeff: f64,
    /// κL/D; multiplied by γ when the asphalt term is assembled.
    pub asphalt_coeff_base: f64,
    /// Initial concentration u_0/u_r.
    pub u0_bar: f64,
    /// Threshold concentration u_T/u_r.
    pub ut_bar: f64,
}

/// Form the dimensionless groups from validated physical parameters.
///
/// Everything is converted to one coherent unit system (m, s, μg/m³, UVI)
/// before any ratio is taken. If `a_f` is set it wins over the `f_r` formula,
/// which lets the emission number be imposed directly when `f_r` is unknown.
pub fn derive_groups(p: &PhysicalParams) -> Result<DimensionlessGroups, DomainError> {
    p.validate()?;
    let d = p.d_si();
    let l2_over_d = p.l * p.l / d;
    let a_f = match (p.a_f, p.f_r) {
        (Some(a_f), _) => a_f,
        (None, Some(f_r)) => f_r * l2_over_d / p.u_r,
        (None, None) => return Err(DomainError::MissingEmissionRate),
    };
    Ok(DimensionlessGroups {
        a_f,
        a_s: p.s_r * l2_over_d,
        robin_coeff: p.sigma * p.l / d,
        asphalt_coeff_base: p.kappa_si() * p.l / d,
        u0_bar: p.u_0 / p.u_r,
        ut_bar: p.u_t / p.u_r,
    })
}

/// Map a dimensionless concentration back to μg/m³.
pub fn redimensionalize(value: f64, p: &PhysicalParams) -> f64 {
    value * p.u_r
}

/// Map a concentration in μg/m³ to its dimensionless value.
pub fn nondimensionalize_concentration(value: f64, p: &PhysicalParams) -> f64 {
    value / p.u_r
}
