//! Physical constants and numerical guard thresholds.

use serde::{Deserialize, Serialize};

/// Gravitational parameter, Earth radius and J2 coefficient used by every
/// dynamics routine. Constructed once and passed explicitly so tests can
/// switch perturbations off (e.g. `j2 = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Gravitational parameter mu (km^3/s^2).
    pub mu: f64,
    /// Mean equatorial radius (km).
    pub re: f64,
    /// Second zonal harmonic (dimensionless).
    pub j2: f64,
}

impl PhysicalConstants {
    /// WGS-84 / EGM96 values.
    pub const fn wgs84() -> Self {
        Self {
            mu: 398_600.4418,
            re: 6378.137,
            j2: 1.082_626_68e-3,
        }
    }

    /// Same gravity field with the J2 term switched off (pure Keplerian).
    pub const fn keplerian() -> Self {
        Self {
            j2: 0.0,
            ..Self::wgs84()
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::wgs84()
    }
}

/// Eccentricity floor below which the Gauss control matrix is singular
/// (it contains 1/e terms). Scenario generators must stay above this.
pub const E_MIN: f64 = 1e-4;

/// Inclination floor (rad) below which the Gauss control matrix is singular
/// (1/tan i, 1/sin i terms). 0.1 degrees.
pub const I_MIN: f64 = 0.1 * std::f64::consts::PI / 180.0;

/// Minimum perigee altitude (km) accepted by the planner.
pub const MIN_ALTITUDE_KM: f64 = 100.0;
