//! Classical orbital elements, Cartesian states and the conversions
//! between them.
//!
//! The element set is `[a, e, i, raan, argp, u]` with `u` the argument of
//! latitude (`u = argp + true anomaly`), which stays well defined for the
//! near-circular orbits this crate works with. Angles are radians and are
//! wrapped to `[0, 2pi)`; degrees appear only at the CLI boundary.

use crate::constants::{PhysicalConstants, E_MIN, I_MIN};
use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Wrap an angle to `[0, 2pi)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    // rem_euclid can return TAU when angle is a tiny negative number.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Wrap an angle to `(-pi, pi]` (shortest-arc difference convention).
pub fn wrap_pi(angle: f64) -> f64 {
    let w = wrap_two_pi(angle);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Classical orbital elements with argument of latitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitalElements {
    /// Semi-major axis (km).
    pub a: f64,
    /// Eccentricity.
    pub e: f64,
    /// Inclination (rad).
    pub i: f64,
    /// Right ascension of the ascending node (rad).
    pub raan: f64,
    /// Argument of perigee (rad).
    pub argp: f64,
    /// Argument of latitude (rad), `u = argp + theta`.
    pub u: f64,
}

impl OrbitalElements {
    /// Build a validated element set; angles are wrapped to `[0, 2pi)`.
    pub fn new(a: f64, e: f64, i: f64, raan: f64, argp: f64, u: f64) -> Result<Self> {
        let x = Self {
            a,
            e,
            i,
            raan: wrap_two_pi(raan),
            argp: wrap_two_pi(argp),
            u: wrap_two_pi(u),
        };
        x.validate()?;
        Ok(x)
    }

    /// Check the element invariants: `a > 0`, `0 <= e < 1`, `0 <= i <= pi`,
    /// `p > 0`, all finite.
    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.a, self.e, self.i, self.raan, self.argp, self.u]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Domain("non-finite orbital element".into()));
        }
        if self.a <= 0.0 {
            return Err(Error::Domain(format!("semi-major axis {} <= 0", self.a)));
        }
        if !(0.0..1.0).contains(&self.e) {
            return Err(Error::Domain(format!("eccentricity {} not in [0, 1)", self.e)));
        }
        if !(0.0..=PI).contains(&self.i) {
            return Err(Error::Domain(format!("inclination {} not in [0, pi]", self.i)));
        }
        Ok(())
    }

    /// Semi-latus rectum `p = a (1 - e^2)` (km).
    pub fn p(&self) -> f64 {
        self.a * (1.0 - self.e * self.e)
    }

    /// True anomaly `theta = u - argp`, wrapped to `[0, 2pi)`.
    pub fn theta(&self) -> f64 {
        wrap_two_pi(self.u - self.argp)
    }

    /// Current orbit radius `r = p / (1 + e cos theta)` (km).
    pub fn radius(&self) -> f64 {
        self.p() / (1.0 + self.e * self.theta().cos())
    }

    /// Specific angular momentum magnitude `h = sqrt(mu p)` (km^2/s).
    pub fn h(&self, c: &PhysicalConstants) -> f64 {
        (c.mu * self.p()).sqrt()
    }

    /// Orbital period (s).
    pub fn period(&self, c: &PhysicalConstants) -> f64 {
        TAU / mean_motion(self.a, c).expect("validated elements")
    }

    /// Convert to an Earth-centered inertial Cartesian state at `epoch`.
    pub fn to_cartesian(&self, epoch: f64, c: &PhysicalConstants) -> CartesianState {
        let p = self.p();
        let theta = self.theta();
        let r = p / (1.0 + self.e * theta.cos());
        let h = (c.mu * p).sqrt();

        // Perifocal position/velocity.
        let r_pf = Vector3::new(r * theta.cos(), r * theta.sin(), 0.0);
        let v_pf = Vector3::new(
            -(c.mu / p).sqrt() * theta.sin(),
            (c.mu / p).sqrt() * (self.e + theta.cos()),
            0.0,
        );
        debug_assert!(h.is_finite());

        let rot = perifocal_to_eci(self.raan, self.i, self.argp);
        CartesianState {
            position: rot * r_pf,
            velocity: rot * v_pf,
            epoch,
        }
    }
}

/// Rotation taking perifocal coordinates into ECI: `Rz(raan) Rx(i) Rz(argp)`.
fn perifocal_to_eci(raan: f64, i: f64, argp: f64) -> Matrix3<f64> {
    let rz_raan = Matrix3::new(
        raan.cos(),
        -raan.sin(),
        0.0,
        raan.sin(),
        raan.cos(),
        0.0,
        0.0,
        0.0,
        1.0,
    );
    let rx_i = Matrix3::new(
        1.0,
        0.0,
        0.0,
        0.0,
        i.cos(),
        -i.sin(),
        0.0,
        i.sin(),
        i.cos(),
    );
    let rz_argp = Matrix3::new(
        argp.cos(),
        -argp.sin(),
        0.0,
        argp.sin(),
        argp.cos(),
        0.0,
        0.0,
        0.0,
        1.0,
    );
    rz_raan * rx_i * rz_argp
}

/// Inertial Cartesian state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    /// ECI position (km).
    pub position: Vector3<f64>,
    /// ECI velocity (km/s).
    pub velocity: Vector3<f64>,
    /// Seconds since scenario start.
    pub epoch: f64,
}

impl CartesianState {
    pub fn new(position: Vector3<f64>, velocity: Vector3<f64>, epoch: f64) -> Self {
        Self {
            position,
            velocity,
            epoch,
        }
    }

    /// Specific orbital energy (km^2/s^2).
    pub fn energy(&self, c: &PhysicalConstants) -> f64 {
        self.velocity.norm_squared() / 2.0 - c.mu / self.position.norm()
    }

    /// Altitude above the mean equatorial radius (km).
    pub fn altitude(&self, c: &PhysicalConstants) -> f64 {
        self.position.norm() - c.re
    }

    /// Convert back to orbital elements.
    ///
    /// Degenerate-angle conventions: for `e < E_MIN` the argument of perigee
    /// is set to zero and `u` carries the in-plane angle; for `i < I_MIN`
    /// the node is undefined and `raan` is set to zero (node along +X).
    pub fn to_elements(&self, c: &PhysicalConstants) -> Result<OrbitalElements> {
        let r_vec = self.position;
        let v_vec = self.velocity;
        let r = r_vec.norm();
        if r <= 0.0 {
            return Err(Error::Domain("zero position vector".into()));
        }

        let energy = self.energy(c);
        if energy >= 0.0 {
            return Err(Error::UnsupportedRegime(format!(
                "specific energy {energy:.6} km^2/s^2 is not a bound orbit"
            )));
        }
        let a = -c.mu / (2.0 * energy);

        let h_vec = r_vec.cross(&v_vec);
        let h = h_vec.norm();
        if h <= 0.0 {
            return Err(Error::UnsupportedRegime("rectilinear trajectory".into()));
        }

        let e_vec = ((v_vec.norm_squared() - c.mu / r) * r_vec - r_vec.dot(&v_vec) * v_vec) / c.mu;
        let e = e_vec.norm();
        if e >= 1.0 {
            return Err(Error::UnsupportedRegime(format!("eccentricity {e} >= 1")));
        }

        let i = (h_vec.z / h).clamp(-1.0, 1.0).acos();
        let h_hat = h_vec / h;

        // Node line: z_hat x h. Falls back to +X for near-equatorial orbits.
        let (node_hat, raan) = if i >= I_MIN && (PI - i) >= I_MIN {
            let n_vec = Vector3::new(-h_vec.y, h_vec.x, 0.0);
            let n_hat = n_vec / n_vec.norm();
            (n_hat, wrap_two_pi(n_vec.y.atan2(n_vec.x)))
        } else {
            (Vector3::x(), 0.0)
        };

        // In-plane angle from the node line to the position vector.
        let m_hat = h_hat.cross(&node_hat);
        let u = wrap_two_pi(r_vec.dot(&m_hat).atan2(r_vec.dot(&node_hat)));

        let argp = if e >= E_MIN {
            let theta =
                wrap_two_pi(r_vec.dot(&h_hat.cross(&e_vec)).atan2(r_vec.dot(&e_vec)));
            wrap_two_pi(u - theta)
        } else {
            0.0
        };

        OrbitalElements::new(a, e, i, raan, argp, u)
    }
}

/// Mean motion `n = sqrt(mu / a^3)` (rad/s).
pub fn mean_motion(a: f64, c: &PhysicalConstants) -> Result<f64> {
    if a <= 0.0 || !a.is_finite() {
        return Err(Error::Domain(format!("semi-major axis {a} must be > 0")));
    }
    Ok((c.mu / (a * a * a)).sqrt())
}
