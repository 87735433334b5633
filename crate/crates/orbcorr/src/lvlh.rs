//! Local-vertical/local-horizontal frame, impulsive burns and thrust
//! pointing perturbations.
//!
//! LVLH axes: radial (outward), along-track (completing the triad, close to
//! the velocity for near-circular orbits), cross-track (along the orbital
//! angular momentum). Burn vectors and disturbance accelerations are
//! expressed in this frame.

use crate::elements::CartesianState;
use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

/// An impulsive velocity change in LVLH axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LvlhImpulse {
    /// `[radial, along-track, cross-track]` (km/s).
    pub dv: Vector3<f64>,
    /// Burn epoch, seconds since scenario start.
    pub epoch: f64,
}

impl LvlhImpulse {
    pub fn new(dv: Vector3<f64>, epoch: f64) -> Self {
        Self { dv, epoch }
    }

    pub fn magnitude(&self) -> f64 {
        self.dv.norm()
    }
}

/// Rotation matrix whose columns are the LVLH basis vectors in ECI:
/// `[r_hat, t_hat, h_hat]`. Multiplying an LVLH vector by this matrix
/// expresses it in ECI.
pub fn lvlh_to_eci(state: &CartesianState) -> Matrix3<f64> {
    let r_hat = state.position.normalize();
    let h_vec = state.position.cross(&state.velocity);
    let h_hat = h_vec.normalize();
    let t_hat = h_hat.cross(&r_hat);
    Matrix3::from_columns(&[r_hat, t_hat, h_hat])
}

/// Express an ECI vector in LVLH axes at the given state.
pub fn eci_to_lvlh(state: &CartesianState, v_eci: &Vector3<f64>) -> Vector3<f64> {
    lvlh_to_eci(state).transpose() * v_eci
}

/// Two orthonormal axes perpendicular to `direction`, used both to apply
/// thrust-direction errors and to make them observable to the estimator.
/// The construction is deterministic: the first axis is the normalized
/// rejection of the smallest-component unit vector.
pub fn transverse_axes(direction: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let u = direction.normalize();
    // Pick the coordinate axis least aligned with u to avoid degeneracy.
    let seed = if u.x.abs() <= u.y.abs() && u.x.abs() <= u.z.abs() {
        Vector3::x()
    } else if u.y.abs() <= u.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let e1 = (seed - u * seed.dot(&u)).normalize();
    let e2 = u.cross(&e1);
    (e1, e2)
}

/// Rotation modelling a thrust pointing error of two small angles (rad)
/// about the transverse axes of the nominal burn direction. Identity when
/// both angles are zero or the nominal direction vanishes.
pub fn pointing_rotation(nominal_dv: &Vector3<f64>, angle1: f64, angle2: f64) -> Rotation3<f64> {
    if nominal_dv.norm() == 0.0 || (angle1 == 0.0 && angle2 == 0.0) {
        return Rotation3::identity();
    }
    let (e1, e2) = transverse_axes(nominal_dv);
    Rotation3::from_axis_angle(&Unit::new_normalize(e1), angle1)
        * Rotation3::from_axis_angle(&Unit::new_normalize(e2), angle2)
}
