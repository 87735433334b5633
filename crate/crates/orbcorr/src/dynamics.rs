//! Element-space dynamics: J2 secular rates, the Gauss variational control
//! matrix, and the combined state derivative
//! `x_dot = A(x) + B(x) (u + d)`.

use crate::constants::{PhysicalConstants, E_MIN, I_MIN};
use crate::elements::OrbitalElements;
use crate::error::{Error, Result};
use nalgebra::{Matrix6x3, Vector3, Vector6};

/// Natural element rates `[0, 0, 0, raan_dot, argp_dot, u_dot]`.
///
/// Only the ascending node, argument of perigee and argument of latitude
/// drift; the first three elements have no secular J2 rate. The `u` rate
/// carries the osculating `h/r^2` term plus the J2 correction, so it is the
/// full angular rate at the current point of the orbit.
pub fn secular_rates(x: &OrbitalElements, c: &PhysicalConstants) -> Vector6<f64> {
    let p = x.p();
    let n = (c.mu / (x.a * x.a * x.a)).sqrt();
    let h = (c.mu * p).sqrt();
    let r = x.radius();
    let sin_i = x.i.sin();
    let sqrt_1me2 = (1.0 - x.e * x.e).sqrt();
    let k = 3.0 * c.re * c.re * c.j2 * n / (p * p);

    let raan_dot = -(k / 2.0) * x.i.cos();
    let argp_dot = (k / 4.0) * (4.0 - 5.0 * sin_i * sin_i);
    let u_dot = h / (r * r)
        - (k / 4.0)
            * (sin_i * sin_i * (5.0 - 3.0 * sqrt_1me2) + (2.0 * sqrt_1me2 - 4.0));

    Vector6::new(0.0, 0.0, 0.0, raan_dot, argp_dot, u_dot)
}

/// The J2 contribution to the mean rates of `(raan, argp, u)` for an orbit
/// of the given shape, without the osculating `h/r^2` term. Used by the
/// planner, which reasons about orbit-averaged drift.
pub fn j2_mean_rates(a: f64, e: f64, i: f64, c: &PhysicalConstants) -> (f64, f64, f64) {
    let p = a * (1.0 - e * e);
    let n = (c.mu / (a * a * a)).sqrt();
    let sin_i = i.sin();
    let sqrt_1me2 = (1.0 - e * e).sqrt();
    let k = 3.0 * c.re * c.re * c.j2 * n / (p * p);

    let raan_dot = -(k / 2.0) * i.cos();
    let argp_dot = (k / 4.0) * (4.0 - 5.0 * sin_i * sin_i);
    let u_dot_j2 =
        -(k / 4.0) * (sin_i * sin_i * (5.0 - 3.0 * sqrt_1me2) + (2.0 * sqrt_1me2 - 4.0));
    (raan_dot, argp_dot, u_dot_j2)
}

/// Gauss variational control matrix mapping LVLH accelerations
/// `[f_r, f_c, f_n]` to element rates. Rows follow the element order
/// `[a, e, i, raan, argp, u]`.
///
/// Contains `1/e` and `1/tan i` terms, so it is guarded by the `E_MIN` and
/// `I_MIN` singularity floors.
pub fn control_matrix(x: &OrbitalElements, c: &PhysicalConstants) -> Result<Matrix6x3<f64>> {
    if x.e < E_MIN {
        return Err(Error::Singular {
            element: "eccentricity",
            value: x.e,
            guard: E_MIN,
        });
    }
    let sin_i = x.i.sin();
    if sin_i < I_MIN.sin() {
        return Err(Error::Singular {
            element: "inclination",
            value: x.i,
            guard: I_MIN,
        });
    }

    let p = x.p();
    let h = (c.mu * p).sqrt();
    let r = x.radius();
    let theta = x.theta();
    let (sin_th, cos_th) = theta.sin_cos();
    let (sin_u, cos_u) = x.u.sin_cos();
    let tan_i = x.i.tan();

    let mut b = Matrix6x3::zeros();
    // Semi-major axis.
    b[(0, 0)] = 2.0 * x.a * x.a * x.e * sin_th / h;
    b[(0, 1)] = 2.0 * x.a * x.a * p / (h * r);
    // Eccentricity.
    b[(1, 0)] = p * sin_th / h;
    b[(1, 1)] = ((p + r) * cos_th + r * x.e) / h;
    // Inclination.
    b[(2, 2)] = r * cos_u / h;
    // Ascending node.
    b[(3, 2)] = r * sin_u / (h * sin_i);
    // Argument of perigee.
    b[(4, 0)] = -p * cos_th / (h * x.e);
    b[(4, 1)] = (p + r) * sin_th / (h * x.e);
    b[(4, 2)] = -r * sin_u / (h * tan_i);
    // Argument of latitude: the in-plane terms of argp and true anomaly
    // cancel exactly, leaving only the node-regression coupling.
    b[(5, 2)] = -r * sin_u / (h * tan_i);
    Ok(b)
}

/// Full state derivative `A(x) + B(x) (u + d)` with `u` a continuous LVLH
/// control acceleration and `d` an LVLH disturbance acceleration (km/s^2).
///
/// When both `u` and `d` are zero the control matrix is skipped entirely so
/// purely ballistic propagation works below the singularity guards.
pub fn derivative(
    x: &OrbitalElements,
    control: &Vector3<f64>,
    disturbance: &Vector3<f64>,
    c: &PhysicalConstants,
) -> Result<Vector6<f64>> {
    let natural = secular_rates(x, c);
    let forcing = control + disturbance;
    if forcing == Vector3::zeros() {
        return Ok(natural);
    }
    let b = control_matrix(x, c)?;
    Ok(natural + b * forcing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    const C: PhysicalConstants = PhysicalConstants::wgs84();

    fn leo() -> OrbitalElements {
        OrbitalElements::new(7078.137, 0.001, 51.6f64.to_radians(), 0.4, 0.2, 1.1).unwrap()
    }

    #[test]
    fn polar_orbit_has_no_node_drift() {
        let x = OrbitalElements::new(7078.137, 0.001, PI / 2.0, 0.0, 0.0, 0.0).unwrap();
        let rates = secular_rates(&x, &C);
        assert_abs_diff_eq!(rates[3], 0.0, epsilon = 1e-22);
    }

    #[test]
    fn no_j2_leaves_only_angular_motion() {
        let c0 = PhysicalConstants::keplerian();
        let x = leo();
        let rates = secular_rates(&x, &c0);
        let h = x.h(&c0);
        let r = x.radius();
        for k in 0..5 {
            assert_abs_diff_eq!(rates[k], 0.0, epsilon = 1e-22);
        }
        assert_relative_eq!(rates[5], h / (r * r), max_relative = 1e-14);
    }

    #[test]
    fn node_rate_matches_reference_magnitude() {
        // 700 km, 51.6 deg: about -4.3 deg/day of nodal regression.
        let rates = secular_rates(&leo(), &C);
        let deg_per_day = rates[3].to_degrees() * 86400.0;
        assert_relative_eq!(deg_per_day, -4.3, max_relative = 0.02);
    }

    #[test]
    fn node_rate_sign_flips_across_polar() {
        let mk = |i_deg: f64| {
            OrbitalElements::new(7078.137, 0.001, (i_deg as f64).to_radians(), 0.0, 0.0, 0.0)
                .unwrap()
        };
        assert!(secular_rates(&mk(51.6), &C)[3] < 0.0);
        assert!(secular_rates(&mk(120.0), &C)[3] > 0.0);
        assert_abs_diff_eq!(secular_rates(&mk(90.0), &C)[3], 0.0, epsilon = 1e-22);
    }

    #[test]
    fn control_matrix_structural_zeros() {
        let b = control_matrix(&leo(), &C).unwrap();
        // Cross-track never moves a or e; in-plane never moves i or raan.
        assert_eq!(b[(0, 2)], 0.0);
        assert_eq!(b[(1, 2)], 0.0);
        assert_eq!(b[(2, 0)], 0.0);
        assert_eq!(b[(2, 1)], 0.0);
        assert_eq!(b[(3, 0)], 0.0);
        assert_eq!(b[(3, 1)], 0.0);
        assert_eq!(b[(5, 0)], 0.0);
        assert_eq!(b[(5, 1)], 0.0);
    }

    #[test]
    fn sma_row_at_periapsis() {
        // theta = 0: the radial column of the sma row vanishes.
        let x = OrbitalElements::new(7078.137, 0.01, 0.9, 0.1, 0.7, 0.7).unwrap();
        let b = control_matrix(&x, &C).unwrap();
        assert_abs_diff_eq!(b[(0, 0)], 0.0, epsilon = 1e-12);
        let p = x.p();
        let h = x.h(&C);
        let r = x.radius();
        assert_relative_eq!(b[(0, 1)], 2.0 * x.a * x.a * p / (h * r), max_relative = 1e-14);
    }

    #[test]
    fn singularity_guards_name_the_element() {
        let circ = OrbitalElements::new(7078.137, 5e-5, 0.9, 0.0, 0.0, 0.0).unwrap();
        match control_matrix(&circ, &C) {
            Err(Error::Singular { element, .. }) => assert_eq!(element, "eccentricity"),
            other => panic!("expected singular error, got {other:?}"),
        }
        let flat = OrbitalElements::new(7078.137, 0.01, 1e-4, 0.0, 0.0, 0.0).unwrap();
        match control_matrix(&flat, &C) {
            Err(Error::Singular { element, .. }) => assert_eq!(element, "inclination"),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn derivative_reduces_to_secular_rates() {
        let x = leo();
        let d = derivative(&x, &Vector3::zeros(), &Vector3::zeros(), &C).unwrap();
        assert_eq!(d, secular_rates(&x, &C));
    }

    #[test]
    fn derivative_is_linear_in_control() {
        let x = OrbitalElements::new(7078.137, 0.01, 0.9, 0.1, 0.7, 2.1).unwrap();
        let u1 = Vector3::new(1e-6, -2e-6, 3e-6);
        let u2 = Vector3::new(-4e-7, 5e-7, 9e-7);
        let zero = Vector3::zeros();
        let d12 = derivative(&x, &(u1 + u2), &zero, &C).unwrap();
        let d1 = derivative(&x, &u1, &zero, &C).unwrap();
        let b = control_matrix(&x, &C).unwrap();
        assert_relative_eq!(d12 - d1, b * u2, epsilon = 1e-18);
    }
}
