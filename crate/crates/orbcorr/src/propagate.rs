//! Fixed-step RK4 propagation of the element-space dynamics with
//! instantaneous impulsive burns.

use crate::constants::PhysicalConstants;
use crate::disturbance::{disturbance_acceleration, DisturbanceConfig};
use crate::dynamics::derivative;
use crate::elements::{wrap_two_pi, CartesianState, OrbitalElements};
use crate::error::{Error, Result};
use crate::lvlh::{lvlh_to_eci, LvlhImpulse};
use nalgebra::{Rotation3, Vector3, Vector6};

/// One propagation sample.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub epoch: f64,
    pub elements: OrbitalElements,
    pub cartesian: CartesianState,
}

/// Time-ordered propagation output. Burn epochs appear twice: once with the
/// pre-burn state and once with the post-burn state.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn final_elements(&self) -> Option<OrbitalElements> {
        self.samples.last().map(|s| s.elements)
    }

    pub fn final_epoch(&self) -> Option<f64> {
        self.samples.last().map(|s| s.epoch)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn extend(&mut self, other: Trajectory) {
        self.samples.extend(other.samples);
    }
}

fn raw_from_elements(x: &OrbitalElements) -> Vector6<f64> {
    Vector6::new(x.a, x.e, x.i, x.raan, x.argp, x.u)
}

/// Rebuild validated elements from the raw integration vector. Angles are
/// left to grow unbounded during integration and wrapped here.
fn elements_from_raw(v: &Vector6<f64>, epoch: f64) -> Result<OrbitalElements> {
    OrbitalElements::new(v[0], v[1], v[2], v[3], v[4], v[5]).map_err(|e| Error::Propagation {
        epoch,
        reason: e.to_string(),
    })
}

fn rk4_rhs(
    v: &Vector6<f64>,
    t: f64,
    cfg: &DisturbanceConfig,
    seed: u64,
    c: &PhysicalConstants,
) -> Result<Vector6<f64>> {
    let x = elements_from_raw(v, t)?;
    let d = if cfg.is_zero() {
        Vector3::zeros()
    } else {
        let s = x.to_cartesian(t, c);
        disturbance_acceleration(&s, t, cfg, seed, c)
    };
    derivative(&x, &Vector3::zeros(), &d, c).map_err(|e| Error::Propagation {
        epoch: t,
        reason: e.to_string(),
    })
}

/// Apply an impulsive burn: rotate the LVLH delta-v by the pointing error,
/// add it to the inertial velocity and convert back to elements.
pub fn apply_impulse(
    x: &OrbitalElements,
    imp: &LvlhImpulse,
    pointing_error: &Rotation3<f64>,
    c: &PhysicalConstants,
) -> Result<OrbitalElements> {
    if imp.dv == Vector3::zeros() {
        return Ok(*x);
    }
    let mut s = x.to_cartesian(imp.epoch, c);
    let dv_lvlh = pointing_error * imp.dv;
    let dv_eci = lvlh_to_eci(&s) * dv_lvlh;
    s.velocity += dv_eci;
    s.to_elements(c)
}

/// Propagate `x0` over `[0, t_span]` with fixed-step RK4, applying each burn
/// instantaneously at its epoch (no pointing error; callers model execution
/// errors by perturbing the burn vectors beforehand).
///
/// Burn epochs must be sorted, within `[0, t_span]`. Between events the
/// step is `t_seg / ceil(t_seg / dt)`, so halving `dt` halves every actual
/// step. The result is a pure function of the arguments.
pub fn propagate(
    x0: &OrbitalElements,
    burns: &[LvlhImpulse],
    cfg: &DisturbanceConfig,
    t_span: f64,
    dt: f64,
    seed: u64,
    c: &PhysicalConstants,
) -> Result<Trajectory> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(Error::Domain(format!("step size {dt} must be > 0")));
    }
    if t_span < 0.0 {
        return Err(Error::Domain(format!("time span {t_span} must be >= 0")));
    }
    x0.validate()?;
    for w in burns.windows(2) {
        if w[1].epoch < w[0].epoch {
            return Err(Error::Domain("burn epochs must be sorted".into()));
        }
    }
    if let Some(b) = burns
        .iter()
        .find(|b| b.epoch < 0.0 || b.epoch > t_span)
    {
        return Err(Error::Domain(format!(
            "burn epoch {} outside [0, {t_span}]",
            b.epoch
        )));
    }

    let mut traj = Trajectory::default();
    let mut state = raw_from_elements(x0);
    let mut t = 0.0;
    traj.samples.push(sample_at(&state, t, c)?);

    // Event boundaries: every burn epoch plus the final time.
    let mut events: Vec<(f64, Option<&LvlhImpulse>)> =
        burns.iter().map(|b| (b.epoch, Some(b))).collect();
    events.push((t_span, None));

    for (t_event, burn) in events {
        let seg = t_event - t;
        if seg > 1e-12 {
            let steps = (seg / dt).ceil().max(1.0) as usize;
            let h = seg / steps as f64;
            for k in 0..steps {
                let t_k = t + k as f64 * h;
                state = rk4_step(&state, t_k, h, cfg, seed, c)?;
                traj.samples.push(sample_at(&state, t_k + h, c)?);
            }
            t = t_event;
        }
        if let Some(b) = burn {
            let x = elements_from_raw(&state, t)?;
            let x_post = apply_impulse(&x, b, &Rotation3::identity(), c)
                .map_err(|e| Error::Propagation {
                    epoch: t,
                    reason: e.to_string(),
                })?;
            // Keep the unwrapped angle branch continuous across the burn.
            let mut post = raw_from_elements(&x_post);
            for k in 3..6 {
                let delta = wrap_two_pi(post[k]) - wrap_two_pi(state[k]);
                let delta = crate::elements::wrap_pi(delta);
                post[k] = state[k] + delta;
            }
            state = post;
            traj.samples.push(sample_at(&state, t, c)?);
        }
    }

    Ok(traj)
}

fn sample_at(v: &Vector6<f64>, t: f64, c: &PhysicalConstants) -> Result<TrajectorySample> {
    let elements = elements_from_raw(v, t)?;
    Ok(TrajectorySample {
        epoch: t,
        elements,
        cartesian: elements.to_cartesian(t, c),
    })
}

fn rk4_step(
    y: &Vector6<f64>,
    t: f64,
    h: f64,
    cfg: &DisturbanceConfig,
    seed: u64,
    c: &PhysicalConstants,
) -> Result<Vector6<f64>> {
    let k1 = rk4_rhs(y, t, cfg, seed, c)?;
    let k2 = rk4_rhs(&(y + k1 * (h / 2.0)), t + h / 2.0, cfg, seed, c)?;
    let k3 = rk4_rhs(&(y + k2 * (h / 2.0)), t + h / 2.0, cfg, seed, c)?;
    let k4 = rk4_rhs(&(y + k3 * h), t + h, cfg, seed, c)?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}
