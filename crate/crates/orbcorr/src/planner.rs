//! High-level maneuver planning: a four-burn sequence that parks the
//! spacecraft on a transfer orbit whose semi-major axis and inclination are
//! chosen so natural J2 drift absorbs the node and phase errors over the
//! maneuver window, then returns to the target shape.
//!
//! Burn order: raise (or lower) to the transfer sma at t = 0 as a Hohmann
//! pair, rotate to the transfer inclination at the next nodal crossing,
//! coast while J2 works, return to the final sma when the phase condition
//! is met, and finish with a plane change to the final inclination at the
//! last node before `tau`. The target orbit is treated as a naturally
//! precessing virtual spacecraft, so the plan converges on its state at
//! t = tau rather than on frozen elements.

use crate::constants::{PhysicalConstants, I_MIN, MIN_ALTITUDE_KM};
use crate::dynamics::j2_mean_rates;
use crate::elements::{mean_motion, wrap_pi, wrap_two_pi, OrbitalElements};
use crate::error::{Error, Result};
use crate::lvlh::LvlhImpulse;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Transfer-orbit design parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferDesign {
    /// Transfer inclination (rad).
    pub i_t: f64,
    /// Transfer semi-major axis (km).
    pub a_t: f64,
    /// Whole revolutions spent on the transfer orbit.
    pub k: u32,
    /// Total maneuver window (s).
    pub tau: f64,
    /// Predicted J2-induced argument-of-latitude drift difference between
    /// the final and transfer orbits over the window (rad).
    pub delta_u_j2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BurnLabel {
    RaiseToTransfer,
    InclineToTransfer,
    RaiseToFinal,
    InclineToFinal,
}

impl std::fmt::Display for BurnLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BurnLabel::RaiseToTransfer => "raise-to-transfer",
            BurnLabel::InclineToTransfer => "incline-to-transfer",
            BurnLabel::RaiseToFinal => "raise-to-final",
            BurnLabel::InclineToFinal => "incline-to-final",
        };
        f.write_str(s)
    }
}

/// One labeled burn group. Semi-major-axis groups hold a Hohmann impulse
/// pair; inclination groups hold a single impulse; a group whose element is
/// already satisfied is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurnGroup {
    pub label: BurnLabel,
    pub impulses: Vec<LvlhImpulse>,
}

impl BurnGroup {
    pub fn dv(&self) -> f64 {
        self.impulses.iter().map(|b| b.magnitude()).sum()
    }
}

/// Expected elements right after a burn group completes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub epoch: f64,
    pub elements: OrbitalElements,
}

/// Complete maneuver plan: four ordered burn groups, the post-group
/// waypoints and the total delta-v budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManeuverPlan {
    pub groups: Vec<BurnGroup>,
    pub waypoints: Vec<Waypoint>,
    /// Sum of the magnitudes of every impulse (km/s).
    pub total_dv: f64,
    pub design: TransferDesign,
}

impl ManeuverPlan {
    /// All impulses in execution order with their group label.
    pub fn burns(&self) -> Vec<(BurnLabel, LvlhImpulse)> {
        let mut v: Vec<(BurnLabel, LvlhImpulse)> = self
            .groups
            .iter()
            .flat_map(|g| g.impulses.iter().map(move |b| (g.label, *b)))
            .collect();
        v.sort_by(|x, y| x.1.epoch.total_cmp(&y.1.epoch));
        v
    }

    /// Impulses without labels, for the propagator.
    pub fn impulses(&self) -> Vec<LvlhImpulse> {
        self.burns().into_iter().map(|(_, b)| b).collect()
    }

    /// The waypoint a burn at `epoch` steers toward: the first waypoint
    /// strictly after the burn (falling back to the arrival waypoint).
    pub fn waypoint_after(&self, epoch: f64) -> Waypoint {
        self.waypoints
            .iter()
            .find(|w| w.epoch > epoch + 1e-9)
            .copied()
            .unwrap_or_else(|| *self.waypoints.last().expect("plan has waypoints"))
    }
}

/// Nodal rate the transfer orbit must hold so the node gap closes over
/// `tau` while the target plane keeps drifting at `raan_dot_base`:
/// `raan_dot_base + wrap(raan_f - raan_0) / tau`.
pub fn required_nodal_rate(raan_0: f64, raan_f: f64, raan_dot_base: f64, tau: f64) -> f64 {
    raan_dot_base + wrap_pi(raan_f - raan_0) / tau
}

/// Invert the J2 nodal-rate expression for inclination on the transfer
/// orbit: `i_t = arccos(-rate * 2 p_t^2 / (3 Re^2 J2 n_t))`.
///
/// Fails when the magnitude of the requested rate exceeds what the orbit
/// geometry can deliver; the error reports the achievable maximum.
pub fn transfer_inclination(
    target_rate: f64,
    a_t: f64,
    e_t: f64,
    c: &PhysicalConstants,
) -> Result<f64> {
    let n_t = mean_motion(a_t, c)?;
    let p_t = a_t * (1.0 - e_t * e_t);
    let k = 3.0 * c.re * c.re * c.j2 * n_t / (2.0 * p_t * p_t);
    let cos_i = -target_rate / k;
    if cos_i.abs() > 1.0 {
        return Err(Error::Infeasible(format!(
            "required nodal rate {target_rate:.6e} rad/s exceeds the achievable \
             maximum {k:.6e} rad/s at a = {a_t:.1} km"
        )));
    }
    Ok(cos_i.acos())
}

/// First-order J2 drift of the argument of latitude accumulated over `tau`
/// from the semi-major-axis and inclination offsets between the final and
/// transfer orbits.
pub fn delta_u_j2(
    a_t: f64,
    i_t: f64,
    x_f: &OrbitalElements,
    tau: f64,
    c: &PhysicalConstants,
) -> f64 {
    let a_f = x_f.a;
    let i_f = x_f.i;
    let n_f = (c.mu / (a_f * a_f * a_f)).sqrt();
    let sin_if = i_f.sin();

    let sma_term = -(3.0 * c.re * c.re * c.j2 / a_f.powi(3))
        * (sin_if * sin_if - 1.0)
        * (3.0 * c.mu / (4.0 * a_f.powi(3) * n_f) + n_f)
        * (a_f - a_t)
        * tau;
    let inc_term = -(3.0 * c.re * c.re * n_f * c.j2 / (2.0 * a_f * a_f))
        * (2.0 * i_f).sin()
        * (i_f - i_t)
        * tau;
    sma_term + inc_term
}

/// Transfer semi-major axis that makes the argument of latitude reach its
/// target after `k` whole transfer revolutions:
/// `a_f (1 + (wrap(u_f - u_0) + delta_u) / (2 pi k))^(2/3)`.
pub fn transfer_sma(u_0: f64, u_f: f64, k: u32, a_f: f64, delta_u: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::Domain("revolution count k must be >= 1".into()));
    }
    let base = 1.0 + (wrap_pi(u_f - u_0) + delta_u) / (TAU * k as f64);
    if base <= 0.0 {
        return Err(Error::Infeasible(format!(
            "phase change too large for k = {k} transfer revolutions; increase k"
        )));
    }
    Ok(a_f * base.powf(2.0 / 3.0))
}

/// Tangential two-impulse Hohmann pair between near-circular orbits.
/// Impulse epochs are relative to the first burn (0 and the transfer
/// half-period); an empty list means no change is needed.
pub fn burn_dv_sma(
    a_from: f64,
    a_to: f64,
    at: &OrbitalElements,
    c: &PhysicalConstants,
) -> Result<Vec<LvlhImpulse>> {
    for (name, a) in [("source", a_from), ("target", a_to)] {
        if a <= c.re + MIN_ALTITUDE_KM {
            return Err(Error::Infeasible(format!(
                "{name} semi-major axis {a:.1} km is below the {MIN_ALTITUDE_KM:.0} km altitude floor"
            )));
        }
    }
    if at.e > 0.05 {
        return Err(Error::UnsupportedRegime(format!(
            "eccentricity {} above the 0.05 near-circular limit",
            at.e
        )));
    }
    if (a_to - a_from).abs() < 1e-9 {
        return Ok(Vec::new());
    }

    let a_h = 0.5 * (a_from + a_to);
    let v1 = (c.mu / a_from).sqrt();
    let v2 = (c.mu / a_to).sqrt();
    let vt1 = (c.mu * (2.0 / a_from - 1.0 / a_h)).sqrt();
    let vt2 = (c.mu * (2.0 / a_to - 1.0 / a_h)).sqrt();
    let half_period = PI / mean_motion(a_h, c)?;

    Ok(vec![
        LvlhImpulse::new(Vector3::new(0.0, vt1 - v1, 0.0), 0.0),
        LvlhImpulse::new(Vector3::new(0.0, v2 - vt2, 0.0), half_period),
    ])
}

/// Plane-change impulse at the next nodal crossing of the orbit `at`.
///
/// The delta-v is the exact velocity rotation: magnitude
/// `2 v sin(|di|/2)`, mostly cross-track with a small retrograde
/// along-track component, leaving the semi-major axis untouched. The epoch
/// is relative to the state `at`; the rotation sign flips at the
/// descending node.
pub fn burn_dv_inc(
    i_from: f64,
    i_to: f64,
    at: &OrbitalElements,
    c: &PhysicalConstants,
) -> Result<LvlhImpulse> {
    let di = i_to - i_from;
    let n = mean_motion(at.a, c)?;
    let (_, _, j2u) = j2_mean_rates(at.a, at.e, i_from, c);
    let u_rate = n + j2u;

    // Next u = 0 or pi crossing; a state within roundoff of a node burns
    // immediately (the descending node flips the rotation sign).
    let m = at.u.rem_euclid(PI);
    let du_to_node = if m < 1e-9 || PI - m < 1e-9 { 0.0 } else { PI - m };
    let epoch = du_to_node / u_rate;
    let ascending = wrap_two_pi(at.u + du_to_node).cos() > 0.0;

    if di.abs() < 1e-12 {
        return Ok(LvlhImpulse::new(Vector3::zeros(), epoch));
    }

    let beta = if ascending { di } else { -di };
    let v = (c.mu / at.a).sqrt();
    Ok(LvlhImpulse::new(
        Vector3::new(0.0, v * (beta.cos() - 1.0), v * beta.sin()),
        epoch,
    ))
}

/// Half-width of the transfer-sma search interval around the final orbit.
const SMA_SCAN_SPAN: f64 = 150.0;

/// Phase-native transfer sma: fixed point of the revolution-count relation,
/// with the J2 u-rate difference folded back in each round.
fn eq6_fixed_point(
    x_0: &OrbitalElements,
    x_f: &OrbitalElements,
    omega_req: f64,
    e_t: f64,
    j2u_f: f64,
    tau: f64,
    c: &PhysicalConstants,
) -> Result<f64> {
    let mut a_t = x_f.a;
    for _ in 0..64 {
        let n_t = mean_motion(a_t, c)?;
        let k = ((tau * n_t / TAU).round() as u32).max(1);
        let i_t = transfer_inclination(omega_req, a_t, e_t, c)?;
        let (_, _, j2u_t) = j2_mean_rates(a_t, e_t, i_t, c);
        let delta_u = (j2u_f - j2u_t) * tau;
        // The drift must shed the negated phase gap, so the relation is
        // evaluated with swapped endpoints and negated J2 correction.
        let a_new = transfer_sma(x_f.u, x_0.u, k, x_f.a, -delta_u)?;
        let step = a_new - a_t;
        a_t = a_new;
        if step.abs() < 1e-3 {
            break;
        }
    }
    Ok(a_t)
}

/// Fuel cost of one member of the nodal-rate family, or `None` when the
/// member is geometrically or phase-infeasible. The nodal-rate requirement
/// is re-solved per member because the phase condition decides how long the
/// sma offset actually boosts the node drift.
#[allow(clippy::too_many_arguments)]
fn candidate_cost(
    x_0: &OrbitalElements,
    x_f: &OrbitalElements,
    a_t: f64,
    omega_init: f64,
    raan_target_tau: f64,
    e_t: f64,
    tau: f64,
    u_target_tau: f64,
    c: &PhysicalConstants,
) -> Option<(f64, f64)> {
    if a_t <= c.re + MIN_ALTITUDE_KM {
        return None;
    }
    let mut omega_req = omega_init;
    let mut i_t = x_f.i;
    let mut feasible = false;
    for _ in 0..8 {
        i_t = transfer_inclination(omega_req, a_t, e_t, c).ok()?;
        if !(I_MIN..=PI - I_MIN).contains(&i_t) {
            return None;
        }
        let (tl, u_miss) =
            build_timeline(x_0, x_f, a_t, i_t, e_t, tau, u_target_tau, c).ok()?;
        if u_miss.abs() > 2e-3 {
            return None;
        }
        let raan_miss = raan_target_tau - tl.raan_tau;
        if raan_miss.abs() < 1e-9 {
            feasible = true;
            break;
        }
        omega_req += raan_miss / (tl.t5 - tl.t2).max(1.0);
    }
    if !feasible {
        return None;
    }
    let hohmann = |a1: f64, a2: f64| -> f64 {
        if (a2 - a1).abs() < 1e-9 {
            return 0.0;
        }
        let a_h = 0.5 * (a1 + a2);
        let dv1 = ((c.mu * (2.0 / a1 - 1.0 / a_h)).sqrt() - (c.mu / a1).sqrt()).abs();
        let dv2 = ((c.mu / a2).sqrt() - (c.mu * (2.0 / a2 - 1.0 / a_h)).sqrt()).abs();
        dv1 + dv2
    };
    let plane = |a: f64, di: f64| 2.0 * (c.mu / a).sqrt() * (di.abs() / 2.0).sin();
    let cost = hohmann(x_0.a, a_t)
        + plane(a_t, i_t - x_0.i)
        + hohmann(a_t, x_f.a)
        + plane(x_f.a, x_f.i - i_t);
    Some((cost, omega_req))
}

/// Mean (node rate, u rate) pair for timing a coast leg.
fn leg_rates(a: f64, e: f64, i: f64, c: &PhysicalConstants) -> (f64, f64) {
    let n = (c.mu / (a * a * a)).sqrt();
    let (raan_dot, _, j2u) = j2_mean_rates(a, e, i, c);
    (raan_dot, n + j2u)
}

/// Burn epochs plus the node/phase history predicted with per-leg mean
/// rates.
struct Timeline {
    t_h1: f64,
    t2: f64,
    t3: f64,
    t4: f64,
    t5: f64,
    u_t2: f64,
    u_t4: f64,
    u_t5: f64,
    raan_t2: f64,
    raan_t4: f64,
    raan_t5: f64,
    raan_tau: f64,
}

/// Design the four-burn sequence from `x_0` to the precessing target `x_f`
/// over the window `tau`.
pub fn plan_sequence(
    x_0: &OrbitalElements,
    x_f: &OrbitalElements,
    tau: f64,
    c: &PhysicalConstants,
) -> Result<ManeuverPlan> {
    x_0.validate()?;
    x_f.validate()?;
    if x_0.e > 0.05 || x_f.e > 0.05 {
        return Err(Error::UnsupportedRegime(
            "planner requires near-circular endpoints (e <= 0.05)".into(),
        ));
    }
    if x_0.i < I_MIN || x_0.i > PI - I_MIN || x_f.i < I_MIN || x_f.i > PI - I_MIN {
        return Err(Error::Infeasible(
            "endpoint inclination too close to the equatorial singularity".into(),
        ));
    }
    let n_0 = mean_motion(x_0.a, c)?;
    if tau < 2.0 * TAU / n_0 {
        return Err(Error::Infeasible(format!(
            "window tau = {tau:.0} s spans fewer than 2 revolutions"
        )));
    }

    let e_t = x_0.e;
    let a_f = x_f.a;
    let n_f = mean_motion(a_f, c)?;
    let (raan_dot_f, _, j2u_f) = j2_mean_rates(a_f, x_f.e, x_f.i, c);
    let u_dot_f = n_f + j2u_f;

    // Target state at the end of the window (angles kept unwrapped,
    // anchored at the initial orbit for shortest-arc differences).
    let raan_target_tau = x_0.raan + wrap_pi(x_f.raan - x_0.raan) + raan_dot_f * tau;
    let u_target_tau = x_0.u + wrap_pi(x_f.u - x_0.u) + u_dot_f * tau;

    let omega_req = required_nodal_rate(x_0.raan, x_f.raan, raan_dot_f, tau);

    // Any (a_t, i_t) pair on the nodal-rate curve closes the node gap; the
    // members differ enormously in fuel because inclination changes cost
    // far more than sma changes. Scan the family for the cheapest member
    // whose phase condition is reachable inside the window, seeded with
    // the revolution-count fixed point (the phase-native design).
    let omega_init = omega_req;
    let eq6_seed = eq6_fixed_point(x_0, x_f, omega_req, e_t, j2u_f, tau, c).unwrap_or(a_f);
    let mut best: Option<(f64, f64, f64)> = None; // (cost, a_t, omega_req)
    let mut consider = |a: f64, best: &mut Option<(f64, f64, f64)>| {
        if let Some((cost, omega)) =
            candidate_cost(x_0, x_f, a, omega_init, raan_target_tau, e_t, tau, u_target_tau, c)
        {
            if best.map_or(true, |(b, _, _)| cost < b) {
                *best = Some((cost, a, omega));
            }
        }
    };
    consider(eq6_seed, &mut best);
    let a_lo = (a_f - SMA_SCAN_SPAN).max(c.re + MIN_ALTITUDE_KM + 25.0);
    let a_hi = a_f + SMA_SCAN_SPAN;
    let coarse = 2.0;
    let mut a = a_lo;
    while a <= a_hi {
        consider(a, &mut best);
        a += coarse;
    }
    if let Some((_, center, _)) = best {
        let mut a = center - coarse;
        while a <= center + coarse {
            consider(a, &mut best);
            a += 0.05;
        }
    }
    let Some((_, mut a_t, mut omega_req)) = best else {
        return Err(Error::Infeasible(format!(
            "no transfer orbit closes the node gap of {:.4} deg and the phase gap \
             of {:.3} deg within tau = {tau:.0} s",
            wrap_pi(x_f.raan - x_0.raan).to_degrees(),
            wrap_pi(x_f.u - x_0.u).to_degrees()
        )));
    };

    // Polish: tune the nodal-rate requirement against the span the
    // transfer inclination is actually held, and nudge the sma when the
    // phase solve had to clamp the return-burn epoch.
    let mut i_t = x_f.i;
    let mut timeline: Option<Timeline> = None;
    let mut u_miss = f64::INFINITY;
    let mut raan_miss = f64::INFINITY;
    for _ in 0..24 {
        i_t = transfer_inclination(omega_req, a_t, e_t, c)?;
        if !(I_MIN..=PI - I_MIN).contains(&i_t) {
            return Err(Error::Infeasible(format!(
                "transfer inclination {:.3} deg outside the supported range",
                i_t.to_degrees()
            )));
        }
        let (tl, miss) = build_timeline(x_0, x_f, a_t, i_t, e_t, tau, u_target_tau, c)?;
        raan_miss = raan_target_tau - tl.raan_tau;
        u_miss = miss;
        let hold = (tl.t5 - tl.t2).max(1.0);
        let coast = (tl.t3 - tl.t2).max(1.0);
        timeline = Some(tl);
        if raan_miss.abs() < 1e-10 && u_miss.abs() < 1e-8 {
            break;
        }
        omega_req += raan_miss / hold;
        let n_t = mean_motion(a_t, c)?;
        a_t -= u_miss * a_t / (1.5 * n_t * coast);
    }

    if raan_miss.abs() > 2e-4 {
        return Err(Error::Infeasible(format!(
            "node gap of {:.4} deg cannot close within tau",
            wrap_pi(x_f.raan - x_0.raan).to_degrees()
        )));
    }
    if u_miss.abs() > 2e-3 {
        return Err(Error::Infeasible(format!(
            "argument-of-latitude gap of {:.3} deg cannot close within tau \
             (residual {:.4} deg)",
            wrap_pi(x_f.u - x_0.u).to_degrees(),
            u_miss.to_degrees()
        )));
    }

    let n_t = mean_motion(a_t, c)?;
    let k = ((tau * n_t / TAU).round() as u32).max(1);
    let (_, _, j2u_t) = j2_mean_rates(a_t, e_t, i_t, c);
    let delta_u = (j2u_f - j2u_t) * tau;
    let tl = timeline.expect("at least one polish iteration runs");

    // Assemble the four burn groups and their waypoints.
    let mut groups = Vec::with_capacity(4);
    let mut waypoints = Vec::with_capacity(4);

    groups.push(BurnGroup {
        label: BurnLabel::RaiseToTransfer,
        impulses: burn_dv_sma(x_0.a, a_t, x_0, c)?,
    });
    let raan_h1 = x_0.raan + leg_rates(0.5 * (x_0.a + a_t), e_t, x_0.i, c).0 * tl.t_h1;
    let u_h1 = x_0.u + if tl.t_h1 > 0.0 { PI } else { 0.0 };
    waypoints.push(Waypoint {
        epoch: tl.t_h1,
        elements: OrbitalElements::new(a_t, e_t, x_0.i, raan_h1, x_0.argp, u_h1)?,
    });

    let state_t2 = OrbitalElements::new(a_t, e_t, x_0.i, tl.raan_t2, x_0.argp, tl.u_t2)?;
    let inc1 = burn_dv_inc(x_0.i, i_t, &state_t2, c)?;
    groups.push(BurnGroup {
        label: BurnLabel::InclineToTransfer,
        impulses: if inc1.dv == Vector3::zeros() {
            Vec::new()
        } else {
            vec![LvlhImpulse::new(inc1.dv, tl.t2)]
        },
    });
    waypoints.push(Waypoint {
        epoch: tl.t2,
        elements: OrbitalElements::new(a_t, e_t, i_t, tl.raan_t2, x_0.argp, tl.u_t2)?,
    });

    let g3 = burn_dv_sma(a_t, a_f, &OrbitalElements { a: a_t, ..*x_0 }, c)?
        .into_iter()
        .map(|b| LvlhImpulse::new(b.dv, tl.t3 + b.epoch))
        .collect();
    groups.push(BurnGroup {
        label: BurnLabel::RaiseToFinal,
        impulses: g3,
    });
    waypoints.push(Waypoint {
        epoch: tl.t4,
        elements: OrbitalElements::new(a_f, x_f.e, i_t, tl.raan_t4, x_f.argp, tl.u_t4)?,
    });

    let state_t5 = OrbitalElements::new(a_f, x_f.e, i_t, tl.raan_t5, x_f.argp, tl.u_t5)?;
    let inc2 = burn_dv_inc(i_t, x_f.i, &state_t5, c)?;
    groups.push(BurnGroup {
        label: BurnLabel::InclineToFinal,
        impulses: if inc2.dv == Vector3::zeros() {
            Vec::new()
        } else {
            vec![LvlhImpulse::new(inc2.dv, tl.t5)]
        },
    });
    waypoints.push(Waypoint {
        epoch: tau,
        elements: OrbitalElements::new(
            a_f,
            x_f.e,
            x_f.i,
            raan_target_tau,
            x_f.argp,
            u_target_tau,
        )?,
    });

    let total_dv = groups.iter().map(BurnGroup::dv).sum();
    let plan = ManeuverPlan {
        groups,
        waypoints,
        total_dv,
        design: TransferDesign {
            i_t,
            a_t,
            k,
            tau,
            delta_u_j2: delta_u,
        },
    };

    // Epoch sanity: strictly increasing and inside the window.
    let burns = plan.burns();
    for w in burns.windows(2) {
        if w[1].1.epoch <= w[0].1.epoch {
            return Err(Error::Infeasible(format!(
                "burn epochs not strictly increasing: {:.3} then {:.3} s",
                w[0].1.epoch, w[1].1.epoch
            )));
        }
    }
    if burns
        .iter()
        .any(|(_, b)| b.epoch < 0.0 || b.epoch > tau)
    {
        return Err(Error::Infeasible(
            "burn epochs escaped the maneuver window".into(),
        ));
    }

    Ok(plan)
}

/// Solve the burn epochs for a candidate `(a_t, i_t)` design and predict
/// the node and phase at `tau` with per-leg mean rates. Returns the
/// timeline plus the residual phase miss at `tau` (zero when the return
/// burn epoch lands strictly inside its window, nonzero when it clamps).
#[allow(clippy::too_many_arguments)]
fn build_timeline(
    x_0: &OrbitalElements,
    x_f: &OrbitalElements,
    a_t: f64,
    i_t: f64,
    e_t: f64,
    tau: f64,
    u_target_tau: f64,
    c: &PhysicalConstants,
) -> Result<(Timeline, f64)> {
    let a_f = x_f.a;

    // Leg A: first Hohmann pair; the in-plane angle advances exactly pi
    // over the half ellipse.
    let t_h1 = if (a_t - x_0.a).abs() > 1e-9 {
        PI / mean_motion(0.5 * (x_0.a + a_t), c)?
    } else {
        0.0
    };
    let (raan_rate_a, _) = leg_rates(0.5 * (x_0.a + a_t), e_t, x_0.i, c);
    let u_h1 = x_0.u + if t_h1 > 0.0 { PI } else { 0.0 };
    let raan_h1 = x_0.raan + raan_rate_a * t_h1;

    // Leg B: coast on (a_t, i_0) to the next nodal crossing.
    let (raan_rate_b, u_rate_b) = leg_rates(a_t, e_t, x_0.i, c);
    let du_node = PI - u_h1.rem_euclid(PI);
    let t2 = t_h1 + du_node / u_rate_b;
    let u_t2 = u_h1 + du_node;
    let raan_t2 = raan_h1 + raan_rate_b * (t2 - t_h1);

    // Rates for the phase solve.
    let (raan_rate_c, u_rate_c) = leg_rates(a_t, e_t, i_t, c);
    let a_h2 = 0.5 * (a_t + a_f);
    let t_h2 = if (a_f - a_t).abs() > 1e-9 {
        PI / mean_motion(a_h2, c)?
    } else {
        0.0
    };
    let (raan_rate_d, _) = leg_rates(a_h2, e_t, i_t, c);
    let (raan_rate_e, u_rate_e) = leg_rates(a_f, x_f.e, i_t, c);
    let (raan_rate_f, u_rate_f) = leg_rates(a_f, x_f.e, x_f.i, c);
    let u_h2 = if t_h2 > 0.0 { PI } else { 0.0 };

    // Keep room after the return Hohmann for a nodal crossing before tau.
    let node_margin = PI / u_rate_e;
    let t3_max = tau - t_h2 - node_margin;
    let t3_min = t2 + 1.0;
    if t3_max <= t3_min {
        return Err(Error::Infeasible(format!(
            "window tau = {tau:.0} s leaves no room for the return burns"
        )));
    }

    // Phase at tau is linear in t3: the longer the spacecraft stays on the
    // transfer orbit, the more phase it sheds relative to the target. When
    // the exact epoch falls outside the window it clamps to the boundary
    // and the residual is fed back to the design loop.
    // Two passes: the second re-solves with the final plane-change epoch
    // found by the first.
    let mut t3 = t3_max;
    let mut t5 = t3_max + t_h2 + 0.5 * node_margin;
    let mut u_miss = 0.0;
    let phase_tail = |t3v: f64, t5v: Option<f64>| -> f64 {
        let u4 = u_t2 + u_rate_c * (t3v - t2) + u_h2;
        match t5v {
            None => u4 + u_rate_e * (tau - t3v - t_h2),
            Some(t5v) => u4 + u_rate_e * (t5v - t3v - t_h2) + u_rate_f * (tau - t5v),
        }
    };
    for pass in 0..2 {
        let t5v = if pass == 0 { None } else { Some(t5) };
        let slope = u_rate_c - u_rate_e;
        let miss_at_max = wrap_pi(u_target_tau - phase_tail(t3_max, t5v));
        if slope.abs() < 1e-16 {
            t3 = t3_max;
        } else {
            let mut cand = t3_max + miss_at_max / slope;
            // Other solutions differ by whole phase wraps; step toward the
            // window when one fits, otherwise clamp.
            let wrap_step = (TAU / slope).abs();
            if cand > t3_max && cand - wrap_step >= t3_min {
                cand -= ((cand - t3_max) / wrap_step).ceil() * wrap_step;
            } else if cand < t3_min && cand + wrap_step <= t3_max {
                cand += ((t3_min - cand) / wrap_step).ceil() * wrap_step;
            }
            t3 = cand.clamp(t3_min, t3_max);
        }

        // Final plane change at the last nodal crossing before tau.
        let t4 = t3 + t_h2;
        let u4 = u_t2 + u_rate_c * (t3 - t2) + u_h2;
        let du_first = PI - u4.rem_euclid(PI);
        let t_first = t4 + du_first / u_rate_e;
        if t_first > tau {
            return Err(Error::Infeasible(
                "no nodal crossing for the final plane change before tau".into(),
            ));
        }
        let extra = ((tau - t_first) * u_rate_e / PI).floor();
        t5 = t_first + extra * PI / u_rate_e;
        u_miss = wrap_pi(u_target_tau - phase_tail(t3, Some(t5)));
    }

    let t4 = t3 + t_h2;
    let u_t4 = u_t2 + u_rate_c * (t3 - t2) + u_h2;
    let raan_t4 = raan_t2 + raan_rate_c * (t3 - t2) + raan_rate_d * t_h2;
    let u_t5 = u_t4 + u_rate_e * (t5 - t4);
    let raan_t5 = raan_t4 + raan_rate_e * (t5 - t4);
    let raan_tau = raan_t5 + raan_rate_f * (tau - t5);

    Ok((
        Timeline {
            t_h1,
            t2,
            t3,
            t4,
            t5,
            u_t2,
            u_t4,
            u_t5,
            raan_t2,
            raan_t4,
            raan_t5,
            raan_tau,
        },
        u_miss,
    ))
}
