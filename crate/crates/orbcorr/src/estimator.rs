//! Discrete Kalman filter over element deviations and thrust pointing
//! bias.
//!
//! State (8): six orbital-element deviations from a reference trajectory
//! `[da, de, di, draan, dargp, du]` followed by two pointing-bias angles
//! (rad) modelled as random walks. Element observations are GPS-like noisy
//! element fixes; pointing bias becomes observable through post-burn
//! residuals between the commanded impulse's predicted element change and
//! the observed one.

use crate::constants::PhysicalConstants;
use crate::dynamics::secular_rates;
use crate::elements::OrbitalElements;
use crate::error::{Error, Result};
use crate::lvlh::{transverse_axes, LvlhImpulse};
use nalgebra::{Matrix6x3, SMatrix, SVector, Vector6};

pub const STATE_DIM: usize = 8;

pub type StateVec = SVector<f64, STATE_DIM>;
pub type StateMat = SMatrix<f64, STATE_DIM, STATE_DIM>;

/// Filter mean and covariance at an epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    pub mean: StateVec,
    pub cov: StateMat,
    pub epoch: f64,
}

impl FilterState {
    pub fn new(mean: StateVec, cov: StateMat, epoch: f64) -> Result<Self> {
        let fs = Self { mean, cov, epoch };
        fs.validate()?;
        Ok(fs)
    }

    /// Symmetry and positive semidefiniteness (to 1e-10 relative), checked
    /// after every predict/update.
    pub fn validate(&self) -> Result<()> {
        if !self.mean.iter().all(|v| v.is_finite()) || !self.cov.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical("non-finite filter state".into()));
        }
        let scale = self.cov.trace().abs().max(1e-30);
        let asym = (self.cov - self.cov.transpose()).norm();
        if asym > 1e-9 * scale {
            return Err(Error::Numerical(format!(
                "covariance asymmetry {asym:.3e} exceeds tolerance"
            )));
        }
        let shifted = self.cov + StateMat::identity() * (1e-10 * scale);
        if shifted.cholesky().is_none() {
            return Err(Error::Numerical(
                "covariance lost positive semidefiniteness".into(),
            ));
        }
        Ok(())
    }

    /// Estimated pointing-bias angles (rad).
    pub fn bias(&self) -> (f64, f64) {
        (self.mean[6], self.mean[7])
    }

    /// 1-sigma combined bias uncertainty (rad).
    pub fn bias_sigma(&self) -> f64 {
        (self.cov[(6, 6)] + self.cov[(7, 7)]).max(0.0).sqrt()
    }
}

/// State-transition matrix `I + J dt`: the element block is the numerical
/// Jacobian of the secular rates around the reference elements, the bias
/// block is an identity random walk.
pub fn transition_matrix(x_ref: &OrbitalElements, dt: f64, c: &PhysicalConstants) -> StateMat {
    let mut f = StateMat::identity();
    let base = [x_ref.a, x_ref.e, x_ref.i, x_ref.raan, x_ref.argp, x_ref.u];
    for col in 0..6 {
        let h = (1e-7 * base[col].abs()).max(1e-9);
        let mut lo = base;
        let mut hi = base;
        lo[col] -= h;
        hi[col] += h;
        let mk = |v: [f64; 6]| OrbitalElements {
            a: v[0],
            e: v[1].max(0.0),
            i: v[2],
            raan: v[3],
            argp: v[4],
            u: v[5],
        };
        let r_hi: Vector6<f64> = secular_rates(&mk(hi), c);
        let r_lo: Vector6<f64> = secular_rates(&mk(lo), c);
        let dcol = (r_hi - r_lo) / (2.0 * h);
        for row in 0..6 {
            f[(row, col)] += dcol[row] * dt;
        }
    }
    f
}

/// Propagate the filter: `mean <- F mean`, `cov <- F cov F^T + Q`.
pub fn kf_predict(fs: &FilterState, f: &StateMat, q: &StateMat, dt: f64) -> Result<FilterState> {
    let mean = f * fs.mean;
    let cov = f * fs.cov * f.transpose() + q;
    FilterState::new(symmetrize(cov), fs.epoch + dt)
}

/// Joseph-form measurement update for an `M`-dimensional observation
/// `z = H x + v`, `v ~ N(0, R)`.
pub fn kf_update<const M: usize>(
    fs: &FilterState,
    z: &SVector<f64, M>,
    h: &SMatrix<f64, M, STATE_DIM>,
    r: &SMatrix<f64, M, M>,
) -> Result<FilterState> {
    let s = h * fs.cov * h.transpose() + r;
    let chol = s.cholesky().ok_or_else(|| {
        let diag_min = (0..M).map(|k| s[(k, k)]).fold(f64::INFINITY, f64::min);
        Error::Numerical(format!(
            "innovation covariance not positive definite (min diagonal {diag_min:.3e})"
        ))
    })?;
    // K = P H^T S^{-1} via the Cholesky solve of S K^T = H P.
    let kt = chol.solve(&(h * fs.cov));
    let k = kt.transpose();

    let innovation = z - h * fs.mean;
    let mean = fs.mean + k * innovation;
    let ikh = StateMat::identity() - k * h;
    let cov = ikh * fs.cov * ikh.transpose() + k * r * k.transpose();
    FilterState::new(symmetrize(cov), fs.epoch)
}

/// Fold a post-burn residual into the filter. The observed element change
/// minus the commanded impulse's prediction `B dv` is, to first order in
/// the two pointing-bias angles,
/// `b1 * B (e1 x dv) + b2 * B (e2 x dv)`, which makes the bias observable.
/// Burns too small to carry pointing information are skipped.
pub fn ingest_burn_residual(
    fs: &FilterState,
    commanded: &LvlhImpulse,
    observed_element_change: &Vector6<f64>,
    b: &Matrix6x3<f64>,
    r: &SMatrix<f64, 6, 6>,
) -> Result<FilterState> {
    let dv = commanded.dv;
    if dv.norm() < 1e-9 {
        return Ok(*fs);
    }
    let (e1, e2) = transverse_axes(&dv);
    let sens1: Vector6<f64> = b * e1.cross(&dv);
    let sens2: Vector6<f64> = b * e2.cross(&dv);

    let residual = observed_element_change - b * dv;
    let mut h = SMatrix::<f64, 6, STATE_DIM>::zeros();
    for row in 0..6 {
        h[(row, 6)] = sens1[row];
        h[(row, 7)] = sens2[row];
    }
    kf_update(fs, &residual, &h, r)
}

fn symmetrize(m: StateMat) -> StateMat {
    (m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::control_matrix;
    use crate::lvlh::pointing_rotation;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::Vector3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    const C: PhysicalConstants = PhysicalConstants::wgs84();

    fn reference() -> OrbitalElements {
        OrbitalElements::new(7078.137, 0.001, 51.6f64.to_radians(), 0.4, 0.1, 2.2).unwrap()
    }

    fn initial_state() -> FilterState {
        let mut cov = StateMat::zeros();
        for k in 0..6 {
            cov[(k, k)] = 1e-4;
        }
        cov[(6, 6)] = 0.1f64.powi(2);
        cov[(7, 7)] = 0.1f64.powi(2);
        FilterState::new(StateVec::zeros(), cov, 0.0).unwrap()
    }

    #[test]
    fn identity_predict_with_zero_noise_is_identity() {
        let fs = initial_state();
        let out = kf_predict(&fs, &StateMat::identity(), &StateMat::zeros(), 60.0).unwrap();
        assert_eq!(out.mean, fs.mean);
        assert_relative_eq!(out.cov, fs.cov, epsilon = 1e-15);
        assert_eq!(out.epoch, 60.0);
    }

    #[test]
    fn process_noise_grows_the_trace() {
        let fs = initial_state();
        let q = StateMat::identity() * 1e-8;
        let out = kf_predict(&fs, &StateMat::identity(), &q, 60.0).unwrap();
        assert!(out.cov.trace() > fs.cov.trace());
    }

    #[test]
    fn bias_mean_is_constant_under_predict() {
        let mut fs = initial_state();
        fs.mean[6] = 0.05;
        fs.mean[7] = -0.02;
        let f = transition_matrix(&reference(), 60.0, &C);
        let out = kf_predict(&fs, &f, &StateMat::zeros(), 60.0).unwrap();
        assert_eq!(out.mean[6], 0.05);
        assert_eq!(out.mean[7], -0.02);
    }

    #[test]
    fn huge_measurement_noise_changes_nothing() {
        let fs = initial_state();
        let z = SVector::<f64, 6>::repeat(1.0);
        let mut h = SMatrix::<f64, 6, 8>::zeros();
        for k in 0..6 {
            h[(k, k)] = 1.0;
        }
        let r = SMatrix::<f64, 6, 6>::identity() * 1e12;
        let out = kf_update(&fs, &z, &h, &r).unwrap();
        assert!((out.mean - fs.mean).norm() < 1e-6 * z.norm());
    }

    #[test]
    fn exact_measurement_pins_the_state() {
        let fs = initial_state();
        let mut z = SVector::<f64, 6>::zeros();
        z[0] = 3e-3;
        z[3] = -2e-3;
        let mut h = SMatrix::<f64, 6, 8>::zeros();
        for k in 0..6 {
            h[(k, k)] = 1.0;
        }
        let r = SMatrix::<f64, 6, 6>::identity() * 1e-12;
        let out = kf_update(&fs, &z, &h, &r).unwrap();
        for k in 0..6 {
            assert_abs_diff_eq!(out.mean[k], z[k], epsilon = 1e-6);
        }
    }

    #[test]
    fn joseph_form_keeps_covariance_psd() {
        let mut fs = initial_state();
        let f = transition_matrix(&reference(), 60.0, &C);
        let mut q = StateMat::zeros();
        for k in 0..6 {
            q[(k, k)] = 1e-10;
        }
        q[(6, 6)] = 1e-12;
        q[(7, 7)] = 1e-12;
        let mut h = SMatrix::<f64, 6, 8>::zeros();
        for k in 0..6 {
            h[(k, k)] = 1.0;
        }
        let r = SMatrix::<f64, 6, 6>::identity() * 1e-6;
        for step in 0..200 {
            fs = kf_predict(&fs, &f, &q, 60.0).unwrap();
            if step % 3 == 0 {
                let z = SVector::<f64, 6>::repeat(1e-3);
                // validate() runs inside and errors on any PSD loss.
                fs = kf_update(&fs, &z, &h, &r).unwrap();
            }
        }
    }

    #[test]
    fn singular_innovation_is_reported() {
        let mut fs = initial_state();
        fs.cov = StateMat::zeros();
        let z = SVector::<f64, 6>::zeros();
        let h = SMatrix::<f64, 6, 8>::zeros();
        let r = SMatrix::<f64, 6, 6>::zeros();
        assert!(matches!(
            kf_update(&fs, &z, &h, &r),
            Err(Error::Numerical(_))
        ));
    }

    /// Linear-Gaussian consistency: average NEES across 500 trials of 200
    /// steps must stay inside the 95% chi-square envelope, and the final
    /// estimation error must be unbiased.
    #[test]
    fn nees_within_chi_square_envelope() {
        let trials = 500;
        let steps = 200;
        let f = transition_matrix(&reference(), 60.0, &C);
        let mut q = StateMat::zeros();
        for k in 0..8 {
            q[(k, k)] = 1e-10;
        }
        let mut h = SMatrix::<f64, 6, 8>::zeros();
        for k in 0..6 {
            h[(k, k)] = 1.0;
        }
        let sigmas = [5e-2, 1e-5, 5e-5, 5e-5, 2e-4, 2e-4];
        let mut r = SMatrix::<f64, 6, 6>::zeros();
        for k in 0..6 {
            r[(k, k)] = sigmas[k] * sigmas[k];
        }
        let p0 = initial_state().cov;
        let chol_p0 = p0.cholesky().unwrap();

        let mut nees_sum = vec![0.0f64; steps];
        let mut err_sum = StateVec::zeros();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        let normal = StandardNormal;
        let mut draw =
            |rng: &mut ChaCha8Rng| <StandardNormal as Distribution<f64>>::sample(&normal, rng);

        for _ in 0..trials {
            let w0 = StateVec::from_fn(|_, _| draw(&mut rng));
            let mut truth = chol_p0.l() * w0;
            let mut fs = FilterState::new(StateVec::zeros(), p0, 0.0).unwrap();
            for s in 0..steps {
                let wn = StateVec::from_fn(|k, _| q[(k, k)].sqrt() * draw(&mut rng));
                truth = f * truth + wn;
                fs = kf_predict(&fs, &f, &q, 60.0).unwrap();
                let vn = SVector::<f64, 6>::from_fn(|k, _| sigmas[k] * draw(&mut rng));
                let z = h * truth + vn;
                fs = kf_update(&fs, &z, &h, &r).unwrap();

                let e = fs.mean - truth;
                let pinv_e = fs.cov.cholesky().unwrap().solve(&e);
                nees_sum[s] += e.dot(&pinv_e);
                if s == steps - 1 {
                    err_sum += e;
                }
            }
        }

        let dof = (STATE_DIM * trials) as f64;
        let chi = ChiSquared::new(dof).unwrap();
        let lo = chi.inverse_cdf(0.025) / trials as f64;
        let hi = chi.inverse_cdf(0.975) / trials as f64;
        let inside = nees_sum
            .iter()
            .filter(|&&s| {
                let avg = s / trials as f64;
                avg >= lo && avg <= hi
            })
            .count();
        assert!(
            inside as f64 >= 0.9 * steps as f64,
            "only {inside}/{steps} steps inside the 95% NEES envelope [{lo:.3}, {hi:.3}]"
        );
        let pooled: f64 = nees_sum.iter().sum::<f64>() / (trials * steps) as f64;
        assert!(
            pooled > lo && pooled < hi,
            "pooled NEES {pooled:.3} outside [{lo:.3}, {hi:.3}]"
        );

        // Unbiasedness at the final step.
        let bound = 3.0 / (trials as f64).sqrt();
        for k in 0..6 {
            assert!(
                (err_sum[k] / trials as f64).abs() < bound * sigmas[k],
                "component {k} biased: {}",
                err_sum[k] / trials as f64
            );
        }
    }

    #[test]
    fn tiny_burn_skips_the_update() {
        let fs = initial_state();
        let imp = LvlhImpulse::new(Vector3::new(0.0, 1e-12, 0.0), 0.0);
        let b = control_matrix(&reference(), &C).unwrap();
        let r = SMatrix::<f64, 6, 6>::identity() * 1e-10;
        let out = ingest_burn_residual(&fs, &imp, &Vector6::zeros(), &b, &r).unwrap();
        assert_eq!(out, fs);
    }

    #[test]
    fn zero_bias_zero_noise_keeps_bias_at_zero() {
        let x = reference();
        let b = control_matrix(&x, &C).unwrap();
        let mut fs = initial_state();
        let r = SMatrix::<f64, 6, 6>::identity() * 1e-12;
        for k in 0..10 {
            let dv = Vector3::new(0.002, 0.01, 0.005 * (k as f64 - 5.0).signum());
            let imp = LvlhImpulse::new(dv, 0.0);
            let observed: Vector6<f64> = b * dv;
            fs = ingest_burn_residual(&fs, &imp, &observed, &b, &r).unwrap();
        }
        let (b1, b2) = fs.bias();
        assert_abs_diff_eq!(b1, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b2, 0.0, epsilon = 1e-9);
    }

    /// A constant 5-degree pointing bias is recovered within 1 degree from
    /// 20 noisy burn residuals.
    #[test]
    fn constant_bias_converges_from_burn_residuals() {
        let x = reference();
        let b = control_matrix(&x, &C).unwrap();
        let true_b1 = 5f64.to_radians();
        let true_b2 = -5f64.to_radians();

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let normal = StandardNormal;
        let mut fs = initial_state();
        let sigmas = [1e-2, 1e-6, 1e-6, 1e-6, 1e-5, 1e-5];
        let mut r = SMatrix::<f64, 6, 6>::zeros();
        for k in 0..6 {
            r[(k, k)] = sigmas[k] * sigmas[k];
        }

        for k in 0..20 {
            let dir = k as f64;
            let dv = 0.01
                * Vector3::new((dir * 1.3).sin(), 1.0 + (dir * 0.7).cos(), (dir * 2.1).cos());
            let imp = LvlhImpulse::new(dv, 0.0);
            let rot = pointing_rotation(&dv, true_b1, true_b2);
            let mut observed: Vector6<f64> = b * (rot * dv);
            for row in 0..6 {
                observed[row] += sigmas[row]
                    * <StandardNormal as Distribution<f64>>::sample(&normal, &mut rng);
            }
            fs = ingest_burn_residual(&fs, &imp, &observed, &b, &r).unwrap();
        }

        let (b1, b2) = fs.bias();
        assert!(
            (b1 - true_b1).abs() < 1f64.to_radians(),
            "b1 estimate {:.3} deg vs truth 5 deg",
            b1.to_degrees()
        );
        assert!(
            (b2 - true_b2).abs() < 1f64.to_radians(),
            "b2 estimate {:.3} deg vs truth -5 deg",
            b2.to_degrees()
        );
    }
}
