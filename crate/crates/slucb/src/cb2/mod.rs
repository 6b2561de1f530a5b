//! ConfidenceBall2 for the unit-ball action set, fixed-horizon variant.
//!
//! The algorithm keeps the ellipsoid `B_t = {nu : (nu - theta_hat)^T A_t
//! (nu - theta_hat) <= beta}` and each round plays the direction of the
//! ellipsoid point with largest norm. `A_t` starts at the identity and
//! accumulates rank-one arm outer products; `theta_hat` is the regularized
//! least-squares estimate `A_t^{-1} sum x_s r_s`. The radius
//! `beta = 128 d (log(n^2/delta))^2` is constant over rounds (known horizon).

mod subproblem;

pub use subproblem::{max_norm_in_ellipsoid, max_norm_in_ellipsoid_with_tol, BISECT_TOL};

use crate::domain::{ArmVector, ProblemInstance};
use crate::env::{BanditEnv, NoiseModel, Phase, RunMeta, RunRecord, SimulatedEnv};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use nalgebra::{DMatrix, DVector};

/// Confidence-ellipsoid state for one ConfidenceBall2 run.
///
/// Invariants: `a` is symmetric with minimum eigenvalue >= 1 (identity plus
/// PSD rank-one terms), and `theta_hat` solves `a * theta_hat = xr_sum` to
/// relative residual 1e-8.
#[derive(Debug, Clone)]
pub struct EllipsoidState {
    d: usize,
    a: DMatrix<f64>,
    xr_sum: DVector<f64>,
    theta_hat: DVector<f64>,
    beta: f64,
    t: usize,
}

impl EllipsoidState {
    /// Fresh state: `A = I`, `theta_hat = 0`, round counter 0.
    pub fn new(d: usize, beta: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if !(beta >= 0.0) {
            return Err(Error::invalid(format!("beta must be nonnegative, got {beta}")));
        }
        Ok(Self {
            d,
            a: DMatrix::identity(d, d),
            xr_sum: DVector::zeros(d),
            theta_hat: DVector::zeros(d),
            beta,
            t: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn design_matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn xr_sum(&self) -> &DVector<f64> {
        &self.xr_sum
    }

    pub fn theta_hat(&self) -> &DVector<f64> {
        &self.theta_hat
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn round(&self) -> usize {
        self.t
    }
}

/// Ellipsoid radius `128 d (log(n^2/delta))^2` (natural log), constant in t.
///
/// Rejects `delta > n^2`: the log would turn negative and squaring it would
/// silently corrupt the radius.
pub fn beta_param(d: usize, n: usize, delta: f64) -> Result<f64> {
    if d == 0 || n == 0 {
        return Err(Error::invalid("d and n must be positive"));
    }
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    let n2 = (n as f64) * (n as f64);
    if delta > n2 {
        return Err(Error::invalid(format!(
            "delta = {delta} exceeds n^2 = {n2}; the squared log would corrupt the radius"
        )));
    }
    let log_term = (n2 / delta).ln();
    Ok(128.0 * d as f64 * log_term * log_term)
}

/// Arm selection: the normalized largest-norm point of the confidence
/// ellipsoid. Falls back to the first canonical basis vector when the
/// ellipsoid collapses at the origin.
pub fn select_arm(state: &EllipsoidState) -> Result<ArmVector> {
    let (nu, value) = max_norm_in_ellipsoid(&state.a, &state.theta_hat, state.beta)?;
    if value < 1e-12 {
        return Ok(ArmVector::basis(state.d, 0));
    }
    let coords: Vec<f64> = nu.iter().map(|x| x / value).collect();
    ArmVector::new(coords)
}

/// Rank-one update: `A' = A + arm arm^T`, `xr' = xr + arm * reward`, and
/// `theta_hat'` from a fresh Cholesky solve of the updated system.
pub fn update(state: &EllipsoidState, arm: &[f64], reward: f64) -> Result<EllipsoidState> {
    if arm.len() != state.d {
        return Err(Error::invalid(format!(
            "arm length {} does not match state dimension {}",
            arm.len(),
            state.d
        )));
    }
    let x = DVector::from_row_slice(arm);
    let mut a = state.a.clone();
    a += &x * x.transpose();
    let mut xr_sum = state.xr_sum.clone();
    xr_sum.axpy(reward, &x, 1.0);

    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::numeric("Cholesky failed on the updated design matrix"))?;
    let theta_hat = chol.solve(&xr_sum);

    let residual = (&a * &theta_hat - &xr_sum).norm();
    if residual > 1e-8 * xr_sum.norm().max(1.0) {
        return Err(Error::numeric(format!(
            "least-squares solve residual {residual:e} exceeds tolerance"
        )));
    }

    Ok(EllipsoidState { d: state.d, a, xr_sum, theta_hat, beta: state.beta, t: state.t + 1 })
}

/// Regret bound diagnostic: `64 d (||theta||_2 + ||sigma||_2) (log(n^2/delta))^2 sqrt(n)`.
pub fn theorem1_bound(d: usize, theta_l2: f64, sigma_l2: f64, n: usize, delta: f64) -> f64 {
    let n2 = (n as f64) * (n as f64);
    let log_term = (n2 / delta).ln();
    64.0 * d as f64 * (theta_l2 + sigma_l2) * log_term * log_term * (n as f64).sqrt()
}

/// Runs ConfidenceBall2 for `n` rounds on a simulated instance.
pub fn run_cb2(
    instance: &ProblemInstance,
    n: usize,
    delta: f64,
    noise: NoiseModel,
    mut rng: RngStream,
) -> Result<RunRecord> {
    if instance.dim() > n {
        log::warn!(
            "dimension {} exceeds the budget {n}; the confidence set cannot shrink in every \
             direction",
            instance.dim()
        );
    }
    let seed = rng.seed();
    let mut env = SimulatedEnv::new(instance, noise);
    let mut record = RunRecord::new(RunMeta {
        seed,
        n,
        algorithm: "cb2".into(),
        instance_digest: instance.digest(),
    });
    let mut state = EllipsoidState::new(instance.dim(), beta_param(instance.dim(), n, delta)?)?;
    for _ in 0..n {
        let arm = select_arm(&state)?;
        let (reward, perf) = env.pull(&arm, &mut rng)?;
        state = update(&state, arm.coords(), reward)?;
        record.push(Phase::Exploit, arm.into_coords(), reward, perf);
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{regret, NoiseKind};
    use approx::assert_relative_eq;

    #[test]
    fn beta_vanishes_at_delta_equals_n_squared() {
        assert_relative_eq!(beta_param(7, 5, 25.0).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn beta_frozen_values() {
        // 128 * 2 * ln(200000)^2 and 128 * ln(10000)^2, high-precision.
        assert_relative_eq!(beta_param(2, 100, 0.05).unwrap(), 38140.98161355775, epsilon = 1e-6);
        assert_relative_eq!(beta_param(1, 10, 0.01).unwrap(), 10858.287330259759, epsilon = 1e-6);
    }

    #[test]
    fn beta_rejects_delta_above_n_squared() {
        assert!(beta_param(1, 2, 5.0).is_err());
        assert!(beta_param(1, 2, 0.0).is_err());
    }

    #[test]
    fn select_arm_interval_case() {
        // d=1, theta_hat=0.5, A=1, beta=1: nu* = 1.5, arm = +1.
        let mut state = EllipsoidState::new(1, 1.0).unwrap();
        state.theta_hat[0] = 0.5;
        let arm = select_arm(&state).unwrap();
        assert_relative_eq!(arm.coords()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn select_arm_degenerate_center_tie_break() {
        // theta_hat=0, A=diag(4,1), beta=1: arm = (0, +1) by sign convention.
        let mut state = EllipsoidState::new(2, 1.0).unwrap();
        state.a[(0, 0)] = 4.0;
        let arm = select_arm(&state).unwrap();
        assert_relative_eq!(arm.coords()[0], 0.0, epsilon = 1e-10);
        assert_relative_eq!(arm.coords()[1], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn select_arm_hard_case_normalization() {
        // Normalized hard-case maximizer: (0.37796, 0.92582).
        let mut state = EllipsoidState::new(2, 1.0).unwrap();
        state.a[(0, 0)] = 4.0;
        state.theta_hat[0] = 0.3;
        let arm = select_arm(&state).unwrap();
        assert_relative_eq!(arm.coords()[0], 0.3779644730092272, epsilon = 1e-8);
        assert_relative_eq!(arm.coords()[1], 0.9258200997725514, epsilon = 1e-8);
        assert_relative_eq!(arm.norm(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn select_arm_collapsed_ellipsoid_falls_back() {
        let state = EllipsoidState::new(3, 0.0).unwrap();
        let arm = select_arm(&state).unwrap();
        assert_eq!(arm.coords(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn update_one_dimensional() {
        // d=1: A=1, xr=0, arm=1, r=0.7 -> A'=2, theta_hat'=0.35.
        let state = EllipsoidState::new(1, 1.0).unwrap();
        let next = update(&state, &[1.0], 0.7).unwrap();
        assert_relative_eq!(next.a[(0, 0)], 2.0, epsilon = 1e-15);
        assert_relative_eq!(next.theta_hat[0], 0.35, epsilon = 1e-12);
        assert_eq!(next.t, 1);
    }

    #[test]
    fn update_with_zero_arm_is_identity() {
        let state = EllipsoidState::new(2, 1.0).unwrap();
        let seeded = update(&state, &[1.0, 0.0], 1.0).unwrap();
        let next = update(&seeded, &[0.0, 0.0], 3.0).unwrap();
        assert_eq!(next.a, seeded.a);
        assert_eq!(next.theta_hat, seeded.theta_hat);
    }

    #[test]
    fn update_two_rounds_solves_diagonal_system() {
        // arms e1 (r=1) then e2 (r=2): theta_hat = (0.5, 1.0).
        let state = EllipsoidState::new(2, 1.0).unwrap();
        let s1 = update(&state, &[1.0, 0.0], 1.0).unwrap();
        let s2 = update(&s1, &[0.0, 1.0], 2.0).unwrap();
        assert_relative_eq!(s2.theta_hat[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(s2.theta_hat[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn theorem1_values() {
        assert_eq!(theorem1_bound(3, 0.0, 0.0, 50, 0.1), 0.0);
        assert_relative_eq!(
            theorem1_bound(2, 1.0, 1.0, 100, 0.05),
            381409.8161355775,
            max_relative = 1e-9
        );
        // Linear in d.
        let b1 = theorem1_bound(1, 2.0, 0.5, 64, 0.02);
        let b2 = theorem1_bound(2, 2.0, 0.5, 64, 0.02);
        assert_relative_eq!(b2, 2.0 * b1, max_relative = 1e-12);
    }

    #[test]
    fn run_cb2_one_dim_noise_free_locks_on() {
        let inst = ProblemInstance::with_uniform_sigma(vec![1.0], 0.0).unwrap();
        let noise = NoiseModel::for_instance(NoiseKind::UniformSymmetric, &inst);
        let n = 40;
        let record = run_cb2(&inst, n, 0.01, noise, RngStream::new(5)).unwrap();
        assert!(record.is_complete());
        // All arms are +-1 and at most the first round can miss.
        for e in &record.entries {
            assert_relative_eq!(e.arm[0].abs(), 1.0, epsilon = 1e-9);
        }
        assert!(record.cumulative_performance() >= n as f64 - 2.0);
    }

    #[test]
    fn run_cb2_zero_parameter_has_zero_regret() {
        let inst = ProblemInstance::with_uniform_sigma(vec![0.0, 0.0], 0.3).unwrap();
        let noise = NoiseModel::for_instance(NoiseKind::UniformSymmetric, &inst);
        let record = run_cb2(&inst, 25, 0.05, noise, RngStream::new(8)).unwrap();
        assert_relative_eq!(regret(&record, &inst).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn run_cb2_regret_stays_under_theorem_bound() {
        let inst =
            ProblemInstance::with_uniform_sigma(vec![1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()], 0.0)
                .unwrap();
        let noise = NoiseModel::for_instance(NoiseKind::UniformSymmetric, &inst);
        let n = 50;
        let delta = 0.05;
        let record = run_cb2(&inst, n, delta, noise, RngStream::new(11)).unwrap();
        let r = regret(&record, &inst).unwrap();
        let bound = theorem1_bound(2, inst.theta_l2(), inst.sigma_l2(), n, delta);
        assert!(r < bound, "regret {r} exceeded bound {bound}");
        assert!(r >= -1e-9);
    }

    #[test]
    fn update_consistency_against_direct_recomputation() {
        // After T updates: A = I + sum x x^T and theta_hat = A^{-1} sum x r,
        // both to 1e-8 relative against recomputation from the log.
        let mut rng = RngStream::new(21);
        let d = 3;
        let mut state = EllipsoidState::new(d, 2.0).unwrap();
        let mut arms: Vec<Vec<f64>> = Vec::new();
        let mut rewards = Vec::new();
        for _ in 0..40 {
            let arm = rng.unit_sphere(d);
            let reward = rng.uniform_symmetric(2.0);
            state = update(&state, &arm, reward).unwrap();
            arms.push(arm);
            rewards.push(reward);
        }
        let mut a_direct = DMatrix::<f64>::identity(d, d);
        let mut xr_direct = DVector::<f64>::zeros(d);
        for (arm, r) in arms.iter().zip(&rewards) {
            let x = DVector::from_row_slice(arm);
            a_direct += &x * x.transpose();
            xr_direct.axpy(*r, &x, 1.0);
        }
        assert!((state.a.clone() - &a_direct).norm() <= 1e-8 * a_direct.norm());
        let direct_theta = a_direct.lu().solve(&xr_direct).unwrap();
        assert!(
            (state.theta_hat.clone() - &direct_theta).norm()
                <= 1e-8 * direct_theta.norm().max(1.0)
        );
    }

    #[test]
    fn noise_free_estimate_error_shrinks_on_replays() {
        // With sigma = 0 the estimate error is exactly ||A_t^{-1} theta||.
        // On coordinate-aligned replays (A stays diagonal) it is strictly
        // non-increasing after round d; for general designs rank-one updates
        // can trade directions by a hair, so the random fixture is checked
        // with a 0.1% band plus overall decay.
        let theta = [0.8, -0.5, 0.3];
        let basis_arms: Vec<Vec<f64>> = (0..30)
            .map(|t| {
                let mut v = vec![0.0; 3];
                v[t % 3] = 1.0;
                v
            })
            .collect();
        let random_arms: Vec<Vec<f64>> = {
            let mut rng = RngStream::new(4);
            (0..30).map(|_| rng.unit_sphere(3)).collect()
        };
        for (arms, band) in [(basis_arms, 1e-10), (random_arms, 1e-3)] {
            let mut state = EllipsoidState::new(3, 1.0).unwrap();
            let mut prev_err = f64::INFINITY;
            let mut err_at_d = f64::INFINITY;
            let mut err = f64::INFINITY;
            for (t, arm) in arms.iter().enumerate() {
                let reward: f64 = arm.iter().zip(&theta).map(|(x, th)| x * th).sum();
                state = update(&state, arm, reward).unwrap();
                err = (state.theta_hat.clone() - DVector::from_row_slice(&theta)).norm();
                if t + 1 == 3 {
                    err_at_d = err;
                }
                if t + 1 > 3 {
                    assert!(
                        err <= prev_err * (1.0 + band),
                        "estimate error rose from {prev_err} to {err} at round {}",
                        t + 1
                    );
                }
                prev_err = err;
            }
            assert!(err < 0.5 * err_at_d, "error failed to decay: {err_at_d} -> {err}");
        }
    }
}
