//! SL-UCB: support exploration through isotropic random projections,
//! hard-thresholded active-set extraction, then ConfidenceBall2 restricted
//! to the recovered coordinates.
//!
//! Phase 1 plays arms from the exploring set `(1/sqrt(K)) {-1,+1}^K` and
//! maintains the rescaled estimator `theta_hat_{k,t} = (K/t) sum_i x_{k,i} r_i`.
//! It stops at the first round where both
//! `(i)  max_k |theta_hat_k| - 2b/sqrt(t) >= 0`, and
//! `(ii) t >= sqrt(n) / (max_k |theta_hat_k| - b/sqrt(t))`
//! hold, with `b = (theta2_bar + sigma2_bar) sqrt(2 log(2K/delta))`, or when
//! the budget runs out. The active set keeps coordinates with
//! `|theta_hat_k| >= 2b/sqrt(T)` (absolute value: negative components are
//! recoverable too). Phase 2 plays ConfidenceBall2 on the spanned subspace,
//! embedding each restricted arm back into the ambient environment.

use crate::cb2;
use crate::domain::{embed, ArmVector, ProblemInstance};
use crate::env::{BanditEnv, NoiseModel, Phase, RunMeta, RunRecord, SimulatedEnv};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Parameters handed to SL-UCB. `theta2_bar` and `sigma2_bar` are upper
/// bounds on `||theta||_2` and `||sigma||_2`; `n` is the round budget.
#[derive(Debug, Clone)]
pub struct SlucbConfig {
    pub theta2_bar: f64,
    pub sigma2_bar: f64,
    pub delta: f64,
    pub n: usize,
}

impl SlucbConfig {
    pub fn new(theta2_bar: f64, sigma2_bar: f64, delta: f64, n: usize) -> Result<Self> {
        if !(theta2_bar >= 0.0) || !(sigma2_bar >= 0.0) {
            return Err(Error::invalid("norm bounds must be nonnegative"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0,1), got {delta}")));
        }
        if n == 0 {
            return Err(Error::invalid("budget n must be positive"));
        }
        Ok(Self { theta2_bar, sigma2_bar, delta, n })
    }
}

/// Exploration threshold `b = (theta2_bar + sigma2_bar) sqrt(2 log(2K/delta))`.
pub fn exploration_threshold(config: &SlucbConfig, k: usize) -> f64 {
    (config.theta2_bar + config.sigma2_bar)
        * (2.0 * (2.0 * k as f64 / config.delta).ln()).sqrt()
}

/// One arm from the exploring set: each coordinate `+-1/sqrt(K)` i.i.d. fair.
pub fn sample_exploring_arm(k: usize, rng: &mut RngStream) -> ArmVector {
    let scale = 1.0 / (k as f64).sqrt();
    let coords: Vec<f64> = (0..k).map(|_| rng.sign() * scale).collect();
    ArmVector::new(coords).expect("exploring arms have unit norm")
}

/// Running phase-1 estimator state. `sums[k]` accumulates
/// `sum_i x_{k,i} r_i`; the estimate is `(K/t) * sums` applied on read so no
/// O(K) rescaling happens per round.
#[derive(Debug, Clone)]
pub struct SupportExplorationState {
    k: usize,
    t: usize,
    sums: Vec<f64>,
}

impl SupportExplorationState {
    pub fn new(k: usize) -> Self {
        Self { k, t: 0, sums: vec![0.0; k] }
    }

    pub fn rounds(&self) -> usize {
        self.t
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    /// Current estimate `theta_hat_{k,t} = (K/t) sums_k` (zeros before the
    /// first round).
    pub fn theta_hat(&self) -> Vec<f64> {
        if self.t == 0 {
            return vec![0.0; self.k];
        }
        let scale = self.k as f64 / self.t as f64;
        self.sums.iter().map(|s| s * scale).collect()
    }

    pub fn max_abs_estimate(&self) -> f64 {
        if self.t == 0 {
            return 0.0;
        }
        let scale = self.k as f64 / self.t as f64;
        self.sums.iter().fold(0.0f64, |m, s| m.max((s * scale).abs()))
    }
}

/// Folds one exploring round into the estimator.
pub fn update_estimate(
    state: &SupportExplorationState,
    arm: &ArmVector,
    reward: f64,
) -> Result<SupportExplorationState> {
    if arm.dim() != state.k {
        return Err(Error::invalid(format!(
            "arm dimension {} does not match estimator dimension {}",
            arm.dim(),
            state.k
        )));
    }
    let mut next = state.clone();
    for (s, x) in next.sums.iter_mut().zip(arm.coords()) {
        *s += x * reward;
    }
    next.t += 1;
    Ok(next)
}

/// Stopping rule for the support exploration phase.
///
/// Condition (ii) is evaluated only once (i) holds, which guarantees its
/// denominator is at least `b/sqrt(t) > 0`. Returns true unconditionally at
/// budget exhaustion `t = n`.
pub fn should_stop(state: &SupportExplorationState, b: f64, n: usize) -> bool {
    let t = state.t;
    if t == 0 {
        return false;
    }
    if t >= n {
        return true;
    }
    let m = state.max_abs_estimate();
    let sqrt_t = (t as f64).sqrt();
    if m - 2.0 * b / sqrt_t < 0.0 {
        return false;
    }
    let denom = m - b / sqrt_t;
    if denom <= 0.0 {
        // Only reachable when b = 0 and the estimate is exactly zero.
        return false;
    }
    t as f64 >= (n as f64).sqrt() / denom
}

/// Active set `{k : |theta_hat_{k,T}| >= 2b/sqrt(T)}`, ascending indices.
/// Exactly-zero estimates never qualify, so a zero threshold selects the
/// nonzero coordinates rather than everything.
pub fn active_set(theta_hat: &[f64], b: f64, t_stop: usize) -> Result<Vec<usize>> {
    if t_stop == 0 {
        return Err(Error::invalid("active set requires at least one exploration round"));
    }
    let threshold = 2.0 * b / (t_stop as f64).sqrt();
    Ok((0..theta_hat.len())
        .filter(|&k| theta_hat[k] != 0.0 && theta_hat[k].abs() >= threshold)
        .collect())
}

/// Everything one SL-UCB run produces.
#[derive(Debug, Clone)]
pub struct SlucbRun {
    pub record: RunRecord,
    /// Length of the support exploration phase.
    pub t_stop: usize,
    /// Active set extracted at `t_stop` (ascending coordinate indices).
    pub active: Vec<usize>,
    /// Phase-1 estimator snapshots, flattened with stride K
    /// (`trace[(t-1)*K + k] = theta_hat_{k,t}`).
    pub theta_hat_trace: Vec<f64>,
    k: usize,
}

impl SlucbRun {
    /// Estimator snapshot after exploration round `t` (1-based).
    pub fn theta_hat_at(&self, t: usize) -> &[f64] {
        &self.theta_hat_trace[(t - 1) * self.k..t * self.k]
    }

    pub fn ambient_dim(&self) -> usize {
        self.k
    }
}

/// SL-UCB on the simulated environment.
pub fn run_slucb(
    instance: &ProblemInstance,
    config: &SlucbConfig,
    noise: NoiseModel,
    mut rng: RngStream,
) -> Result<SlucbRun> {
    let mut env = SimulatedEnv::new(instance, noise);
    let digest = instance.digest();
    run_slucb_env(&mut env, config, digest, &mut rng)
}

/// SL-UCB against any reward source. This is the full two-phase driver; the
/// simulated and gradient-ascent entry points both delegate here.
pub fn run_slucb_env<E: BanditEnv>(
    env: &mut E,
    config: &SlucbConfig,
    instance_digest: String,
    rng: &mut RngStream,
) -> Result<SlucbRun> {
    let k = env.dim();
    if k == 0 {
        return Err(Error::invalid("environment dimension must be positive"));
    }
    let n = config.n;
    let b = exploration_threshold(config, k);
    let mut record = RunRecord::new(RunMeta {
        seed: rng.seed(),
        n,
        algorithm: "slucb".into(),
        instance_digest,
    });

    // Support exploration phase.
    let mut state = SupportExplorationState::new(k);
    let mut trace = Vec::new();
    loop {
        let arm = sample_exploring_arm(k, rng);
        let (reward, perf) = env.pull(&arm, rng)?;
        state = update_estimate(&state, &arm, reward)?;
        trace.extend_from_slice(&state.theta_hat());
        record.push(Phase::Explore, arm.into_coords(), reward, perf);
        if should_stop(&state, b, n) {
            break;
        }
    }
    let t_stop = state.rounds();
    let active = active_set(&state.theta_hat(), b, t_stop)?;

    // Restricted linear bandit phase. CB2 cannot explore more directions
    // than it has rounds, so the played subspace is capped at the remaining
    // budget (largest |theta_hat| first); the reported active set is not.
    let remaining = n - t_stop;
    let mut played: Vec<usize> = if active.len() > remaining {
        let theta_hat = state.theta_hat();
        let mut ranked = active.clone();
        ranked.sort_by(|&a, &b| {
            theta_hat[b]
                .abs()
                .partial_cmp(&theta_hat[a].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        ranked.truncate(remaining);
        ranked.sort_unstable();
        ranked
    } else {
        active.clone()
    };
    if played.len() > remaining {
        played.clear();
    }

    if remaining > 0 {
        if played.is_empty() {
            // Safe default: the zero vector sits in the ball's interior and
            // pays nothing; accounting still runs every round.
            for _ in 0..remaining {
                let arm = ArmVector::zero(k);
                let (reward, perf) = env.pull(&arm, rng)?;
                record.push(Phase::Exploit, arm.into_coords(), reward, perf);
            }
        } else {
            let d = played.len();
            let beta = cb2::beta_param(d, n, config.delta)?;
            let mut ell = cb2::EllipsoidState::new(d, beta)?;
            for _ in 0..remaining {
                let restricted = cb2::select_arm(&ell)?;
                let ambient = ArmVector::new(embed(restricted.coords(), &played, k)?)?;
                let (reward, perf) = env.pull(&ambient, rng)?;
                ell = cb2::update(&ell, restricted.coords(), reward)?;
                record.push(Phase::Exploit, ambient.into_coords(), reward, perf);
            }
        }
    }

    Ok(SlucbRun { record, t_stop, active, theta_hat_trace: trace, k })
}

/// Phase-length analysis window `(T_min, T_max)`:
/// `T_min = b^2 sqrt(n) / ||theta||_2`, `T_max = 9 sqrt(S) b^2 sqrt(n) / ||theta||_2`.
/// Diagnostic only; uses ground truth the algorithm never sees.
pub fn phase_bounds(b: f64, theta_l2: f64, s: usize, n: usize) -> Result<(f64, f64)> {
    if theta_l2 <= 0.0 {
        return Err(Error::invalid("phase bounds are undefined for a zero parameter"));
    }
    let t_min = b * b * (n as f64).sqrt() / theta_l2;
    let t_max = 9.0 * (s as f64).sqrt() * t_min;
    Ok((t_min, t_max))
}

/// Regret bound diagnostic:
/// `118 (theta2_bar + sigma2_bar)^2 log(2K/delta) S sqrt(n)`.
pub fn theorem2_bound(
    theta2_bar: f64,
    sigma2_bar: f64,
    k: usize,
    delta: f64,
    s: usize,
    n: usize,
) -> f64 {
    118.0
        * (theta2_bar + sigma2_bar).powi(2)
        * (2.0 * k as f64 / delta).ln()
        * s as f64
        * (n as f64).sqrt()
}

/// Concentration event: every recorded phase-1 round satisfies
/// `||theta_hat_t - theta||_inf <= b / sqrt(t)`.
pub fn concentration_check(instance: &ProblemInstance, run: &SlucbRun, b: f64) -> bool {
    let k = instance.dim();
    let theta = instance.theta();
    for t in 1..=run.t_stop {
        let bound = b / (t as f64).sqrt();
        let snapshot = run.theta_hat_at(t);
        for i in 0..k {
            if (snapshot[i] - theta[i]).abs() > bound {
                return false;
            }
        }
    }
    true
}
