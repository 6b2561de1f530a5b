//! Stochastic linear bandit environment.
//!
//! Rewards follow `r = <arm, theta + eta>` where `eta` is an i.i.d. bounded
//! white noise vector drawn fresh each round in the full ambient dimension.
//! Performance accounting always uses the exact `theta` from the instance
//! (never an estimate), so regret is measured against the true optimum.

use crate::domain::{dot, l2_norm, ArmVector, ProblemInstance};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use std::fmt;
use std::io::Write;

/// Bounded zero-mean noise families. Every draw satisfies
/// `|eta_k| <= sigma_k / 2` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// Uniform on `[-sigma_k/2, sigma_k/2]` (default).
    UniformSymmetric,
    /// `+-sigma_k/2` with equal probability: the extremal bounded case.
    RademacherScaled,
}

impl NoiseKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(NoiseKind::UniformSymmetric),
            "rademacher" => Ok(NoiseKind::RademacherScaled),
            other => Err(Error::invalid(format!(
                "unknown noise kind {other:?} (expected \"uniform\" or \"rademacher\")"
            ))),
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseKind::UniformSymmetric => write!(f, "uniform"),
            NoiseKind::RademacherScaled => write!(f, "rademacher"),
        }
    }
}

/// Per-coordinate noise model: kind plus the scale vector sigma
/// (half-width `sigma_k / 2` per coordinate).
#[derive(Debug, Clone)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub scale: Vec<f64>,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, scale: Vec<f64>) -> Result<Self> {
        if scale.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::invalid("noise scales must be finite and nonnegative"));
        }
        Ok(Self { kind, scale })
    }

    pub fn uniform(scale: Vec<f64>) -> Result<Self> {
        Self::new(NoiseKind::UniformSymmetric, scale)
    }

    /// Noise model matching an instance's sigma vector.
    pub fn for_instance(kind: NoiseKind, instance: &ProblemInstance) -> Self {
        Self { kind, scale: instance.sigma().to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.scale.len()
    }

    /// One fresh noise vector, independent across coordinates and rounds.
    pub fn draw(&self, rng: &mut RngStream) -> Vec<f64> {
        match self.kind {
            NoiseKind::UniformSymmetric => {
                self.scale.iter().map(|s| rng.uniform_symmetric(s / 2.0)).collect()
            }
            NoiseKind::RademacherScaled => {
                self.scale.iter().map(|s| rng.sign() * s / 2.0).collect()
            }
        }
    }
}

/// Reward for pulling `arm` on `instance`: `<arm, theta + eta>`.
pub fn pull(
    instance: &ProblemInstance,
    arm: &ArmVector,
    noise: &NoiseModel,
    rng: &mut RngStream,
) -> Result<f64> {
    if arm.dim() != instance.dim() || noise.dim() != instance.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: arm {}, noise {}, instance {}",
            arm.dim(),
            noise.dim(),
            instance.dim()
        )));
    }
    let eta = noise.draw(rng);
    let mut r = 0.0;
    for ((x, th), e) in arm.coords().iter().zip(instance.theta()).zip(&eta) {
        r += x * (th + e);
    }
    Ok(r)
}

/// Best attainable performance over `n` rounds: `n * ||theta||_2`
/// (always playing `theta / ||theta||_2`).
pub fn optimal_performance(instance: &ProblemInstance, n: usize) -> f64 {
    n as f64 * instance.theta_l2()
}

/// Label for which algorithm phase produced a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Explore,
    Exploit,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Explore => write!(f, "explore"),
            Phase::Exploit => write!(f, "exploit"),
        }
    }
}

/// One logged round.
#[derive(Debug, Clone)]
pub struct RoundEntry {
    /// 1-based round index.
    pub t: usize,
    pub phase: Phase,
    pub arm: Vec<f64>,
    pub reward: f64,
    /// Instantaneous performance `<theta, arm>` against the true parameter.
    pub performance: f64,
}

/// Metadata identifying one seeded run.
#[derive(Debug, Clone)]
pub struct RunMeta {
    pub seed: u64,
    pub n: usize,
    pub algorithm: String,
    pub instance_digest: String,
}

/// Complete per-round log of one run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub meta: RunMeta,
    pub entries: Vec<RoundEntry>,
}

impl RunRecord {
    pub fn new(meta: RunMeta) -> Self {
        Self { meta, entries: Vec::new() }
    }

    pub fn push(&mut self, phase: Phase, arm: Vec<f64>, reward: f64, performance: f64) {
        let t = self.entries.len() + 1;
        self.entries.push(RoundEntry { t, phase, arm, reward, performance });
    }

    pub fn is_complete(&self) -> bool {
        self.entries.len() == self.meta.n
    }

    pub fn cumulative_performance(&self) -> f64 {
        self.entries.iter().map(|e| e.performance).sum()
    }

    pub fn reward_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.reward).sum()
    }

    /// CSV with columns `t,phase,reward,inst_perf,cum_perf,cum_regret,arm_norm`.
    pub fn write_csv<W: Write>(&self, instance: &ProblemInstance, mut w: W) -> Result<()> {
        let theta_l2 = instance.theta_l2();
        writeln!(w, "t,phase,reward,inst_perf,cum_perf,cum_regret,arm_norm")?;
        let mut cum_perf = 0.0;
        for e in &self.entries {
            cum_perf += e.performance;
            let cum_regret = e.t as f64 * theta_l2 - cum_perf;
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                e.t,
                e.phase,
                e.reward,
                e.performance,
                cum_perf,
                cum_regret,
                l2_norm(&e.arm)
            )?;
        }
        Ok(())
    }

    /// Sidecar dump of raw arm coordinates; intended for small ambient
    /// dimensions (callers gate on `K <= 64`).
    pub fn write_arms_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.entries {
            let coords: Vec<String> = e.arm.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{},{}", e.t, coords.join(","))?;
        }
        Ok(())
    }
}

/// Regret with respect to always playing the optimal direction:
/// `n ||theta||_2 - sum_t <theta, x_t>`.
pub fn regret(record: &RunRecord, instance: &ProblemInstance) -> Result<f64> {
    if !record.is_complete() {
        return Err(Error::state(format!(
            "run record has {} of {} rounds",
            record.entries.len(),
            record.meta.n
        )));
    }
    Ok(optimal_performance(instance, record.meta.n) - record.cumulative_performance())
}

/// Martingale diagnostic: how far the observed reward sum drifted from the
/// noiseless performance, against the Azuma bound
/// `sqrt(2 log(1/delta)) ||sigma||_2 sqrt(n)`.
pub fn reward_sum_gap(
    record: &RunRecord,
    instance: &ProblemInstance,
    delta: f64,
) -> Result<(f64, f64)> {
    if delta <= 0.0 || delta > 1.0 {
        return Err(Error::invalid("delta must lie in (0, 1]"));
    }
    let gap = record.reward_sum() - record.cumulative_performance();
    let n = record.meta.n as f64;
    let bound = (2.0 * (1.0 / delta).ln()).sqrt() * instance.sigma_l2() * n.sqrt();
    Ok((gap, bound))
}

/// Anything SL-UCB can pull arms from. Implementations own whatever state
/// the reward source needs; the shared `RngStream` keeps one replication on
/// one stream.
pub trait BanditEnv {
    fn dim(&self) -> usize;

    /// Plays `arm`, returning `(reward, instantaneous performance)`.
    fn pull(&mut self, arm: &ArmVector, rng: &mut RngStream) -> Result<(f64, f64)>;
}

/// The simulated environment: rewards from a [`ProblemInstance`] plus
/// fresh full-dimensional noise each round.
pub struct SimulatedEnv<'a> {
    pub instance: &'a ProblemInstance,
    pub noise: NoiseModel,
}

impl<'a> SimulatedEnv<'a> {
    pub fn new(instance: &'a ProblemInstance, noise: NoiseModel) -> Self {
        Self { instance, noise }
    }
}

impl BanditEnv for SimulatedEnv<'_> {
    fn dim(&self) -> usize {
        self.instance.dim()
    }

    fn pull(&mut self, arm: &ArmVector, rng: &mut RngStream) -> Result<(f64, f64)> {
        let reward = pull(self.instance, arm, &self.noise, rng)?;
        let performance = dot(instance_theta(self.instance), arm.coords());
        Ok((reward, performance))
    }
}

fn instance_theta(instance: &ProblemInstance) -> &[f64] {
    instance.theta()
}
