//! Gradient ascent of a high-dimensional function with a sparse gradient,
//! driven as a bandit: each round the algorithm proposes a unit-ball
//! direction, the iterate moves by `epsilon` along it, and the observed
//! increment `(f(u_t) - f(u_{t-1})) / epsilon` is fed back as the reward.
//! Includes the full-gradient baseline (OGS) and the accept-if-better
//! random-probe baseline (BRD).

use crate::domain::{l2_norm, ArmVector};
use crate::env::BanditEnv;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::slucb::{run_slucb_env, SlucbConfig, SlucbRun};

type EvalFn = Box<dyn Fn(&[f64]) -> f64 + Sync + Send>;
type GradFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + Send>;
type BallMaxFn = Box<dyn Fn(&[f64], f64) -> f64 + Sync + Send>;

/// An objective with an optional gradient oracle. The oracle is for
/// baselines and diagnostics only; the bandit strategy never touches it.
pub struct ObjectiveFunction {
    dim: usize,
    relevant: Vec<usize>,
    eval: EvalFn,
    gradient: Option<GradFn>,
    /// Exact maximum of `f` over a ball `{x : ||x - c|| <= r}` when a
    /// closed form is available; otherwise ball maxima fall back to
    /// multi-start ascent.
    ball_max: Option<BallMaxFn>,
}

impl ObjectiveFunction {
    pub fn new(dim: usize, relevant: Vec<usize>, eval: EvalFn, gradient: Option<GradFn>) -> Self {
        Self { dim, relevant, eval, gradient, ball_max: None }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn relevant_dims(&self) -> &[usize] {
        &self.relevant
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn has_oracle_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn oracle_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.gradient {
            Some(g) => Ok(g(x)),
            None => Err(Error::state("objective has no gradient oracle")),
        }
    }

    /// Central finite differences with step `1e-5 * (1 + ||u||)`; the
    /// reference the oracle is checked against.
    pub fn finite_difference_gradient(&self, x: &[f64]) -> Vec<f64> {
        let h = 1e-5 * (1.0 + l2_norm(x));
        let mut g = vec![0.0; self.dim];
        let mut probe = x.to_vec();
        for i in 0..self.dim {
            let orig = probe[i];
            probe[i] = orig + h;
            let fp = self.eval(&probe);
            probe[i] = orig - h;
            let fm = self.eval(&probe);
            probe[i] = orig;
            g[i] = (fp - fm) / (2.0 * h);
        }
        g
    }
}

/// The quadratic test objective `f(x) = sum_{k=0}^{9} -20 (x_k - 25)^2`:
/// flat in every coordinate past the first ten.
pub fn quadratic_sparse(k: usize) -> Result<ObjectiveFunction> {
    const RELEVANT: usize = 10;
    const CURV: f64 = 20.0;
    const TARGET: f64 = 25.0;
    if k < RELEVANT {
        return Err(Error::invalid(format!(
            "quadratic objective needs at least {RELEVANT} dimensions, got {k}"
        )));
    }
    let eval: EvalFn = Box::new(move |x: &[f64]| {
        x[..RELEVANT].iter().map(|&xi| -CURV * (xi - TARGET) * (xi - TARGET)).sum()
    });
    let gradient: GradFn = Box::new(move |x: &[f64]| {
        let mut g = vec![0.0; x.len()];
        for i in 0..RELEVANT {
            g[i] = -2.0 * CURV * (x[i] - TARGET);
        }
        g
    });
    // Max over a ball: project the flat maximizer (25 on relevant
    // coordinates, center elsewhere) radially onto the ball; off-support
    // movement only wastes radius. Refined by a short radial search so the
    // routine stays honest about its 1e-8 tolerance contract.
    let ball_max: BallMaxFn = Box::new(move |center: &[f64], radius: f64| {
        let dist_sq: f64 =
            center[..RELEVANT].iter().map(|&c| (TARGET - c) * (TARGET - c)).sum();
        let dist = dist_sq.sqrt();
        if dist <= radius || dist < 1e-300 {
            return 0.0;
        }
        let f_at = |s: f64| -> f64 {
            // f along the radial segment toward the maximizer.
            let miss = dist - s;
            -CURV * miss * miss
        };
        // Concave in the step length: ternary search on [0, radius].
        let (mut lo, mut hi) = (0.0f64, radius);
        while hi - lo > 1e-8 * radius.max(1.0) {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f_at(m1) < f_at(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        f_at(0.5 * (lo + hi))
    });
    let mut f = ObjectiveFunction::new(k, (0..RELEVANT).collect(), eval, Some(gradient));
    f.ball_max = Some(ball_max);
    Ok(f)
}

/// Fixed-step ascent parameters: every iterate moves by exactly `epsilon`
/// (or stays put), starting from `u0`, for `n` steps. `eval_noise` adds a
/// bounded uniform perturbation (half-width) to each function evaluation.
#[derive(Debug, Clone)]
pub struct AscentConfig {
    pub epsilon: f64,
    pub u0: Vec<f64>,
    pub n: usize,
    pub eval_noise: Option<f64>,
}

impl AscentConfig {
    pub fn new(epsilon: f64, u0: Vec<f64>, n: usize) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if n == 0 {
            return Err(Error::invalid("step budget must be positive"));
        }
        Ok(Self { epsilon, u0, n, eval_noise: None })
    }
}

/// One optimization trajectory: `n + 1` iterates with their f-values.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub strategy: String,
    pub points: Vec<Vec<f64>>,
    pub f_values: Vec<f64>,
}

impl Trajectory {
    pub fn improvement(&self) -> f64 {
        self.f_values[self.f_values.len() - 1] - self.f_values[0]
    }

    /// CSV with columns `t,f_value,delta_f,step_norm,phase`. `phases` labels
    /// each step; strategies without phases repeat the strategy name.
    pub fn write_csv<W: std::io::Write>(&self, phases: &[String], mut w: W) -> Result<()> {
        writeln!(w, "t,f_value,delta_f,step_norm,phase")?;
        for t in 0..self.points.len() {
            let delta = if t == 0 { 0.0 } else { self.f_values[t] - self.f_values[t - 1] };
            let step = if t == 0 {
                0.0
            } else {
                let prev = &self.points[t - 1];
                let cur = &self.points[t];
                l2_norm(&cur.iter().zip(prev).map(|(a, b)| a - b).collect::<Vec<_>>())
            };
            let phase = if t == 0 { "start" } else { phases[t - 1].as_str() };
            writeln!(w, "{},{},{},{},{}", t, self.f_values[t], delta, step, phase)?;
        }
        Ok(())
    }
}

struct AscentEnv<'a> {
    f: &'a ObjectiveFunction,
    epsilon: f64,
    u: Vec<f64>,
    f_current: f64,
    eval_noise: Option<f64>,
    points: Vec<Vec<f64>>,
    f_values: Vec<f64>,
}

impl<'a> AscentEnv<'a> {
    fn new(f: &'a ObjectiveFunction, cfg: &AscentConfig) -> Result<Self> {
        let u = cfg.u0.clone();
        if u.len() != f.dim() {
            return Err(Error::invalid(format!(
                "start point has length {} but the objective dimension is {}",
                u.len(),
                f.dim()
            )));
        }
        let f0 = f.eval(&u);
        if !f0.is_finite() {
            return Err(Error::numeric("objective is not finite at the start point".to_string()));
        }
        Ok(Self {
            f,
            epsilon: cfg.epsilon,
            f_current: f0,
            eval_noise: cfg.eval_noise,
            points: vec![u.clone()],
            f_values: vec![f0],
            u,
        })
    }
}

impl BanditEnv for AscentEnv<'_> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn pull(&mut self, arm: &ArmVector, rng: &mut RngStream) -> Result<(f64, f64)> {
        let next: Vec<f64> =
            self.u.iter().zip(arm.coords()).map(|(u, x)| u + self.epsilon * x).collect();
        let mut f_next = self.f.eval(&next);
        if !f_next.is_finite() {
            return Err(Error::numeric(format!(
                "objective produced a non-finite value at iterate {next:?}"
            )));
        }
        if let Some(half_width) = self.eval_noise {
            f_next += rng.uniform_symmetric(half_width);
        }
        // The increment per unit step is the reward; for this environment it
        // is also the realized performance.
        let reward = (f_next - self.f_current) / self.epsilon;
        self.u = next;
        self.f_current = f_next;
        self.points.push(self.u.clone());
        self.f_values.push(f_next);
        Ok((reward, reward))
    }
}

/// Outcome of a bandit-driven ascent: the trajectory plus the inner run
/// (phase lengths, active set, per-round log).
pub struct AscentOutcome {
    pub trajectory: Trajectory,
    pub run: SlucbRun,
}

/// SL-UCB as the direction chooser: `u_t = u_{t-1} + epsilon * x_t` with
/// `x_t` the proposed unit-ball arm and reward `(f(u_t) - f(u_{t-1}))/epsilon`.
pub fn run_slucb_ascent(
    f: &ObjectiveFunction,
    cfg: &AscentConfig,
    slucb_cfg: &SlucbConfig,
    mut rng: RngStream,
) -> Result<AscentOutcome> {
    if slucb_cfg.n != cfg.n {
        return Err(Error::invalid(format!(
            "bandit budget {} must match the step budget {}",
            slucb_cfg.n, cfg.n
        )));
    }
    let mut env = AscentEnv::new(f, cfg)?;
    let run = run_slucb_env(&mut env, slucb_cfg, format!("ascent-dim-{}", f.dim()), &mut rng)?;
    let trajectory = Trajectory {
        strategy: "slucb".into(),
        points: std::mem::take(&mut env.points),
        f_values: std::mem::take(&mut env.f_values),
    };
    Ok(AscentOutcome { trajectory, run })
}

/// Oracle gradient strategy: normalized full-gradient steps. The iterate
/// stays put once the gradient norm drops below 1e-12.
pub fn run_oracle_gradient(f: &ObjectiveFunction, cfg: &AscentConfig) -> Result<Trajectory> {
    let mut u = cfg.u0.clone();
    let mut points = vec![u.clone()];
    let mut f_values = vec![f.eval(&u)];
    for _ in 0..cfg.n {
        let g = f.oracle_gradient(&u)?;
        let norm = l2_norm(&g);
        if norm >= 1e-12 {
            for (ui, gi) in u.iter_mut().zip(&g) {
                *ui += cfg.epsilon * gi / norm;
            }
        }
        points.push(u.clone());
        f_values.push(f.eval(&u));
    }
    Ok(Trajectory { strategy: "ogs".into(), points, f_values })
}

/// Best random direction: probe a uniform sphere direction one step away
/// and move only on strict improvement. One evaluation per step keeps the
/// budget comparable to one bandit round.
pub fn run_best_random_direction(
    f: &ObjectiveFunction,
    cfg: &AscentConfig,
    mut rng: RngStream,
) -> Result<Trajectory> {
    let mut u = cfg.u0.clone();
    let mut f_u = f.eval(&u);
    let mut points = vec![u.clone()];
    let mut f_values = vec![f_u];
    for _ in 0..cfg.n {
        let v = rng.unit_sphere(f.dim());
        let cand: Vec<f64> = u.iter().zip(&v).map(|(ui, vi)| ui + cfg.epsilon * vi).collect();
        let mut f_cand = f.eval(&cand);
        if let Some(half_width) = cfg.eval_noise {
            f_cand += rng.uniform_symmetric(half_width);
        }
        if f_cand > f_u {
            u = cand;
            f_u = f_cand;
        }
        points.push(u.clone());
        f_values.push(f_u);
    }
    Ok(Trajectory { strategy: "brd".into(), points, f_values })
}

/// Ascent regret: `max f over the reachable ball B(u0, n*epsilon)` minus
/// `f(u_n)`. Exact when the objective carries a ball-max form; otherwise
/// approximated by multi-start projected gradient ascent inside the ball.
pub fn gradient_regret(
    f: &ObjectiveFunction,
    u0: &[f64],
    u_n: &[f64],
    n: usize,
    epsilon: f64,
) -> Result<f64> {
    let radius = n as f64 * epsilon;
    if !(radius > 0.0) {
        return Err(Error::invalid("reachable radius must be positive"));
    }
    let best = match &f.ball_max {
        Some(bm) => bm(u0, radius),
        None => ball_max_multistart(f, u0, radius)?,
    };
    Ok(best - f.eval(u_n))
}

/// Approximate ball maximum: projected gradient ascent from several starts.
fn ball_max_multistart(f: &ObjectiveFunction, center: &[f64], radius: f64) -> Result<f64> {
    let mut rng = RngStream::new(0x0b_a11);
    let dim = f.dim();
    let mut best = f.eval(center);
    for start in 0..8 {
        let mut x: Vec<f64> = if start == 0 {
            center.to_vec()
        } else {
            let dir = rng.unit_sphere(dim);
            let r = radius * rng.uniform().sqrt();
            center.iter().zip(&dir).map(|(c, d)| c + r * d).collect()
        };
        let mut step = radius / 4.0;
        let mut fx = f.eval(&x);
        for _ in 0..200 {
            let g = match &f.gradient {
                Some(g) => g(&x),
                None => f.finite_difference_gradient(&x),
            };
            let gn = l2_norm(&g);
            if gn < 1e-12 || step < 1e-10 * radius {
                break;
            }
            let mut cand: Vec<f64> =
                x.iter().zip(&g).map(|(xi, gi)| xi + step * gi / gn).collect();
            // Project back onto the ball.
            let off: Vec<f64> = cand.iter().zip(center).map(|(c, o)| c - o).collect();
            let dist = l2_norm(&off);
            if dist > radius {
                for (ci, (oi, c0)) in cand.iter_mut().zip(off.iter().zip(center)) {
                    *ci = c0 + oi * radius / dist;
                }
            }
            let f_cand = f.eval(&cand);
            if f_cand > fx {
                x = cand;
                fx = f_cand;
            } else {
                step *= 0.5;
            }
        }
        best = best.max(fx);
    }
    Ok(best)
}

/// Default start for the quadratic experiment: the relevant coordinates sit
/// at geometrically decaying distances below the quadratic's maximizer, so
/// the leading directions carry most of the attainable improvement.
pub fn decayed_quadratic_start(k: usize, base: f64, decay: f64) -> Result<Vec<f64>> {
    let f = quadratic_sparse(k)?;
    let mut u0 = vec![0.0; k];
    let mut dist = base;
    for &idx in f.relevant_dims() {
        u0[idx] = 25.0 - dist;
        dist *= decay;
    }
    Ok(u0)
}

/// Configuration for the ratio-sweep experiment on the quadratic objective.
#[derive(Debug, Clone)]
pub struct GradientExperimentConfig {
    pub epsilon: f64,
    /// Geometric start: leading relevant coordinate `base` away from the
    /// maximizer, each next one `decay` times closer.
    pub start_base: f64,
    pub start_decay: f64,
    /// theta2_bar handed to SL-UCB, as a fraction of `||grad f(u0)||_2`.
    pub theta2_scale: f64,
    pub sigma2_bar: f64,
    pub delta: f64,
    pub eval_noise: Option<f64>,
    pub base_seed: u64,
}

impl Default for GradientExperimentConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            start_base: 120.0,
            start_decay: 0.45,
            theta2_scale: 0.5,
            sigma2_bar: 0.0,
            delta: 0.01,
            eval_noise: None,
            base_seed: 0,
        }
    }
}

/// One row of the ratio-sweep table.
#[derive(Debug, Clone)]
pub struct Fig4Row {
    pub ratio: usize,
    pub strategy: String,
    pub mean: f64,
    pub stderr: f64,
    pub seeds: usize,
}

/// Mean final improvement `f(u_n) - f(u_0)` per (ratio, strategy) on the
/// quadratic objective, for `K = ratio * n`.
pub fn figure4_experiment(
    cfg: &GradientExperimentConfig,
    ratios: &[usize],
    n: usize,
    seeds: usize,
) -> Result<Vec<Fig4Row>> {
    use rayon::prelude::*;

    let mut rows = Vec::new();
    for &ratio in ratios {
        let k = ratio * n;
        let f = quadratic_sparse(k)?;
        let u0 = decayed_quadratic_start(k, cfg.start_base, cfg.start_decay)?;
        let mut ascent = AscentConfig::new(cfg.epsilon, u0.clone(), n)?;
        ascent.eval_noise = cfg.eval_noise;
        let theta2_bar = cfg.theta2_scale * l2_norm(&f.oracle_gradient(&u0)?);
        let slucb_cfg = SlucbConfig::new(theta2_bar, cfg.sigma2_bar, cfg.delta, n)?;

        // OGS is deterministic; run once per ratio.
        let ogs = run_oracle_gradient(&f, &ascent)?.improvement();
        rows.push(Fig4Row { ratio, strategy: "ogs".into(), mean: ogs, stderr: 0.0, seeds });

        let improvements: Vec<(f64, f64)> = (0..seeds)
            .into_par_iter()
            .map(|rep| -> Result<(f64, f64)> {
                let seed_slucb = experiment_seed(cfg.base_seed, ratio as u64, rep as u64, 0);
                let seed_brd = experiment_seed(cfg.base_seed, ratio as u64, rep as u64, 1);
                let sl = run_slucb_ascent(&f, &ascent, &slucb_cfg, RngStream::new(seed_slucb))?
                    .trajectory
                    .improvement();
                let brd =
                    run_best_random_direction(&f, &ascent, RngStream::new(seed_brd))?
                        .improvement();
                Ok((sl, brd))
            })
            .collect::<Result<Vec<_>>>()?;

        for (name, idx) in [("slucb", 0usize), ("brd", 1usize)] {
            let values: Vec<f64> =
                improvements.iter().map(|pair| if idx == 0 { pair.0 } else { pair.1 }).collect();
            let (mean, stderr) = mean_stderr(&values);
            rows.push(Fig4Row { ratio, strategy: name.into(), mean, stderr, seeds });
        }
    }
    Ok(rows)
}

/// Stable per-replication seed for the gradient experiment.
fn experiment_seed(base: u64, ratio: u64, rep: u64, stream: u64) -> u64 {
    let mut h = crate::domain::Fnv1a::new();
    h.write_u64(base);
    h.write_u64(ratio);
    h.write_u64(rep);
    h.write_u64(stream);
    h.finish()
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// CSV for the ratio-sweep table: `ratio,strategy,mean,stderr,seeds`.
pub fn write_fig4_csv<W: std::io::Write>(rows: &[Fig4Row], mut w: W) -> Result<()> {
    writeln!(w, "ratio,strategy,mean,stderr,seeds")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.ratio, r.strategy, r.mean, r.stderr, r.seeds)?;
    }
    Ok(())
}

/// Phase labels for an SL-UCB ascent, aligned with trajectory steps.
pub fn slucb_phase_labels(run: &SlucbRun) -> Vec<String> {
    run.record.entries.iter().map(|e| e.phase.to_string()).collect()
}
