//! Seeded replication runner over parameter grids, with aggregation,
//! scaling-exponent fits, and support-recovery metrics.
//!
//! Reproducibility contract: per-replication seeds derive from
//! `fnv1a64(base_seed, cell_id, replication_index)` where `cell_id` is the
//! canonical parameter string of the cell, so editing or reordering the grid
//! never perturbs unrelated cells and rerunning a spec is byte-identical.

use crate::cb2;
use crate::domain::{dot, l2_norm, Fnv1a, ProblemInstance};
use crate::env::{self, NoiseKind, NoiseModel, Phase, RunMeta, RunRecord};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::slucb::{self, SlucbConfig};
use rayon::prelude::*;
use std::fmt;
use std::io::Write;

/// Algorithms the harness can drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Slucb,
    /// ConfidenceBall2 in the full ambient dimension.
    Cb2Full,
    /// ConfidenceBall2 restricted to the true support (oracle baseline).
    Cb2OracleSupport,
    /// Uniform arms on the unit sphere (null baseline).
    Random,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "slucb" => Ok(Algorithm::Slucb),
            "cb2_full" => Ok(Algorithm::Cb2Full),
            "cb2_oracle_support" => Ok(Algorithm::Cb2OracleSupport),
            "random" => Ok(Algorithm::Random),
            other => Err(Error::invalid(format!(
                "unknown algorithm {other:?} (expected slucb | cb2_full | cb2_oracle_support | random)"
            ))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Algorithm::Slucb => "slucb",
            Algorithm::Cb2Full => "cb2_full",
            Algorithm::Cb2OracleSupport => "cb2_oracle_support",
            Algorithm::Random => "random",
        };
        write!(f, "{s}")
    }
}

/// How the nonzero coordinates of theta are placed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaPlacement {
    /// S coordinates at seeded random positions, equal magnitudes, total
    /// l2 norm fixed.
    EqualRandom,
    /// Same positions, magnitudes decaying geometrically by `ratio`,
    /// total l2 norm fixed.
    DecayRandom { ratio: f64 },
}

impl fmt::Display for ThetaPlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaPlacement::EqualRandom => write!(f, "equal"),
            ThetaPlacement::DecayRandom { ratio } => write!(f, "decay:{ratio}"),
        }
    }
}

/// Upper-bound parameters handed to SL-UCB: either the exact instance norms
/// or fixed values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BarSpec {
    Exact,
    Fixed(f64),
}

impl BarSpec {
    fn resolve(&self, exact: f64) -> f64 {
        match self {
            BarSpec::Exact => exact,
            BarSpec::Fixed(v) => *v,
        }
    }
}

impl fmt::Display for BarSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BarSpec::Exact => write!(f, "exact"),
            BarSpec::Fixed(v) => write!(f, "{v}"),
        }
    }
}

/// A full experiment: the cartesian grid over the axis vectors, replicated
/// `seeds` times per cell.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: String,
    pub k: Vec<usize>,
    pub n: Vec<usize>,
    pub s: Vec<usize>,
    pub theta_l2: Vec<f64>,
    pub sigma_scale: Vec<f64>,
    pub delta: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub placement: ThetaPlacement,
    pub noise_kind: NoiseKind,
    pub theta2_bar: BarSpec,
    pub sigma2_bar: BarSpec,
    pub seeds: usize,
    pub base_seed: u64,
}

impl ExperimentSpec {
    /// Single-cell spec with the common defaults; axes can be widened by
    /// mutating the public fields.
    pub fn single(name: &str, k: usize, n: usize, s: usize) -> Self {
        Self {
            name: name.to_string(),
            k: vec![k],
            n: vec![n],
            s: vec![s],
            theta_l2: vec![1.0],
            sigma_scale: vec![0.1],
            delta: vec![0.01],
            algorithms: vec![Algorithm::Slucb],
            placement: ThetaPlacement::EqualRandom,
            noise_kind: NoiseKind::UniformSymmetric,
            theta2_bar: BarSpec::Exact,
            sigma2_bar: BarSpec::Exact,
            seeds: 1,
            base_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 {
            return Err(Error::invalid("seeds must be positive"));
        }
        for axis in [&self.k, &self.n, &self.s] {
            if axis.is_empty() {
                return Err(Error::invalid("every grid axis needs at least one value"));
            }
        }
        if self.theta_l2.is_empty() || self.sigma_scale.is_empty() || self.delta.is_empty() {
            return Err(Error::invalid("every grid axis needs at least one value"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::invalid("at least one algorithm is required"));
        }
        for &s in &self.s {
            if s == 0 || self.k.iter().any(|&k| s > k) {
                return Err(Error::invalid(format!("sparsity {s} must satisfy 1 <= S <= K")));
            }
        }
        for &d in &self.delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::invalid(format!("delta {d} must lie in (0,1)")));
            }
        }
        Ok(())
    }

    /// All grid cells in canonical order (sorted by cell id).
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &alg in &self.algorithms {
            for &k in &self.k {
                for &n in &self.n {
                    for &s in &self.s {
                        for &theta_l2 in &self.theta_l2 {
                            for &sigma_scale in &self.sigma_scale {
                                for &delta in &self.delta {
                                    cells.push(Cell {
                                        algorithm: alg,
                                        k,
                                        n,
                                        s,
                                        theta_l2,
                                        sigma_scale,
                                        delta,
                                        placement: self.placement,
                                        noise_kind: self.noise_kind,
                                        theta2_bar: self.theta2_bar,
                                        sigma2_bar: self.sigma2_bar,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        cells.sort_by_key(|c| c.id());
        cells
    }

    /// Content digest over everything that influences the outputs.
    pub fn digest(&self) -> String {
        let mut h = Fnv1a::new();
        h.write(self.name.as_bytes());
        for c in self.cells() {
            h.write(c.id().as_bytes());
        }
        h.write_u64(self.seeds as u64);
        h.write_u64(self.base_seed);
        format!("{:016x}", h.finish())
    }
}

/// One grid cell: a complete problem/algorithm configuration.
#[derive(Debug, Clone)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub k: usize,
    pub n: usize,
    pub s: usize,
    pub theta_l2: f64,
    pub sigma_scale: f64,
    pub delta: f64,
    pub placement: ThetaPlacement,
    pub noise_kind: NoiseKind,
    pub theta2_bar: BarSpec,
    pub sigma2_bar: BarSpec,
}

impl Cell {
    /// Canonical id string; doubles as the seeding key so renaming or
    /// reordering the grid never changes a cell's replications. Fields are
    /// `;`-separated to keep the id a single CSV column.
    pub fn id(&self) -> String {
        format!(
            "alg={};K={};n={};S={};theta={};sigma={};delta={};place={};noise={};tbar={};sbar={}",
            self.algorithm,
            self.k,
            self.n,
            self.s,
            self.theta_l2,
            self.sigma_scale,
            self.delta,
            self.placement,
            self.noise_kind,
            self.theta2_bar,
            self.sigma2_bar
        )
    }
}

/// Per-replication seed: FNV-1a over (base seed, cell id, replication).
pub fn replication_seed(base_seed: u64, cell_id: &str, replication: usize) -> u64 {
    let mut h = Fnv1a::new();
    h.write_u64(base_seed);
    h.write(cell_id.as_bytes());
    h.write_u64(replication as u64);
    h.finish()
}

/// One replication's reduced outcome (raw CSV row).
#[derive(Debug, Clone)]
pub struct RepRow {
    pub cell_id: String,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub k: usize,
    pub n: usize,
    pub s: usize,
    pub regret: f64,
    pub t_stop: usize,
    pub a_size: usize,
    pub precision: f64,
    pub recall: f64,
    pub xi_holds: bool,
}

/// Aggregate statistics for one cell.
#[derive(Debug, Clone)]
pub struct CellStats {
    pub cell_id: String,
    pub seeds: usize,
    pub regret_mean: f64,
    pub regret_stddev: f64,
    pub regret_q10: f64,
    pub regret_median: f64,
    pub regret_q90: f64,
    pub mean_t: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub xi_frequency: f64,
}

/// Everything one experiment produces.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub spec_digest: String,
    pub rows: Vec<RepRow>,
    pub cells: Vec<CellStats>,
}

/// Builds the instance for one replication: S nonzero coordinates at seeded
/// random positions, magnitudes by placement, total norm `theta_l2`.
pub fn build_instance(cell: &Cell, rng: &mut RngStream) -> Result<ProblemInstance> {
    let mut positions = Vec::with_capacity(cell.s);
    while positions.len() < cell.s {
        let p = rng.index(cell.k);
        if !positions.contains(&p) {
            positions.push(p);
        }
    }
    positions.sort_unstable();
    let magnitudes: Vec<f64> = match cell.placement {
        ThetaPlacement::EqualRandom => vec![1.0; cell.s],
        ThetaPlacement::DecayRandom { ratio } => {
            (0..cell.s).map(|i| ratio.powi(i as i32)).collect()
        }
    };
    let scale = cell.theta_l2 / l2_norm(&magnitudes);
    let mut theta = vec![0.0; cell.k];
    for (&pos, &mag) in positions.iter().zip(&magnitudes) {
        theta[pos] = mag * scale;
    }
    ProblemInstance::with_uniform_sigma(theta, cell.sigma_scale)
}

fn run_replication(cell: &Cell, replication: usize, base_seed: u64) -> Result<RepRow> {
    let seed = replication_seed(base_seed, &cell.id(), replication);
    let mut rng = RngStream::new(seed);
    let instance = build_instance(cell, &mut rng)?;
    let noise = NoiseModel::for_instance(cell.noise_kind, &instance);
    let theta2_bar = cell.theta2_bar.resolve(instance.theta_l2());
    let sigma2_bar = cell.sigma2_bar.resolve(instance.sigma_l2());
    let b = (theta2_bar + sigma2_bar) * (2.0 * (2.0 * cell.k as f64 / cell.delta).ln()).sqrt();

    let (record, t_stop, active, xi) = match cell.algorithm {
        Algorithm::Slucb => {
            let cfg = SlucbConfig::new(theta2_bar, sigma2_bar, cell.delta, cell.n)?;
            let run = slucb::run_slucb(&instance, &cfg, noise, rng)?;
            let xi = slucb::concentration_check(&instance, &run, b);
            (run.record, run.t_stop, run.active, xi)
        }
        Algorithm::Cb2Full => {
            let record = cb2::run_cb2(&instance, cell.n, cell.delta, noise, rng)?;
            let active: Vec<usize> = (0..cell.k).collect();
            (record, 0, active, true)
        }
        Algorithm::Cb2OracleSupport => {
            let support = instance.support();
            let restricted = instance.restricted(&support)?;
            // Ambient accounting: arms live on the true support subspace.
            let sub = cb2::run_cb2(&restricted, cell.n, cell.delta, noise_restricted(
                cell.noise_kind,
                &restricted,
            ), rng)?;
            let mut record = RunRecord::new(RunMeta {
                seed,
                n: cell.n,
                algorithm: "cb2_oracle_support".into(),
                instance_digest: instance.digest(),
            });
            for e in &sub.entries {
                let arm = crate::domain::embed(&e.arm, &support, cell.k)?;
                record.push(e.phase, arm, e.reward, e.performance);
            }
            (record, 0, support, true)
        }
        Algorithm::Random => {
            let mut record = RunRecord::new(RunMeta {
                seed,
                n: cell.n,
                algorithm: "random".into(),
                instance_digest: instance.digest(),
            });
            for _ in 0..cell.n {
                let arm = crate::domain::ArmVector::new(rng.unit_sphere(cell.k))?;
                let reward = env::pull(&instance, &arm, &noise, &mut rng)?;
                let perf = dot(instance.theta(), arm.coords());
                record.push(Phase::Exploit, arm.into_coords(), reward, perf);
            }
            (record, 0, Vec::new(), true)
        }
    };

    let regret = env::regret(&record, &instance)?;
    let (precision, recall) = support_metrics(&active, &instance, b, cell.n);
    Ok(RepRow {
        cell_id: cell.id(),
        seed,
        algorithm: cell.algorithm,
        k: cell.k,
        n: cell.n,
        s: cell.s,
        regret,
        t_stop,
        a_size: active.len(),
        precision,
        recall,
        xi_holds: xi,
    })
}

fn noise_restricted(kind: NoiseKind, restricted: &ProblemInstance) -> NoiseModel {
    NoiseModel { kind, scale: restricted.sigma().to_vec() }
}

/// Runs the whole grid. Replications execute in parallel; the reduction
/// consumes results in canonical (cell, replication) order so outputs are
/// bit-exact regardless of scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let cells = spec.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..spec.seeds).map(move |r| (c, r)))
        .collect();
    let outcomes: Vec<Result<RepRow>> = jobs
        .par_iter()
        .map(|&(c, r)| run_replication(&cells[c], r, spec.base_seed))
        .collect();

    let mut rows = Vec::with_capacity(jobs.len());
    let mut failed_cells: Vec<String> = Vec::new();
    for (job, outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(row) => rows.push(row),
            Err(e) => {
                let id = cells[job.0].id();
                if !failed_cells.contains(&id) {
                    log::error!("cell {id} aborted: {e}");
                    failed_cells.push(id);
                }
            }
        }
    }
    // A failed replication aborts its whole cell; other cells proceed.
    rows.retain(|r| !failed_cells.contains(&r.cell_id));

    let mut stats = Vec::new();
    for cell in &cells {
        let id = cell.id();
        if failed_cells.contains(&id) {
            continue;
        }
        let cell_rows: Vec<&RepRow> = rows.iter().filter(|r| r.cell_id == id).collect();
        if cell_rows.is_empty() {
            continue;
        }
        stats.push(aggregate(&id, &cell_rows));
    }
    Ok(ExperimentResult { spec_digest: spec.digest(), rows, cells: stats })
}

fn aggregate(cell_id: &str, rows: &[&RepRow]) -> CellStats {
    let n = rows.len() as f64;
    let mut regrets: Vec<f64> = rows.iter().map(|r| r.regret).collect();
    regrets.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mean = regrets.iter().sum::<f64>() / n;
    let var = if rows.len() > 1 {
        regrets.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    CellStats {
        cell_id: cell_id.to_string(),
        seeds: rows.len(),
        regret_mean: mean,
        regret_stddev: var.sqrt(),
        regret_q10: quantile(&regrets, 0.1),
        regret_median: quantile(&regrets, 0.5),
        regret_q90: quantile(&regrets, 0.9),
        mean_t: rows.iter().map(|r| r.t_stop as f64).sum::<f64>() / n,
        mean_precision: rows.iter().map(|r| r.precision).sum::<f64>() / n,
        mean_recall: rows.iter().map(|r| r.recall).sum::<f64>() / n,
        xi_frequency: rows.iter().filter(|r| r.xi_holds).count() as f64 / n,
    }
}

/// Lower empirical quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let idx = ((sorted.len() as f64 - 1.0) * q).floor() as usize;
    sorted[idx]
}

/// Least-squares slope of `log(mean_regret)` against `log(n)`. Nonpositive
/// regret points are excluded with a warning (noise can produce them at
/// tiny n); at least 3 usable points are required.
pub fn fit_scaling_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "scaling fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, r)| {
            if *r > 0.0 && *n > 0.0 {
                true
            } else {
                log::warn!("excluding nonpositive scaling point (n={n}, regret={r})");
                false
            }
        })
        .copied()
        .collect();
    if usable.len() < 3 {
        return Err(Error::invalid("fewer than 3 positive points remain for the fit"));
    }
    let m = usable.len() as f64;
    let xs: Vec<f64> = usable.iter().map(|(n, _)| n.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|(_, r)| r.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    let sxy: f64 =
        xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("all points share the same n; slope undefined"));
    }
    Ok(sxy / sxx)
}

/// Support-recovery metrics: precision against `supp(theta)` and recall
/// against `A_min = {k : |theta_k| >= 3 b sqrt(||theta||_2) / n^(1/4)}`.
/// Both default to 1 when their reference set is empty.
pub fn support_metrics(
    active: &[usize],
    instance: &ProblemInstance,
    b: f64,
    n: usize,
) -> (f64, f64) {
    let support = instance.support();
    let precision = if active.is_empty() {
        1.0
    } else {
        let hits = active.iter().filter(|i| support.contains(i)).count();
        hits as f64 / active.len() as f64
    };
    let threshold = 3.0 * b * instance.theta_l2().sqrt() / (n as f64).powf(0.25);
    let a_min: Vec<usize> = (0..instance.dim())
        .filter(|&k| instance.theta()[k] != 0.0 && instance.theta()[k].abs() >= threshold)
        .collect();
    let recall = if a_min.is_empty() {
        1.0
    } else {
        let hits = a_min.iter().filter(|i| active.contains(i)).count();
        hits as f64 / a_min.len() as f64
    };
    (precision, recall)
}

pub const RAW_CSV_HEADER: &str =
    "cell_id,seed,algorithm,K,n,S,regret,T,A_size,precision,recall,xi_holds";

/// Raw CSV: one row per replication, canonical order.
pub fn write_raw_csv<W: Write>(result: &ExperimentResult, mut w: W) -> Result<()> {
    writeln!(w, "{RAW_CSV_HEADER}")?;
    for r in &result.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.cell_id,
            r.seed,
            r.algorithm,
            r.k,
            r.n,
            r.s,
            r.regret,
            r.t_stop,
            r.a_size,
            r.precision,
            r.recall,
            r.xi_holds
        )?;
    }
    Ok(())
}

/// Aggregate CSV: one row per cell.
pub fn write_aggregate_csv<W: Write>(result: &ExperimentResult, mut w: W) -> Result<()> {
    writeln!(
        w,
        "cell_id,seeds,regret_mean,regret_stddev,regret_q10,regret_median,regret_q90,\
         mean_T,mean_precision,mean_recall,xi_frequency"
    )?;
    for c in &result.cells {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.cell_id,
            c.seeds,
            c.regret_mean,
            c.regret_stddev,
            c.regret_q10,
            c.regret_median,
            c.regret_q90,
            c.mean_t,
            c.mean_precision,
            c.mean_recall,
            c.xi_frequency
        )?;
    }
    Ok(())
}

/// Two-column plot data `(x, y)`, one file per curve. Returns
/// `(file name, contents)` pairs: one curve per algorithm with the swept
/// axis as x, when exactly one of K/n is swept.
pub fn curve_files(spec: &ExperimentSpec, result: &ExperimentResult) -> Vec<(String, String)> {
    let axis: Option<(&str, Vec<usize>)> = if spec.n.len() > 1 && spec.k.len() == 1 {
        Some(("n", spec.n.clone()))
    } else if spec.k.len() > 1 && spec.n.len() == 1 {
        Some(("K", spec.k.clone()))
    } else {
        None
    };
    let Some((axis_name, mut values)) = axis else {
        return Vec::new();
    };
    values.sort_unstable();
    let mut files = Vec::new();
    for &alg in &spec.algorithms {
        let mut body = String::new();
        for &v in &values {
            let matching: Vec<&RepRow> = result
                .rows
                .iter()
                .filter(|r| {
                    r.algorithm == alg && if axis_name == "n" { r.n == v } else { r.k == v }
                })
                .collect();
            if matching.is_empty() {
                continue;
            }
            let mean =
                matching.iter().map(|r| r.regret).sum::<f64>() / matching.len() as f64;
            body.push_str(&format!("{v} {mean}\n"));
        }
        files.push((format!("{alg}_regret_vs_{axis_name}.dat"), body));
    }
    files
}
