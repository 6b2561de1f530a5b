//! Command-line entry points: `bandit`, `gradient`, `selftest`.
//!
//! Outputs are pure functions of (config, overrides, seed); the only
//! environment input is the output path. Exit codes: 0 success, 1 runtime
//! failure, 2 config error.

use crate::config::{optional, required, schema_help, ConfigFile, SchemaKey};
use crate::error::{Error, Result};
use crate::gradient::{
    self, decayed_quadratic_start, figure4_experiment, quadratic_sparse, slucb_phase_labels,
    AscentConfig, GradientExperimentConfig,
};
use crate::harness::{self, Algorithm, BarSpec, ExperimentSpec, ThetaPlacement};
use crate::rng::RngStream;
use crate::selftest::{run_all, SelftestConfig};
use crate::slucb::SlucbConfig;
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

const BANDIT_SCHEMA: &[SchemaKey] = &[
    required("K", "ambient dimension(s), comma-separated for a grid"),
    required("n", "round budget(s), comma-separated for a grid"),
    required("delta", "confidence parameter(s) in (0,1)"),
    required("theta2_bar", "upper bound on ||theta||_2 handed to SL-UCB, or `exact`"),
    required("sigma2_bar", "upper bound on ||sigma||_2 handed to SL-UCB, or `exact`"),
    required("seeds", "replications per grid cell"),
    optional("S", "1", "sparsity value(s), comma-separated"),
    optional("theta_l2", "1", "true parameter norm(s)"),
    optional("sigma_scale", "0.1", "per-coordinate noise scale(s)"),
    optional("algorithms", "slucb", "comma list of slucb|cb2_full|cb2_oracle_support|random"),
    optional("placement", "equal", "nonzero magnitudes: `equal` or `decay:<ratio>`"),
    optional("noise", "uniform", "noise family: uniform | rademacher"),
    optional("base_seed", "0", "base seed for replication seeding"),
    optional("name", "bandit", "experiment name used in output paths"),
];

const GRADIENT_SCHEMA: &[SchemaKey] = &[
    optional("n", "100", "number of steps (pulls)"),
    optional("ratios", "2,10,100", "K/n ratios for the sweep"),
    optional("seeds", "50", "replications per ratio"),
    optional("epsilon", "1", "step length"),
    optional("start.base", "120", "distance of the leading relevant coordinate from the optimum"),
    optional("start.decay", "0.45", "geometric decay of the remaining distances"),
    optional("slucb.delta", "0.01", "confidence parameter for SL-UCB"),
    optional("slucb.theta2_scale", "0.5", "theta2_bar as a fraction of ||grad f(u0)||_2"),
    optional("slucb.sigma2_bar", "0", "sigma2_bar handed to SL-UCB"),
    optional("eval_noise", "0", "half-width of uniform noise on evaluations (0 = none)"),
    optional("base_seed", "0", "base seed for replication seeding"),
    optional("name", "gradient", "experiment name used in output paths"),
];

#[derive(Parser)]
#[command(
    name = "slucb",
    about = "Sparse linear bandit simulations on the unit ball",
    after_help = config_keys_help()
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn config_keys_help() -> String {
    format!(
        "{}\n{}",
        schema_help("bandit config keys:", BANDIT_SCHEMA),
        schema_help("gradient config keys:", GRADIENT_SCHEMA)
    )
}

#[derive(Args)]
struct RunArgs {
    /// Path to a key=value config file.
    #[arg(long)]
    config: PathBuf,

    /// Override a config key (repeatable): --set key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output root directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Reproducible subdirectory name (defaults to a timestamp).
    #[arg(long)]
    tag: Option<String>,

    /// Worker-thread cap for replications.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a bandit experiment grid and write raw/aggregate CSVs.
    Bandit(RunArgs),
    /// Run the gradient-ascent comparison (OGS / SL-UCB / BRD).
    Gradient {
        #[command(flatten)]
        run: RunArgs,
        /// Also dump one per-step trajectory per strategy (seed = base_seed).
        #[arg(long)]
        trace: bool,
    },
    /// Run the built-in oracle suites.
    Selftest,
}

/// Parses `argv` and runs; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through this path too.
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Bandit(args) => cmd_bandit(&args),
        Command::Gradient { run, trace } => cmd_gradient(&run, trace),
        Command::Selftest => return cmd_selftest(),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e @ Error::Config { .. }) | Err(e @ Error::InvalidInput(_)) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn load_config(args: &RunArgs, schema: &[SchemaKey]) -> Result<ConfigFile> {
    let mut cfg = ConfigFile::load(&args.config)?;
    for assignment in &args.set {
        cfg.set_override(assignment)?;
    }
    cfg.reject_unknown_keys(schema)?;
    for key in schema.iter().filter(|k| k.required) {
        cfg.require(key.name)?;
    }
    Ok(cfg)
}

fn output_dir(args: &RunArgs, name: &str) -> Result<PathBuf> {
    let tag = match &args.tag {
        Some(t) => t.clone(),
        None => {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_err(|e| Error::state(e.to_string()))?;
            format!("run-{}", now.as_secs())
        }
    };
    let dir = args.out.join(name).join(tag);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn install_pool(jobs: Option<usize>) -> Result<Option<rayon::ThreadPool>> {
    match jobs {
        None => Ok(None),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::state(e.to_string()))?;
            Ok(Some(pool))
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn parse_bar(cfg: &ConfigFile, key: &str) -> Result<BarSpec> {
    match cfg.require(key)? {
        "exact" => Ok(BarSpec::Exact),
        v => v
            .parse::<f64>()
            .map(BarSpec::Fixed)
            .map_err(|_| Error::config(0, format!("key {key:?}: expected a number or `exact`"))),
    }
}

fn bandit_spec(cfg: &ConfigFile) -> Result<ExperimentSpec> {
    let name = cfg.get("name").unwrap_or("bandit").to_string();
    let k = cfg.get_usize_list("K")?.expect("required");
    let n = cfg.get_usize_list("n")?.expect("required");
    let delta = cfg.get_f64_list("delta")?.expect("required");
    let seeds = cfg.get_u64("seeds")?.expect("required") as usize;
    let s = cfg.get_usize_list("S")?.unwrap_or_else(|| vec![1]);
    let theta_l2 = cfg.get_f64_list("theta_l2")?.unwrap_or_else(|| vec![1.0]);
    let sigma_scale = cfg.get_f64_list("sigma_scale")?.unwrap_or_else(|| vec![0.1]);
    let algorithms = match cfg.get("algorithms") {
        None => vec![Algorithm::Slucb],
        Some(list) => list
            .split(',')
            .map(|a| Algorithm::parse(a.trim()))
            .collect::<Result<Vec<_>>>()?,
    };
    let placement = match cfg.get("placement") {
        None | Some("equal") => ThetaPlacement::EqualRandom,
        Some(other) => match other.strip_prefix("decay:") {
            Some(ratio) => ThetaPlacement::DecayRandom {
                ratio: ratio.parse::<f64>().map_err(|_| {
                    Error::config(0, format!("placement decay ratio {ratio:?} is not a number"))
                })?,
            },
            None => {
                return Err(Error::config(
                    0,
                    format!("unknown placement {other:?} (expected equal or decay:<ratio>)"),
                ))
            }
        },
    };
    let noise_kind = match cfg.get("noise") {
        None => crate::env::NoiseKind::UniformSymmetric,
        Some(v) => crate::env::NoiseKind::parse(v)?,
    };
    let spec = ExperimentSpec {
        name,
        k,
        n,
        s,
        theta_l2,
        sigma_scale,
        delta,
        algorithms,
        placement,
        noise_kind,
        theta2_bar: parse_bar(cfg, "theta2_bar")?,
        sigma2_bar: parse_bar(cfg, "sigma2_bar")?,
        seeds,
        base_seed: cfg.get_u64("base_seed")?.unwrap_or(0),
    };
    spec.validate()?;
    Ok(spec)
}

fn cmd_bandit(args: &RunArgs) -> Result<()> {
    let cfg = load_config(args, BANDIT_SCHEMA)?;
    let spec = bandit_spec(&cfg)?;
    let dir = output_dir(args, &spec.name)?;
    let pool = install_pool(args.jobs)?;
    let result = match &pool {
        Some(p) => p.install(|| harness::run_experiment(&spec)),
        None => harness::run_experiment(&spec),
    }?;

    write_file(&dir, "resolved.cfg", cfg.serialize().as_bytes())?;
    let mut raw = Vec::new();
    harness::write_raw_csv(&result, &mut raw)?;
    write_file(&dir, "raw.csv", &raw)?;
    let mut agg = Vec::new();
    harness::write_aggregate_csv(&result, &mut agg)?;
    write_file(&dir, "aggregate.csv", &agg)?;
    for (file, contents) in harness::curve_files(&spec, &result) {
        write_file(&dir, &file, contents.as_bytes())?;
    }
    for cell in &result.cells {
        println!(
            "cell {} done: {} seeds, mean regret {:.3}",
            cell.cell_id, cell.seeds, cell.regret_mean
        );
    }
    println!("outputs written to {}", dir.display());
    Ok(())
}

fn gradient_config(cfg: &ConfigFile) -> Result<(GradientExperimentConfig, Vec<usize>, usize, usize)> {
    let n = cfg.get_u64("n")?.unwrap_or(100) as usize;
    if n == 0 {
        return Err(Error::config(0, "n must be positive"));
    }
    let ratios = cfg.get_usize_list("ratios")?.unwrap_or_else(|| vec![2, 10, 100]);
    let seeds = cfg.get_u64("seeds")?.unwrap_or(50) as usize;
    let eval_noise = cfg.get_f64("eval_noise")?.unwrap_or(0.0);
    let gcfg = GradientExperimentConfig {
        epsilon: cfg.get_f64("epsilon")?.unwrap_or(1.0),
        start_base: cfg.get_f64("start.base")?.unwrap_or(120.0),
        start_decay: cfg.get_f64("start.decay")?.unwrap_or(0.45),
        theta2_scale: cfg.get_f64("slucb.theta2_scale")?.unwrap_or(0.5),
        sigma2_bar: cfg.get_f64("slucb.sigma2_bar")?.unwrap_or(0.0),
        delta: cfg.get_f64("slucb.delta")?.unwrap_or(0.01),
        eval_noise: if eval_noise > 0.0 { Some(eval_noise) } else { None },
        base_seed: cfg.get_u64("base_seed")?.unwrap_or(0),
    };
    if !(gcfg.epsilon > 0.0) {
        return Err(Error::config(0, "epsilon must be positive"));
    }
    if !(gcfg.delta > 0.0 && gcfg.delta < 1.0) {
        return Err(Error::config(0, "slucb.delta must lie in (0,1)"));
    }
    // The quadratic objective needs K = ratio * n >= 10.
    for &ratio in &ratios {
        if ratio * n < 10 {
            return Err(Error::config(
                0,
                format!("ratio {ratio} with n {n} gives K < 10, too small for the objective"),
            ));
        }
    }
    Ok((gcfg, ratios, n, seeds))
}

fn cmd_gradient(args: &RunArgs, trace: bool) -> Result<()> {
    let cfg = load_config(args, GRADIENT_SCHEMA)?;
    let (gcfg, ratios, n, seeds) = gradient_config(&cfg)?;
    let name = cfg.get("name").unwrap_or("gradient").to_string();
    let dir = output_dir(args, &name)?;
    let pool = install_pool(args.jobs)?;
    let rows = match &pool {
        Some(p) => p.install(|| figure4_experiment(&gcfg, &ratios, n, seeds)),
        None => figure4_experiment(&gcfg, &ratios, n, seeds),
    }?;

    write_file(&dir, "resolved.cfg", cfg.serialize().as_bytes())?;
    let mut table = Vec::new();
    gradient::write_fig4_csv(&rows, &mut table)?;
    write_file(&dir, "table.csv", &table)?;
    for row in &rows {
        println!(
            "K/n={:<4} {:<6} mean {:>14.2}  stderr {:>10.2}  ({} seeds)",
            row.ratio, row.strategy, row.mean, row.stderr, row.seeds
        );
    }

    if trace {
        let ratio = ratios[0];
        let k = ratio * n;
        let f = quadratic_sparse(k)?;
        let u0 = decayed_quadratic_start(k, gcfg.start_base, gcfg.start_decay)?;
        let mut ascent = AscentConfig::new(gcfg.epsilon, u0.clone(), n)?;
        ascent.eval_noise = gcfg.eval_noise;
        let theta2 = gcfg.theta2_scale
            * crate::domain::l2_norm(&f.oracle_gradient(&u0)?);
        let slucb_cfg = SlucbConfig::new(theta2, gcfg.sigma2_bar, gcfg.delta, n)?;

        let out = gradient::run_slucb_ascent(&f, &ascent, &slucb_cfg, RngStream::new(gcfg.base_seed))?;
        let labels = slucb_phase_labels(&out.run);
        let mut buf = Vec::new();
        out.trajectory.write_csv(&labels, &mut buf)?;
        write_file(&dir, "slucb_trace.csv", &buf)?;

        let ogs = gradient::run_oracle_gradient(&f, &ascent)?;
        let labels: Vec<String> = vec!["ogs".to_string(); n];
        let mut buf = Vec::new();
        ogs.write_csv(&labels, &mut buf)?;
        write_file(&dir, "ogs_trace.csv", &buf)?;

        let brd = gradient::run_best_random_direction(&f, &ascent, RngStream::new(gcfg.base_seed))?;
        let labels: Vec<String> = vec!["brd".to_string(); n];
        let mut buf = Vec::new();
        brd.write_csv(&labels, &mut buf)?;
        write_file(&dir, "brd_trace.csv", &buf)?;
    }
    println!("outputs written to {}", dir.display());
    Ok(())
}

fn cmd_selftest() -> i32 {
    let outcomes = run_all(&SelftestConfig::default());
    let mut failed = Vec::new();
    for o in &outcomes {
        println!("[{}] {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
        if !o.passed {
            failed.push(o.name);
        }
    }
    if failed.is_empty() {
        EXIT_OK
    } else {
        eprintln!("failing suites: {}", failed.join(", "));
        EXIT_RUNTIME
    }
}
