//! Monte Carlo support recovery: how often the concentration event holds,
//! what the active set looks like, and how long exploration runs, across
//! seeded replications.

use slucb::harness::{run_experiment, ExperimentSpec};
use slucb::slucb::{exploration_threshold, phase_bounds, SlucbConfig};

fn main() {
    let mut spec = ExperimentSpec::single("support-recovery-demo", 100, 10_000, 1);
    spec.theta_l2 = vec![5.0];
    spec.sigma_scale = vec![0.1];
    spec.delta = vec![0.01];
    spec.seeds = 50;
    spec.base_seed = 1;

    println!("K=100, S=1, ||theta||=5, sigma=0.1, delta=0.01, n=10000, {} seeds", spec.seeds);
    let result = run_experiment(&spec).unwrap();
    let cell = &result.cells[0];

    println!("\nxi frequency        {:.3}", cell.xi_frequency);
    println!("mean |A|            {:.3}", result.rows.iter().map(|r| r.a_size as f64).sum::<f64>() / spec.seeds as f64);
    println!("mean precision      {:.3}", cell.mean_precision);
    println!("mean recall(A_min)  {:.3}", cell.mean_recall);
    println!("mean T              {:.1}", cell.mean_t);
    println!("mean regret         {:.1}", cell.regret_mean);

    let t_lo = result.rows.iter().map(|r| r.t_stop).min().unwrap();
    let t_hi = result.rows.iter().map(|r| r.t_stop).max().unwrap();
    println!("observed T range    [{t_lo}, {t_hi}]");

    // The printed analysis window vs the crossing time the stopping rule
    // actually produces. The window formula vastly overshoots here; the
    // first-crossing time (2b/theta_max)^2 is the operative scale.
    let cfg = SlucbConfig::new(5.0, 1.0, 0.01, 10_000).unwrap();
    let b = exploration_threshold(&cfg, 100);
    let (t_min, t_max) = phase_bounds(b, 5.0, 1, 10_000).unwrap();
    let crossing = (2.0 * b / 5.0).powi(2);
    println!("\nanalysis window [T_min, T_max] = [{t_min:.0}, {t_max:.0}]");
    println!("first-crossing scale (2b/theta_max)^2 = {crossing:.0}");
}
