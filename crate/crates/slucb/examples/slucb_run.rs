//! A single SL-UCB run end to end: support exploration, stopping time,
//! active set, restricted exploitation, and the run diagnostics.

use slucb::domain::ProblemInstance;
use slucb::env::{regret, NoiseKind, NoiseModel, Phase};
use slucb::rng::RngStream;
use slucb::slucb::{
    concentration_check, exploration_threshold, run_slucb, theorem2_bound, SlucbConfig,
};

fn main() {
    // Sparse problem: K = 100 coordinates, one of them carries the signal.
    let k = 100;
    let mut theta = vec![0.0; k];
    theta[37] = 5.0;
    let instance = ProblemInstance::with_uniform_sigma(theta, 0.1).unwrap();
    let n = 10_000;

    let config = SlucbConfig::new(
        instance.theta_l2(), // theta2_bar: exact upper bound
        instance.sigma_l2(), // sigma2_bar: exact upper bound
        0.01,
        n,
    )
    .unwrap();
    let b = exploration_threshold(&config, k);

    let noise = NoiseModel::for_instance(NoiseKind::UniformSymmetric, &instance);
    let run = run_slucb(&instance, &config, noise, RngStream::new(7)).unwrap();

    println!("K = {k}, S = {}, ||theta|| = {}, n = {n}", instance.sparsity(), instance.theta_l2());
    println!("exploration threshold b = {b:.3}");
    println!("exploration length T    = {}", run.t_stop);
    println!("active set              = {:?} (true support {:?})", run.active, instance.support());
    println!("concentration event     = {}", concentration_check(&instance, &run, b));

    let explore_perf: f64 = run
        .record
        .entries
        .iter()
        .filter(|e| e.phase == Phase::Explore)
        .map(|e| e.performance)
        .sum();
    let exploit_perf: f64 = run
        .record
        .entries
        .iter()
        .filter(|e| e.phase == Phase::Exploit)
        .map(|e| e.performance)
        .sum();
    println!("\nperformance by phase:");
    println!("  explore ({} rounds): {explore_perf:>10.2}", run.t_stop);
    println!("  exploit ({} rounds): {exploit_perf:>10.2}", n - run.t_stop);

    let r = regret(&run.record, &instance).unwrap();
    let bound = theorem2_bound(
        config.theta2_bar,
        config.sigma2_bar,
        k,
        config.delta,
        instance.sparsity(),
        n,
    );
    println!("\nregret       {r:>12.2}");
    println!("regret bound {bound:>12.2}  (loose by design)");
}
