//! One ConfidenceBall2 run on a small fully-observed problem, with the
//! regret diagnostic and a dump of the per-round log.

use slucb::cb2::{run_cb2, theorem1_bound};
use slucb::domain::ProblemInstance;
use slucb::env::{regret, reward_sum_gap, NoiseKind, NoiseModel};
use slucb::rng::RngStream;

fn main() {
    let theta = vec![3.0, -4.0];
    let instance = ProblemInstance::with_uniform_sigma(theta, 0.5).unwrap();
    let n = 1000;
    let delta = 0.01;
    let seed = 42;

    let noise = NoiseModel::for_instance(NoiseKind::UniformSymmetric, &instance);
    let record = run_cb2(&instance, n, delta, noise, RngStream::new(seed)).unwrap();

    let r = regret(&record, &instance).unwrap();
    let bound = theorem1_bound(
        instance.dim(),
        instance.theta_l2(),
        instance.sigma_l2(),
        n,
        delta,
    );
    let (gap, azuma) = reward_sum_gap(&record, &instance, delta).unwrap();

    println!("d = {}, n = {n}, ||theta|| = {}, seed = {seed}", instance.dim(), instance.theta_l2());
    println!("regret            {r:>12.2}");
    println!("regret bound      {bound:>12.2}  (very loose by design)");
    println!("reward-sum gap    {gap:>12.2}  (Azuma bound {azuma:.2})");

    // How quickly the played direction locks onto theta.
    println!("\nalignment <theta, x_t> / ||theta|| at a few rounds:");
    for &t in &[1usize, 2, 5, 10, 50, 100, 500, 1000] {
        let e = &record.entries[t - 1];
        println!("  t = {t:>4}: {:+.4}", e.performance / instance.theta_l2());
    }

    let csv_path = std::env::temp_dir().join("cb2_run.csv");
    let mut buf = Vec::new();
    record.write_csv(&instance, &mut buf).unwrap();
    std::fs::write(&csv_path, buf).unwrap();
    println!("\nper-round log written to {}", csv_path.display());

    // Raw arm coordinates are worth dumping only at small dimension.
    if instance.dim() <= 64 {
        let arms_path = std::env::temp_dir().join("cb2_run_arms.csv");
        let mut buf = Vec::new();
        record.write_arms_csv(&mut buf).unwrap();
        std::fs::write(&arms_path, buf).unwrap();
        println!("arm coordinates written to {}", arms_path.display());
    }
}
