//! Built-in oracle suites: brute-force and closed-form references that
//! cross-check the numerical core without touching the code paths they
//! verify.

use crate::cb2::{max_norm_in_ellipsoid_with_tol, BISECT_TOL};
use crate::domain::l2_norm;
use crate::gradient::quadratic_sparse;
use crate::rng::RngStream;
use crate::slucb::{sample_exploring_arm, update_estimate, SupportExplorationState};
use nalgebra::{DMatrix, DVector};

/// Tunable knobs; the defaults are what `slucb selftest` runs. Exposed so
/// tests can inject a degraded solver and watch the suite catch it.
#[derive(Debug, Clone)]
pub struct SelftestConfig {
    /// Bisection tolerance handed to the ellipsoid solver.
    pub subproblem_bisect_tol: f64,
    pub subproblem_cases: usize,
    pub subproblem_samples: usize,
    pub seed: u64,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            subproblem_bisect_tol: BISECT_TOL,
            subproblem_cases: 60,
            subproblem_samples: 20_000,
            seed: 0x5e1f,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Runs all suites, returning per-suite outcomes.
pub fn run_all(cfg: &SelftestConfig) -> Vec<SuiteOutcome> {
    vec![subproblem_suite(cfg), estimator_suite(cfg), gradient_suite(cfg)]
}

/// Ellipsoid solver against random boundary sampling plus a hand-derived
/// case; also checks the returned point actually sits on the boundary.
pub fn subproblem_suite(cfg: &SelftestConfig) -> SuiteOutcome {
    let mut rng = RngStream::new(cfg.seed);
    let mut worst_gap = 0.0f64;
    let mut worst_residual = 0.0f64;

    // Hand case: A=diag(4,1), center=(0.3,0), beta=1 -> value 1.0583005.
    let a = DMatrix::from_diagonal(&DVector::from_row_slice(&[4.0, 1.0]));
    let c = DVector::from_row_slice(&[0.3, 0.0]);
    match max_norm_in_ellipsoid_with_tol(&a, &c, 1.0, cfg.subproblem_bisect_tol) {
        Ok((_, v)) => {
            if (v - 1.058300524425836).abs() > 1e-5 {
                return SuiteOutcome {
                    name: "subproblem",
                    passed: false,
                    detail: format!("hand case value {v} differs from 1.0583005"),
                };
            }
        }
        Err(e) => {
            return SuiteOutcome {
                name: "subproblem",
                passed: false,
                detail: format!("hand case failed: {e}"),
            }
        }
    }

    for case in 0..cfg.subproblem_cases {
        let d = 1 + case % 3;
        let (a, lambdas, vectors) = random_spd(d, &mut rng);
        let center = DVector::from_iterator(d, (0..d).map(|_| 2.0 * rng.standard_normal()));
        let beta = [0.1, 1.0, 10.0][case % 3];
        let (nu, value) =
            match max_norm_in_ellipsoid_with_tol(&a, &center, beta, cfg.subproblem_bisect_tol) {
                Ok(r) => r,
                Err(e) => {
                    return SuiteOutcome {
                        name: "subproblem",
                        passed: false,
                        detail: format!("solver error on case {case}: {e}"),
                    }
                }
            };
        // Boundary feasibility.
        let diff = &nu - &center;
        let quad = (&a * &diff).dot(&diff);
        worst_residual = worst_residual.max(((quad - beta) / beta).abs());
        // Optimality against random boundary samples.
        let mut best = 0.0f64;
        for _ in 0..cfg.subproblem_samples {
            let w = rng.unit_sphere(d);
            let mut point = center.clone();
            for i in 0..d {
                point.axpy(beta.sqrt() * w[i] / lambdas[i].sqrt(), &vectors[i], 1.0);
            }
            best = best.max(point.norm());
        }
        if best > 0.0 {
            worst_gap = worst_gap.max((best - value) / best);
        }
    }
    let passed = worst_gap <= 1e-3 && worst_residual <= 1e-6;
    SuiteOutcome {
        name: "subproblem",
        passed,
        detail: format!(
            "worst sample-vs-solver gap {worst_gap:.2e} (limit 1e-3), worst boundary residual \
             {worst_residual:.2e} (limit 1e-6)"
        ),
    }
}

/// Incremental phase-1 estimator against a direct recomputation of
/// `(K/t) sum_i x_i r_i` from the logged rounds.
pub fn estimator_suite(cfg: &SelftestConfig) -> SuiteOutcome {
    let mut rng = RngStream::new(cfg.seed ^ 0xe571);
    let k = 24;
    let rounds = 200;
    let mut state = SupportExplorationState::new(k);
    let mut arms = Vec::new();
    let mut rewards = Vec::new();
    for _ in 0..rounds {
        let arm = sample_exploring_arm(k, &mut rng);
        let reward = rng.uniform_symmetric(2.0);
        state = match update_estimate(&state, &arm, reward) {
            Ok(s) => s,
            Err(e) => {
                return SuiteOutcome {
                    name: "estimator",
                    passed: false,
                    detail: format!("update failed: {e}"),
                }
            }
        };
        arms.push(arm);
        rewards.push(reward);
    }
    let mut direct = vec![0.0f64; k];
    for (arm, r) in arms.iter().zip(&rewards) {
        for (d, x) in direct.iter_mut().zip(arm.coords()) {
            *d += x * r;
        }
    }
    let scale = k as f64 / rounds as f64;
    let incremental = state.theta_hat();
    let worst = direct
        .iter()
        .zip(&incremental)
        .map(|(d, inc)| (d * scale - inc).abs())
        .fold(0.0f64, f64::max);
    SuiteOutcome {
        name: "estimator",
        passed: worst <= 1e-12,
        detail: format!("worst incremental-vs-direct deviation {worst:.2e} (limit 1e-12)"),
    }
}

/// Gradient oracle of the quadratic objective against central finite
/// differences at random points.
pub fn gradient_suite(cfg: &SelftestConfig) -> SuiteOutcome {
    let f = match quadratic_sparse(40) {
        Ok(f) => f,
        Err(e) => {
            return SuiteOutcome {
                name: "gradient",
                passed: false,
                detail: format!("objective construction failed: {e}"),
            }
        }
    };
    let mut rng = RngStream::new(cfg.seed ^ 0x9ead);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x: Vec<f64> = (0..40).map(|_| rng.uniform_symmetric(60.0)).collect();
        let g = f.oracle_gradient(&x).expect("quadratic has an oracle");
        let fd = f.finite_difference_gradient(&x);
        let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
        worst = worst.max(l2_norm(&diff) / (1.0 + l2_norm(&g)));
    }
    SuiteOutcome {
        name: "gradient",
        passed: worst <= 1e-4,
        detail: format!("worst relative finite-difference mismatch {worst:.2e} (limit 1e-4)"),
    }
}

fn random_spd(d: usize, rng: &mut RngStream) -> (DMatrix<f64>, Vec<f64>, Vec<DVector<f64>>) {
    let m = DMatrix::from_iterator(d, d, (0..d * d).map(|_| rng.standard_normal()));
    let q = m.qr().q();
    let lambdas_raw: Vec<f64> = (0..d).map(|_| 10f64.powf(rng.uniform() * 3.0)).collect();
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        let col = q.column(i);
        a += lambdas_raw[i] * &col * col.transpose();
    }
    let a = (&a + a.transpose()) * 0.5;
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let lambdas: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors: Vec<DVector<f64>> =
        order.iter().map(|&i| eig.eigenvectors.column(i).into()).collect();
    (a, lambdas, vectors)
}
