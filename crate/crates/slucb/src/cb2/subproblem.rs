//! Norm maximization over an ellipsoid.
//!
//! Solves `max ||nu||_2` subject to `(nu - c)^T A (nu - c) <= beta` for a
//! symmetric positive-definite `A`. The objective is convex, so the maximum
//! sits on the boundary (or at the center when `beta = 0`). With the
//! eigendecomposition `A = Q diag(lambda) Q^T` and the substitution
//! `nu = c + Q diag(lambda)^{-1/2} w`, `||w||^2 <= beta`, stationarity gives
//! `w_i = g_i sqrt(lambda_i) / (lambda_i mu - 1)` with `g = Q^T c`, and the
//! multiplier `mu` solves the secular equation `||w(mu)||^2 = beta` on
//! `(1/lambda_min, inf)`. The hard case (center orthogonal to the minimal
//! eigenspace with the secular function already below `beta` at the pole)
//! gets an explicit component along the first minimal eigenvector.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Default absolute tolerance for the secular-equation bisection.
pub const BISECT_TOL: f64 = 1e-12;
const BISECT_MAX_ITER: usize = 200;

/// Eigendecomposition with a deterministic order and sign convention:
/// eigenvalues ascending (ties keep the backend's relative order) and each
/// eigenvector's last nonzero coordinate made positive. Determinism here is
/// what makes replayed runs bit-identical.
fn ordered_eigen(a: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let d = a.nrows();
    let sym = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        sym.eigenvalues[i]
            .partial_cmp(&sym.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut values = Vec::with_capacity(d);
    let mut vectors = Vec::with_capacity(d);
    for &i in &order {
        let lam = sym.eigenvalues[i];
        if !lam.is_finite() {
            return Err(Error::numeric("eigenvalue is not finite".to_string()));
        }
        let mut v: DVector<f64> = sym.eigenvectors.column(i).into();
        let scale = v.amax();
        if let Some(last) = (0..d).rev().find(|&r| v[r].abs() > 1e-12 * scale.max(1e-300)) {
            if v[last] < 0.0 {
                v.neg_mut();
            }
        }
        values.push(lam);
        vectors.push(v);
    }
    Ok((values, vectors))
}

fn check_spd(a: &DMatrix<f64>, lambdas: &[f64]) -> Result<()> {
    let d = a.nrows();
    for i in 0..d {
        for j in (i + 1)..d {
            let scale = a[(i, i)].abs().max(a[(j, j)].abs()).max(1.0);
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-9 * scale {
                return Err(Error::numeric(format!(
                    "matrix is not symmetric at ({i},{j}): {} vs {}",
                    a[(i, j)],
                    a[(j, i)]
                )));
            }
        }
    }
    let min = lambdas.first().copied().unwrap_or(f64::NAN);
    let max = lambdas.last().copied().unwrap_or(f64::NAN);
    if !(min > 0.0) {
        return Err(Error::numeric(format!(
            "matrix is not positive definite: lambda_min = {min:e}, lambda_max = {max:e}, \
             condition = {:e}",
            max / min
        )));
    }
    Ok(())
}

/// `max ||nu||` over the ellipsoid; returns the maximizer and its norm.
pub fn max_norm_in_ellipsoid(
    a: &DMatrix<f64>,
    center: &DVector<f64>,
    beta: f64,
) -> Result<(DVector<f64>, f64)> {
    max_norm_in_ellipsoid_with_tol(a, center, beta, BISECT_TOL)
}

/// Same as [`max_norm_in_ellipsoid`] with an explicit bisection tolerance;
/// exposed so the self-test suite can exercise a deliberately degraded
/// solver.
pub fn max_norm_in_ellipsoid_with_tol(
    a: &DMatrix<f64>,
    center: &DVector<f64>,
    beta: f64,
    bisect_tol: f64,
) -> Result<(DVector<f64>, f64)> {
    let d = a.nrows();
    if a.ncols() != d || center.len() != d {
        return Err(Error::invalid(format!(
            "shape mismatch: A is {}x{}, center has length {}",
            d,
            a.ncols(),
            center.len()
        )));
    }
    if !(beta >= 0.0) {
        return Err(Error::invalid(format!("beta must be nonnegative, got {beta}")));
    }
    if beta == 0.0 {
        return Ok((center.clone(), center.norm()));
    }

    let (lambdas, vectors) = ordered_eigen(a)?;
    check_spd(a, &lambdas)?;

    // Rotated center coordinates g = Q^T c.
    let g: Vec<f64> = vectors.iter().map(|q| q.dot(center)).collect();
    let lambda_min = lambdas[0];
    let mu_pole = 1.0 / lambda_min;

    // Indices in the minimal eigenspace (relative eigenvalue tie tolerance).
    let minimal: Vec<usize> =
        (0..d).filter(|&i| lambdas[i] <= lambda_min * (1.0 + 1e-10)).collect();
    let g_norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let g_min_mass: f64 = minimal.iter().map(|&i| g[i] * g[i]).sum();
    let centered_on_min = g_min_mass.sqrt() <= 1e-12 * g_norm.max(1.0);

    let secular = |mu: f64| -> f64 {
        (0..d).map(|i| lambdas[i] * g[i] * g[i] / (lambdas[i] * mu - 1.0).powi(2)).sum()
    };

    let w = if centered_on_min {
        // Candidate hard case: evaluate the regular part at the pole.
        let regular: Vec<usize> =
            (0..d).filter(|&i| lambdas[i] > lambda_min * (1.0 + 1e-10)).collect();
        let s: f64 = regular
            .iter()
            .map(|&i| lambdas[i] * g[i] * g[i] / (lambdas[i] * mu_pole - 1.0).powi(2))
            .sum();
        if s <= beta {
            // Hard case: fill the remaining radius along the first minimal
            // eigenvector (deterministic tie-break).
            let mut w = vec![0.0; d];
            for &i in &regular {
                w[i] = g[i] * lambdas[i].sqrt() / (lambdas[i] * mu_pole - 1.0);
            }
            w[minimal[0]] += (beta - s).sqrt();
            w
        } else {
            bisect_secular(&lambdas, &g, beta, mu_pole, secular, bisect_tol)?
        }
    } else {
        bisect_secular(&lambdas, &g, beta, mu_pole, secular, bisect_tol)?
    };

    // nu = c + Q diag(lambda)^{-1/2} w.
    let mut nu = center.clone();
    for i in 0..d {
        let coeff = w[i] / lambdas[i].sqrt();
        nu.axpy(coeff, &vectors[i], 1.0);
    }
    let value = nu.norm();
    Ok((nu, value))
}

fn bisect_secular(
    lambdas: &[f64],
    g: &[f64],
    beta: f64,
    mu_pole: f64,
    secular: impl Fn(f64) -> f64,
    tol: f64,
) -> Result<Vec<f64>> {
    // The secular function decreases strictly from +inf (or the pole value)
    // to 0 on (mu_pole, inf); bracket the root by doubling, then bisect.
    let mut lo = mu_pole * (1.0 + 1e-15);
    let mut step = mu_pole.abs().max(1.0);
    let mut hi = mu_pole + step;
    let mut grow = 0;
    while secular(hi) > beta {
        step *= 2.0;
        hi = mu_pole + step;
        grow += 1;
        if grow > 200 {
            return Err(Error::numeric(
                "failed to bracket the secular equation root".to_string(),
            ));
        }
    }
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if secular(mid) > beta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol * hi.abs().max(1.0) {
            break;
        }
    }
    let mu = 0.5 * (lo + hi);
    Ok((0..lambdas.len())
        .map(|i| g[i] * lambdas[i].sqrt() / (lambdas[i] * mu - 1.0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diag(entries: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(entries))
    }

    #[test]
    fn sphere_case_extends_colinearly() {
        let a = diag(&[1.0, 1.0]);
        let c = DVector::from_row_slice(&[0.5, 0.0]);
        let (nu, v) = max_norm_in_ellipsoid(&a, &c, 1.0).unwrap();
        assert_relative_eq!(v, 1.5, epsilon = 1e-10);
        assert_relative_eq!(nu[0], 1.5, epsilon = 1e-10);
        assert_relative_eq!(nu[1], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn centered_ellipsoid_takes_longest_semi_axis() {
        let a = diag(&[4.0, 1.0]);
        let c = DVector::zeros(2);
        let (nu, v) = max_norm_in_ellipsoid(&a, &c, 1.0).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-10);
        assert_relative_eq!(nu[0], 0.0, epsilon = 1e-10);
        // Sign convention: last nonzero coordinate positive.
        assert_relative_eq!(nu[1], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn hard_case_hand_value() {
        // A=diag(4,1), c=(0.3,0), beta=1: nu* = (0.4, 0.97980), value 1.05830.
        let a = diag(&[4.0, 1.0]);
        let c = DVector::from_row_slice(&[0.3, 0.0]);
        let (nu, v) = max_norm_in_ellipsoid(&a, &c, 1.0).unwrap();
        assert_relative_eq!(v, 1.058300524425836, epsilon = 1e-10);
        assert_relative_eq!(nu[0], 0.4, epsilon = 1e-10);
        assert_relative_eq!(nu[1], 0.9797958971132712, epsilon = 1e-10);
    }

    #[test]
    fn beta_zero_returns_center() {
        let a = diag(&[2.0, 3.0]);
        let c = DVector::from_row_slice(&[0.1, -0.2]);
        let (nu, v) = max_norm_in_ellipsoid(&a, &c, 0.0).unwrap();
        assert_eq!(nu, c);
        assert_relative_eq!(v, c.norm(), epsilon = 1e-15);
    }

    #[test]
    fn solution_sits_on_the_boundary() {
        let a = DMatrix::from_row_slice(3, 3, &[5.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let c = DVector::from_row_slice(&[0.4, -0.7, 0.2]);
        for beta in [0.1, 1.0, 10.0] {
            let (nu, _) = max_norm_in_ellipsoid(&a, &c, beta).unwrap();
            let diff = &nu - &c;
            let quad = (a.clone() * &diff).dot(&diff);
            assert_relative_eq!(quad, beta, max_relative = 1e-8);
        }
    }

    #[test]
    fn value_dominates_center_norm() {
        let a = DMatrix::from_row_slice(2, 2, &[3.0, 0.4, 0.4, 1.5]);
        let c = DVector::from_row_slice(&[-0.8, 0.3]);
        let (_, v) = max_norm_in_ellipsoid(&a, &c, 0.7).unwrap();
        assert!(v >= c.norm());
    }

    #[test]
    fn value_dominates_shortest_semi_axis_on_axis_fixture() {
        // Axis-aligned fixture with the center on the top semi-axis.
        let a = diag(&[9.0, 1.0]);
        let c = DVector::from_row_slice(&[0.0, 0.4]);
        let beta = 2.0;
        let (_, v) = max_norm_in_ellipsoid(&a, &c, beta).unwrap();
        let lambda_max: f64 = 9.0;
        assert!(v >= (beta / lambda_max).sqrt());
    }

    #[test]
    fn rejects_non_spd() {
        let a = diag(&[1.0, -0.5]);
        let c = DVector::zeros(2);
        let err = max_norm_in_ellipsoid(&a, &c, 1.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("positive definite"), "unexpected message: {msg}");
    }

    #[test]
    fn rejects_asymmetric() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]);
        let c = DVector::zeros(2);
        assert!(max_norm_in_ellipsoid(&a, &c, 1.0).is_err());
    }

    #[test]
    fn beats_random_boundary_samples() {
        use crate::rng::RngStream;
        let mut rng = RngStream::new(77);
        for trial in 0..50 {
            let d = 1 + trial % 3;
            let (a, lambdas, vectors) = random_spd(d, &mut rng);
            let c = DVector::from_iterator(d, (0..d).map(|_| rng.standard_normal()));
            let beta = [0.1, 1.0, 10.0][trial % 3];
            let (_, v) = max_norm_in_ellipsoid(&a, &c, beta).unwrap();
            let best = best_boundary_sample(&lambdas, &vectors, &c, beta, 2000, &mut rng);
            assert!(
                v >= best * (1.0 - 1e-6),
                "solver {v} below sampled best {best} (d={d}, beta={beta})"
            );
        }
    }

    pub(super) fn random_spd(
        d: usize,
        rng: &mut crate::rng::RngStream,
    ) -> (DMatrix<f64>, Vec<f64>, Vec<DVector<f64>>) {
        // Random rotation via QR of a Gaussian matrix, condition <= 1e3.
        let m = DMatrix::from_iterator(d, d, (0..d * d).map(|_| rng.standard_normal()));
        let q = m.qr().q();
        let lambdas: Vec<f64> =
            (0..d).map(|_| 10f64.powf(rng.uniform() * 3.0)).collect();
        let mut a = DMatrix::zeros(d, d);
        for i in 0..d {
            let col = q.column(i);
            a += lambdas[i] * &col * col.transpose();
        }
        let a = (&a + a.transpose()) * 0.5;
        let (vals, vecs) = ordered_eigen(&a).unwrap();
        (a, vals, vecs)
    }

    pub(super) fn best_boundary_sample(
        lambdas: &[f64],
        vectors: &[DVector<f64>],
        center: &DVector<f64>,
        beta: f64,
        samples: usize,
        rng: &mut crate::rng::RngStream,
    ) -> f64 {
        let d = lambdas.len();
        let mut best = 0.0f64;
        for _ in 0..samples {
            let w = rng.unit_sphere(d);
            let mut nu = center.clone();
            for i in 0..d {
                nu.axpy(beta.sqrt() * w[i] / lambdas[i].sqrt(), &vectors[i], 1.0);
            }
            best = best.max(nu.norm());
        }
        best
    }
}
