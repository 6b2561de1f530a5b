//! Shared domain types: arms on the unit ball, problem instances, and
//! coordinate-subspace restriction/embedding.

use crate::error::{Error, Result};

/// Tolerance on unit-ball membership; absorbs floating-point drift from
/// normalization (exact `<= 1` is unattainable in floating point).
pub const BALL_TOL: f64 = 1e-9;

/// An action vector constrained to the l2 unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmVector {
    coords: Vec<f64>,
}

impl ArmVector {
    /// Validates ball membership: `||coords||_2 <= 1 + BALL_TOL`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let norm = l2_norm(&coords);
        if !norm.is_finite() || norm > 1.0 + BALL_TOL {
            return Err(Error::invalid(format!(
                "arm norm {norm} exceeds the unit ball (tolerance {BALL_TOL})"
            )));
        }
        Ok(Self { coords })
    }

    /// The zero vector (interior of the ball).
    pub fn zero(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    /// Canonical basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut coords = vec![0.0; dim];
        coords[index] = 1.0;
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.coords)
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// Ground truth for one simulated bandit problem.
///
/// `theta` is the unknown parameter the algorithms try to exploit; `sigma`
/// holds per-coordinate noise scales (each noise draw is bounded by
/// `sigma[k] / 2`). Both live in ambient dimension `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    k: usize,
    theta: Vec<f64>,
    sigma: Vec<f64>,
}

impl ProblemInstance {
    pub fn new(theta: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::invalid("instance dimension must be positive"));
        }
        if theta.len() != sigma.len() {
            return Err(Error::invalid(format!(
                "theta has length {} but sigma has length {}",
                theta.len(),
                sigma.len()
            )));
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("theta must be finite"));
        }
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::invalid("sigma entries must be finite and nonnegative"));
        }
        Ok(Self { k: theta.len(), theta, sigma })
    }

    /// Uniform noise scale across all coordinates.
    pub fn with_uniform_sigma(theta: Vec<f64>, sigma_scale: f64) -> Result<Self> {
        let k = theta.len();
        Self::new(theta, vec![sigma_scale; k])
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Number of nonzero components of theta.
    pub fn sparsity(&self) -> usize {
        self.theta.iter().filter(|x| **x != 0.0).count()
    }

    /// Indices of the nonzero components, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.k).filter(|&i| self.theta[i] != 0.0).collect()
    }

    pub fn theta_l2(&self) -> f64 {
        l2_norm(&self.theta)
    }

    pub fn sigma_l2(&self) -> f64 {
        l2_norm(&self.sigma)
    }

    /// Instance restricted to a coordinate subspace (both theta and sigma).
    pub fn restricted(&self, support: &[usize]) -> Result<Self> {
        let theta = restrict(&self.theta, support)?;
        let sigma = restrict(&self.sigma, support)?;
        if theta.is_empty() {
            return Err(Error::invalid("cannot restrict an instance to an empty support"));
        }
        Ok(Self { k: theta.len(), theta, sigma })
    }

    /// Stable content digest, recorded in run metadata so outputs are
    /// traceable to the exact instance.
    pub fn digest(&self) -> String {
        let mut h = Fnv1a::new();
        h.write_u64(self.k as u64);
        for x in &self.theta {
            h.write_u64(x.to_bits());
        }
        for s in &self.sigma {
            h.write_u64(s.to_bits());
        }
        format!("{:016x}", h.finish())
    }
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Validates a support: strictly increasing indices, all `< dim`.
///
/// Supports are always stored sorted so run logs stay diffable.
pub fn validate_support(support: &[usize], dim: usize) -> Result<()> {
    for (i, &idx) in support.iter().enumerate() {
        if idx >= dim {
            return Err(Error::invalid(format!(
                "support index {idx} out of range for dimension {dim}"
            )));
        }
        if i > 0 && support[i - 1] >= idx {
            return Err(Error::invalid("support indices must be strictly increasing"));
        }
    }
    Ok(())
}

/// Coordinate restriction: `out[j] = v[support[j]]`.
pub fn restrict(v: &[f64], support: &[usize]) -> Result<Vec<f64>> {
    validate_support(support, v.len())?;
    Ok(support.iter().map(|&i| v[i]).collect())
}

/// Inverse of [`restrict`]: embeds a restricted vector back into ambient
/// dimension `dim` with zeros off the support. The embedding is isometric.
pub fn embed(v: &[f64], support: &[usize], dim: usize) -> Result<Vec<f64>> {
    validate_support(support, dim)?;
    if v.len() != support.len() {
        return Err(Error::invalid(format!(
            "vector length {} does not match support size {}",
            v.len(),
            support.len()
        )));
    }
    let mut out = vec![0.0; dim];
    for (&idx, &x) in support.iter().zip(v) {
        out[idx] = x;
    }
    Ok(out)
}

/// FNV-1a, 64-bit. Used wherever byte-stable hashing is required
/// (std's hasher is not stable across releases).
pub struct Fnv1a(u64);

impl Fnv1a {
    pub fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn write_u64(&mut self, x: u64) {
        self.write(&x.to_le_bytes());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}
