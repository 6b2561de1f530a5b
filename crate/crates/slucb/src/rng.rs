//! Deterministic random stream used by every simulation.
//!
//! The generator is pinned to ChaCha8 keyed through `seed_from_u64`
//! (SplitMix64 expansion), so a given seed produces the same draw
//! sequence on every platform and in every rerun of the same build.
//! Streams are single-owner: one stream per replication, never shared.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Seeded random stream with a pinned algorithm (ChaCha8).
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Seed this stream was created with; recorded in run metadata.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform draw in `[-half_width, half_width]`.
    pub fn uniform_symmetric(&mut self, half_width: f64) -> f64 {
        (2.0 * self.uniform() - 1.0) * half_width
    }

    /// Fair sign: +1.0 or -1.0.
    pub fn sign(&mut self) -> f64 {
        if self.rng.gen::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform integer in `[0, bound)`.
    pub fn index(&mut self, bound: usize) -> usize {
        self.rng.gen_range(0..bound)
    }

    /// Uniform point on the unit sphere of dimension `dim`.
    pub fn unit_sphere(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| self.standard_normal()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        // Reproducibility contract: bitwise-identical first 1e6 draws.
        let mut a = RngStream::new(0x5eed);
        let mut b = RngStream::new(0x5eed);
        for _ in 0..1_000_000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn different_seeds_diverge() {
        let mut a = RngStream::new(1);
        let mut b = RngStream::new(2);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert!(same < 4);
    }

    #[test]
    fn uniform_symmetric_respects_half_width() {
        let mut rng = RngStream::new(9);
        for _ in 0..10_000 {
            let x = rng.uniform_symmetric(0.25);
            assert!(x.abs() <= 0.25);
        }
    }

    #[test]
    fn unit_sphere_has_unit_norm() {
        let mut rng = RngStream::new(3);
        for dim in [1, 2, 7] {
            let v = rng.unit_sphere(dim);
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}
