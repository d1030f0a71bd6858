//! Seeded randomness and the Monte Carlo samplers built on it.
//!
//! The generator is ChaCha8 (`rand_chacha`), whose output stream is fixed by
//! its seed and stream id on every platform. Uniform reals are built from the
//! top 53 bits of one `u64` draw, so each real costs exactly one draw.
//!
//! Seed splitting: a configuration seed `s` feeds parameter initialisation
//! with `s ^ 1` and batch sampling with `s ^ 2`. Parallel workers that need
//! private streams use [`SeededRng::with_stream`], which keeps the seed and
//! selects a distinct ChaCha stream.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{ensure, Result};

pub const INIT_STREAM_XOR: u64 = 1;
pub const SAMPLING_STREAM_XOR: u64 = 2;

#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 32-bit words consumed so far.
    pub fn word_pos(&self) -> u128 {
        self.inner.get_word_pos()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n` (rejection on the biased tail).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n) - 1;
        loop {
            let r = self.inner.next_u64();
            if r <= zone {
                return (r % n) as usize;
            }
        }
    }
}

/// `m` points uniformly distributed on the closed disk of radius `c`, by
/// inverse-CDF radius `c * sqrt(u)` and uniform angle (two draws per point).
pub fn sample_uniform_disk(rng: &mut SeededRng, c: f64, m: usize) -> Result<Vec<[f64; 2]>> {
    ensure!(c.is_finite() && c >= 0.0, "disk radius must be >= 0, got {c}");
    Ok((0..m)
        .map(|_| {
            let r = c * rng.uniform().sqrt();
            let theta = std::f64::consts::TAU * rng.uniform();
            let (s, co) = theta.sin_cos();
            let p = [r * co, r * s];
            // sin/cos round-off can push |p| a hair past r
            let norm = p[0].hypot(p[1]);
            if norm > c {
                [p[0] * c / norm, p[1] * c / norm]
            } else {
                p
            }
        })
        .collect())
}

/// `m` i.i.d. uniform draws on `[a, b]`.
pub fn sample_uniform_interval(rng: &mut SeededRng, a: f64, b: f64, m: usize) -> Result<Vec<f64>> {
    ensure!(a.is_finite() && b.is_finite() && a <= b, "interval needs a <= b, got [{a}, {b}]");
    Ok((0..m).map(|_| a + (b - a) * rng.uniform()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_disk() {
        let mut rng = SeededRng::new(3);
        assert_eq!(sample_uniform_disk(&mut rng, 0.0, 5).unwrap(), vec![[0.0, 0.0]; 5]);
        assert!(sample_uniform_disk(&mut rng, -1.0, 5).is_err());
        assert!(sample_uniform_disk(&mut rng, f64::NAN, 5).is_err());
    }

    #[test]
    fn disk_moments() {
        let mut rng = SeededRng::new(11);
        let pts = sample_uniform_disk(&mut rng, 5.0, 100_000).unwrap();
        assert!(pts.iter().all(|p| p[0].hypot(p[1]) <= 5.0));
        let mean_r = pts.iter().map(|p| p[0].hypot(p[1])).sum::<f64>() / pts.len() as f64;
        assert!((mean_r - 10.0 / 3.0).abs() < 0.01 * 10.0 / 3.0, "{mean_r}");
        let inner = pts.iter().filter(|p| p[0].hypot(p[1]) <= 2.5).count() as f64 / 1e5;
        assert!((inner - 0.25).abs() < 0.01 * 0.25, "{inner}");
    }

    #[test]
    fn interval_draws() {
        let mut rng = SeededRng::new(5);
        assert_eq!(sample_uniform_interval(&mut rng, 1.0, 1.0, 3).unwrap(), vec![1.0; 3]);
        assert!(sample_uniform_interval(&mut rng, 1.0, 0.0, 3).is_err());
        let xs = sample_uniform_interval(&mut rng, 0.0, 1.0, 100_000).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.5).abs() < 0.005);
        let hi = 1.3f64.ln();
        let taus = sample_uniform_interval(&mut rng, 0.0, hi, 10_000).unwrap();
        assert!(taus.iter().all(|&t| (0.0..0.26237).contains(&t)));
    }

    #[test]
    fn equal_seeds_give_identical_streams() {
        let mut a = SeededRng::new(42);
        let mut b = SeededRng::new(42);
        let da = sample_uniform_disk(&mut a, 2.0, 1000).unwrap();
        let db = sample_uniform_disk(&mut b, 2.0, 1000).unwrap();
        assert!(da.iter().zip(&db).all(|(p, q)| p[0].to_bits() == q[0].to_bits()
            && p[1].to_bits() == q[1].to_bits()));
        assert_eq!(a.word_pos(), b.word_pos());
        let mut c = SeededRng::with_stream(42, 1);
        assert_ne!(c.next_u64(), SeededRng::new(42).next_u64());
    }

    #[test]
    fn below_is_in_range() {
        let mut rng = SeededRng::new(1);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            seen[rng.below(7)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
