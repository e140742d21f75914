//! Seeded random streams.
//!
//! ChaCha8 keyed by a 64-bit seed with a 64-bit stream id: identical
//! (seed, stream) pairs reproduce identical draw sequences, and distinct
//! stream ids give statistically independent sequences. That is what lets
//! many runs share one experiment seed without coupling their randomness.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::vector::Vector;

const UNIFORM_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl std::fmt::Debug for RngStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RngStream")
            .field("seed", &self.seed)
            .field("stream", &self.stream)
            .finish_non_exhaustive()
    }
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream {
            seed,
            stream,
            rng,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Fresh stream for sub-task `substream`, deterministic in
    /// (seed, stream, substream) and starting from draw zero.
    pub fn derive(&self, substream: u64) -> RngStream {
        let mixed = self
            .stream
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(substream);
        RngStream::new(self.seed, mixed)
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * UNIFORM_SCALE
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Index in [0, n), multiply-shift reduction.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0);
        ((self.rng.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal via Box-Muller; the paired draw is cached.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let mut u1 = self.uniform();
        while u1 == 0.0 {
            u1 = self.uniform();
        }
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }

    pub fn standard_normal_vector(&mut self, dim: usize) -> Vector {
        Vector((0..dim).map(|_| self.normal()).collect())
    }

    /// Uniform point of the open ball of radius `radius` around `center`:
    /// Gaussian direction times `radius * u^(1/dim)`.
    pub fn ball_point(&mut self, center: &Vector, radius: f64) -> Vector {
        let dim = center.dim();
        let dir = loop {
            let g = self.standard_normal_vector(dim);
            if let Some(u) = g.normalized() {
                break u;
            }
        };
        let mut t = radius * self.uniform().powf(1.0 / dim as f64);
        if t >= radius {
            // keep strictly inside even when the radial draw rounds up
            t = radius * (1.0 - 1e-12);
        }
        center.add(&dir.scale(t))
    }

    /// Uniform weights on the probability simplex (normalized exponentials).
    pub fn simplex_weights(&mut self, n: usize) -> Vec<f64> {
        assert!(n > 0);
        loop {
            let draws: Vec<f64> = (0..n)
                .map(|_| {
                    let mut u = self.uniform();
                    while u == 0.0 {
                        u = self.uniform();
                    }
                    -u.ln()
                })
                .collect();
            let sum: f64 = draws.iter().sum();
            if sum > 0.0 && sum.is_finite() {
                return draws.iter().map(|d| d / sum).collect();
            }
        }
    }
}
