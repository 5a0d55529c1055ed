//! Portable random streams for trace synthesis.
//!
//! Every trace draws from its own stream, so synthesis order and thread
//! count cannot change the output. The construction, for reimplementation:
//!
//! 1. `mix(x) = SplitMix64 { state: x }.next_u64()`
//! 2. `stream = mix(mix(mix(seed) ^ cell) ^ trace)`
//! 3. generator = xoshiro256++ seeded by four successive SplitMix64 outputs
//!    starting from state `stream` (`Xoshiro256PlusPlus::seed_from_u64`).
//!
//! Uniform doubles are `(next_u64 >> 11) * 2^-53`. Bytes are `next_u64 >> 56`.
//! Gaussians use the Marsaglia polar method: draw `u = 2U - 1`, `v = 2U - 1`
//! (in that order) until `0 < s = u^2 + v^2 < 1`, then return
//! `u * sqrt(-2 ln s / s)` and keep `v * sqrt(-2 ln s / s)` for the next call.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

fn mix(x: u64) -> u64 {
    SplitMix64::seed_from_u64(x).next_u64()
}

pub fn stream_seed(seed: u64, cell: u64, trace: u64) -> u64 {
    mix(mix(mix(seed) ^ cell) ^ trace)
}

#[derive(Debug, Clone)]
pub struct TraceRng {
    inner: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl TraceRng {
    pub fn for_stream(seed: u64, cell: u64, trace: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(stream_seed(seed, cell, trace)),
            spare: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn byte(&mut self) -> u8 {
        (self.next_u64() >> 56) as u8
    }

    /// Standard normal deviate.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * m);
                return u * m;
            }
        }
    }
}
