//! Small deterministic PRNG (SplitMix64).
//!
//! Seeded runs must be byte-reproducible across platforms, so the crate
//! carries its own generator instead of depending on an external one.

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [-1, 1).
    pub fn next_signed(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }

    pub fn next_complex(&mut self) -> Complex64 {
        Complex64::new(self.next_signed(), self.next_signed())
    }

    /// Uniform integer in [0, n).
    pub fn next_range(&mut self, n: u64) -> u64 {
        // Bias is negligible for the small n used here.
        self.next_u64() % n.max(1)
    }

    /// Small signed integer in [-bound, bound].
    pub fn next_small_int(&mut self, bound: i64) -> i64 {
        (self.next_range((2 * bound + 1) as u64) as i64) - bound
    }
}
