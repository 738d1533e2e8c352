//! Deterministic pseudorandom numbers for component sampling.
//!
//! All randomness in this crate comes from SplitMix64, a 64-bit generator
//! with a single word of state: each draw advances the state by the constant
//! 0x9E3779B97F4A7C15 and scrambles it with two xor-shift-multiply rounds
//! (constants 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB, final shift 31).
//! The generator is fully specified by these constants, so runs are
//! bit-reproducible across platforms and independent implementations.

/// SplitMix64 generator. One `u64` of state, period 2^64.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform double in [0, 1) built from the top 53 bits of one draw.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in [0, n) by modulo reduction of one 64-bit draw.
    /// The modulo bias is at most n/2^64, which is negligible for the
    /// dataset sizes this crate targets.
    pub fn next_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "next_index needs a nonempty range");
        (self.next_u64() % n as u64) as usize
    }
}
