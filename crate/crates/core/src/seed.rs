//! Deterministic, platform-independent seeding and uniform deviates.
//!
//! Every stochastic feature derives an independent stream seed from a single
//! master seed through splitmix64 finalizer rounds combined with an FNV-1a
//! hash of an experiment tag:
//!
//! ```text
//! stream = mix(mix(mix(mix(master) ^ fnv1a64(tag)) ^ r_index) ^ sample_index)
//! ```
//!
//! Streams are therefore a pure function of (master seed, tag, r index,
//! sample index) — results never depend on thread count or scheduling order.
//! The generator itself is splitmix64; uniform doubles take the top 53 bits.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One splitmix64 round: increment by the golden-ratio constant, then the
/// standard avalanche finalizer.
pub fn mix(z: u64) -> u64 {
    let mut z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a 64-bit hash, used to fold experiment tags into seed material.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derives the stream seed for one ensemble sample.
pub fn derive_stream_seed(master: u64, tag: &str, r_index: u64, sample_index: u64) -> u64 {
    mix(mix(mix(mix(master) ^ fnv1a64(tag.as_bytes())) ^ r_index) ^ sample_index)
}

/// splitmix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = mix(self.state);
        self.state = self.state.wrapping_add(GOLDEN);
        out
    }

    /// Uniform double in [0, 1) with 53 random bits.
    pub fn uniform01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in [-1, 1).
    pub fn uniform_pm1(&mut self) -> f64 {
        2.0 * self.uniform01() - 1.0
    }
}
