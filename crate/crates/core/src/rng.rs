//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(seed, stream, iteration, particle, axis)`.
//! Nothing is advanced or shared between draws, so particles can be updated in
//! any order (or on any thread) and still see exactly the same noise.

use statrs::function::erf::erfc_inv;

/// Logical stream a draw belongs to. Distinct streams never share keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Initial particle positions.
    Init,
    /// Diffusion noise of the consensus term.
    Noise,
    /// Second, independent noise of the personal-best term (memory variant).
    MemoryNoise,
    /// Mini-batch permutations.
    Batch,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Init => 0x696e_6974_0000_0001,
            Stream::Noise => 0x6e6f_6973_0000_0002,
            Stream::MemoryNoise => 0x6d65_6d6f_0000_0003,
            Stream::Batch => 0x6261_7463_0000_0004,
        }
    }
}

/// Stafford's "mix13" finalizer, as used by SplitMix64. A bijection on `u64`.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn absorb(state: u64, word: u64, salt: u64) -> u64 {
    mix64(state ^ mix64(word.wrapping_add(salt)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// 64 random bits for the given key.
    pub fn bits(&self, stream: Stream, iteration: u64, particle: u64, axis: u64) -> u64 {
        let mut h = mix64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        h = absorb(h, stream.tag(), 0x243f_6a88_85a3_08d3);
        h = absorb(h, iteration, 0x1319_8a2e_0370_7344);
        h = absorb(h, particle, 0xa409_3822_299f_31d0);
        absorb(h, axis, 0x082e_fa98_ec4e_6c89)
    }

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    pub fn uniform(&self, stream: Stream, iteration: u64, particle: u64, axis: u64) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        let b = self.bits(stream, iteration, particle, axis) >> 11;
        (b as f64 + 0.5) * SCALE
    }

    /// Standard normal via the inverse CDF of [`CounterRng::uniform`].
    pub fn normal(&self, stream: Stream, iteration: u64, particle: u64, axis: u64) -> f64 {
        let u = self.uniform(stream, iteration, particle, axis);
        -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
    }

    /// Uniform integer in `0..n` (`n > 0`), by multiply-high reduction.
    pub fn below(&self, n: u64, stream: Stream, iteration: u64, particle: u64, axis: u64) -> u64 {
        debug_assert!(n > 0);
        let b = self.bits(stream, iteration, particle, axis);
        ((b as u128 * n as u128) >> 64) as u64
    }
}

/// The diffusion draw ξ for `(iteration, particle, axis)` of a run seeded with `seed`.
pub fn rng_draw(seed: u64, iteration: u64, particle: u64, axis: u64) -> f64 {
    CounterRng::new(seed).normal(Stream::Noise, iteration, particle, axis)
}
