//! Deterministic random number generation.
//!
//! The generator is xoshiro256** with its 256-bit state expanded from a 64-bit
//! seed by SplitMix64. Child streams are seeded from `(seed, index)` alone, so
//! view `i` of a dataset draws the same numbers no matter how many other views
//! were generated before it or on which thread.
//!
//! Everything here is fixed-width integer arithmetic; the only floating-point
//! step is [`Rng::next_f64`], which takes the top 53 bits and scales by 2⁻⁵³.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function applied to `z`.
pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of child stream `index` under `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64_mix(seed ^ splitmix64_mix(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    seed: u64,
    s: [u64; 4],
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let mut s = [0u64; 4];
        for slot in &mut s {
            sm = sm.wrapping_add(GOLDEN_GAMMA);
            *slot = splitmix64_mix(sm);
        }
        // SplitMix64 never yields four zero words in a row, but keep the invariant explicit.
        if s == [0; 4] {
            s[0] = GOLDEN_GAMMA;
        }
        Rng { seed, s }
    }

    /// Independent child stream `index`; does not touch `self`'s state.
    pub fn derive(&self, index: u64) -> Rng {
        Rng::new(derive_seed(self.seed, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform on [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
