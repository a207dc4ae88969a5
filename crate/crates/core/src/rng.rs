//! Portable seeded pseudo-random generator.
//!
//! Every random draw in the crate goes through [`XorShift64Star`] so that
//! graphs and natural drives can be reproduced bit-exactly by other
//! implementations. The algorithm is fully specified here:
//!
//! * **Seeding**: the user seed `s` is passed through one SplitMix64 step,
//!   `z = s + 0x9E3779B97F4A7C15; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//!   z = (z ^ (z >> 27)) * 0x94D049BB133111EB; z ^= z >> 31` (wrapping
//!   arithmetic). A zero result is replaced by `0x9E3779B97F4A7C15`.
//! * **Step** (xorshift64*, shifts 12/25/27): `x ^= x >> 12; x ^= x << 25;
//!   x ^= x >> 27; output = x * 0x2545F4914F6CDD1D` (wrapping).
//! * **Uniform float** in `[0, 1)`: `(output >> 11) * 2^-53`.
//! * **Bounded integer** in `[0, bound)`: draw `output`, let `r = output % bound`;
//!   accept when `output - r <= u64::MAX - (bound - 1)`, otherwise redraw.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// xorshift64* generator with SplitMix64 seeding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        let mut z = seed.wrapping_add(GOLDEN_GAMMA);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        if z == 0 {
            z = GOLDEN_GAMMA;
        }
        Self { state: z }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Unbiased integer in `[0, bound)`. Panics when `bound == 0`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        loop {
            let x = self.next_u64();
            let r = x % bound;
            if x - r <= u64::MAX - (bound - 1) {
                return r;
            }
        }
    }

    /// Draws a value in `[0, 1)`; shorthand for Bernoulli trials.
    #[inline]
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}
