//! Small deterministic PRNGs.
//!
//! Reproducibility of a run given its seed is part of the solver contract, so
//! we ship fixed generators instead of depending on an external crate whose
//! stream might change between versions:
//!
//! * [`split_mix64`] — the SplitMix64 finalizer, used as a counter-based
//!   generator: draw `k` is a pure function of `(seed, k)`.
//! * [`Rng64`] — xoshiro256** for sequential sampling (instance generation,
//!   Gaussian draws).

/// SplitMix64 output for the `k`-th element of the stream with the given seed.
#[inline]
pub fn split_mix64(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(k.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Maps a 64-bit word to `0..n` by the widening-multiply trick.
///
/// The modulo bias is below 2^-32 for any n that fits in u32, which is far
/// under what any statistical check here can resolve.
#[inline]
pub fn bounded(word: u64, n: usize) -> usize {
    debug_assert!(n > 0);
    (((word as u128) * (n as u128)) >> 64) as usize
}

/// xoshiro256** seeded through SplitMix64.
#[derive(Debug, Clone)]
pub struct Rng64 {
    s: [u64; 4],
    spare_normal: Option<f64>,
}

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        let mut s = [0u64; 4];
        for (i, w) in s.iter_mut().enumerate() {
            *w = split_mix64(seed, i as u64);
        }
        Rng64 {
            s,
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in 0..n.
    pub fn next_index(&mut self, n: usize) -> usize {
        bounded(self.next_u64(), n)
    }

    /// Standard normal draw (Box-Muller, caching the second variate).
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // u1 in (0,1] so the log is finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = crate::math::sqrt(-2.0 * crate::math::ln(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare_normal = Some(r * crate::math::sin(theta));
        r * crate::math::cos(theta)
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.next_normal();
        }
    }
}
