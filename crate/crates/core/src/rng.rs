//! Portable pseudorandom generator used everywhere seeds appear.
//!
//! Instances, message initializations, and local-search trajectories must be
//! bit-reproducible from a 64-bit seed on any platform, so the generator is
//! pinned here rather than borrowed from a library whose stream might change
//! between versions.
//!
//! State expansion: a 64-bit seed is stretched to 256 bits with SplitMix64,
//!   z = (s += 0x9E3779B97F4A7C15);
//!   z = (z ^ z >> 30) * 0xBF58476D1CE4E5B9;
//!   z = (z ^ z >> 27) * 0x94D049BB133111EB;
//!   output z ^ z >> 31.
//! Stream: xoshiro256++, output rotl(s0 + s3, 23) + s0 followed by the
//! linear state transition with shifts (17, 45).

#[derive(Clone, Debug)]
pub struct Rng {
    s: [u64; 4],
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng { s }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform float in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn next_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Uniform integer in [0, bound), unbiased via rejection of the modulo
    /// overhang. `bound` must be nonzero.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % bound;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// `k` distinct values from [0, n), in draw order.
    pub fn distinct(&mut self, n: u64, k: usize, out: &mut Vec<u64>) {
        debug_assert!(k as u64 <= n);
        out.clear();
        while out.len() < k {
            let v = self.below(n);
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
}

/// Deterministic combination of seed components (base seeds, tags, indices)
/// into a derived stream seed. Folds each part through SplitMix64.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut state = GOLDEN;
    let mut acc = 0u64;
    for &p in parts {
        state ^= p;
        acc = splitmix64(&mut state) ^ acc.rotate_left(29);
    }
    acc
}
