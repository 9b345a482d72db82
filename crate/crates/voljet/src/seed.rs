//! Deterministic seed derivation.
//!
//! Per-epoch shuffle seeds and per-model sweep seeds are derived from a
//! master seed with SplitMix64 (Steele, Lea & Flood 2014), so reruns are
//! reproducible without storing permutations.

/// One SplitMix64 output step.
#[inline]
pub fn splitmix64(state: &mut u64) {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
}

/// The SplitMix64 finalizer: a 64-bit bijective mix.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Seed for epoch `epoch` of a run with `master` seed.
pub fn epoch_seed(master: u64, epoch: u64) -> u64 {
    mix64(mix64(master) ^ epoch.wrapping_mul(0x9e3779b97f4a7c15))
}

/// Seed for a named model in a sweep: FNV-1a over the name, mixed with the
/// master seed. Adding or removing models never perturbs other runs.
pub fn model_seed(master: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in name.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    mix64(mix64(master) ^ h)
}

/// Tiny deterministic generator for shuffling, SplitMix64-based.
pub struct SplitMix64Rng {
    state: u64,
}

impl SplitMix64Rng {
    pub fn new(seed: u64) -> Self {
        SplitMix64Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state);
        mix64(self.state)
    }

    /// Uniform in `0..bound` via rejection of the biased tail.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }
}

/// In-place Fisher–Yates shuffle driven by a fixed seed.
pub fn shuffle<T>(items: &mut [T], seed: u64) {
    let mut rng = SplitMix64Rng::new(seed);
    for i in (1..items.len()).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffle_is_deterministic_and_a_permutation() {
        let mut a: Vec<u32> = (0..100).collect();
        let mut b: Vec<u32> = (0..100).collect();
        shuffle(&mut a, 42);
        shuffle(&mut b, 42);
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
        let mut c: Vec<u32> = (0..100).collect();
        shuffle(&mut c, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn model_seed_independent_of_other_models() {
        let s1 = model_seed(7, "relu2-128x1");
        let s2 = model_seed(7, "relu-64x3");
        assert_ne!(s1, s2);
        assert_eq!(s1, model_seed(7, "relu2-128x1"));
    }
}
