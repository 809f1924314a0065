//! Per-sample random streams.
//!
//! Every sample draws from its own xoshiro256** generator whose state is the
//! SplitMix64 expansion of `global_seed ^ (sample_index * 0x9E3779B97F4A7C15)`.
//! No state is shared between samples, so sample `i` is the same whether it
//! is generated alone, after `0..i`, or on any worker thread.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Where a stream came from; recorded so any stream can be re-derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamOrigin {
    pub global_seed: u64,
    pub sample_index: u64,
}

#[derive(Debug, Clone)]
pub struct RngStream {
    origin: StreamOrigin,
    inner: Xoshiro256StarStar,
}

/// Derives the independent stream for `(global_seed, sample_index)`.
pub fn derive_stream(global_seed: u64, sample_index: u64) -> RngStream {
    RngStream::derive(global_seed, sample_index)
}

impl RngStream {
    pub fn derive(global_seed: u64, sample_index: u64) -> Self {
        let seed = global_seed ^ sample_index.wrapping_mul(GOLDEN_GAMMA);
        Self {
            origin: StreamOrigin {
                global_seed,
                sample_index,
            },
            inner: Xoshiro256StarStar::seed_from_u64(seed),
        }
    }

    pub fn origin(&self) -> StreamOrigin {
        self.origin
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` from the top 53 bits of one draw.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform real in `[low, high)`. One draw.
    pub fn uniform_f64(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.next_f64()
    }

    /// Uniform integer in the inclusive range `[low, high]` by rejection.
    ///
    /// Panics if `low > high`.
    pub fn uniform_int(&mut self, low: u64, high: u64) -> u64 {
        assert!(low <= high, "empty integer range [{low}, {high}]");
        let span = high - low;
        if span == u64::MAX {
            return self.next_u64();
        }
        let range = span + 1;
        // Largest multiple of `range` representable; draws at or above it are rejected.
        let zone = u64::MAX - (u64::MAX % range + 1) % range;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return low + v % range;
            }
        }
    }

    pub fn uniform_index(&mut self, len: usize) -> usize {
        self.uniform_int(0, len as u64 - 1) as usize
    }

    /// Fisher-Yates shuffle in place.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.uniform_int(0, i as u64) as usize;
            items.swap(i, j);
        }
    }

    /// `k` distinct elements of `pool`, in draw order (partial Fisher-Yates).
    pub fn choose_distinct<T: Copy>(&mut self, pool: &[T], k: usize) -> Vec<T> {
        assert!(k <= pool.len(), "cannot choose {k} of {}", pool.len());
        let mut scratch = pool.to_vec();
        for i in 0..k {
            let j = self.uniform_int(i as u64, (scratch.len() - 1) as u64) as usize;
            scratch.swap(i, j);
        }
        scratch.truncate(k);
        scratch
    }

    /// A permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(mut s: RngStream, n: usize) -> Vec<u64> {
        (0..n).map(|_| s.next_u64()).collect()
    }

    #[test]
    fn same_origin_same_sequence() {
        assert_eq!(
            draws(derive_stream(42, 0), 64),
            draws(derive_stream(42, 0), 64)
        );
    }

    #[test]
    fn neighbouring_indices_differ_on_first_draw() {
        let a = derive_stream(42, 0).next_u64();
        let b = derive_stream(42, 1).next_u64();
        assert_ne!(a, b);
    }

    #[test]
    fn per_index_derivation_has_no_shared_state() {
        let mut earlier = Vec::new();
        for i in 0..7 {
            earlier.push(draws(derive_stream(42, i), 8));
        }
        assert_eq!(
            draws(derive_stream(42, 7), 32),
            draws(derive_stream(42, 7), 32)
        );
        assert!(earlier.iter().all(|e| *e != draws(derive_stream(42, 7), 8)));
    }

    #[test]
    fn seed_expansion_matches_splitmix_of_mixed_seed() {
        let mixed = 42u64 ^ 3u64.wrapping_mul(GOLDEN_GAMMA);
        let mut direct = Xoshiro256StarStar::seed_from_u64(mixed);
        let mut s = derive_stream(42, 3);
        for _ in 0..16 {
            assert_eq!(s.next_u64(), direct.next_u64());
        }
    }

    #[test]
    fn uniform_int_stays_in_range_and_hits_endpoints() {
        let mut s = derive_stream(1, 1);
        let mut seen = [false; 5];
        for _ in 0..1000 {
            let v = s.uniform_int(3, 7);
            assert!((3..=7).contains(&v));
            seen[(v - 3) as usize] = true;
        }
        assert!(seen.iter().all(|&b| b));
        assert_eq!(s.uniform_int(9, 9), 9);
    }

    #[test]
    fn uniform_f64_half_open() {
        let mut s = derive_stream(5, 0);
        for _ in 0..10_000 {
            let v = s.uniform_f64(28.0, 228.0);
            assert!((28.0..228.0).contains(&v));
        }
    }

    #[test]
    fn choose_distinct_is_distinct() {
        let mut s = derive_stream(9, 9);
        let pool: Vec<usize> = (0..40).collect();
        let mut c = s.choose_distinct(&pool, 32);
        c.sort_unstable();
        c.dedup();
        assert_eq!(c.len(), 32);
    }
}
