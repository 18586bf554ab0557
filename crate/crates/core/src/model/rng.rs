//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by a
//! `(master_seed, stream_id)` pair: the master seed selects the key and the
//! stream id selects ChaCha's 64-bit stream, so distinct ids give
//! independent sequences and a given pair replays bit-for-bit.
//!
//! Stream ids for derived work (sweep cells, trials, Monte Carlo chunks) are
//! computed with [`stream_hash`]: FNV-1a over the little-endian bytes of the
//! parts, followed by the SplitMix64 finalizer. The hash is fixed; changing it
//! changes every experiment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive 64-bit hash of a sequence of words.
pub fn stream_hash(parts: &[u64]) -> u64 {
    let mut h = FNV_OFFSET;
    for p in parts {
        for b in p.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    splitmix64(h)
}

/// Hash of a string label, for mixing names into stream ids.
pub fn label_hash(label: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Child seed for a sub-task identified by `parts`.
    pub fn derive(&self, parts: &[u64]) -> Self {
        let mut all = Vec::with_capacity(parts.len() + 1);
        all.push(self.stream_id);
        all.extend_from_slice(parts);
        Self {
            master_seed: self.master_seed,
            stream_id: stream_hash(&all),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn same_pair_same_stream() {
        let a: Vec<u64> = {
            let mut r = RngSeed::new(7, 11).rng();
            (0..16).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RngSeed::new(7, 11).rng();
            (0..16).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ() {
        let mut r1 = RngSeed::new(7, 11).rng();
        let mut r2 = RngSeed::new(7, 12).rng();
        let mut r3 = RngSeed::new(8, 11).rng();
        let (a, b, c) = (r1.next_u64(), r2.next_u64(), r3.next_u64());
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn hash_is_order_sensitive_and_fixed() {
        assert_ne!(stream_hash(&[1, 2]), stream_hash(&[2, 1]));
        assert_eq!(stream_hash(&[1, 2]), stream_hash(&[1, 2]));
        // frozen so that accidental changes to the hash are caught
        assert_eq!(stream_hash(&[]), splitmix64(FNV_OFFSET));
    }

    #[test]
    fn derive_depends_on_parent() {
        let s = RngSeed::new(1, 0);
        assert_ne!(s.derive(&[3]).stream_id, s.derive(&[4]).stream_id);
        assert_ne!(s.derive(&[3]).stream_id, RngSeed::new(1, 9).derive(&[3]).stream_id);
        assert_eq!(s.derive(&[3]).master_seed, 1);
    }
}
