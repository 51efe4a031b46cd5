//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit [`ChaCha20Rng`]. Independent
//! sub-streams (replications, chains) get seeds from [`derive_seed`], a
//! SplitMix64 mix of the master seed and the stream index, so results do not
//! depend on the order or thread in which streams run.

pub use rand_chacha::ChaCha20Rng;
use rand::SeedableRng;

/// SplitMix64 finalizer applied to `master + (index + 1) · golden gamma`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn substream(master: u64, index: u64) -> ChaCha20Rng {
    rng_from_seed(derive_seed(master, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn splitmix_reference_values() {
        // SplitMix64 with state 0: first outputs of the reference generator
        assert_eq!(derive_seed(0, 0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(derive_seed(0, 1), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn streams_differ_and_repeat() {
        let a: u64 = substream(7, 0).random();
        let b: u64 = substream(7, 1).random();
        let c: u64 = substream(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
