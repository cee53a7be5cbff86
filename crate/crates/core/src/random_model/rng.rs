//! Counter-style keyed streams: every coupling is drawn from its own
//! generator seeded by a hash of `(seed, replica, site)`, so values do not
//! depend on evaluation order or on which other sites are sampled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn site_key(seed: u64, replica: u64, site: &[i64]) -> u64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ replica);
    h = splitmix64(h ^ site.len() as u64);
    for &c in site {
        h = splitmix64(h ^ c as u64);
    }
    h
}

pub fn site_rng(seed: u64, replica: u64, site: &[i64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(site_key(seed, replica, site))
}

/// Generator for replica-level auxiliary draws (start vectors and the like).
pub fn replica_rng(seed: u64, replica: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(splitmix64(seed ^ 0x5a5a_0000_0000_0000) ^ replica) ^ stream)
}
