//! Seeded random streams.
//!
//! Every random consumer gets its own ChaCha8 stream, addressed by a
//! `(master seed, label, stream id)` triple. The label is folded into the key
//! with FNV-1a followed by a splitmix64 finalizer; the id selects the ChaCha
//! stream, so streams never overlap and results do not depend on scheduling.
//!
//! Gaussian variates come from `rand_distr::StandardNormal` (ziggurat), which
//! is a fixed deterministic transform of the underlying stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed from a master seed and a label.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(master ^ splitmix64(h))
}

/// Independent stream `id` under `label`.
pub fn stream(master: u64, label: &str, id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master, label));
    rng.set_stream(id);
    rng
}

#[inline]
pub fn normal(rng: &mut SimRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn fill_normal(rng: &mut SimRng, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}
