//! Seeded, stream-splittable random numbers for replicas.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const U_MIN: f64 = 1.0 / (1u64 << 53) as f64;
const U_MAX: f64 = 1.0 - U_MIN;

/// ChaCha8 keyed by a master seed, with the replica index as the stream id.
/// ChaCha supports 2⁶⁴ non-overlapping streams per key.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw clamped to `[2⁻⁵³, 1 − 2⁻⁵³]`.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        self.inner.random::<f64>().clamp(U_MIN, U_MAX)
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Mix a row index into a master seed (splitmix64 finalizer), for studies
/// that run several independent batches under one seed.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
