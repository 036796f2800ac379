//! Reproducible random streams.
//!
//! Every Monte Carlo task draws from a ChaCha8 generator seeded with the
//! run's single 64-bit seed and a fixed stream number, so results do not
//! depend on thread count or scheduling:
//!
//! | stream                | use                                  |
//! |-----------------------|--------------------------------------|
//! | [`STREAM_DESIGN`]     | simulated design matrix              |
//! | [`STREAM_LAMBDA`]     | expectation rule for the penalty     |
//! | [`STREAM_SPLIT`]      | data-splitting permutation           |
//! | `STREAM_REPLICATION + r` | noise (and splits) of replication `r` |

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const STREAM_DESIGN: u64 = 1;
pub const STREAM_LAMBDA: u64 = 2;
pub const STREAM_SPLIT: u64 = 3;
pub const STREAM_REPLICATION: u64 = 1 << 32;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn normal_vector<R: rand::Rng>(rng: &mut R, len: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(len, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        scale * z
    })
}

/// i.i.d. N(0, 1) matrix filled column by column.
pub fn normal_matrix<R: rand::Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}
