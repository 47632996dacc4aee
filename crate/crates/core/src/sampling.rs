//! Deterministic quasi-random sampling.
//!
//! Points come from a Halton sequence with a Cranley–Patterson shift drawn
//! from a ChaCha generator. Each check derives its own seed from the run seed
//! and the check name, so results do not depend on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Largest supported sample dimension.
pub const MAX_SAMPLE_DIM: usize = PRIMES.len();

/// Radical inverse of `index` in `base`.
pub fn halton(mut index: u64, base: u32) -> f64 {
    let b = u64::from(base);
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % b) as f64;
        index /= b;
    }
    r
}

/// Seed for one named check.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("32-byte digest"))
}

/// Generator for ad-hoc random data.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` points of the box `[lower, upper]`.
pub fn sample_box(lower: &[f64], upper: &[f64], count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let dim = lower.len();
    if upper.len() != dim {
        return Err(Error::mismatch("sample upper bound", dim, upper.len()));
    }
    if dim == 0 || dim > MAX_SAMPLE_DIM {
        return Err(Error::Validation(format!(
            "sample dimension must be between 1 and {MAX_SAMPLE_DIM}, got {dim}"
        )));
    }
    for (lo, hi) in lower.iter().zip(upper) {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Validation(format!("bad sample interval [{lo}, {hi}]")));
        }
    }
    let mut r = rng(seed);
    let shift: Vec<f64> = (0..dim).map(|_| r.random::<f64>()).collect();
    Ok((0..count as u64)
        .map(|i| {
            (0..dim)
                .map(|k| {
                    let u = (halton(i + 1, PRIMES[k]) + shift[k]).fract();
                    lower[k] + u * (upper[k] - lower[k])
                })
                .collect()
        })
        .collect())
}
