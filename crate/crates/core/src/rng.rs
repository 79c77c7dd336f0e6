//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream whose key is
//! derived from `(seed, purpose tag, stream index)`. Streams are independent
//! by construction, so parallel trials never share state, and the same
//! triple always reproduces the same sequence.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Dedicated stream for `(seed, purpose, index)`.
pub fn stream(seed: u64, purpose: &str, index: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update([0x1f]);
    h.update(purpose.as_bytes());
    h.update([0x1f]);
    h.update(index.to_le_bytes());
    let key: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(key)
}

/// Exact categorical sampler over rational weights (weights must sum to 1).
///
/// A draw consumes one `u128` and compares it against pre-scaled cumulative
/// numerators, so there is no floating-point rounding anywhere. Away from the
/// (probability ~2^-128) boundary draws, a u128 floor table decides directly.
pub struct CategoricalSampler {
    // cumulative numerators over the common denominator, scaled by 2^128
    bounds: Vec<BigUint>,
    // floor(bound / denom), clamped to u128
    floors: Vec<u128>,
    denom: BigUint,
}

impl CategoricalSampler {
    pub fn new(weights: &[BigRational]) -> Self {
        let mut denom = BigUint::from(1u8);
        for w in weights {
            let d = w.denom().magnitude();
            denom = num_integer::lcm(denom, d.clone());
        }
        let mut acc = BigUint::zero();
        let mut bounds = Vec::with_capacity(weights.len());
        let mut floors = Vec::with_capacity(weights.len());
        for w in weights {
            let num = w.numer().magnitude() * (&denom / w.denom().magnitude());
            acc += num;
            let bound = &acc << 128;
            let floor: u128 = u128::try_from(&bound / &denom).unwrap_or(u128::MAX);
            bounds.push(bound);
            floors.push(floor);
        }
        CategoricalSampler { bounds, floors, denom }
    }

    pub fn draw(&self, rng: &mut impl rand::Rng) -> usize {
        let k: u128 = rng.random();
        for (i, &f) in self.floors.iter().enumerate() {
            if k < f {
                return i;
            }
            if k == f {
                // boundary: settle exactly
                let lhs = BigUint::from(k) * &self.denom;
                if lhs < self.bounds[i] {
                    return i;
                }
            }
        }
        self.bounds.len() - 1
    }
}
