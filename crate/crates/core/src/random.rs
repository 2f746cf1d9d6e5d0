//! Seeded generators of small exact random values.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::number::{rat, GaussRational, Rational};
use crate::tensor::{IndexSlot, IndexedTensor};

/// Deterministic RNG for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A rational with numerator in `-5..=5` and denominator in `1..=4`.
pub fn small_rational<R: Rng>(r: &mut R) -> Rational {
    rat(r.gen_range(-5..=5), r.gen_range(1..=4))
}

/// A Gaussian rational with small parts.
pub fn small_gauss<R: Rng>(r: &mut R) -> GaussRational {
    GaussRational::new(small_rational(r), small_rational(r))
}

/// A dense random tensor with the given slots.
pub fn random_tensor<R: Rng>(r: &mut R, n: usize, slots: Vec<IndexSlot>) -> IndexedTensor {
    let rank = slots.len();
    let items: Vec<_> = IndexedTensor::all_indices(n, rank).map(|k| (k, small_gauss(r))).collect();
    IndexedTensor::from_entries(n, slots, items).expect("indices in range")
}
