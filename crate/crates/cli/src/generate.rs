//! Seeded random Bedford–McMullen definitions for test corpora.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sponge_dims::sponge::BmInput;
use sponge_dims::SpongeSpec;

/// Size limits for generated sponges. Bases are drawn from `2..=max_base`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpecLimits {
    pub max_dims: usize,
    pub max_base: u32,
    pub max_digits: usize,
}

impl Default for SpecLimits {
    fn default() -> Self {
        Self {
            max_dims: 4,
            max_base: 5,
            max_digits: 12,
        }
    }
}

/// One sponge with `2 <= |D| <= max_digits` distinct digits, coordinates in
/// random order (the constructor canonicalizes them).
pub fn random_input<R: Rng + ?Sized>(rng: &mut R, limits: SpecLimits) -> BmInput {
    let dims = rng.gen_range(1..=limits.max_dims.max(1));
    let bases: Vec<u32> = (0..dims)
        .map(|_| rng.gen_range(2..=limits.max_base.max(2)))
        .collect();
    let total: usize = bases.iter().map(|&n| n as usize).product();
    let count = rng.gen_range(2..=limits.max_digits.clamp(2, total));
    let mut codes = index::sample(rng, total, count).into_vec();
    codes.sort_unstable();
    let digits = codes
        .into_iter()
        .map(|mut code| {
            bases
                .iter()
                .map(|&n| {
                    let digit = (code % n as usize) as u32;
                    code /= n as usize;
                    digit
                })
                .collect()
        })
        .collect();
    BmInput { bases, digits }
}

/// `count` sponges from a single seeded stream.
pub fn random_specs(seed: u64, count: usize, limits: SpecLimits) -> Vec<SpongeSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            SpongeSpec::new(random_input(&mut rng, limits))
                .expect("generated digits are in range and distinct")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use sponge_dims::SymbolicSponge;

    #[test]
    fn respects_limits_and_seed() {
        let limits = SpecLimits {
            max_dims: 3,
            max_base: 3,
            max_digits: 5,
        };
        let specs = random_specs(7, 100, limits);
        for spec in &specs {
            assert!(spec.dims() <= 3);
            assert!(spec.bases().iter().all(|&n| (2..=3).contains(&n)));
            assert!((2..=5).contains(&spec.digits().len()));
        }
        let again = random_specs(7, 100, limits);
        assert!(specs
            .iter()
            .zip(&again)
            .all(|(a, b)| a.to_input() == b.to_input()));
        let other = random_specs(8, 100, limits);
        assert!(specs
            .iter()
            .zip(&other)
            .any(|(a, b)| a.to_input() != b.to_input()));
    }
}
