use super::ApproximateCube;
use crate::dimension::MoranExponents;
use crate::rational::{self, Rational};
use crate::sponge::{Digit, LgSponge, SpongeSpec, SymbolicSponge};
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt::Debug;

/// Number type a Bernoulli measure is evaluated in: exact rationals for the
/// partial coordinate uniform measure, floats once Moran exponents appear.
pub trait Probability: Clone + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn ln(&self) -> f64;
    fn to_f64(&self) -> f64;
}

impl Probability for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn ln(&self) -> f64 {
        rational::ln(self)
    }
    fn to_f64(&self) -> f64 {
        rational::to_f64(self)
    }
}

impl Probability for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// A Bernoulli measure on `D^N` described cluster by cluster:
/// `p_i = prod_l p(block_l(i) | prefix_{l-1}(i))`.
#[derive(Debug, Clone)]
pub struct BernoulliWeights<P> {
    conditionals: Vec<BTreeMap<Digit, BTreeMap<Digit, P>>>,
    by_symbol: Vec<Vec<P>>,
    weights: Vec<P>,
}

impl<P: Probability> BernoulliWeights<P> {
    /// Builds the measure from `conditional(level, prefix, block)`.
    pub fn from_conditionals<S, F>(sponge: &S, mut conditional: F) -> Self
    where
        S: SymbolicSponge + ?Sized,
        F: FnMut(usize, &Digit, &Digit) -> P,
    {
        let tree = sponge.digit_tree();
        let conditionals: Vec<BTreeMap<Digit, BTreeMap<Digit, P>>> = (0..tree.level_count())
            .map(|level| {
                tree.level(level)
                    .iter()
                    .map(|(prefix, blocks)| {
                        let row = blocks
                            .iter()
                            .map(|b| (b.clone(), conditional(level, prefix, b)))
                            .collect();
                        (prefix.clone(), row)
                    })
                    .collect()
            })
            .collect();
        let clusters = sponge.clusters();
        let by_symbol: Vec<Vec<P>> = sponge
            .digits()
            .iter()
            .map(|digit| {
                (0..clusters.count())
                    .map(|l| {
                        conditionals[l][&digit[..clusters.start(l)]][&digit[clusters.range(l)]]
                            .clone()
                    })
                    .collect()
            })
            .collect();
        let weights = by_symbol
            .iter()
            .map(|row| row.iter().fold(P::one(), |acc, p| acc.mul(p)))
            .collect();
        Self {
            conditionals,
            by_symbol,
            weights,
        }
    }

    /// `p(block | prefix)` where `prefix` covers the first `level` clusters.
    pub fn conditional(&self, level: usize, prefix: &[u32], block: &[u32]) -> Option<&P> {
        self.conditionals.get(level)?.get(prefix)?.get(block)
    }

    /// Conditionals of one symbol, one per cluster.
    pub fn symbol_conditionals(&self, symbol: usize) -> &[P] {
        &self.by_symbol[symbol]
    }

    /// `p_i`, indexed like the sponge's digit list.
    pub fn weights(&self) -> &[P] {
        &self.weights
    }

    pub fn total(&self) -> P {
        self.weights.iter().fold(P::zero(), |acc, p| acc.add(p))
    }

    /// `ln p(. | .)` per symbol and cluster.
    pub fn ln_table(&self) -> Vec<Vec<f64>> {
        self.by_symbol
            .iter()
            .map(|row| row.iter().map(P::ln).collect())
            .collect()
    }
}

/// `p(block | prefix) = 1 / N(prefix)`: uniform over the next cluster's
/// choices given everything before it.
pub fn pcu_weights(spec: &SpongeSpec) -> BernoulliWeights<Rational> {
    let tree = spec.digit_tree();
    BernoulliWeights::from_conditionals(spec, |level, prefix, _| {
        let count = tree.level(level)[prefix].len();
        rational::ratio(1, count as i64)
    })
}

/// `p(block | prefix) = c(prefix, block)^{s(prefix)}`, the measure of full
/// dimension on every fibre.
pub fn lg_weights(sponge: &LgSponge, exponents: &MoranExponents) -> BernoulliWeights<f64> {
    BernoulliWeights::from_conditionals(sponge, |level, prefix, block| {
        let full = [prefix.as_slice(), block.as_slice()].concat();
        let c = rational::to_f64(&sponge.map(&full).expect("prefix of a digit").0);
        c.powf(exponents.by_level[level][prefix].exponent)
    })
}

/// `mu(Q) = prod_j prod_{l : k_l* > j} p(block_l(sigma^j omega) | prefix_{l-1}(sigma^j omega))`.
pub fn cube_measure<P: Probability>(weights: &BernoulliWeights<P>, cube: &ApproximateCube) -> P {
    let mut measure = P::one();
    for (j, &symbol) in cube.symbols.iter().enumerate() {
        let alive = cube.depths.clusters_alive(j);
        for p in &weights.symbol_conditionals(symbol)[..alive] {
            measure = measure.mul(p);
        }
    }
    measure
}

/// `ln mu(Q)` from a precomputed [`BernoulliWeights::ln_table`].
pub fn ln_cube_measure(ln_table: &[Vec<f64>], cube: &ApproximateCube) -> f64 {
    cube.symbols
        .iter()
        .enumerate()
        .map(|(j, &symbol)| {
            ln_table[symbol][..cube.depths.clusters_alive(j)]
                .iter()
                .sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{augmented, diagonal, four_corners};
    use crate::dimension::lg_exponents;
    use crate::measure::{approximate_cube, Word};
    use crate::rational::ratio;
    use crate::sponge::uniform_grid_encoding;
    use std::collections::BTreeSet;

    fn weight_of(
        spec: &SpongeSpec,
        weights: &BernoulliWeights<Rational>,
        digit: &[u32],
    ) -> Rational {
        weights.weights()[spec.symbol_of(digit).unwrap()].clone()
    }

    #[test]
    fn diagonal_pcu() {
        let spec = diagonal();
        let w = pcu_weights(&spec);
        for digit in [[0, 0, 0], [0, 1, 1], [0, 2, 2]] {
            assert_eq!(weight_of(&spec, &w, &digit), ratio(1, 6));
        }
        assert_eq!(weight_of(&spec, &w, &[1, 0, 1]), ratio(1, 2));
        assert_eq!(w.total(), <Rational as One>::one());
        assert_eq!(w.conditional(1, &[0], &[2, 2]), Some(&ratio(1, 3)));
    }

    #[test]
    fn augmented_and_uniform_pcu() {
        let spec = augmented();
        let w = pcu_weights(&spec);
        assert_eq!(weight_of(&spec, &w, &[1, 0, 1]), ratio(1, 2));
        assert_eq!(weight_of(&spec, &w, &[0, 2, 1]), ratio(1, 8));
        assert!(pcu_weights(&four_corners())
            .weights()
            .iter()
            .all(|p| *p == ratio(1, 4)));
    }

    #[test]
    fn chain_rule_is_exact() {
        let spec = augmented();
        let w = pcu_weights(&spec);
        for (symbol, digit) in spec.digits().iter().enumerate() {
            let a = w.conditional(0, &[], &digit[..1]).unwrap();
            let b = w.conditional(1, &digit[..1], &digit[1..]).unwrap();
            assert_eq!(a * b, w.weights()[symbol]);
        }
    }

    #[test]
    fn lg_grid_weights_match_pcu() {
        for spec in [diagonal(), augmented()] {
            let lg = uniform_grid_encoding(&spec);
            let w = lg_weights(&lg, &lg_exponents(&lg).unwrap());
            let exact = pcu_weights(&spec);
            for (p, q) in w.weights().iter().zip(exact.weights()) {
                assert!((p - rational::to_f64(q)).abs() < 1e-12);
            }
            assert!((w.total() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn cube_measure_values() {
        let spec = diagonal();
        let w = pcu_weights(&spec);
        let word = Word::constant(spec.symbol_of(&[0, 0, 0]).unwrap());
        let cube = approximate_cube(&spec, &word, &ratio(1, 3)).unwrap();
        assert_eq!(cube_measure(&w, &cube), ratio(1, 6));
        let whole = approximate_cube(&spec, &word, &<Rational as One>::one()).unwrap();
        assert_eq!(cube_measure(&w, &whole), <Rational as One>::one());
        let ln = ln_cube_measure(&w.ln_table(), &cube);
        assert!((ln - (1.0f64 / 6.0).ln()).abs() < 1e-12);
    }

    /// Every distinct approximate cube at scale `r`, with one representative word.
    fn cubes_at(spec: &SpongeSpec, r: &Rational) -> Vec<ApproximateCube> {
        let len = crate::measure::depths_bm(spec, r).unwrap().max();
        let symbols = 0..spec.digits().len();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for mut word in
            itertools::Itertools::multi_cartesian_product((0..=len).map(|_| symbols.clone()))
        {
            // one padding symbol lets the running products bracket r
            word.push(0);
            let cube = approximate_cube(spec, &Word::finite(word), r).unwrap();
            if seen.insert(cube.key(spec)) {
                out.push(cube);
            }
        }
        out
    }

    #[test]
    fn cubes_partition_and_refine_additively() {
        for spec in [diagonal(), augmented()] {
            let w = pcu_weights(&spec);
            let scales = [
                ratio(1, 2),
                ratio(1, 3),
                ratio(1, 4),
                ratio(1, 8),
                ratio(1, 9),
            ];
            for pair in scales.windows(2) {
                let (coarse, fine) = (&pair[0], &pair[1]);
                let parents = cubes_at(&spec, coarse);
                let children = cubes_at(&spec, fine);
                let total = parents.iter().fold(<Rational as Zero>::zero(), |acc, q| {
                    acc + cube_measure(&w, q)
                });
                assert_eq!(total, <Rational as One>::one());
                for parent in &parents {
                    let parent_key = parent.key(&spec);
                    let mass = children
                        .iter()
                        .filter(|child| {
                            let mut word = child.symbols.clone();
                            word.extend([0, 0]);
                            let again = approximate_cube(&spec, &Word::finite(word), coarse);
                            again.map(|q| q.key(&spec) == parent_key).unwrap_or(false)
                        })
                        .fold(<Rational as Zero>::zero(), |acc, q| {
                            acc + cube_measure(&w, q)
                        });
                    assert_eq!(mass, cube_measure(&w, parent));
                }
            }
        }
    }
}
