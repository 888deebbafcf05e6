use super::{Word, WordError};
use crate::rational::{self, grid_depth, serde_rational, Rational};
use crate::sponge::{Digit, SpongeSpec, SymbolicSponge};
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DepthError {
    #[error("scale {r} is outside (0, {max}]")]
    ScaleOutOfRange { r: String, max: String },
    #[error(transparent)]
    WordTooShort(#[from] WordError),
}

/// `k_l(r)` per coordinate and the common value `k_l*(r)` per cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Depths {
    pub coordinates: Vec<usize>,
    pub clusters: Vec<usize>,
}

impl Depths {
    fn from_coordinates<S: SymbolicSponge + ?Sized>(sponge: &S, coordinates: Vec<usize>) -> Self {
        let structure = sponge.clusters();
        let clusters = (0..structure.count())
            .map(|l| {
                let k = coordinates[structure.start(l)];
                debug_assert!(structure.range(l).all(|c| coordinates[c] == k));
                k
            })
            .collect();
        Self {
            coordinates,
            clusters,
        }
    }

    /// Number of leading symbols the cube constrains.
    pub fn max(&self) -> usize {
        self.coordinates.iter().copied().max().unwrap_or(0)
    }

    /// How many clusters symbol `position` is constrained in. Depths are
    /// nonincreasing in the cluster index, so these are always the first ones.
    pub fn clusters_alive(&self, position: usize) -> usize {
        self.clusters.iter().take_while(|&&k| k > position).count()
    }
}

fn check_scale(r: &Rational, max: &Rational) -> Result<(), DepthError> {
    if !r.is_positive() || r > max {
        return Err(DepthError::ScaleOutOfRange {
            r: rational::format_rational(r),
            max: rational::format_rational(max),
        });
    }
    Ok(())
}

/// Bedford–McMullen depths, which do not depend on the word.
pub fn depths_bm(spec: &SpongeSpec, r: &Rational) -> Result<Depths, DepthError> {
    check_scale(r, &Rational::one())?;
    let coordinates = spec.bases().iter().map(|&n| grid_depth(n, r)).collect();
    Ok(Depths::from_coordinates(spec, coordinates))
}

/// Largest `k` with `r <= prod_{m<k} c(omega_m, l)` for every coordinate `l`,
/// by exact running products along the word.
pub fn word_depths<S: SymbolicSponge + ?Sized>(
    sponge: &S,
    word: &Word,
    r: &Rational,
) -> Result<Depths, DepthError> {
    check_scale(r, &sponge.max_scale())?;
    let coordinates = (0..sponge.dims())
        .map(|l| {
            let mut product = Rational::one();
            let mut k = 0;
            loop {
                let symbol = word.symbol(k).ok_or(WordError::InsufficientLength {
                    needed: k + 1,
                    available: k,
                })?;
                let next = &product * sponge.contraction(symbol, l);
                if next < *r {
                    return Ok(k);
                }
                product = next;
                k += 1;
            }
        })
        .collect::<Result<Vec<_>, DepthError>>()?;
    Ok(Depths::from_coordinates(sponge, coordinates))
}

/// Lalley–Gatzouras depths `k_l(r, omega)`; `r` may not exceed the smallest
/// full-depth contraction.
pub fn depths_lg(
    sponge: &crate::sponge::LgSponge,
    word: &Word,
    r: &Rational,
) -> Result<Depths, DepthError> {
    word_depths(sponge, word, r)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        Self { lo, hi }
    }

    pub fn unit() -> Self {
        Self::new(Rational::zero(), Rational::one())
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// `Q(omega, r)`: the constrained prefix of the word, its depths and the
/// rectangle `tau(Q)` is contained in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproximateCube {
    pub symbols: Vec<usize>,
    #[serde(with = "serde_rational")]
    pub scale: Rational,
    pub depths: Depths,
    pub rectangle: Vec<Interval>,
}

impl ApproximateCube {
    /// The cube as a truncated word: symbol `j` keeps only the coordinates of
    /// the clusters alive at `j`. Two words give the same cube iff their keys agree.
    pub fn key<S: SymbolicSponge + ?Sized>(&self, sponge: &S) -> Vec<Digit> {
        let structure = sponge.clusters();
        self.symbols
            .iter()
            .enumerate()
            .map(|(j, &s)| {
                let alive = self.depths.clusters_alive(j);
                let end = if alive == 0 {
                    0
                } else {
                    structure.end(alive - 1)
                };
                sponge.digits()[s][..end].to_vec()
            })
            .collect()
    }
}

pub fn approximate_cube<S: SymbolicSponge + ?Sized>(
    sponge: &S,
    word: &Word,
    r: &Rational,
) -> Result<ApproximateCube, DepthError> {
    let depths = word_depths(sponge, word, r)?;
    let symbols = word.prefix(depths.max())?;
    let rectangle = depths
        .coordinates
        .iter()
        .enumerate()
        .map(|(l, &k)| {
            let mut lo = Rational::zero();
            let mut width = Rational::one();
            for &s in &symbols[..k] {
                lo += &width * sponge.translation(s, l);
                width *= sponge.contraction(s, l);
            }
            let hi = &lo + &width;
            Interval::new(lo, hi)
        })
        .collect();
    Ok(ApproximateCube {
        symbols,
        scale: r.clone(),
        depths,
        rectangle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::diagonal;
    use crate::rational::{inv_pow, ratio};
    use crate::sponge::uniform_grid_encoding;
    use proptest::prelude::*;

    #[test]
    fn grid_depth_boundaries() {
        let spec = SpongeSpec::from_parts(&[3], &[&[0], &[2]]).unwrap();
        assert_eq!(depths_bm(&spec, &ratio(1, 9)).unwrap().coordinates, vec![2]);
        assert_eq!(
            depths_bm(&spec, &ratio(1, 10)).unwrap().coordinates,
            vec![2]
        );
        let depths = depths_bm(&diagonal(), &ratio(1, 3)).unwrap();
        assert_eq!(depths.coordinates, vec![1, 1, 1]);
        assert_eq!(depths.clusters, vec![1, 1]);
        assert!(depths_bm(&diagonal(), &ratio(3, 2)).is_err());
        assert!(depths_bm(&diagonal(), &Rational::zero()).is_err());
    }

    #[test]
    fn lg_grid_depths_match() {
        let lg = uniform_grid_encoding(&diagonal());
        let word = Word::constant(2);
        let depths = depths_lg(&lg, &word, &ratio(1, 10)).unwrap();
        assert_eq!(depths.coordinates, vec![3, 2, 2]);
        assert_eq!(depths, depths_bm(&diagonal(), &ratio(1, 10)).unwrap());
        // r above min c = 1/3 is rejected
        assert!(matches!(
            depths_lg(&lg, &word, &ratio(1, 2)),
            Err(DepthError::ScaleOutOfRange { .. })
        ));
        let short = Word::finite(vec![0, 0]);
        assert!(matches!(
            depths_lg(&lg, &short, &ratio(1, 10)),
            Err(DepthError::WordTooShort(_))
        ));
    }

    #[test]
    fn closed_right_inequality_on_products() {
        // first-coordinate ratios 1/2 then 1/4 repeating: products 1/2, 1/8, 1/32
        let lg = crate::sponge::LgSponge::new(crate::sponge::LgInput {
            dims: 1,
            bases: None,
            nodes: vec![
                crate::sponge::LgNode {
                    prefix: vec![0],
                    contraction: ratio(1, 2),
                    translation: ratio(0, 1),
                },
                crate::sponge::LgNode {
                    prefix: vec![1],
                    contraction: ratio(1, 4),
                    translation: ratio(3, 4),
                },
            ],
        })
        .unwrap();
        let word = Word::periodic(vec![0], vec![1]).unwrap();
        assert_eq!(
            word_depths(&lg, &word, &ratio(1, 8)).unwrap().coordinates,
            vec![2]
        );
        assert_eq!(
            word_depths(&lg, &word, &ratio(1, 9)).unwrap().coordinates,
            vec![2]
        );
    }

    #[test]
    fn diagonal_rectangles() {
        let spec = diagonal();
        let zero = spec.symbol_of(&[0, 0, 0]).unwrap();
        let cube = approximate_cube(&spec, &Word::constant(zero), &ratio(1, 3)).unwrap();
        assert_eq!(
            cube.rectangle,
            vec![
                Interval::new(ratio(0, 1), ratio(1, 2)),
                Interval::new(ratio(0, 1), ratio(1, 3)),
                Interval::new(ratio(0, 1), ratio(1, 3)),
            ]
        );
        let whole = approximate_cube(&spec, &Word::constant(zero), &Rational::one()).unwrap();
        assert!(whole.rectangle.iter().all(|i| *i == Interval::unit()));
        assert!(whole.symbols.is_empty());
    }

    #[test]
    fn keys_truncate_dead_clusters() {
        let spec = diagonal();
        let word = Word::constant(spec.symbol_of(&[0, 1, 1]).unwrap());
        // r = 1/4: k = (2, 1, 1)
        let cube = approximate_cube(&spec, &word, &ratio(1, 4)).unwrap();
        assert_eq!(cube.key(&spec), vec![vec![0, 1, 1], vec![0]]);
    }

    proptest! {
        #[test]
        fn sides_are_comparable_to_the_scale(
            symbols in prop::collection::vec(0usize..4, 40),
            p in 1u32..40,
            q in 0u32..1000,
        ) {
            let spec = diagonal();
            // r = (1000 + q) / 1000 * 2^-p, clipped to 1
            let mut r = ratio(1000 + q as i64, 1000) * inv_pow(2, p);
            if r > Rational::one() {
                r = Rational::one();
            }
            let cube = approximate_cube(&spec, &Word::finite(symbols), &r).unwrap();
            prop_assert_eq!(&cube.depths, &depths_bm(&spec, &r).unwrap());
            for (l, side) in cube.rectangle.iter().enumerate() {
                let n = rational::integer(spec.bases()[l] as i64);
                let w = side.width();
                prop_assert!(r <= w && w < &n * &r);
                prop_assert!(side.lo >= Rational::zero() && side.hi <= Rational::one());
            }
            let d = &cube.depths.coordinates;
            prop_assert!(d.windows(2).all(|p| p[0] >= p[1]));
        }
    }
}
