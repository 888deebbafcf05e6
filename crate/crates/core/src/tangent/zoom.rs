use crate::measure::ApproximateCube;
use crate::rational::{serde_rational, Rational};
use num::One;
use serde::{Deserialize, Serialize};

/// `T^Q(x)_l = scale_l * (x_l - offset_l)`, mapping the rectangle of `Q` onto `[0,1]^d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineZoom {
    #[serde(with = "serde_rational_vec")]
    pub scales: Vec<Rational>,
    #[serde(with = "serde_rational_vec")]
    pub offsets: Vec<Rational>,
}

mod serde_rational_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrapped(#[serde(with = "serde_rational")] Rational);

    pub fn serialize<S: Serializer>(values: &[Rational], serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(values.iter().map(|v| Wrapped(v.clone())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<Vec<Rational>, D::Error> {
        let wrapped: Vec<Wrapped> = Vec::deserialize(deserializer)?;
        Ok(wrapped.into_iter().map(|w| w.0).collect())
    }
}

impl AffineZoom {
    pub fn apply(&self, point: &[Rational]) -> Vec<Rational> {
        point
            .iter()
            .zip(&self.scales)
            .zip(&self.offsets)
            .map(|((x, s), o)| s * (x - o))
            .collect()
    }

    /// `a_Q`, the smallest stretch.
    pub fn lipschitz_lo(&self) -> &Rational {
        self.scales.iter().min().expect("at least one coordinate")
    }

    /// `b_Q`, the largest stretch.
    pub fn lipschitz_hi(&self) -> &Rational {
        self.scales.iter().max().expect("at least one coordinate")
    }

    /// `b_Q / a_Q`.
    pub fn distortion(&self) -> Rational {
        self.lipschitz_hi() / self.lipschitz_lo()
    }
}

pub fn zoom_map(cube: &ApproximateCube) -> AffineZoom {
    AffineZoom {
        scales: cube
            .rectangle
            .iter()
            .map(|side| Rational::one() / side.width())
            .collect(),
        offsets: cube.rectangle.iter().map(|side| side.lo.clone()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{augmented, diagonal};
    use crate::measure::{approximate_cube, Word};
    use crate::rational::{integer, ratio};
    use crate::sponge::{uniform_grid_encoding, SymbolicSponge};
    use num::Zero;
    use proptest::prelude::*;

    #[test]
    fn diagonal_zoom() {
        let spec = diagonal();
        let word = Word::constant(spec.symbol_of(&[0, 0, 0]).unwrap());
        let zoom = zoom_map(&approximate_cube(&spec, &word, &ratio(1, 3)).unwrap());
        assert_eq!(zoom.scales, vec![integer(2), integer(3), integer(3)]);
        assert!(zoom.offsets.iter().all(Zero::is_zero));
        let identity = zoom_map(&approximate_cube(&spec, &word, &Rational::one()).unwrap());
        assert!(identity.scales.iter().all(One::is_one));
    }

    fn corners_map_to_unit_corners<S: SymbolicSponge>(
        sponge: &S,
        symbols: Vec<usize>,
        r: Rational,
    ) {
        let cube = approximate_cube(sponge, &Word::finite(symbols), &r).unwrap();
        let zoom = zoom_map(&cube);
        let dims = cube.rectangle.len();
        for mask in 0..(1u32 << dims) {
            let corner: Vec<Rational> = (0..dims)
                .map(|l| {
                    if mask >> l & 1 == 1 {
                        cube.rectangle[l].hi.clone()
                    } else {
                        cube.rectangle[l].lo.clone()
                    }
                })
                .collect();
            let image = zoom.apply(&corner);
            for (l, x) in image.iter().enumerate() {
                assert_eq!(
                    *x,
                    if mask >> l & 1 == 1 {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                );
            }
        }
        assert!(zoom.distortion() <= sponge.distortion_bound());
    }

    proptest! {
        #[test]
        fn bm_zoom_is_exact_with_bounded_distortion(
            symbols in prop::collection::vec(0usize..5, 40),
            numer in 1i64..1000,
            shift in 0u32..20,
        ) {
            let r = ratio(numer, 1000) * crate::rational::inv_pow(2, shift);
            corners_map_to_unit_corners(&diagonal(), symbols.iter().map(|s| s % 4).collect(), r.clone());
            corners_map_to_unit_corners(&augmented(), symbols.clone(), r);
        }

        #[test]
        fn lg_zoom_distortion(symbols in prop::collection::vec(0usize..5, 40), numer in 1i64..333, shift in 0u32..16) {
            let lg = uniform_grid_encoding(&augmented());
            let r = ratio(numer, 1000) * crate::rational::inv_pow(2, shift);
            corners_map_to_unit_corners(&lg, symbols, r);
        }
    }
}
