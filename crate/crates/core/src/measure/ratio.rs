//! Randomized check of the two-scale measure bounds
//! `C_low (R/r)^{dim_L} <= mu(Q(w,R)) / mu(Q(w,r)) <= C_up (R/r)^{dim_A}`.

use super::{approximate_cube, ln_cube_measure, BernoulliWeights, DepthError, Probability, Word};
use crate::rational::{self, Rational};
use crate::sponge::SymbolicSponge;
use num::pow::Pow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Slack on log-space comparisons.
pub const RATIO_LOG_SLACK: f64 = 1e-9;

const GRID: i64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioConstants {
    pub upper: f64,
    pub lower: f64,
}

impl RatioConstants {
    /// `B^d` and `B^{-d}` with `B` the sponge's distortion bound: `n_d` for
    /// Bedford–McMullen, `1 / min c` for Lalley–Gatzouras.
    pub fn for_sponge<S: SymbolicSponge + ?Sized>(sponge: &S) -> Self {
        let bound = rational::to_f64(&sponge.distortion_bound());
        let d = sponge.dims() as i32;
        Self {
            upper: bound.powi(d),
            lower: bound.powi(-d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub trial: usize,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub ratio: f64,
    pub normalized_upper: f64,
    pub normalized_lower: f64,
    pub upper_ok: bool,
    pub lower_ok: bool,
}

impl RatioRow {
    pub const CSV_HEADER: &'static str = "trial,r,R,ratio,normalized_upper,normalized_lower";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
            self.trial,
            self.r,
            self.big_r,
            self.ratio,
            self.normalized_upper,
            self.normalized_lower
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub seed: u64,
    pub trials: usize,
    pub assouad: f64,
    pub lower: f64,
    pub constants: RatioConstants,
    pub max_normalized_upper: f64,
    pub min_normalized_lower: f64,
    pub violations: Vec<RatioRow>,
    #[serde(skip)]
    pub rows: Vec<RatioRow>,
}

impl RatioReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Per-trial generator: the same `(seed, trial)` always yields the same sample.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn grid_fraction(value: f64) -> Rational {
    let numer = ((value * GRID as f64).floor() as i64).clamp(1, GRID);
    rational::ratio(numer, GRID)
}

/// Draws `0 < r <= R <= max_scale`. Mostly log-uniform on a fine decimal grid;
/// one draw in ten snaps both scales to products of contractions, where the
/// depth inequalities are tight.
fn sample_scales<S: SymbolicSponge + ?Sized>(
    sponge: &S,
    rng: &mut ChaCha8Rng,
) -> (Rational, Rational) {
    let max = sponge.max_scale();
    if rng.gen_bool(0.1) {
        let contraction = |rng: &mut ChaCha8Rng| {
            let symbol = rng.gen_range(0..sponge.digits().len());
            let coordinate = rng.gen_range(0..sponge.dims());
            sponge.contraction(symbol, coordinate).clone()
        };
        let a: u32 = rng.gen_range(0..6);
        let b: u32 = rng.gen_range(0..9);
        let big_r = &max * Pow::pow(contraction(rng), a);
        let r = &big_r * Pow::pow(contraction(rng), b);
        (big_r, r)
    } else {
        let big_r = &max * grid_fraction((-rng.gen_range(0.0..8.0f64)).exp());
        let r = &big_r * grid_fraction((-rng.gen_range(0.0..10.0f64)).exp());
        (big_r, r)
    }
}

/// Samples `trials` triples `(w, R, r)` and compares the measure ratio with
/// both bounds. Trial 0 uses `r = R`.
pub fn ratio_bound_check<S, P>(
    sponge: &S,
    weights: &BernoulliWeights<P>,
    assouad: f64,
    lower: f64,
    constants: RatioConstants,
    trials: usize,
    seed: u64,
) -> Result<RatioReport, DepthError>
where
    S: SymbolicSponge + ?Sized,
    P: Probability,
{
    let ln_table = weights.ln_table();
    let ln_coarsest = -rational::ln(&sponge.coarsest_contraction());
    let symbols = sponge.digits().len();
    let ln_upper = constants.upper.ln();
    let ln_lower = constants.lower.ln();

    let rows = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let (big_r, mut r) = sample_scales(sponge, &mut rng);
            if trial == 0 {
                r = big_r.clone();
            }
            let ln_r = rational::ln(&r);
            let ln_big_r = rational::ln(&big_r);
            let length = (-ln_r / ln_coarsest).ceil().max(0.0) as usize + 2;
            let word = Word::finite((0..length).map(|_| rng.gen_range(0..symbols)).collect());
            let coarse = approximate_cube(sponge, &word, &big_r)?;
            let fine = approximate_cube(sponge, &word, &r)?;
            let ln_ratio = ln_cube_measure(&ln_table, &coarse) - ln_cube_measure(&ln_table, &fine);
            let ln_scale = ln_big_r - ln_r;
            let ln_up = ln_ratio - assouad * ln_scale;
            let ln_low = ln_ratio - lower * ln_scale;
            Ok(RatioRow {
                trial,
                r: ln_r.exp(),
                big_r: ln_big_r.exp(),
                ratio: ln_ratio.exp(),
                normalized_upper: ln_up.exp(),
                normalized_lower: ln_low.exp(),
                upper_ok: ln_up <= ln_upper + RATIO_LOG_SLACK,
                lower_ok: ln_low >= ln_lower - RATIO_LOG_SLACK,
            })
        })
        .collect::<Result<Vec<RatioRow>, DepthError>>()?;

    let violations = rows
        .iter()
        .filter(|row| !(row.upper_ok && row.lower_ok))
        .cloned()
        .collect();
    Ok(RatioReport {
        seed,
        trials,
        assouad,
        lower,
        constants,
        max_normalized_upper: rows
            .iter()
            .map(|row| row.normalized_upper)
            .fold(f64::NEG_INFINITY, f64::max),
        min_normalized_lower: rows
            .iter()
            .map(|row| row.normalized_lower)
            .fold(f64::INFINITY, f64::min),
        violations,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{augmented, diagonal, four_corners};
    use crate::dimension::{assouad_lower_bm, assouad_lower_lg, lg_exponents};
    use crate::measure::{lg_weights, pcu_weights};
    use crate::sponge::{uniform_grid_encoding, LgInput, LgNode, LgSponge};

    #[test]
    fn diagonal_has_no_violations() {
        let spec = diagonal();
        let dims = assouad_lower_bm(&spec);
        let constants = RatioConstants::for_sponge(&spec);
        assert_eq!(constants.upper, 27.0);
        let report = ratio_bound_check(
            &spec,
            &pcu_weights(&spec),
            dims.assouad,
            dims.lower,
            constants,
            2000,
            7,
        )
        .unwrap();
        assert!(report.is_clean(), "{:?}", report.violations.first());
        assert_eq!(report.rows[0].ratio, 1.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = augmented();
        let dims = assouad_lower_bm(&spec);
        let run = |seed| {
            let c = RatioConstants::for_sponge(&spec);
            ratio_bound_check(
                &spec,
                &pcu_weights(&spec),
                dims.assouad,
                dims.lower,
                c,
                200,
                seed,
            )
            .unwrap()
            .rows
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn uniform_single_cluster_ratios_are_powers_of_n() {
        let spec = four_corners();
        let dims = assouad_lower_bm(&spec);
        let c = RatioConstants::for_sponge(&spec);
        let report = ratio_bound_check(
            &spec,
            &pcu_weights(&spec),
            dims.assouad,
            dims.lower,
            c,
            500,
            1,
        )
        .unwrap();
        assert!(report.is_clean());
        for row in &report.rows {
            let exponent = row.ratio.log(4.0);
            assert!((exponent - exponent.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn lg_measures_respect_their_bounds() {
        let skewed = LgSponge::new(LgInput {
            dims: 2,
            bases: None,
            nodes: vec![
                LgNode {
                    prefix: vec![0],
                    contraction: rational::ratio(1, 2),
                    translation: rational::ratio(0, 1),
                },
                LgNode {
                    prefix: vec![0, 0],
                    contraction: rational::ratio(1, 4),
                    translation: rational::ratio(0, 1),
                },
                LgNode {
                    prefix: vec![0, 1],
                    contraction: rational::ratio(1, 3),
                    translation: rational::ratio(1, 2),
                },
                LgNode {
                    prefix: vec![1],
                    contraction: rational::ratio(1, 3),
                    translation: rational::ratio(2, 3),
                },
                LgNode {
                    prefix: vec![1, 0],
                    contraction: rational::ratio(1, 5),
                    translation: rational::ratio(1, 5),
                },
            ],
        })
        .unwrap();
        for sponge in [skewed, uniform_grid_encoding(&augmented())] {
            let exponents = lg_exponents(&sponge).unwrap();
            let dims = assouad_lower_lg(&sponge).unwrap();
            let c = RatioConstants::for_sponge(&sponge);
            let w = lg_weights(&sponge, &exponents);
            let report =
                ratio_bound_check(&sponge, &w, dims.assouad, dims.lower, c, 2000, 11).unwrap();
            assert!(report.is_clean(), "{:?}", report.violations.first());
        }
    }
}
