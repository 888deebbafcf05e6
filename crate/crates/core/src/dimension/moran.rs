//! Similarity exponent of a list of ratios: the `s` with `sum c_j^s = 1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Residual bound on `|sum c^s - 1|`.
pub const MORAN_TOLERANCE: f64 = 1e-12;
/// Iteration cap shared by bracketing and bisection.
pub const MORAN_MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoranSolution {
    pub exponent: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoranError {
    #[error("the ratio list is empty")]
    Empty,
    #[error("ratio {0} is outside (0, 1]")]
    InvalidRatio(f64),
    #[error("{count} ratios include 1, so the sum never drops to 1")]
    NoSolution { count: usize },
    #[error("bisection stopped with residual {residual:e}")]
    NotConverged { residual: f64 },
}

fn moran_sum(ratios: &[f64], s: f64) -> f64 {
    ratios.iter().map(|c| c.powf(s)).sum::<f64>() - 1.0
}

/// Solves `sum c_j^s = 1` by bisection on the strictly decreasing map
/// `s -> sum c_j^s`, growing the upper end by doubling until it brackets.
///
/// A single ratio gives `s = 0`. Bisection runs until the bracket can no
/// longer be split in double precision, and the closest endpoint is returned.
pub fn moran_solve(ratios: &[f64]) -> Result<MoranSolution, MoranError> {
    if ratios.is_empty() {
        return Err(MoranError::Empty);
    }
    if let Some(&bad) = ratios.iter().find(|&&c| !(c > 0.0 && c <= 1.0)) {
        return Err(MoranError::InvalidRatio(bad));
    }
    if ratios.len() == 1 {
        return Ok(MoranSolution {
            exponent: 0.0,
            residual: 0.0,
            iterations: 0,
        });
    }
    if ratios.contains(&1.0) {
        return Err(MoranError::NoSolution {
            count: ratios.len(),
        });
    }

    let mut iterations = 0;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut f_hi = moran_sum(ratios, hi);
    while f_hi > 0.0 {
        lo = hi;
        hi *= 2.0;
        f_hi = moran_sum(ratios, hi);
        iterations += 1;
        if iterations >= MORAN_MAX_ITERATIONS || !hi.is_finite() {
            return Err(MoranError::NotConverged {
                residual: f_hi.abs(),
            });
        }
    }
    let mut best = (hi, f_hi.abs());
    while iterations < MORAN_MAX_ITERATIONS && best.1 > 0.0 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let f_mid = moran_sum(ratios, mid);
        if f_mid.abs() < best.1 {
            best = (mid, f_mid.abs());
        }
        if f_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (exponent, residual) = best;
    if residual > MORAN_TOLERANCE {
        return Err(MoranError::NotConverged { residual });
    }
    Ok(MoranSolution {
        exponent,
        residual,
        iterations,
    })
}
