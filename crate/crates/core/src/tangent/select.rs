use super::TangentError;
use crate::dimension::MoranExponents;
use crate::measure::{depths_bm, word_depths, Depths, Word};
use crate::rational::{self, Rational};
use crate::sponge::{LgSponge, SpongeSpec, SymbolicSponge};
use num::{One, Signed};
use serde::{Deserialize, Serialize};

/// Smallest symbol whose digit starts with `prefix`.
fn first_extending<S: SymbolicSponge + ?Sized>(sponge: &S, prefix: &[u32]) -> usize {
    sponge
        .digits()
        .iter()
        .position(|d| d.starts_with(prefix))
        .expect("prefix occurs in the digit set")
}

/// `i(l)` for every level `l = 1..d*-1` (index 0 is unused and holds `None`):
/// a symbol whose level-`l` prefix maximizes `N(prefix)`, ties to the
/// lexicographically smallest digit.
pub fn select_maximizers(spec: &SpongeSpec) -> Vec<Option<usize>> {
    let tree = spec.digit_tree();
    (0..tree.level_count())
        .map(|l| (l > 0).then(|| first_extending(spec, &tree.extremes(l).argmax)))
        .collect()
}

/// As [`select_maximizers`], maximizing the Moran exponent `s(prefix)`.
pub fn select_maximizers_lg(sponge: &LgSponge, exponents: &MoranExponents) -> Vec<Option<usize>> {
    (0..exponents.by_level.len())
        .map(|l| {
            (l > 0).then(|| {
                let mut best: Option<(&Vec<u32>, f64)> = None;
                for (prefix, sol) in &exponents.by_level[l] {
                    if best.is_none_or(|(_, s)| sol.exponent > s) {
                        best = Some((prefix, sol.exponent));
                    }
                }
                first_extending(sponge, best.expect("nonempty level").0)
            })
        })
        .collect()
}

/// Twist symbols for the cluster boundaries `1..d*-1`: the smallest symbol
/// whose contraction strictly drops from cluster `l - 1` to cluster `l`.
pub fn select_twists(sponge: &LgSponge) -> Result<Vec<usize>, TangentError> {
    let clusters = sponge.clusters();
    (1..clusters.count())
        .map(|l| {
            (0..sponge.digits().len())
                .find(|&s| sponge.cluster_contraction(s, l - 1) > sponge.cluster_contraction(s, l))
                .ok_or(TangentError::NoTwistAvailable { boundary: l })
        })
        .collect()
}

/// The word `omega(R)` with the cluster depths it induces at scale `R`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaWord {
    pub word: Word,
    pub depths: Depths,
    /// Length of the leading run of twist symbols (always 0 for Bedford–McMullen).
    pub twist_prefix: usize,
}

/// Fill symbol for unconstrained positions: `i(d*)`, or the smallest digit
/// when there is a single cluster.
fn fill(maximizers: &[Option<usize>]) -> usize {
    maximizers.last().copied().flatten().unwrap_or(0)
}

/// Positions `k_l*(R) .. k_{l-1}*(R)` (0-based, half-open) hold `i(l)`, so that
/// after zooming the `l`-th cluster sees the largest fibre. Every other
/// position holds `i(d*)`.
pub fn omega_r_bm(spec: &SpongeSpec, big_r: &Rational) -> Result<OmegaWord, TangentError> {
    if !big_r.is_positive() || *big_r > Rational::one() {
        return Err(TangentError::RTooLarge(rational::format_rational(big_r)));
    }
    let depths = depths_bm(spec, big_r)?;
    let maximizers = select_maximizers(spec);
    let filler = fill(&maximizers);
    let clusters = maximizers.len();
    let head = (0..depths.max())
        .map(|t| match depths.clusters_alive(t) {
            alive if alive == 0 || alive == clusters => filler,
            alive => maximizers[alive].expect("levels past the root have maximizers"),
        })
        .collect();
    Ok(OmegaWord {
        word: Word::periodic(head, vec![filler])?,
        depths,
        twist_prefix: 0,
    })
}

/// Lalley–Gatzouras `omega(R)`: twist symbols cycle over the first
/// `floor(k_{d*}* / d*) * d*` positions, then the maximizer blocks follow as
/// in the Bedford–McMullen case.
///
/// Depths depend on the word, so the word is grown one position at a time:
/// position `t` takes the symbol dictated by how many clusters are still
/// alive, and that count is re-checked with the chosen symbol included.
/// An exact fixed point of the twist-run length need not exist, so the run
/// is the longest whole number of cycles that keeps every cluster alive and
/// fits inside the first `k_{d*}*` positions of the finished word.
pub fn omega_r_lg(
    sponge: &LgSponge,
    exponents: &MoranExponents,
    big_r: &Rational,
) -> Result<OmegaWord, TangentError> {
    if !big_r.is_positive() || *big_r > sponge.max_scale() {
        return Err(TangentError::RTooLarge(rational::format_rational(big_r)));
    }
    let maximizers = select_maximizers_lg(sponge, exponents);
    let twists = select_twists(sponge)?;
    let clusters = sponge.clusters().count();
    let filler = fill(&maximizers);
    let symbol_for = |alive: usize| match alive {
        a if a == 0 || a == clusters => filler,
        a => maximizers[a].expect("levels past the root have maximizers"),
    };

    let build = |twist_len: usize| -> Result<Vec<usize>, TangentError> {
        let dims = sponge.dims();
        let mut products = vec![Rational::one(); dims];
        let mut head = Vec::new();
        let alive_with = |products: &[Rational], s: usize| {
            (0..clusters)
                .take_while(|&l| {
                    let coord = sponge.clusters().start(l);
                    &products[coord] * sponge.contraction(s, coord) >= *big_r
                })
                .count()
        };
        loop {
            let t = head.len();
            let symbol = if t < twist_len {
                let s = twists[t % twists.len()];
                if alive_with(&products, s) < clusters {
                    return Err(TangentError::NoConsistentWord { position: t });
                }
                s
            } else {
                let previous = alive_before(&products, sponge, big_r, clusters);
                let choice = (0..=previous)
                    .rev()
                    .find(|&a| alive_with(&products, symbol_for(a)) == a);
                match choice {
                    Some(0) => break,
                    Some(a) => symbol_for(a),
                    None => return Err(TangentError::NoConsistentWord { position: t }),
                }
            };
            for (l, p) in products.iter_mut().enumerate() {
                *p *= sponge.contraction(symbol, l);
            }
            head.push(symbol);
        }
        Ok(head)
    };

    let max_cycles = if twists.is_empty() {
        0
    } else {
        twist_run_bound(sponge, &twists, big_r) / clusters
    };
    for cycles in (0..=max_cycles).rev() {
        let twist_len = cycles * clusters;
        let Ok(head) = build(twist_len) else { continue };
        let word = Word::periodic(head, vec![filler])?;
        let depths = word_depths(sponge, &word, big_r)?;
        let last = *depths.clusters.last().expect("at least one cluster");
        if last / clusters >= cycles {
            return Ok(OmegaWord {
                word,
                depths,
                twist_prefix: twist_len,
            });
        }
    }
    Err(TangentError::NoConsistentWord { position: 0 })
}

/// Alive count before choosing the next symbol: clusters whose running
/// product has not yet dropped below `R`.
fn alive_before(
    products: &[Rational],
    sponge: &LgSponge,
    big_r: &Rational,
    clusters: usize,
) -> usize {
    (0..clusters)
        .take_while(|&l| products[sponge.clusters().start(l)] >= *big_r)
        .count()
}

/// Number of twist symbols after which the last cluster is certainly dead.
fn twist_run_bound(sponge: &LgSponge, twists: &[usize], big_r: &Rational) -> usize {
    let last = sponge.clusters().start(sponge.clusters().count() - 1);
    let mut product = Rational::one();
    let mut t = 0;
    while product >= *big_r {
        product *= sponge.contraction(twists[t % twists.len()], last);
        t += 1;
    }
    t
}
