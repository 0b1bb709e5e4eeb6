//! Paired permutation test on per-subject cumulative ranks.
//!
//! Under the null hypothesis the two teams are exchangeable on every subject,
//! so each permutation swaps their cumulative ranks on each subject with
//! probability 1/2. The p-value is the add-one smoothed share of permutations
//! whose FRS gap reaches the observed one.
//!
//! Randomness comes from ChaCha8 keyed by the user seed, with the stream id
//! derived from the two team names. Each pair therefore has its own stream,
//! independent of evaluation order and thread count, and (a, b) and (b, a)
//! draw identical swap patterns.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::RankTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationOptions {
    pub n_permutations: usize,
    pub seed: u64,
    /// Count only permuted gaps strictly above the observed gap.
    pub strict: bool,
    /// Compare |gap|; otherwise the signed gap FRS(b) - FRS(a).
    pub two_sided: bool,
}

impl Default for PermutationOptions {
    fn default() -> Self {
        PermutationOptions {
            n_permutations: 100_000,
            seed: 0,
            strict: false,
            two_sided: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationResult {
    pub team_a: String,
    pub team_b: String,
    pub observed_gap: f64,
    pub exceed_count: u64,
    pub n_permutations: u64,
    pub p_value: f64,
    pub seed: u64,
}

/// FNV-1a over the two names in sorted order.
fn pair_stream(a: &str, b: &str) -> u64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in lo.bytes().chain(std::iter::once(0x1f)).chain(hi.bytes()) {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn pair_rng(seed: u64, a: &str, b: &str) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(pair_stream(a, b));
    rng
}

pub fn permutation_test(r: &RankTable, a: &str, b: &str, opts: &PermutationOptions) -> Result<PermutationResult> {
    let ia = r.team_index(a)?;
    let ib = r.team_index(b)?;
    if ia == ib {
        return Err(Error::Contract(format!("permutation test needs two distinct teams, got {a:?} twice")));
    }
    if opts.n_permutations == 0 {
        return Err(Error::Contract("n_permutations must be >= 1".into()));
    }
    // Per-subject differences b - a; a swap negates one term.
    let diffs: Vec<f64> = r
        .cumulative(ib)
        .iter()
        .zip(r.cumulative(ia))
        .map(|(cb, ca)| cb - ca)
        .collect();
    let n_subjects = diffs.len() as f64;
    let statistic = |total: f64| if opts.two_sided { total.abs() } else { total };

    let observed_total: f64 = diffs.iter().sum();
    let observed = statistic(observed_total);
    let eps = 1e-9 * observed.abs().max(1.0);

    let mut rng = pair_rng(opts.seed, a, b);
    let mut exceed = 0u64;
    for _ in 0..opts.n_permutations {
        let mut total = 0.0;
        let mut bits = 0u64;
        for (k, d) in diffs.iter().enumerate() {
            if k % 64 == 0 {
                bits = rng.next_u64();
            }
            total += if bits & 1 == 1 { -d } else { *d };
            bits >>= 1;
        }
        let permuted = statistic(total);
        let hit = if opts.strict {
            permuted > observed + eps
        } else {
            permuted >= observed - eps
        };
        exceed += u64::from(hit);
    }

    let n = opts.n_permutations as u64;
    Ok(PermutationResult {
        team_a: a.to_string(),
        team_b: b.to_string(),
        observed_gap: observed / n_subjects,
        exceed_count: exceed,
        n_permutations: n,
        p_value: (1 + exceed) as f64 / (1 + n) as f64,
        seed: opts.seed,
    })
}

/// Upper-triangular p-values with teams in ascending FRS order.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    pub teams: Vec<String>,
    /// Row-major over pairs (i, j), i < j.
    pub results: Vec<PermutationResult>,
}

impl PairwiseMatrix {
    pub fn p_value(&self, i: usize, j: usize) -> Option<f64> {
        let n = self.teams.len();
        if i >= j || j >= n {
            return None;
        }
        // Entries before row i: sum over r < i of (n - 1 - r).
        let offset = i * (2 * n - i - 1) / 2 + (j - i - 1);
        self.results.get(offset).map(|r| r.p_value)
    }
}

pub fn pairwise_matrix(r: &RankTable, opts: &PermutationOptions) -> Result<PairwiseMatrix> {
    let teams: Vec<String> = r.order().iter().map(|&t| r.teams()[t].clone()).collect();
    if teams.len() < 2 {
        return Err(Error::Contract("pairwise comparison needs at least two teams".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..teams.len())
        .flat_map(|i| (i + 1..teams.len()).map(move |j| (i, j)))
        .collect();
    let results = pairs
        .par_iter()
        .map(|&(i, j)| permutation_test(r, &teams[i], &teams[j], opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(PairwiseMatrix { teams, results })
}
