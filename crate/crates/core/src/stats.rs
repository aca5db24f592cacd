//! Monte Carlo checks of the fixed-point law, diagonal symbol multiplicities,
//! arc-count discrepancy and loop counts.

use crate::digraph::{colour_arc_count, latin_to_digraph};
use crate::sampler::{cyclic_square, sample_latin_square, task_rng, SamplerConfig};
use crate::square::LatinSquare;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Samples drawn per worker stream; the stream index is the chunk index, so
/// results do not depend on the thread count.
const CHUNK: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("k = {k} exceeds n = {n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("{0}")]
    Invalid(String),
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `sum_{j=0}^{m} (-1)^j / j!`, exactly.
pub fn alternating_partial_sum(m: usize) -> BigRational {
    let mut total = BigRational::zero();
    for j in 0..=m {
        let term = BigRational::new(BigInt::one(), factorial(j));
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Probability that a uniform permutation of `n` points fixes exactly `k`:
/// `(1/k!) sum_{j=0}^{n-k} (-1)^j / j!`.
pub fn fixed_point_pmf(n: usize, k: usize) -> Result<BigRational, StatsError> {
    if k > n {
        return Err(StatsError::KOutOfRange { k, n });
    }
    Ok(alternating_partial_sum(n - k) / BigRational::from_integer(factorial(k)))
}

/// The pmf for `k = 0..=n`.
pub fn fixed_point_distribution(n: usize) -> Vec<BigRational> {
    (0..=n).map(|k| fixed_point_pmf(n, k).unwrap()).collect()
}

/// Largest number of times one symbol appears on the leading diagonal.
pub fn diagonal_max_statistic(sq: &LatinSquare) -> usize {
    let mut mult = vec![0usize; sq.n() + 1];
    for s in sq.diagonal() {
        mult[s] += 1;
    }
    mult.into_iter().max().unwrap_or(0)
}

fn fixed_points(p: &[usize]) -> usize {
    p.iter().enumerate().filter(|&(i, &x)| x == i + 1).count()
}

fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (1..=n).collect();
    p.shuffle(rng);
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FixedPoints,
    DiagMax,
    Discrepancy,
    LoopsPerColour,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::FixedPoints => "fixed-points",
            ExperimentKind::DiagMax => "diag-max",
            ExperimentKind::Discrepancy => "discrepancy",
            ExperimentKind::LoopsPerColour => "loops-per-colour",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = StatsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed-points" => Ok(ExperimentKind::FixedPoints),
            "diag-max" => Ok(ExperimentKind::DiagMax),
            "discrepancy" => Ok(ExperimentKind::Discrepancy),
            "loops-per-colour" => Ok(ExperimentKind::LoopsPerColour),
            _ => Err(StatsError::Invalid(format!(
                "unknown kind {s:?}; expected fixed-points, diag-max, discrepancy or loops-per-colour"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    /// Integer value, or the lower edge of a histogram bin.
    pub value: f64,
    pub count: u64,
    pub empirical: f64,
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub semantics: String,
    pub bins: Vec<Bin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub value: f64,
    pub semantics: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub semantics: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    pub kind: ExperimentKind,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub tables: Vec<Table>,
    pub summary: Vec<Summary>,
    pub verdicts: Vec<Verdict>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    /// One row per bin: `table,value,count,empirical,reference`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("table,value,count,empirical,reference\n");
        for t in &self.tables {
            for b in &t.bins {
                let r = b.reference.map(|r| r.to_string()).unwrap_or_default();
                out.push_str(&format!("{},{},{},{},{}\n", t.name, b.value, b.count, b.empirical, r));
            }
        }
        out
    }
}

/// Tolerance for total-variation verdicts: `5 / sqrt(samples)`, which is
/// 0.005 at one million samples.
pub fn tv_tolerance(samples: usize) -> f64 {
    5.0 / (samples as f64).sqrt()
}

fn counts_table(name: &str, semantics: &str, counts: &[u64], reference: Option<&[f64]>) -> Table {
    let total: u64 = counts.iter().sum();
    Table {
        name: name.into(),
        semantics: semantics.into(),
        bins: counts
            .iter()
            .enumerate()
            .map(|(k, &c)| Bin {
                value: k as f64,
                count: c,
                empirical: if total == 0 { 0.0 } else { c as f64 / total as f64 },
                reference: reference.map(|r| r[k]),
            })
            .collect(),
    }
}

fn total_variation(counts: &[u64], reference: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    0.5 * counts
        .iter()
        .zip(reference)
        .map(|(&c, &p)| (c as f64 / total as f64 - p).abs())
        .sum::<f64>()
}

/// Runs `draw(rng)` `samples` times over chunked streams and sums the
/// per-draw histograms of width `width`.
fn chunked_histogram<F>(samples: usize, seed: u64, width: usize, draw: F) -> Vec<u64>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, &mut [u64]) + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = task_rng(seed, c as u64);
            let mut h = vec![0u64; width];
            let here = CHUNK.min(samples - c * CHUNK);
            for _ in 0..here {
                draw(&mut rng, &mut h);
            }
            h
        })
        .reduce(
            || vec![0u64; width],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

fn sample_square(n: usize, seed: u64, i: usize) -> LatinSquare {
    sample_latin_square(&SamplerConfig::square(n, seed).with_task(i as u64))
}

/// `|e_{G,D}(U1,U2) - |U1||U2||D|/n|` divided by
/// `sqrt(|U1||U2||D|) log n + n log^2 n`; zero when the divisor is zero.
pub fn normalized_discrepancy(e: usize, u1: usize, u2: usize, d: usize, n: usize) -> f64 {
    let dev = (e as f64 - (u1 * u2 * d) as f64 / n as f64).abs();
    let ln = (n as f64).ln();
    let scale = ((u1 * u2 * d) as f64).sqrt() * ln + n as f64 * ln * ln;
    if scale == 0.0 {
        0.0
    } else {
        dev / scale
    }
}

pub fn run_experiment(
    kind: ExperimentKind,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<ExperimentReport, StatsError> {
    if n == 0 || samples == 0 {
        return Err(StatsError::Invalid("n and samples must be positive".into()));
    }
    let mut rep = ExperimentReport {
        id: format!("{kind}-n{n}-s{samples}-seed{seed}"),
        kind,
        n,
        samples,
        seed,
        tables: Vec::new(),
        summary: Vec::new(),
        verdicts: Vec::new(),
    };
    let pmf: Vec<f64> = fixed_point_distribution(n)
        .iter()
        .map(|p| p.to_f64().unwrap_or(0.0))
        .collect();
    match kind {
        ExperimentKind::FixedPoints => {
            let counts = chunked_histogram(samples, seed, n + 1, |rng, h| {
                h[fixed_points(&random_permutation(n, rng))] += 1;
            });
            let tv = total_variation(&counts, &pmf);
            rep.tables.push(counts_table(
                "fixed_points",
                "number of fixed points of a uniform permutation; reference is the exact pmf",
                &counts,
                Some(&pmf),
            ));
            rep.verdicts.push(Verdict {
                name: "tv_to_exact_pmf".into(),
                passed: tv < tv_tolerance(samples),
                value: tv,
                tolerance: tv_tolerance(samples),
                semantics: "total-variation distance, dimensionless".into(),
            });
        }
        ExperimentKind::DiagMax => {
            let xs: Vec<usize> = (0..samples)
                .into_par_iter()
                .map(|i| diagonal_max_statistic(&sample_square(n, seed, i)))
                .collect();
            let mut counts = vec![0u64; n + 1];
            xs.iter().for_each(|&x| counts[x] += 1);
            rep.tables.push(counts_table(
                "diag_max",
                "largest diagonal multiplicity of any symbol in a sampled square",
                &counts,
                None,
            ));
            let mean = xs.iter().sum::<usize>() as f64 / samples as f64;
            rep.summary.push(Summary {
                name: "mean_diag_max".into(),
                value: mean,
                semantics: "cells".into(),
            });
            if n >= 3 {
                let ln = (n as f64).ln();
                rep.summary.push(Summary {
                    name: "log_n_over_log_log_n".into(),
                    value: ln / ln.ln(),
                    semantics: "heuristic scale for comparison only".into(),
                });
            }
            // Row-permuted cyclic square: symbol 1's diagonal multiplicity
            // is the fixed-point count of a uniform permutation.
            let z = cyclic_square(n).map_err(|e| StatsError::Invalid(e.to_string()))?;
            let model = chunked_histogram(samples, seed ^ 0x9e37_79b9, n + 1, |rng, h| {
                let sigma = random_permutation(n, rng);
                let d = z.permute_rows(&sigma).diagonal();
                h[d.iter().filter(|&&s| s == 1).count()] += 1;
            });
            let tv = total_variation(&model, &pmf);
            rep.tables.push(counts_table(
                "row_permuted_cyclic_symbol_1",
                "diagonal multiplicity of symbol 1 after a uniform row permutation of the cyclic square",
                &model,
                Some(&pmf),
            ));
            rep.verdicts.push(Verdict {
                name: "row_permuted_model_tv".into(),
                passed: tv < tv_tolerance(samples),
                value: tv,
                tolerance: tv_tolerance(samples),
                semantics: "total-variation distance to the fixed-point pmf".into(),
            });
        }
        ExperimentKind::Discrepancy => {
            let g = latin_to_digraph(&sample_square(n, seed, 0));
            let ratios: Vec<f64> = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = task_rng(seed, 1 + i as u64);
                    let mut pick = || (1..=n).filter(|_| rng.gen_bool(0.5)).collect::<Vec<_>>();
                    let (u1, u2, d) = (pick(), pick(), pick());
                    let e = colour_arc_count(&g, &u1, &u2, &d).expect("sampled sets lie in 1..=n");
                    normalized_discrepancy(e, u1.len(), u2.len(), d.len(), n)
                })
                .collect();
            let max = ratios.iter().copied().fold(0.0, f64::max);
            let mean = ratios.iter().sum::<f64>() / samples as f64;
            const BINS: usize = 20;
            let width = if max > 0.0 { max / BINS as f64 } else { 1.0 };
            let mut counts = vec![0u64; BINS];
            for r in &ratios {
                counts[((r / width) as usize).min(BINS - 1)] += 1;
            }
            let mut t = counts_table(
                "normalized_discrepancy",
                "histogram of |e - |U1||U2||D|/n| / (sqrt(|U1||U2||D|) log n + n log^2 n); value is the bin's lower edge",
                &counts,
                None,
            );
            t.bins.iter_mut().enumerate().for_each(|(i, b)| b.value = i as f64 * width);
            rep.tables.push(t);
            rep.summary.push(Summary {
                name: "max_normalized".into(),
                value: max,
                semantics: "dimensionless".into(),
            });
            rep.summary.push(Summary {
                name: "mean_normalized".into(),
                value: mean,
                semantics: "dimensionless".into(),
            });
            rep.verdicts.push(Verdict {
                name: "max_normalized_at_most_one".into(),
                passed: max <= 1.0,
                value: max,
                tolerance: 1.0,
                semantics: "largest normalized deviation over sampled triples".into(),
            });
        }
        ExperimentKind::LoopsPerColour => {
            let per: Vec<Vec<usize>> = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let g = latin_to_digraph(&sample_square(n, seed, i));
                    (1..=n).map(|c| g.loops_of_colour(c)).collect()
                })
                .collect();
            let mut pooled = vec![0u64; n + 1];
            let mut maxes = vec![0u64; n + 1];
            for row in &per {
                row.iter().for_each(|&l| pooled[l] += 1);
                maxes[*row.iter().max().unwrap()] += 1;
            }
            rep.tables.push(counts_table(
                "loops_per_colour",
                "loops of each colour, pooled over colours and samples",
                &pooled,
                None,
            ));
            rep.tables.push(counts_table(
                "max_loops",
                "largest loop count over colours in each sample",
                &maxes,
                None,
            ));
            let mean = pooled.iter().enumerate().map(|(k, &c)| k as f64 * c as f64).sum::<f64>()
                / pooled.iter().sum::<u64>() as f64;
            rep.verdicts.push(Verdict {
                name: "mean_loops_per_colour_is_one".into(),
                passed: (mean - 1.0).abs() < 1e-12,
                value: mean,
                tolerance: 1e-12,
                semantics: "n loops shared by n colours in every sample".into(),
            });
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingMismatch {
    pub draw: usize,
    pub symbol: usize,
    pub diagonal: usize,
    pub fixed_points: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub n: usize,
    pub draws: usize,
    pub seed: u64,
    pub agreements: usize,
    /// First few disagreements, if any.
    pub mismatches: Vec<CouplingMismatch>,
}

/// For each draw, a uniform row permutation `sigma` and a symbol `i`: counts
/// `i` on the diagonal of the row-permuted square, and separately counts the
/// fixed points of `k -> col_i(sigma(k))`, where `col_i(r)` is the column of
/// `i` in row `r`.
pub fn row_permutation_coupling(sq: &LatinSquare, draws: usize, seed: u64) -> CouplingReport {
    let n = sq.n();
    let mut col_of = vec![vec![0usize; n + 1]; n + 1];
    for r in 1..=n {
        for c in 1..=n {
            col_of[sq.get(r, c)][r] = c;
        }
    }
    let results: Vec<(usize, usize, usize, usize)> = (0..draws)
        .into_par_iter()
        .map(|t| {
            let mut rng = task_rng(seed, t as u64);
            let sigma = random_permutation(n, &mut rng);
            let i = rng.gen_range(1..=n);
            let diagonal = sq.permute_rows(&sigma).diagonal().iter().filter(|&&s| s == i).count();
            let rho: Vec<usize> = sigma.iter().map(|&r| col_of[i][r]).collect();
            (t, i, diagonal, fixed_points(&rho))
        })
        .collect();
    let mut rep = CouplingReport {
        n,
        draws,
        seed,
        agreements: 0,
        mismatches: Vec::new(),
    };
    for (draw, symbol, diagonal, fp) in results {
        if diagonal == fp {
            rep.agreements += 1;
        } else if rep.mismatches.len() < 10 {
            rep.mismatches.push(CouplingMismatch {
                draw,
                symbol,
                diagonal,
                fixed_points: fp,
            });
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::enumerate_latin_squares;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n);
                out.push(q);
            }
        }
        out
    }

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn pmf_matches_enumerated_permutations() {
        for n in 1..=7 {
            let perms = permutations(n);
            let total = perms.len() as i64;
            for k in 0..=n {
                let hits = perms.iter().filter(|p| fixed_points(p) == k).count() as i64;
                assert_eq!(fixed_point_pmf(n, k).unwrap(), r(hits, total), "n={n} k={k}");
            }
        }
        assert_eq!(fixed_point_pmf(4, 0).unwrap(), r(3, 8));
        assert_eq!(fixed_point_pmf(5, 4).unwrap(), BigRational::zero());
        assert_eq!(fixed_point_pmf(5, 5).unwrap(), r(1, 120));
        assert!(fixed_point_pmf(3, 4).is_err());
    }

    #[test]
    fn diagonal_max_of_cyclic_squares() {
        for n in [3, 5, 7] {
            let z = cyclic_square(n).unwrap();
            let naive = (1..=n)
                .map(|s| (1..=n).filter(|&i| z.get(i, i) == s).count())
                .max()
                .unwrap();
            assert_eq!(diagonal_max_statistic(&z), naive);
            assert_eq!(naive, 1);
        }
        assert_eq!(diagonal_max_statistic(&cyclic_square(2).unwrap()), 2);
    }

    #[test]
    fn diagonal_max_equals_max_loops() {
        for sq in enumerate_latin_squares(4) {
            let g = latin_to_digraph(&sq);
            let loops = (1..=4).map(|c| g.loops_of_colour(c)).max().unwrap();
            assert_eq!(diagonal_max_statistic(&sq), loops);
        }
    }

    #[test]
    fn coupling_is_exact_on_small_orders() {
        for n in 1..=8 {
            let rep = row_permutation_coupling(&cyclic_square(n).unwrap(), 500, n as u64);
            assert_eq!(rep.agreements, 500, "{:?}", rep.mismatches);
        }
    }

    #[test]
    fn fixed_point_experiment_is_thread_independent() {
        let a = run_experiment(ExperimentKind::FixedPoints, 5, 25_000, 3).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_experiment(ExperimentKind::FixedPoints, 5, 25_000, 3).unwrap());
        assert_eq!(a, b);
        assert!(a.passed());
    }

    #[test]
    fn discrepancy_at_order_one_is_zero() {
        let rep = run_experiment(ExperimentKind::Discrepancy, 1, 50, 0).unwrap();
        assert_eq!(rep.summary[0].value, 0.0);
        assert_eq!(normalized_discrepancy(1, 1, 1, 1, 1), 0.0);
    }

    #[test]
    fn remaining_kinds_run() {
        let d = run_experiment(ExperimentKind::DiagMax, 5, 400, 1).unwrap();
        assert!(d.passed(), "{:?}", d.verdicts);
        let l = run_experiment(ExperimentKind::LoopsPerColour, 6, 40, 1).unwrap();
        assert!(l.passed());
        assert!(l.to_csv().lines().count() > 1);
        assert_eq!("loops-per-colour".parse::<ExperimentKind>().unwrap(), ExperimentKind::LoopsPerColour);
    }
}
