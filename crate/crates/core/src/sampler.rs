//! Deterministic families and seeded random sampling of Latin squares and
//! Latin rectangles.

use crate::digraph::{latin_to_digraph, ColouredDigraph};
use crate::square::{LatinError, LatinSquare};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Orders at or below this are sampled exactly uniformly by enumeration.
pub const EXACT_UNIFORM_MAX_N: usize = 4;

/// Private RNG stream for `(seed, task)`. ChaCha8 is specified independently
/// of platform, so streams are reproducible everywhere.
pub fn task_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Moves of the mixing chain; `None` means `n^3`.
    pub burn_in_moves: Option<u64>,
    pub n: usize,
    /// Rectangle height; ignored by square sampling.
    pub k: usize,
    /// Stream index, so that parallel callers get independent draws.
    #[serde(default)]
    pub task: u64,
}

impl SamplerConfig {
    pub fn square(n: usize, seed: u64) -> Self {
        SamplerConfig {
            seed,
            burn_in_moves: None,
            n,
            k: n,
            task: 0,
        }
    }

    pub fn rectangle(n: usize, k: usize, seed: u64) -> Self {
        SamplerConfig {
            seed,
            burn_in_moves: None,
            n,
            k,
            task: 0,
        }
    }

    pub fn with_task(mut self, task: u64) -> Self {
        self.task = task;
        self
    }

    pub fn burn_in(&self) -> u64 {
        self.burn_in_moves.unwrap_or((self.n as u64).pow(3))
    }
}

/// Addition table of `Z_n`, shifted to symbols `1..=n`.
pub fn cyclic_square(n: usize) -> Result<LatinSquare, LatinError> {
    if n == 0 {
        return Err(LatinError::ZeroOrder);
    }
    let mut cells = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            cells.push(((i + j) % n + 1) as u16);
        }
    }
    Ok(LatinSquare::from_flat_unchecked(n, cells))
}

/// Every Latin square of order `n`, in lexicographic row-major order.
/// Intended for `n <= 5`.
pub fn enumerate_latin_squares(n: usize) -> Vec<LatinSquare> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut cells = vec![0u16; n * n];
    let mut row_used = vec![0u32; n];
    let mut col_used = vec![0u32; n];
    fn rec(
        pos: usize,
        n: usize,
        cells: &mut [u16],
        row_used: &mut [u32],
        col_used: &mut [u32],
        out: &mut Vec<LatinSquare>,
    ) {
        if pos == n * n {
            out.push(LatinSquare::from_flat_unchecked(n, cells.to_vec()));
            return;
        }
        let (i, j) = (pos / n, pos % n);
        for s in 0..n {
            let bit = 1u32 << s;
            if row_used[i] & bit == 0 && col_used[j] & bit == 0 {
                row_used[i] |= bit;
                col_used[j] |= bit;
                cells[pos] = (s + 1) as u16;
                rec(pos + 1, n, cells, row_used, col_used, out);
                row_used[i] &= !bit;
                col_used[j] &= !bit;
            }
        }
    }
    rec(0, n, &mut cells, &mut row_used, &mut col_used, &mut out);
    out
}

/// Samples a Latin square. Exactly uniform for `n <= 4`; otherwise the output
/// of a Jacobson-Matthews chain after `burn_in` moves from a seeded start.
pub fn sample_latin_square(cfg: &SamplerConfig) -> LatinSquare {
    let mut rng = task_rng(cfg.seed, cfg.task);
    sample_latin_square_with(cfg.n, cfg.burn_in(), &mut rng)
}

pub fn sample_latin_square_with<R: Rng>(n: usize, burn_in: u64, rng: &mut R) -> LatinSquare {
    assert!(n >= 1, "order must be positive");
    if n <= EXACT_UNIFORM_MAX_N {
        let all = small_squares(n);
        return all[rng.gen_range(0..all.len())].clone();
    }
    let start = isotopic_cyclic(n, rng);
    let mut chain = JmChain::new(&start);
    chain.run(burn_in, rng);
    chain.to_square()
}

fn small_squares(n: usize) -> &'static [LatinSquare] {
    static CACHE: OnceLock<Vec<Vec<LatinSquare>>> = OnceLock::new();
    &CACHE.get_or_init(|| {
        (0..=EXACT_UNIFORM_MAX_N)
            .map(enumerate_latin_squares)
            .collect()
    })[n]
}

/// A cyclic square with uniformly random row, column and symbol relabelling.
fn isotopic_cyclic<R: Rng>(n: usize, rng: &mut R) -> LatinSquare {
    let mut rp: Vec<usize> = (0..n).collect();
    let mut cp: Vec<usize> = (0..n).collect();
    let mut sp: Vec<usize> = (0..n).collect();
    rp.shuffle(rng);
    cp.shuffle(rng);
    sp.shuffle(rng);
    let mut cells = vec![0u16; n * n];
    for i in 0..n {
        for j in 0..n {
            cells[rp[i] * n + cp[j]] = (sp[(i + j) % n] + 1) as u16;
        }
    }
    LatinSquare::from_flat_unchecked(n, cells)
}

/// Jacobson-Matthews chain on the incidence cube of a Latin square.
struct JmChain {
    n: usize,
    cube: Vec<i8>,
    improper: Option<(usize, usize, usize)>,
}

impl JmChain {
    fn new(sq: &LatinSquare) -> Self {
        let n = sq.n();
        let mut cube = vec![0i8; n * n * n];
        for r in 0..n {
            for c in 0..n {
                let s = sq.get(r + 1, c + 1) - 1;
                cube[(r * n + c) * n + s] = 1;
            }
        }
        JmChain {
            n,
            cube,
            improper: None,
        }
    }

    #[inline]
    fn idx(&self, r: usize, c: usize, s: usize) -> usize {
        (r * self.n + c) * self.n + s
    }

    fn ones_in_row_line(&self, c: usize, s: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&r| self.cube[self.idx(r, c, s)] == 1)
            .collect()
    }

    fn ones_in_col_line(&self, r: usize, s: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&c| self.cube[self.idx(r, c, s)] == 1)
            .collect()
    }

    fn ones_in_sym_line(&self, r: usize, c: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&s| self.cube[self.idx(r, c, s)] == 1)
            .collect()
    }

    fn apply(&mut self, (r, c, s): (usize, usize, usize), r2: usize, c2: usize, s2: usize) {
        for (a, b, d) in [(r, c, s), (r, c2, s2), (r2, c, s2), (r2, c2, s)] {
            let i = self.idx(a, b, d);
            self.cube[i] += 1;
        }
        for (a, b, d) in [(r, c, s2), (r, c2, s), (r2, c, s), (r2, c2, s2)] {
            let i = self.idx(a, b, d);
            self.cube[i] -= 1;
        }
        let i = self.idx(r2, c2, s2);
        self.improper = if self.cube[i] == -1 {
            Some((r2, c2, s2))
        } else {
            None
        };
    }

    fn step<R: Rng>(&mut self, rng: &mut R) {
        let n = self.n;
        match self.improper {
            None => {
                let t = loop {
                    let (r, c, s) = (
                        rng.gen_range(0..n),
                        rng.gen_range(0..n),
                        rng.gen_range(0..n),
                    );
                    if self.cube[self.idx(r, c, s)] == 0 {
                        break (r, c, s);
                    }
                };
                let r2 = self.ones_in_row_line(t.1, t.2)[0];
                let c2 = self.ones_in_col_line(t.0, t.2)[0];
                let s2 = self.ones_in_sym_line(t.0, t.1)[0];
                self.apply(t, r2, c2, s2);
            }
            Some(t) => {
                let rs = self.ones_in_row_line(t.1, t.2);
                let cs = self.ones_in_col_line(t.0, t.2);
                let ss = self.ones_in_sym_line(t.0, t.1);
                debug_assert!(rs.len() == 2 && cs.len() == 2 && ss.len() == 2);
                let r2 = rs[rng.gen_range(0..2)];
                let c2 = cs[rng.gen_range(0..2)];
                let s2 = ss[rng.gen_range(0..2)];
                self.apply(t, r2, c2, s2);
            }
        }
    }

    /// Runs `moves` steps, then continues until the state is proper.
    fn run<R: Rng>(&mut self, moves: u64, rng: &mut R) {
        if self.n < 2 {
            return;
        }
        for _ in 0..moves {
            self.step(rng);
        }
        while self.improper.is_some() {
            self.step(rng);
        }
    }

    fn to_square(&self) -> LatinSquare {
        let n = self.n;
        let mut cells = vec![0u16; n * n];
        for r in 0..n {
            for c in 0..n {
                let s = self.ones_in_sym_line(r, c)[0];
                cells[r * n + c] = (s + 1) as u16;
            }
        }
        let sq = LatinSquare::from_flat_unchecked(n, cells);
        debug_assert!(sq.validate().is_ok());
        sq
    }
}

/// Samples an element of `G_D` with `D = {1..k}` as a `k x n` Latin
/// rectangle, one colour class (row) at a time.
pub fn sample_latin_rectangle(cfg: &SamplerConfig) -> ColouredDigraph {
    assert!(
        cfg.k >= 1 && cfg.k <= cfg.n,
        "rectangle height must lie in 1..=n"
    );
    let mut rng = task_rng(cfg.seed, cfg.task);
    sample_latin_rectangle_with(cfg.n, cfg.k, &mut rng)
}

/// Attempts at a uniformly random permutation before switching to matching.
const ROW_PROPOSALS: usize = 64;

pub fn sample_latin_rectangle_with<R: Rng>(n: usize, k: usize, rng: &mut R) -> ColouredDigraph {
    if k == n {
        return latin_to_digraph(&sample_latin_square_with(n, (n as u64).pow(3), rng));
    }
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(k);
    // used[t][h]: some earlier row already maps tail t to head h.
    let mut used = vec![vec![false; n + 1]; n + 1];
    for _ in 0..k {
        let mut accepted = None;
        let mut perm: Vec<usize> = (1..=n).collect();
        for _ in 0..ROW_PROPOSALS {
            perm.shuffle(rng);
            if perm.iter().enumerate().all(|(t0, &h)| !used[t0 + 1][h]) {
                accepted = Some(perm.clone());
                break;
            }
        }
        let row = match accepted {
            Some(r) => r,
            None => random_matching_row(n, |t, h| !used[t][h], rng)
                .expect("a Latin rectangle always extends by one row"),
        };
        for (t0, &h) in row.iter().enumerate() {
            used[t0 + 1][h] = true;
        }
        rows.push(row);
    }
    let classes: Vec<(usize, Vec<usize>)> = rows
        .into_iter()
        .enumerate()
        .map(|(i, r)| (i + 1, r))
        .collect();
    ColouredDigraph::from_classes(n, &classes).expect("sampled rows form a Latin rectangle")
}

/// Random perfect matching tail -> head among allowed pairs, by augmenting
/// paths over shuffled candidate lists. Returns `heads[t-1]`.
pub(crate) fn random_matching_row<R: Rng, F: Fn(usize, usize) -> bool>(
    n: usize,
    allowed: F,
    rng: &mut R,
) -> Option<Vec<usize>> {
    let mut adj: Vec<Vec<usize>> = (1..=n)
        .map(|t| {
            let mut v: Vec<usize> = (1..=n).filter(|&h| allowed(t, h)).collect();
            v.shuffle(rng);
            v
        })
        .collect();
    adj.insert(0, Vec::new());
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let m = crate::matching::max_bipartite_matching(n + 1, n + 1, &adj, &order);
    let mut heads = vec![0; n];
    for t in 1..=n {
        heads[t - 1] = m.left_to_right[t]?;
    }
    Some(heads)
}

/// Completes a partial array of `rows x n` entries (0 = empty) so that every
/// row is a permutation of `1..=n` and columns have distinct entries, avoiding
/// `forbidden(row, col, symbol)`. Rows are filled in order by random matching;
/// the whole fill restarts on a dead end.
pub fn complete_partial_rows<R: Rng, F: Fn(usize, usize, usize) -> bool>(
    n: usize,
    partial: &[Vec<usize>],
    forbidden: F,
    attempts: usize,
    rng: &mut R,
) -> Option<Vec<Vec<usize>>> {
    let rows = partial.len();
    // Symbols prescribed anywhere in each column.
    let mut col_fixed = vec![vec![false; n + 1]; n + 1];
    for row in partial {
        for (c0, &s) in row.iter().enumerate() {
            if s != 0 {
                col_fixed[c0 + 1][s] = true;
            }
        }
    }
    'attempt: for _ in 0..attempts {
        let mut col_used = vec![vec![false; n + 1]; n + 1];
        let mut out = Vec::with_capacity(rows);
        for (r0, row) in partial.iter().enumerate() {
            let r = r0 + 1;
            let mut in_row = vec![false; n + 1];
            for &s in row {
                if s != 0 {
                    in_row[s] = true;
                }
            }
            let filled = random_matching_row(
                n,
                |c, s| {
                    let fixed = row[c - 1];
                    if fixed != 0 {
                        return s == fixed;
                    }
                    !in_row[s] && !col_used[c][s] && !col_fixed[c][s] && !forbidden(r, c, s)
                },
                rng,
            );
            let Some(filled) = filled else {
                continue 'attempt;
            };
            for (c0, &s) in filled.iter().enumerate() {
                col_used[c0 + 1][s] = true;
            }
            out.push(filled);
        }
        return Some(out);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    /// Counts Latin squares by stacking permutations, independently of the
    /// cell-by-cell enumerator.
    fn count_by_rows(n: usize) -> usize {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, n);
                    out.push(q);
                }
            }
            out
        }
        let all = perms(n);
        fn rec(rows: &mut Vec<Vec<usize>>, all: &[Vec<usize>], n: usize) -> usize {
            if rows.len() == n {
                return 1;
            }
            let mut total = 0;
            for p in all {
                if rows.iter().all(|r| r.iter().zip(p).all(|(a, b)| a != b)) {
                    rows.push(p.clone());
                    total += rec(rows, all, n);
                    rows.pop();
                }
            }
            total
        }
        rec(&mut Vec::new(), &all, n)
    }

    #[test]
    fn enumeration_matches_row_stacking_oracle() {
        for n in 1..=4 {
            assert_eq!(enumerate_latin_squares(n).len(), count_by_rows(n));
        }
        assert_eq!(count_by_rows(4), 576);
    }

    #[test]
    fn cyclic_examples() {
        assert_eq!(
            cyclic_square(2).unwrap().rows(),
            vec![vec![1, 2], vec![2, 1]]
        );
        assert_eq!(
            cyclic_square(3).unwrap().rows(),
            vec![vec![1, 2, 3], vec![2, 3, 1], vec![3, 1, 2]]
        );
        assert!(cyclic_square(0).is_err());
    }

    #[test]
    fn order_one_is_forced() {
        for seed in 0..5 {
            assert_eq!(
                sample_latin_square(&SamplerConfig::square(1, seed)).rows(),
                vec![vec![1]]
            );
        }
    }

    #[test]
    fn same_seed_same_square() {
        for n in [3, 6, 9] {
            let cfg = SamplerConfig::square(n, 42);
            assert_eq!(sample_latin_square(&cfg), sample_latin_square(&cfg));
            let a = sample_latin_square(&cfg.clone().with_task(1));
            assert!(a.validate().is_ok());
        }
    }

    #[test]
    fn chain_output_is_latin() {
        let mut rng = task_rng(7, 0);
        for n in 5..=12 {
            let sq = sample_latin_square_with(n, 500, &mut rng);
            assert!(sq.validate().is_ok());
        }
    }

    #[test]
    fn order_four_is_uniform() {
        // Chi-square over the 576 squares, 1e5 samples, significance 1e-3.
        let all = enumerate_latin_squares(4);
        let index: HashMap<LatinSquare, usize> = all
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        let mut rng = task_rng(2024, 0);
        let samples = 100_000;
        let mut counts = vec![0f64; all.len()];
        for _ in 0..samples {
            counts[index[&sample_latin_square_with(4, 0, &mut rng)]] += 1.0;
        }
        let expected = samples as f64 / all.len() as f64;
        let chi2: f64 = counts
            .iter()
            .map(|c| (c - expected).powi(2) / expected)
            .sum();
        // 0.999 quantile of chi-square with 575 degrees of freedom.
        assert!(chi2 < 694.0, "chi2 = {chi2}");
        let sigma = (samples as f64 * (1.0 / 576.0) * (575.0 / 576.0)).sqrt();
        let worst = counts
            .iter()
            .map(|c| (c - expected).abs())
            .fold(0.0, f64::max);
        assert!(
            worst < 4.5 * sigma,
            "worst deviation {worst} vs sigma {sigma}"
        );
    }

    #[test]
    fn rectangle_boundaries() {
        let one = sample_latin_rectangle(&SamplerConfig::rectangle(6, 1, 3));
        assert_eq!(one.colours(), &[1]);
        assert!(one.validate().is_ok());
        let full = sample_latin_rectangle(&SamplerConfig::rectangle(6, 6, 3));
        assert!(full.is_full());
        for k in 1..=9 {
            let g = sample_latin_rectangle(&SamplerConfig::rectangle(9, k, k as u64));
            assert_eq!(g.arc_count(), 9 * k);
            assert!(g.validate().is_ok());
        }
    }

    #[test]
    fn second_row_is_uniform_over_compatible_rows() {
        // With first row fixed by conditioning, the second row must be uniform
        // over the 9 derangement-compatible permutations.
        let mut rng = task_rng(11, 0);
        let samples = 100_000;
        let mut counts: HashMap<Vec<usize>, HashMap<Vec<usize>, usize>> = HashMap::new();
        for _ in 0..samples {
            let g = sample_latin_rectangle_with(4, 2, &mut rng);
            *counts
                .entry(g.class(1))
                .or_default()
                .entry(g.class(2))
                .or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        for (_, second) in counts {
            assert_eq!(second.len(), 9);
            let total: usize = second.values().sum();
            let p = 1.0 / 9.0;
            let sigma = (total as f64 * p * (1.0 - p)).sqrt();
            for &c in second.values() {
                assert!((c as f64 - total as f64 * p).abs() < 4.0 * sigma);
            }
        }
    }

    #[test]
    fn partial_completion_respects_prescriptions() {
        let mut rng = task_rng(5, 0);
        let n = 8;
        let mut partial = vec![vec![0; n]; n];
        partial[0][0] = 3;
        partial[4][6] = 3;
        partial[7][7] = 1;
        let filled = complete_partial_rows(
            n,
            &partial,
            |r, c, s| r == 2 && c == 2 && s == 5,
            50,
            &mut rng,
        )
        .unwrap();
        let sq = LatinSquare::from_rows(filled).unwrap();
        assert_eq!(sq.get(1, 1), 3);
        assert_eq!(sq.get(5, 7), 3);
        assert_eq!(sq.get(8, 8), 1);
        assert_ne!(sq.get(2, 2), 5);
    }
}
