use super::GadgetError;
use crate::digraph::ColouredDigraph;
use crate::sampler::task_rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Largest order for which the upper check maximizes over all set pairs.
pub const UPPER_EXHAUSTIVE_MAX_N: usize = 14;
/// Largest order for which the lower check ranges over all set triples.
pub const LOWER_EXHAUSTIVE_MAX_N: usize = 10;
const LOCAL_SEARCH_RESTARTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum CheckMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

/// `e_H(A,B)`: arcs of any colour from `A` to `B`.
pub fn arc_count_between(h: &ColouredDigraph, a: &[usize], b: &[usize]) -> usize {
    let mut in_b = vec![false; h.n() + 1];
    for &v in b {
        in_b[v] = true;
    }
    a.iter()
        .map(|&u| {
            h.colours()
                .iter()
                .filter(|&&d| in_b[h.out_nb(d, u)])
                .count()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperQuasirandomReport {
    /// Largest `e_H(A,B)` found over `|A| = |B| = |D|`.
    pub max_arcs: usize,
    /// `(1 + slack)|D|^3/n`.
    pub bound: f64,
    pub holds: bool,
    /// True when `holds` is proven: exhaustive search, or a violation found.
    pub certified: bool,
    /// Ordered worst pair `(A, B)`.
    pub worst_a: Vec<usize>,
    pub worst_b: Vec<usize>,
    pub mode: CheckMode,
}

fn mask_to_vec(mask: u64) -> Vec<usize> {
    (0..64)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| i + 1)
        .collect()
}

/// Best `B` for a fixed `A`: the `k` heads receiving most arcs from `A`.
fn best_b(h: &ColouredDigraph, a_mask: u64, k: usize) -> (usize, u64) {
    let n = h.n();
    let mut cnt = vec![0usize; n + 1];
    for u in 1..=n {
        if a_mask >> (u - 1) & 1 == 1 {
            for &d in h.colours() {
                cnt[h.out_nb(d, u)] += 1;
            }
        }
    }
    top_k(&cnt, k)
}

/// Best `A` for a fixed `B`.
fn best_a(h: &ColouredDigraph, b_mask: u64, k: usize) -> (usize, u64) {
    let n = h.n();
    let mut cnt = vec![0usize; n + 1];
    for (u, c) in cnt.iter_mut().enumerate().skip(1) {
        *c = h
            .colours()
            .iter()
            .filter(|&&d| b_mask >> (h.out_nb(d, u) - 1) & 1 == 1)
            .count();
    }
    top_k(&cnt, k)
}

/// Sum and mask of the `k` largest entries of `cnt[1..]`, ties to low index.
fn top_k(cnt: &[usize], k: usize) -> (usize, u64) {
    let mut idx: Vec<usize> = (1..cnt.len()).collect();
    idx.sort_by_key(|&v| (std::cmp::Reverse(cnt[v]), v));
    let mut mask = 0u64;
    let mut sum = 0;
    for &v in idx.iter().take(k) {
        mask |= 1 << (v - 1);
        sum += cnt[v];
    }
    (sum, mask)
}

/// Checks `e_H(A,B) <= (1+slack)|D|^3/n` over all `|A| = |B| = |D|`. Exact
/// for `n <= 14`; above that, alternating local search from `seed` gives a
/// lower bound on the maximum and the report is certified only on violation.
pub fn upper_quasirandom_check(
    h: &ColouredDigraph,
    slack: f64,
    seed: u64,
) -> UpperQuasirandomReport {
    let n = h.n();
    let k = h.colours().len();
    let bound = (1.0 + slack) * (k as f64).powi(3) / n as f64;
    let (mut best, mut wa, mut wb) = (0usize, 0u64, 0u64);
    let mode;
    if n <= UPPER_EXHAUSTIVE_MAX_N {
        mode = CheckMode::Exhaustive;
        let mut first = true;
        for a in k_subsets(n, k) {
            let (e, b) = best_b(h, a, k);
            if first || e > best {
                (best, wa, wb) = (e, a, b);
                first = false;
            }
        }
    } else {
        assert!(n <= 64, "set masks hold at most 64 vertices");
        mode = CheckMode::Sampled {
            samples: LOCAL_SEARCH_RESTARTS,
            seed,
        };
        let mut rng = task_rng(seed, 0);
        for _ in 0..LOCAL_SEARCH_RESTARTS {
            let mut a = random_k_subset(n, k, &mut rng);
            let (mut e, mut b) = best_b(h, a, k);
            loop {
                let (e2, a2) = best_a(h, b, k);
                let (e3, b3) = best_b(h, a2, k);
                if e3.max(e2) <= e {
                    break;
                }
                (e, a, b) = (e3, a2, b3);
            }
            if e > best || wa == 0 && wb == 0 {
                (best, wa, wb) = (e, a, b);
            }
        }
    }
    let holds = best as f64 <= bound + 1e-9;
    UpperQuasirandomReport {
        max_arcs: best,
        bound,
        holds,
        certified: matches!(mode, CheckMode::Exhaustive) || !holds,
        worst_a: mask_to_vec(wa),
        worst_b: mask_to_vec(wb),
        mode,
    }
}

fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit = 1u64 << n;
    let mut cur = if k == 0 { 0 } else { (1u64 << k) - 1 };
    let mut done = k > n;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = cur;
        if k == 0 {
            done = true;
        } else {
            // Gosper's hack: next integer with the same popcount.
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            cur = (((r ^ cur) >> 2) / c) | r;
            if cur >= limit {
                done = true;
            }
        }
        Some(out)
    })
}

fn random_k_subset<R: Rng>(n: usize, k: usize, rng: &mut R) -> u64 {
    rand::seq::index::sample(rng, n, k)
        .iter()
        .fold(0u64, |m, i| m | 1 << i)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerQuasirandomReport {
    /// Minimum of `e_{G,D}(U1,U2) - |U1||U2||D|/n` over the triples examined.
    pub min_deviation: f64,
    /// `n^{5/3}`; the inequality holds when `min_deviation >= -threshold`.
    pub threshold: f64,
    pub holds: bool,
    pub worst_u1: Vec<usize>,
    pub worst_u2: Vec<usize>,
    pub worst_d: Vec<usize>,
    pub triples_checked: u64,
    pub mode: CheckMode,
}

/// `e_{G,D}(U1,U2) - |U1||U2||D|/n` for one triple.
pub fn lower_deviation(g: &ColouredDigraph, u1: &[usize], u2: &[usize], d: &[usize]) -> f64 {
    let n = g.n();
    let mut in_u2 = vec![false; n + 1];
    for &v in u2 {
        in_u2[v] = true;
    }
    let e: usize = u1
        .iter()
        .map(|&u| d.iter().filter(|&&c| in_u2[g.out_nb(c, u)]).count())
        .sum();
    e as f64 - (u1.len() * u2.len() * d.len()) as f64 / n as f64
}

/// Checks `e_{G,D}(U1,U2) >= |U1||U2||D|/n - n^{5/3}`. Exhaustive mode covers
/// every triple for `n <= 10`: for fixed `(U1,U2)` the worst `D` is exactly
/// the set of colours with fewer than `|U1||U2|/n` arcs from `U1` to `U2`.
pub fn lower_quasirandom_check(
    g: &ColouredDigraph,
    mode: CheckMode,
) -> Result<LowerQuasirandomReport, GadgetError> {
    let n = g.n();
    if !g.is_full() {
        return Err(GadgetError::Invalid(
            "the lower check needs all n colours".into(),
        ));
    }
    let threshold = (n as f64).powf(5.0 / 3.0);
    match mode {
        CheckMode::Exhaustive => {
            if n > LOWER_EXHAUSTIVE_MAX_N {
                return Err(GadgetError::Invalid(format!(
                    "exhaustive lower check is limited to n <= {LOWER_EXHAUSTIVE_MAX_N}"
                )));
            }
            let full = 1usize << n;
            // image[d][U1] = N+_d(U1) as a mask.
            let mut image = vec![vec![0u32; full]; n + 1];
            for d in 1..=n {
                for m in 1..full {
                    let low = m.trailing_zeros() as usize;
                    image[d][m] = image[d][m & (m - 1)] | 1 << (g.out_nb(d, low + 1) - 1);
                }
            }
            // Scaled deviation n*e - |U1||U2||D| as an exact integer.
            let mut best: Option<(i64, u32, u32, u32)> = None;
            for m1 in 0..full {
                let s1 = m1.count_ones() as i64;
                for m2 in 0..full as u32 {
                    let prod = s1 * m2.count_ones() as i64;
                    let mut dev = 0i64;
                    let mut dmask = 0u32;
                    for d in 1..=n {
                        let scaled = n as i64 * (image[d][m1] & m2).count_ones() as i64 - prod;
                        if scaled < 0 {
                            dev += scaled;
                            dmask |= 1 << (d - 1);
                        }
                    }
                    if best.is_none_or(|b| dev < b.0) {
                        best = Some((dev, m1 as u32, m2, dmask));
                    }
                }
            }
            let (dev, m1, m2, dm) = best.unwrap();
            let min_deviation = dev as f64 / n as f64;
            Ok(LowerQuasirandomReport {
                min_deviation,
                threshold,
                holds: min_deviation >= -threshold,
                worst_u1: mask_to_vec(m1 as u64),
                worst_u2: mask_to_vec(m2 as u64),
                worst_d: mask_to_vec(dm as u64),
                triples_checked: 1u64 << (3 * n),
                mode,
            })
        }
        CheckMode::Sampled { samples, seed } => {
            let mut rng = task_rng(seed, 0);
            let mut best: Option<(f64, Vec<usize>, Vec<usize>, Vec<usize>)> = None;
            for _ in 0..samples {
                let mut pick = || {
                    (1..=n)
                        .filter(|_| rng.gen_bool(0.5))
                        .collect::<Vec<usize>>()
                };
                let (u1, u2, d) = (pick(), pick(), pick());
                let dev = lower_deviation(g, &u1, &u2, &d);
                if best.as_ref().is_none_or(|b| dev < b.0) {
                    best = Some((dev, u1, u2, d));
                }
            }
            let (dev, u1, u2, d) = best.unwrap_or((0.0, Vec::new(), Vec::new(), Vec::new()));
            Ok(LowerQuasirandomReport {
                min_deviation: dev,
                threshold,
                holds: dev >= -threshold,
                worst_u1: u1,
                worst_u2: u2,
                worst_d: d,
                triples_checked: samples as u64,
                mode,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{colour_arc_count, latin_to_digraph};
    use crate::sampler::{cyclic_square, sample_latin_rectangle_with};

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for m in 0u32..1 << n {
            if m.count_ones() as usize == k {
                out.push((1..=n).filter(|i| m >> (i - 1) & 1 == 1).collect());
            }
        }
        out
    }

    #[test]
    fn full_square_meets_bound_with_equality() {
        let g = latin_to_digraph(&cyclic_square(6).unwrap());
        let r = upper_quasirandom_check(&g, 0.0, 0);
        assert_eq!(r.max_arcs, 36);
        assert!(r.holds && r.certified);
    }

    #[test]
    fn upper_matches_pair_enumeration() {
        let mut rng = task_rng(21, 0);
        for k in [1, 2, 4] {
            let h = sample_latin_rectangle_with(10, k, &mut rng);
            let naive = subsets(10, k)
                .iter()
                .flat_map(|a| subsets(10, k).into_iter().map(move |b| (a.clone(), b)))
                .map(|(a, b)| arc_count_between(&h, &a, &b))
                .max()
                .unwrap();
            let r = upper_quasirandom_check(&h, 1.0, 0);
            assert_eq!(r.max_arcs, naive);
            assert_eq!(arc_count_between(&h, &r.worst_a, &r.worst_b), naive);
            assert_eq!(r.holds, naive as f64 <= 2.0 * (k as f64).powi(3) / 10.0);
        }
    }

    #[test]
    fn sampled_upper_is_a_lower_bound() {
        let mut rng = task_rng(22, 0);
        let h = sample_latin_rectangle_with(20, 3, &mut rng);
        let r = upper_quasirandom_check(&h, 1.0, 5);
        assert!(matches!(r.mode, CheckMode::Sampled { .. }));
        assert_eq!(arc_count_between(&h, &r.worst_a, &r.worst_b), r.max_arcs);
        assert!(r.max_arcs <= 9);
    }

    #[test]
    fn lower_trivial_triples() {
        let g = latin_to_digraph(&cyclic_square(5).unwrap());
        let all: Vec<usize> = (1..=5).collect();
        assert_eq!(lower_deviation(&g, &all, &all, &all), 0.0);
        assert_eq!(lower_deviation(&g, &[], &all, &all), 0.0);
    }

    #[test]
    fn lower_exhaustive_matches_triple_loop_at_order_five() {
        let g = latin_to_digraph(&cyclic_square(5).unwrap());
        let r = lower_quasirandom_check(&g, CheckMode::Exhaustive).unwrap();
        let mut naive = f64::INFINITY;
        let sets: Vec<Vec<usize>> = (0..=5).flat_map(|k| subsets(5, k)).collect();
        for u1 in &sets {
            for u2 in &sets {
                for d in &sets {
                    let e = colour_arc_count(&g, u1, u2, d).unwrap() as f64;
                    naive = naive.min(e - (u1.len() * u2.len() * d.len()) as f64 / 5.0);
                }
            }
        }
        assert!((r.min_deviation - naive).abs() < 1e-9);
        assert!((lower_deviation(&g, &r.worst_u1, &r.worst_u2, &r.worst_d) - naive).abs() < 1e-9);
        assert!(r.holds);
    }
}
