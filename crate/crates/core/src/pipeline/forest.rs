//! Greedy growth of rainbow directed path forests.

use super::PipelineError;
use crate::digraph::{Arc, ColouredDigraph};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};

/// A rainbow directed linear forest on `V \ excluded` avoiding the forbidden
/// colours. Isolated vertices count as components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathForest {
    pub n: usize,
    /// Sorted by tail.
    pub arcs: Vec<Arc>,
    /// `(tail, head)` of every path, sorted by tail.
    pub components: Vec<(usize, usize)>,
    pub colours: BTreeSet<usize>,
    pub excluded: BTreeSet<usize>,
    pub forbidden_colours: BTreeSet<usize>,
}

impl PathForest {
    fn from_state(s: &ForestState) -> Self {
        let mut arcs = s.arcs.clone();
        arcs.sort();
        let components = (1..=s.n)
            .filter(|&v| !s.excluded[v] && s.pred[v] == 0)
            .map(|t| (t, s.end_of[t]))
            .collect();
        PathForest {
            n: s.n,
            colours: arcs.iter().map(|a| a.colour).collect(),
            arcs,
            components,
            excluded: (1..=s.n).filter(|&v| s.excluded[v]).collect(),
            forbidden_colours: (1..=s.n).filter(|&c| s.forbidden[c]).collect(),
        }
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// The vertices the forest spans, `V \ excluded`.
    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.n).filter(|v| !self.excluded.contains(v))
    }

    /// Arcs of each component in path order, aligned with `components`.
    pub fn component_paths(&self) -> Vec<Vec<Arc>> {
        let mut succ = vec![None; self.n + 1];
        for a in &self.arcs {
            succ[a.tail] = Some(*a);
        }
        self.components
            .iter()
            .map(|&(t, _)| {
                let mut out = Vec::new();
                let mut cur = t;
                while let Some(a) = succ[cur] {
                    out.push(a);
                    cur = a.head;
                }
                out
            })
            .collect()
    }

    /// Recomputes every invariant from the arc list.
    pub fn validate(&self, g: &ColouredDigraph) -> Result<(), PipelineError> {
        let bad = |s: String| Err(PipelineError::Invalid(format!("path forest: {s}")));
        let n = self.n;
        if g.n() != n {
            return bad(format!("order {n} but digraph has order {}", g.n()));
        }
        let mut outd = vec![0usize; n + 1];
        let mut ind = vec![0usize; n + 1];
        let mut colours = BTreeSet::new();
        for a in &self.arcs {
            if g.colour(a.tail, a.head) != Some(a.colour) {
                return bad(format!("{a:?} is not an arc of the digraph"));
            }
            if self.excluded.contains(&a.tail) || self.excluded.contains(&a.head) {
                return bad(format!("{a:?} touches an excluded vertex"));
            }
            if self.forbidden_colours.contains(&a.colour) {
                return bad(format!("{a:?} has a forbidden colour"));
            }
            if !colours.insert(a.colour) {
                return bad(format!("colour {} repeats", a.colour));
            }
            outd[a.tail] += 1;
            ind[a.head] += 1;
        }
        if (1..=n).any(|v| outd[v] > 1 || ind[v] > 1) {
            return bad("a vertex has two out-arcs or two in-arcs".into());
        }
        if colours != self.colours {
            return bad("stored colour set disagrees with the arcs".into());
        }
        // With degrees at most one, a cycle is exactly a component with no tail.
        let paths = self.component_paths();
        let covered: usize = paths.iter().map(|p| p.len()).sum();
        if covered != self.arcs.len() {
            return bad("arcs form a directed cycle".into());
        }
        let tails: Vec<usize> = self.domain().filter(|&v| ind[v] == 0).collect();
        let listed: Vec<usize> = self.components.iter().map(|c| c.0).collect();
        if tails != listed {
            return bad("component list disagrees with the arcs".into());
        }
        for (p, &(t, h)) in paths.iter().zip(&self.components) {
            if p.last().map_or(t, |a| a.head) != h {
                return bad(format!("component ({t},{h}) has the wrong head"));
            }
        }
        Ok(())
    }
}

/// How the next arc is picked among the valid ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcChoice {
    #[default]
    Random,
    /// Least valid arc by `(tail, head)`; deterministic.
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    /// Growth stops once the forest has at most this many components.
    pub budget: usize,
    pub choice: ArcChoice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestStall {
    pub step: usize,
    pub components: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestRun {
    pub forest: PathForest,
    /// Number of valid arcs at each accepted step.
    pub choice_counts: Vec<usize>,
    /// Set when no valid arc remained before the budget was reached.
    pub stall: Option<ForestStall>,
}

impl ForestRun {
    /// Natural log of the product of the choice counts.
    pub fn log_choice_product(&self) -> f64 {
        self.choice_counts.iter().map(|&c| (c as f64).ln()).sum()
    }

    /// Natural log of the product of `(n'' - j + 1)^3 / n` over the same
    /// steps, where `n''` is the number of vertices the forest spans.
    pub fn log_reference_product(&self) -> f64 {
        let n = self.forest.n as f64;
        let span = (self.forest.n - self.forest.excluded.len()) as f64;
        (0..self.choice_counts.len())
            .map(|j| 3.0 * (span - j as f64).ln() - n.ln())
            .sum()
    }
}

/// Mutable growth state. `end_of[t]` is meaningful for path tails and
/// `start_of[h]` for path heads.
#[derive(Clone)]
struct ForestState {
    n: usize,
    excluded: Vec<bool>,
    forbidden: Vec<bool>,
    succ: Vec<usize>,
    pred: Vec<usize>,
    start_of: Vec<usize>,
    end_of: Vec<usize>,
    colour_used: Vec<bool>,
    arcs: Vec<Arc>,
    components: usize,
}

impl ForestState {
    fn new(n: usize, excluded: &[usize], forbidden: &[usize]) -> Result<Self, PipelineError> {
        let mut ex = vec![false; n + 1];
        let mut fb = vec![false; n + 1];
        for &v in excluded {
            if v == 0 || v > n {
                return Err(PipelineError::Config(format!("excluded vertex {v} out of range")));
            }
            ex[v] = true;
        }
        for &c in forbidden {
            if c == 0 || c > n {
                return Err(PipelineError::Config(format!("forbidden colour {c} out of range")));
            }
            fb[c] = true;
        }
        let components = (1..=n).filter(|&v| !ex[v]).count();
        Ok(ForestState {
            n,
            excluded: ex,
            forbidden: fb,
            succ: vec![0; n + 1],
            pred: vec![0; n + 1],
            start_of: (0..=n).collect(),
            end_of: (0..=n).collect(),
            colour_used: vec![false; n + 1],
            arcs: Vec::new(),
            components,
        })
    }

    fn arc_ok(&self, g: &ColouredDigraph, u: usize, w: usize) -> Option<usize> {
        // `w == start_of[u]` is the one arc that would close u's path into a cycle.
        if u == w || self.excluded[w] || self.pred[w] != 0 || w == self.start_of[u] {
            return None;
        }
        let c = g.colour(u, w)?;
        (!self.colour_used[c] && !self.forbidden[c]).then_some(c)
    }

    /// Valid arcs in `(tail, head)` order.
    fn valid_arcs(&self, g: &ColouredDigraph) -> Vec<Arc> {
        (1..=self.n)
            .into_par_iter()
            .filter(|&u| !self.excluded[u] && self.succ[u] == 0)
            .flat_map_iter(|u| {
                (1..=self.n).filter_map(move |w| self.arc_ok(g, u, w).map(|c| Arc::new(u, w, c)))
            })
            .collect()
    }

    fn add(&mut self, a: Arc) {
        let t = self.start_of[a.tail];
        let h = self.end_of[a.head];
        self.succ[a.tail] = a.head;
        self.pred[a.head] = a.tail;
        self.end_of[t] = h;
        self.start_of[h] = t;
        self.colour_used[a.colour] = true;
        self.arcs.push(a);
        self.components -= 1;
    }
}

/// Greedy rainbow path forest on `G - excluded` avoiding `forbidden`
/// colours: adds one valid arc at a time until at most `cfg.budget`
/// components remain or nothing is valid.
pub fn grow_path_forest<R: Rng>(
    g: &ColouredDigraph,
    excluded: &[usize],
    forbidden: &[usize],
    cfg: &ForestConfig,
    rng: &mut R,
) -> Result<ForestRun, PipelineError> {
    if cfg.budget == 0 || cfg.budget > g.n() {
        return Err(PipelineError::Config(format!(
            "component budget {} must lie in 1..={}",
            cfg.budget,
            g.n()
        )));
    }
    let mut s = ForestState::new(g.n(), excluded, forbidden)?;
    let mut choice_counts = Vec::new();
    let mut stall = None;
    while s.components > cfg.budget {
        let valid = s.valid_arcs(g);
        if valid.is_empty() {
            stall = Some(ForestStall {
                step: choice_counts.len(),
                components: s.components,
            });
            break;
        }
        choice_counts.push(valid.len());
        let pick = match cfg.choice {
            ArcChoice::Lexicographic => valid[0],
            ArcChoice::Random => valid[rng.gen_range(0..valid.len())],
        };
        s.add(pick);
    }
    Ok(ForestRun {
        forest: PathForest::from_state(&s),
        choice_counts,
        stall,
    })
}

/// Every arc set reachable in exactly `k` steps of the growth rule, each as
/// a sorted arc list. This is the full choice tree of [`grow_path_forest`].
pub fn reachable_forests(
    g: &ColouredDigraph,
    excluded: &[usize],
    forbidden: &[usize],
    k: usize,
) -> Result<BTreeSet<Vec<Arc>>, PipelineError> {
    let start = ForestState::new(g.n(), excluded, forbidden)?;
    let mut level: Vec<ForestState> = vec![start];
    for _ in 0..k {
        let mut seen: HashSet<Vec<Arc>> = HashSet::new();
        let mut next = Vec::new();
        for s in &level {
            for a in s.valid_arcs(g) {
                let mut key = s.arcs.clone();
                key.push(a);
                key.sort();
                if seen.insert(key) {
                    let mut t = s.clone();
                    t.add(a);
                    next.push(t);
                }
            }
        }
        level = next;
    }
    Ok(level
        .into_iter()
        .map(|s| {
            let mut a = s.arcs;
            a.sort();
            a
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::latin_to_digraph;
    use crate::sampler::{sample_latin_square, task_rng, SamplerConfig};

    /// Direct enumeration of `k`-subsets of non-loop arcs that form rainbow
    /// linear forests, checked by degrees and a union-find cycle test.
    fn rainbow_forests(g: &ColouredDigraph, k: usize) -> BTreeSet<Vec<Arc>> {
        let arcs: Vec<Arc> = g.arcs().into_iter().filter(|a| a.tail != a.head).collect();
        let mut out = BTreeSet::new();
        let mut pick = Vec::new();
        fn rec(arcs: &[Arc], from: usize, k: usize, pick: &mut Vec<Arc>, out: &mut BTreeSet<Vec<Arc>>, n: usize) {
            if pick.len() == k {
                let mut p = pick.clone();
                p.sort();
                out.insert(p);
                return;
            }
            for i in from..arcs.len() {
                let a = arcs[i];
                let clash = pick.iter().any(|b| b.colour == a.colour || b.tail == a.tail || b.head == a.head);
                if clash {
                    continue;
                }
                let mut parent: Vec<usize> = (0..=n).collect();
                fn find(p: &mut [usize], x: usize) -> usize {
                    if p[x] != x {
                        let r = find(p, p[x]);
                        p[x] = r;
                    }
                    p[x]
                }
                let mut cyc = false;
                for b in pick.iter().chain(std::iter::once(&a)) {
                    let (x, y) = (find(&mut parent, b.tail), find(&mut parent, b.head));
                    if x == y {
                        cyc = true;
                    }
                    parent[x] = y;
                }
                if cyc {
                    continue;
                }
                pick.push(a);
                rec(arcs, i + 1, k, pick, out, n);
                pick.pop();
            }
        }
        rec(&arcs, 0, k, &mut pick, &mut out, g.n());
        out
    }

    #[test]
    fn choice_tree_matches_direct_enumeration() {
        for n in 3..=5 {
            let g = latin_to_digraph(&sample_latin_square(&SamplerConfig::square(n, n as u64)));
            for k in 0..n {
                let tree = reachable_forests(&g, &[], &[], k).unwrap();
                assert_eq!(tree, rainbow_forests(&g, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn each_step_merges_two_components() {
        let g = latin_to_digraph(&sample_latin_square(&SamplerConfig::square(20, 1)));
        let run = grow_path_forest(
            &g,
            &[1, 2, 3],
            &[4],
            &ForestConfig {
                budget: 2,
                choice: ArcChoice::Random,
            },
            &mut task_rng(3, 0),
        )
        .unwrap();
        run.forest.validate(&g).unwrap();
        assert_eq!(run.forest.component_count() + run.forest.arcs.len(), 17);
        assert!(run.stall.is_some() || run.forest.component_count() == 2);
        assert!(!run.forest.colours.contains(&4));
    }

    #[test]
    fn zero_steps_leaves_singletons() {
        let g = latin_to_digraph(&sample_latin_square(&SamplerConfig::square(9, 2)));
        let run = grow_path_forest(
            &g,
            &[5],
            &[],
            &ForestConfig {
                budget: 8,
                choice: ArcChoice::Lexicographic,
            },
            &mut task_rng(0, 0),
        )
        .unwrap();
        assert!(run.choice_counts.is_empty());
        assert_eq!(run.forest.components.len(), 8);
        assert!(run.forest.components.iter().all(|&(t, h)| t == h));
    }

    #[test]
    fn lexicographic_mode_is_deterministic() {
        let g = latin_to_digraph(&sample_latin_square(&SamplerConfig::square(12, 4)));
        let cfg = ForestConfig {
            budget: 1,
            choice: ArcChoice::Lexicographic,
        };
        let a = grow_path_forest(&g, &[], &[], &cfg, &mut task_rng(1, 0)).unwrap();
        let b = grow_path_forest(&g, &[], &[], &cfg, &mut task_rng(2, 0)).unwrap();
        assert_eq!(a.forest, b.forest);
        assert_eq!(a.choice_counts, b.choice_counts);
    }

    #[test]
    fn validator_rejects_a_cycle() {
        let g = latin_to_digraph(&sample_latin_square(&SamplerConfig::square(6, 5)));
        let mut f = grow_path_forest(
            &g,
            &[],
            &[],
            &ForestConfig {
                budget: 6,
                choice: ArcChoice::Lexicographic,
            },
            &mut task_rng(0, 0),
        )
        .unwrap()
        .forest;
        let a = Arc::new(1, 2, g.colour(1, 2).unwrap());
        let b = Arc::new(2, 1, g.colour(2, 1).unwrap());
        f.arcs = vec![a, b];
        f.colours = [a.colour, b.colour].into_iter().collect();
        f.components = vec![(3, 3), (4, 4), (5, 5), (6, 6)];
        assert!(f.validate(&g).is_err());
    }
}
