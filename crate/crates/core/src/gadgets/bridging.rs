use super::{all_distinct, check_vertex, Footprint, GadgetError};
use crate::digraph::{Arc, ColouredDigraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// A `(y,z)`-bridging gadget. `w[i]` is `w_{i+1}`, `d[i]` is `d_{i+1}`.
///
/// Arcs: `y->w1` (d1), `w2->w1` (d2), `w2->w3` (d3), `z->w3` (d4),
/// `w4->y` (d3), `w4->w5` (d4), `w6->w5` (d1), `w6->z` (d2).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BridgingGadget {
    pub y: usize,
    pub z: usize,
    pub w: [usize; 6],
    pub d: [usize; 4],
}

impl BridgingGadget {
    pub fn arcs(&self) -> [Arc; 8] {
        let (y, z, w, d) = (self.y, self.z, self.w, self.d);
        [
            Arc::new(y, w[0], d[0]),
            Arc::new(w[1], w[0], d[1]),
            Arc::new(w[1], w[2], d[2]),
            Arc::new(z, w[2], d[3]),
            Arc::new(w[3], y, d[2]),
            Arc::new(w[3], w[4], d[3]),
            Arc::new(w[5], w[4], d[0]),
            Arc::new(w[5], z, d[1]),
        ]
    }

    pub fn validate(&self, g: &ColouredDigraph) -> Result<(), GadgetError> {
        let mut vs = vec![self.y, self.z];
        vs.extend(self.w);
        if !all_distinct(&vs) {
            return Err(GadgetError::Invalid(format!(
                "bridging gadget vertices {vs:?} repeat"
            )));
        }
        if !all_distinct(&self.d) {
            return Err(GadgetError::Invalid(
                "colours d1..d4 must be distinct".into(),
            ));
        }
        for a in self.arcs() {
            if g.colour(a.tail, a.head) != Some(a.colour) {
                return Err(GadgetError::Invalid(format!(
                    "arc {}->{} lacks colour {}",
                    a.tail, a.head, a.colour
                )));
            }
        }
        Ok(())
    }
}

impl Footprint for BridgingGadget {
    fn root_vertices(&self) -> Vec<usize> {
        vec![self.y, self.z]
    }
    fn root_colours(&self) -> Vec<usize> {
        Vec::new()
    }
    fn vertices(&self) -> Vec<usize> {
        let mut vs = vec![self.y, self.z];
        vs.extend(self.w);
        vs
    }
    fn colours(&self) -> Vec<usize> {
        self.d.to_vec()
    }
}

/// Up to `cap` `(y,z)`-bridging gadgets, in order of `(d1, d3, d2)`.
pub fn find_bridging_gadgets(
    g: &ColouredDigraph,
    y: usize,
    z: usize,
    cap: usize,
) -> Result<Vec<BridgingGadget>, GadgetError> {
    find_bridging_gadgets_avoiding(g, y, z, cap, &|_| false, &|_| false)
}

/// As [`find_bridging_gadgets`], skipping gadgets whose internal vertices or
/// colours are blocked. `cap` counts only the gadgets that survive.
pub fn find_bridging_gadgets_avoiding(
    g: &ColouredDigraph,
    y: usize,
    z: usize,
    cap: usize,
    blocked_vertex: &(dyn Fn(usize) -> bool + Sync),
    blocked_colour: &(dyn Fn(usize) -> bool + Sync),
) -> Result<Vec<BridgingGadget>, GadgetError> {
    let n = g.n();
    check_vertex(y, n)?;
    check_vertex(z, n)?;
    if y == z {
        return Err(GadgetError::SameRoots(y));
    }
    let colours = g.colours();
    let per_d1: Vec<Vec<BridgingGadget>> = colours
        .par_iter()
        .map(|&d1| {
            let mut out = Vec::new();
            let w1 = g.out_nb(d1, y);
            if blocked_colour(d1) || blocked_vertex(w1) {
                return out;
            }
            for &d3 in colours {
                if d3 == d1 || blocked_colour(d3) {
                    continue;
                }
                let w4 = g.in_nb(d3, y);
                if blocked_vertex(w4) {
                    continue;
                }
                for &d2 in colours {
                    if d2 == d1 || d2 == d3 || blocked_colour(d2) {
                        continue;
                    }
                    let w2 = g.in_nb(d2, w1);
                    let w3 = g.out_nb(d3, w2);
                    let Some(d4) = g.colour(z, w3) else { continue };
                    if d4 == d1 || d4 == d2 || d4 == d3 || blocked_colour(d4) {
                        continue;
                    }
                    let w5 = g.out_nb(d4, w4);
                    let w6 = g.in_nb(d1, w5);
                    if g.colour(w6, z) != Some(d2)
                        || [w2, w3, w5, w6].iter().any(|&w| blocked_vertex(w))
                    {
                        continue;
                    }
                    if all_distinct(&[y, z, w1, w2, w3, w4, w5, w6]) {
                        out.push(BridgingGadget {
                            y,
                            z,
                            w: [w1, w2, w3, w4, w5, w6],
                            d: [d1, d2, d3, d4],
                        });
                        if out.len() >= cap {
                            return out;
                        }
                    }
                }
            }
            out
        })
        .collect();
    Ok(per_d1.into_iter().flatten().take(cap).collect())
}

/// An ordered partition of the colour set into six parts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColourPartition {
    pub parts: Vec<Vec<usize>>,
}

impl ColourPartition {
    /// Deals the sorted colours to parts `1, 2, ..., 6, 1, 2, ...`.
    pub fn round_robin(colours: &[usize]) -> Self {
        let mut sorted = colours.to_vec();
        sorted.sort_unstable();
        let mut parts = vec![Vec::new(); 6];
        for (i, d) in sorted.into_iter().enumerate() {
            parts[i % 6].push(d);
        }
        ColourPartition { parts }
    }

    /// Checks that the parts are six, disjoint, cover `colours` and differ in
    /// size by at most one.
    pub fn validate(&self, colours: &[usize]) -> Result<(), GadgetError> {
        if self.parts.len() != 6 {
            return Err(GadgetError::BadPartition(format!(
                "{} parts instead of 6",
                self.parts.len()
            )));
        }
        let mut all: Vec<usize> = self.parts.iter().flatten().copied().collect();
        all.sort_unstable();
        let mut want = colours.to_vec();
        want.sort_unstable();
        if all != want {
            return Err(GadgetError::BadPartition(
                "parts do not partition the colour set".into(),
            ));
        }
        let min = self.parts.iter().map(Vec::len).min().unwrap();
        let max = self.parts.iter().map(Vec::len).max().unwrap();
        if max > min + 1 {
            return Err(GadgetError::BadPartition(format!(
                "part sizes range from {min} to {max}"
            )));
        }
        Ok(())
    }

    /// `part[d]` is the 1-based index of the part holding `d`, or 0.
    pub fn lookup(&self, n: usize) -> Vec<u8> {
        let mut part = vec![0u8; n + 1];
        for (i, p) in self.parts.iter().enumerate() {
            for &d in p {
                if d <= n {
                    part[d] = (i + 1) as u8;
                }
            }
        }
        part
    }
}

/// A `(y,z,P)`-bridge: a bridging gadget with `y->w2` coloured in part 5 and
/// `z->w5` coloured in part 6, with `d_i` in part `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bridge {
    pub y: usize,
    pub z: usize,
    pub w: [usize; 6],
    pub d: [usize; 6],
    pub distinguishable: bool,
}

impl Bridge {
    pub fn gadget(&self) -> BridgingGadget {
        BridgingGadget {
            y: self.y,
            z: self.z,
            w: self.w,
            d: [self.d[0], self.d[1], self.d[2], self.d[3]],
        }
    }

    pub fn arcs(&self) -> Vec<Arc> {
        let mut arcs = self.gadget().arcs().to_vec();
        arcs.push(Arc::new(self.y, self.w[1], self.d[4]));
        arcs.push(Arc::new(self.z, self.w[4], self.d[5]));
        arcs
    }

    /// `w2->w1`, `w2->w3`, `w4->w5`, `w6->w5`.
    pub fn middle_arcs(&self) -> [(usize, usize); 4] {
        let w = self.w;
        [(w[1], w[0]), (w[1], w[2]), (w[3], w[4]), (w[5], w[4])]
    }

    pub fn validate(&self, g: &ColouredDigraph, p: &ColourPartition) -> Result<(), GadgetError> {
        self.gadget().validate(g)?;
        let part = p.lookup(g.n());
        for (i, &d) in self.d.iter().enumerate() {
            if part[d] as usize != i + 1 {
                return Err(GadgetError::Invalid(format!(
                    "colour d{} = {d} is not in part {}",
                    i + 1,
                    i + 1
                )));
            }
        }
        for a in self.arcs() {
            if g.colour(a.tail, a.head) != Some(a.colour) {
                return Err(GadgetError::Invalid(format!(
                    "arc {}->{} lacks colour {}",
                    a.tail, a.head, a.colour
                )));
            }
        }
        Ok(())
    }
}

impl Footprint for Bridge {
    fn root_vertices(&self) -> Vec<usize> {
        vec![self.y, self.z]
    }
    fn root_colours(&self) -> Vec<usize> {
        Vec::new()
    }
    fn vertices(&self) -> Vec<usize> {
        let mut vs = vec![self.y, self.z];
        vs.extend(self.w);
        vs
    }
    fn colours(&self) -> Vec<usize> {
        self.d.to_vec()
    }
}

/// Every `(y,z,P)`-bridge of `h`, with distinguishability marked: a bridge is
/// distinguishable when no other bridge contains any of its middle arcs.
/// Bridges are listed in order of `(d1, d5, d6, d3)`.
pub fn enumerate_bridges(
    h: &ColouredDigraph,
    y: usize,
    z: usize,
    p: &ColourPartition,
) -> Result<Vec<Bridge>, GadgetError> {
    let n = h.n();
    check_vertex(y, n)?;
    check_vertex(z, n)?;
    if y == z {
        return Err(GadgetError::SameRoots(y));
    }
    p.validate(h.colours())?;
    let part = p.lookup(n);
    let mut bridges = Vec::new();
    for &d1 in &p.parts[0] {
        let w1 = h.out_nb(d1, y);
        for &d5 in &p.parts[4] {
            let w2 = h.out_nb(d5, y);
            let Some(d2) = h.colour(w2, w1) else { continue };
            if part[d2] != 2 {
                continue;
            }
            for &d6 in &p.parts[5] {
                let w5 = h.out_nb(d6, z);
                let w6 = h.in_nb(d1, w5);
                if h.colour(w6, z) != Some(d2) {
                    continue;
                }
                for &d3 in &p.parts[2] {
                    let w4 = h.in_nb(d3, y);
                    let w3 = h.out_nb(d3, w2);
                    let Some(d4) = h.colour(z, w3) else { continue };
                    if part[d4] != 4 || h.colour(w4, w5) != Some(d4) {
                        continue;
                    }
                    if all_distinct(&[y, z, w1, w2, w3, w4, w5, w6]) {
                        bridges.push(Bridge {
                            y,
                            z,
                            w: [w1, w2, w3, w4, w5, w6],
                            d: [d1, d2, d3, d4, d5, d6],
                            distinguishable: false,
                        });
                    }
                }
            }
        }
    }
    let mut holders: HashMap<(usize, usize), usize> = HashMap::new();
    for b in &bridges {
        for a in b.arcs() {
            *holders.entry((a.tail, a.head)).or_default() += 1;
        }
    }
    for b in &mut bridges {
        b.distinguishable = b.middle_arcs().iter().all(|e| holders[e] == 1);
    }
    Ok(bridges)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeCensus {
    /// Number of distinguishable bridges.
    pub r: usize,
    pub total: usize,
    pub bridges: Vec<Bridge>,
}

pub fn count_distinguishable_bridges(
    h: &ColouredDigraph,
    y: usize,
    z: usize,
    p: &ColourPartition,
) -> Result<BridgeCensus, GadgetError> {
    let bridges = enumerate_bridges(h, y, z, p)?;
    Ok(BridgeCensus {
        r: bridges.iter().filter(|b| b.distinguishable).count(),
        total: bridges.len(),
        bridges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::latin_to_digraph;
    use crate::gadgets::{is_well_spread, LoadKind};
    use crate::sampler::{complete_partial_rows, sample_latin_square_with, task_rng};
    use crate::square::LatinSquare;

    /// Brute force over vertex 6-tuples, reading colours off the arcs.
    fn naive_gadgets(g: &ColouredDigraph, y: usize, z: usize) -> Vec<BridgingGadget> {
        let n = g.n();
        let mut out = Vec::new();
        let others: Vec<usize> = (1..=n).filter(|&u| u != y && u != z).collect();
        for &w1 in &others {
            for &w2 in &others {
                for &w3 in &others {
                    for &w4 in &others {
                        for &w5 in &others {
                            for &w6 in &others {
                                let w = [w1, w2, w3, w4, w5, w6];
                                if !all_distinct(&w) {
                                    continue;
                                }
                                let col = |a, b| g.colour(a, b);
                                let (Some(d1), Some(d2), Some(d3), Some(d4)) =
                                    (col(y, w1), col(w2, w1), col(w4, y), col(z, w3))
                                else {
                                    continue;
                                };
                                let cand = BridgingGadget {
                                    y,
                                    z,
                                    w,
                                    d: [d1, d2, d3, d4],
                                };
                                if cand.validate(g).is_ok() {
                                    out.push(cand);
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Bridges by brute force with distinguishability from pairwise overlaps.
    fn naive_bridges(h: &ColouredDigraph, y: usize, z: usize, p: &ColourPartition) -> Vec<Bridge> {
        let n = h.n();
        let part = p.lookup(n);
        let others: Vec<usize> = (1..=n).filter(|&u| u != y && u != z).collect();
        let mut out = Vec::new();
        for &w1 in &others {
            for &w2 in &others {
                if w2 == w1 || !h.has_arc(y, w1) || !h.has_arc(w2, w1) || !h.has_arc(y, w2) {
                    continue;
                }
                for &w3 in &others {
                    for &w4 in &others {
                        for &w5 in &others {
                            for &w6 in &others {
                                let w = [w1, w2, w3, w4, w5, w6];
                                if !all_distinct(&w) {
                                    continue;
                                }
                                let col = |a, b| h.colour(a, b);
                                let ds = [
                                    col(y, w1),
                                    col(w2, w1),
                                    col(w4, y),
                                    col(z, w3),
                                    col(y, w2),
                                    col(z, w5),
                                ];
                                if ds.iter().any(Option::is_none) {
                                    continue;
                                }
                                let d = ds.map(Option::unwrap);
                                if (0..6).any(|i| part[d[i]] as usize != i + 1) {
                                    continue;
                                }
                                let b = Bridge {
                                    y,
                                    z,
                                    w,
                                    d,
                                    distinguishable: false,
                                };
                                if b.validate(h, p).is_ok() {
                                    out.push(b);
                                }
                            }
                        }
                    }
                }
            }
        }
        let snapshot = out.clone();
        for b in &mut out {
            let mine = b.middle_arcs();
            b.distinguishable = !snapshot
                .iter()
                .any(|o| o.w != b.w && o.arcs().iter().any(|a| mine.contains(&(a.tail, a.head))));
        }
        out
    }

    fn sort_gadgets(mut v: Vec<BridgingGadget>) -> Vec<BridgingGadget> {
        v.sort_by_key(|b| (b.w, b.d));
        v
    }

    fn sort_bridges(mut v: Vec<Bridge>) -> Vec<Bridge> {
        v.sort_by_key(|b| (b.w, b.d));
        v
    }

    fn relabel(g: &ColouredDigraph, pi: &[usize]) -> ColouredDigraph {
        let n = g.n();
        let classes: Vec<(usize, Vec<usize>)> = g
            .colours()
            .iter()
            .map(|&d| {
                let mut heads = vec![0; n];
                for t in 1..=n {
                    heads[pi[t] - 1] = pi[g.out_nb(d, t)];
                }
                (d, heads)
            })
            .collect();
        ColouredDigraph::from_classes(n, &classes).unwrap()
    }

    fn plant(n: usize, k: usize, arcs: &[Arc], seed: u64) -> ColouredDigraph {
        let mut rng = task_rng(seed, 0);
        let mut partial = vec![vec![0; n]; k];
        for a in arcs {
            partial[a.colour - 1][a.tail - 1] = a.head;
        }
        let rows = complete_partial_rows(n, &partial, |_, _, _| false, 500, &mut rng).unwrap();
        let classes: Vec<(usize, Vec<usize>)> = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| (i + 1, r))
            .collect();
        ColouredDigraph::from_classes(n, &classes).unwrap()
    }

    #[test]
    fn planted_gadget_recovered_at_order_eight() {
        let planted = BridgingGadget {
            y: 1,
            z: 2,
            w: [3, 4, 5, 6, 7, 8],
            d: [1, 2, 3, 4],
        };
        let arcs = planted.arcs();
        let mut partial = vec![vec![0; 8]; 8];
        for a in arcs {
            partial[a.tail - 1][a.head - 1] = a.colour;
        }
        let mut rng = task_rng(8, 0);
        let rows = complete_partial_rows(8, &partial, |_, _, _| false, 500, &mut rng).unwrap();
        let g = latin_to_digraph(&LatinSquare::from_rows(rows).unwrap());
        let found = find_bridging_gadgets(&g, 1, 2, usize::MAX).unwrap();
        assert!(found.contains(&planted));
        assert_eq!(sort_gadgets(found), sort_gadgets(naive_gadgets(&g, 1, 2)));
    }

    #[test]
    fn gadget_count_invariant_under_relabelling() {
        let mut rng = task_rng(9, 0);
        let g = latin_to_digraph(&sample_latin_square_with(9, 729, &mut rng));
        let base = find_bridging_gadgets(&g, 1, 2, usize::MAX).unwrap().len();
        // Fixes 1 and 2, permutes the rest.
        let pi = vec![0, 1, 2, 9, 3, 8, 4, 7, 5, 6];
        let h = relabel(&g, &pi);
        assert_eq!(
            find_bridging_gadgets(&h, 1, 2, usize::MAX).unwrap().len(),
            base
        );
    }

    #[test]
    fn three_colours_have_no_bridging_gadget() {
        let mut rng = task_rng(10, 0);
        let g = crate::sampler::sample_latin_rectangle_with(10, 3, &mut rng);
        assert!(find_bridging_gadgets(&g, 1, 2, usize::MAX)
            .unwrap()
            .is_empty());
        assert_eq!(
            find_bridging_gadgets(&g, 1, 1, 1),
            Err(GadgetError::SameRoots(1))
        );
    }

    #[test]
    fn round_robin_is_equitable() {
        let p = ColourPartition::round_robin(&(1..=14).collect::<Vec<_>>());
        assert!(p.validate(&(1..=14).collect::<Vec<_>>()).is_ok());
        assert_eq!(p.parts[0], vec![1, 7, 13]);
        assert_eq!(p.parts[5], vec![6, 12]);
        let bad = ColourPartition {
            parts: vec![vec![1, 2, 3], vec![], vec![], vec![], vec![], vec![]],
        };
        assert!(bad.validate(&[1, 2, 3]).is_err());
    }

    #[test]
    fn single_planted_bridge_matches_brute_force() {
        let b = Bridge {
            y: 1,
            z: 2,
            w: [3, 4, 5, 6, 7, 8],
            d: [1, 2, 3, 4, 5, 6],
            distinguishable: true,
        };
        let h = plant(12, 6, &b.arcs(), 11);
        let p = ColourPartition::round_robin(h.colours());
        let census = count_distinguishable_bridges(&h, 1, 2, &p).unwrap();
        assert!(census.bridges.iter().any(|x| x.w == b.w && x.d == b.d));
        assert_eq!(
            sort_bridges(census.bridges.clone()),
            sort_bridges(naive_bridges(&h, 1, 2, &p))
        );
        if census.total == 1 {
            assert_eq!(census.r, 1);
        }
        assert!(census.r <= census.total);
    }

    #[test]
    fn shared_middle_arc_kills_distinguishability() {
        let b1 = Bridge {
            y: 1,
            z: 2,
            w: [3, 4, 5, 6, 7, 8],
            d: [1, 2, 3, 4, 5, 6],
            distinguishable: false,
        };
        let b2 = Bridge {
            y: 1,
            z: 2,
            w: [3, 4, 9, 10, 7, 8],
            d: [1, 2, 9, 10, 5, 6],
            distinguishable: false,
        };
        let mut arcs = b1.arcs();
        for a in b2.arcs() {
            if !arcs.contains(&a) {
                arcs.push(a);
            }
        }
        let h = plant(16, 12, &arcs, 12);
        let p = ColourPartition::round_robin(h.colours());
        let census = count_distinguishable_bridges(&h, 1, 2, &p).unwrap();
        for planted in [&b1, &b2] {
            let got = census
                .bridges
                .iter()
                .find(|x| x.w == planted.w && x.d == planted.d)
                .unwrap();
            assert!(!got.distinguishable);
        }
        assert_eq!(
            sort_bridges(census.bridges),
            sort_bridges(naive_bridges(&h, 1, 2, &p))
        );
    }

    #[test]
    fn random_rectangles_match_brute_force() {
        let mut rng = task_rng(13, 0);
        for _ in 0..3 {
            let h = crate::sampler::sample_latin_rectangle_with(11, 11, &mut rng);
            let p = ColourPartition::round_robin(h.colours());
            let census = count_distinguishable_bridges(&h, 1, 2, &p).unwrap();
            assert_eq!(
                sort_bridges(census.bridges.clone()),
                sort_bridges(naive_bridges(&h, 1, 2, &p))
            );
            let dist: Vec<Bridge> = census
                .bridges
                .into_iter()
                .filter(|b| b.distinguishable)
                .collect();
            assert!(is_well_spread(&dist, 11).unwrap().well_spread);
        }
    }

    #[test]
    fn overloaded_vertex_is_reported() {
        let g = BridgingGadget {
            y: 1,
            z: 2,
            w: [3, 4, 5, 6, 7, 8],
            d: [1, 2, 3, 4],
        };
        let many = vec![g; 5];
        let ws = is_well_spread(&many, 4).unwrap();
        assert!(!ws.well_spread);
        assert_eq!(ws.offender, Some((LoadKind::Vertex, 3, 5)));
        assert!(
            is_well_spread::<BridgingGadget>(&[], 4)
                .unwrap()
                .well_spread
        );
        let other = BridgingGadget {
            y: 2,
            z: 1,
            w: [3, 4, 5, 6, 7, 8],
            d: [1, 2, 3, 4],
        };
        assert!(is_well_spread(&[many[0].clone(), other], 4).is_err());
    }
}
