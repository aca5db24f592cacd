//! Properly arc-coloured looped digraphs on `1..=n` whose colour classes are
//! permutations. A full colour set gives the digraph of a Latin square; a
//! partial colour set `D` gives a `|D| x n` Latin rectangle.

use crate::square::LatinSquare;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DigraphError {
    #[error("colour {0} is outside 1..={1}")]
    ColourRange(usize, usize),
    #[error("vertex {0} is outside 1..={1}")]
    VertexRange(usize, usize),
    #[error("colour {0} is not in the colour set")]
    ColourAbsent(usize),
    #[error("colour {0} appears twice")]
    DuplicateColour(usize),
    #[error("colour {colour} is not a permutation: vertex {vertex} is the head of two arcs")]
    NotPermutation { colour: usize, vertex: usize },
    #[error("arc {tail}->{head} carries colours {first} and {second}")]
    ArcClash {
        tail: usize,
        head: usize,
        first: usize,
        second: usize,
    },
    #[error("arc {tail}->{head} of colour {colour} is not present")]
    ArcMissing {
        tail: usize,
        head: usize,
        colour: usize,
    },
    #[error("the colour set is not all of 1..={0}")]
    NotFull(usize),
}

/// A coloured arc `tail -> head`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub colour: usize,
}

impl Arc {
    pub fn new(tail: usize, head: usize, colour: usize) -> Self {
        Arc { tail, head, colour }
    }
}

/// Element of `G_D`: every colour class in `D` is a permutation of the vertices.
///
/// Per-colour successor/predecessor tables and the dense arc-colour matrix are
/// kept in sync. Equality compares the colour set and the matrix.
#[derive(Clone)]
pub struct ColouredDigraph {
    n: usize,
    colours: Vec<usize>,
    in_set: Vec<bool>,
    succ: Vec<u32>,
    pred: Vec<u32>,
    matrix: Vec<u16>,
}

impl PartialEq for ColouredDigraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.colours == other.colours && self.matrix == other.matrix
    }
}
impl Eq for ColouredDigraph {}

impl std::fmt::Debug for ColouredDigraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ColouredDigraph")
            .field("n", &self.n)
            .field("colours", &self.colours)
            .finish()
    }
}

impl ColouredDigraph {
    /// Builds from colour classes given as `(colour, heads)` where `heads[t-1]`
    /// is the head of the arc with tail `t`.
    pub fn from_classes(n: usize, classes: &[(usize, Vec<usize>)]) -> Result<Self, DigraphError> {
        let w = n + 1;
        let mut g = ColouredDigraph {
            n,
            colours: Vec::with_capacity(classes.len()),
            in_set: vec![false; w],
            succ: vec![0; w * w],
            pred: vec![0; w * w],
            matrix: vec![0; w * w],
        };
        for (colour, heads) in classes {
            let d = *colour;
            if d == 0 || d > n {
                return Err(DigraphError::ColourRange(d, n));
            }
            if g.in_set[d] {
                return Err(DigraphError::DuplicateColour(d));
            }
            if heads.len() != n {
                return Err(DigraphError::VertexRange(heads.len(), n));
            }
            g.in_set[d] = true;
            g.colours.push(d);
            for (t0, &h) in heads.iter().enumerate() {
                let t = t0 + 1;
                if h == 0 || h > n {
                    return Err(DigraphError::VertexRange(h, n));
                }
                if g.pred[d * w + h] != 0 {
                    return Err(DigraphError::NotPermutation {
                        colour: d,
                        vertex: h,
                    });
                }
                let prev = g.matrix[t * w + h];
                if prev != 0 {
                    return Err(DigraphError::ArcClash {
                        tail: t,
                        head: h,
                        first: prev as usize,
                        second: d,
                    });
                }
                g.succ[d * w + t] = h as u32;
                g.pred[d * w + h] = t as u32;
                g.matrix[t * w + h] = d as u16;
            }
        }
        g.colours.sort_unstable();
        Ok(g)
    }

    /// The arcless digraph on `1..=n`.
    pub fn empty(n: usize) -> Self {
        Self::from_classes(n, &[]).expect("empty digraph is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted colour set `D`.
    pub fn colours(&self) -> &[usize] {
        &self.colours
    }

    pub fn has_colour(&self, d: usize) -> bool {
        d <= self.n && self.in_set[d]
    }

    pub fn is_full(&self) -> bool {
        self.colours.len() == self.n
    }

    /// Colour of the arc `u -> v`, if present.
    #[inline]
    pub fn colour(&self, u: usize, v: usize) -> Option<usize> {
        match self.matrix[u * (self.n + 1) + v] {
            0 => None,
            c => Some(c as usize),
        }
    }

    #[inline]
    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.matrix[u * (self.n + 1) + v] != 0
    }

    /// `N+_d(u)`: head of the `d`-arc leaving `u`.
    #[inline]
    pub fn out_nb(&self, d: usize, u: usize) -> usize {
        self.succ[d * (self.n + 1) + u] as usize
    }

    /// `N-_d(v)`: tail of the `d`-arc entering `v`.
    #[inline]
    pub fn in_nb(&self, d: usize, v: usize) -> usize {
        self.pred[d * (self.n + 1) + v] as usize
    }

    /// Heads of the `d`-class indexed by tail (`heads[t-1]`).
    pub fn class(&self, d: usize) -> Vec<usize> {
        (1..=self.n).map(|t| self.out_nb(d, t)).collect()
    }

    pub fn arc_count(&self) -> usize {
        self.colours.len() * self.n
    }

    /// All arcs, ordered by tail then head.
    pub fn arcs(&self) -> Vec<Arc> {
        let mut out = Vec::with_capacity(self.arc_count());
        for u in 1..=self.n {
            for v in 1..=self.n {
                if let Some(c) = self.colour(u, v) {
                    out.push(Arc::new(u, v, c));
                }
            }
        }
        out
    }

    /// Number of loops of colour `d`.
    pub fn loops_of_colour(&self, d: usize) -> usize {
        (1..=self.n).filter(|&v| self.out_nb(d, v) == v).count()
    }

    /// In- and out-neighbours of `u` over all colours (excluding `u` itself).
    pub fn neighbourhood(&self, u: usize) -> Vec<bool> {
        let mut nb = vec![false; self.n + 1];
        for &d in &self.colours {
            nb[self.out_nb(d, u)] = true;
            nb[self.in_nb(d, u)] = true;
        }
        nb
    }

    /// Re-checks every invariant of the representation.
    pub fn validate(&self) -> Result<(), DigraphError> {
        let n = self.n;
        let w = n + 1;
        for &d in &self.colours {
            let mut hit = vec![false; w];
            for t in 1..=n {
                let h = self.out_nb(d, t);
                if h == 0 || h > n {
                    return Err(DigraphError::VertexRange(h, n));
                }
                if hit[h] {
                    return Err(DigraphError::NotPermutation {
                        colour: d,
                        vertex: h,
                    });
                }
                hit[h] = true;
                if self.in_nb(d, h) != t || self.colour(t, h) != Some(d) {
                    return Err(DigraphError::ArcMissing {
                        tail: t,
                        head: h,
                        colour: d,
                    });
                }
            }
        }
        let total = self.matrix.iter().filter(|&&c| c != 0).count();
        if total != self.arc_count() {
            return Err(DigraphError::NotFull(n));
        }
        Ok(())
    }

    /// Returns a copy with `removed` deleted and `added` inserted, then
    /// re-verifies that every colour class is still a permutation.
    pub fn with_edits(
        &self,
        removed: &[Arc],
        added: &[Arc],
    ) -> Result<ColouredDigraph, DigraphError> {
        let mut g = self.clone();
        let w = g.n + 1;
        for a in removed {
            if g.colour(a.tail, a.head) != Some(a.colour) {
                return Err(DigraphError::ArcMissing {
                    tail: a.tail,
                    head: a.head,
                    colour: a.colour,
                });
            }
            g.matrix[a.tail * w + a.head] = 0;
            g.succ[a.colour * w + a.tail] = 0;
            g.pred[a.colour * w + a.head] = 0;
        }
        for a in added {
            if !g.has_colour(a.colour) {
                return Err(DigraphError::ColourAbsent(a.colour));
            }
            if let Some(prev) = g.colour(a.tail, a.head) {
                return Err(DigraphError::ArcClash {
                    tail: a.tail,
                    head: a.head,
                    first: prev,
                    second: a.colour,
                });
            }
            if g.succ[a.colour * w + a.tail] != 0 || g.pred[a.colour * w + a.head] != 0 {
                return Err(DigraphError::NotPermutation {
                    colour: a.colour,
                    vertex: a.head,
                });
            }
            g.matrix[a.tail * w + a.head] = a.colour as u16;
            g.succ[a.colour * w + a.tail] = a.head as u32;
            g.pred[a.colour * w + a.head] = a.tail as u32;
        }
        g.validate()?;
        Ok(g)
    }
}

/// The digraph of `L`: arc `i -> j` coloured `L[i][j]`.
pub fn latin_to_digraph(sq: &LatinSquare) -> ColouredDigraph {
    let n = sq.n();
    let mut classes: Vec<(usize, Vec<usize>)> = (1..=n).map(|d| (d, vec![0; n])).collect();
    for i in 1..=n {
        for j in 1..=n {
            classes[sq.get(i, j) - 1].1[i - 1] = j;
        }
    }
    ColouredDigraph::from_classes(n, &classes)
        .expect("a valid Latin square yields a proper colouring")
}

/// Inverse of [`latin_to_digraph`]; requires the full colour set.
pub fn digraph_to_latin(g: &ColouredDigraph) -> Result<LatinSquare, DigraphError> {
    if !g.is_full() {
        return Err(DigraphError::NotFull(g.n()));
    }
    let n = g.n();
    let mut cells = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            cells.push(g.colour(i, j).expect("full digraph has every arc") as u16);
        }
    }
    Ok(LatinSquare::from_flat_unchecked(n, cells))
}

/// `G|_D`: deletes every arc whose colour is outside `D`.
pub fn restrict_to_colours(
    g: &ColouredDigraph,
    d: &[usize],
) -> Result<ColouredDigraph, DigraphError> {
    let mut classes = Vec::with_capacity(d.len());
    for &c in d {
        if !g.has_colour(c) {
            return Err(DigraphError::ColourAbsent(c));
        }
        classes.push((c, g.class(c)));
    }
    ColouredDigraph::from_classes(g.n(), &classes)
}

/// `e_{G,D}(U1, U2)`: arcs with tail in `U1`, head in `U2` and colour in `D`.
pub fn colour_arc_count(
    g: &ColouredDigraph,
    u1: &[usize],
    u2: &[usize],
    d: &[usize],
) -> Result<usize, DigraphError> {
    let n = g.n();
    let mut in_u2 = vec![false; n + 1];
    for &v in u2 {
        if v == 0 || v > n {
            return Err(DigraphError::VertexRange(v, n));
        }
        in_u2[v] = true;
    }
    let mut count = 0;
    for &c in d {
        if !g.has_colour(c) {
            return Err(DigraphError::ColourAbsent(c));
        }
    }
    for &u in u1 {
        if u == 0 || u > n {
            return Err(DigraphError::VertexRange(u, n));
        }
        for &c in d {
            if in_u2[g.out_nb(c, u)] {
                count += 1;
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z3() -> LatinSquare {
        LatinSquare::from_rows(vec![vec![1, 2, 3], vec![2, 3, 1], vec![3, 1, 2]]).unwrap()
    }

    #[test]
    fn single_loop_for_order_one() {
        let g = latin_to_digraph(&LatinSquare::from_rows(vec![vec![1]]).unwrap());
        assert_eq!(g.arcs(), vec![Arc::new(1, 1, 1)]);
        assert_eq!(g.loops_of_colour(1), 1);
    }

    #[test]
    fn z3_arc_colours_and_classes() {
        let g = latin_to_digraph(&z3());
        for i in 1..=3 {
            for j in 1..=3 {
                assert_eq!(g.colour(i, j), Some((i + j - 2) % 3 + 1));
            }
        }
        for d in 1..=3 {
            let mut heads = g.class(d);
            heads.sort();
            assert_eq!(heads, vec![1, 2, 3]);
        }
        assert_eq!(digraph_to_latin(&g).unwrap(), z3());
    }

    #[test]
    fn restriction_keeps_classes() {
        let g = latin_to_digraph(&z3());
        assert_eq!(restrict_to_colours(&g, &[1, 2, 3]).unwrap(), g);
        let e = restrict_to_colours(&g, &[]).unwrap();
        assert_eq!(e.arc_count(), 0);
        let h = restrict_to_colours(&g, &[2]).unwrap();
        assert_eq!(h.arcs().len(), 3);
        assert_eq!(h.class(2), g.class(2));
        assert!(restrict_to_colours(&h, &[1]).is_err());
    }

    #[test]
    fn arc_counts() {
        let g = latin_to_digraph(&z3());
        let all = [1, 2, 3];
        assert_eq!(colour_arc_count(&g, &all, &all, &all).unwrap(), 9);
        assert_eq!(colour_arc_count(&g, &all, &all, &[]).unwrap(), 0);
        assert_eq!(colour_arc_count(&g, &[1], &[2], &[2]).unwrap(), 1);
    }

    #[test]
    fn edits_reject_clashes() {
        let g = latin_to_digraph(&z3());
        let bad = g.with_edits(&[], &[Arc::new(1, 1, 2)]);
        assert!(bad.is_err());
        let removed = [Arc::new(1, 1, 1), Arc::new(2, 3, 1)];
        let added = [Arc::new(1, 3, 1), Arc::new(2, 1, 1)];
        // Both target cells are occupied in a full square.
        assert!(g.with_edits(&removed, &added).is_err());
        let h = restrict_to_colours(&g, &[1]).unwrap();
        let h2 = h.with_edits(&removed, &added).unwrap();
        assert_eq!(h2.colour(1, 3), Some(1));
        assert_eq!(h2.with_edits(&added, &removed).unwrap(), h);
    }
}
