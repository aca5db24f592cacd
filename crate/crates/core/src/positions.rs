//! Sets of cells of a Latin square and the structure of their digraph images.

use crate::square::LatinSquare;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PositionError {
    #[error("cell ({0},{1}) lies outside the square")]
    OutOfRange(usize, usize),
    #[error("cells ({0},{1}) and ({2},{3}) share a row")]
    SharedRow(usize, usize, usize, usize),
    #[error("cells ({0},{1}) and ({2},{3}) share a column")]
    SharedColumn(usize, usize, usize, usize),
    #[error("cells ({0},{1}) and ({2},{3}) share symbol {4}")]
    SharedSymbol(usize, usize, usize, usize, usize),
}

/// A set of 1-based `(row, column)` cells, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PositionSet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub cells: Vec<(usize, usize)>,
}

impl PositionSet {
    pub fn new(n: usize, mut cells: Vec<(usize, usize)>) -> Self {
        cells.sort_unstable();
        cells.dedup();
        PositionSet { n: Some(n), cells }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Checks the partial-transversal property against `sq`, naming the first
    /// clashing pair.
    pub fn check_partial_transversal(&self, sq: &LatinSquare) -> Result<(), PositionError> {
        let n = sq.n();
        let mut row = vec![None; n + 1];
        let mut col = vec![None; n + 1];
        let mut sym = vec![None; n + 1];
        for &(r, c) in &self.cells {
            if r == 0 || c == 0 || r > n || c > n {
                return Err(PositionError::OutOfRange(r, c));
            }
            if let Some((r2, c2)) = row[r] {
                return Err(PositionError::SharedRow(r2, c2, r, c));
            }
            if let Some((r2, c2)) = col[c] {
                return Err(PositionError::SharedColumn(r2, c2, r, c));
            }
            let s = sq.get(r, c);
            if let Some((r2, c2)) = sym[s] {
                return Err(PositionError::SharedSymbol(r2, c2, r, c, s));
            }
            row[r] = Some((r, c));
            col[c] = Some((r, c));
            sym[s] = Some((r, c));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransversalKind {
    /// Image is a linear directed forest (no cycles, loops included).
    CycleFree,
    /// Image is weakly connected but not a Hamilton cycle.
    Connected,
    /// Full, and the image is a single directed cycle through all vertices.
    Hamilton,
    General,
}

/// Structural summary of a partial transversal's image digraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransversalClass {
    pub kind: TransversalKind,
    pub size: usize,
    pub full: bool,
    pub cycle_free: bool,
    pub connected: bool,
    /// Weak components among vertices touched by the image.
    pub components: usize,
    /// Each directed cycle as a vertex sequence starting at its least vertex.
    pub cycles: Vec<Vec<usize>>,
    /// Set only for order 1, where the single loop is read as a Hamilton cycle.
    pub degenerate_hamilton: bool,
}

impl TransversalClass {
    pub fn is_hamilton(&self) -> bool {
        self.kind == TransversalKind::Hamilton
    }
}

/// Classifies the image of `s` (cell `(i,j)` becomes arc `i -> j`).
pub fn classify_position_set(
    sq: &LatinSquare,
    s: &PositionSet,
) -> Result<TransversalClass, PositionError> {
    s.check_partial_transversal(sq)?;
    let n = sq.n();
    let mut succ = vec![0usize; n + 1];
    let mut has_in = vec![false; n + 1];
    let mut touched = vec![false; n + 1];
    let mut dsu = Dsu::new(n + 1);
    for &(r, c) in &s.cells {
        succ[r] = c;
        has_in[c] = true;
        touched[r] = true;
        touched[c] = true;
        dsu.union(r, c);
    }
    let mut components = 0;
    for v in 1..=n {
        if touched[v] && dsu.find(v) == v {
            components += 1;
        }
    }
    // Every vertex has in/out degree <= 1, so cycles are exactly the closed
    // successor orbits.
    let mut seen = vec![false; n + 1];
    let mut cycles = Vec::new();
    for start in 1..=n {
        if seen[start] || succ[start] == 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut v = start;
        while v != 0 && !seen[v] {
            seen[v] = true;
            path.push(v);
            v = succ[v];
        }
        if v != 0 {
            if let Some(pos) = path.iter().position(|&x| x == v) {
                let mut cyc = path[pos..].to_vec();
                let min_pos = cyc
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, &x)| x)
                    .map(|(i, _)| i)
                    .unwrap();
                cyc.rotate_left(min_pos);
                cycles.push(cyc);
            }
        }
    }
    cycles.sort();
    let size = s.len();
    let full = size == n;
    let cycle_free = cycles.is_empty();
    let connected = components <= 1;
    let hamilton = full && cycles.len() == 1 && cycles[0].len() == n;
    let kind = if hamilton {
        TransversalKind::Hamilton
    } else if cycle_free {
        TransversalKind::CycleFree
    } else if connected {
        TransversalKind::Connected
    } else {
        TransversalKind::General
    };
    Ok(TransversalClass {
        kind,
        size,
        full,
        cycle_free,
        connected,
        components,
        cycles,
        degenerate_hamilton: hamilton && n == 1,
    })
}

/// Disjoint-set union with path halving and union by size.
#[derive(Debug, Clone)]
pub struct Dsu {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}
