//! Exact counting and maximum-structure search for transversals and rainbow
//! paths and cycles.

use crate::digraph::ColouredDigraph;
use crate::positions::PositionSet;
use crate::square::LatinSquare;
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_FULL_LIMIT: usize = 12;
pub const DEFAULT_HAMILTON_LIMIT: usize = 10;
pub const DEFAULT_MAXIMA_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CensusError {
    #[error("{engine} engine is limited to n <= {limit}, got n = {n}")]
    Capacity {
        engine: &'static str,
        n: usize,
        limit: usize,
    },
    #[error("digraph has {found} colours but order {n}; a full colouring is required")]
    NotFull { n: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusLimits {
    pub full: usize,
    pub hamilton: usize,
    pub maxima: usize,
}

impl Default for CensusLimits {
    fn default() -> Self {
        CensusLimits {
            full: DEFAULT_FULL_LIMIT,
            hamilton: DEFAULT_HAMILTON_LIMIT,
            maxima: DEFAULT_MAXIMA_LIMIT,
        }
    }
}

fn check_limit(engine: &'static str, n: usize, limit: usize) -> Result<(), CensusError> {
    if n > limit {
        Err(CensusError::Capacity { engine, n, limit })
    } else {
        Ok(())
    }
}

/// Bit of the symbol in each cell, rows and columns 0-based.
fn symbol_bits(sq: &LatinSquare) -> Vec<Vec<u32>> {
    let n = sq.n();
    (1..=n)
        .map(|r| (1..=n).map(|c| 1u32 << (sq.get(r, c) - 1)).collect())
        .collect()
}

pub fn count_full_transversals(sq: &LatinSquare, limit: usize) -> Result<BigUint, CensusError> {
    let n = sq.n();
    check_limit("full transversal", n, limit)?;
    let bits = symbol_bits(sq);
    fn rec(row: usize, n: usize, bits: &[Vec<u32>], cols: u32, syms: u32) -> u128 {
        if row == n {
            return 1;
        }
        let mut total = 0;
        for c in 0..n {
            let s = bits[row][c];
            if cols & (1 << c) == 0 && syms & s == 0 {
                total += rec(row + 1, n, bits, cols | (1 << c), syms | s);
            }
        }
        total
    }
    let total: u128 = (0..n)
        .into_par_iter()
        .map(|c| rec(1, n, &bits, 1 << c, bits[0][c]))
        .sum();
    Ok(BigUint::from(total))
}

/// Counts full transversals whose image is one directed Hamilton cycle. Each
/// cycle is enumerated once as a vertex sequence starting at vertex 1. For
/// `n = 1` the single loop is counted.
pub fn count_hamilton_transversals(sq: &LatinSquare, limit: usize) -> Result<BigUint, CensusError> {
    let n = sq.n();
    check_limit("Hamilton transversal", n, limit)?;
    if n == 1 {
        return Ok(BigUint::from(1u32));
    }
    let bits = symbol_bits(sq);
    fn rec(v: usize, depth: usize, n: usize, bits: &[Vec<u32>], verts: u32, syms: u32) -> u128 {
        if depth == n {
            return u128::from(syms & bits[v][0] == 0);
        }
        let mut total = 0;
        for w in 1..n {
            let s = bits[v][w];
            if verts & (1 << w) == 0 && syms & s == 0 {
                total += rec(w, depth + 1, n, bits, verts | (1 << w), syms | s);
            }
        }
        total
    }
    let total: u128 = (1..n)
        .into_par_iter()
        .map(|w| rec(w, 2, n, &bits, 1 | (1 << w), bits[0][w]))
        .sum();
    Ok(BigUint::from(total))
}

/// Search state for the row-by-row maxima engines.
struct PartialSearch<'a> {
    n: usize,
    bits: &'a [Vec<u32>],
    cols: u32,
    syms: u32,
    succ: Vec<usize>,
    cells: Vec<(usize, usize)>,
    best: Option<Vec<(usize, usize)>>,
    cap: usize,
}

impl PartialSearch<'_> {
    fn best_len(&self) -> Option<usize> {
        self.best.as_ref().map(|b| b.len())
    }

    /// Would arc `r -> c` (1-based) close a directed cycle?
    fn closes_cycle(&self, r: usize, c: usize) -> bool {
        let mut v = c;
        while v != 0 && v != r {
            v = self.succ[v];
        }
        v == r
    }

    /// Rows are visited in order; at each row columns are tried ascending
    /// before skipping, which is lexicographic order on cell sequences. Only
    /// strictly larger sets replace the incumbent, so the witness is the
    /// lexicographically least maximum.
    fn rec(&mut self, row: usize, cycle_free: bool) -> bool {
        let n = self.n;
        if self.best_len().is_none_or(|b| self.cells.len() > b) {
            self.best = Some(self.cells.clone());
            if self.cells.len() == self.cap {
                return true;
            }
        }
        if row == n {
            return false;
        }
        if self
            .best_len()
            .is_some_and(|b| self.cells.len() + (n - row) <= b)
        {
            return false;
        }
        for c in 0..n {
            let s = self.bits[row][c];
            if self.cols & (1 << c) != 0 || self.syms & s != 0 {
                continue;
            }
            if cycle_free && self.closes_cycle(row + 1, c + 1) {
                continue;
            }
            self.cols |= 1 << c;
            self.syms |= s;
            self.succ[row + 1] = c + 1;
            self.cells.push((row + 1, c + 1));
            let done = self.rec(row + 1, cycle_free);
            self.cells.pop();
            self.succ[row + 1] = 0;
            self.syms &= !s;
            self.cols &= !(1 << c);
            if done {
                return true;
            }
        }
        self.rec(row + 1, cycle_free)
    }
}

fn max_partial_engine(sq: &LatinSquare, cycle_free: bool) -> (usize, PositionSet) {
    let n = sq.n();
    let bits = symbol_bits(sq);
    let cap = if cycle_free { n - 1 } else { n };
    let mut st = PartialSearch {
        n,
        bits: &bits,
        cols: 0,
        syms: 0,
        succ: vec![0; n + 1],
        cells: Vec::new(),
        best: None,
        cap,
    };
    st.rec(0, cycle_free);
    let best = st.best.unwrap_or_default();
    (best.len(), PositionSet::new(n, best))
}

/// Largest partial transversal, with the lexicographically least witness.
pub fn max_partial_transversal(
    sq: &LatinSquare,
    limit: usize,
) -> Result<(usize, PositionSet), CensusError> {
    check_limit("maximum partial transversal", sq.n(), limit)?;
    Ok(max_partial_engine(sq, false))
}

/// Largest partial transversal whose image is a linear directed forest; loops
/// count as cycles.
pub fn max_cycle_free_partial(
    sq: &LatinSquare,
    limit: usize,
) -> Result<(usize, PositionSet), CensusError> {
    check_limit("cycle-free partial transversal", sq.n(), limit)?;
    Ok(max_partial_engine(sq, true))
}

/// Largest partial transversal whose image is weakly connected (over the
/// vertices it touches). With `allow_loops == false`, diagonal cells are
/// excluded. The empty set counts as connected.
pub fn max_connected_partial(
    sq: &LatinSquare,
    allow_loops: bool,
    limit: usize,
) -> Result<(usize, PositionSet), CensusError> {
    let n = sq.n();
    check_limit("connected partial transversal", n, limit)?;
    let bits = symbol_bits(sq);
    for size in (1..=n).rev() {
        let mut cells = Vec::with_capacity(size);
        if exact_size_connected(0, n, size, allow_loops, &bits, 0, 0, &mut cells) {
            return Ok((size, PositionSet::new(n, cells)));
        }
    }
    Ok((0, PositionSet::new(n, Vec::new())))
}

#[allow(clippy::too_many_arguments)]
fn exact_size_connected(
    row: usize,
    n: usize,
    size: usize,
    allow_loops: bool,
    bits: &[Vec<u32>],
    cols: u32,
    syms: u32,
    cells: &mut Vec<(usize, usize)>,
) -> bool {
    if cells.len() == size {
        return image_connected(n, cells);
    }
    if row == n || cells.len() + (n - row) < size {
        return false;
    }
    for c in 0..n {
        let s = bits[row][c];
        if cols & (1 << c) != 0 || syms & s != 0 || (!allow_loops && c == row) {
            continue;
        }
        cells.push((row + 1, c + 1));
        if exact_size_connected(
            row + 1,
            n,
            size,
            allow_loops,
            bits,
            cols | (1 << c),
            syms | s,
            cells,
        ) {
            return true;
        }
        cells.pop();
    }
    exact_size_connected(row + 1, n, size, allow_loops, bits, cols, syms, cells)
}

fn image_connected(n: usize, cells: &[(usize, usize)]) -> bool {
    let mut dsu = crate::positions::Dsu::new(n + 1);
    let mut touched = Vec::new();
    for &(r, c) in cells {
        dsu.union(r, c);
        touched.push(r);
        touched.push(c);
    }
    let Some(&first) = touched.first() else {
        return true;
    };
    let root = dsu.find(first);
    touched.iter().all(|&v| dsu.find(v) == root)
}

/// A rainbow directed path (`closed == false`) or cycle. `vertices` lists the
/// walk without repeating the start of a cycle; `colours[i]` colours the arc
/// leaving `vertices[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RainbowWalk {
    pub vertices: Vec<usize>,
    pub colours: Vec<usize>,
    pub closed: bool,
}

impl RainbowWalk {
    pub fn length(&self) -> usize {
        self.colours.len()
    }
}

/// Longest rainbow directed path or cycle, measured in arcs. A loop is a cycle
/// of length 1; at order 1 that is the only option and `degenerate` is set.
pub fn max_rainbow_path_or_cycle(
    g: &ColouredDigraph,
    limit: usize,
) -> Result<(usize, RainbowWalk, bool), CensusError> {
    let n = g.n();
    if g.colours().len() != n {
        return Err(CensusError::NotFull {
            n,
            found: g.colours().len(),
        });
    }
    check_limit("rainbow path", n, limit)?;
    struct St<'a> {
        g: &'a ColouredDigraph,
        n: usize,
        verts: Vec<usize>,
        cols: Vec<usize>,
        vmask: u32,
        cmask: u32,
        best: Option<RainbowWalk>,
    }
    impl St<'_> {
        fn offer(&mut self, closing: Option<usize>) -> bool {
            let len = self.cols.len() + usize::from(closing.is_some());
            if self.best.as_ref().is_none_or(|b| len > b.length()) {
                let mut colours = self.cols.clone();
                colours.extend(closing);
                self.best = Some(RainbowWalk {
                    vertices: self.verts.clone(),
                    colours,
                    closed: closing.is_some(),
                });
                return len == self.n;
            }
            false
        }

        fn rec(&mut self) -> bool {
            let v = *self.verts.last().unwrap();
            let start = self.verts[0];
            let d = self.g.colour(v, start).unwrap();
            if self.cmask & (1 << (d - 1)) == 0 && self.offer(Some(d)) {
                return true;
            }
            if self.offer(None) {
                return true;
            }
            for w in 1..=self.n {
                if self.vmask & (1 << (w - 1)) != 0 {
                    continue;
                }
                let d = self.g.colour(v, w).unwrap();
                if self.cmask & (1 << (d - 1)) != 0 {
                    continue;
                }
                self.vmask |= 1 << (w - 1);
                self.cmask |= 1 << (d - 1);
                self.verts.push(w);
                self.cols.push(d);
                let done = self.rec();
                self.cols.pop();
                self.verts.pop();
                self.cmask &= !(1 << (d - 1));
                self.vmask &= !(1 << (w - 1));
                if done {
                    return true;
                }
            }
            false
        }
    }
    let mut st = St {
        g,
        n,
        verts: Vec::new(),
        cols: Vec::new(),
        vmask: 0,
        cmask: 0,
        best: None,
    };
    for s in 1..=n {
        st.verts = vec![s];
        st.vmask = 1 << (s - 1);
        st.cmask = 0;
        if st.rec() {
            break;
        }
    }
    let best = st.best.expect("order is positive");
    Ok((best.length(), best, n == 1))
}

/// `(n/e^2)^n`, the leading term of the upper bound on transversal counts.
pub fn taranenko_bound(n: usize) -> f64 {
    let nf = n as f64;
    (nf * (nf.ln() - 2.0)).exp()
}

fn big_to_string<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn big_from_string<'de, D: serde::Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxWitness {
    pub size: usize,
    pub witness: PositionSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub n: usize,
    #[serde(serialize_with = "big_to_string", deserialize_with = "big_from_string")]
    pub full_transversal_count: BigUint,
    #[serde(serialize_with = "big_to_string", deserialize_with = "big_from_string")]
    pub hamilton_transversal_count: BigUint,
    /// Set for order 1, where the single loop is read as a Hamilton cycle.
    pub hamilton_degenerate: bool,
    pub max_partial_transversal: MaxWitness,
    pub max_cycle_free_partial: MaxWitness,
    pub max_connected_partial: MaxWitness,
    pub max_connected_partial_loop_free: MaxWitness,
    pub max_rainbow_path_or_cycle: usize,
    pub rainbow_witness: RainbowWalk,
    pub rainbow_degenerate: bool,
    pub taranenko_bound_value: f64,
    /// Full count divided by the bound; informational only.
    pub taranenko_ratio: f64,
    /// Partial transversal of size at least `n - 1`.
    pub near_transversal_holds: bool,
    /// Cycle-free partial transversal of size at least `n - 2`.
    pub cycle_free_holds: bool,
    /// Rainbow path or cycle of length at least `n - 1`.
    pub rainbow_path_holds: bool,
    pub limits: CensusLimits,
}

pub fn conjecture_report(
    sq: &LatinSquare,
    limits: CensusLimits,
) -> Result<CensusReport, CensusError> {
    let n = sq.n();
    let full = count_full_transversals(sq, limits.full)?;
    let ham = count_hamilton_transversals(sq, limits.hamilton)?;
    let (mp, mpw) = max_partial_transversal(sq, limits.maxima)?;
    let (cf, cfw) = max_cycle_free_partial(sq, limits.maxima)?;
    let (cp, cpw) = max_connected_partial(sq, true, limits.maxima)?;
    let (cl, clw) = max_connected_partial(sq, false, limits.maxima)?;
    let g = crate::digraph::latin_to_digraph(sq);
    let (rl, rw, rdeg) = max_rainbow_path_or_cycle(&g, limits.maxima)?;
    let bound = taranenko_bound(n);
    let ratio = full.to_string().parse::<f64>().unwrap_or(f64::INFINITY) / bound;
    Ok(CensusReport {
        n,
        full_transversal_count: full,
        hamilton_transversal_count: ham,
        hamilton_degenerate: n == 1,
        max_partial_transversal: MaxWitness {
            size: mp,
            witness: mpw,
        },
        max_cycle_free_partial: MaxWitness {
            size: cf,
            witness: cfw,
        },
        max_connected_partial: MaxWitness {
            size: cp,
            witness: cpw,
        },
        max_connected_partial_loop_free: MaxWitness {
            size: cl,
            witness: clw,
        },
        max_rainbow_path_or_cycle: rl,
        rainbow_witness: rw,
        rainbow_degenerate: rdeg,
        taranenko_bound_value: bound,
        taranenko_ratio: ratio,
        near_transversal_holds: mp + 1 >= n,
        cycle_free_holds: cf + 2 >= n,
        rainbow_path_holds: rl + 1 >= n,
        limits,
    })
}
