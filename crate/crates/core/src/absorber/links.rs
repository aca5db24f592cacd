//! Short rainbow paths between two fixed vertices.

use crate::digraph::{Arc, ColouredDigraph};
use serde::{Deserialize, Serialize};

/// Lexicographically least rainbow path `tail -> ... -> head` with `len`
/// arcs whose internal vertices pass `vertex_ok` and whose colours pass
/// `colour_ok`. When `pinned` is set, the second arc (the only arc when
/// `len == 1`) must carry that colour, and `colour_ok` is not consulted for it.
pub fn find_link_path(
    g: &ColouredDigraph,
    tail: usize,
    head: usize,
    len: usize,
    pinned: Option<usize>,
    vertex_ok: &dyn Fn(usize) -> bool,
    colour_ok: &dyn Fn(usize) -> bool,
) -> Option<Vec<Arc>> {
    if len == 0 || tail == head {
        return None;
    }
    let mut out = None;
    let mut cb = |p: &[Arc]| {
        out = Some(p.to_vec());
        false
    };
    walk(g, tail, head, len, pinned, vertex_ok, colour_ok, &mut cb);
    out
}

/// Visits every qualifying path in lexicographic order of internal vertices
/// until `visit` returns false.
#[allow(clippy::too_many_arguments)]
pub(crate) fn walk(
    g: &ColouredDigraph,
    tail: usize,
    head: usize,
    len: usize,
    pinned: Option<usize>,
    vertex_ok: &dyn Fn(usize) -> bool,
    colour_ok: &dyn Fn(usize) -> bool,
    visit: &mut dyn FnMut(&[Arc]) -> bool,
) {
    let n = g.n();
    let mut on_path = vec![false; n + 1];
    on_path[tail] = true;
    on_path[head] = true;
    let mut used_colours: Vec<usize> = Vec::with_capacity(len);
    let mut path: Vec<Arc> = Vec::with_capacity(len);
    let pinned_index = if len == 1 { 0 } else { 1 };
    #[allow(clippy::too_many_arguments)]
    fn step(
        g: &ColouredDigraph,
        cur: usize,
        head: usize,
        remaining: usize,
        pinned: Option<usize>,
        pinned_index: usize,
        vertex_ok: &dyn Fn(usize) -> bool,
        colour_ok: &dyn Fn(usize) -> bool,
        on_path: &mut [bool],
        used: &mut Vec<usize>,
        path: &mut Vec<Arc>,
        visit: &mut dyn FnMut(&[Arc]) -> bool,
    ) -> bool {
        let idx = path.len();
        let want = if idx == pinned_index { pinned } else { None };
        let try_arc = |next: usize, used: &Vec<usize>| -> Option<usize> {
            let c = g.colour(cur, next)?;
            let ok = match want {
                Some(p) => c == p,
                None => colour_ok(c) && Some(c) != pinned,
            };
            (ok && !used.contains(&c)).then_some(c)
        };
        if remaining == 1 {
            if let Some(c) = try_arc(head, used) {
                path.push(Arc::new(cur, head, c));
                let go = visit(path);
                path.pop();
                return go;
            }
            return true;
        }
        let candidates: Vec<usize> = match want {
            Some(p) => {
                let nx = g.out_nb(p, cur);
                if nx == 0 { vec![] } else { vec![nx] }
            }
            None => (1..=g.n()).collect(),
        };
        for next in candidates {
            if on_path[next] || !vertex_ok(next) {
                continue;
            }
            let Some(c) = try_arc(next, used) else { continue };
            on_path[next] = true;
            used.push(c);
            path.push(Arc::new(cur, next, c));
            let go = step(
                g, next, head, remaining - 1, pinned, pinned_index, vertex_ok, colour_ok, on_path,
                used, path, visit,
            );
            path.pop();
            used.pop();
            on_path[next] = false;
            if !go {
                return false;
            }
        }
        true
    }
    step(
        g, tail, head, len, pinned, pinned_index, vertex_ok, colour_ok, &mut on_path,
        &mut used_colours, &mut path, visit,
    );
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkCount {
    pub count: usize,
    /// Paths through each vertex as an internal vertex, indexed by vertex.
    pub vertex_load: Vec<usize>,
    /// Paths using each colour, indexed by colour (the pinned colour excluded).
    pub colour_load: Vec<usize>,
    /// False when the pinned colour has more than `n/2` loops.
    pub loop_condition: bool,
}

impl LinkCount {
    pub fn max_vertex_load(&self) -> usize {
        self.vertex_load.iter().copied().max().unwrap_or(0)
    }
    pub fn max_colour_load(&self) -> usize {
        self.colour_load.iter().copied().max().unwrap_or(0)
    }
}

/// Counts rainbow `u -> v` paths of length three, or of length four with
/// second arc coloured `c` when `c` is given.
pub fn count_link_paths(g: &ColouredDigraph, u: usize, v: usize, c: Option<usize>) -> LinkCount {
    let n = g.n();
    let len = if c.is_some() { 4 } else { 3 };
    let mut count = 0usize;
    let mut vertex_load = vec![0usize; n + 1];
    let mut colour_load = vec![0usize; n + 1];
    let mut visit = |p: &[Arc]| {
        count += 1;
        for a in &p[1..] {
            vertex_load[a.tail] += 1;
        }
        for a in p {
            if Some(a.colour) != c {
                colour_load[a.colour] += 1;
            }
        }
        true
    };
    if u != v {
        walk(g, u, v, len, c, &|_| true, &|_| true, &mut visit);
    }
    let loop_condition = match c {
        Some(c) => 2 * g.loops_of_colour(c) <= n,
        None => true,
    };
    LinkCount {
        count,
        vertex_load,
        colour_load,
        loop_condition,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::latin_to_digraph;
    use crate::sampler::{sample_latin_square, SamplerConfig};

    fn naive(g: &ColouredDigraph, u: usize, v: usize, c: Option<usize>) -> usize {
        let n = g.n();
        let col = |a: usize, b: usize| g.colour(a, b).unwrap();
        let mut total = 0;
        for w1 in 1..=n {
            for w2 in 1..=n {
                match c {
                    None => {
                        let vs = [u, w1, w2, v];
                        let cs = [col(u, w1), col(w1, w2), col(w2, v)];
                        if distinct(&vs) && distinct(&cs) {
                            total += 1;
                        }
                    }
                    Some(c) => {
                        for w3 in 1..=n {
                            let vs = [u, w1, w2, w3, v];
                            let cs = [col(u, w1), col(w1, w2), col(w2, w3), col(w3, v)];
                            if cs[1] == c && distinct(&vs) && distinct(&cs) {
                                total += 1;
                            }
                        }
                    }
                }
            }
        }
        total
    }

    fn distinct(xs: &[usize]) -> bool {
        (0..xs.len()).all(|i| (i + 1..xs.len()).all(|j| xs[i] != xs[j]))
    }

    #[test]
    fn counts_match_quadruple_loop_at_order_eight() {
        for seed in 0..4 {
            let g = latin_to_digraph(&sample_latin_square(&SamplerConfig::square(8, seed)));
            for (u, v) in [(1, 2), (3, 8), (7, 5)] {
                assert_eq!(count_link_paths(&g, u, v, None).count, naive(&g, u, v, None));
                for c in [1, 4, 8] {
                    assert_eq!(count_link_paths(&g, u, v, Some(c)).count, naive(&g, u, v, Some(c)));
                }
            }
        }
    }

    #[test]
    fn found_path_is_least_and_respects_filters() {
        let g = latin_to_digraph(&sample_latin_square(&SamplerConfig::square(10, 3)));
        let p = find_link_path(&g, 1, 2, 3, None, &|w| w > 5, &|c| c != 1).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].tail, 1);
        assert_eq!(p[2].head, 2);
        assert!(p[0].head > 5 && p[1].head > 5);
        assert!(p.iter().all(|a| a.colour != 1));
        let mut first = None;
        walk(&g, 1, 2, 3, None, &|w| w > 5, &|c| c != 1, &mut |q| {
            first = Some(q.to_vec());
            false
        });
        assert_eq!(first, Some(p));
    }

    #[test]
    fn pinned_single_arc() {
        let g = latin_to_digraph(&sample_latin_square(&SamplerConfig::square(6, 1)));
        let c = g.colour(2, 5).unwrap();
        let p = find_link_path(&g, 2, 5, 1, Some(c), &|_| true, &|_| false).unwrap();
        assert_eq!(p, vec![Arc::new(2, 5, c)]);
        let other = if c == 1 { 2 } else { 1 };
        assert!(find_link_path(&g, 2, 5, 1, Some(other), &|_| true, &|_| true).is_none());
    }

    #[test]
    fn loop_condition_flag() {
        // Symbol j - i puts every loop in one colour.
        let rows = (0..4)
            .map(|i| (0..4).map(|j| (j + 4 - i) % 4 + 1).collect())
            .collect();
        let g = latin_to_digraph(&crate::square::LatinSquare::from_rows(rows).unwrap());
        let d = g.colour(1, 1).unwrap();
        assert!(!count_link_paths(&g, 1, 2, Some(d)).loop_condition);
    }
}
