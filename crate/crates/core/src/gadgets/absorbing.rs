use super::{all_distinct, check_vertex, Footprint, GadgetError};
use crate::digraph::{Arc, ColouredDigraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A `(v,c)`-absorbing gadget. `x[i]` is `x_{i+1}`, `f[i]` is `f_{i+1}`.
///
/// Arcs: `x1->v` (f1), `v->x2` (f2), `x1->x2` (f3), `x3->x4` (f3),
/// `x3->x5` (f2), `x4->x6` (f1), `x5->x6` (c). The abutment pair is `(x4,x5)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbsorbingGadget {
    pub v: usize,
    pub c: usize,
    pub x: [usize; 6],
    pub f: [usize; 3],
}

impl AbsorbingGadget {
    pub fn arcs(&self) -> [Arc; 7] {
        let (v, c, x, f) = (self.v, self.c, self.x, self.f);
        [
            Arc::new(x[0], v, f[0]),
            Arc::new(v, x[1], f[1]),
            Arc::new(x[0], x[1], f[2]),
            Arc::new(x[2], x[3], f[2]),
            Arc::new(x[2], x[4], f[1]),
            Arc::new(x[3], x[5], f[0]),
            Arc::new(x[4], x[5], c),
        ]
    }

    pub fn abutment(&self) -> (usize, usize) {
        (self.x[3], self.x[4])
    }

    pub fn validate(&self, g: &ColouredDigraph) -> Result<(), GadgetError> {
        let mut vs = vec![self.v];
        vs.extend(self.x);
        if !all_distinct(&vs) {
            return Err(GadgetError::Invalid(format!(
                "absorbing gadget vertices {vs:?} repeat"
            )));
        }
        if !all_distinct(&[self.f[0], self.f[1], self.f[2], self.c]) {
            return Err(GadgetError::Invalid(
                "colours f1, f2, f3, c must be distinct".into(),
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

impl Footprint for AbsorbingGadget {
    fn root_vertices(&self) -> Vec<usize> {
        vec![self.v]
    }
    fn root_colours(&self) -> Vec<usize> {
        vec![self.c]
    }
    fn vertices(&self) -> Vec<usize> {
        let mut vs = vec![self.v];
        vs.extend(self.x);
        vs
    }
    fn colours(&self) -> Vec<usize> {
        vec![self.f[0], self.f[1], self.f[2], self.c]
    }
}

/// Up to `cap` `(v,c)`-absorbing gadgets, in order of `(f1, f2, x3)`.
pub fn find_absorbing_gadgets(
    g: &ColouredDigraph,
    v: usize,
    c: usize,
    cap: usize,
) -> Result<Vec<AbsorbingGadget>, GadgetError> {
    find_absorbing_gadgets_avoiding(g, v, c, cap, &|_| false, &|_| false)
}

/// As [`find_absorbing_gadgets`], skipping gadgets that use a blocked vertex
/// other than `v` or a blocked colour other than `c`. `cap` counts only the
/// gadgets that survive.
pub fn find_absorbing_gadgets_avoiding(
    g: &ColouredDigraph,
    v: usize,
    c: usize,
    cap: usize,
    blocked_vertex: &(dyn Fn(usize) -> bool + Sync),
    blocked_colour: &(dyn Fn(usize) -> bool + Sync),
) -> Result<Vec<AbsorbingGadget>, GadgetError> {
    let n = g.n();
    check_vertex(v, n)?;
    if c == 0 || c > n {
        return Err(GadgetError::ColourRange(c, n));
    }
    if !g.has_colour(c) {
        return Ok(Vec::new());
    }
    let colours = g.colours();
    let per_f1: Vec<Vec<AbsorbingGadget>> = colours
        .par_iter()
        .map(|&f1| {
            let mut out = Vec::new();
            if f1 == c || blocked_colour(f1) {
                return out;
            }
            let x1 = g.in_nb(f1, v);
            if x1 == v || blocked_vertex(x1) {
                return out;
            }
            for &f2 in colours {
                if f2 == c || f2 == f1 || blocked_colour(f2) {
                    continue;
                }
                let x2 = g.out_nb(f2, v);
                if x2 == v || x2 == x1 || blocked_vertex(x2) {
                    continue;
                }
                let Some(f3) = g.colour(x1, x2) else { continue };
                if f3 == c || f3 == f1 || f3 == f2 || blocked_colour(f3) {
                    continue;
                }
                for x3 in 1..=n {
                    let x4 = g.out_nb(f3, x3);
                    let x5 = g.out_nb(f2, x3);
                    let x6 = g.out_nb(f1, x4);
                    if g.colour(x5, x6) != Some(c)
                        || [x3, x4, x5, x6].iter().any(|&w| blocked_vertex(w))
                    {
                        continue;
                    }
                    let x = [x1, x2, x3, x4, x5, x6];
                    if all_distinct(&[v, x1, x2, x3, x4, x5, x6]) {
                        out.push(AbsorbingGadget {
                            v,
                            c,
                            x,
                            f: [f1, f2, f3],
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
    Ok(per_f1.into_iter().flatten().take(cap).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::latin_to_digraph;
    use crate::sampler::{complete_partial_rows, sample_latin_square_with, task_rng};
    use crate::square::LatinSquare;

    /// Brute force over all assignments of the six non-root vertices.
    fn naive(g: &ColouredDigraph, v: usize, c: usize) -> Vec<AbsorbingGadget> {
        let n = g.n();
        let mut out = Vec::new();
        let others: Vec<usize> = (1..=n).filter(|&u| u != v).collect();
        let mut pick = Vec::new();
        fn rec(
            g: &ColouredDigraph,
            v: usize,
            c: usize,
            others: &[usize],
            pick: &mut Vec<usize>,
            out: &mut Vec<AbsorbingGadget>,
        ) {
            if pick.len() == 6 {
                let x = [pick[0], pick[1], pick[2], pick[3], pick[4], pick[5]];
                let col = |a, b| g.colour(a, b);
                let (Some(f1), Some(f2), Some(f3)) = (col(x[0], v), col(v, x[1]), col(x[0], x[1]))
                else {
                    return;
                };
                let cand = AbsorbingGadget {
                    v,
                    c,
                    x,
                    f: [f1, f2, f3],
                };
                if cand.validate(g).is_ok() {
                    out.push(cand);
                }
                return;
            }
            for &u in others {
                if !pick.contains(&u) {
                    pick.push(u);
                    rec(g, v, c, others, pick, out);
                    pick.pop();
                }
            }
        }
        rec(g, v, c, &others, &mut pick, &mut out);
        out
    }

    fn sorted(mut v: Vec<AbsorbingGadget>) -> Vec<AbsorbingGadget> {
        v.sort_by_key(|a| (a.x, a.f));
        v
    }

    #[test]
    fn planted_gadget_is_recovered_and_matches_brute_force() {
        let mut rng = task_rng(1, 0);
        // v = 1, x1..x6 = 2..7, f = (1,2,3), c = 4.
        let planted = AbsorbingGadget {
            v: 1,
            c: 4,
            x: [2, 3, 4, 5, 6, 7],
            f: [1, 2, 3],
        };
        let mut partial = vec![vec![0; 7]; 7];
        for a in planted.arcs() {
            partial[a.tail - 1][a.head - 1] = a.colour;
        }
        let rows = complete_partial_rows(7, &partial, |_, _, _| false, 200, &mut rng).unwrap();
        let g = latin_to_digraph(&LatinSquare::from_rows(rows).unwrap());
        let found = find_absorbing_gadgets(&g, 1, 4, usize::MAX).unwrap();
        assert!(found.contains(&planted));
        assert_eq!(sorted(found), sorted(naive(&g, 1, 4)));
    }

    #[test]
    fn finder_matches_brute_force_on_random_squares() {
        let mut rng = task_rng(2, 0);
        for _ in 0..5 {
            let g = latin_to_digraph(&sample_latin_square_with(7, 343, &mut rng));
            for (v, c) in [(1, 1), (3, 5), (7, 2)] {
                let found = find_absorbing_gadgets(&g, v, c, usize::MAX).unwrap();
                for a in &found {
                    a.validate(&g).unwrap();
                }
                assert_eq!(sorted(found), sorted(naive(&g, v, c)));
            }
        }
    }

    #[test]
    fn three_colours_cannot_host_a_gadget() {
        let mut rng = task_rng(3, 0);
        let g = crate::sampler::sample_latin_rectangle_with(9, 3, &mut rng);
        assert!(find_absorbing_gadgets(&g, 1, 1, usize::MAX)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn cap_is_respected() {
        let mut rng = task_rng(4, 0);
        let g = latin_to_digraph(&sample_latin_square_with(12, 1728, &mut rng));
        assert!(find_absorbing_gadgets(&g, 2, 3, 5).unwrap().len() <= 5);
    }
}
