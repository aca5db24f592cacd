use super::bridging::{enumerate_bridges, Bridge, ColourPartition};
use super::{all_distinct, check_vertex, GadgetError};
use crate::digraph::{Arc, ColouredDigraph};
use crate::sampler::complete_partial_rows;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// A twist system on roots `y`, `z`. `u`, `up`, `upp` hold the interior,
/// middle and exterior vertices (`u_i`, `u'_i`, `u''_i`); `d[i]` is the colour
/// drawn from part `i+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwistSystem {
    pub y: usize,
    pub z: usize,
    pub u: [usize; 6],
    pub up: [usize; 8],
    pub upp: [usize; 8],
    pub d: [usize; 6],
}

impl TwistSystem {
    /// The eighteen arcs of the system with their colours.
    pub fn arcs(&self) -> Vec<Arc> {
        let (y, z, u, p, q, d) = (self.y, self.z, self.u, self.up, self.upp, self.d);
        vec![
            Arc::new(y, u[0], d[0]),
            Arc::new(p[6], u[4], d[0]),
            Arc::new(q[7], q[6], d[0]),
            Arc::new(u[5], p[7], d[0]),
            Arc::new(u[5], z, d[1]),
            Arc::new(u[1], p[1], d[1]),
            Arc::new(q[1], q[0], d[1]),
            Arc::new(p[0], u[0], d[1]),
            Arc::new(u[3], y, d[2]),
            Arc::new(u[1], p[2], d[2]),
            Arc::new(q[2], q[3], d[2]),
            Arc::new(p[3], u[2], d[2]),
            Arc::new(z, u[2], d[3]),
            Arc::new(u[3], p[4], d[3]),
            Arc::new(q[4], q[5], d[3]),
            Arc::new(p[5], u[4], d[3]),
            Arc::new(y, u[1], d[4]),
            Arc::new(z, u[4], d[5]),
        ]
    }

    /// The twelve pairs that must not be arcs.
    pub fn non_arcs(&self) -> [(usize, usize); 12] {
        let (u, p, q) = (self.u, self.up, self.upp);
        [
            (u[1], u[0]),
            (p[0], q[0]),
            (q[1], p[1]),
            (u[1], u[2]),
            (q[2], p[2]),
            (p[3], q[3]),
            (u[3], u[4]),
            (q[4], p[4]),
            (p[5], q[5]),
            (u[5], u[4]),
            (p[6], q[6]),
            (q[7], p[7]),
        ]
    }

    pub fn deleted(&self) -> [Arc; 12] {
        let (u, p, q, d) = (self.u, self.up, self.upp, self.d);
        [
            Arc::new(p[0], u[0], d[1]),
            Arc::new(q[1], q[0], d[1]),
            Arc::new(u[1], p[1], d[1]),
            Arc::new(u[1], p[2], d[2]),
            Arc::new(q[2], q[3], d[2]),
            Arc::new(p[3], u[2], d[2]),
            Arc::new(u[3], p[4], d[3]),
            Arc::new(q[4], q[5], d[3]),
            Arc::new(p[5], u[4], d[3]),
            Arc::new(u[5], p[7], d[0]),
            Arc::new(q[7], q[6], d[0]),
            Arc::new(p[6], u[4], d[0]),
        ]
    }

    pub fn added(&self) -> [Arc; 12] {
        let (u, p, q, d) = (self.u, self.up, self.upp, self.d);
        [
            Arc::new(u[5], u[4], d[0]),
            Arc::new(p[6], q[6], d[0]),
            Arc::new(q[7], p[7], d[0]),
            Arc::new(u[3], u[4], d[3]),
            Arc::new(p[5], q[5], d[3]),
            Arc::new(q[4], p[4], d[3]),
            Arc::new(u[1], u[2], d[2]),
            Arc::new(p[3], q[3], d[2]),
            Arc::new(q[2], p[2], d[2]),
            Arc::new(u[1], u[0], d[1]),
            Arc::new(p[0], q[0], d[1]),
            Arc::new(q[1], p[1], d[1]),
        ]
    }

    /// The bridge on `y, z, u_1..u_6` that the twist creates.
    pub fn canonical_bridge(&self) -> Bridge {
        Bridge {
            y: self.y,
            z: self.z,
            w: self.u,
            d: self.d,
            distinguishable: true,
        }
    }

    /// The eight added arcs outside the canonical bridge, in the order
    /// `u'1u''1, u''2u'2, u''3u'3, u'4u''4, u''5u'5, u'6u''6, u'7u''7, u''8u'8`.
    pub fn floating_arcs(&self) -> [(usize, usize); 8] {
        let (p, q) = (self.up, self.upp);
        [
            (p[0], q[0]),
            (q[1], p[1]),
            (q[2], p[2]),
            (p[3], q[3]),
            (q[4], p[4]),
            (p[5], q[5]),
            (p[6], q[6]),
            (q[7], p[7]),
        ]
    }

    pub fn untwist_key(&self) -> UntwistKey {
        UntwistKey {
            bridge: self.canonical_bridge(),
            floating: self.floating_arcs(),
        }
    }

    /// Checks every condition of a twist system of `h`, naming the first
    /// failure.
    pub fn validate(&self, h: &ColouredDigraph, p: &ColourPartition) -> Result<(), GadgetError> {
        let n = h.n();
        for v in [self.y, self.z]
            .iter()
            .chain(&self.u)
            .chain(&self.up)
            .chain(&self.upp)
        {
            check_vertex(*v, n)?;
        }
        let fail = |condition, detail: String| Err(GadgetError::Twist { condition, detail });
        if self.y == self.z {
            return fail("distinctness", "y = z".into());
        }
        let mut inner: Vec<usize> = self.u.to_vec();
        inner.extend(self.upp);
        if !all_distinct(&inner) {
            return fail(
                "distinctness",
                "interior and exterior vertices repeat".into(),
            );
        }
        let roots = [self.y, self.z];
        if inner.iter().chain(&self.up).any(|v| roots.contains(v)) {
            return fail("distinctness", "a non-root vertex equals y or z".into());
        }
        if self.up.iter().any(|v| inner.contains(v)) {
            return fail(
                "distinctness",
                "a middle vertex is also interior or exterior".into(),
            );
        }
        let part = p.lookup(n);
        for (i, &d) in self.d.iter().enumerate() {
            if d == 0 || d > n || part[d] as usize != i + 1 {
                return fail(
                    "colour parts",
                    format!("d{} = {d} is not in part {}", i + 1, i + 1),
                );
            }
        }
        for a in self.arcs() {
            if h.colour(a.tail, a.head) != Some(a.colour) {
                return fail(
                    "arcs",
                    format!(
                        "{}->{} is not an arc of colour {}",
                        a.tail, a.head, a.colour
                    ),
                );
            }
        }
        for (t, hd) in self.non_arcs() {
            if h.has_arc(t, hd) {
                return fail("non-arcs", format!("{t}->{hd} must be absent"));
            }
        }
        Ok(())
    }
}

/// What is needed to undo a twist: its canonical bridge and the eight
/// floating arcs it added.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UntwistKey {
    pub bridge: Bridge,
    pub floating: [(usize, usize); 8],
}

impl UntwistKey {
    pub fn system(&self) -> TwistSystem {
        let f = self.floating;
        TwistSystem {
            y: self.bridge.y,
            z: self.bridge.z,
            u: self.bridge.w,
            up: [
                f[0].0, f[1].1, f[2].1, f[3].0, f[4].1, f[5].0, f[6].0, f[7].1,
            ],
            upp: [
                f[0].1, f[1].0, f[2].0, f[3].1, f[4].0, f[5].1, f[6].1, f[7].0,
            ],
            d: self.bridge.d,
        }
    }
}

pub fn twist(
    h: &ColouredDigraph,
    t: &TwistSystem,
    p: &ColourPartition,
) -> Result<ColouredDigraph, GadgetError> {
    t.validate(h, p)?;
    Ok(h.with_edits(&t.deleted(), &t.added())?)
}

/// Reverses the twist identified by `key` in `h2`.
pub fn untwist(h2: &ColouredDigraph, key: &UntwistKey) -> Result<ColouredDigraph, GadgetError> {
    let t = key.system();
    Ok(h2.with_edits(&t.added(), &t.deleted())?)
}

/// Side conditions under which a twist raises the number of distinguishable
/// bridges by exactly one: vertex separation, exterior vertices outside the
/// neighbourhoods of `y` and `z`, no deleted arc inside any existing bridge,
/// and the two anti-coincidence conditions on `u_2` and `u_5`.
pub fn twist_side_conditions(
    h: &ColouredDigraph,
    t: &TwistSystem,
    p: &ColourPartition,
) -> Result<(), GadgetError> {
    let bridge_arcs = bridge_arc_set(h, t.y, t.z, p)?;
    side_conditions_with(h, t, p, &bridge_arcs)
}

fn bridge_arc_set(
    h: &ColouredDigraph,
    y: usize,
    z: usize,
    p: &ColourPartition,
) -> Result<HashSet<(usize, usize)>, GadgetError> {
    Ok(enumerate_bridges(h, y, z, p)?
        .iter()
        .flat_map(|b| b.arcs())
        .map(|a| (a.tail, a.head))
        .collect())
}

fn side_conditions_with(
    h: &ColouredDigraph,
    t: &TwistSystem,
    p: &ColourPartition,
    bridge_arcs: &HashSet<(usize, usize)>,
) -> Result<(), GadgetError> {
    let fail = |condition, detail: String| Err(GadgetError::Twist { condition, detail });
    let mut core = vec![t.y, t.z];
    core.extend(t.u);
    if t.up.iter().any(|v| core.contains(v)) {
        return fail("V", "a middle vertex meets y, z or the interior".into());
    }
    core.extend(t.up);
    if t.upp.iter().any(|v| core.contains(v)) {
        return fail("V", "an exterior vertex meets the other vertices".into());
    }
    let ny = h.neighbourhood(t.y);
    let nz = h.neighbourhood(t.z);
    if let Some(v) = t.upp.iter().find(|&&v| ny[v] || nz[v]) {
        return fail("E2", format!("exterior vertex {v} is adjacent to y or z"));
    }
    if let Some(a) = t
        .deleted()
        .iter()
        .find(|a| bridge_arcs.contains(&(a.tail, a.head)))
    {
        return fail(
            "R",
            format!("deleted arc {}->{} lies in a bridge", a.tail, a.head),
        );
    }
    let (y, z, u2, u5) = (t.y, t.z, t.u[1], t.u[4]);
    for &e1 in &p.parts[0] {
        for &e2 in &p.parts[1] {
            if h.out_nb(e1, y) == h.out_nb(e2, u2) && h.in_nb(e1, u5) == h.in_nb(e2, z) {
                return fail(
                    "A1",
                    format!("colours ({e1},{e2}) close a second bridge through u2 and u5"),
                );
            }
        }
    }
    for &e3 in &p.parts[2] {
        for &e4 in &p.parts[3] {
            if h.out_nb(e4, z) == h.out_nb(e3, u2) && h.in_nb(e4, u5) == h.in_nb(e3, y) {
                return fail(
                    "A2",
                    format!("colours ({e3},{e4}) close a second bridge through u2 and u5"),
                );
            }
        }
    }
    Ok(())
}

/// Twist systems of `h` on `(y,z)`, enumerated over `d_1..d_6` and then the
/// four exterior arcs, stopping at `cap`. With `side_conditions`, only systems
/// passing [`twist_side_conditions`] are returned.
pub fn find_twist_systems(
    h: &ColouredDigraph,
    y: usize,
    z: usize,
    p: &ColourPartition,
    cap: usize,
    side_conditions: bool,
) -> Result<Vec<TwistSystem>, GadgetError> {
    let n = h.n();
    check_vertex(y, n)?;
    check_vertex(z, n)?;
    if y == z {
        return Err(GadgetError::SameRoots(y));
    }
    p.validate(h.colours())?;
    let bridge_arcs = if side_conditions {
        bridge_arc_set(h, y, z, p)?
    } else {
        HashSet::new()
    };
    let mut out = Vec::new();
    if cap == 0 {
        return Ok(out);
    }
    for &d1 in &p.parts[0] {
        for &d2 in &p.parts[1] {
            let u1 = h.out_nb(d1, y);
            let u6 = h.in_nb(d2, z);
            let (p1, p8) = (h.in_nb(d2, u1), h.out_nb(d1, u6));
            for &d3 in &p.parts[2] {
                for &d4 in &p.parts[3] {
                    let u4 = h.in_nb(d3, y);
                    let u3 = h.out_nb(d4, z);
                    let (p5, p4) = (h.out_nb(d4, u4), h.in_nb(d3, u3));
                    for &d5 in &p.parts[4] {
                        for &d6 in &p.parts[5] {
                            let u2 = h.out_nb(d5, y);
                            let u5 = h.out_nb(d6, z);
                            let u = [u1, u2, u3, u4, u5, u6];
                            if !all_distinct(&[y, z, u1, u2, u3, u4, u5, u6]) {
                                continue;
                            }
                            if h.has_arc(u2, u1)
                                || h.has_arc(u2, u3)
                                || h.has_arc(u4, u5)
                                || h.has_arc(u6, u5)
                            {
                                continue;
                            }
                            let up = [
                                p1,
                                h.out_nb(d2, u2),
                                h.out_nb(d3, u2),
                                p4,
                                p5,
                                h.in_nb(d4, u5),
                                h.in_nb(d1, u5),
                                p8,
                            ];
                            let mut blocked = vec![y, z];
                            blocked.extend(u);
                            if up.iter().any(|v| blocked.contains(v)) {
                                continue;
                            }
                            blocked.extend(up);
                            let d = [d1, d2, d3, d4, d5, d6];
                            // Candidate exterior arcs of one colour as (tail, head).
                            let ext = |colour: usize| -> Vec<(usize, usize)> {
                                (1..=n)
                                    .map(|t| (t, h.out_nb(colour, t)))
                                    .filter(|&(t, hd)| {
                                        t != hd && !blocked.contains(&t) && !blocked.contains(&hd)
                                    })
                                    .collect()
                            };
                            let e2s: Vec<_> = ext(d2)
                                .into_iter()
                                .filter(|&(t, hd)| !h.has_arc(p1, hd) && !h.has_arc(t, up[1]))
                                .collect();
                            let e3s: Vec<_> = ext(d3)
                                .into_iter()
                                .filter(|&(t, hd)| !h.has_arc(t, up[2]) && !h.has_arc(p4, hd))
                                .collect();
                            let e4s: Vec<_> = ext(d4)
                                .into_iter()
                                .filter(|&(t, hd)| !h.has_arc(t, p5) && !h.has_arc(up[5], hd))
                                .collect();
                            let e1s: Vec<_> = ext(d1)
                                .into_iter()
                                .filter(|&(t, hd)| !h.has_arc(up[6], hd) && !h.has_arc(t, p8))
                                .collect();
                            for &(q2, q1) in &e2s {
                                for &(q3, q4) in &e3s {
                                    for &(q5, q6) in &e4s {
                                        for &(q8, q7) in &e1s {
                                            let upp = [q1, q2, q3, q4, q5, q6, q7, q8];
                                            if !all_distinct(&upp) {
                                                continue;
                                            }
                                            let t = TwistSystem {
                                                y,
                                                z,
                                                u,
                                                up,
                                                upp,
                                                d,
                                            };
                                            debug_assert!(t.validate(h, p).is_ok());
                                            if side_conditions
                                                && side_conditions_with(h, &t, p, &bridge_arcs)
                                                    .is_err()
                                            {
                                                continue;
                                            }
                                            out.push(t);
                                            if out.len() >= cap {
                                                return Ok(out);
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Builds `H` in `G_D` (`D = {1..k}`, round-robin partition) containing a
/// twist system on random distinct vertices, completing the colour classes
/// at random. Retries until the system also meets the side conditions.
pub fn plant_twist_system<R: Rng>(
    n: usize,
    k: usize,
    attempts: usize,
    rng: &mut R,
) -> Option<(ColouredDigraph, TwistSystem, ColourPartition)> {
    assert!(n >= 24, "a planted twist system uses 24 distinct vertices");
    assert!(k >= 6 && k <= n, "colour count must lie in 6..=n");
    let colours: Vec<usize> = (1..=k).collect();
    let p = ColourPartition::round_robin(&colours);
    for _ in 0..attempts {
        let mut vs: Vec<usize> = (1..=n).collect();
        vs.shuffle(rng);
        let d: [usize; 6] = std::array::from_fn(|i| *p.parts[i].choose(rng).unwrap());
        let t = TwistSystem {
            y: vs[0],
            z: vs[1],
            u: std::array::from_fn(|i| vs[2 + i]),
            up: std::array::from_fn(|i| vs[8 + i]),
            upp: std::array::from_fn(|i| vs[16 + i]),
            d,
        };
        let mut partial = vec![vec![0usize; n]; k];
        for a in t.arcs() {
            partial[a.colour - 1][a.tail - 1] = a.head;
        }
        let mut forbidden = vec![false; (n + 1) * (n + 1)];
        for (a, b) in t.non_arcs() {
            forbidden[a * (n + 1) + b] = true;
        }
        for &q in &t.upp {
            for r in [t.y, t.z] {
                forbidden[q * (n + 1) + r] = true;
                forbidden[r * (n + 1) + q] = true;
            }
        }
        let Some(rows) = complete_partial_rows(
            n,
            &partial,
            |_, tail, head| forbidden[tail * (n + 1) + head],
            20,
            rng,
        ) else {
            continue;
        };
        let classes: Vec<(usize, Vec<usize>)> = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| (i + 1, r))
            .collect();
        let h = ColouredDigraph::from_classes(n, &classes)
            .expect("completed rows form a Latin rectangle");
        if t.validate(&h, &p).is_ok() && twist_side_conditions(&h, &t, &p).is_ok() {
            return Some((h, t, p));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::count_distinguishable_bridges;
    use crate::sampler::task_rng;

    #[test]
    fn planted_twist_raises_r_by_one_and_reverses() {
        let mut rng = task_rng(41, 0);
        for (n, k) in [(24, 6), (30, 12), (40, 12)] {
            let (h, t, p) = plant_twist_system(n, k, 200, &mut rng).expect("planting succeeds");
            let before = count_distinguishable_bridges(&h, t.y, t.z, &p).unwrap();
            let h2 = twist(&h, &t, &p).unwrap();
            assert!(h2.validate().is_ok());
            let after = count_distinguishable_bridges(&h2, t.y, t.z, &p).unwrap();
            assert_eq!(after.r, before.r + 1);
            let canon = t.canonical_bridge();
            let found = after
                .bridges
                .iter()
                .find(|b| b.w == canon.w && b.d == canon.d)
                .unwrap();
            assert!(found.distinguishable);
            // Only the canonical bridge is new.
            let old: HashSet<_> = before.bridges.iter().map(|b| (b.w, b.d)).collect();
            let new: Vec<_> = after
                .bridges
                .iter()
                .filter(|b| !old.contains(&(b.w, b.d)))
                .collect();
            assert_eq!(new.len(), 1);
            assert_eq!(untwist(&h2, &t.untwist_key()).unwrap(), h);
            for c in h.colours() {
                if !t.d[..4].contains(c) {
                    assert_eq!(h.class(*c), h2.class(*c));
                }
            }
        }
    }

    #[test]
    fn finder_recovers_planted_system() {
        let mut rng = task_rng(42, 0);
        let (h, t, p) = plant_twist_system(24, 6, 200, &mut rng).unwrap();
        let found = find_twist_systems(&h, t.y, t.z, &p, usize::MAX, false).unwrap();
        assert!(found.contains(&t));
        for s in &found {
            s.validate(&h, &p).unwrap();
        }
        let strict = find_twist_systems(&h, t.y, t.z, &p, usize::MAX, true).unwrap();
        assert!(strict.contains(&t));
        assert!(strict.len() <= found.len());
    }

    #[test]
    fn violated_non_arc_is_named() {
        let mut rng = task_rng(43, 0);
        let (h, t, p) = plant_twist_system(24, 6, 200, &mut rng).unwrap();
        let mut bad = t.clone();
        bad.upp.swap(0, 1);
        let err = twist(&h, &bad, &p).unwrap_err();
        assert!(matches!(err, GadgetError::Twist { .. }), "{err}");
    }
}
