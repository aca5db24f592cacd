use super::links::find_link_path;
use super::{audit_path, AbsorberError};
use crate::digraph::{Arc, ColouredDigraph};
use crate::gadgets::{AbsorbingGadget, BridgingGadget, Footprint};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Names of the four completion slots, in order.
pub const SLOTS: [&str; 4] = ["P1", "P2", "P3", "P4"];

/// A `(v,c)`-absorbing gadget, a bridging gadget on its abutment pair, and
/// four completion paths (`x2 -> x3`, `w1 -> w4`, `w5 -> w2`, `w3 -> w6`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absorber {
    pub gadget: AbsorbingGadget,
    pub bridge: BridgingGadget,
    pub paths: [Vec<Arc>; 4],
}

impl Absorber {
    pub fn v(&self) -> usize {
        self.gadget.v
    }

    pub fn c(&self) -> usize {
        self.gadget.c
    }

    pub fn initial(&self) -> usize {
        self.gadget.x[0]
    }

    pub fn terminal(&self) -> usize {
        self.gadget.x[5]
    }

    /// Endpoints `(tail, head)` required of each completion slot.
    pub fn slot_ends(gadget: &AbsorbingGadget, bridge: &BridgingGadget) -> [(usize, usize); 4] {
        let (x, w) = (gadget.x, bridge.w);
        [(x[1], x[2]), (w[0], w[3]), (w[4], w[1]), (w[2], w[5])]
    }

    /// Every arc: gadget, bridge, then the completion paths.
    pub fn arcs(&self) -> Vec<Arc> {
        let mut out: Vec<Arc> = self.gadget.arcs().to_vec();
        out.extend(self.bridge.arcs());
        for p in &self.paths {
            out.extend(p.iter().copied());
        }
        out
    }

    pub fn vertices(&self) -> BTreeSet<usize> {
        self.arcs().iter().flat_map(|a| [a.tail, a.head]).collect()
    }

    pub fn colours(&self) -> BTreeSet<usize> {
        self.arcs().iter().map(|a| a.colour).collect()
    }

    /// The `x1 -> x6` path through every vertex and colour.
    pub fn absorbing_path(&self) -> Vec<Arc> {
        let (g, b) = (&self.gadget, &self.bridge);
        let (x, f, w, d) = (g.x, g.f, b.w, b.d);
        let mut out = vec![Arc::new(x[0], g.v, f[0]), Arc::new(g.v, x[1], f[1])];
        out.extend(&self.paths[0]);
        out.push(Arc::new(x[2], x[3], f[2]));
        out.push(Arc::new(b.y, w[0], d[0]));
        out.extend(&self.paths[1]);
        out.push(Arc::new(w[3], w[4], d[3]));
        out.extend(&self.paths[2]);
        out.push(Arc::new(w[1], w[2], d[2]));
        out.extend(&self.paths[3]);
        out.push(Arc::new(w[5], b.z, d[1]));
        out.push(Arc::new(x[4], x[5], g.c));
        out
    }

    /// The `x1 -> x6` path missing exactly `v` and `c`.
    pub fn avoiding_path(&self) -> Vec<Arc> {
        let (g, b) = (&self.gadget, &self.bridge);
        let (x, f, w, d) = (g.x, g.f, b.w, b.d);
        let mut out = vec![Arc::new(x[0], x[1], f[2])];
        out.extend(&self.paths[0]);
        out.push(Arc::new(x[2], x[4], f[1]));
        out.push(Arc::new(b.z, w[2], d[3]));
        out.extend(&self.paths[3]);
        out.push(Arc::new(w[5], w[4], d[0]));
        out.extend(&self.paths[2]);
        out.push(Arc::new(w[1], w[0], d[1]));
        out.extend(&self.paths[1]);
        out.push(Arc::new(w[3], b.y, d[2]));
        out.push(Arc::new(x[3], x[5], f[0]));
        out
    }

    /// Checks the bridging relation, the completion conditions, and that both
    /// key paths are rainbow directed `x1 -> x6` paths with the right
    /// vertex and colour sets.
    pub fn validate(&self) -> Result<(), AbsorberError> {
        let (g, b) = (&self.gadget, &self.bridge);
        check_bridges(g, b)?;
        let ends = Self::slot_ends(g, b);
        let mut core_v: BTreeSet<usize> = g.vertices().into_iter().collect();
        core_v.extend(b.vertices());
        let mut seen_c: BTreeSet<usize> = g.colours().into_iter().collect();
        seen_c.extend(b.colours());
        let mut seen_internal = BTreeSet::new();
        for (i, p) in self.paths.iter().enumerate() {
            let audit = audit_path(p);
            if !audit.is_path || !audit.rainbow || p.is_empty() {
                return Err(AbsorberError::Invalid(format!(
                    "{} is not a rainbow directed path",
                    SLOTS[i]
                )));
            }
            if (p[0].tail, p[p.len() - 1].head) != ends[i] {
                return Err(AbsorberError::Invalid(format!(
                    "{} runs {}->{} instead of {}->{}",
                    SLOTS[i],
                    p[0].tail,
                    p[p.len() - 1].head,
                    ends[i].0,
                    ends[i].1
                )));
            }
            for a in &p[1..] {
                if core_v.contains(&a.tail) || !seen_internal.insert(a.tail) {
                    return Err(AbsorberError::Invalid(format!(
                        "{} reuses vertex {}",
                        SLOTS[i], a.tail
                    )));
                }
            }
            for a in p {
                if !seen_c.insert(a.colour) {
                    return Err(AbsorberError::Invalid(format!(
                        "{} reuses colour {}",
                        SLOTS[i], a.colour
                    )));
                }
            }
        }
        let all_v = self.vertices();
        let all_c = self.colours();
        for (name, path, skip_v, skip_c) in [
            ("absorbing", self.absorbing_path(), None, None),
            ("avoiding", self.avoiding_path(), Some(g.v), Some(g.c)),
        ] {
            let audit = audit_path(&path);
            let mut want_v = all_v.clone();
            let mut want_c = all_c.clone();
            if let Some(v) = skip_v {
                want_v.remove(&v);
            }
            if let Some(c) = skip_c {
                want_c.remove(&c);
            }
            let ok = audit.is_path
                && audit.rainbow
                && audit.start == Some(self.initial())
                && audit.end == Some(self.terminal())
                && audit.vertices == want_v
                && audit.colours == want_c;
            if !ok {
                return Err(AbsorberError::Invalid(format!("{name} path check failed")));
            }
        }
        Ok(())
    }

    /// `validate` plus presence of every arc in `g`.
    pub fn validate_in(&self, g: &ColouredDigraph) -> Result<(), AbsorberError> {
        self.validate()?;
        arcs_present(g, &self.arcs())
    }
}

pub(crate) fn arcs_present(g: &ColouredDigraph, arcs: &[Arc]) -> Result<(), AbsorberError> {
    for a in arcs {
        if a.tail > g.n() || a.head > g.n() || g.colour(a.tail, a.head) != Some(a.colour) {
            return Err(AbsorberError::Invalid(format!(
                "arc {}->{} of colour {} is not in the digraph",
                a.tail, a.head, a.colour
            )));
        }
    }
    Ok(())
}

/// `bridge` bridges `gadget`: same abutment pair, no other shared vertex,
/// disjoint colours.
pub fn check_bridges(gadget: &AbsorbingGadget, bridge: &BridgingGadget) -> Result<(), AbsorberError> {
    if (bridge.y, bridge.z) != gadget.abutment() {
        return Err(AbsorberError::Invalid(format!(
            "bridge roots ({},{}) differ from abutment pair {:?}",
            bridge.y,
            bridge.z,
            gadget.abutment()
        )));
    }
    let gv: BTreeSet<usize> = gadget.vertices().into_iter().collect();
    let shared: Vec<usize> = bridge.w.iter().copied().filter(|w| gv.contains(w)).collect();
    if !shared.is_empty() {
        return Err(AbsorberError::Invalid(format!(
            "bridge shares vertices {shared:?} with the gadget"
        )));
    }
    let gc = gadget.colours();
    if let Some(d) = bridge.d.iter().find(|d| gc.contains(d)) {
        return Err(AbsorberError::Invalid(format!(
            "bridge shares colour {d} with the gadget"
        )));
    }
    Ok(())
}

/// Completes `(gadget, bridge)` with rainbow paths of `path_len` arcs, chosen
/// greedily slot by slot as the lexicographically least admissible path.
pub fn assemble_absorber(
    g: &ColouredDigraph,
    gadget: &AbsorbingGadget,
    bridge: &BridgingGadget,
    forbidden_v: &BTreeSet<usize>,
    forbidden_c: &BTreeSet<usize>,
    path_len: usize,
) -> Result<Absorber, AbsorberError> {
    gadget.validate(g)?;
    bridge.validate(g)?;
    check_bridges(gadget, bridge)?;
    let n = g.n();
    let mut blocked_v = vec![false; n + 1];
    let mut blocked_c = vec![false; n + 1];
    for &v in forbidden_v.iter().filter(|&&v| v <= n) {
        blocked_v[v] = true;
    }
    for &c in forbidden_c.iter().filter(|&&c| c <= n) {
        blocked_c[c] = true;
    }
    for v in gadget.vertices().into_iter().chain(bridge.vertices()) {
        blocked_v[v] = true;
    }
    for c in gadget.colours().into_iter().chain(bridge.colours()) {
        blocked_c[c] = true;
    }
    let ends = Absorber::slot_ends(gadget, bridge);
    let mut paths: [Vec<Arc>; 4] = Default::default();
    for (i, &(t, h)) in ends.iter().enumerate() {
        let p = find_link_path(g, t, h, path_len, None, &|w| !blocked_v[w], &|c| !blocked_c[c])
            .ok_or(AbsorberError::Assembly {
                slot: SLOTS[i],
                tail: t,
                head: h,
            })?;
        for a in &p {
            blocked_v[a.head] = true;
            blocked_c[a.colour] = true;
        }
        paths[i] = p;
    }
    let a = Absorber {
        gadget: gadget.clone(),
        bridge: bridge.clone(),
        paths,
    };
    a.validate()?;
    Ok(a)
}

/// First gadget for `(v,c)` (in finder order) that has a bridging gadget on
/// its abutment pair, assembled with empty forbidden sets.
pub fn find_absorber(
    g: &ColouredDigraph,
    v: usize,
    c: usize,
    path_len: usize,
    cap: usize,
) -> Result<Absorber, AbsorberError> {
    let gadgets = crate::gadgets::find_absorbing_gadgets(g, v, c, cap)?;
    let empty = BTreeSet::new();
    for gadget in &gadgets {
        let (y, z) = gadget.abutment();
        for bridge in crate::gadgets::find_bridging_gadgets(g, y, z, cap)? {
            if check_bridges(gadget, &bridge).is_err() {
                continue;
            }
            if let Ok(a) = assemble_absorber(g, gadget, &bridge, &empty, &empty, path_len) {
                return Ok(a);
            }
        }
    }
    Err(AbsorberError::Embed {
        edge_index: 0,
        resource: "absorbing gadget with a bridge",
    })
}
