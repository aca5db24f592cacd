use super::links::find_link_path;
use super::template::RMBGTemplate;
use super::vc::{arcs_present, check_bridges, Absorber};
use super::AbsorberError;
use crate::digraph::{Arc, ColouredDigraph};
use crate::gadgets::{
    find_absorbing_gadgets_avoiding, find_bridging_gadgets_avoiding, AbsorbingGadget, BridgingGadget, Footprint,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedOptions {
    /// Arcs in each completion path of an absorber.
    pub path_len: usize,
    /// Arcs in each link between consecutive absorbers.
    pub link_len: usize,
    /// Candidates requested from the gadget finders per root pair.
    pub search_cap: usize,
    /// Bridging candidates tried per absorbing gadget.
    pub bridge_tries: usize,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions {
            path_len: 3,
            link_len: 3,
            search_cap: 4096,
            bridge_tries: 64,
        }
    }
}

/// Where the embedding draws its gadgets from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GadgetSupply {
    /// Run the gadget finders on the digraph.
    Search,
    /// Use only these gadgets; each is checked against the digraph.
    Supplied {
        absorbing: Vec<AbsorbingGadget>,
        bridging: Vec<BridgingGadget>,
    },
}

/// A chain of absorbers indexed by the template's edges (lexicographic
/// order), joined by link paths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TAbsorber {
    pub template: RMBGTemplate,
    /// Root vertex of each `A`-part.
    pub root_vertices: Vec<usize>,
    /// Root colour of each `B`-part.
    pub root_colours: Vec<usize>,
    pub absorbers: Vec<Absorber>,
    /// `links[i]` runs from the terminal vertex of absorber `i` to the initial
    /// vertex of absorber `i + 1`.
    pub links: Vec<Vec<Arc>>,
}

/// `(|V(H)|, |colours(H)|)` for a chain where every part has an edge.
pub fn expected_inventory(
    edges: usize,
    parts: usize,
    path_len: usize,
    link_len: usize,
) -> (usize, usize) {
    if edges == 0 {
        return (0, 0);
    }
    let v = (8 + 4 * path_len) * edges + parts + (link_len - 1) * (edges - 1);
    let c = (7 + 4 * path_len) * edges + parts + link_len * (edges - 1);
    (v, c)
}

impl TAbsorber {
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.template.edges
    }

    pub fn initial(&self) -> usize {
        self.absorbers[0].initial()
    }

    pub fn terminal(&self) -> usize {
        self.absorbers[self.absorbers.len() - 1].terminal()
    }

    pub fn flexible_vertices(&self) -> Vec<usize> {
        self.template.flex_a.iter().map(|&a| self.root_vertices[a]).collect()
    }

    pub fn flexible_colours(&self) -> Vec<usize> {
        self.template.flex_b.iter().map(|&b| self.root_colours[b]).collect()
    }

    pub fn arcs(&self) -> Vec<Arc> {
        let mut out: Vec<Arc> = self.absorbers.iter().flat_map(|a| a.arcs()).collect();
        out.extend(self.links.iter().flatten().copied());
        out
    }

    pub fn vertices(&self) -> BTreeSet<usize> {
        self.arcs().iter().flat_map(|a| [a.tail, a.head]).collect()
    }

    pub fn colours(&self) -> BTreeSet<usize> {
        self.arcs().iter().map(|a| a.colour).collect()
    }

    /// Re-checks every defining condition from the stored inventory.
    pub fn validate(&self) -> Result<(), AbsorberError> {
        let t = &self.template;
        let bad = |s: String| Err(AbsorberError::Invalid(s));
        if t.edges.is_empty() {
            return bad("template has no edges".into());
        }
        if self.absorbers.len() != t.edges.len() || self.links.len() != t.edges.len() - 1 {
            return bad(format!(
                "{} absorbers and {} links for {} edges",
                self.absorbers.len(),
                self.links.len(),
                t.edges.len()
            ));
        }
        if self.root_vertices.len() != t.size || self.root_colours.len() != t.size {
            return bad("root maps must cover both parts".into());
        }
        if !distinct(&self.root_vertices) || !distinct(&self.root_colours) {
            return bad("root maps must be injective".into());
        }
        for (i, (&(a, b), abs)) in t.edges.iter().zip(&self.absorbers).enumerate() {
            abs.validate()
                .map_err(|e| AbsorberError::Invalid(format!("absorber {i}: {e}")))?;
            if abs.v() != self.root_vertices[a] || abs.c() != self.root_colours[b] {
                return bad(format!("absorber {i} is not rooted at edge ({a},{b})"));
            }
        }
        // Absorbers meet only in the root vertex or colour of a shared part.
        let mut by_vertex: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut by_colour: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, abs) in self.absorbers.iter().enumerate() {
            for v in abs.vertices() {
                by_vertex.entry(v).or_default().push(i);
            }
            for c in abs.colours() {
                by_colour.entry(c).or_default().push(i);
            }
        }
        for (v, owners) in by_vertex.iter().filter(|(_, o)| o.len() > 1) {
            let a = t.edges[owners[0]].0;
            if *v != self.root_vertices[a] || owners.iter().any(|&i| t.edges[i].0 != a) {
                return bad(format!("absorbers {owners:?} share vertex {v}"));
            }
        }
        for (c, owners) in by_colour.iter().filter(|(_, o)| o.len() > 1) {
            let b = t.edges[owners[0]].1;
            if *c != self.root_colours[b] || owners.iter().any(|&i| t.edges[i].1 != b) {
                return bad(format!("absorbers {owners:?} share colour {c}"));
            }
        }
        let mut link_v = BTreeSet::new();
        let mut link_c = BTreeSet::new();
        for (i, p) in self.links.iter().enumerate() {
            let audit = super::audit_path(p);
            if p.is_empty() || !audit.is_path {
                return bad(format!("link {i} is not a directed path"));
            }
            if audit.start != Some(self.absorbers[i].terminal())
                || audit.end != Some(self.absorbers[i + 1].initial())
            {
                return bad(format!("link {i} does not join absorbers {i} and {}", i + 1));
            }
            for v in &audit.vertices {
                if !link_v.insert(*v) {
                    return bad(format!("links share vertex {v}"));
                }
            }
            for a in &p[1..] {
                if by_vertex.contains_key(&a.tail) {
                    return bad(format!("link {i} passes through absorber vertex {}", a.tail));
                }
            }
            for a in p {
                if !link_c.insert(a.colour) || by_colour.contains_key(&a.colour) {
                    return bad(format!("link colour {} is reused", a.colour));
                }
            }
        }
        let arcs = self.arcs();
        let unique: BTreeSet<(usize, usize)> = arcs.iter().map(|a| (a.tail, a.head)).collect();
        if unique.len() != arcs.len() {
            return bad("inventory repeats an arc".into());
        }
        Ok(())
    }

    pub fn validate_in(&self, g: &ColouredDigraph) -> Result<(), AbsorberError> {
        self.validate()?;
        arcs_present(g, &self.arcs())
    }
}

fn distinct(xs: &[usize]) -> bool {
    let s: BTreeSet<_> = xs.iter().collect();
    s.len() == xs.len()
}

/// Root maps sending the flexible parts onto `v_flex` / `c_flex` in order and
/// the remaining parts onto the rest of `u` / `d` in order.
fn root_maps(
    t: &RMBGTemplate,
    u: &[usize],
    d: &[usize],
    v_flex: &[usize],
    c_flex: &[usize],
) -> Result<(Vec<usize>, Vec<usize>), AbsorberError> {
    let one = |roots: &[usize], flex_roots: &[usize], flex_parts: &[usize], what: &str| {
        if roots.len() != t.size || flex_roots.len() != flex_parts.len() {
            return Err(AbsorberError::Template(format!(
                "{what}: need {} roots with {} flexible, got {} and {}",
                t.size,
                flex_parts.len(),
                roots.len(),
                flex_roots.len()
            )));
        }
        if !distinct(roots) || flex_roots.iter().any(|r| !roots.contains(r)) {
            return Err(AbsorberError::Template(format!(
                "{what}: roots must be distinct and contain the flexible roots"
            )));
        }
        let mut map = vec![0usize; t.size];
        for (&p, &r) in flex_parts.iter().zip(flex_roots) {
            map[p] = r;
        }
        let mut rest = roots.iter().filter(|r| !flex_roots.contains(r));
        for (p, slot) in map.iter_mut().enumerate() {
            if !flex_parts.contains(&p) {
                *slot = *rest.next().unwrap();
            }
        }
        Ok(map)
    };
    Ok((
        one(u, v_flex, &t.flex_a, "vertices")?,
        one(d, c_flex, &t.flex_b, "colours")?,
    ))
}

/// Greedy embedding of a `T`-absorber rooted on `u` and `d`, edge by edge in
/// lexicographic order. Every choice is the first admissible candidate, so
/// failures are reproducible.
#[allow(clippy::too_many_arguments)]
pub fn embed_t_absorber(
    g: &ColouredDigraph,
    template: &RMBGTemplate,
    u: &[usize],
    d: &[usize],
    v_flex: &[usize],
    c_flex: &[usize],
    supply: &GadgetSupply,
    opts: &EmbedOptions,
) -> Result<TAbsorber, AbsorberError> {
    let n = g.n();
    if u.iter().chain(d).any(|&x| x == 0 || x > n) {
        return Err(AbsorberError::Template(format!("roots must lie in 1..={n}")));
    }
    let (root_vertices, root_colours) = root_maps(template, u, d, v_flex, c_flex)?;
    let mut used_v = vec![false; n + 1];
    let mut used_c = vec![false; n + 1];
    u.iter().for_each(|&x| used_v[x] = true);
    d.iter().for_each(|&x| used_c[x] = true);

    let mut absorbers: Vec<Absorber> = Vec::new();
    let mut links: Vec<Vec<Arc>> = Vec::new();
    for (j, &(a, b)) in template.edges.iter().enumerate() {
        let (v, c) = (root_vertices[a], root_colours[b]);
        let mut gadgets: Vec<AbsorbingGadget> = match supply {
            GadgetSupply::Search => find_absorbing_gadgets_avoiding(
                g,
                v,
                c,
                opts.search_cap,
                &|w| used_v[w],
                &|x| used_c[x],
            )?,
            GadgetSupply::Supplied { absorbing, .. } => absorbing
                .iter()
                .filter(|x| x.v == v && x.c == c && x.validate(g).is_ok())
                .cloned()
                .collect(),
        };
        gadgets.sort();
        let mut stage = 0u8;
        let mut chosen = None;
        'gadgets: for gadget in &gadgets {
            let gv = gadget.vertices();
            let gc = gadget.colours();
            if gv.iter().any(|&x| x != v && used_v[x]) || gc.iter().any(|&x| x != c && used_c[x]) {
                continue;
            }
            stage = stage.max(1);
            let (y, z) = gadget.abutment();
            let mut bridges: Vec<BridgingGadget> = match supply {
                GadgetSupply::Search => find_bridging_gadgets_avoiding(
                    g,
                    y,
                    z,
                    opts.search_cap,
                    &|w| used_v[w] || gv.contains(&w),
                    &|x| used_c[x] || gc.contains(&x),
                )?,
                GadgetSupply::Supplied { bridging, .. } => bridging
                    .iter()
                    .filter(|x| x.y == y && x.z == z && x.validate(g).is_ok())
                    .cloned()
                    .collect(),
            };
            bridges.sort();
            let mut tried = 0;
            for bridge in &bridges {
                if bridge.w.iter().any(|&x| used_v[x])
                    || bridge.d.iter().any(|&x| used_c[x])
                    || check_bridges(gadget, bridge).is_err()
                {
                    continue;
                }
                if tried == opts.bridge_tries {
                    break;
                }
                tried += 1;
                stage = stage.max(2);
                let mut bv = used_v.clone();
                let mut bc = used_c.clone();
                gv.iter().chain(&bridge.vertices()).for_each(|&x| bv[x] = true);
                gc.iter().chain(&bridge.colours()).for_each(|&x| bc[x] = true);
                let mut paths: [Vec<Arc>; 4] = Default::default();
                let mut ok = true;
                for (k, &(t, h)) in Absorber::slot_ends(gadget, bridge).iter().enumerate() {
                    match find_link_path(g, t, h, opts.path_len, None, &|w| !bv[w], &|x| !bc[x]) {
                        Some(p) => {
                            p.iter().for_each(|arc| {
                                bv[arc.head] = true;
                                bc[arc.colour] = true;
                            });
                            paths[k] = p;
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                stage = stage.max(3);
                let link = match absorbers.last() {
                    None => None,
                    Some(prev) => {
                        let (t, h) = (prev.terminal(), gadget.x[0]);
                        // Endpoints are already marked used; internal vertices must be fresh.
                        match find_link_path(g, t, h, opts.link_len, None, &|w| !bv[w], &|x| !bc[x]) {
                            Some(p) => Some(p),
                            None => continue,
                        }
                    }
                };
                chosen = Some((
                    Absorber {
                        gadget: gadget.clone(),
                        bridge: bridge.clone(),
                        paths,
                    },
                    link,
                    bv,
                    bc,
                ));
                break 'gadgets;
            }
        }
        let Some((absorber, link, mut bv, mut bc)) = chosen else {
            let resource = match stage {
                0 => "absorbing gadget",
                1 => "bridging gadget",
                2 => "completion path",
                _ => "link path",
            };
            return Err(AbsorberError::Embed {
                edge_index: j,
                resource,
            });
        };
        if let Some(p) = link {
            p.iter().for_each(|arc| {
                bv[arc.head] = true;
                bc[arc.colour] = true;
            });
            links.push(p);
        }
        used_v = bv;
        used_c = bc;
        absorbers.push(absorber);
    }
    let t_abs = TAbsorber {
        template: template.clone(),
        root_vertices,
        root_colours,
        absorbers,
        links,
    };
    t_abs.validate_in(g)?;
    Ok(t_abs)
}

/// A `T`-absorber on fresh labels with no ambient digraph. Root vertices and
/// colours are `1..=size`; everything else is numbered upwards from there.
pub fn synthetic_t_absorber(template: &RMBGTemplate, path_len: usize, link_len: usize) -> TAbsorber {
    let size = template.size;
    let mut next_v = size;
    let mut next_c = size;
    let mut fresh_v = || {
        next_v += 1;
        next_v
    };
    let mut vs = |k: usize| (0..k).map(|_| fresh_v()).collect::<Vec<_>>();
    let mut plan_v: Vec<Vec<usize>> = Vec::new();
    for _ in &template.edges {
        plan_v.push(vs(12 + 4 * (path_len - 1)));
    }
    let link_v: Vec<Vec<usize>> = (1..template.edges.len()).map(|_| vs(link_len - 1)).collect();
    let mut fresh_c = || {
        next_c += 1;
        next_c
    };
    let mut absorbers = Vec::new();
    for (&(a, b), pv) in template.edges.iter().zip(&plan_v) {
        let v = a + 1;
        let c = b + 1;
        let x = [pv[0], pv[1], pv[2], pv[3], pv[4], pv[5]];
        let w = [pv[6], pv[7], pv[8], pv[9], pv[10], pv[11]];
        let gadget = AbsorbingGadget {
            v,
            c,
            x,
            f: [fresh_c(), fresh_c(), fresh_c()],
        };
        let bridge = BridgingGadget {
            y: x[3],
            z: x[4],
            w,
            d: [fresh_c(), fresh_c(), fresh_c(), fresh_c()],
        };
        let mut internal = pv[12..].chunks(path_len.saturating_sub(1).max(1));
        let mut paths: [Vec<Arc>; 4] = Default::default();
        for (k, &(t, h)) in Absorber::slot_ends(&gadget, &bridge).iter().enumerate() {
            let mids: Vec<usize> = if path_len > 1 {
                internal.next().unwrap().to_vec()
            } else {
                Vec::new()
            };
            paths[k] = chain(t, &mids, h, &mut fresh_c);
        }
        absorbers.push(Absorber {
            gadget,
            bridge,
            paths,
        });
    }
    let links = link_v
        .iter()
        .enumerate()
        .map(|(i, mids)| {
            chain(
                absorbers[i].terminal(),
                mids,
                absorbers[i + 1].initial(),
                &mut fresh_c,
            )
        })
        .collect();
    TAbsorber {
        template: template.clone(),
        root_vertices: (1..=size).collect(),
        root_colours: (1..=size).collect(),
        absorbers,
        links,
    }
}

fn chain(t: usize, mids: &[usize], h: usize, fresh_c: &mut dyn FnMut() -> usize) -> Vec<Arc> {
    let mut seq = vec![t];
    seq.extend(mids);
    seq.push(h);
    seq.windows(2).map(|w| Arc::new(w[0], w[1], fresh_c())).collect()
}

/// Rainbow Hamilton path of `H - X` from the initial to the terminal vertex
/// avoiding the colours `Y`: absorbing paths on a perfect matching of the
/// template minus the deleted parts, avoiding paths elsewhere, joined by
/// the links.
pub fn robust_hamilton_path(
    t_abs: &TAbsorber,
    x: &[usize],
    y: &[usize],
) -> Result<Vec<Arc>, AbsorberError> {
    let fv = t_abs.flexible_vertices();
    let fc = t_abs.flexible_colours();
    if !distinct(x) || !distinct(y) {
        return Err(AbsorberError::Deletion("repeated element".into()));
    }
    if let Some(v) = x.iter().find(|v| !fv.contains(v)) {
        return Err(AbsorberError::Deletion(format!("vertex {v} is not flexible")));
    }
    if let Some(c) = y.iter().find(|c| !fc.contains(c)) {
        return Err(AbsorberError::Deletion(format!("colour {c} is not flexible")));
    }
    if x.len() != y.len() || 2 * x.len() > fv.len() || 2 * y.len() > fc.len() {
        return Err(AbsorberError::Deletion(format!(
            "sizes {} and {} must be equal and at most half the flexible sets",
            x.len(),
            y.len()
        )));
    }
    let part_of = |roots: &[usize], r: usize| roots.iter().position(|&q| q == r).unwrap();
    let del_a: Vec<usize> = x.iter().map(|&v| part_of(&t_abs.root_vertices, v)).collect();
    let del_b: Vec<usize> = y.iter().map(|&c| part_of(&t_abs.root_colours, c)).collect();
    let m = t_abs
        .template
        .perfect_matching_without(&del_a, &del_b)
        .ok_or_else(|| AbsorberError::NotRobust {
            x: del_a.clone(),
            y: del_b.clone(),
        })?;
    let matched: BTreeSet<(usize, usize)> = m.into_iter().collect();
    let mut out = Vec::new();
    for (i, (e, abs)) in t_abs.template.edges.iter().zip(&t_abs.absorbers).enumerate() {
        if matched.contains(e) {
            out.extend(abs.absorbing_path());
        } else {
            out.extend(abs.avoiding_path());
        }
        if let Some(link) = t_abs.links.get(i) {
            out.extend(link.iter().copied());
        }
    }
    Ok(out)
}

/// Four independent checks on a candidate robust path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HamiltonAudit {
    /// Degrees are those of a single directed path from the initial to the
    /// terminal vertex, every arc lies in `H`, and the walk from the initial
    /// vertex uses every arc.
    pub directed_path: bool,
    pub rainbow: bool,
    /// Vertex set is exactly `V(H) - X`.
    pub hamilton: bool,
    pub avoids_y: bool,
}

impl HamiltonAudit {
    pub fn ok(&self) -> bool {
        self.directed_path && self.rainbow && self.hamilton && self.avoids_y
    }
}

pub fn validate_hamilton_path(t_abs: &TAbsorber, x: &[usize], y: &[usize], arcs: &[Arc]) -> HamiltonAudit {
    let h_arcs: BTreeSet<Arc> = t_abs.arcs().into_iter().collect();
    let (start, end) = (t_abs.initial(), t_abs.terminal());

    let mut outd: BTreeMap<usize, usize> = BTreeMap::new();
    let mut ind: BTreeMap<usize, usize> = BTreeMap::new();
    let mut succ: BTreeMap<usize, usize> = BTreeMap::new();
    for a in arcs {
        *outd.entry(a.tail).or_default() += 1;
        *ind.entry(a.head).or_default() += 1;
        succ.insert(a.tail, a.head);
    }
    let touched: BTreeSet<usize> = outd.keys().chain(ind.keys()).copied().collect();
    let degrees_ok = touched.iter().all(|&v| {
        let (o, i) = (outd.get(&v).copied().unwrap_or(0), ind.get(&v).copied().unwrap_or(0));
        match (v == start, v == end) {
            (true, false) => o == 1 && i == 0,
            (false, true) => o == 0 && i == 1,
            (false, false) => o == 1 && i == 1,
            (true, true) => false,
        }
    });
    let mut steps = 0;
    let mut cur = start;
    while let Some(&nx) = succ.get(&cur) {
        steps += 1;
        cur = nx;
        if steps > arcs.len() {
            break;
        }
    }
    let directed_path = !arcs.is_empty()
        && degrees_ok
        && steps == arcs.len()
        && cur == end
        && arcs.iter().all(|a| h_arcs.contains(a));

    let colours: BTreeSet<usize> = arcs.iter().map(|a| a.colour).collect();
    let rainbow = colours.len() == arcs.len();

    let mut want = t_abs.vertices();
    x.iter().for_each(|v| {
        want.remove(v);
    });
    let hamilton = touched == want;

    let avoids_y = arcs.iter().all(|a| !y.contains(&a.colour));
    HamiltonAudit {
        directed_path,
        rainbow,
        hamilton,
        avoids_y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absorber::template::{build_rmbg, legal_deletions, TemplateMode, CERTIFY_FLEX_LIMIT};
    use crate::digraph::latin_to_digraph;
    use crate::sampler::{sample_latin_square, task_rng, SamplerConfig};

    #[test]
    fn inventory_formula_matches_three_arc_paths() {
        for e in 1..20 {
            for parts in 1..5 {
                assert_eq!(
                    expected_inventory(e, parts, 3, 3),
                    (22 * e - 2 + parts, 22 * e - 3 + parts)
                );
            }
        }
    }

    #[test]
    fn synthetic_chain_validates_with_expected_sizes() {
        let t = RMBGTemplate::complete(2, 2);
        for (lp, ll) in [(1, 1), (3, 3), (2, 4)] {
            let h = synthetic_t_absorber(&t, lp, ll);
            h.validate().unwrap();
            assert_eq!(
                (h.vertices().len(), h.colours().len()),
                expected_inventory(4, 2, lp, ll)
            );
        }
    }

    #[test]
    fn robust_paths_on_small_certified_template() {
        let mut rng = task_rng(5, 0);
        let t = build_rmbg(1, TemplateMode::Regular(3), CERTIFY_FLEX_LIMIT, 50, &mut rng).unwrap();
        let h = synthetic_t_absorber(&t, 3, 3);
        h.validate().unwrap();
        let fv = h.flexible_vertices();
        let fc = h.flexible_colours();
        for (xa, yb) in legal_deletions(&t.flex_a, &t.flex_b, t.max_deletion()) {
            let x: Vec<usize> = xa.iter().map(|&a| h.root_vertices[a]).collect();
            let y: Vec<usize> = yb.iter().map(|&b| h.root_colours[b]).collect();
            assert!(x.iter().all(|v| fv.contains(v)) && y.iter().all(|c| fc.contains(c)));
            let p = robust_hamilton_path(&h, &x, &y).unwrap();
            let audit = validate_hamilton_path(&h, &x, &y, &p);
            assert!(audit.ok(), "{audit:?}");
            assert_eq!(p.len() + 1, h.vertices().len() - x.len());
        }
    }

    #[test]
    fn illegal_deletions_rejected() {
        let t = RMBGTemplate::complete(3, 2);
        let h = synthetic_t_absorber(&t, 1, 1);
        // Only one of two flexible vertices may go.
        assert!(matches!(
            robust_hamilton_path(&h, &[1, 2], &[1, 2]),
            Err(AbsorberError::Deletion(_))
        ));
        // Part 3 is not flexible.
        assert!(robust_hamilton_path(&h, &[3], &[1]).is_err());
        assert!(robust_hamilton_path(&h, &[1], &[]).is_err());
    }

    #[test]
    fn validator_catches_tampering() {
        let t = RMBGTemplate::complete(2, 2);
        let h = synthetic_t_absorber(&t, 3, 3);
        let p = robust_hamilton_path(&h, &[1], &[2]).unwrap();
        assert!(validate_hamilton_path(&h, &[1], &[2], &p).ok());
        // Claiming a different deletion breaks the vertex and colour audits.
        let a = validate_hamilton_path(&h, &[2], &[1], &p);
        assert!(!a.hamilton && !a.avoids_y && a.rainbow && a.directed_path);
        let mut q = p.clone();
        q.swap(0, 1);
        assert!(validate_hamilton_path(&h, &[1], &[2], &q).directed_path);
        q.pop();
        assert!(!validate_hamilton_path(&h, &[1], &[2], &q).directed_path);
    }

    #[test]
    fn single_edge_embedding_in_random_square() {
        let g = latin_to_digraph(&sample_latin_square(&SamplerConfig::square(40, 2)));
        let t = RMBGTemplate::complete(1, 0);
        let h = embed_t_absorber(&g, &t, &[5], &[7], &[], &[], &GadgetSupply::Search, &EmbedOptions::default())
            .unwrap();
        assert_eq!(h.absorbers.len(), 1);
        assert!(h.links.is_empty());
        assert_eq!((h.vertices().len(), h.colours().len()), expected_inventory(1, 1, 3, 3));
        let p = robust_hamilton_path(&h, &[], &[]).unwrap();
        assert!(validate_hamilton_path(&h, &[], &[], &p).ok());
    }

    #[test]
    fn two_by_two_embedding_in_random_square() {
        let g = latin_to_digraph(&sample_latin_square(&SamplerConfig::square(120, 3)));
        let t = RMBGTemplate::complete(2, 2);
        let opts = EmbedOptions {
            search_cap: 256,
            ..EmbedOptions::default()
        };
        let h = embed_t_absorber(&g, &t, &[10, 20], &[3, 4], &[20, 10], &[4, 3], &GadgetSupply::Search, &opts)
            .unwrap();
        assert_eq!(h.root_vertices, vec![20, 10]);
        assert_eq!((h.vertices().len(), h.colours().len()), expected_inventory(4, 2, 3, 3));
        for (x, y) in [(vec![], vec![]), (vec![20], vec![3]), (vec![10], vec![4])] {
            let p = robust_hamilton_path(&h, &x, &y).unwrap();
            assert!(validate_hamilton_path(&h, &x, &y, &p).ok());
        }
    }

    #[test]
    fn exhausted_supply_names_the_edge() {
        let g = latin_to_digraph(&sample_latin_square(&SamplerConfig::square(20, 4)));
        let t = RMBGTemplate::complete(1, 0);
        let supply = GadgetSupply::Supplied {
            absorbing: vec![],
            bridging: vec![],
        };
        let err = embed_t_absorber(&g, &t, &[1], &[1], &[], &[], &supply, &EmbedOptions::default())
            .unwrap_err();
        assert_eq!(
            err,
            AbsorberError::Embed {
                edge_index: 0,
                resource: "absorbing gadget"
            }
        );
    }
}
