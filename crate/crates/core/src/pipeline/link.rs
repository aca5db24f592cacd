//! Closing a path forest into a Hamilton cycle through a `T`-absorber.

use super::flexible::least_connector;
use super::forest::PathForest;
use super::PipelineError;
use crate::absorber::{robust_hamilton_path, TAbsorber};
use crate::digraph::{Arc, ColouredDigraph};
use crate::positions::PositionSet;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// A directed cycle as its vertex sequence; `colours[i]` labels the arc from
/// `vertices[i]` to the next vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HamiltonCycle {
    pub vertices: Vec<usize>,
    pub colours: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleAudit {
    pub one_in_one_out: bool,
    pub connected: bool,
    pub rainbow: bool,
    pub spanning: bool,
    /// Every arc exists in the digraph with the stated colour.
    pub arcs_present: bool,
}

impl CycleAudit {
    pub fn ok(&self) -> bool {
        self.one_in_one_out && self.connected && self.rainbow && self.spanning && self.arcs_present
    }
}

impl HamiltonCycle {
    /// Arcs must be listed in cycle order.
    pub fn from_arcs(arcs: &[Arc]) -> Self {
        HamiltonCycle {
            vertices: arcs.iter().map(|a| a.tail).collect(),
            colours: arcs.iter().map(|a| a.colour).collect(),
        }
    }

    pub fn arcs(&self) -> Vec<Arc> {
        let k = self.vertices.len();
        (0..k)
            .map(|i| Arc::new(self.vertices[i], self.vertices[(i + 1) % k], self.colours[i]))
            .collect()
    }

    /// Four checks computed independently from the arc list.
    pub fn audit(&self, g: &ColouredDigraph) -> CycleAudit {
        let n = g.n();
        let arcs = self.arcs();
        let in_range = arcs.iter().all(|a| (1..=n).contains(&a.tail) && (1..=n).contains(&a.head));
        if !in_range || self.colours.len() != self.vertices.len() {
            return CycleAudit {
                one_in_one_out: false,
                connected: false,
                rainbow: false,
                spanning: false,
                arcs_present: false,
            };
        }
        let mut outd = vec![0usize; n + 1];
        let mut ind = vec![0usize; n + 1];
        let mut succ = vec![0usize; n + 1];
        for a in &arcs {
            outd[a.tail] += 1;
            ind[a.head] += 1;
            succ[a.tail] = a.head;
        }
        let one_in_one_out = (1..=n).all(|v| outd[v] == 1 && ind[v] == 1);
        let mut seen = vec![false; n + 1];
        let mut cur = 1;
        let mut steps = 0;
        while !seen[cur] && cur != 0 {
            seen[cur] = true;
            cur = succ[cur];
            steps += 1;
        }
        let connected = steps == n && cur == 1;
        let colours: BTreeSet<usize> = self.colours.iter().copied().collect();
        let rainbow = colours.len() == arcs.len();
        let vertices: BTreeSet<usize> = self.vertices.iter().copied().collect();
        let spanning = arcs.len() == n && vertices.len() == n;
        let arcs_present = arcs.iter().all(|a| g.colour(a.tail, a.head) == Some(a.colour));
        CycleAudit {
            one_in_one_out,
            connected,
            rainbow,
            spanning,
            arcs_present,
        }
    }

    /// Cells `(v, successor of v)`: the matching transversal of the square.
    pub fn positions(&self) -> PositionSet {
        let arcs = self.arcs();
        PositionSet::new(self.vertices.len(), arcs.iter().map(|a| (a.tail, a.head)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkConfig {
    /// Connector lengths tried, in order. Length 1 is a direct arc and is only
    /// used when one end lies in the absorber.
    pub connector_lengths: Vec<usize>,
    pub budget: usize,
    /// Cap on connector lookups during the search.
    pub search_limit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkOutcome {
    pub cycle: HamiltonCycle,
    pub audit: CycleAudit,
    /// Forest components in the order the cycle visits them.
    pub order: Vec<usize>,
    /// `connectors[j]` runs from the head before gap `j` to the tail after it.
    pub connectors: Vec<Vec<Arc>>,
    pub leftover: Vec<usize>,
    pub deleted_vertices: Vec<usize>,
    pub deleted_colours: Vec<usize>,
}

struct Search<'a> {
    g: &'a ColouredDigraph,
    comps: &'a [(usize, usize)],
    leftover: &'a [usize],
    lengths: &'a [usize],
    in_h: Vec<bool>,
    flex_v: Vec<bool>,
    flex_c: Vec<bool>,
    used_v: Vec<bool>,
    used_c: Vec<bool>,
    deleted: usize,
    max_deleted: usize,
    end: usize,
    lookups: usize,
    limit: usize,
    deepest: usize,
    comp_left: Vec<bool>,
    colour_left: Vec<bool>,
    order: Vec<usize>,
    connectors: Vec<Vec<Arc>>,
}

impl Search<'_> {
    fn connector(&mut self, from: usize, to: usize, c: usize, len: usize) -> Option<Vec<Arc>> {
        self.lookups += 1;
        if len == 1 {
            let direct_ok = self.in_h[from] || self.in_h[to];
            return (direct_ok && self.g.colour(from, to) == Some(c)).then(|| vec![Arc::new(from, to, c)]);
        }
        if self.deleted + len - 1 > self.max_deleted {
            return None;
        }
        let (fv, uv, fc, uc) = (&self.flex_v, &self.used_v, &self.flex_c, &self.used_c);
        least_connector(self.g, from, to, c, len, &|w| fv[w] && !uv[w], &|d| fc[d] && !uc[d])
    }

    fn mark(&mut self, p: &[Arc], on: bool, pinned: usize) {
        for a in &p[..p.len() - 1] {
            self.used_v[a.head] = on;
        }
        for a in p {
            if a.colour != pinned {
                self.used_c[a.colour] = on;
            }
        }
        let internal = p.len() - 1;
        if on {
            self.deleted += internal;
        } else {
            self.deleted -= internal;
        }
    }

    fn dfs(&mut self, cur: usize, depth: usize) -> Result<bool, PipelineError> {
        self.deepest = self.deepest.max(depth);
        let k = self.comps.len();
        let targets: Vec<Option<usize>> = if depth == k {
            vec![None]
        } else {
            (0..k).filter(|&j| self.comp_left[j]).map(Some).collect()
        };
        for target in targets {
            let to = target.map_or(self.end, |j| self.comps[j].0);
            for ci in 0..self.leftover.len() {
                if !self.colour_left[ci] {
                    continue;
                }
                let c = self.leftover[ci];
                for li in 0..self.lengths.len() {
                    if self.lookups >= self.limit {
                        return Err(PipelineError::SearchLimit { lookups: self.lookups });
                    }
                    let Some(p) = self.connector(cur, to, c, self.lengths[li]) else { continue };
                    self.mark(&p, true, c);
                    self.colour_left[ci] = false;
                    self.connectors.push(p.clone());
                    let done = match target {
                        None => true,
                        Some(j) => {
                            self.comp_left[j] = false;
                            self.order.push(j);
                            let r = self.dfs(self.comps[j].1, depth + 1)?;
                            if !r {
                                self.order.pop();
                                self.comp_left[j] = true;
                            }
                            r
                        }
                    };
                    if done {
                        return Ok(true);
                    }
                    self.connectors.pop();
                    self.colour_left[ci] = true;
                    self.mark(&p, false, c);
                }
            }
        }
        Ok(false)
    }
}

/// Joins the terminal vertex of `t_abs`, the components of `q`, and the
/// initial vertex of `t_abs` with connectors in the leftover colours, then
/// closes the cycle with a robust Hamilton path of the absorber minus the
/// flexible vertices and colours the connectors used.
pub fn link_and_absorb(
    g: &ColouredDigraph,
    t_abs: &TAbsorber,
    q: &PathForest,
    cfg: &LinkConfig,
) -> Result<LinkOutcome, PipelineError> {
    let n = g.n();
    q.validate(g)?;
    let hv = t_abs.vertices();
    let hc = t_abs.colours();
    let mut in_h = vec![false; n + 1];
    hv.iter().for_each(|&v| in_h[v] = true);
    if (1..=n).any(|v| in_h[v] != q.excluded.contains(&v)) {
        return Err(PipelineError::Invalid(
            "forest must span exactly the vertices outside the absorber".into(),
        ));
    }
    if let Some(c) = q.colours.iter().find(|c| hc.contains(c)) {
        return Err(PipelineError::Invalid(format!("forest reuses absorber colour {c}")));
    }
    let k = q.component_count();
    if k > cfg.budget {
        return Err(PipelineError::Invalid(format!(
            "forest has {k} components, budget is {}",
            cfg.budget
        )));
    }
    let leftover: Vec<usize> = (1..=n)
        .filter(|c| !hc.contains(c) && !q.colours.contains(c))
        .collect();
    if leftover.len() != k + 1 {
        return Err(PipelineError::Leftover {
            expected: k + 1,
            found: leftover.len(),
        });
    }
    let mut flex_v = vec![false; n + 1];
    let mut flex_c = vec![false; n + 1];
    t_abs.flexible_vertices().into_iter().for_each(|v| flex_v[v] = true);
    t_abs.flexible_colours().into_iter().for_each(|c| flex_c[c] = true);
    let mut s = Search {
        g,
        comps: &q.components,
        leftover: &leftover,
        lengths: &cfg.connector_lengths,
        in_h,
        flex_v,
        flex_c,
        used_v: vec![false; n + 1],
        used_c: vec![false; n + 1],
        deleted: 0,
        max_deleted: t_abs.template.max_deletion(),
        end: t_abs.initial(),
        lookups: 0,
        limit: cfg.search_limit,
        deepest: 0,
        comp_left: vec![true; k],
        colour_left: vec![true; k + 1],
        order: Vec::new(),
        connectors: Vec::new(),
    };
    if !s.dfs(t_abs.terminal(), 0)? {
        return Err(PipelineError::Link {
            component: s.deepest,
            lookups: s.lookups,
        });
    }
    let mut x = BTreeSet::new();
    let mut y = BTreeSet::new();
    for p in &s.connectors {
        let pinned = if p.len() == 1 { p[0].colour } else { p[1].colour };
        x.extend(p[..p.len() - 1].iter().map(|a| a.head));
        y.extend(p.iter().map(|a| a.colour).filter(|&c| c != pinned));
    }
    let x: Vec<usize> = x.into_iter().collect();
    let y: Vec<usize> = y.into_iter().collect();
    let robust = robust_hamilton_path(t_abs, &x, &y)?;
    let paths = q.component_paths();
    let mut arcs = robust;
    arcs.extend(&s.connectors[0]);
    for (i, &j) in s.order.iter().enumerate() {
        arcs.extend(&paths[j]);
        arcs.extend(&s.connectors[i + 1]);
    }
    let cycle = HamiltonCycle::from_arcs(&arcs);
    let audit = cycle.audit(g);
    if !audit.ok() {
        return Err(PipelineError::Validation(format!("cycle audit failed: {audit:?}")));
    }
    let outside: BTreeSet<Arc> = arcs
        .iter()
        .filter(|a| !hv.contains(&a.tail) && !hv.contains(&a.head))
        .copied()
        .collect();
    if outside != q.arcs.iter().copied().collect::<BTreeSet<_>>() {
        return Err(PipelineError::Validation(
            "cycle restricted to the complement of the absorber differs from the forest".into(),
        ));
    }
    Ok(LinkOutcome {
        cycle,
        audit,
        order: s.order,
        connectors: s.connectors,
        leftover,
        deleted_vertices: x,
        deleted_colours: y,
    })
}
