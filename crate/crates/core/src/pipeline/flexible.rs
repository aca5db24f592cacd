//! Random flexible vertex and colour sets, certified by connector probes.

use super::PipelineError;
use crate::absorber::find_link_path;
use crate::digraph::{Arc, ColouredDigraph};
use crate::sampler::task_rng;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexConfig {
    /// Inclusion probability of each vertex and each colour.
    pub probability: f64,
    /// Exact size both sets are trimmed to.
    pub size: usize,
    /// Sampled sizes must lie within `n^tolerance_exponent` of `p n`.
    pub tolerance_exponent: f64,
    pub retries: usize,
    /// Random `(u, v, c)` triples whose connectors are counted.
    pub probes: usize,
    pub connector_len: usize,
    /// Every probe needs at least `threshold_scale * n^threshold_exponent`
    /// connectors.
    pub threshold_scale: f64,
    pub threshold_exponent: f64,
}

impl Default for FlexConfig {
    fn default() -> Self {
        FlexConfig {
            probability: 0.5,
            size: 2,
            tolerance_exponent: 0.8,
            retries: 20,
            probes: 16,
            connector_len: 4,
            threshold_scale: 0.05,
            threshold_exponent: 1.0,
        }
    }
}

impl FlexConfig {
    pub fn threshold(&self, n: usize) -> f64 {
        self.threshold_scale * (n as f64).powf(self.threshold_exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    pub u: usize,
    pub v: usize,
    pub c: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexibleSets {
    pub vertices: Vec<usize>,
    pub colours: Vec<usize>,
    /// Sizes before trimming.
    pub sampled_sizes: (usize, usize),
    pub probes: Vec<Probe>,
    pub threshold: f64,
    pub attempts: usize,
}

/// Rainbow `u -> v` paths with `len` arcs whose second arc (the only arc when
/// `len == 1`) has colour `c`, internal vertices pass `vertex_ok`, and other
/// colours pass `colour_ok`.
pub fn count_connectors(
    g: &ColouredDigraph,
    u: usize,
    v: usize,
    c: usize,
    len: usize,
    vertex_ok: &dyn Fn(usize) -> bool,
    colour_ok: &dyn Fn(usize) -> bool,
) -> usize {
    let mut count = 0usize;
    if u != v && len > 0 {
        crate::absorber::walk_paths(g, u, v, len, Some(c), vertex_ok, colour_ok, &mut |_: &[Arc]| {
            count += 1;
            true
        });
    }
    count
}

pub fn choose_flexible_sets(
    g: &ColouredDigraph,
    cfg: &FlexConfig,
    seed: u64,
) -> Result<FlexibleSets, PipelineError> {
    let n = g.n();
    if !(0.0..=1.0).contains(&cfg.probability) || cfg.size > n || cfg.connector_len == 0 {
        return Err(PipelineError::Config(format!(
            "flexible sets: probability {} and size {} must fit order {n}",
            cfg.probability, cfg.size
        )));
    }
    for c in g.colours() {
        let loops = g.loops_of_colour(*c);
        if 2 * loops > n {
            return Err(PipelineError::LoopCondition { colour: *c, loops });
        }
    }
    let mut rng = task_rng(seed, 0);
    let target = cfg.probability * n as f64;
    let tol = (n as f64).powf(cfg.tolerance_exponent);
    let threshold = cfg.threshold(n);
    let mut worst: Option<Probe> = None;
    for attempt in 1..=cfg.retries.max(1) {
        let mut vs: Vec<usize> = (1..=n).filter(|_| rng.gen_bool(cfg.probability)).collect();
        let mut cs: Vec<usize> = (1..=n).filter(|_| rng.gen_bool(cfg.probability)).collect();
        let sampled_sizes = (vs.len(), cs.len());
        let within = |k: usize| (k as f64 - target).abs() <= tol && k >= cfg.size;
        if !within(vs.len()) || !within(cs.len()) {
            continue;
        }
        vs.shuffle(&mut rng);
        cs.shuffle(&mut rng);
        vs.truncate(cfg.size);
        cs.truncate(cfg.size);
        vs.sort_unstable();
        cs.sort_unstable();
        let mut in_v = vec![false; n + 1];
        let mut in_c = vec![false; n + 1];
        vs.iter().for_each(|&x| in_v[x] = true);
        cs.iter().for_each(|&x| in_c[x] = true);
        let mut probes = Vec::with_capacity(cfg.probes);
        for _ in 0..cfg.probes {
            let u = rng.gen_range(1..=n);
            let v = loop {
                let v = rng.gen_range(1..=n);
                if v != u {
                    break v;
                }
            };
            let c = rng.gen_range(1..=n);
            let count = count_connectors(g, u, v, c, cfg.connector_len, &|w| in_v[w], &|d| in_c[d]);
            probes.push(Probe { u, v, c, count });
        }
        let low = probes.iter().min_by_key(|p| p.count).copied();
        if probes.iter().all(|p| p.count as f64 >= threshold) {
            return Ok(FlexibleSets {
                vertices: vs,
                colours: cs,
                sampled_sizes,
                probes,
                threshold,
                attempts: attempt,
            });
        }
        if let Some(p) = low {
            if worst.is_none_or(|w| p.count < w.count) {
                worst = Some(p);
            }
        }
    }
    Err(PipelineError::Flexible {
        attempts: cfg.retries.max(1),
        threshold,
        worst_probe: worst,
    })
}

/// Least connector as used by the linking stage.
pub(crate) fn least_connector(
    g: &ColouredDigraph,
    u: usize,
    v: usize,
    c: usize,
    len: usize,
    vertex_ok: &dyn Fn(usize) -> bool,
    colour_ok: &dyn Fn(usize) -> bool,
) -> Option<Vec<Arc>> {
    find_link_path(g, u, v, len, Some(c), vertex_ok, colour_ok)
}
