//! Constructed instances: a Latin square with a planted `T`-absorber and a
//! cyclic linking region on the remaining vertices.

use super::PipelineError;
use crate::absorber::{synthetic_t_absorber, Absorber, EmbedOptions, GadgetSupply, RMBGTemplate, TAbsorber};
use crate::digraph::Arc;
use crate::sampler::{complete_partial_rows, task_rng};
use crate::square::LatinSquare;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Everything the pipeline needs to embed a known absorber instead of
/// searching for one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedResources {
    pub template: RMBGTemplate,
    /// Root vertex and colour of each template part, in part order.
    pub roots_v: Vec<usize>,
    pub roots_c: Vec<usize>,
    pub flex_v: Vec<usize>,
    pub flex_c: Vec<usize>,
    pub supply: GadgetSupply,
    pub embed: EmbedOptions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedInstance {
    pub square: LatinSquare,
    pub resources: PlantedResources,
    pub planted: TAbsorber,
    /// Vertices outside the absorber.
    pub region: Vec<usize>,
    /// Colours outside the absorber.
    pub region_colours: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub template: RMBGTemplate,
    pub path_len: usize,
    pub link_len: usize,
    /// Vertices outside the absorber; must be even.
    pub extra: usize,
    pub completion_attempts: usize,
}

impl PlantSpec {
    /// Smallest layout: complete two-part template, single-arc paths and
    /// links, a 50-vertex absorber.
    pub fn desk(extra: usize) -> Self {
        PlantSpec {
            template: RMBGTemplate::complete(2, 2),
            path_len: 1,
            link_len: 1,
            extra,
            completion_attempts: 200,
        }
    }
}

fn relabel_arc(a: &Arc, pv: &[usize], pc: &[usize]) -> Arc {
    Arc::new(pv[a.tail], pv[a.head], pc[a.colour])
}

fn relabel(h: &TAbsorber, pv: &[usize], pc: &[usize]) -> TAbsorber {
    let absorbers = h
        .absorbers
        .iter()
        .map(|a| {
            let mut g = a.gadget.clone();
            g.v = pv[g.v];
            g.c = pc[g.c];
            g.x = g.x.map(|x| pv[x]);
            g.f = g.f.map(|f| pc[f]);
            let mut b = a.bridge.clone();
            b.y = pv[b.y];
            b.z = pv[b.z];
            b.w = b.w.map(|w| pv[w]);
            b.d = b.d.map(|d| pc[d]);
            Absorber {
                gadget: g,
                bridge: b,
                paths: a.paths.clone().map(|p| p.iter().map(|x| relabel_arc(x, pv, pc)).collect()),
            }
        })
        .collect();
    TAbsorber {
        template: h.template.clone(),
        root_vertices: h.root_vertices.iter().map(|&v| pv[v]).collect(),
        root_colours: h.root_colours.iter().map(|&c| pc[c]).collect(),
        absorbers,
        links: h
            .links
            .iter()
            .map(|p| p.iter().map(|x| relabel_arc(x, pv, pc)).collect())
            .collect(),
    }
}

/// Plants a synthetic `T`-absorber `H` and, on the `r` remaining vertices plus
/// the merged terminal/initial pair of `H`, the cyclic square of odd order
/// `r + 1` in the `r + 1` colours missing from `H`; completes the rest at
/// random and relabels vertices and colours by random permutations.
pub fn planted_instance(spec: &PlantSpec, seed: u64) -> Result<PlantedInstance, PipelineError> {
    if spec.extra % 2 == 1 {
        return Err(PipelineError::Config(format!(
            "extra vertices {} must be even so the linking square has odd order",
            spec.extra
        )));
    }
    let base = synthetic_t_absorber(&spec.template, spec.path_len, spec.link_len);
    let vh = base.vertices().len();
    let vc = base.colours().len();
    let n = vh + spec.extra;
    if vc + 1 != vh || base.vertices().last() != Some(&vh) || base.colours().last() != Some(&vc) {
        return Err(PipelineError::Invalid("synthetic absorber labels are not contiguous".into()));
    }
    let mut rng = task_rng(seed, 0);
    let mut pv: Vec<usize> = (1..=n).collect();
    let mut pc: Vec<usize> = (1..=n).collect();
    pv.shuffle(&mut rng);
    pc.shuffle(&mut rng);
    pv.insert(0, 0);
    pc.insert(0, 0);
    let h = relabel(&base, &pv, &pc);
    let region: Vec<usize> = (vh + 1..=n).map(|v| pv[v]).collect();
    let region_colours: Vec<usize> = (vc + 1..=n).map(|c| pc[c]).collect();

    let mut grid = vec![vec![0usize; n]; n];
    let mut put = |t: usize, h: usize, c: usize| -> Result<(), PipelineError> {
        let cell = &mut grid[t - 1][h - 1];
        if *cell != 0 && *cell != c {
            return Err(PipelineError::Invalid(format!("planted cell ({t},{h}) clashes")));
        }
        *cell = c;
        Ok(())
    };
    for a in h.arcs() {
        put(a.tail, a.head, a.colour)?;
    }
    let r = spec.extra;
    let (head_end, tail_end) = (h.terminal(), h.initial());
    for i in 0..=r {
        for j in 0..=r {
            let t = if i == 0 { head_end } else { region[i - 1] };
            let hd = if j == 0 { tail_end } else { region[j - 1] };
            put(t, hd, region_colours[(i + j) % (r + 1)])?;
        }
    }
    // Fill the most constrained rows first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(grid[i].iter().filter(|&&s| s != 0).count()));
    let partial: Vec<Vec<usize>> = order.iter().map(|&i| grid[i].clone()).collect();
    let filled = complete_partial_rows(n, &partial, |_, _, _| false, spec.completion_attempts, &mut rng)
        .ok_or(PipelineError::Completion {
            attempts: spec.completion_attempts,
        })?;
    let mut rows = vec![Vec::new(); n];
    for (k, &i) in order.iter().enumerate() {
        rows[i] = filled[k].clone();
    }
    let square = LatinSquare::from_rows(rows).map_err(|e| PipelineError::Invalid(e.to_string()))?;

    let resources = PlantedResources {
        template: spec.template.clone(),
        roots_v: h.root_vertices.clone(),
        roots_c: h.root_colours.clone(),
        flex_v: h.flexible_vertices(),
        flex_c: h.flexible_colours(),
        supply: GadgetSupply::Supplied {
            absorbing: h.absorbers.iter().map(|a| a.gadget.clone()).collect(),
            bridging: h.absorbers.iter().map(|a| a.bridge.clone()).collect(),
        },
        embed: EmbedOptions {
            path_len: spec.path_len,
            link_len: spec.link_len,
            ..EmbedOptions::default()
        },
    };
    Ok(PlantedInstance {
        square,
        resources,
        planted: h,
        region,
        region_colours,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absorber::expected_inventory;
    use crate::digraph::latin_to_digraph;

    #[test]
    fn desk_instance_contains_the_absorber_and_region() {
        let inst = planted_instance(&PlantSpec::desk(6), 3).unwrap();
        assert_eq!(inst.square.n(), 56);
        let g = latin_to_digraph(&inst.square);
        inst.planted.validate_in(&g).unwrap();
        assert_eq!(
            (inst.planted.vertices().len(), inst.planted.colours().len()),
            expected_inventory(4, 2, 1, 1)
        );
        for &u in &inst.region {
            for &w in &inst.region {
                assert!(inst.region_colours.contains(&g.colour(u, w).unwrap()));
            }
        }
    }

    #[test]
    fn odd_region_rejected() {
        assert!(matches!(
            planted_instance(&PlantSpec::desk(5), 0),
            Err(PipelineError::Config(_))
        ));
    }
}
