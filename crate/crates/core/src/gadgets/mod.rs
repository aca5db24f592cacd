//! Local coloured structures used to reroute transversals, and the switchings
//! that create or destroy them.

mod absorbing;
mod bridging;
mod quasirandom;
mod rotate;
mod twist;

pub use absorbing::{find_absorbing_gadgets, find_absorbing_gadgets_avoiding, AbsorbingGadget};
pub use bridging::{
    count_distinguishable_bridges, enumerate_bridges, find_bridging_gadgets,
    find_bridging_gadgets_avoiding, Bridge, BridgeCensus,
    BridgingGadget, ColourPartition,
};
pub use quasirandom::{
    arc_count_between, lower_deviation, lower_quasirandom_check, upper_quasirandom_check,
    CheckMode, LowerQuasirandomReport, UpperQuasirandomReport,
};
pub use rotate::rotate;
pub use twist::{
    find_twist_systems, plant_twist_system, twist, twist_side_conditions, untwist, TwistSystem,
    UntwistKey,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("vertex {0} is outside 1..={1}")]
    VertexRange(usize, usize),
    #[error("colour {0} is outside 1..={1}")]
    ColourRange(usize, usize),
    #[error("root vertices must be distinct (got {0} twice)")]
    SameRoots(usize),
    #[error("colour partition is not an equitable partition of the colour set: {0}")]
    BadPartition(String),
    #[error("collection mixes roots {0:?} and {1:?}")]
    MixedRoots(Vec<usize>, Vec<usize>),
    #[error("invalid structure: {0}")]
    Invalid(String),
    #[error("rotation precondition failed: {0}")]
    Rotate(String),
    #[error("twist system condition {condition} fails: {detail}")]
    Twist {
        condition: &'static str,
        detail: String,
    },
    #[error(transparent)]
    Digraph(#[from] crate::digraph::DigraphError),
}

/// Vertices and colours a gadget occupies, split into roots and the rest.
pub trait Footprint {
    fn root_vertices(&self) -> Vec<usize>;
    fn root_colours(&self) -> Vec<usize>;
    fn vertices(&self) -> Vec<usize>;
    fn colours(&self) -> Vec<usize>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadKind {
    Vertex,
    Colour,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WellSpread {
    pub well_spread: bool,
    /// A maximally loaded non-root vertex or colour, when the collection is
    /// not well spread.
    pub offender: Option<(LoadKind, usize, usize)>,
}

/// No non-root vertex and no non-root colour lies in more than `n` members.
pub fn is_well_spread<G: Footprint>(collection: &[G], n: usize) -> Result<WellSpread, GadgetError> {
    let Some(first) = collection.first() else {
        return Ok(WellSpread {
            well_spread: true,
            offender: None,
        });
    };
    let roots = (first.root_vertices(), first.root_colours());
    let top = collection
        .iter()
        .flat_map(|g| g.vertices().into_iter().chain(g.colours()))
        .max()
        .unwrap_or(0);
    let mut vload = vec![0usize; top.max(n) + 1];
    let mut cload = vec![0usize; top.max(n) + 1];
    for g in collection {
        let r = (g.root_vertices(), g.root_colours());
        if r != roots {
            let mut a = roots.0.clone();
            a.extend(&roots.1);
            let mut b = r.0.clone();
            b.extend(&r.1);
            return Err(GadgetError::MixedRoots(a, b));
        }
        let mut vs = g.vertices();
        vs.sort_unstable();
        vs.dedup();
        for v in vs {
            if !roots.0.contains(&v) {
                vload[v] += 1;
            }
        }
        let mut cs = g.colours();
        cs.sort_unstable();
        cs.dedup();
        for c in cs {
            if !roots.1.contains(&c) {
                cload[c] += 1;
            }
        }
    }
    let (vi, &vmax) = vload
        .iter()
        .enumerate()
        .max_by_key(|&(i, &l)| (l, std::cmp::Reverse(i)))
        .unwrap();
    let (ci, &cmax) = cload
        .iter()
        .enumerate()
        .max_by_key(|&(i, &l)| (l, std::cmp::Reverse(i)))
        .unwrap();
    if vmax <= n && cmax <= n {
        return Ok(WellSpread {
            well_spread: true,
            offender: None,
        });
    }
    let offender = if vmax >= cmax {
        (LoadKind::Vertex, vi, vmax)
    } else {
        (LoadKind::Colour, ci, cmax)
    };
    Ok(WellSpread {
        well_spread: false,
        offender: Some(offender),
    })
}

pub(crate) fn all_distinct(vs: &[usize]) -> bool {
    let mut s = vs.to_vec();
    s.sort_unstable();
    s.windows(2).all(|w| w[0] != w[1])
}

pub(crate) fn check_vertex(v: usize, n: usize) -> Result<(), GadgetError> {
    if v == 0 || v > n {
        Err(GadgetError::VertexRange(v, n))
    } else {
        Ok(())
    }
}
