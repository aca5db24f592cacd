//! Robustly matchable templates, `(v,c)`-absorbers, and `T`-absorbers: chains
//! of absorbers that can drop any small set of flexible root vertices and
//! colours while still admitting a rainbow Hamilton path.

mod links;
mod tabsorber;
mod template;
mod vc;

pub use links::{count_link_paths, find_link_path, LinkCount};
pub use tabsorber::{
    embed_t_absorber, expected_inventory, robust_hamilton_path, synthetic_t_absorber,
    validate_hamilton_path, EmbedOptions, GadgetSupply, HamiltonAudit, TAbsorber,
};
pub use template::{
    build_rmbg, legal_deletions, Certificate, RMBGTemplate, TemplateMode, CERTIFY_FLEX_LIMIT,
};
pub use vc::{assemble_absorber, check_bridges, find_absorber, Absorber, SLOTS};

pub(crate) use links::walk as walk_paths;

use crate::digraph::Arc;
use crate::gadgets::GadgetError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbsorberError {
    #[error("{what} is {value}, above the limit {limit}")]
    Capacity {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("template has no perfect matching after deleting A-parts {x:?} and B-parts {y:?}")]
    NotRobust { x: Vec<usize>, y: Vec<usize> },
    #[error("no certified template after {attempts} attempts")]
    NotCertified { attempts: usize },
    #[error("template: {0}")]
    Template(String),
    #[error("no completing path for slot {slot} ({tail}->{head})")]
    Assembly {
        slot: &'static str,
        tail: usize,
        head: usize,
    },
    #[error("embedding failed at edge {edge_index}: no admissible {resource}")]
    Embed {
        edge_index: usize,
        resource: &'static str,
    },
    #[error("illegal deletion: {0}")]
    Deletion(String),
    #[error("invalid absorber: {0}")]
    Invalid(String),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
}

/// Structural summary of an arc sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PathAudit {
    /// Consecutive arcs chain head to tail and no vertex repeats.
    pub is_path: bool,
    pub rainbow: bool,
    pub start: Option<usize>,
    pub end: Option<usize>,
    pub vertices: BTreeSet<usize>,
    pub colours: BTreeSet<usize>,
}

pub fn audit_path(arcs: &[Arc]) -> PathAudit {
    let mut a = PathAudit {
        is_path: true,
        rainbow: true,
        start: arcs.first().map(|x| x.tail),
        end: arcs.last().map(|x| x.head),
        ..Default::default()
    };
    if let Some(first) = arcs.first() {
        a.vertices.insert(first.tail);
    }
    for (i, arc) in arcs.iter().enumerate() {
        if i > 0 && arcs[i - 1].head != arc.tail {
            a.is_path = false;
        }
        if !a.vertices.insert(arc.head) {
            a.is_path = false;
        }
        if !a.colours.insert(arc.colour) {
            a.rainbow = false;
        }
    }
    a
}
