//! Latin squares as coloured digraphs: sampling, exhaustive censuses of
//! transversal structure, the local gadgets used to reroute transversals,
//! absorber construction, and a full pipeline that extracts a Hamilton
//! transversal.

pub mod absorber;
pub mod census;
pub mod digraph;
pub mod gadgets;
pub mod matching;
pub mod pipeline;
pub mod positions;
pub mod sampler;
pub mod square;
pub mod stats;

pub use digraph::{
    digraph_to_latin, latin_to_digraph, restrict_to_colours, Arc, ColouredDigraph, DigraphError,
};
pub use positions::{
    classify_position_set, PositionError, PositionSet, TransversalClass, TransversalKind,
};
pub use sampler::{
    cyclic_square, sample_latin_rectangle, sample_latin_square, task_rng, SamplerConfig,
};
pub use square::{LatinError, LatinSquare};
