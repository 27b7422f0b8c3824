//! Uniform sampling of H-colourings of the path with block heat-bath Markov
//! chains, and exact machinery for checking how fast they mix.
//!
//! - [`hgraph`]: the colour graph `H`.
//! - [`segment`]: exact transfer-matrix counts, samples and marginals.
//! - [`chains`]: the any-order scan, fixed-order scan and random-update chains.
//! - [`coupling`]: maximal couplings and exact disagreement profiles.
//! - [`analysis`]: exact distribution evolution, mixing times and bounds.
//! - [`suites`]: named verification suites shared by the CLI and tests.

pub mod analysis;
pub mod chains;
pub mod coupling;
pub mod error;
pub mod hgraph;
pub mod rng;
pub mod segment;
pub mod suites;

pub use chains::{
    blocks_anyorder, blocks_fixedorder, blocks_rnd, ergodicity_witness, hamming_path, heat_bath_update, make_params,
    run_scan, step_rnd, Block, BlockSchedule, ChainKind, ChainParams, Overrides, PathState, ScanOrder,
};
pub use error::{Error, Result};
pub use hgraph::{Bipartition, Colour, ColourGraph};
pub use segment::{
    enumerate_state_space, exact_uniform_sample, sample_segment, segment_counts, site_marginal, Boundary, BoundarySpec,
    FiniteDistribution, Precision, SegmentCounts, SegmentLaw, StateClass,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
