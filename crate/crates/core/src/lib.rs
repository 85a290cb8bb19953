//! Single-pass streaming cut sparsification for dynamic graphs.
//!
//! The library maintains a bank of linear sketches over an edge stream with
//! insertions and deletions, in space polylogarithmic per vertex. At any
//! point the bank can be queried for a reweighted subgraph that preserves
//! every cut to within a (1 ± ε) factor with high probability.
//!
//! Layout:
//! - [`field`], [`coord`], [`hashing`]: arithmetic over GF(2^61-1), the
//!   vertex-pair coordinate space of the signed incidence matrix, and the
//!   seeded unit-interval hash families driving all sampling decisions.
//! - [`sparse_recovery`], [`l0_forest`], [`degree`]: the three linear
//!   sketch primitives — exact k-sparse recovery, ℓ0 sampling with the
//!   spanning-forest sketch on top, and ℓ1 (degree) estimation.
//! - [`bank`], [`levels`], [`pipeline`], [`weighted`]: the full ingest
//!   state, the per-exponent partition hierarchy, the peel-and-recover
//!   extraction, and the weighted-stream reduction.
//! - [`oracle`]: exact small-graph reference computations used by tests.
//! - [`config`], [`error`]: run configuration / derived parameters and the
//!   shared error vocabulary.
//!
//! Determinism: every probabilistic choice derives from one master seed;
//! the pair (seed, net graph) fully determines the output, independent of
//! update order.

pub mod bank;
pub mod config;
pub mod coord;
pub mod degree;
pub mod error;
pub mod field;
pub mod hashing;
pub mod l0_forest;
pub mod levels;
pub mod oracle;
pub mod pipeline;
pub mod sparse_recovery;
pub mod weighted;

pub use bank::{SketchBank, TouchStats};
pub use config::{parse_rat, rat, FailurePolicy, Params, Profile, Rat, RunConfig};
pub use coord::Coordinate;
pub use error::{
    DecodeFailure, ParamMismatch, PeelFailure, PipelineError, PipelineWarning, RoundExhaustion,
    StreamViolation,
};
pub use oracle::CutReport;
pub use levels::{build_levels, LevelStructure};
pub use oracle::ShadowGraph;
pub use pipeline::{partition, recover, sparsify, EmittedEdge, PartitionOutcome, Sparsifier};
pub use weighted::WeightedBank;
