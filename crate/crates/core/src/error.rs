//! Typed errors and warnings shared across the crate.

use thiserror::Error;

/// Violation of sketch composition preconditions (mismatched parameters).
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("sketch parameter mismatch: {context}")]
pub struct ParamMismatch {
    pub context: &'static str,
}

/// Peeling stopped before the sketch emptied, or the decoded support
/// exceeded the sparsity budget. A value, not a panic: callers decide
/// whether this is fatal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeFailure {
    /// Nonzero cells left when peeling stopped.
    pub remaining_cells: usize,
    /// Coordinates recovered before the stall.
    pub decoded: usize,
}

/// A forest extraction ran out of merge rounds while components still had
/// outgoing edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundExhaustion {
    /// Canonical id of a component that was still merge-active.
    pub component: u32,
}

/// Invalid update relative to the declared stream discipline.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum StreamViolation {
    #[error("self-loop at vertex {vertex}")]
    SelfLoop { vertex: u32 },
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexRange { vertex: u32, n: u32 },
    #[error("deletion of absent edge ({u}, {v})")]
    DeleteAbsent { u: u32, v: u32 },
    #[error("insertion of already-present edge ({u}, {v})")]
    InsertPresent { u: u32, v: u32 },
    #[error("edge ({u}, {v}) deleted with weight {got}, inserted with {expected}")]
    WeightMismatch { u: u32, v: u32, expected: u64, got: u64 },
    #[error("weight {weight} outside 1..={max} for edge ({u}, {v})")]
    WeightRange { u: u32, v: u32, weight: u64, max: u64 },
    #[error("update sign must be +1 or -1, got {sign}")]
    BadSign { sign: i8 },
}

/// Low-degree peeling found a nonempty remainder in which every vertex
/// exceeds the degree threshold, so the claimed peel order does not exist.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("no vertex of degree <= {threshold} among {} remaining", remaining.len())]
pub struct PeelFailure {
    pub threshold: u128,
    /// Vertices still unpeeled when the process stalled.
    pub remaining: Vec<u32>,
}

/// Extraction-time failures of with-high-probability steps.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PipelineError {
    #[error(
        "recovery decode failed at level {level} (exponent {exponent}), round {round}, \
         supernode {supernode}: {decoded} decoded, {remaining} cells left"
    )]
    DecodeFailure {
        level: u32,
        exponent: u32,
        round: u32,
        supernode: u32,
        decoded: usize,
        remaining: usize,
    },
    #[error("partition stalled at level {level}, round {round}: {} supernodes unpeeled", stuck.len())]
    PartitionStall {
        level: u32,
        round: u32,
        stuck: Vec<u32>,
    },
    #[error("every connectivity copy failed at exponent {level}")]
    LevelUnavailable { level: u32 },
    #[error("exact fallback decode overflowed the sparsity budget at vertex {vertex} (level {level})")]
    ExactFallbackOverflow { vertex: u32, level: u32 },
}

/// Non-fatal degradations recorded during extraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PipelineWarning {
    /// One connectivity copy at this exponent ran out of merge rounds and
    /// was dropped from the intersection.
    DegradedCopy { level: u32, copy: u32 },
    /// No copy survived; the exponent was treated as fully refined
    /// (every vertex its own class), pushing edges to lower levels.
    LevelDegradedToSingletons { level: u32 },
    /// A peeled supernode's recovery decode failed; its subtraction was
    /// skipped.
    SubtractionSkipped { level: u32, round: u32, supernode: u32 },
    /// The partition left supernodes unpeeled; their edges were emitted
    /// exactly from rate-1 sketches.
    StallFallback { level: u32, stuck: usize },
    /// An emission decode failed; that supernode's edges were emitted
    /// exactly from rate-1 sketches.
    EmissionFallback { level: u32, supernode: u32 },
}
