//! Vertex partitions per sampling exponent and the edge/vertex levels they
//! induce.
//!
//! For each exponent a, the partition intersects the component structures
//! of every surviving connectivity-forest copy at that exponent, then
//! intersects with the previous exponent's partition so the chain is
//! laminar: deeper partitions only refine shallower ones. An edge's level
//! is the deepest exponent at which its endpoints still share a class —
//! a seed-dependent proxy for how strongly connected the edge is.

use std::collections::{BTreeMap, HashMap};

use crate::bank::SketchBank;
use crate::config::FailurePolicy;
use crate::error::{PipelineError, PipelineWarning};

/// The partition chain for exponents 0..=a_max, plus a synthetic
/// all-singletons partition at a_max+1 used by the supernode construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelStructure {
    n: u32,
    a_max: u32,
    /// classes[a][v] = canonical class id (smallest member) of v.
    classes: Vec<Vec<u32>>,
    warnings: Vec<PipelineWarning>,
}

/// Intersection of two partitions, canonicalized to smallest member.
fn intersect(p: &[u32], q: &[u32]) -> Vec<u32> {
    let mut first: HashMap<(u32, u32), u32> = HashMap::new();
    let mut out = Vec::with_capacity(p.len());
    for v in 0..p.len() {
        let key = (p[v], q[v]);
        let id = *first.entry(key).or_insert(v as u32);
        out.push(id);
    }
    out
}

/// Builds the partition chain from the bank's connectivity forests.
pub fn build_levels(bank: &SketchBank) -> Result<LevelStructure, PipelineError> {
    let params = bank.params();
    let n = params.n;
    let vertices: Vec<u32> = (0..n).collect();
    let mut warnings = Vec::new();
    let mut classes: Vec<Vec<u32>> = Vec::with_capacity(params.a_max as usize + 2);

    for a in 0..=params.a_max {
        let mut running: Vec<u32> = match a {
            0 => vec![0; n as usize],
            _ => classes[a as usize - 1].clone(),
        };
        let mut survivors = 0u32;
        for b in 0..params.copies_connectivity {
            match bank.forest(a, b).spanning_forest(&vertices) {
                Ok(result) => {
                    survivors += 1;
                    running = intersect(&running, &result.components);
                }
                Err(_) => warnings.push(PipelineWarning::DegradedCopy { level: a, copy: b }),
            }
        }
        if survivors == 0 {
            match params.failure_policy {
                FailurePolicy::Strict => {
                    return Err(PipelineError::LevelUnavailable { level: a });
                }
                FailurePolicy::BestEffort => {
                    warnings.push(PipelineWarning::LevelDegradedToSingletons { level: a });
                    running = vertices.clone();
                }
            }
        }
        classes.push(running);
    }
    classes.push(vertices); // a_max + 1: every vertex its own supernode

    Ok(LevelStructure {
        n,
        a_max: params.a_max,
        classes,
        warnings,
    })
}

impl LevelStructure {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn a_max(&self) -> u32 {
        self.a_max
    }

    pub fn warnings(&self) -> &[PipelineWarning] {
        &self.warnings
    }

    /// Canonical class id of `v` at exponent `a` (valid up to a_max+1).
    pub fn class(&self, a: u32, v: u32) -> u32 {
        self.classes[a as usize][v as usize]
    }

    /// Classes at exponent `a`, ordered by canonical id, members ascending.
    pub fn partition(&self, a: u32) -> Vec<Vec<u32>> {
        let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for v in 0..self.n {
            groups.entry(self.class(a, v)).or_default().push(v);
        }
        groups.into_values().collect()
    }

    /// Deepest exponent at which u and v share a class; None marks a pair
    /// in different components of the full graph (never a real edge).
    pub fn edge_level(&self, u: u32, v: u32) -> Option<u32> {
        if u == v || self.class(0, u) != self.class(0, v) {
            return None;
        }
        let mut level = 0;
        for a in 1..=self.a_max {
            if self.class(a, u) == self.class(a, v) {
                level = a;
            } else {
                break; // laminar chain: once split, split forever
            }
        }
        Some(level)
    }

    /// Deepest exponent at which v is not a singleton; 0 when isolated.
    pub fn vertex_level(&self, v: u32) -> u32 {
        for a in (0..=self.a_max).rev() {
            let class = self.class(a, v);
            let shared = (0..self.n).any(|u| u != v && self.class(a, u) == class);
            if shared {
                return a;
            }
        }
        0
    }
}
