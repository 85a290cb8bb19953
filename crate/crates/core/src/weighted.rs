//! Weighted streams via binary decomposition: one sub-bank per weight bit.
//!
//! An edge of weight w is routed into every sub-bank whose bit is set in w;
//! each sub-bank runs the unweighted pipeline, and the weighted sparsifier
//! is the union of the sub-sparsifiers with bit-b weights scaled by 2^b and
//! summed per edge.

use std::collections::BTreeMap;

use crate::bank::{SketchBank, TouchStats};
use crate::config::{rat, RunConfig};
use crate::error::{PipelineError, StreamViolation};
use crate::field;
use crate::pipeline::{sparsify, EmittedEdge, Sparsifier};

const SUBBANK_TAG: u64 = 0x77;

/// Sketch state for integer weights in 1..=2^bits - 1.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedBank {
    n: u32,
    bits: u32,
    max_weight: u64,
    banks: Vec<SketchBank>,
    /// Present iff stream discipline checking is on.
    shadow: Option<BTreeMap<(u32, u32), u64>>,
}

impl WeightedBank {
    pub fn new(n: u32, cfg: &RunConfig, bits: u32) -> Self {
        assert!((1..=63).contains(&bits), "weight bits must lie in 1..=63");
        let banks = (0..bits)
            .map(|b| {
                let mut sub = cfg.clone();
                sub.seed = field::mix_words(&[cfg.seed, SUBBANK_TAG, b as u64]);
                sub.checked = false; // discipline is enforced here, once
                SketchBank::new(n, &sub)
            })
            .collect();
        WeightedBank {
            n,
            bits,
            max_weight: (1u64 << bits) - 1,
            banks,
            shadow: cfg.checked.then(BTreeMap::new),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn max_weight(&self) -> u64 {
        self.max_weight
    }

    pub fn bank(&self, bit: u32) -> &SketchBank {
        &self.banks[bit as usize]
    }

    pub fn insert(&mut self, u: u32, v: u32, weight: u64) -> Result<(), StreamViolation> {
        self.apply(u, v, 1, weight)
    }

    pub fn delete(&mut self, u: u32, v: u32, weight: u64) -> Result<(), StreamViolation> {
        self.apply(u, v, -1, weight)
    }

    pub fn apply(&mut self, u: u32, v: u32, sign: i8, weight: u64) -> Result<(), StreamViolation> {
        if weight == 0 || weight > self.max_weight {
            return Err(StreamViolation::WeightRange {
                u,
                v,
                weight,
                max: self.max_weight,
            });
        }
        if sign != 1 && sign != -1 {
            return Err(StreamViolation::BadSign { sign });
        }
        if u == v {
            return Err(StreamViolation::SelfLoop { vertex: u });
        }
        if u >= self.n || v >= self.n {
            return Err(StreamViolation::VertexRange {
                vertex: u.max(v),
                n: self.n,
            });
        }
        let key = (u.min(v), u.max(v));
        if let Some(shadow) = &mut self.shadow {
            if sign == 1 {
                if shadow.contains_key(&key) {
                    return Err(StreamViolation::InsertPresent { u: key.0, v: key.1 });
                }
                shadow.insert(key, weight);
            } else {
                match shadow.get(&key) {
                    None => return Err(StreamViolation::DeleteAbsent { u: key.0, v: key.1 }),
                    Some(&stored) if stored != weight => {
                        return Err(StreamViolation::WeightMismatch {
                            u: key.0,
                            v: key.1,
                            expected: stored,
                            got: weight,
                        });
                    }
                    Some(_) => {
                        shadow.remove(&key);
                    }
                }
            }
        }
        for b in 0..self.bits {
            if weight >> b & 1 == 1 {
                self.banks[b as usize].apply(u, v, sign)?;
            }
        }
        Ok(())
    }

    /// Union of the per-bit sparsifiers with weights scaled by 2^bit and
    /// summed per edge. Level and controller of a merged edge come from its
    /// lowest contributing bit (diagnostics only).
    pub fn sparsify(&self) -> Result<Sparsifier, PipelineError> {
        let a_max = self.banks[0].params().a_max;
        let mut merged: BTreeMap<(u32, u32), EmittedEdge> = BTreeMap::new();
        let mut per_level = vec![0usize; a_max as usize + 1];
        let mut duplicates = 0;
        let mut warnings = Vec::new();
        for (b, bank) in self.banks.iter().enumerate() {
            let sp = sparsify(bank)?;
            duplicates += sp.duplicates;
            warnings.extend(sp.warnings);
            let scale = rat(1u128 << b, 1);
            for edge in sp.edges {
                let scaled = &edge.weight * &scale;
                match merged.entry((edge.u, edge.v)) {
                    std::collections::btree_map::Entry::Vacant(slot) => {
                        per_level[edge.level as usize] += 1;
                        slot.insert(EmittedEdge {
                            weight: scaled,
                            ..edge
                        });
                    }
                    std::collections::btree_map::Entry::Occupied(mut slot) => {
                        let sum = slot.get().weight + scaled;
                        slot.get_mut().weight = sum;
                    }
                }
            }
        }
        Ok(Sparsifier {
            n: self.n,
            seed: self.banks[0].params().seed,
            epsilon: self.banks[0].params().epsilon.clone(),
            edges: merged.into_values().collect(),
            per_level,
            duplicates,
            warnings,
        })
    }

    pub fn stats(&self) -> TouchStats {
        let mut total = TouchStats::default();
        for bank in &self.banks {
            let s = bank.stats();
            total.updates += s.updates;
            total.touched_cells += s.touched_cells;
        }
        total
    }

    pub fn memory_words(&self) -> u64 {
        self.banks.iter().map(|b| b.memory_words()).sum()
    }

    /// Pointwise union of the sub-banks' touched-cell histograms.
    pub fn touch_histogram(&self) -> std::collections::BTreeMap<u64, u64> {
        let mut total = std::collections::BTreeMap::new();
        for bank in &self.banks {
            for (&touched, &count) in bank.touch_histogram() {
                *total.entry(touched).or_insert(0) += count;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Rat;
    use crate::oracle::ShadowGraph;

    fn cfg(seed: u64) -> RunConfig {
        RunConfig::desk(rat(1, 2), seed)
    }

    #[test]
    fn routes_by_binary_expansion() {
        let mut wb = WeightedBank::new(8, &cfg(1), 4);
        wb.insert(2, 5, 5).unwrap(); // 101 -> bits 0 and 2
        assert_eq!(wb.bank(0).stats().updates, 1);
        assert_eq!(wb.bank(1).stats().updates, 0);
        assert_eq!(wb.bank(2).stats().updates, 1);
        assert_eq!(wb.bank(3).stats().updates, 0);
    }

    #[test]
    fn rejects_out_of_range_weights() {
        let mut wb = WeightedBank::new(8, &cfg(1), 3);
        assert!(matches!(
            wb.insert(0, 1, 0),
            Err(StreamViolation::WeightRange { .. })
        ));
        assert!(matches!(
            wb.insert(0, 1, 8),
            Err(StreamViolation::WeightRange { max: 7, .. })
        ));
    }

    #[test]
    fn checked_mode_requires_matching_delete_weight() {
        let mut c = cfg(2);
        c.checked = true;
        let mut wb = WeightedBank::new(8, &c, 4);
        wb.insert(1, 2, 6).unwrap();
        assert_eq!(
            wb.delete(1, 2, 5),
            Err(StreamViolation::WeightMismatch {
                u: 1,
                v: 2,
                expected: 6,
                got: 5
            })
        );
        wb.delete(1, 2, 6).unwrap();
        assert_eq!(wb.delete(1, 2, 6), Err(StreamViolation::DeleteAbsent { u: 1, v: 2 }));
    }

    #[test]
    fn insert_delete_restores_every_sub_bank() {
        let mut wb = WeightedBank::new(8, &cfg(3), 5);
        let fresh = WeightedBank::new(8, &cfg(3), 5);
        wb.insert(0, 3, 21).unwrap();
        wb.insert(4, 6, 9).unwrap();
        assert_ne!(wb, fresh);
        wb.delete(0, 3, 21).unwrap();
        wb.delete(4, 6, 9).unwrap();
        assert_eq!(wb, fresh);
    }

    #[test]
    fn unit_weights_match_sub_bank_zero_pipeline() {
        let edges = [(0u32, 1u32), (1, 2), (2, 3), (3, 0), (0, 2)];
        let mut wb = WeightedBank::new(8, &cfg(4), 4);
        for &(u, v) in &edges {
            wb.insert(u, v, 1).unwrap();
        }
        let weighted = wb.sparsify().unwrap();
        let plain = sparsify(wb.bank(0)).unwrap();
        assert_eq!(weighted.edges, plain.edges);
    }

    #[test]
    fn exact_regime_reproduces_weighted_graph() {
        // raise gamma so every level rate caps at 1 in every sub-bank
        let mut c = cfg(5);
        c.gamma = Some(rat(8, 1));
        let mut wb = WeightedBank::new(8, &c, 4);
        let mut g = ShadowGraph::new(8);
        let edges = [(0u32, 1u32, 3u64), (1, 2, 7), (2, 3, 1), (3, 0, 12), (1, 3, 5)];
        for &(u, v, w) in &edges {
            wb.insert(u, v, w).unwrap();
            g.insert(u, v, w).unwrap();
        }
        let sp = wb.sparsify().unwrap();
        let got: Vec<(u32, u32, Rat)> = sp.weighted_edges();
        let expect: Vec<(u32, u32, Rat)> = g
            .edges()
            .iter()
            .map(|&(u, v, w)| (u, v, rat(w as u128, 1)))
            .collect();
        assert_eq!(got, expect);
        let report = g.cut_report(&sp.weighted_edges(), 9);
        assert_eq!(report.max_rel_error, rat(0, 1));
    }
}
