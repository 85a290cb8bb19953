//! The sketch bank: every linear summary maintained during the single
//! streaming pass, updated edge by edge.
//!
//! Contents per master seed and parameter set:
//! - connectivity forests, one per (exponent a, copy b), holding the edges
//!   whose copy-b pair-minimum hash clears 2^-a;
//! - recovery and degree sketches per (exponent e, round r, vertex), holding
//!   the rows of the round-r subsample at rate 2^-e;
//! - emission sketches per (exponent e, vertex), a single extra family whose
//!   rate-2^-e subsamples the sparsifier is decoded from.
//!
//! All parts are linear, so insertion followed by deletion of an edge
//! restores the exact bank state, and two banks over the same seed merge
//! cell by cell.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::config::{Params, Rat, RunConfig};
use crate::coord::Coordinate;
use crate::degree::{DegreeParams, DegreeSketch};
use crate::error::{ParamMismatch, StreamViolation};
use crate::field;
use crate::hashing::{Family, HashSource, UnitValue};
use crate::l0_forest::ForestSketch;
use crate::sparse_recovery::{RecoveryParams, RecoverySketch};
use num::One;

const FOREST_TAG: u64 = 0xf0;
const RECOVERY_TAG: u64 = 0x51;
const EMISSION_TAG: u64 = 0x52;
const DEGREE_TAG: u64 = 0xd1;

/// Running ingest counters.
#[derive(Clone, Copy, Default, Debug, PartialEq, Eq)]
pub struct TouchStats {
    /// Stream updates applied.
    pub updates: u64,
    /// Sketch cells/accumulators written across all updates.
    pub touched_cells: u64,
}

impl TouchStats {
    pub fn touched_per_update(&self) -> f64 {
        if self.updates == 0 {
            0.0
        } else {
            self.touched_cells as f64 / self.updates as f64
        }
    }
}

/// All sketches for one graph stream.
#[derive(Clone, Debug)]
pub struct SketchBank {
    params: Params,
    coord_space: u64,
    conn_sources: Vec<HashSource>,
    rec_sources: Vec<HashSource>,
    emit_source: HashSource,
    /// Output-filter threshold per level: min(rho(a), 1).
    emit_thresholds: Vec<Rat>,
    /// forests[a][b]: copy b of the exponent-a connectivity forest.
    forests: Vec<Vec<ForestSketch>>,
    /// (exponent, round, vertex) -> recovery sketch of that row.
    recovery: HashMap<(u32, u32, u32), RecoverySketch>,
    /// (exponent, round, vertex) -> degree sketch of that row.
    degrees: HashMap<(u32, u32, u32), DegreeSketch>,
    /// (exponent, vertex) -> emission recovery sketch of that row.
    emission: HashMap<(u32, u32), RecoverySketch>,
    /// Present iff stream discipline checking is on.
    shadow: Option<BTreeSet<(u32, u32)>>,
    stats: TouchStats,
    /// touched-cell count per update -> number of updates; bookkeeping.
    touch_histogram: BTreeMap<u64, u64>,
}

impl PartialEq for SketchBank {
    /// State equality: identical parameters and identical sketch contents.
    /// Ingest counters are bookkeeping, not state, and are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
            && self.forests == other.forests
            && self.recovery == other.recovery
            && self.degrees == other.degrees
            && self.emission == other.emission
            && self.shadow == other.shadow
    }
}

impl SketchBank {
    pub fn new(n: u32, cfg: &RunConfig) -> Self {
        Self::from_params(Params::derive(n, cfg))
    }

    pub fn from_params(params: Params) -> Self {
        let coord_space = Coordinate::space(params.n);
        let conn_sources = (0..params.copies_connectivity)
            .map(|b| HashSource::new(params.seed, Family::Connectivity(b), params.independence))
            .collect();
        let rec_sources = (0..params.copies_recovery)
            .map(|r| HashSource::new(params.seed, Family::Recovery(r), params.independence))
            .collect();
        let emit_source = HashSource::new(params.seed, Family::Emission, params.independence);
        let emit_thresholds = (0..=params.a_max)
            .map(|a| {
                let rho = params.rho(a);
                if rho > Rat::one() {
                    Rat::one()
                } else {
                    rho
                }
            })
            .collect();
        let forests = (0..=params.a_max)
            .map(|a| {
                (0..params.copies_connectivity)
                    .map(|b| {
                        ForestSketch::new(
                            params.n,
                            field::mix_words(&[params.seed, FOREST_TAG, a as u64, b as u64]),
                        )
                    })
                    .collect()
            })
            .collect();
        let shadow = params.checked.then(BTreeSet::new);
        SketchBank {
            coord_space,
            conn_sources,
            rec_sources,
            emit_source,
            emit_thresholds,
            forests,
            recovery: HashMap::new(),
            degrees: HashMap::new(),
            emission: HashMap::new(),
            shadow,
            stats: TouchStats::default(),
            touch_histogram: BTreeMap::new(),
            params,
        }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn n(&self) -> u32 {
        self.params.n
    }

    pub fn stats(&self) -> TouchStats {
        self.stats
    }

    /// Touched-cell count per update mapped to how many updates hit it.
    pub fn touch_histogram(&self) -> &BTreeMap<u64, u64> {
        &self.touch_histogram
    }

    fn recovery_params(&self, exponent: u32, round: u32) -> RecoveryParams {
        RecoveryParams::standard(
            self.params.k,
            self.params.recovery_rows,
            self.coord_space,
            field::mix_words(&[self.params.seed, RECOVERY_TAG, exponent as u64, round as u64]),
        )
    }

    fn emission_params(&self, exponent: u32) -> RecoveryParams {
        RecoveryParams::standard(
            self.params.k,
            self.params.recovery_rows,
            self.coord_space,
            field::mix_words(&[self.params.seed, EMISSION_TAG, exponent as u64]),
        )
    }

    fn degree_params(&self, exponent: u32, round: u32) -> DegreeParams {
        DegreeParams {
            projections: self.params.projections,
            coord_space: self.coord_space,
            seed: field::mix_words(&[self.params.seed, DEGREE_TAG, exponent as u64, round as u64]),
        }
    }

    pub fn insert(&mut self, u: u32, v: u32) -> Result<(), StreamViolation> {
        self.apply(u, v, 1)
    }

    pub fn delete(&mut self, u: u32, v: u32) -> Result<(), StreamViolation> {
        self.apply(u, v, -1)
    }

    /// Applies one signed edge update to every sketch.
    pub fn apply(&mut self, u: u32, v: u32, sign: i8) -> Result<(), StreamViolation> {
        if sign != 1 && sign != -1 {
            return Err(StreamViolation::BadSign { sign });
        }
        if u == v {
            return Err(StreamViolation::SelfLoop { vertex: u });
        }
        let n = self.params.n;
        if u >= n || v >= n {
            return Err(StreamViolation::VertexRange { vertex: u.max(v), n });
        }
        let key = (u.min(v), u.max(v));
        if let Some(shadow) = &mut self.shadow {
            if sign == 1 {
                if !shadow.insert(key) {
                    return Err(StreamViolation::InsertPresent { u: key.0, v: key.1 });
                }
            } else if !shadow.remove(&key) {
                return Err(StreamViolation::DeleteAbsent { u: key.0, v: key.1 });
            }
        }
        self.apply_unchecked(Coordinate::new(u, v), sign as i64);
        Ok(())
    }

    fn apply_unchecked(&mut self, c: Coordinate, sign: i64) {
        let (lo, hi) = (c.lo(), c.hi());
        let index = c.index();
        let mut touched = 0usize;

        for (b, source) in self.conn_sources.iter().enumerate() {
            let top = source.max_sample_exponent(lo, hi).min(self.params.a_max);
            for a in 0..=top {
                touched += self.forests[a as usize][b].update_edge(c, sign);
            }
        }

        for r in 0..self.params.copies_recovery {
            let top = self.rec_sources[r as usize]
                .max_sample_exponent(lo, hi)
                .min(self.params.exp_max);
            for e in 0..=top {
                for vertex in [lo, hi] {
                    let delta = sign * c.row_sign(vertex);
                    let params = self.recovery_params(e, r);
                    let sketch = self
                        .recovery
                        .entry((e, r, vertex))
                        .or_insert_with(|| RecoverySketch::new(params));
                    touched += sketch.update(index, delta);
                    if sketch.is_zero() {
                        self.recovery.remove(&(e, r, vertex));
                    }
                    let dparams = self.degree_params(e, r);
                    let dsketch = self
                        .degrees
                        .entry((e, r, vertex))
                        .or_insert_with(|| DegreeSketch::new(dparams));
                    touched += dsketch.update(index, delta);
                    if dsketch.is_zero() {
                        self.degrees.remove(&(e, r, vertex));
                    }
                }
            }
        }

        let emit_top = self
            .emit_source
            .max_sample_exponent(lo, hi)
            .min(self.params.exp_max);
        for e in 0..=emit_top {
            for vertex in [lo, hi] {
                let delta = sign * c.row_sign(vertex);
                let params = self.emission_params(e);
                let sketch = self
                    .emission
                    .entry((e, vertex))
                    .or_insert_with(|| RecoverySketch::new(params));
                touched += sketch.update(index, delta);
                if sketch.is_zero() {
                    self.emission.remove(&(e, vertex));
                }
            }
        }

        self.stats.updates += 1;
        self.stats.touched_cells += touched as u64;
        *self.touch_histogram.entry(touched as u64).or_insert(0) += 1;
    }

    /// Adds another bank over the same parameters (stream concatenation).
    pub fn merge(&mut self, other: &SketchBank) -> Result<(), ParamMismatch> {
        if self.params != other.params {
            return Err(ParamMismatch {
                context: "banks share parameters and seed",
            });
        }
        for (a, row) in other.forests.iter().enumerate() {
            for (b, forest) in row.iter().enumerate() {
                self.forests[a][b].merge(forest)?;
            }
        }
        for (&key, sketch) in &other.recovery {
            match self.recovery.get_mut(&key) {
                None => {
                    self.recovery.insert(key, sketch.clone());
                }
                Some(mine) => {
                    mine.merge(sketch)?;
                    if mine.is_zero() {
                        self.recovery.remove(&key);
                    }
                }
            }
        }
        for (&key, sketch) in &other.degrees {
            match self.degrees.get_mut(&key) {
                None => {
                    self.degrees.insert(key, sketch.clone());
                }
                Some(mine) => {
                    mine.merge(sketch)?;
                    if mine.is_zero() {
                        self.degrees.remove(&key);
                    }
                }
            }
        }
        for (&key, sketch) in &other.emission {
            match self.emission.get_mut(&key) {
                None => {
                    self.emission.insert(key, sketch.clone());
                }
                Some(mine) => {
                    mine.merge(sketch)?;
                    if mine.is_zero() {
                        self.emission.remove(&key);
                    }
                }
            }
        }
        if let (Some(mine), Some(theirs)) = (&mut self.shadow, &other.shadow) {
            mine.extend(theirs.iter().copied());
        }
        self.stats.updates += other.stats.updates;
        self.stats.touched_cells += other.stats.touched_cells;
        for (&touched, &count) in &other.touch_histogram {
            *self.touch_histogram.entry(touched).or_insert(0) += count;
        }
        Ok(())
    }

    pub fn forest(&self, exponent: u32, copy: u32) -> &ForestSketch {
        &self.forests[exponent as usize][copy as usize]
    }

    /// Sum of the (exponent, round) recovery sketches over `members`;
    /// internal edges cancel, leaving the boundary rows.
    pub fn recovery_sum(&self, exponent: u32, round: u32, members: &[u32]) -> RecoverySketch {
        let mut acc = RecoverySketch::new(self.recovery_params(exponent, round));
        for &v in members {
            if let Some(s) = self.recovery.get(&(exponent, round, v)) {
                acc.merge(s).expect("round sketches share params");
            }
        }
        acc
    }

    pub fn degree_sum(&self, exponent: u32, round: u32, members: &[u32]) -> DegreeSketch {
        let mut acc = DegreeSketch::new(self.degree_params(exponent, round));
        for &v in members {
            if let Some(s) = self.degrees.get(&(exponent, round, v)) {
                acc.merge(s).expect("round sketches share params");
            }
        }
        acc
    }

    pub fn emission_sum(&self, exponent: u32, members: &[u32]) -> RecoverySketch {
        let mut acc = RecoverySketch::new(self.emission_params(exponent));
        for &v in members {
            if let Some(s) = self.emission.get(&(exponent, v)) {
                acc.merge(s).expect("exponent sketches share params");
            }
        }
        acc
    }

    /// Whether edge (u, v) belongs to the emission subsample at this
    /// exponent (pair-minimum rule, so both endpoints agree).
    pub fn emission_member(&self, u: u32, v: u32, exponent: u32) -> bool {
        self.emit_source.max_sample_exponent(u, v) >= exponent
    }

    /// Ordered emission hash of (inside, outside); the emit decision for an
    /// edge at a level compares this against the level threshold.
    pub fn emission_value(&self, inside: u32, outside: u32) -> UnitValue {
        self.emit_source.value(inside, outside)
    }

    pub fn emission_threshold(&self, level: u32) -> &Rat {
        &self.emit_thresholds[level as usize]
    }

    /// True when the ordered emission hash of (inside, outside) clears the
    /// level threshold, i.e. the inside endpoint emits this edge.
    pub fn emits(&self, inside: u32, outside: u32, level: u32) -> bool {
        self.emission_value(inside, outside)
            .below_rat(self.emission_threshold(level))
    }

    /// Words of live sketch state (8-byte units), excluding map overhead.
    pub fn memory_words(&self) -> u64 {
        let forests: u64 = self
            .forests
            .iter()
            .flatten()
            .map(|f| f.memory_words())
            .sum();
        let recovery: u64 = self.recovery.values().map(|s| s.memory_words()).sum();
        let degrees: u64 = self.degrees.values().map(|s| s.memory_words()).sum();
        let emission: u64 = self.emission.values().map(|s| s.memory_words()).sum();
        forests + recovery + degrees + emission
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::rat;

    fn desk_bank(n: u32, seed: u64) -> SketchBank {
        SketchBank::new(n, &RunConfig::desk(rat(1, 2), seed))
    }

    #[test]
    fn insert_then_delete_restores_fresh_bank() {
        let mut bank = desk_bank(16, 5);
        let fresh = desk_bank(16, 5);
        bank.insert(2, 9).unwrap();
        bank.insert(0, 15).unwrap();
        assert_ne!(bank, fresh);
        bank.delete(9, 2).unwrap();
        bank.delete(15, 0).unwrap();
        assert_eq!(bank, fresh);
    }

    #[test]
    fn checked_mode_enforces_stream_discipline() {
        let mut cfg = RunConfig::desk(rat(1, 2), 5);
        cfg.checked = true;
        let mut bank = SketchBank::new(16, &cfg);
        bank.insert(2, 9).unwrap();
        assert_eq!(
            bank.insert(9, 2),
            Err(StreamViolation::InsertPresent { u: 2, v: 9 })
        );
        assert_eq!(
            bank.delete(3, 4),
            Err(StreamViolation::DeleteAbsent { u: 3, v: 4 })
        );
        bank.delete(9, 2).unwrap();
        assert_eq!(bank.stats().updates, 2);
    }

    #[test]
    fn rejects_malformed_updates() {
        let mut bank = desk_bank(8, 1);
        assert_eq!(bank.insert(3, 3), Err(StreamViolation::SelfLoop { vertex: 3 }));
        assert_eq!(
            bank.insert(3, 8),
            Err(StreamViolation::VertexRange { vertex: 8, n: 8 })
        );
        assert_eq!(bank.apply(0, 1, 2), Err(StreamViolation::BadSign { sign: 2 }));
    }

    #[test]
    fn merge_equals_single_stream() {
        let edges: Vec<(u32, u32)> = vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)];
        let mut whole = desk_bank(8, 9);
        let mut first = desk_bank(8, 9);
        let mut second = desk_bank(8, 9);
        for (i, &(u, v)) in edges.iter().enumerate() {
            whole.insert(u, v).unwrap();
            if i % 2 == 0 {
                first.insert(u, v).unwrap();
            } else {
                second.insert(u, v).unwrap();
            }
        }
        first.merge(&second).unwrap();
        assert_eq!(first, whole);
        assert_eq!(first.stats(), whole.stats());
    }

    #[test]
    fn merge_rejects_different_seeds() {
        let mut a = desk_bank(8, 1);
        let b = desk_bank(8, 2);
        assert!(a.merge(&b).is_err());
    }

    #[test]
    fn exponent_zero_recovery_sees_every_edge() {
        let mut bank = desk_bank(8, 3);
        bank.insert(0, 1).unwrap();
        bank.insert(0, 2).unwrap();
        bank.insert(1, 2).unwrap();
        // row of vertex 0 at rate 1: edges (0,1) and (0,2), both +1
        let decoded = bank.recovery_sum(0, 0, &[0]).decode().unwrap();
        let expect = vec![
            (Coordinate::new(0, 1).index(), 1),
            (Coordinate::new(0, 2).index(), 1),
        ];
        assert_eq!(decoded, expect);
        // summed over {0,1}: the internal edge (0,1) cancels, and each
        // surviving entry is signed by which endpoint lies inside the set
        // (+1 when the lower endpoint is inside).
        let decoded = bank.recovery_sum(0, 0, &[0, 1]).decode().unwrap();
        assert_eq!(
            decoded,
            vec![
                (Coordinate::new(0, 2).index(), 1),
                (Coordinate::new(1, 2).index(), 1),
            ]
        );
    }

    #[test]
    fn degree_estimates_track_shadow_degrees() {
        // Any one estimator draw has constant relative error, so judge the
        // wiring by the median estimate across independently seeded banks.
        let mut estimates: Vec<f64> = (0..9)
            .map(|seed| {
                let mut bank = desk_bank(16, 100 + seed);
                for v in 1..13 {
                    bank.insert(0, v).unwrap();
                }
                bank.degree_sum(0, 0, &[0]).estimate()
            })
            .collect();
        estimates.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = estimates[4];
        assert!(
            (median - 12.0).abs() <= 6.0,
            "median degree estimate {median} too far from 12"
        );
    }

    #[test]
    fn emission_exponent_zero_is_exact() {
        let mut bank = desk_bank(16, 11);
        bank.insert(3, 7).unwrap();
        bank.insert(7, 12).unwrap();
        let decoded = bank.emission_sum(0, &[7]).decode().unwrap();
        assert_eq!(decoded.len(), 2);
        assert!(bank.emission_member(3, 7, 0));
    }

    #[test]
    fn forests_at_exponent_zero_hold_the_whole_graph() {
        let mut bank = desk_bank(16, 13);
        for &(u, v) in &[(0, 1), (1, 2), (3, 4)] {
            bank.insert(u, v).unwrap();
        }
        let vertices: Vec<u32> = (0..16).collect();
        for b in 0..bank.params().copies_connectivity {
            let r = bank.forest(0, b).spanning_forest(&vertices).unwrap();
            assert_eq!(r.components[0], 0);
            assert_eq!(r.components[1], 0);
            assert_eq!(r.components[2], 0);
            assert_eq!(r.components[3], 3);
            assert_eq!(r.components[4], 3);
        }
    }

    #[test]
    fn deeper_exponents_subsample_strictly() {
        let mut bank = desk_bank(32, 17);
        let mut m = 0;
        for u in 0..32u32 {
            for v in (u + 1)..32 {
                if (u + v) % 3 == 0 {
                    bank.insert(u, v).unwrap();
                    m += 1;
                }
            }
        }
        assert!(m > 100);
        // at exponent 4 roughly (2 - 1/16) * m / 16 of the edges survive
        // per copy; just check strict shrinkage on copy 0
        let full = bank.forest(0, 0).memory_words();
        let deep = bank.forest(4, 0).memory_words();
        assert!(deep < full / 2, "exponent 4 kept {deep} of {full} words");
    }

    #[test]
    fn touch_stats_count_all_updates() {
        let mut bank = desk_bank(8, 19);
        bank.insert(0, 1).unwrap();
        bank.insert(2, 3).unwrap();
        let s = bank.stats();
        assert_eq!(s.updates, 2);
        assert!(s.touched_cells > 0);
        assert!(s.touched_per_update() > 1.0);
    }
}
