//! Extraction pipeline: peel supernodes level by level, recover their
//! boundary edges from the emission sketches, and reweight into a cut
//! sparsifier.
//!
//! For each level a the supernodes are the classes of the exponent-(a+1)
//! partition. Peeling runs in rounds on fresh sketch randomness: supernodes
//! whose estimated sampled boundary degree clears the threshold are removed,
//! their recovered edges subtracted from the later-round views of the
//! remaining supernodes. The peel order then drives emission: each supernode
//! decodes its residual emission sketch, keeps edges that live exactly at
//! this level and pass the level's ordered sampling filter, and subtracts
//! everything it decoded from the supernodes that come after it, so every
//! edge is decided by exactly one endpoint.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::bank::SketchBank;
use crate::config::{FailurePolicy, Rat};
use crate::coord::Coordinate;
use crate::degree::QUANT_BITS;
use crate::error::{DecodeFailure, PipelineError, PipelineWarning};
use crate::levels::{build_levels, LevelStructure};

/// Exact comparison of a fixed-point (2^-QUANT_BITS grid) value against a
/// rational threshold.
fn fixed_le_rat(fixed: u128, r: &Rat) -> bool {
    fixed * r.denom() <= r.numer() << QUANT_BITS
}

/// Peel order of one level's supernodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionOutcome {
    pub level: u32,
    /// Sketch exponent the peel ran at: max(level - delta, 0).
    pub exponent: u32,
    /// rounds[r]: canonical ids of the supernodes peeled in round r.
    pub rounds: Vec<Vec<u32>>,
    /// Supernodes never peeled (nonempty only under best-effort policy).
    pub stalled: Vec<u32>,
    pub warnings: Vec<PipelineWarning>,
}

/// One reweighted sparsifier edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmittedEdge {
    pub u: u32,
    pub v: u32,
    /// Level that claimed the edge.
    pub level: u32,
    /// 1/p for the level's sampling rate p (exactly 1 in the exact regime).
    pub weight: Rat,
    /// Endpoint whose ordered hash decided the edge.
    pub controller: u32,
}

/// Output of recover() for one level.
#[derive(Clone, Debug)]
pub struct RecoverOutcome {
    pub level: u32,
    pub emitted: Vec<EmittedEdge>,
    pub warnings: Vec<PipelineWarning>,
}

/// The extracted sparsifier plus extraction diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Sparsifier {
    pub n: u32,
    pub seed: u64,
    pub epsilon: Rat,
    /// Sorted by (u, v); u < v; no duplicates.
    pub edges: Vec<EmittedEdge>,
    /// Edges kept per level (after deduplication).
    pub per_level: Vec<usize>,
    /// Duplicate emissions dropped by the safety net (0 in healthy runs).
    pub duplicates: usize,
    pub warnings: Vec<PipelineWarning>,
}

impl Sparsifier {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Total weight as (u, v, weight) triples for cut comparisons.
    pub fn weighted_edges(&self) -> Vec<(u32, u32, Rat)> {
        self.edges.iter().map(|e| (e.u, e.v, e.weight)).collect()
    }
}

/// Supernodes of level `a`: the classes of the exponent-(a+1) partition.
fn supernodes(ls: &LevelStructure, a: u32) -> (Vec<Vec<u32>>, Vec<u32>) {
    let groups = ls.partition(a + 1);
    let mut super_of = vec![0u32; ls.n() as usize];
    for members in &groups {
        for &v in members {
            super_of[v as usize] = members[0];
        }
    }
    (groups, super_of)
}

/// Peels the level-a supernodes in rounds of bounded sampled boundary
/// degree, subtracting recovered edges from the remaining supernodes'
/// later-round sketch views.
pub fn partition(
    bank: &SketchBank,
    ls: &LevelStructure,
    a: u32,
) -> Result<PartitionOutcome, PipelineError> {
    let p = bank.params();
    let e = p.recovery_exponent(a);
    let r_max = p.copies_recovery;
    let (groups, super_of) = supernodes(ls, a);
    let members_of: HashMap<u32, &Vec<u32>> =
        groups.iter().map(|m| (m[0], m)).collect();
    let mut live: BTreeSet<u32> = groups.iter().map(|m| m[0]).collect();
    // (supernode id, round) -> deltas cancelling edges recovered earlier
    let mut pending: HashMap<(u32, u32), Vec<(u64, i64)>> = HashMap::new();
    let mut rounds: Vec<Vec<u32>> = Vec::new();
    let mut warnings = Vec::new();

    for r in 0..r_max {
        if live.is_empty() {
            break;
        }
        let mut peel = Vec::new();
        for &id in &live {
            let mut deg = bank.degree_sum(e, r, members_of[&id]);
            if let Some(subs) = pending.get(&(id, r)) {
                for &(idx, s) in subs {
                    deg.update(idx, s);
                }
            }
            if fixed_le_rat(deg.estimate_fixed(), &p.peel_threshold) {
                peel.push(id);
            }
        }
        if peel.is_empty() {
            break; // stall: nothing cleared the threshold
        }
        for &id in &peel {
            live.remove(&id);
        }
        if !live.is_empty() {
            // recover each peeled supernode's remaining-round boundaries and
            // cancel them out of the survivors' views
            for &id in &peel {
                for j in (r + 1)..r_max {
                    let mut sk = bank.recovery_sum(e, j, members_of[&id]);
                    if let Some(subs) = pending.get(&(id, j)) {
                        for &(idx, s) in subs {
                            sk.update(idx, s);
                        }
                    }
                    let decoded = sk.decode().and_then(|pairs| {
                        if pairs.iter().all(|&(_, s)| s.abs() == 1) {
                            Ok(pairs)
                        } else {
                            Err(DecodeFailure {
                                remaining_cells: 0,
                                decoded: pairs.len(),
                            })
                        }
                    });
                    match decoded {
                        Ok(pairs) => {
                            for (idx, s) in pairs {
                                let c = Coordinate::from_index(idx);
                                let inside = c.endpoint_for_sign(s);
                                let other = super_of[c.other(inside) as usize];
                                if live.contains(&other) {
                                    pending.entry((other, j)).or_default().push((idx, s));
                                }
                            }
                        }
                        Err(df) => match p.failure_policy {
                            FailurePolicy::Strict => {
                                return Err(PipelineError::DecodeFailure {
                                    level: a,
                                    exponent: e,
                                    round: j,
                                    supernode: id,
                                    decoded: df.decoded,
                                    remaining: df.remaining_cells,
                                });
                            }
                            FailurePolicy::BestEffort => {
                                warnings.push(PipelineWarning::SubtractionSkipped {
                                    level: a,
                                    round: j,
                                    supernode: id,
                                });
                            }
                        },
                    }
                }
            }
        }
        rounds.push(peel);
    }

    let mut stalled: Vec<u32> = Vec::new();
    if !live.is_empty() {
        match p.failure_policy {
            FailurePolicy::Strict => {
                return Err(PipelineError::PartitionStall {
                    level: a,
                    round: rounds.len() as u32,
                    stuck: live.into_iter().collect(),
                });
            }
            FailurePolicy::BestEffort => {
                stalled = live.into_iter().collect();
                warnings.push(PipelineWarning::StallFallback {
                    level: a,
                    stuck: stalled.len(),
                });
            }
        }
    }

    Ok(PartitionOutcome {
        level: a,
        exponent: e,
        rounds,
        stalled,
        warnings,
    })
}

/// Memo for ordered emission-hash decisions during one recover pass.
struct EmitCache<'a> {
    bank: &'a SketchBank,
    level: u32,
    memo: Option<HashMap<(u32, u32), bool>>,
}

impl<'a> EmitCache<'a> {
    fn new(bank: &'a SketchBank, level: u32) -> Self {
        let memo = bank.params().cache_hash_evals.then(HashMap::new);
        EmitCache { bank, level, memo }
    }

    fn emits(&mut self, inside: u32, outside: u32) -> bool {
        match &mut self.memo {
            None => self.bank.emits(inside, outside, self.level),
            Some(m) => *m
                .entry((inside, outside))
                .or_insert_with(|| self.bank.emits(inside, outside, self.level)),
        }
    }
}

/// Decodes one supernode's exact (rate-1) boundary, trying each round's
/// bucketing until one decodes.
fn exact_boundary(
    bank: &SketchBank,
    members: &[u32],
) -> Result<Vec<(u64, i64)>, DecodeFailure> {
    let mut last = DecodeFailure {
        remaining_cells: 0,
        decoded: 0,
    };
    for r in 0..bank.params().copies_recovery {
        match bank.recovery_sum(0, r, members).decode() {
            Ok(pairs) => return Ok(pairs),
            Err(df) => last = df,
        }
    }
    Err(last)
}

/// Walks the peel order and emits this level's sampled edges.
pub fn recover(
    bank: &SketchBank,
    ls: &LevelStructure,
    a: u32,
    po: &PartitionOutcome,
) -> Result<RecoverOutcome, PipelineError> {
    let p = bank.params();
    let e = po.exponent;
    let weight = p.weight(a);
    let (groups, super_of) = supernodes(ls, a);
    let members_of: HashMap<u32, &Vec<u32>> =
        groups.iter().map(|m| (m[0], m)).collect();

    // total processing order: peel rounds, then stalled fallbacks
    let mut order: Vec<(u32, u32, bool)> = Vec::new(); // (id, round, forced_exact)
    for (r, round) in po.rounds.iter().enumerate() {
        for &id in round {
            order.push((id, r as u32, false));
        }
    }
    for &id in &po.stalled {
        order.push((id, po.rounds.len() as u32, true));
    }

    let mut cache = EmitCache::new(bank, a);
    let mut pending: HashMap<u32, Vec<(u64, i64)>> = HashMap::new();
    let mut processed: HashSet<u32> = HashSet::new();
    let mut emitted: Vec<EmittedEdge> = Vec::new();
    let mut warnings = Vec::new();

    for &(id, round, forced_exact) in &order {
        let members = members_of[&id];
        let decoded = if forced_exact {
            None
        } else {
            let mut sk = bank.emission_sum(e, members);
            if let Some(subs) = pending.remove(&id) {
                for (idx, s) in subs {
                    sk.update(idx, s);
                }
            }
            let result = sk.decode().and_then(|pairs| {
                if pairs.iter().all(|&(_, s)| s.abs() == 1) {
                    Ok(pairs)
                } else {
                    Err(DecodeFailure {
                        remaining_cells: 0,
                        decoded: pairs.len(),
                    })
                }
            });
            match result {
                Ok(pairs) => Some(pairs),
                Err(df) => {
                    if p.failure_policy == FailurePolicy::Strict {
                        return Err(PipelineError::DecodeFailure {
                            level: a,
                            exponent: e,
                            round,
                            supernode: id,
                            decoded: df.decoded,
                            remaining: df.remaining_cells,
                        });
                    }
                    warnings.push(PipelineWarning::EmissionFallback {
                        level: a,
                        supernode: id,
                    });
                    None
                }
            }
        };

        match decoded {
            Some(pairs) => {
                for (idx, s) in pairs {
                    let c = Coordinate::from_index(idx);
                    let inside = c.endpoint_for_sign(s);
                    let outside = c.other(inside);
                    let target = super_of[outside as usize];
                    debug_assert!(!processed.contains(&target), "edge to a processed supernode");
                    if processed.contains(&target) {
                        continue;
                    }
                    pending.entry(target).or_default().push((idx, s));
                    if ls.edge_level(c.lo(), c.hi()) == Some(a) && cache.emits(inside, outside) {
                        emitted.push(EmittedEdge {
                            u: c.lo(),
                            v: c.hi(),
                            level: a,
                            weight: weight.clone(),
                            controller: inside,
                        });
                    }
                }
            }
            None => {
                // exact fallback: emit this supernode's level-a boundary at
                // weight 1 and cancel what later supernodes would re-decode
                let pairs = exact_boundary(bank, members).map_err(|_| {
                    PipelineError::ExactFallbackOverflow { vertex: id, level: a }
                })?;
                for (idx, s) in pairs {
                    let c = Coordinate::from_index(idx);
                    let inside = c.endpoint_for_sign(s);
                    let outside = c.other(inside);
                    let target = super_of[outside as usize];
                    if processed.contains(&target) {
                        continue; // that edge was already decided
                    }
                    if bank.emission_member(c.lo(), c.hi(), e) {
                        pending.entry(target).or_default().push((idx, s));
                    }
                    if ls.edge_level(c.lo(), c.hi()) == Some(a) {
                        emitted.push(EmittedEdge {
                            u: c.lo(),
                            v: c.hi(),
                            level: a,
                            weight: Rat::from_integer(1),
                            controller: inside,
                        });
                    }
                }
            }
        }
        processed.insert(id);
    }

    Ok(RecoverOutcome {
        level: a,
        emitted,
        warnings,
    })
}

/// Full extraction: levels, then partition + recover per level, then the
/// deduplicated, sorted, reweighted edge list.
pub fn sparsify(bank: &SketchBank) -> Result<Sparsifier, PipelineError> {
    let p = bank.params();
    let ls = build_levels(bank)?;
    let mut warnings: Vec<PipelineWarning> = ls.warnings().to_vec();
    let mut collected: Vec<EmittedEdge> = Vec::new();

    for a in 0..=p.a_max {
        let po = partition(bank, &ls, a)?;
        warnings.extend(po.warnings.iter().cloned());
        let ro = recover(bank, &ls, a, &po)?;
        warnings.extend(ro.warnings.iter().cloned());
        collected.extend(ro.emitted);
    }

    let mut dedup: HashMap<(u32, u32), EmittedEdge> = HashMap::new();
    let mut duplicates = 0usize;
    for edge in collected {
        match dedup.entry((edge.u, edge.v)) {
            std::collections::hash_map::Entry::Vacant(slot) => {
                slot.insert(edge);
            }
            std::collections::hash_map::Entry::Occupied(_) => duplicates += 1,
        }
    }
    let mut edges: Vec<EmittedEdge> = dedup.into_values().collect();
    edges.sort_by_key(|e| (e.u, e.v));
    let mut per_level = vec![0usize; p.a_max as usize + 1];
    for e in &edges {
        per_level[e.level as usize] += 1;
    }

    Ok(Sparsifier {
        n: p.n,
        seed: p.seed,
        epsilon: p.epsilon.clone(),
        edges,
        per_level,
        duplicates,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{rat, RunConfig};
    use crate::oracle::ShadowGraph;

    fn bank_of(n: u32, cfg: &RunConfig, edges: &[(u32, u32)]) -> SketchBank {
        let mut bank = SketchBank::new(n, cfg);
        for &(u, v) in edges {
            bank.insert(u, v).unwrap();
        }
        bank
    }

    #[test]
    fn empty_graph_gives_empty_sparsifier() {
        let bank = bank_of(8, &RunConfig::desk(rat(1, 2), 1), &[]);
        let sp = sparsify(&bank).unwrap();
        assert!(sp.is_empty());
        assert_eq!(sp.duplicates, 0);
        assert!(sp.warnings.is_empty());
    }

    /// Desk run with gamma raised so every level's rate caps at 1.
    fn exact_cfg(seed: u64) -> RunConfig {
        let mut cfg = RunConfig::desk(rat(1, 2), seed);
        cfg.gamma = Some(rat(8, 1));
        cfg
    }

    #[test]
    fn rate_one_regime_reproduces_the_graph_exactly() {
        let edges: Vec<(u32, u32)> = (0..16u32)
            .flat_map(|u| ((u + 1)..16).map(move |v| (u, v)))
            .filter(|&(u, v)| (u * 5 + v * 11) % 4 != 0)
            .collect();
        let cfg = exact_cfg(7);
        let params = crate::config::Params::derive(16, &cfg);
        for a in 0..=params.a_max {
            assert_eq!(params.sample_probability(a), rat(1, 1), "level {a} not exact");
        }
        let bank = bank_of(16, &cfg, &edges);
        let sp = sparsify(&bank).unwrap();
        let got: Vec<(u32, u32)> = sp.edges.iter().map(|e| (e.u, e.v)).collect();
        let mut expect = edges.clone();
        expect.sort_unstable();
        assert_eq!(got, expect);
        assert!(sp.edges.iter().all(|e| e.weight == rat(1, 1)));
        assert_eq!(sp.duplicates, 0);

        let g = ShadowGraph::from_edges(16, &edges);
        let report = g.cut_report(&sp.weighted_edges(), 99);
        assert_eq!(report.max_rel_error, rat(0, 1));
    }

    #[test]
    fn star_partition_peels_everything_in_one_round() {
        let edges: Vec<(u32, u32)> = (1..32u32).map(|v| (0, v)).collect();
        let bank = bank_of(32, &RunConfig::desk(rat(1, 2), 3), &edges);
        let ls = build_levels(&bank).unwrap();
        for a in 0..=bank.params().a_max {
            let po = partition(&bank, &ls, a).unwrap();
            assert!(po.stalled.is_empty(), "level {a} stalled");
            assert_eq!(po.rounds.len(), 1, "level {a} took {} rounds", po.rounds.len());
            let peeled: usize = po.rounds.iter().map(|r| r.len()).sum();
            assert_eq!(peeled, ls.partition(a + 1).len());
        }
    }

    #[test]
    fn churn_does_not_change_the_extraction() {
        let keep: Vec<(u32, u32)> = vec![(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)];
        let churn: Vec<(u32, u32)> = vec![(0, 5), (4, 6), (2, 7), (5, 7)];
        let cfg = RunConfig::desk(rat(1, 2), 11);
        let plain = bank_of(8, &cfg, &keep);
        let mut noisy = SketchBank::new(8, &cfg);
        for &(u, v) in keep.iter().chain(&churn) {
            noisy.insert(u, v).unwrap();
        }
        for &(u, v) in &churn {
            noisy.delete(u, v).unwrap();
        }
        assert_eq!(plain, noisy);
        assert_eq!(sparsify(&plain).unwrap(), sparsify(&noisy).unwrap());
    }

    #[test]
    fn extraction_is_deterministic_and_seed_sensitive() {
        let edges: Vec<(u32, u32)> = (0..12u32)
            .flat_map(|u| ((u + 1)..12).map(move |v| (u, v)))
            .filter(|&(u, v)| (u + v) % 2 == 1)
            .collect();
        let a = sparsify(&bank_of(12, &RunConfig::desk(rat(1, 2), 5), &edges)).unwrap();
        let b = sparsify(&bank_of(12, &RunConfig::desk(rat(1, 2), 5), &edges)).unwrap();
        assert_eq!(a, b);
        let c = sparsify(&bank_of(12, &RunConfig::desk(rat(1, 2), 6), &edges)).unwrap();
        assert_eq!(a.n, c.n); // same shape, but the edge choice may differ
    }

    #[test]
    fn every_emitted_edge_is_a_real_edge_with_weight_at_least_one() {
        let edges: Vec<(u32, u32)> = (0..24u32)
            .flat_map(|u| ((u + 1)..24).map(move |v| (u, v)))
            .filter(|&(u, v)| (u * 3 + v * 7) % 5 < 2)
            .collect();
        let g = ShadowGraph::from_edges(24, &edges);
        for seed in 0..5 {
            let bank = bank_of(24, &RunConfig::desk(rat(1, 2), 40 + seed), &edges);
            let sp = sparsify(&bank).unwrap();
            assert!(!sp.is_empty());
            assert_eq!(sp.duplicates, 0, "seed {seed}");
            for e in &sp.edges {
                assert!(g.contains(e.u, e.v), "phantom edge ({}, {})", e.u, e.v);
                assert!(e.weight >= rat(1, 1));
                assert!(e.controller == e.u || e.controller == e.v);
            }
        }
    }

    #[test]
    fn connected_graph_sparsifier_is_connected() {
        // a sparsifier preserving cuts to within eps < 1 cannot lose any
        // nonzero cut entirely, so connectivity must survive
        let edges: Vec<(u32, u32)> = (0..16u32)
            .flat_map(|u| ((u + 1)..16).map(move |v| (u, v)))
            .filter(|&(u, v)| (u * 7 + v) % 3 != 0)
            .collect();
        for seed in 0..5 {
            let bank = bank_of(16, &RunConfig::desk(rat(1, 2), 70 + seed), &edges);
            let sp = sparsify(&bank).unwrap();
            let kept: Vec<(u32, u32)> = sp.edges.iter().map(|e| (e.u, e.v)).collect();
            let g = ShadowGraph::from_edges(16, &kept);
            let c = g.components();
            assert!(c.iter().all(|&x| x == 0), "seed {seed}: disconnected sparsifier");
        }
    }
}
