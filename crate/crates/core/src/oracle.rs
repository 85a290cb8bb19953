//! Exact reference computations on an explicitly stored graph.
//!
//! Everything here is deterministic, small-n machinery used to validate
//! the sketching pipeline: exact cut values, global edge connectivity,
//! per-edge strong connectivity, exhaustive/sampled cut-error reports,
//! and the exact low-degree peeling order.

use std::collections::{BTreeMap, HashMap};

use crate::config::Rat;
use crate::error::{PeelFailure, StreamViolation};
use crate::field;

pub const MAX_VERTICES: u32 = 256;
/// Exhaustive cut enumeration bound; above this, cuts are sampled.
pub const EXHAUSTIVE_LIMIT: u32 = 16;
pub const SAMPLED_CUTS: u64 = 10_000;

/// Explicit weighted graph maintained alongside a sketch for testing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShadowGraph {
    n: u32,
    edges: BTreeMap<(u32, u32), u64>,
}

impl ShadowGraph {
    pub fn new(n: u32) -> Self {
        assert!(n <= MAX_VERTICES, "shadow graph supports at most {MAX_VERTICES} vertices");
        ShadowGraph {
            n,
            edges: BTreeMap::new(),
        }
    }

    pub fn from_edges(n: u32, edges: &[(u32, u32)]) -> Self {
        let mut g = ShadowGraph::new(n);
        for &(u, v) in edges {
            g.insert(u, v, 1).unwrap();
        }
        g
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn key(&self, u: u32, v: u32) -> Result<(u32, u32), StreamViolation> {
        if u == v {
            return Err(StreamViolation::SelfLoop { vertex: u });
        }
        if u >= self.n || v >= self.n {
            return Err(StreamViolation::VertexRange {
                vertex: u.max(v),
                n: self.n,
            });
        }
        Ok((u.min(v), u.max(v)))
    }

    pub fn insert(&mut self, u: u32, v: u32, weight: u64) -> Result<(), StreamViolation> {
        let key = self.key(u, v)?;
        if self.edges.contains_key(&key) {
            return Err(StreamViolation::InsertPresent { u: key.0, v: key.1 });
        }
        self.edges.insert(key, weight);
        Ok(())
    }

    pub fn delete(&mut self, u: u32, v: u32, weight: u64) -> Result<(), StreamViolation> {
        let key = self.key(u, v)?;
        match self.edges.get(&key) {
            None => Err(StreamViolation::DeleteAbsent { u: key.0, v: key.1 }),
            Some(&w) if w != weight => Err(StreamViolation::WeightMismatch {
                u: key.0,
                v: key.1,
                expected: w,
                got: weight,
            }),
            Some(_) => {
                self.edges.remove(&key);
                Ok(())
            }
        }
    }

    pub fn contains(&self, u: u32, v: u32) -> bool {
        u != v && self.edges.contains_key(&(u.min(v), u.max(v)))
    }

    pub fn weight(&self, u: u32, v: u32) -> Option<u64> {
        self.edges.get(&(u.min(v), u.max(v))).copied()
    }

    /// Sorted (u, v, weight) triples with u < v.
    pub fn edges(&self) -> Vec<(u32, u32, u64)> {
        self.edges.iter().map(|(&(u, v), &w)| (u, v, w)).collect()
    }

    pub fn degree(&self, v: u32) -> u128 {
        self.edges
            .iter()
            .filter(|(&(a, b), _)| a == v || b == v)
            .map(|(_, &w)| w as u128)
            .sum()
    }

    /// Total weight crossing the bipartition given by `side` (length n).
    pub fn cut_value(&self, side: &[bool]) -> u128 {
        assert_eq!(side.len(), self.n as usize);
        self.edges
            .iter()
            .filter(|(&(u, v), _)| side[u as usize] != side[v as usize])
            .map(|(_, &w)| w as u128)
            .sum()
    }

    /// Component id per vertex, canonicalized to the smallest member.
    pub fn components(&self) -> Vec<u32> {
        let mut uf = crate::l0_forest::UnionFind::new(self.n as usize);
        for &(u, v) in self.edges.keys() {
            uf.union(u as usize, v as usize);
        }
        let mut canon: HashMap<usize, u32> = HashMap::new();
        (0..self.n)
            .map(|v| {
                let r = uf.find(v as usize);
                *canon.entry(r).or_insert(v)
            })
            .collect()
    }

    /// Global minimum cut (value, one side) over the whole vertex set.
    /// Returns (0, ..) for disconnected graphs and n < 2.
    pub fn min_cut(&self) -> (u128, Vec<u32>) {
        let all: Vec<u32> = (0..self.n).collect();
        if all.len() < 2 {
            return (0, all);
        }
        stoer_wagner(&all, &self.edges)
    }

    /// Minimum cut separating `u` from `v`: max-flow over the undirected
    /// capacities via breadth-first augmenting paths. 0 when disconnected.
    pub fn edge_connectivity(&self, u: u32, v: u32) -> u128 {
        assert!(u != v && u < self.n && v < self.n);
        let n = self.n as usize;
        // residual capacities, symmetric start
        let mut cap: HashMap<(u32, u32), u128> = HashMap::new();
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (&(a, b), &w) in &self.edges {
            cap.insert((a, b), w as u128);
            cap.insert((b, a), w as u128);
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        let mut flow = 0u128;
        loop {
            // shortest augmenting path in the residual graph
            let mut prev: Vec<Option<u32>> = vec![None; n];
            prev[u as usize] = Some(u);
            let mut queue = std::collections::VecDeque::from([u]);
            'bfs: while let Some(x) = queue.pop_front() {
                for &y in &adj[x as usize] {
                    if prev[y as usize].is_none() && cap[&(x, y)] > 0 {
                        prev[y as usize] = Some(x);
                        if y == v {
                            break 'bfs;
                        }
                        queue.push_back(y);
                    }
                }
            }
            if prev[v as usize].is_none() {
                return flow;
            }
            let mut bottleneck = u128::MAX;
            let mut y = v;
            while y != u {
                let x = prev[y as usize].unwrap();
                bottleneck = bottleneck.min(cap[&(x, y)]);
                y = x;
            }
            let mut y = v;
            while y != u {
                let x = prev[y as usize].unwrap();
                *cap.get_mut(&(x, y)).unwrap() -= bottleneck;
                *cap.get_mut(&(y, x)).unwrap() += bottleneck;
                y = x;
            }
            flow += bottleneck;
        }
    }

    /// Strong connectivity of every edge: the largest k such that the edge
    /// lies inside a vertex-induced subgraph with minimum cut at least k.
    /// Computed by recursive minimum-cut decomposition; an edge removed
    /// while splitting a component inherits the maximum component
    /// connectivity seen on its recursion path.
    pub fn strong_connectivity(&self) -> BTreeMap<(u32, u32), u128> {
        let mut strengths = BTreeMap::new();
        let all: Vec<u32> = (0..self.n).collect();
        self.decompose(&all, 0, &mut strengths);
        strengths
    }

    fn decompose(
        &self,
        vertices: &[u32],
        best: u128,
        out: &mut BTreeMap<(u32, u32), u128>,
    ) {
        if vertices.len() < 2 {
            return;
        }
        let (cut, side) = stoer_wagner(vertices, &self.edges);
        let best = best.max(cut);
        let in_side: std::collections::HashSet<u32> = side.iter().copied().collect();
        let other: Vec<u32> = vertices.iter().copied().filter(|v| !in_side.contains(v)).collect();
        for &(u, v) in self.edges.keys() {
            if vertices.contains(&u)
                && vertices.contains(&v)
                && in_side.contains(&u) != in_side.contains(&v)
            {
                out.insert((u, v), best);
            }
        }
        self.decompose(&side, best, out);
        self.decompose(&other, best, out);
    }

    /// Rounds of simultaneous peeling of vertices whose current degree in
    /// the remaining induced graph is at most `threshold`; second return
    /// is the (normally empty) stuck remainder.
    pub fn low_degree_partition(&self, threshold: u128) -> (Vec<Vec<u32>>, Vec<u32>) {
        let mut alive: Vec<bool> = vec![true; self.n as usize];
        let mut remaining = self.n as usize;
        let mut rounds = Vec::new();
        while remaining > 0 {
            let mut round = Vec::new();
            for v in 0..self.n {
                if !alive[v as usize] {
                    continue;
                }
                let deg: u128 = self
                    .edges
                    .iter()
                    .filter(|(&(a, b), _)| {
                        (a == v && alive[b as usize]) || (b == v && alive[a as usize])
                    })
                    .map(|(_, &w)| w as u128)
                    .sum();
                if deg <= threshold {
                    round.push(v);
                }
            }
            if round.is_empty() {
                break;
            }
            for &v in &round {
                alive[v as usize] = false;
            }
            remaining -= round.len();
            rounds.push(round);
        }
        let stuck: Vec<u32> = (0..self.n).filter(|&v| alive[v as usize]).collect();
        (rounds, stuck)
    }

    /// Peels the graph into ordered rounds W1..Wt where every vertex of Wi
    /// has degree at most 2k restricted to Wi ∪ … ∪ Wt. Errs with
    /// `PeelFailure` when some remainder has no qualifying vertex, and
    /// asserts the round count stays within ⌈log₂ n⌉ — the structural
    /// budget a graph whose edges are all k-weak must satisfy.
    pub fn w_partition_check(&self, k: u128) -> Result<Vec<Vec<u32>>, PeelFailure> {
        let threshold = 2 * k;
        let (rounds, stuck) = self.low_degree_partition(threshold);
        if !stuck.is_empty() {
            return Err(PeelFailure {
                threshold,
                remaining: stuck,
            });
        }
        let bound = u32::BITS - (self.n.max(2) - 1).leading_zeros(); // ⌈log₂ n⌉
        assert!(
            rounds.len() as u64 <= bound as u64,
            "peel used {} rounds, budget {bound} for n = {}",
            rounds.len(),
            self.n
        );
        // re-verify the claimed degree bound against the suffix graphs
        let mut peel_round = vec![u32::MAX; self.n as usize];
        for (i, round) in rounds.iter().enumerate() {
            for &v in round {
                peel_round[v as usize] = i as u32;
            }
        }
        for (i, round) in rounds.iter().enumerate() {
            for &v in round {
                let deg: u128 = self
                    .edges
                    .iter()
                    .filter(|(&(a, b), _)| {
                        (a == v && peel_round[b as usize] >= i as u32)
                            || (b == v && peel_round[a as usize] >= i as u32)
                    })
                    .map(|(_, &w)| w as u128)
                    .sum();
                assert!(deg <= threshold, "vertex {v} kept degree {deg} in round {i}");
            }
        }
        Ok(rounds)
    }

    /// Compares a reweighted edge list against every cut (exhaustively for
    /// n <= EXHAUSTIVE_LIMIT, otherwise SAMPLED_CUTS seeded random cuts).
    pub fn cut_report(&self, sparsifier: &[(u32, u32, Rat)], seed: u64) -> CutReport {
        let mut spars: HashMap<(u32, u32), Rat> = HashMap::new();
        for &(u, v, w) in sparsifier {
            let key = (u.min(v), u.max(v));
            let entry = spars.entry(key).or_insert_with(|| Rat::new(0, 1));
            *entry = *entry + w;
        }
        let mut report = CutReport {
            cuts_checked: 0,
            nonzero_cuts: 0,
            max_rel_error: Rat::new(0, 1),
            sum_rel_error: 0.0,
            worst_side: Vec::new(),
            zero_cut_mismatch: false,
        };
        let n = self.n;
        if n < 2 {
            return report;
        }
        let mut side = vec![false; n as usize];
        if n <= EXHAUSTIVE_LIMIT {
            // fix the last vertex outside to enumerate bipartitions once
            for mask in 1u32..(1u32 << (n - 1)) {
                for v in 0..n - 1 {
                    side[v as usize] = mask >> v & 1 == 1;
                }
                side[n as usize - 1] = false;
                self.score_cut(&side, &spars, &mut report);
            }
        } else {
            let words = (n as usize + 63) / 64;
            let mut trial = 0u64;
            while report.cuts_checked < SAMPLED_CUTS {
                trial += 1;
                let bits: Vec<u64> = (0..words)
                    .map(|w| field::mix_words(&[seed, trial, w as u64]))
                    .collect();
                let mut any = false;
                let mut all = true;
                for v in 0..n as usize {
                    side[v] = bits[v / 64] >> (v % 64) & 1 == 1;
                    any |= side[v];
                    all &= side[v];
                }
                if !any || all {
                    continue;
                }
                self.score_cut(&side, &spars, &mut report);
            }
        }
        report
    }

    fn score_cut(&self, side: &[bool], spars: &HashMap<(u32, u32), Rat>, report: &mut CutReport) {
        report.cuts_checked += 1;
        let exact = self.cut_value(side);
        let approx: Rat = spars
            .iter()
            .filter(|(&(u, v), _)| side[u as usize] != side[v as usize])
            .map(|(_, &w)| w)
            .fold(Rat::new(0, 1), |a, b| a + b);
        if exact == 0 {
            if approx != Rat::new(0, 1) {
                report.zero_cut_mismatch = true;
                report.worst_side = side_vertices(side);
            }
            return;
        }
        let exact_rat = Rat::new(exact, 1);
        let diff = if approx >= exact_rat {
            approx - exact_rat
        } else {
            exact_rat - approx
        };
        let rel = diff / exact_rat;
        report.nonzero_cuts += 1;
        report.sum_rel_error += ratio_to_f64(rel);
        if rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst_side = side_vertices(side);
        }
    }
}

fn side_vertices(side: &[bool]) -> Vec<u32> {
    side.iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(v, _)| v as u32)
        .collect()
}

/// Result of comparing sparsifier cuts against exact cuts.
#[derive(Clone, Debug)]
pub struct CutReport {
    pub cuts_checked: u64,
    /// Cuts with nonzero exact weight (the denominator of the mean).
    pub nonzero_cuts: u64,
    /// Largest |approx - exact| / exact over nonzero cuts, exact rational.
    pub max_rel_error: Rat,
    /// Sum of relative errors over nonzero cuts (diagnostic, approximate).
    pub sum_rel_error: f64,
    pub worst_side: Vec<u32>,
    /// True when some empty cut received nonzero sparsifier weight.
    pub zero_cut_mismatch: bool,
}

impl CutReport {
    pub fn within(&self, epsilon: Rat) -> bool {
        !self.zero_cut_mismatch && self.max_rel_error <= epsilon
    }

    pub fn max_rel_error_f64(&self) -> f64 {
        ratio_to_f64(self.max_rel_error)
    }

    pub fn mean_rel_error(&self) -> f64 {
        if self.nonzero_cuts == 0 {
            0.0
        } else {
            self.sum_rel_error / self.nonzero_cuts as f64
        }
    }
}

pub fn ratio_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Deterministic Stoer–Wagner global minimum cut on the induced subgraph.
/// Requires at least two vertices; returns (cut value, one side).
fn stoer_wagner(vertices: &[u32], edges: &BTreeMap<(u32, u32), u64>) -> (u128, Vec<u32>) {
    let k = vertices.len();
    assert!(k >= 2);
    let index: HashMap<u32, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut w = vec![vec![0u128; k]; k];
    for (&(u, v), &weight) in edges {
        if let (Some(&i), Some(&j)) = (index.get(&u), index.get(&v)) {
            w[i][j] += weight as u128;
            w[j][i] += weight as u128;
        }
    }
    // merged[i] = original vertices currently fused into node i
    let mut merged: Vec<Vec<u32>> = vertices.iter().map(|&v| vec![v]).collect();
    let mut active: Vec<usize> = (0..k).collect();
    let mut best: Option<(u128, Vec<u32>)> = None;
    while active.len() > 1 {
        // one maximum-adjacency phase over the active nodes
        let mut in_a = vec![false; k];
        let mut weight_to_a = vec![0u128; k];
        let mut order = Vec::with_capacity(active.len());
        for _ in 0..active.len() {
            let mut pick = None;
            for &v in &active {
                if in_a[v] {
                    continue;
                }
                match pick {
                    None => pick = Some(v),
                    Some(p) => {
                        if weight_to_a[v] > weight_to_a[p] {
                            pick = Some(v)
                        }
                    }
                }
            }
            let v = pick.unwrap();
            in_a[v] = true;
            order.push(v);
            for &u in &active {
                if !in_a[u] {
                    weight_to_a[u] += w[v][u];
                }
            }
        }
        let t = *order.last().unwrap();
        let s = order[order.len() - 2];
        let phase_cut = {
            let mut sum = 0u128;
            for &u in &active {
                if u != t {
                    sum += w[t][u];
                }
            }
            sum
        };
        let better = match &best {
            None => true,
            Some((b, _)) => phase_cut < *b,
        };
        if better {
            best = Some((phase_cut, merged[t].clone()));
        }
        // contract t into s
        let t_members = std::mem::take(&mut merged[t]);
        merged[s].extend(t_members);
        for &u in &active {
            if u != s && u != t {
                w[s][u] += w[t][u];
                w[u][s] = w[s][u];
            }
        }
        active.retain(|&u| u != t);
    }
    let (value, mut side) = best.unwrap();
    side.sort_unstable();
    // never return the full vertex set as a side
    debug_assert!(!side.is_empty() && side.len() < k);
    (value, side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::rat;

    #[test]
    fn insert_delete_violations() {
        let mut g = ShadowGraph::new(4);
        assert!(matches!(g.insert(1, 1, 1), Err(StreamViolation::SelfLoop { .. })));
        assert!(matches!(g.insert(1, 9, 1), Err(StreamViolation::VertexRange { .. })));
        g.insert(0, 1, 1).unwrap();
        assert!(matches!(g.insert(1, 0, 1), Err(StreamViolation::InsertPresent { .. })));
        assert!(matches!(g.delete(2, 3, 1), Err(StreamViolation::DeleteAbsent { .. })));
        assert!(matches!(
            g.delete(0, 1, 7),
            Err(StreamViolation::WeightMismatch { .. })
        ));
        g.delete(0, 1, 1).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn cut_value_counts_crossing_weight() {
        let mut g = ShadowGraph::new(4);
        g.insert(0, 1, 2).unwrap();
        g.insert(1, 2, 3).unwrap();
        g.insert(2, 3, 5).unwrap();
        let side = vec![true, true, false, false];
        assert_eq!(g.cut_value(&side), 3);
        assert_eq!(g.cut_value(&[true, false, true, false]), 2 + 3 + 5);
    }

    #[test]
    fn min_cut_of_path_is_one() {
        let g = ShadowGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(g.min_cut().0, 1);
    }

    #[test]
    fn min_cut_of_cycle_is_two() {
        let g = ShadowGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]);
        assert_eq!(g.min_cut().0, 2);
    }

    #[test]
    fn min_cut_of_complete_graph() {
        let mut edges = Vec::new();
        for u in 0..6u32 {
            for v in (u + 1)..6 {
                edges.push((u, v));
            }
        }
        let g = ShadowGraph::from_edges(6, &edges);
        assert_eq!(g.min_cut().0, 5);
    }

    #[test]
    fn min_cut_disconnected_is_zero() {
        let g = ShadowGraph::from_edges(4, &[(0, 1), (2, 3)]);
        assert_eq!(g.min_cut().0, 0);
        assert_eq!(g.components(), vec![0, 0, 2, 2]);
    }

    #[test]
    fn weighted_min_cut_respects_weights() {
        let mut g = ShadowGraph::new(3);
        g.insert(0, 1, 10).unwrap();
        g.insert(1, 2, 1).unwrap();
        g.insert(0, 2, 1).unwrap();
        assert_eq!(g.min_cut().0, 2); // isolate vertex 2
    }

    #[test]
    fn strong_connectivity_of_pendant_clique() {
        let mut edges = Vec::new();
        for u in 0..4u32 {
            for v in (u + 1)..4 {
                edges.push((u, v));
            }
        }
        edges.push((3, 4));
        let g = ShadowGraph::from_edges(5, &edges);
        let s = g.strong_connectivity();
        assert_eq!(s[&(3, 4)], 1);
        for u in 0..4u32 {
            for v in (u + 1)..4 {
                assert_eq!(s[&(u, v)], 3, "clique edge ({u},{v})");
            }
        }
    }

    #[test]
    fn strong_connectivity_survives_weak_splits() {
        // a 4-cycle splits into single edges whose own connectivity is 1,
        // yet every edge belongs to the 2-connected cycle
        let g = ShadowGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        for (_, &s) in g.strong_connectivity().iter() {
            assert_eq!(s, 2);
        }
    }

    #[test]
    fn strong_connectivity_two_triangles_with_bridge() {
        let g = ShadowGraph::from_edges(
            6,
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)],
        );
        let s = g.strong_connectivity();
        assert_eq!(s[&(2, 3)], 1);
        for e in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)] {
            assert_eq!(s[&e], 2, "triangle edge {e:?}");
        }
    }

    #[test]
    fn strong_connectivity_assigns_every_edge() {
        let g = ShadowGraph::from_edges(7, &[(0, 1), (1, 2), (2, 0), (2, 3), (4, 5)]);
        let s = g.strong_connectivity();
        assert_eq!(s.len(), g.edge_count());
    }

    #[test]
    fn low_degree_peeling_rounds() {
        // star: center has degree 4, leaves 1
        let g = ShadowGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let (rounds, stuck) = g.low_degree_partition(1);
        assert_eq!(rounds, vec![vec![1, 2, 3, 4], vec![0]]);
        assert!(stuck.is_empty());

        // triangle with threshold 1 never peels
        let g = ShadowGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let (rounds, stuck) = g.low_degree_partition(1);
        assert!(rounds.is_empty());
        assert_eq!(stuck, vec![0, 1, 2]);
    }

    #[test]
    fn cut_report_exact_copy_has_zero_error() {
        let g = ShadowGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]);
        let spars: Vec<(u32, u32, Rat)> =
            g.edges().iter().map(|&(u, v, w)| (u, v, rat(w as u128, 1))).collect();
        let report = g.cut_report(&spars, 1);
        assert_eq!(report.max_rel_error, rat(0, 1));
        assert!(report.within(rat(1, 100)));
        assert_eq!(report.cuts_checked, (1 << 5) - 1);
    }

    #[test]
    fn cut_report_detects_reweighting_error() {
        let g = ShadowGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let mut spars: Vec<(u32, u32, Rat)> =
            g.edges().iter().map(|&(u, v, w)| (u, v, rat(w as u128, 1))).collect();
        spars[1] = (1, 2, rat(3, 2)); // off by 50%
        let report = g.cut_report(&spars, 1);
        assert_eq!(report.max_rel_error, rat(1, 2));
        assert!(!report.within(rat(1, 4)));
        assert!(report.within(rat(1, 2)));
    }

    #[test]
    fn cut_report_samples_for_large_n() {
        let edges: Vec<(u32, u32)> = (0..29).map(|i| (i, i + 1)).collect();
        let g = ShadowGraph::from_edges(30, &edges);
        let spars: Vec<(u32, u32, Rat)> =
            g.edges().iter().map(|&(u, v, w)| (u, v, rat(w as u128, 1))).collect();
        let report = g.cut_report(&spars, 7);
        assert_eq!(report.cuts_checked, SAMPLED_CUTS);
        assert_eq!(report.max_rel_error, rat(0, 1));
    }

    #[test]
    fn cut_report_flags_missing_edges() {
        let g = ShadowGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let report = g.cut_report(&[], 3);
        assert_eq!(report.max_rel_error, rat(1, 1));
    }

    fn clique_edges(base: u32, size: u32) -> Vec<(u32, u32)> {
        (base..base + size)
            .flat_map(|u| ((u + 1)..base + size).map(move |v| (u, v)))
            .collect()
    }

    #[test]
    fn pairwise_connectivity_in_complete_graph() {
        let g = ShadowGraph::from_edges(6, &clique_edges(0, 6));
        assert_eq!(g.edge_connectivity(0, 1), 5);
        assert_eq!(g.edge_connectivity(2, 5), 5);
    }

    #[test]
    fn pairwise_connectivity_of_tree_edge_is_one() {
        let g = ShadowGraph::from_edges(6, &[(0, 1), (1, 2), (1, 3), (3, 4), (3, 5)]);
        assert_eq!(g.edge_connectivity(1, 3), 1);
        assert_eq!(g.edge_connectivity(0, 5), 1);
    }

    #[test]
    fn pairwise_connectivity_across_bridge() {
        let mut edges = clique_edges(0, 8);
        edges.extend(clique_edges(8, 8));
        edges.push((7, 8));
        let g = ShadowGraph::from_edges(16, &edges);
        assert_eq!(g.edge_connectivity(7, 8), 1);
        assert_eq!(g.edge_connectivity(0, 15), 1);
        assert_eq!(g.edge_connectivity(0, 7), 7);
    }

    #[test]
    fn pairwise_connectivity_disconnected_is_zero() {
        let g = ShadowGraph::from_edges(4, &[(0, 1), (2, 3)]);
        assert_eq!(g.edge_connectivity(0, 3), 0);
    }

    #[test]
    fn pairwise_connectivity_respects_weights() {
        let mut g = ShadowGraph::new(3);
        g.insert(0, 1, 10).unwrap();
        g.insert(1, 2, 3).unwrap();
        g.insert(0, 2, 4).unwrap();
        assert_eq!(g.edge_connectivity(0, 1), 10 + 3.min(4));
        assert_eq!(g.edge_connectivity(1, 2), 3 + 4.min(10));
    }

    #[test]
    fn peel_check_orders_star_and_singleton() {
        let g = ShadowGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        // every edge is 1-weak relative to k = 1 (threshold 2): leaves first
        let rounds = g.w_partition_check(1).unwrap();
        assert_eq!(rounds, vec![vec![1, 2, 3, 4], vec![0]]);

        let g = ShadowGraph::new(1);
        assert_eq!(g.w_partition_check(1).unwrap(), vec![vec![0]]);
    }

    #[test]
    fn peel_check_fails_on_strongly_connected_remainder() {
        // K5 has min degree 4 > 2·1, so a k=1 peel cannot start
        let g = ShadowGraph::from_edges(5, &clique_edges(0, 5));
        let err = g.w_partition_check(1).unwrap_err();
        assert_eq!(err.threshold, 2);
        assert_eq!(err.remaining, vec![0, 1, 2, 3, 4]);
    }

    /// Corpus used by the consistency checks below.
    fn corpus() -> Vec<ShadowGraph> {
        let mut graphs = vec![
            ShadowGraph::from_edges(6, &clique_edges(0, 6)),
            ShadowGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]),
            ShadowGraph::from_edges(8, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 0)]),
        ];
        let mut bridged = clique_edges(0, 6);
        bridged.extend(clique_edges(6, 6));
        bridged.push((5, 6));
        graphs.push(ShadowGraph::from_edges(12, &bridged));
        // deterministic pseudo-random graph
        let mut rng_edges = Vec::new();
        for u in 0..14u32 {
            for v in (u + 1)..14 {
                if field::mix_words(&[42, u as u64, v as u64]) % 10 < 4 {
                    rng_edges.push((u, v));
                }
            }
        }
        graphs.push(ShadowGraph::from_edges(14, &rng_edges));
        graphs
    }

    #[test]
    fn strong_connectivity_never_exceeds_pairwise_connectivity() {
        for g in corpus() {
            let strong = g.strong_connectivity();
            for (&(u, v), &s) in &strong {
                let c = g.edge_connectivity(u, v);
                assert!(s <= c, "edge ({u},{v}): strong {s} > pairwise {c}");
            }
        }
    }

    #[test]
    fn inverse_strengths_sum_below_vertex_count() {
        for g in corpus() {
            let strong = g.strong_connectivity();
            let sum: Rat = strong
                .values()
                .map(|&s| rat(1, s))
                .fold(rat(0, 1), |a, b| a + b);
            assert!(
                sum <= rat(g.n() as u128 - 1, 1),
                "sum of inverse strengths {sum} exceeds n-1 = {}",
                g.n() - 1
            );
        }
    }

    #[test]
    fn weak_edge_count_is_linear_in_strength_bound() {
        for g in corpus() {
            let strong = g.strong_connectivity();
            for k in [1u128, 2, 4, 8] {
                let weak = strong.values().filter(|&&s| s < k).count() as u128;
                assert!(
                    weak <= k * (g.n() as u128 - 1),
                    "{weak} edges below strength {k} exceeds k(n-1)"
                );
            }
        }
    }

    #[test]
    fn weak_graphs_always_admit_the_peel() {
        // remove each corpus graph's strongest core by thresholding:
        // keep only edges with strength < k, then peel at that k
        for g in corpus() {
            let strong = g.strong_connectivity();
            for k in [1u128, 2, 4] {
                let mut weak = ShadowGraph::new(g.n());
                for (&(u, v), &s) in &strong {
                    if s < k {
                        weak.insert(u, v, g.weight(u, v).unwrap()).unwrap();
                    }
                }
                let rounds = weak.w_partition_check(k).expect("weak graph must peel");
                let total: usize = rounds.iter().map(|r| r.len()).sum();
                assert_eq!(total, g.n() as usize);
            }
        }
    }
}
