//! ℓ0 sampling of signed rows and the spanning-forest sketch built on it.
//!
//! An ℓ0 sampler keeps one 1-sparse tester per geometric subsample level;
//! querying walks the levels and returns the first verified singleton, i.e.
//! a uniform-ish nonzero coordinate of the underlying vector. The forest
//! sketch gives every vertex an independent sampler per merge round; a
//! Borůvka pass sums samplers over current components (internal edges
//! cancel), draws one boundary edge per component per round, and unions.

use std::collections::HashMap;

use crate::coord::Coordinate;
use crate::error::{ParamMismatch, RoundExhaustion};
use crate::field;

const LEVEL_TAG: u64 = 0x4c;
const FP_TAG: u64 = 0x1f;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct L0Params {
    pub coord_space: u64,
    pub seed: u64,
    /// Subsample levels 0..levels; level 0 sees everything.
    pub levels: u32,
}

impl L0Params {
    pub fn for_space(coord_space: u64, seed: u64) -> Self {
        let mut levels = 1;
        while (1u64 << levels) < coord_space.max(1) {
            levels += 1;
        }
        L0Params {
            coord_space,
            seed,
            levels: levels + 1,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Default, Debug)]
struct Tester {
    value: i64,
    index_sum: i128,
    fingerprint: u64,
}

impl Tester {
    fn is_zero(&self) -> bool {
        self.value == 0 && self.index_sum == 0 && self.fingerprint == 0
    }

    fn apply(&mut self, index: u64, delta: i64, fp: u64) {
        self.value += delta;
        self.index_sum += delta as i128 * index as i128;
        self.fingerprint = field::add(self.fingerprint, field::mul(field::from_i128(delta as i128), fp));
    }
}

/// Samples a nonzero coordinate of a signed vector under updates.
#[derive(Clone, PartialEq, Debug)]
pub struct L0Sampler {
    params: L0Params,
    /// Live testers by level; zero testers are removed so state is canonical.
    testers: HashMap<u32, Tester>,
}

impl L0Sampler {
    pub fn new(params: L0Params) -> Self {
        L0Sampler {
            params,
            testers: HashMap::new(),
        }
    }

    pub fn params(&self) -> &L0Params {
        &self.params
    }

    pub fn is_zero(&self) -> bool {
        self.testers.is_empty()
    }

    /// Deepest subsample level that retains `index` (geometric with rate 1/2).
    fn level_of(&self, index: u64) -> u32 {
        let z = field::mix_words(&[self.params.seed, LEVEL_TAG, index]);
        (z.trailing_zeros()).min(self.params.levels - 1)
    }

    fn fingerprint_of(&self, index: u64) -> u64 {
        field::mix_to_field(&[self.params.seed, FP_TAG, index])
    }

    /// Adds `delta` at `index`; returns testers touched.
    pub fn update(&mut self, index: u64, delta: i64) -> usize {
        debug_assert!(index < self.params.coord_space);
        if delta == 0 {
            return 0;
        }
        let top = self.level_of(index);
        let fp = self.fingerprint_of(index);
        for level in 0..=top {
            let tester = self.testers.entry(level).or_default();
            tester.apply(index, delta, fp);
            if tester.is_zero() {
                self.testers.remove(&level);
            }
        }
        top as usize + 1
    }

    pub fn merge(&mut self, other: &L0Sampler) -> Result<(), ParamMismatch> {
        if self.params != other.params {
            return Err(ParamMismatch {
                context: "l0 samplers share parameters and seed",
            });
        }
        for (&level, tester) in &other.testers {
            let mine = self.testers.entry(level).or_default();
            mine.value += tester.value;
            mine.index_sum += tester.index_sum;
            mine.fingerprint = field::add(mine.fingerprint, tester.fingerprint);
            if mine.is_zero() {
                self.testers.remove(&level);
            }
        }
        Ok(())
    }

    fn verify_singleton(&self, t: &Tester) -> Option<(u64, i64)> {
        if t.value == 0 {
            return None;
        }
        if t.index_sum % t.value as i128 != 0 {
            return None;
        }
        let index = t.index_sum / t.value as i128;
        if index < 0 || index as u64 >= self.params.coord_space {
            return None;
        }
        let index = index as u64;
        let expect = field::mul(field::from_i128(t.value as i128), self.fingerprint_of(index));
        if expect != t.fingerprint {
            return None;
        }
        Some((index, t.value))
    }

    /// Some nonzero (index, value) of the underlying vector, or None when
    /// the vector is zero or every level failed the singleton test.
    pub fn sample(&self) -> Option<(u64, i64)> {
        for level in 0..self.params.levels {
            if let Some(t) = self.testers.get(&level) {
                if let Some(hit) = self.verify_singleton(t) {
                    return Some(hit);
                }
            }
        }
        None
    }

    pub fn memory_words(&self) -> u64 {
        self.testers.len() as u64 * 4
    }
}

/// Result of a forest extraction over a vertex set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestResult {
    /// Edges of a spanning forest of the sketched graph.
    pub edges: Vec<(u32, u32)>,
    /// Component id per queried vertex (parallel to the input slice),
    /// canonicalized to the smallest member vertex.
    pub components: Vec<u32>,
}

/// Spanning-forest sketch: one ℓ0 sampler per (vertex, round), plus one
/// verification round used only to detect exhaustion.
#[derive(Clone, PartialEq, Debug)]
pub struct ForestSketch {
    n: u32,
    seed: u64,
    merge_rounds: u32,
    coord_space: u64,
    samplers: HashMap<(u32, u32), L0Sampler>,
}

impl ForestSketch {
    pub fn new(n: u32, seed: u64) -> Self {
        let mut rounds = 1u32;
        while (1u64 << rounds) < n.max(2) as u64 {
            rounds += 1;
        }
        ForestSketch {
            n,
            seed,
            merge_rounds: rounds + 2,
            coord_space: Coordinate::space(n),
            samplers: HashMap::new(),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn merge_rounds(&self) -> u32 {
        self.merge_rounds
    }

    pub fn is_zero(&self) -> bool {
        self.samplers.is_empty()
    }

    fn round_params(&self, round: u32) -> L0Params {
        L0Params::for_space(
            self.coord_space,
            field::mix_words(&[self.seed, round as u64]),
        )
    }

    /// Applies a signed edge update to both endpoint rows in every round
    /// (and the verification round). Returns testers touched.
    pub fn update_edge(&mut self, c: Coordinate, sign: i64) -> usize {
        debug_assert!(c.hi() < self.n);
        let index = c.index();
        let mut touched = 0;
        for round in 0..=self.merge_rounds {
            let params = self.round_params(round);
            for vertex in [c.lo(), c.hi()] {
                let sampler = self
                    .samplers
                    .entry((vertex, round))
                    .or_insert_with(|| L0Sampler::new(params));
                touched += sampler.update(index, sign * c.row_sign(vertex));
                if sampler.is_zero() {
                    self.samplers.remove(&(vertex, round));
                }
            }
        }
        touched
    }

    /// Adds another forest sketch over the same vertex count and seed.
    pub fn merge(&mut self, other: &ForestSketch) -> Result<(), ParamMismatch> {
        if self.n != other.n || self.seed != other.seed {
            return Err(ParamMismatch {
                context: "forest sketches share vertex count and seed",
            });
        }
        for (&key, sampler) in &other.samplers {
            match self.samplers.get_mut(&key) {
                None => {
                    self.samplers.insert(key, sampler.clone());
                }
                Some(mine) => {
                    mine.merge(sampler)?;
                    if mine.is_zero() {
                        self.samplers.remove(&key);
                    }
                }
            }
        }
        Ok(())
    }

    fn summed_sampler(&self, members: &[u32], round: u32) -> Option<L0Sampler> {
        let mut acc: Option<L0Sampler> = None;
        for &v in members {
            if let Some(s) = self.samplers.get(&(v, round)) {
                match &mut acc {
                    None => acc = Some(s.clone()),
                    Some(a) => a.merge(s).expect("round samplers share params"),
                }
            }
        }
        acc
    }

    /// Extracts a spanning forest of the sketched graph restricted to
    /// `vertices` (component structure among those vertices).
    pub fn spanning_forest(&self, vertices: &[u32]) -> Result<ForestResult, RoundExhaustion> {
        let mut sorted: Vec<u32> = vertices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let local: HashMap<u32, usize> = sorted.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut uf = UnionFind::new(sorted.len());
        let mut forest_edges = Vec::new();

        for round in 0..self.merge_rounds {
            let groups = components_of(&sorted, &mut uf, &local);
            if groups.len() <= 1 {
                break;
            }
            let mut merges: Vec<(u32, u32)> = Vec::new();
            for members in groups.values() {
                let Some(sum) = self.summed_sampler(members, round) else {
                    continue;
                };
                if let Some((index, value)) = sum.sample() {
                    if value.abs() != 1 {
                        continue; // corrupt draw; wait for another round
                    }
                    let c = Coordinate::from_index(index);
                    if !local.contains_key(&c.lo()) || !local.contains_key(&c.hi()) {
                        continue;
                    }
                    // the positive-sign endpoint must sit inside the group
                    let inside = c.endpoint_for_sign(value);
                    if !members.contains(&inside) {
                        continue;
                    }
                    merges.push((c.lo(), c.hi()));
                }
            }
            merges.sort_unstable();
            merges.dedup();
            for (u, v) in merges {
                if uf.union(local[&u], local[&v]) {
                    forest_edges.push((u, v));
                }
            }
        }

        // Fresh verification round. Over the full vertex set, a component's
        // summed row is exactly the signed indicator of its boundary, so a
        // nonzero sketch proves a merge was still pending when rounds ran
        // out — no draw required. Restricted extractions can't use that
        // certificate (edges leaving the restriction stay in the sum), so
        // they fall back to drawing and checking the endpoints.
        let full = sorted.len() == self.n as usize;
        let groups = components_of(&sorted, &mut uf, &local);
        if groups.len() > 1 {
            for members in groups.values() {
                let Some(sum) = self.summed_sampler(members, self.merge_rounds) else {
                    continue;
                };
                if full {
                    if !sum.is_zero() {
                        return Err(RoundExhaustion {
                            component: members[0],
                        });
                    }
                    continue;
                }
                if let Some((index, value)) = sum.sample() {
                    let c = Coordinate::from_index(index);
                    if value.abs() == 1
                        && local.contains_key(&c.lo())
                        && local.contains_key(&c.hi())
                        && members.contains(&c.endpoint_for_sign(value))
                        && !members.contains(&c.other(c.endpoint_for_sign(value)))
                    {
                        return Err(RoundExhaustion {
                            component: members[0],
                        });
                    }
                }
            }
        }

        let mut components = vec![0u32; sorted.len()];
        let mut canonical: HashMap<usize, u32> = HashMap::new();
        for &v in &sorted {
            let root = uf.find(local[&v]);
            canonical.entry(root).or_insert(v); // ascending scan -> min member
        }
        for (i, &v) in sorted.iter().enumerate() {
            components[i] = canonical[&uf.find(local[&v])];
        }
        forest_edges.sort_unstable();
        Ok(ForestResult {
            edges: forest_edges,
            components,
        })
    }

    pub fn memory_words(&self) -> u64 {
        self.samplers.values().map(|s| s.memory_words()).sum()
    }
}

fn components_of(
    sorted: &[u32],
    uf: &mut UnionFind,
    local: &HashMap<u32, usize>,
) -> std::collections::BTreeMap<usize, Vec<u32>> {
    let mut groups: std::collections::BTreeMap<usize, Vec<u32>> = Default::default();
    for &v in sorted {
        groups.entry(uf.find(local[&v])).or_default().push(v);
    }
    groups
}

/// Union-find with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true when the sets were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}
