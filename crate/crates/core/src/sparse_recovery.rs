//! Exact k-sparse recovery of signed vectors from a linear bucket sketch.
//!
//! Each coordinate lands in one bucket per row; a bucket accumulates the
//! (count, index-sum, fingerprint-sum) of everything hashed into it. A bucket
//! holding exactly one surviving coordinate passes a divisibility plus
//! fingerprint test and can be peeled; peeling cascades across rows until the
//! sketch empties or stalls. The sketch is linear: updates, merges, and
//! subtractions commute bit-exactly, and cells that return to zero are
//! dropped so state is canonical.

use std::collections::HashMap;

use crate::error::{DecodeFailure, ParamMismatch};
use crate::field;

const BUCKET_TAG: u64 = 0x42;
const FINGERPRINT_TAG: u64 = 0x46;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RecoveryParams {
    /// Sparsity budget k: decode refuses to emit more coordinates than this.
    pub sparsity: u64,
    pub rows: u32,
    /// Buckets per row; 2k unless constructed otherwise.
    pub buckets: u64,
    pub coord_space: u64,
    pub seed: u64,
}

impl RecoveryParams {
    pub fn standard(sparsity: u64, rows: u32, coord_space: u64, seed: u64) -> Self {
        RecoveryParams {
            sparsity,
            rows,
            buckets: 2 * sparsity.max(1),
            coord_space,
            seed,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Default, Debug)]
struct Cell {
    count: i64,
    index_sum: i128,
    fingerprint: u64,
}

impl Cell {
    fn is_zero(&self) -> bool {
        self.count == 0 && self.index_sum == 0 && self.fingerprint == 0
    }

    fn apply(&mut self, index: u64, delta: i64, fp: u64) {
        self.count += delta;
        self.index_sum += delta as i128 * index as i128;
        let term = field::mul(field::from_i128(delta as i128), fp);
        self.fingerprint = field::add(self.fingerprint, term);
    }
}

/// Linear sketch supporting exact recovery of any vector with at most
/// `sparsity` nonzero coordinates.
#[derive(Clone, PartialEq, Debug)]
pub struct RecoverySketch {
    params: RecoveryParams,
    /// Sparse cell storage keyed by row * buckets + bucket; zero cells are
    /// removed eagerly so equal states compare equal.
    cells: HashMap<u64, Cell>,
}

impl RecoverySketch {
    pub fn new(params: RecoveryParams) -> Self {
        assert!(params.rows >= 1 && params.buckets >= 1);
        RecoverySketch {
            params,
            cells: HashMap::new(),
        }
    }

    pub fn params(&self) -> &RecoveryParams {
        &self.params
    }

    pub fn is_zero(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn nonzero_cells(&self) -> usize {
        self.cells.len()
    }

    fn bucket_of(&self, row: u32, index: u64) -> u64 {
        field::mix_words(&[self.params.seed, BUCKET_TAG, row as u64, index]) % self.params.buckets
    }

    fn fingerprint_of(&self, index: u64) -> u64 {
        field::mix_to_field(&[self.params.seed, FINGERPRINT_TAG, index])
    }

    /// Adds `delta` at `index`. Returns the number of cells touched.
    pub fn update(&mut self, index: u64, delta: i64) -> usize {
        debug_assert!(index < self.params.coord_space);
        if delta == 0 {
            return 0;
        }
        let fp = self.fingerprint_of(index);
        let buckets = self.params.buckets;
        for row in 0..self.params.rows {
            let key = row as u64 * buckets + self.bucket_of(row, index);
            let cell = self.cells.entry(key).or_default();
            cell.apply(index, delta, fp);
            if cell.is_zero() {
                self.cells.remove(&key);
            }
        }
        self.params.rows as usize
    }

    /// Cell-wise sum with another sketch over the same parameters and seed.
    pub fn merge(&mut self, other: &RecoverySketch) -> Result<(), ParamMismatch> {
        if self.params != other.params {
            return Err(ParamMismatch {
                context: "recovery sketches share parameters and seed",
            });
        }
        for (&key, cell) in &other.cells {
            let mine = self.cells.entry(key).or_default();
            mine.count += cell.count;
            mine.index_sum += cell.index_sum;
            mine.fingerprint = field::add(mine.fingerprint, cell.fingerprint);
            if mine.is_zero() {
                self.cells.remove(&key);
            }
        }
        Ok(())
    }

    fn pure_candidate(&self, cell: &Cell) -> Option<(u64, i64)> {
        if cell.count == 0 {
            return None;
        }
        if cell.index_sum % cell.count as i128 != 0 {
            return None;
        }
        let index = cell.index_sum / cell.count as i128;
        if index < 0 || index as u64 >= self.params.coord_space {
            return None;
        }
        let index = index as u64;
        let expect = field::mul(
            field::from_i128(cell.count as i128),
            self.fingerprint_of(index),
        );
        if expect != cell.fingerprint {
            return None;
        }
        Some((index, cell.count))
    }

    /// Recovers the underlying vector if it has at most k nonzero
    /// coordinates, as sorted (index, value) pairs.
    pub fn decode(&self) -> Result<Vec<(u64, i64)>, DecodeFailure> {
        self.decode_counted().map(|(v, _)| v)
    }

    /// Like [`decode`](Self::decode) but also reports how many cell
    /// operations the peel performed (for cost assertions).
    pub fn decode_counted(&self) -> Result<(Vec<(u64, i64)>, u64), DecodeFailure> {
        let mut work = self.cells.clone();
        let mut queue: Vec<u64> = work.keys().copied().collect();
        queue.sort_unstable();
        let mut decoded: Vec<(u64, i64)> = Vec::new();
        let mut ops = queue.len() as u64;
        let budget = self.params.sparsity as usize;
        let buckets = self.params.buckets;

        while let Some(key) = queue.pop() {
            let Some(cell) = work.get(&key) else { continue };
            let Some((index, value)) = self.pure_candidate(cell) else {
                continue;
            };
            if decoded.len() >= budget {
                // Peeling past the budget is a stall by definition: the
                // vector was not k-sparse.
                return Err(DecodeFailure {
                    remaining_cells: work.len(),
                    decoded: decoded.len(),
                });
            }
            decoded.push((index, value));
            let fp = self.fingerprint_of(index);
            for row in 0..self.params.rows {
                let k = row as u64 * buckets + self.bucket_of(row, index);
                ops += 1;
                if let Some(c) = work.get_mut(&k) {
                    c.apply(index, -value, fp);
                    if c.is_zero() {
                        work.remove(&k);
                    } else {
                        queue.push(k);
                    }
                }
            }
        }

        if work.is_empty() {
            decoded.sort_unstable();
            Ok((decoded, ops))
        } else {
            Err(DecodeFailure {
                remaining_cells: work.len(),
                decoded: decoded.len(),
            })
        }
    }

    /// Words of payload held by live cells (count, index-sum, fingerprint).
    pub fn memory_words(&self) -> u64 {
        self.cells.len() as u64 * 4
    }

    /// Versioned binary serialization: parameters, then live cells sorted by
    /// flat (row-major) key. Layout is documented, not stable across
    /// versions.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + self.cells.len() * 36);
        out.extend_from_slice(b"CSRS");
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&self.params.sparsity.to_le_bytes());
        out.extend_from_slice(&self.params.rows.to_le_bytes());
        out.extend_from_slice(&self.params.buckets.to_le_bytes());
        out.extend_from_slice(&self.params.coord_space.to_le_bytes());
        out.extend_from_slice(&self.params.seed.to_le_bytes());
        let mut keys: Vec<u64> = self.cells.keys().copied().collect();
        keys.sort_unstable();
        out.extend_from_slice(&(keys.len() as u64).to_le_bytes());
        for key in keys {
            let cell = &self.cells[&key];
            out.extend_from_slice(&key.to_le_bytes());
            out.extend_from_slice(&cell.count.to_le_bytes());
            out.extend_from_slice(&cell.index_sum.to_le_bytes());
            out.extend_from_slice(&cell.fingerprint.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, String> {
        let mut at = 0usize;
        let mut take = |len: usize| -> Result<&[u8], String> {
            let slice = bytes
                .get(at..at + len)
                .ok_or_else(|| "truncated sketch bytes".to_string())?;
            at += len;
            Ok(slice)
        };
        if take(4)? != b"CSRS" {
            return Err("bad magic".into());
        }
        let version = u16::from_le_bytes(take(2)?.try_into().unwrap());
        if version != 1 {
            return Err(format!("unsupported sketch version {version}"));
        }
        let sparsity = u64::from_le_bytes(take(8)?.try_into().unwrap());
        let rows = u32::from_le_bytes(take(4)?.try_into().unwrap());
        let buckets = u64::from_le_bytes(take(8)?.try_into().unwrap());
        let coord_space = u64::from_le_bytes(take(8)?.try_into().unwrap());
        let seed = u64::from_le_bytes(take(8)?.try_into().unwrap());
        let count = u64::from_le_bytes(take(8)?.try_into().unwrap());
        let mut cells = HashMap::with_capacity(count as usize);
        for _ in 0..count {
            let key = u64::from_le_bytes(take(8)?.try_into().unwrap());
            let cell = Cell {
                count: i64::from_le_bytes(take(8)?.try_into().unwrap()),
                index_sum: i128::from_le_bytes(take(16)?.try_into().unwrap()),
                fingerprint: u64::from_le_bytes(take(8)?.try_into().unwrap()),
            };
            if cell.is_zero() {
                return Err("zero cell in serialized sketch".into());
            }
            cells.insert(key, cell);
        }
        Ok(RecoverySketch {
            params: RecoveryParams {
                sparsity,
                rows,
                buckets,
                coord_space,
                seed,
            },
            cells,
        })
    }
}
