//! ℓ1 (degree) estimation sketch for signed incidence rows.
//!
//! Each of J projections dots the row with a fixed Cauchy-distributed
//! vector; the median of absolute projections estimates the ℓ1 norm,
//! which for an incidence row equals the vertex degree. Projections are
//! quantized to a fixed binary grid so that accumulation is exact integer
//! arithmetic and merged sketches are bit-identical to rebuilt ones.

use std::f64::consts::PI;

use crate::error::ParamMismatch;
use crate::field;

/// Fractional bits of the quantized projection grid.
pub const QUANT_BITS: u32 = 30;
/// Clamp for the heavy Cauchy tails, in units (pre-quantization).
const CLAMP: f64 = 1.0e6;
const PROJ_TAG: u64 = 0xca;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DegreeParams {
    pub projections: u32,
    pub coord_space: u64,
    pub seed: u64,
}

/// Estimates the ℓ1 norm of one signed row under updates.
#[derive(Clone, PartialEq, Debug)]
pub struct DegreeSketch {
    params: DegreeParams,
    /// One exact accumulator per projection, on the 2^-QUANT_BITS grid.
    acc: Vec<i128>,
}

/// Quantized Cauchy projection entry for (projection j, coordinate).
fn projection_entry(seed: u64, j: u32, index: u64) -> i64 {
    let word = field::mix_words(&[seed, PROJ_TAG, j as u64, index]);
    // uniform in (0,1), bias 2^-64 away from the endpoints
    let u = (word as f64 + 0.5) * (1.0 / 18_446_744_073_709_551_616.0);
    let c = (PI * (u - 0.5)).tan().clamp(-CLAMP, CLAMP);
    (c * (1u64 << QUANT_BITS) as f64).round() as i64
}

impl DegreeSketch {
    pub fn new(params: DegreeParams) -> Self {
        assert!(params.projections > 0);
        DegreeSketch {
            acc: vec![0; params.projections as usize],
            params,
        }
    }

    pub fn params(&self) -> &DegreeParams {
        &self.params
    }

    /// Adds `delta` at coordinate `index`; returns accumulators touched.
    pub fn update(&mut self, index: u64, delta: i64) -> usize {
        debug_assert!(index < self.params.coord_space);
        if delta == 0 {
            return 0;
        }
        for j in 0..self.params.projections {
            let entry = projection_entry(self.params.seed, j, index);
            self.acc[j as usize] += entry as i128 * delta as i128;
        }
        self.params.projections as usize
    }

    pub fn merge(&mut self, other: &DegreeSketch) -> Result<(), ParamMismatch> {
        if self.params != other.params {
            return Err(ParamMismatch {
                context: "degree sketches share parameters and seed",
            });
        }
        for (a, b) in self.acc.iter_mut().zip(&other.acc) {
            *a += b;
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.acc.iter().all(|&a| a == 0)
    }

    /// Median of |projection| on the fixed grid (exact integer).
    pub fn estimate_fixed(&self) -> u128 {
        let mut mags: Vec<u128> = self.acc.iter().map(|&a| a.unsigned_abs()).collect();
        mags.sort_unstable();
        let m = mags.len();
        if m % 2 == 1 {
            mags[m / 2]
        } else {
            (mags[m / 2 - 1] + mags[m / 2]) / 2
        }
    }

    /// ℓ1 estimate as a float (median of |Cauchy| is 1, so no rescale).
    pub fn estimate(&self) -> f64 {
        self.estimate_fixed() as f64 / (1u64 << QUANT_BITS) as f64
    }

    pub fn memory_words(&self) -> u64 {
        self.acc.len() as u64 * 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(projections: u32, seed: u64) -> DegreeParams {
        DegreeParams {
            projections,
            coord_space: 1 << 20,
            seed,
        }
    }

    #[test]
    fn empty_sketch_estimates_zero() {
        let s = DegreeSketch::new(params(9, 1));
        assert_eq!(s.estimate_fixed(), 0);
        assert!(s.is_zero());
    }

    #[test]
    fn cancellation_restores_fresh_state() {
        let mut s = DegreeSketch::new(params(15, 2));
        s.update(10, 3);
        s.update(99, -1);
        s.update(10, -3);
        s.update(99, 1);
        assert_eq!(s, DegreeSketch::new(params(15, 2)));
    }

    #[test]
    fn merge_equals_rebuild() {
        let mut a = DegreeSketch::new(params(11, 3));
        let mut b = DegreeSketch::new(params(11, 3));
        let mut whole = DegreeSketch::new(params(11, 3));
        for i in 0..200u64 {
            let delta = if i % 3 == 0 { -1 } else { 1 };
            if i % 2 == 0 {
                a.update(i * 7, delta);
            } else {
                b.update(i * 7, delta);
            }
            whole.update(i * 7, delta);
        }
        a.merge(&b).unwrap();
        assert_eq!(a, whole);
    }

    #[test]
    fn merge_rejects_mismatched_seeds() {
        let mut a = DegreeSketch::new(params(11, 3));
        let b = DegreeSketch::new(params(11, 4));
        assert!(a.merge(&b).is_err());
    }

    #[test]
    fn median_estimate_tracks_true_l1() {
        // unit entries at d coordinates -> l1 = d; check relative error
        // over many seeds at a realistic projection count
        for &d in &[4u64, 32, 200] {
            let mut ok = 0;
            let trials = 60;
            for seed in 0..trials {
                let mut s = DegreeSketch::new(params(257, 1000 + seed));
                for i in 0..d {
                    s.update(i * 311 + 7, 1);
                }
                let est = s.estimate();
                if (est - d as f64).abs() <= 0.5 * d as f64 {
                    ok += 1;
                }
            }
            assert!(ok * 10 >= trials * 9, "degree {d}: only {ok}/{trials} within 50%");
        }
    }

    #[test]
    fn estimate_concentrates_with_more_projections() {
        let d = 64u64;
        let spread = |projections: u32| -> f64 {
            let mut worst: f64 = 0.0;
            for seed in 0..40 {
                let mut s = DegreeSketch::new(DegreeParams {
                    projections,
                    coord_space: 1 << 20,
                    seed: 5_000 + seed,
                });
                for i in 0..d {
                    s.update(i * 97 + 3, 1);
                }
                worst = worst.max((s.estimate() - d as f64).abs() / d as f64);
            }
            worst
        };
        assert!(spread(513) < spread(9) + 0.25);
        assert!(spread(513) < 0.30, "worst error {}", spread(513));
    }
}
