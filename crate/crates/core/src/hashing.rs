//! Seeded unit-interval hash families with per-key t-wise independence.
//!
//! For a fixed key vertex u, the map v -> value is a degree-(t-1) polynomial
//! over GF(2^61-1) whose coefficients are mixed from (master seed, family,
//! u); any t values sharing a key vertex are jointly uniform, and values for
//! distinct key vertices (or distinct families) are independent. The ordered
//! pairs (u, v) and (v, u) are distinct keys and give independent draws.

use crate::config::Rat;
use crate::field;

/// Which sampling family a source belongs to. Each copy gets fresh
/// randomness from the same master seed.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Family {
    /// Drives the per-exponent connectivity sketches.
    Connectivity(u32),
    /// Drives the per-round recovery and degree sketches.
    Recovery(u32),
    /// Drives the emission sketches the sparsifier is decoded from.
    Emission,
}

impl Family {
    fn code(self) -> u64 {
        match self {
            Family::Connectivity(i) => (1 << 32) | i as u64,
            Family::Recovery(i) => (2 << 32) | i as u64,
            Family::Emission => 3 << 32,
        }
    }
}

/// A value in [0, 1) with resolution 1/(2^61 - 1), stored as the field
/// element x and interpreted as x / MODULUS. Comparisons against powers of
/// two and rationals are exact integer comparisons.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct UnitValue(u64);

impl UnitValue {
    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / field::MODULUS as f64
    }

    /// Exact test of value < 2^-a.
    pub fn below_pow2(self, a: u32) -> bool {
        if a >= 64 {
            return self.0 == 0;
        }
        ((self.0 as u128) << a) < field::MODULUS as u128
    }

    /// Exact test of value < r for a rational threshold.
    pub fn below_rat(self, r: &Rat) -> bool {
        // x/M < num/den  <=>  x*den < num*M. Thresholds in this crate keep
        // num and den well under 2^64, so the u128 products cannot wrap.
        let num = *r.numer();
        let den = *r.denom();
        debug_assert!(num < 1 << 64 && den < 1 << 64);
        (self.0 as u128) * den < num * field::MODULUS as u128
    }

    /// Largest exponent a (capped at 63) with value < 2^-a.
    pub fn max_exponent(self) -> u32 {
        if self.0 == 0 {
            return 63;
        }
        let x = self.0 as u128;
        let m = field::MODULUS as u128;
        let mut a = 0;
        while a < 63 && (x << (a + 1)) < m {
            a += 1;
        }
        a
    }
}

/// One hash family copy: evaluates ordered vertex pairs to unit values.
#[derive(Clone, Debug)]
pub struct HashSource {
    seed: u64,
    family: Family,
    /// Independence degree t; the polynomial has t coefficients.
    independence: u32,
}

impl HashSource {
    pub fn new(seed: u64, family: Family, independence: u32) -> Self {
        assert!(independence >= 2, "need at least pairwise independence");
        HashSource {
            seed,
            family,
            independence,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn independence(&self) -> u32 {
        self.independence
    }

    /// Value of the ordered pair (key, point). Horner evaluation of the
    /// key's polynomial at the point; O(t) field ops.
    pub fn value(&self, key: u32, point: u32) -> UnitValue {
        let tag = self.family.code();
        let t = self.independence;
        let x = field::reduce(point as u64 + 1);
        let mut acc = self.coefficient(tag, key, t - 1);
        for i in (0..t - 1).rev() {
            acc = field::add(field::mul(acc, x), self.coefficient(tag, key, i));
        }
        UnitValue(acc)
    }

    fn coefficient(&self, tag: u64, key: u32, i: u32) -> u64 {
        field::mix_to_field(&[self.seed, tag, key as u64, i as u64])
    }

    /// min over both orientations, as used for sketch membership.
    pub fn pair_min(&self, u: u32, v: u32) -> UnitValue {
        self.value(u, v).min(self.value(v, u))
    }

    /// Membership of edge (u, v) in the exponent-a sample:
    /// min(value(u,v), value(v,u)) < 2^-a.
    pub fn threshold_sample(&self, u: u32, v: u32, a: u32) -> bool {
        self.pair_min(u, v).below_pow2(a)
    }

    /// Largest exponent at which edge (u, v) is still sampled.
    pub fn max_sample_exponent(&self, u: u32, v: u32) -> u32 {
        self.pair_min(u, v).max_exponent()
    }
}
