//! Edge-slot coordinates.
//!
//! Every unordered vertex pair (v, w) with v < w owns one slot in the
//! incidence coordinate space [0, n(n-1)/2). Row v of the signed incidence
//! matrix carries +1 at that slot while an edge (v, w) is present, row w
//! carries -1, so summing rows over a vertex set cancels internal edges and
//! leaves exactly the boundary.

/// An unordered vertex pair, stored as (lo, hi) with lo < hi.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Coordinate {
    lo: u32,
    hi: u32,
}

impl Coordinate {
    /// Builds the slot for an edge between two distinct vertices.
    pub fn new(u: u32, v: u32) -> Self {
        assert_ne!(u, v, "self-loops carry no coordinate");
        Coordinate {
            lo: u.min(v),
            hi: u.max(v),
        }
    }

    pub fn lo(&self) -> u32 {
        self.lo
    }

    pub fn hi(&self) -> u32 {
        self.hi
    }

    /// Size of the coordinate space for `n` vertices.
    pub fn space(n: u32) -> u64 {
        let n = n as u64;
        n * (n.saturating_sub(1)) / 2
    }

    /// Triangular packing: a bijection onto [0, n(n-1)/2).
    pub fn index(&self) -> u64 {
        let hi = self.hi as u64;
        let lo = self.lo as u64;
        hi * (hi - 1) / 2 + lo
    }

    /// Inverse of [`Coordinate::index`].
    pub fn from_index(idx: u64) -> Self {
        // hi is the largest h with h(h-1)/2 <= idx.
        let mut hi = (((8.0 * idx as f64 + 1.0).sqrt() + 1.0) / 2.0) as u64;
        while hi * (hi - 1) / 2 > idx {
            hi -= 1;
        }
        while (hi + 1) * hi / 2 <= idx {
            hi += 1;
        }
        let lo = idx - hi * (hi - 1) / 2;
        debug_assert!(lo < hi);
        Coordinate {
            lo: lo as u32,
            hi: hi as u32,
        }
    }

    /// Sign this slot carries in `vertex`'s incidence row (0 if not incident).
    pub fn row_sign(&self, vertex: u32) -> i64 {
        if vertex == self.lo {
            1
        } else if vertex == self.hi {
            -1
        } else {
            0
        }
    }

    /// The endpoint other than `vertex`.
    pub fn other(&self, vertex: u32) -> u32 {
        debug_assert!(vertex == self.lo || vertex == self.hi);
        if vertex == self.lo {
            self.hi
        } else {
            self.lo
        }
    }

    /// Endpoint sitting on the positive side of a signed row-sum value.
    ///
    /// A summed sketch over a vertex set reads +1 at this slot when the set
    /// contains `lo`, -1 when it contains `hi`.
    pub fn endpoint_for_sign(&self, value: i64) -> u32 {
        if value > 0 {
            self.lo
        } else {
            self.hi
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn packing_is_bijective_for_small_n() {
        let n = 40u32;
        let mut seen = vec![false; Coordinate::space(n) as usize];
        for hi in 1..n {
            for lo in 0..hi {
                let c = Coordinate::new(hi, lo);
                assert_eq!((c.lo(), c.hi()), (lo, hi));
                let idx = c.index();
                assert!(!seen[idx as usize], "collision at {idx}");
                seen[idx as usize] = true;
                assert_eq!(Coordinate::from_index(idx), c);
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn row_signs_cancel_across_endpoints() {
        let c = Coordinate::new(7, 3);
        assert_eq!(c.row_sign(3), 1);
        assert_eq!(c.row_sign(7), -1);
        assert_eq!(c.row_sign(5), 0);
        assert_eq!(c.row_sign(3) + c.row_sign(7), 0);
        assert_eq!(c.endpoint_for_sign(1), 3);
        assert_eq!(c.endpoint_for_sign(-1), 7);
        assert_eq!(c.other(3), 7);
    }

    #[test]
    fn space_handles_degenerate_n() {
        assert_eq!(Coordinate::space(0), 0);
        assert_eq!(Coordinate::space(1), 0);
        assert_eq!(Coordinate::space(2), 1);
    }

    proptest! {
        #[test]
        fn index_roundtrips(idx in 0u64..Coordinate::space(20_000)) {
            let c = Coordinate::from_index(idx);
            prop_assert_eq!(c.index(), idx);
            prop_assert!(c.lo() < c.hi());
        }
    }
}
