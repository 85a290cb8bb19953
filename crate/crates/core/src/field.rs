//! Arithmetic in GF(2^61 - 1) and the 64-bit mixing primitives that derive
//! every piece of internal randomness from a master seed.
//!
//! All fingerprints and hash values live in this field; the Mersenne modulus
//! makes reduction two shifts and an add.

/// The Mersenne prime 2^61 - 1. Every field element is a `u64` below this.
pub const MODULUS: u64 = (1u64 << 61) - 1;

/// Folds an arbitrary `u64` into the field.
#[inline]
pub fn reduce(x: u64) -> u64 {
    let folded = (x >> 61) + (x & MODULUS);
    if folded >= MODULUS {
        folded - MODULUS
    } else {
        folded
    }
}

/// Adds two field elements.
#[inline]
pub fn add(a: u64, b: u64) -> u64 {
    debug_assert!(a < MODULUS && b < MODULUS);
    let s = a + b;
    if s >= MODULUS {
        s - MODULUS
    } else {
        s
    }
}

/// Subtracts `b` from `a` in the field.
#[inline]
pub fn sub(a: u64, b: u64) -> u64 {
    debug_assert!(a < MODULUS && b < MODULUS);
    if a >= b {
        a - b
    } else {
        a + MODULUS - b
    }
}

/// Multiplies two field elements via a 128-bit product and two folds.
#[inline]
pub fn mul(a: u64, b: u64) -> u64 {
    debug_assert!(a < MODULUS && b < MODULUS);
    let t = a as u128 * b as u128;
    // t < 2^122; one fold leaves < 2^62, a second leaves < MODULUS + 1.
    let folded = ((t >> 61) + (t & MODULUS as u128)) as u64;
    reduce(folded)
}

/// Embeds a signed 128-bit integer into the field.
#[inline]
pub fn from_i128(x: i128) -> u64 {
    let m = MODULUS as i128;
    (((x % m) + m) % m) as u64
}

/// SplitMix64 step: full-entropy 64 -> 64 bijection.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a short word sequence to a single 64-bit value.
///
/// Used for all internal entropy: bucket placement, fingerprints, subsample
/// levels, projection coefficients, and the per-key polynomial coefficients
/// of the t-wise families. Distinct inputs give decorrelated outputs.
pub fn mix_words(words: &[u64]) -> u64 {
    let mut h = 0x517c_c1b7_2722_0a95u64;
    for &w in words {
        h = mix64(h ^ w);
    }
    // A final stir so that a trailing zero word still changes the output.
    mix64(h ^ (words.len() as u64).wrapping_mul(0x2545_f491_4f6c_dd1d))
}

/// Maps a short word sequence to a field element (negligible bias).
#[inline]
pub fn mix_to_field(words: &[u64]) -> u64 {
    mix_words(words) % MODULUS
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduce_folds_known_values() {
        assert_eq!(reduce(MODULUS), 0);
        assert_eq!(reduce(MODULUS + 5), 5);
        assert_eq!(reduce(u64::MAX), u64::MAX % MODULUS);
        assert_eq!(reduce(3), 3);
    }

    #[test]
    fn mul_matches_wide_reference() {
        let cases = [
            (0u64, 0u64),
            (1, MODULUS - 1),
            (MODULUS - 1, MODULUS - 1),
            (1 << 60, 2),
            (123_456_789, 987_654_321),
        ];
        for (a, b) in cases {
            let expect = ((a as u128 * b as u128) % MODULUS as u128) as u64;
            assert_eq!(mul(a, b), expect, "a={a} b={b}");
        }
    }

    #[test]
    fn from_i128_handles_negatives() {
        assert_eq!(from_i128(-1), MODULUS - 1);
        assert_eq!(from_i128(-(MODULUS as i128)), 0);
        assert_eq!(from_i128(MODULUS as i128 + 7), 7);
    }

    #[test]
    fn mix_words_differs_on_length_and_content() {
        let a = mix_words(&[1, 2, 3]);
        let b = mix_words(&[1, 2, 3, 0]);
        let c = mix_words(&[1, 2, 4]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, mix_words(&[1, 2, 3]));
    }

    proptest! {
        #[test]
        fn mul_agrees_with_u128(a in 0..MODULUS, b in 0..MODULUS) {
            let expect = ((a as u128 * b as u128) % MODULUS as u128) as u64;
            prop_assert_eq!(mul(a, b), expect);
        }

        #[test]
        fn add_sub_roundtrip(a in 0..MODULUS, b in 0..MODULUS) {
            prop_assert_eq!(sub(add(a, b), b), a);
        }
    }
}
