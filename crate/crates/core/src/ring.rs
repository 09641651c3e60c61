//! Exact arithmetic in `Z_q` with `q = 2^ell`, and the complement encoding of
//! signed values.
//!
//! All ring elements are stored as `u64` reduced modulo `2^ell`; `ell = 40` is
//! realized as masked 64-bit arithmetic. Negative logical values are carried
//! in complement form: `-v` is stored as `q - v`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A ring element, reduced modulo `2^ell`. Interpretation depends on the
/// [`RingParams`] it was produced under.
pub type Elem = u64;

/// Ring and precision parameters shared by every party of a session.
///
/// `ell` is the ring bit width (`q = 2^ell`), `ellx` the input precision in
/// bits (logical inputs live in `[0, 2^ellx) ∪ (q - 2^ellx, q)`), and
/// `frac_bits` the fractional bit count of the fixed-point codec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingParams {
    ell: u8,
    ellx: u8,
    frac_bits: u8,
}

impl RingParams {
    /// Validates `ell <= 64`, `ell > ellx + 1` and `frac_bits <= ellx / 2`.
    pub fn new(ell: u8, ellx: u8, frac_bits: u8) -> Result<Self> {
        if ell == 0 || ell > 64 {
            return Err(Error::Params(format!("ell must be in [1,64], got {ell}")));
        }
        if ellx == 0 || u32::from(ell) <= u32::from(ellx) + 1 {
            return Err(Error::Params(format!(
                "need ell > ellx + 1, got ell={ell} ellx={ellx}"
            )));
        }
        if frac_bits > ellx / 2 {
            return Err(Error::Params(format!(
                "frac_bits {frac_bits} exceeds ellx/2 = {}",
                ellx / 2
            )));
        }
        Ok(Self { ell, ellx, frac_bits })
    }

    /// Parameters with the default fractional width `ellx / 2`.
    pub fn with_default_frac(ell: u8, ellx: u8) -> Result<Self> {
        Self::new(ell, ellx, ellx / 2)
    }

    pub fn ell(&self) -> u8 {
        self.ell
    }

    pub fn ellx(&self) -> u8 {
        self.ellx
    }

    pub fn frac_bits(&self) -> u8 {
        self.frac_bits
    }

    /// Bit mask selecting the low `ell` bits.
    #[inline]
    pub fn mask(&self) -> u64 {
        if self.ell == 64 {
            u64::MAX
        } else {
            (1u64 << self.ell) - 1
        }
    }

    /// The modulus `q = 2^ell` as an `i128`.
    #[inline]
    pub fn q(&self) -> i128 {
        1i128 << self.ell
    }

    /// Bytes per element on the wire (`ell / 8`, rounded up for odd widths).
    #[inline]
    pub fn elem_bytes(&self) -> usize {
        (usize::from(self.ell) + 7) / 8
    }

    #[inline]
    pub fn reduce(&self, v: u64) -> Elem {
        v & self.mask()
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        a.wrapping_add(b) & self.mask()
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        a.wrapping_sub(b) & self.mask()
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        a.wrapping_mul(b) & self.mask()
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.sub(0, a)
    }

    /// Logical (non-cyclic) right shift of the `ell`-bit value; no sign
    /// extension. `k` must satisfy `k < ell`.
    #[inline]
    pub fn rshift(&self, x: Elem, k: u32) -> Elem {
        assert!(k < u32::from(self.ell), "shift count {k} >= ell {}", self.ell);
        (x & self.mask()) >> k
    }

    /// Effective bit length of a magnitude `xi < 2^ellx`: the index plus one
    /// of its most significant set bit, and 0 for input 0.
    pub fn effective_bit_length(&self, xi: Elem) -> u32 {
        debug_assert!(xi < (1u64 << self.ellx), "magnitude exceeds input precision");
        64 - xi.leading_zeros()
    }

    /// Encodes a signed logical value in complement form. Rejects values not
    /// strictly inside `(-q/2, q/2)`.
    pub fn encode_signed(&self, v: i128) -> Result<Elem> {
        let half = self.q() / 2;
        if v <= -half || v >= half {
            return Err(Error::Range(format!("{v} not representable at ell={}", self.ell)));
        }
        let q = self.q();
        Ok((((v % q) + q) % q) as u64)
    }

    /// Encodes a protocol input, additionally enforcing `|v| < 2^ellx`.
    pub fn encode_input(&self, v: i128) -> Result<Elem> {
        let bound = 1i128 << self.ellx;
        if v <= -bound || v >= bound {
            return Err(Error::Range(format!(
                "input {v} outside (-2^{0}, 2^{0})",
                self.ellx
            )));
        }
        self.encode_signed(v)
    }

    /// Decodes a complement-form element back to a signed value using the
    /// midpoint rule.
    pub fn decode_signed(&self, x: Elem) -> i128 {
        let q = self.q();
        let v = i128::from(x);
        if v >= q / 2 {
            v - q
        } else {
            v
        }
    }

    /// True when `x` lies in the valid input domain
    /// `[0, 2^ellx) ∪ (q - 2^ellx, q)`.
    pub fn in_input_range(&self, x: Elem) -> bool {
        let bound = 1u64 << self.ellx;
        let q_minus_bound = (self.q() as u128 - u128::from(bound)) as u64;
        x < bound || x > q_minus_bound
    }

    /// Magnitude `xi` of an in-range element: `x` itself when positive,
    /// `q - x` when negative.
    pub fn magnitude(&self, x: Elem) -> Elem {
        if x < (1u64 << self.ellx) {
            x
        } else {
            self.neg(x)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(ell: u8, ellx: u8) -> RingParams {
        RingParams::with_default_frac(ell, ellx).unwrap()
    }

    #[test]
    fn wraparound_add() {
        let r = p(16, 8);
        assert_eq!(r.add(65535, 1), 0);
    }

    #[test]
    fn complement_sub() {
        let r = p(16, 8);
        assert_eq!(r.sub(0, 22), 65514);
    }

    #[test]
    fn mul_reduces() {
        let r = p(12, 4);
        // 3000 * 7 = 21000 = 5 * 4096 + 520
        assert_eq!(r.mul(3000, 7), 520);
    }

    #[test]
    fn rshift_examples() {
        let r = p(16, 8);
        assert_eq!(r.rshift(0b00010110, 1), 0b00001011);
        assert_eq!(r.rshift(0b00010110, 0), 0b00010110);
        assert_eq!(r.rshift(23, 4), 1);
    }

    #[test]
    #[should_panic]
    fn rshift_rejects_large_k() {
        let r = p(16, 8);
        r.rshift(1, 16);
    }

    #[test]
    fn effective_bit_length_examples() {
        let r = p(16, 8);
        assert_eq!(r.effective_bit_length(23), 5);
        assert_eq!(r.effective_bit_length(1), 1);
        assert_eq!(r.effective_bit_length(0), 0);
    }

    #[test]
    fn signed_round_trip_exhaustive() {
        let r = p(12, 4);
        for v in -15i128..16 {
            let e = r.encode_input(v).unwrap();
            assert_eq!(r.decode_signed(e), v);
        }
        assert!(r.encode_input(16).is_err());
        assert!(r.encode_input(-16).is_err());
    }

    #[test]
    fn negation_is_complement() {
        let r = p(16, 8);
        for v in 1i128..256 {
            let pos = r.encode_input(v).unwrap();
            let neg = r.encode_input(-v).unwrap();
            assert_eq!(neg, r.sub(0, pos));
        }
    }

    #[test]
    fn full_width_ring() {
        let r = RingParams::new(64, 32, 16).unwrap();
        assert_eq!(r.add(u64::MAX, 1), 0);
        assert_eq!(r.mul(u64::MAX, 2), u64::MAX - 1);
        assert_eq!(r.decode_signed(u64::MAX), -1);
    }

    #[test]
    fn params_invariants_enforced() {
        assert!(RingParams::new(9, 8, 4).is_err()); // ell <= ellx + 1
        assert!(RingParams::new(65, 8, 4).is_err());
        assert!(RingParams::new(16, 8, 5).is_err()); // frac > ellx/2
    }
}
