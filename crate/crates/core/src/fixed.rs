//! Fixed-point codec for decimal inputs: the low `frac_bits` bits carry the
//! fractional part, negatives are in complement form, and a product is
//! rescaled with a sign-aware truncation by `frac_bits`.

use crate::error::{Error, Result};
use crate::ring::{Elem, RingParams};

/// Encodes a decimal into fixed-point complement form. The scaled value must
/// fit the `ellx`-bit input domain; non-representable decimals are rounded to
/// the nearest representable one.
pub fn fx_encode(params: &RingParams, v: f64) -> Result<Elem> {
    if !v.is_finite() {
        return Err(Error::Range(format!("{v} is not finite")));
    }
    let scale = (1u64 << params.frac_bits()) as f64;
    let scaled = (v * scale).round();
    if scaled.abs() >= (1u64 << params.ellx()) as f64 {
        return Err(Error::Range(format!(
            "{v} not representable at ellx={} frac_bits={}",
            params.ellx(),
            params.frac_bits()
        )));
    }
    params.encode_input(scaled as i128)
}

/// Decodes a fixed-point element back to a decimal.
pub fn fx_decode(params: &RingParams, x: Elem) -> f64 {
    let scale = (1u64 << params.frac_bits()) as f64;
    params.decode_signed(x) as f64 / scale
}

/// Plaintext reference of a fixed-point multiplication: exact ring product
/// followed by a sign-aware truncation by `frac_bits`. The product is read
/// under the midpoint rule, so operands may use the full `ellx` precision.
pub fn fx_mul_rescale(params: &RingParams, a: Elem, b: Elem) -> Elem {
    let prod = params.mul(a, b);
    let k = u32::from(params.frac_bits());
    if k == 0 {
        return prod;
    }
    if params.decode_signed(prod) >= 0 {
        params.rshift(prod, k)
    } else {
        params.neg(params.rshift(params.neg(prod), k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_params() -> RingParams {
        RingParams::new(40, 16, 8).unwrap()
    }

    #[test]
    fn decimal_encodings() {
        let p = table_params();
        assert_eq!(fx_encode(&p, 10.82421875).unwrap(), 0b00001010_11010011);
        assert_eq!(fx_encode(&p, 6.2265625).unwrap(), 0b00000110_00111010);
        assert_eq!(fx_encode(&p, 0.0).unwrap(), 0);
        let gamma = fx_encode(&p, -6.2265625).unwrap();
        assert_eq!(gamma, p.neg(0b00000110_00111010));
        assert_eq!(fx_decode(&p, gamma), -6.2265625);
    }

    #[test]
    fn rescaled_products() {
        let p = table_params();
        let alpha = fx_encode(&p, 10.82421875).unwrap();
        let beta = fx_encode(&p, 6.2265625).unwrap();
        let gamma = fx_encode(&p, -6.2265625).unwrap();
        let pos = fx_mul_rescale(&p, alpha, beta);
        assert_eq!(fx_decode(&p, pos), 67.39453125);
        let neg = fx_mul_rescale(&p, alpha, gamma);
        assert_eq!(fx_decode(&p, neg), -67.39453125);
        assert_eq!(neg, p.neg(pos));
    }

    #[test]
    fn identity_after_rescale() {
        let p = table_params();
        let one = fx_encode(&p, 1.0).unwrap();
        for v in [0.5f64, -3.25, 17.0, -0.00390625] {
            let x = fx_encode(&p, v).unwrap();
            assert_eq!(fx_mul_rescale(&p, x, one), x);
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let p = table_params();
        assert!(fx_encode(&p, 300.0).is_err());
        assert!(fx_encode(&p, f64::NAN).is_err());
    }
}
