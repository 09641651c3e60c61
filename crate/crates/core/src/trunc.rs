//! Share-local probabilistic truncation and executable forms of its error
//! theory.
//!
//! Both parties shift their fragments locally, without communication:
//! party 0 keeps `rShift(f0, k)`, party 1 keeps `q - rShift(q - f1, k)`.
//! The reconstruction differs from the exact (sign-aware) shift by at most
//! one, in a sign-directed way, except when the random fragment lands in a
//! small wrap region. [`classify`] predicts the reconstructed value exactly
//! from the fragment split, and [`pattern_check`] validates the shape of the
//! whole truncation array `TRC(x, 1..=ellx)`.

use crate::error::{Error, Result};
use crate::ring::{Elem, RingParams};

/// Outcome of one probabilistic truncation relative to the exact shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncClass {
    Exact,
    PlusOne,
    MinusOne,
    /// The random fragment falls where the error analysis breaks down; the
    /// reconstructed value is unconstrained.
    WrapFailure,
}

/// Predicted truncation outcome: class plus the exact reconstructed value
/// (`value` is meaningless for [`TruncClass::WrapFailure`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncPrediction {
    pub class: TruncClass,
    pub value: Elem,
}

/// Truncates one additive fragment in place. `party` is 0 or 1.
#[inline]
pub fn trunc_frag(params: &RingParams, party: u8, frag: Elem, k: u32) -> Elem {
    debug_assert!(k <= u32::from(params.ellx()), "trunc shift exceeds ellx");
    if k == 0 {
        return frag;
    }
    match party {
        0 => params.rshift(frag, k),
        1 => params.neg(params.rshift(params.neg(frag), k)),
        _ => panic!("trunc_frag is a two-party operation"),
    }
}

/// Reconstructs `TRC(x, k)` from the fragment split `([x]_0 = r, [x]_1 = x - r)`.
pub fn trunc_reconstruct(params: &RingParams, x: Elem, r: Elem, k: u32) -> Elem {
    let f1 = params.sub(x, r);
    params.add(trunc_frag(params, 0, r, k), trunc_frag(params, 1, f1, k))
}

/// Exact sign-aware truncation: `rShift(xi, k)` for positive inputs,
/// `q - rShift(xi, k)` for negative ones. Rejects out-of-range `x`.
pub fn exact_trunc(params: &RingParams, x: Elem, k: u32) -> Result<Elem> {
    if !params.in_input_range(x) {
        return Err(Error::Range(format!("{x} outside the ellx input domain")));
    }
    if k == 0 {
        return Ok(x);
    }
    let xi = params.magnitude(x);
    let shifted = params.rshift(xi, k);
    if x == xi {
        Ok(shifted)
    } else {
        Ok(params.neg(shifted))
    }
}

/// Predicts the outcome of `trunc_reconstruct(x, r, k)` from the fragment
/// split alone, without running the truncation.
///
/// For positive `x` the split is well behaved iff `r >= xi`, and the result
/// gains `+1` exactly when `r mod 2^k < xi mod 2^k`. For negative `x` it is
/// well behaved iff `r + xi < q`, and loses `1` exactly when
/// `(r mod 2^k) + (xi mod 2^k) >= 2^k`.
pub fn classify(params: &RingParams, x: Elem, r: Elem, k: u32) -> TruncPrediction {
    debug_assert!(params.in_input_range(x));
    let xi = params.magnitude(x);
    let positive = x == xi;
    if k == 0 {
        return TruncPrediction { class: TruncClass::Exact, value: x };
    }
    let kmask = (1u64 << k) - 1;
    let r_lo = r & kmask;
    let xi_lo = xi & kmask;
    let xi_hi = params.rshift(xi, k);
    if positive {
        if r < xi {
            return TruncPrediction { class: TruncClass::WrapFailure, value: 0 };
        }
        if r_lo < xi_lo {
            TruncPrediction { class: TruncClass::PlusOne, value: params.add(xi_hi, 1) }
        } else {
            TruncPrediction { class: TruncClass::Exact, value: xi_hi }
        }
    } else {
        if (u128::from(r) + u128::from(xi)) as i128 >= params.q() {
            return TruncPrediction { class: TruncClass::WrapFailure, value: 0 };
        }
        if r_lo + xi_lo >= kmask + 1 {
            TruncPrediction {
                class: TruncClass::MinusOne,
                value: params.sub(params.neg(xi_hi), 1),
            }
        } else {
            TruncPrediction { class: TruncClass::Exact, value: params.neg(xi_hi) }
        }
    }
}

/// Verdict of [`pattern_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternVerdict {
    /// The array is a prefix of large values, a contiguous run of `1` (or
    /// `q-1`), then zeros, and the run covers `lambda - 1` or `lambda`.
    /// `run` holds the inclusive shift-count bounds of the run.
    Ok { run: (u32, u32) },
    /// The split lands in the wrap region; no shape is guaranteed.
    WrapRegion,
    Violation { index: u32, value: Elem },
}

/// Computes `{TRC(x, 0..=ellx)}` under the fixed split `r` (slot 0 is the
/// untruncated value) and checks the shape guaranteed outside the wrap
/// region. `x` must be non-zero.
pub fn pattern_check(params: &RingParams, x: Elem, r: Elem) -> PatternVerdict {
    assert!(x != 0, "pattern is defined for non-zero inputs");
    assert!(params.in_input_range(x));
    let xi = params.magnitude(x);
    let positive = x == xi;
    let in_wrap = if positive {
        r < xi
    } else {
        (u128::from(r) + u128::from(xi)) as i128 >= params.q()
    };
    if in_wrap {
        return PatternVerdict::WrapRegion;
    }
    let marker = if positive { 1 } else { params.neg(1) };
    let ellx = u32::from(params.ellx());
    let arr: Vec<Elem> = (0..=ellx)
        .map(|k| trunc_reconstruct(params, x, r, k))
        .collect();
    // prefix of values other than {0, marker}, then markers, then zeros
    let mut run_start = None;
    let mut run_end = 0u32;
    let mut zeros = false;
    for (k, &v) in arr.iter().enumerate() {
        let k = k as u32;
        if zeros {
            if v != 0 {
                return PatternVerdict::Violation { index: k, value: v };
            }
        } else if v == marker {
            if run_start.is_none() {
                run_start = Some(k);
            }
            run_end = k;
        } else if v == 0 {
            if run_start.is_none() {
                return PatternVerdict::Violation { index: k, value: v };
            }
            zeros = true;
        } else if run_start.is_some() {
            return PatternVerdict::Violation { index: k, value: v };
        }
    }
    let Some(start) = run_start else {
        return PatternVerdict::Violation { index: ellx, value: arr[arr.len() - 1] };
    };
    // the run must cover shift count lambda-1 or lambda
    let lambda = params.effective_bit_length(xi);
    if (start <= lambda - 1 && lambda - 1 <= run_end) || (start <= lambda && lambda <= run_end) {
        PatternVerdict::Ok { run: (start, run_end) }
    } else {
        PatternVerdict::Violation { index: start, value: marker }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(ell: u8, ellx: u8) -> RingParams {
        RingParams::new(ell, ellx, 0).unwrap()
    }

    #[test]
    fn zero_fragment_stays_zero() {
        let r = p(16, 8);
        for k in 0..=8 {
            assert_eq!(trunc_frag(&r, 1, 0, k), 0);
        }
    }

    // Rows of the worked truncation tables at ell = 16, x = ±0b00010110,
    // with the split chosen per the error predicates row by row.
    #[test]
    fn error_free_rows() {
        let r = p(16, 8);
        let x = 0b0001_0110u64;
        // r = 255 keeps every k error-free for the positive input
        let expect = [11, 5, 2, 1, 0, 0, 0, 0];
        for k in 1..=8u32 {
            assert_eq!(trunc_reconstruct(&r, x, 255, k), expect[k as usize - 1]);
        }
        // r = 0 keeps every k error-free for the negative input
        let neg = r.neg(x);
        for k in 1..=8u32 {
            let want = if expect[k as usize - 1] == 0 {
                0
            } else {
                r.neg(expect[k as usize - 1])
            };
            assert_eq!(trunc_reconstruct(&r, neg, 0, k), want);
        }
    }

    #[test]
    fn single_split_reproduces_error_run() {
        // One fixed split exhibiting errors at k = 5, 6 and the marker run 4..=6.
        let r = p(16, 8);
        let x = 0b0001_0110u64;
        let split = 70;
        let got: Vec<Elem> = (0..=8).map(|k| trunc_reconstruct(&r, x, split, k)).collect();
        assert_eq!(got, vec![22, 11, 5, 2, 1, 1, 1, 0, 0]);
        match pattern_check(&r, x, split) {
            PatternVerdict::Ok { run } => assert_eq!(run, (4, 6)),
            other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn exact_oracle_examples() {
        let r = p(16, 8);
        let x = r.neg(0b0001_0110);
        assert_eq!(exact_trunc(&r, x, 4).unwrap(), r.neg(1));
        assert_eq!(exact_trunc(&r, 0, 3).unwrap(), 0);
        assert!(exact_trunc(&r, 1 << 12, 1).is_err());
    }

    #[test]
    fn exact_oracle_matches_floor_division() {
        let r = p(12, 4);
        for v in -15i128..16 {
            let x = r.encode_input(v).unwrap();
            for k in 0..=4u32 {
                let want = if v >= 0 {
                    v >> k
                } else {
                    -((-v) >> k)
                };
                assert_eq!(
                    r.decode_signed(exact_trunc(&r, x, k).unwrap()),
                    want,
                    "v={v} k={k}"
                );
            }
        }
    }

    #[test]
    fn classify_boundary_is_exact() {
        let r = p(12, 4);
        // r' == xi' on a positive input must classify exact
        let x = 6u64; // xi' at k=2 is 2
        let split = 2 + 8; // low bits equal xi low bits, r >= xi
        let pred = classify(&r, x, split, 2);
        assert_eq!(pred.class, TruncClass::Exact);
        assert_eq!(trunc_reconstruct(&r, x, split, 2), pred.value);
    }

    #[test]
    fn classify_matches_reconstruction_exhaustively() {
        let r = p(12, 4);
        let q = 1u64 << 12;
        for v in -15i128..16 {
            let x = r.encode_input(v).unwrap();
            for split in 0..q {
                for k in 1..=4u32 {
                    let pred = classify(&r, x, split, k);
                    if pred.class != TruncClass::WrapFailure {
                        assert_eq!(
                            trunc_reconstruct(&r, x, split, k),
                            pred.value,
                            "v={v} r={split} k={k}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn wrap_fraction_bounded() {
        let r = p(12, 4);
        let q = 1u64 << 12;
        // fraction of failing splits per x is at most 2^(ellx + 1 - ell)
        let bound = (q as f64) * 2f64.powi(4 + 1 - 12);
        for v in -15i128..16 {
            let x = r.encode_input(v).unwrap();
            let failures = (0..q)
                .filter(|&split| classify(&r, x, split, 1).class == TruncClass::WrapFailure)
                .count();
            assert!((failures as f64) <= bound, "v={v} failures={failures}");
        }
    }
}
