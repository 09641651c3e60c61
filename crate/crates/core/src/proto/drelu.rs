//! The masked truncation-array core shared by every sign-based protocol.
//!
//! For a share pair of `x`, P0 and P1 locally build the array
//! `u = [u_*, u_0, u_1..u_ellx]` with `u_* = (-1)^t`, `u_0 = (-1)^t * x` and
//! `u_i = TRC((-1)^t * x, i)`, fold it into
//! `v_* = u_* + 3*u_0 - 1`, `v_i = (sum_{k>=i} u_k) - 1`, then mask each slot
//! with a fresh non-zero element and shuffle before sending to P2. P2 learns
//! only whether some slot reconstructs to zero, which equals the sign test on
//! the `t`-negated input.

use crate::prg::PrgStream;
use crate::ring::{Elem, RingParams};
use crate::trunc::trunc_frag;

/// How the flip bit of one core is sourced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipBit {
    /// Drawn from the core's own stream (standalone sign test).
    Internal,
    /// Supplied by the caller (replicated-sharing wrapper).
    External(u8),
    /// No flip: the comparison is deliberately unblinded.
    None,
}

/// Per-core randomness; identical on P0 and P1.
#[derive(Debug, Clone)]
pub struct CoreDraws {
    pub masks: Vec<Elem>,
    pub t: u8,
    pub perm: Vec<u16>,
    pub const_frag: Elem,
}

/// Test hook: overrides individual core draws in the simulator.
#[derive(Debug, Clone, Default)]
pub struct CorePins {
    pub t: Option<u8>,
    pub masks: Option<Vec<Elem>>,
    pub perm: Option<Vec<u16>>,
    pub const_frag: Option<Elem>,
}

/// Draws one core's randomness from the pairwise stream, in the fixed order
/// masks, flip bit, shuffle, constant fragment.
pub fn core_draws(
    params: &RingParams,
    stream: &mut PrgStream,
    flip: FlipBit,
    pins: Option<&CorePins>,
) -> CoreDraws {
    let len = usize::from(params.ellx()) + 2;
    let mut masks: Vec<Elem> = (0..len).map(|_| stream.draw_nonzero(params)).collect();
    let mut t = match flip {
        FlipBit::Internal => stream.draw_bit(),
        FlipBit::External(b) => b & 1,
        FlipBit::None => 0,
    };
    let mut perm = stream.draw_perm(len);
    let mut const_frag = stream.draw(params);
    if let Some(p) = pins {
        if let Some(pm) = &p.masks {
            assert_eq!(pm.len(), len, "pinned mask count");
            masks = pm.clone();
        }
        if let Some(pt) = p.t {
            if flip != FlipBit::None {
                t = pt & 1;
            }
        }
        if let Some(pp) = &p.perm {
            assert_eq!(pp.len(), len, "pinned permutation length");
            perm = pp.clone();
        }
        if let Some(cf) = p.const_frag {
            const_frag = cf;
        }
    }
    CoreDraws { masks, t, perm, const_frag }
}

/// One party's view of a finished core: its fragments of the `u`, `v` and
/// `w` arrays plus the draws. Kept for transcript assembly.
#[derive(Debug, Clone)]
pub struct DreluCoreState {
    pub t: u8,
    pub masks: Vec<Elem>,
    pub perm: Vec<u16>,
    pub u: Vec<Elem>,
    pub v: Vec<Elem>,
    pub w: Vec<Elem>,
}

/// Builds one party's `w` fragment array from its fragment of `x`.
pub fn core_build(params: &RingParams, party: u8, x_frag: Elem, draws: &CoreDraws) -> DreluCoreState {
    let ellx = usize::from(params.ellx());
    let len = ellx + 2;
    let xf = if draws.t == 1 { params.neg(x_frag) } else { x_frag };
    // sign of the constant slot: (-1)^t
    let one_t = if draws.t == 1 { params.neg(1) } else { 1 };

    let mut u = vec![0; len];
    u[0] = if party == 0 { draws.const_frag } else { params.sub(one_t, draws.const_frag) };
    u[1] = xf;
    for i in 1..=ellx {
        u[1 + i] = trunc_frag(params, party, xf, i as u32);
    }

    let mut v = vec![0; len];
    let mut vstar = params.add(u[0], params.mul(3, u[1]));
    if party == 0 {
        vstar = params.sub(vstar, 1);
    }
    v[0] = vstar;
    let mut acc: Elem = 0;
    for i in (0..=ellx).rev() {
        acc = params.add(acc, u[1 + i]);
        v[1 + i] = if party == 0 { params.sub(acc, 1) } else { acc };
    }

    let masked: Vec<Elem> = (0..len).map(|j| params.mul(draws.masks[j], v[j])).collect();
    let w = draws.perm.iter().map(|&src| masked[usize::from(src)]).collect();

    DreluCoreState { t: draws.t, masks: draws.masks.clone(), perm: draws.perm.clone(), u, v, w }
}

/// P2's half of a core: reconstructs the masked array and reports whether it
/// contains a zero.
pub fn core_verdict(params: &RingParams, w0: &[Elem], w1: &[Elem]) -> bool {
    debug_assert_eq!(w0.len(), w1.len());
    w0.iter().zip(w1).any(|(&a, &b)| params.add(a, b) == 0)
}

/// The discarded first-cut sign test: one slot per truncation, each
/// `TRC(x, i) - 1`, masked and shuffled without the summation fold. Kept as
/// a reference for tests only; its array leaks the input range through runs
/// of equal slots and it misclassifies inputs of magnitude one.
pub fn strawman_drelu(
    params: &RingParams,
    x: Elem,
    split: Elem,
    masks: &[Elem],
) -> (Vec<Elem>, bool) {
    let ellx = usize::from(params.ellx());
    assert_eq!(masks.len(), ellx);
    let f0 = split;
    let f1 = params.sub(x, split);
    let mut arr = Vec::with_capacity(ellx);
    for i in 1..=ellx {
        let t0 = trunc_frag(params, 0, f0, i as u32);
        let t1 = trunc_frag(params, 1, f1, i as u32);
        let u = params.sub(params.add(t0, t1), 1);
        arr.push(params.mul(masks[i - 1], u));
    }
    let verdict = arr.iter().any(|&w| w == 0);
    (arr, verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> RingParams {
        RingParams::new(16, 8, 4).unwrap()
    }

    #[test]
    fn strawman_single_zero_without_errors() {
        let p = params();
        let masks = vec![1; 8];
        // split 255 keeps every truncation of 22 error-free
        let (arr, verdict) = strawman_drelu(&p, 22, 255, &masks);
        assert!(verdict);
        assert_eq!(arr.iter().filter(|&&w| w == 0).count(), 1);
    }

    #[test]
    fn strawman_consecutive_zeros_leak() {
        let p = params();
        let masks = vec![1; 8];
        // split 70 induces +1 errors at shifts 5 and 6, so three slots of the
        // unfolded array collapse to zero and expose the input range
        let (arr, _) = strawman_drelu(&p, 22, 70, &masks);
        let zeros: Vec<usize> = arr
            .iter()
            .enumerate()
            .filter(|(_, &w)| w == 0)
            .map(|(i, _)| i + 1)
            .collect();
        assert_eq!(zeros, vec![4, 5, 6]);
    }

    #[test]
    fn strawman_misclassifies_one() {
        let p = params();
        let masks = vec![3; 8];
        // error-free truncations of 1 are all zero, so the array has no zero
        // slot after subtracting one and the verdict is wrong
        let (_, verdict) = strawman_drelu(&p, 1, 255, &masks);
        assert!(!verdict);
    }
}
