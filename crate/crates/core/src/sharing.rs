//! Additive secret sharing between P0/P1 (P2 share-less), seed-assisted
//! Beaver triples, constant sharing, and the replicated-sharing helpers used
//! by the three-party protocols.

use crate::prg::PrgStream;
use crate::ring::{Elem, RingParams};

/// One party's additive fragment. `x = frag(P0) + frag(P1) mod q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssShare {
    pub party: u8,
    pub frag: Elem,
}

/// Splits `x` into two additive fragments, the first drawn from `rand`.
pub fn share(params: &RingParams, x: Elem, rand: &mut PrgStream) -> (AssShare, AssShare) {
    let r = rand.draw(params);
    (
        AssShare { party: 0, frag: r },
        AssShare { party: 1, frag: params.sub(x, r) },
    )
}

pub fn reconstruct(params: &RingParams, s0: AssShare, s1: AssShare) -> Elem {
    debug_assert!(s0.party == 0 && s1.party == 1);
    params.add(s0.frag, s1.frag)
}

impl AssShare {
    pub fn add(&self, params: &RingParams, other: &AssShare) -> AssShare {
        debug_assert_eq!(self.party, other.party);
        AssShare { party: self.party, frag: params.add(self.frag, other.frag) }
    }

    pub fn sub(&self, params: &RingParams, other: &AssShare) -> AssShare {
        debug_assert_eq!(self.party, other.party);
        AssShare { party: self.party, frag: params.sub(self.frag, other.frag) }
    }

    pub fn scale(&self, params: &RingParams, c: Elem) -> AssShare {
        AssShare { party: self.party, frag: params.mul(c, self.frag) }
    }

    /// `[x] + c`: only party 0 adds the constant.
    pub fn add_const(&self, params: &RingParams, c: Elem) -> AssShare {
        let frag = if self.party == 0 { params.add(self.frag, c) } else { self.frag };
        AssShare { party: self.party, frag }
    }

    /// `[x] ^ c` for a binary secret and public bit: `[x] + c - 2c[x]`.
    pub fn xor_const(&self, params: &RingParams, c: u8) -> AssShare {
        if c == 0 {
            *self
        } else {
            // 1 - [x]
            AssShare { party: self.party, frag: self.frag }
                .scale(params, params.neg(1))
                .add_const(params, 1)
        }
    }
}

/// Shares a value both endpoints of `rand`'s seed already know, without
/// communication: party 0 takes the next stream element, party 1 the
/// difference.
pub fn share_constant(params: &RingParams, c: Elem, rand: &mut PrgStream) -> (AssShare, AssShare) {
    let r = rand.draw(params);
    (
        AssShare { party: 0, frag: r },
        AssShare { party: 1, frag: params.sub(c, r) },
    )
}

/// One party's fragments of a Beaver triple `(a, b, c)` with `c = a*b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TripleFrag {
    pub a: Elem,
    pub b: Elem,
    pub c: Elem,
}

/// Output of the seed-assisted triple generation: per-party fragments plus
/// the corrections the assisting party must send. `corrections[i]` completes
/// triple `i` and is destined for party `dest`.
#[derive(Debug)]
pub struct TripleGen {
    pub p0: Vec<TripleFrag>,
    pub p1: Vec<TripleFrag>,
    pub corrections: Vec<(u8, Elem)>,
}

/// Derives `count` triples from the two pairwise streams. P0's fragments of
/// `a`, `b` (and `c` on regular slots) come from `s02`, P1's from `s12`; the
/// assisting party holds both streams and computes the missing `c` fragment
/// per slot. With `mirror_half`, even slots send their correction to P0 and
/// odd slots to P1, balancing the two return channels; otherwise every
/// correction goes to P1.
pub fn gen_triples_seed_assisted(
    params: &RingParams,
    count: usize,
    s02: &mut PrgStream,
    s12: &mut PrgStream,
    mirror_half: bool,
) -> TripleGen {
    let mut p0 = Vec::with_capacity(count);
    let mut p1 = Vec::with_capacity(count);
    let mut corrections = Vec::with_capacity(count);
    let a0: Vec<Elem> = (0..count).map(|_| s02.draw(params)).collect();
    let b0: Vec<Elem> = (0..count).map(|_| s02.draw(params)).collect();
    let a1: Vec<Elem> = (0..count).map(|_| s12.draw(params)).collect();
    let b1: Vec<Elem> = (0..count).map(|_| s12.draw(params)).collect();
    for i in 0..count {
        let mirrored = mirror_half && i % 2 == 0;
        let c = params.mul(params.add(a0[i], a1[i]), params.add(b0[i], b1[i]));
        if mirrored {
            let c1 = s12.draw(params);
            let c0 = params.sub(c, c1);
            p0.push(TripleFrag { a: a0[i], b: b0[i], c: c0 });
            p1.push(TripleFrag { a: a1[i], b: b1[i], c: c1 });
            corrections.push((0, c0));
        } else {
            let c0 = s02.draw(params);
            let c1 = params.sub(c, c0);
            p0.push(TripleFrag { a: a0[i], b: b0[i], c: c0 });
            p1.push(TripleFrag { a: a1[i], b: b1[i], c: c1 });
            corrections.push((1, c1));
        }
    }
    TripleGen { p0, p1, corrections }
}

/// Local step of a Beaver multiplication once `d = x - a` and `e = y - b`
/// are public: `[x*y] = d*e + d[b] + e[a] + [c]`, the `d*e` term added by
/// party 0 only.
pub fn beaver_combine(
    params: &RingParams,
    party: u8,
    triple: &TripleFrag,
    d: Elem,
    e: Elem,
) -> Elem {
    let mut out = params.add(
        params.mul(d, triple.b),
        params.add(params.mul(e, triple.a), triple.c),
    );
    if party == 0 {
        out = params.add(out, params.mul(d, e));
    }
    out
}

/// Full two-party Beaver multiplication over local share pairs; test and
/// client-side helper.
pub fn beaver_mul(
    params: &RingParams,
    x: (AssShare, AssShare),
    y: (AssShare, AssShare),
    t0: &TripleFrag,
    t1: &TripleFrag,
) -> (AssShare, AssShare) {
    let d = params.add(params.sub(x.0.frag, t0.a), params.sub(x.1.frag, t1.a));
    let e = params.add(params.sub(y.0.frag, t0.b), params.sub(y.1.frag, t1.b));
    (
        AssShare { party: 0, frag: beaver_combine(params, 0, t0, d, e) },
        AssShare { party: 1, frag: beaver_combine(params, 1, t1, d, e) },
    )
}

// --- replicated sharing -----------------------------------------------------
//
// x = x0 + x1 + x2; party p holds fragments (x_p, x_{p+1 mod 3}).

/// The pair of fragments one party holds under 2-out-of-3 replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RssShare {
    /// `frags[0]` is fragment `p`, `frags[1]` is fragment `p+1 mod 3`.
    pub frags: [Elem; 2],
}

impl RssShare {
    pub fn scale(&self, params: &RingParams, c: Elem) -> RssShare {
        RssShare { frags: [params.mul(c, self.frags[0]), params.mul(c, self.frags[1])] }
    }

    /// Adds a public constant onto fragment 0 (both of its holders do this).
    pub fn add_const_frag0(&self, params: &RingParams, party: u8, c: Elem) -> RssShare {
        let mut f = self.frags;
        if party == 0 {
            f[0] = params.add(f[0], c);
        } else if party == 2 {
            f[1] = params.add(f[1], c);
        }
        RssShare { frags: f }
    }
}

/// Splits `x` into a replicated sharing; returns the three per-party views.
pub fn rss_split(params: &RingParams, x: Elem, rand: &mut PrgStream) -> [RssShare; 3] {
    let x0 = rand.draw(params);
    let x1 = rand.draw(params);
    let x2 = params.sub(params.sub(x, x0), x1);
    [
        RssShare { frags: [x0, x1] },
        RssShare { frags: [x1, x2] },
        RssShare { frags: [x2, x0] },
    ]
}

/// Reconstructs from the three per-party views, checking replication
/// consistency between adjacent parties.
pub fn rss_reconstruct(params: &RingParams, views: &[RssShare; 3]) -> Elem {
    for p in 0..3 {
        assert_eq!(
            views[p].frags[1],
            views[(p + 1) % 3].frags[0],
            "replication mismatch between parties {p} and {}",
            (p + 1) % 3
        );
    }
    params.add(params.add(views[0].frags[0], views[1].frags[0]), views[2].frags[0])
}

/// Party `p`'s fragment of a (3,3) sharing of zero: `z_p = a_p - a_{p+1}`,
/// with `a_p` drawn from the pairwise stream shared by parties `p` and `p-1`
/// and `a_{p+1}` from the one shared by `p` and `p+1`.
pub fn rss_zero33_frag(
    params: &RingParams,
    own_prev: &mut PrgStream,
    own_next: &mut PrgStream,
) -> Elem {
    let a_own = own_prev.draw(params);
    let a_next = own_next.draw(params);
    params.sub(a_own, a_next)
}

/// Both fragments of a (2,3) sharing of zero, derived from the common
/// three-way stream. Every party draws the same three elements.
pub fn rss_zero23_frags(params: &RingParams, party: u8, s012: &mut PrgStream) -> [Elem; 2] {
    let a: Vec<Elem> = (0..3).map(|_| s012.draw(params)).collect();
    let z = |p: usize| params.sub(a[p], a[(p + 2) % 3]);
    let p = usize::from(party);
    [z(p), z((p + 1) % 3)]
}

/// (2,3) sharing of a bit `t` known to P0 and P1: a (2,3) zero sharing with
/// `t` folded into fragment 1.
pub fn rss_share_t(params: &RingParams, party: u8, s012: &mut PrgStream, t: u8) -> RssShare {
    let mut frags = rss_zero23_frags(params, party, s012);
    let t = Elem::from(t);
    match party {
        0 => frags[1] = params.add(frags[1], t),
        1 => frags[0] = params.add(frags[0], t),
        _ => {}
    }
    RssShare { frags }
}
