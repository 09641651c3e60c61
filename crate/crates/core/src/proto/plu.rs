//! Piecewise-linear unit engine: `m + 1` parallel sign tests on the
//! breakpoint differences, `m + 2` triples sharing one `x`-mask, and a
//! single affine assembly of the segment terms.
//!
//! P2's round-2 frame carries, per instance and slot: the Beaver opening
//! `d_j` of the slot verdict, a fresh additive share of that verdict (used
//! by the constant-coefficient terms), and the triple corrections for the
//! slots whose seed-held `c` half lives on the other channel. Even slots are
//! corrected toward P0, odd slots toward P1.

use super::drelu::{core_build, core_draws, core_verdict, DreluCoreState, FlipBit};
use super::{map_indices, EngineCtx, Kind, PartyEngine, PartyOutputs, PluSpec};
use crate::error::{Error, Result};
use crate::prg::{SeedLabel, LANE_P2, LANE_TRIPLE};
use crate::ring::Elem;
use crate::sharing::{beaver_combine, TripleFrag};
use crate::transport::Frame;

struct P01Instance {
    x: Elem,
    cores: Vec<DreluCoreState>,
    /// Shared `x` mask fragment.
    a: Elem,
    /// Per-slot verdict-mask fragments.
    bs: Vec<Elem>,
    /// Seed-held `c` halves for the slots corrected toward the other party.
    cs: Vec<Option<Elem>>,
    e_own: Elem,
}

pub struct PluEngine {
    ctx: EngineCtx,
    spec: PluSpec,
    party: u8,
    b: usize,
    inst: Vec<P01Instance>,
    e_other: Vec<Elem>,
    /// Received round-2 block per instance: `d_j`, verdict shares, corrections.
    resp: Vec<Elem>,
    w_from: [Option<Vec<Elem>>; 2],
    verdicts: Vec<Vec<bool>>,
}

impl PluEngine {
    pub fn new(ctx: EngineCtx, kind: Kind, party: u8, inputs: Vec<Vec<Elem>>) -> Result<Self> {
        let Kind::Plu { spec } = kind else {
            return Err(Error::Request("plu engine needs a piecewise spec".into()));
        };
        spec.validate(&ctx.params)?;
        let b = inputs.len();
        let mut engine = Self {
            ctx,
            spec,
            party,
            b,
            inst: Vec::new(),
            e_other: Vec::new(),
            resp: Vec::new(),
            w_from: [None, None],
            verdicts: Vec::new(),
        };
        if party != 2 {
            engine.build_instances(inputs);
        }
        Ok(engine)
    }

    fn slots(&self) -> usize {
        self.spec.slots()
    }

    /// Per-instance element count of P2's round-2 block for `party`.
    fn resp_width(&self, party: u8) -> usize {
        let k = self.slots();
        if party == 0 {
            2 * k + k.div_ceil(2)
        } else {
            2 * k + k / 2
        }
    }

    fn build_instances(&mut self, inputs: Vec<Vec<Elem>>) {
        let ctx = &self.ctx;
        let params = ctx.params;
        let party = self.party;
        let spec = self.spec.clone();
        let label = if party == 0 { SeedLabel::S02 } else { SeedLabel::S12 };
        self.inst = map_indices(ctx.exec, inputs.len(), |idx| {
            let x = inputs[idx][0];
            let cores: Vec<DreluCoreState> = spec
                .gammas
                .iter()
                .enumerate()
                .map(|(j, &gamma)| {
                    let mut z = x;
                    if party == 0 {
                        z = params.sub(z, gamma);
                    }
                    let mut s01 = ctx.stream(SeedLabel::S01, idx, j as u16);
                    let draws = core_draws(&params, &mut s01, FlipBit::Internal, ctx.pins.as_ref());
                    core_build(&params, party, z, &draws)
                })
                .collect();
            let k = spec.slots();
            let mut ts = ctx.stream(label, idx, LANE_TRIPLE);
            let a = ts.draw(&params);
            let bs: Vec<Elem> = (0..k).map(|_| ts.draw(&params)).collect();
            let mut cs = vec![None; k];
            for (j, slot) in cs.iter_mut().enumerate() {
                // P0 holds the seed half of odd slots, P1 of even slots
                if (party == 0 && j % 2 == 1) || (party == 1 && j % 2 == 0) {
                    *slot = Some(ts.draw(&params));
                }
            }
            let e_own = params.sub(x, a);
            P01Instance { x, cores, a, bs, cs, e_own }
        });
    }
}

impl PartyEngine for PluEngine {
    fn sends(&mut self, round: u8) -> Result<Vec<(u8, Frame)>> {
        match (round, self.party) {
            (1, p @ (0 | 1)) => {
                let w: Vec<Elem> = self
                    .inst
                    .iter()
                    .flat_map(|i| i.cores.iter().flat_map(|c| c.w.iter().copied()))
                    .collect();
                let e: Vec<Elem> = self.inst.iter().map(|i| i.e_own).collect();
                Ok(vec![
                    (2, self.ctx.frame(p, 1, w)),
                    (1 - p, self.ctx.frame(p, 1, e)),
                ])
            }
            (2, 2) => {
                let params = self.ctx.params;
                let arr = usize::from(params.ellx()) + 2;
                let k = self.slots();
                let per = (k - 1) * arr;
                let (Some(w0), Some(w1)) = (&self.w_from[0], &self.w_from[1]) else {
                    return Err(Error::Session("missing round-1 arrays".into()));
                };
                if w0.len() != w1.len() || w0.len() % per != 0 {
                    return Err(Error::Frame("mismatched array lengths".into()));
                }
                let b = w0.len() / per;
                self.verdicts = map_indices(self.ctx.exec, b, |i| {
                    (0..k - 1)
                        .map(|j| {
                            let lo = i * per + j * arr;
                            core_verdict(&params, &w0[lo..lo + arr], &w1[lo..lo + arr])
                        })
                        .collect()
                });
                let mut to0 = Vec::with_capacity(b * self.resp_width(0));
                let mut to1 = Vec::with_capacity(b * self.resp_width(1));
                for (i, vs) in self.verdicts.iter().enumerate() {
                    // slot verdicts: bottom is the first sign test, middle
                    // slots xor adjacent tests, top repeats the last test
                    let mut slot_v = Vec::with_capacity(k);
                    slot_v.push(Elem::from(vs[0]));
                    for j in 1..k - 1 {
                        slot_v.push(Elem::from(vs[j - 1] ^ vs[j]));
                    }
                    slot_v.push(Elem::from(vs[k - 2]));

                    let mut s02 = self.ctx.stream(SeedLabel::S02, i, LANE_TRIPLE);
                    let mut s12 = self.ctx.stream(SeedLabel::S12, i, LANE_TRIPLE);
                    let a0 = s02.draw(&params);
                    let a1 = s12.draw(&params);
                    let b0: Vec<Elem> = (0..k).map(|_| s02.draw(&params)).collect();
                    let b1: Vec<Elem> = (0..k).map(|_| s12.draw(&params)).collect();
                    let asum = params.add(a0, a1);
                    let mut s2 = self.ctx.stream(SeedLabel::S2, i, LANE_P2);

                    let mut d = Vec::with_capacity(k);
                    let mut vs0 = Vec::with_capacity(k);
                    let mut vs1 = Vec::with_capacity(k);
                    let mut corr0 = Vec::new();
                    let mut corr1 = Vec::new();
                    for j in 0..k {
                        let bsum = params.add(b0[j], b1[j]);
                        d.push(params.sub(slot_v[j], bsum));
                        let r = s2.draw(&params);
                        vs0.push(r);
                        vs1.push(params.sub(slot_v[j], r));
                        let c = params.mul(asum, bsum);
                        if j % 2 == 0 {
                            // seed half on s12, correction toward P0
                            let c1 = s12.draw(&params);
                            corr0.push(params.sub(c, c1));
                        } else {
                            let c0 = s02.draw(&params);
                            corr1.push(params.sub(c, c0));
                        }
                    }
                    to0.extend_from_slice(&d);
                    to0.extend_from_slice(&vs0);
                    to0.extend_from_slice(&corr0);
                    to1.extend_from_slice(&d);
                    to1.extend_from_slice(&vs1);
                    to1.extend_from_slice(&corr1);
                }
                Ok(vec![
                    (0, self.ctx.frame(2, 2, to0)),
                    (1, self.ctx.frame(2, 2, to1)),
                ])
            }
            _ => Ok(vec![]),
        }
    }

    fn receive(&mut self, frame: Frame) -> Result<()> {
        let sender = frame.header.sender;
        let round = frame.header.round;
        match (self.party, round, sender) {
            (2, 1, 0) => self.w_from[0] = Some(frame.expect_elems()?.to_vec()),
            (2, 1, 1) => self.w_from[1] = Some(frame.expect_elems()?.to_vec()),
            (0, 1, 1) | (1, 1, 0) => {
                let elems = frame.expect_elems()?;
                if elems.len() != self.b {
                    return Err(Error::Frame("bad opening count".into()));
                }
                self.e_other = elems.to_vec();
            }
            (p @ (0 | 1), 2, 2) => {
                let elems = frame.expect_elems()?;
                if elems.len() != self.b * self.resp_width(p) {
                    return Err(Error::Frame("bad response block".into()));
                }
                self.resp = elems.to_vec();
            }
            _ => {
                return Err(Error::UnexpectedFrame {
                    expected: "plu schedule".into(),
                    got: format!("party {} round {round} from {sender}", self.party),
                })
            }
        }
        Ok(())
    }

    fn finish(self: Box<Self>) -> Result<PartyOutputs> {
        let params = self.ctx.params;
        if self.party == 2 {
            return Ok(vec![]);
        }
        if self.e_other.len() != self.b || self.resp.is_empty() && self.b > 0 {
            return Err(Error::Session("round data not delivered".into()));
        }
        let p = self.party;
        let k = self.slots();
        let width = self.resp_width(p);
        let spec = &self.spec;
        let mut out = Vec::with_capacity(self.b);
        for (i, inst) in self.inst.iter().enumerate() {
            let block = &self.resp[i * width..(i + 1) * width];
            let d = &block[..k];
            let vshare = &block[k..2 * k];
            let corrs = &block[2 * k..];
            let e = params.add(inst.e_own, self.e_other[i]);

            // per-slot Beaver share of verdict_j * x
            let mut corr_iter = corrs.iter();
            let mut beaver = Vec::with_capacity(k);
            for j in 0..k {
                let c = match inst.cs[j] {
                    Some(c) => c,
                    None => *corr_iter.next().ok_or_else(|| {
                        Error::Frame("missing triple correction".into())
                    })?,
                };
                let triple = TripleFrag { a: inst.a, b: inst.bs[j], c };
                beaver.push(beaver_combine(&params, p, &triple, e, d[j]));
            }

            // flip bits: bottom/top use the boundary tests, middles xor
            let t_of = |j: usize| inst.cores[j].t;
            let mut acc: Elem = 0;
            for j in 0..k {
                let (alpha, beta) = (spec.alphas[j], spec.betas[j]);
                let (sgn, tcoef, cconst) = if j == 0 {
                    // (2 t0 - 1) on the product, (1 - t0) on x
                    let t0 = t_of(0);
                    let s = if t0 == 1 { 1 } else { params.neg(1) };
                    (s, Elem::from(1 - t0), Elem::from(1 - t0))
                } else if j == k - 1 {
                    let tm = t_of(k - 2);
                    let s = if tm == 1 { params.neg(1) } else { 1 };
                    (s, Elem::from(tm), Elem::from(tm))
                } else {
                    let t = t_of(j - 1) ^ t_of(j);
                    let s = if t == 1 { params.neg(1) } else { 1 };
                    (s, Elem::from(t), Elem::from(t))
                };
                // alpha (sgn) [v_j x] + beta (sgn) [v_j] + alpha tcoef [x] + beta cconst
                acc = params.add(acc, params.mul(params.mul(alpha, sgn), beaver[j]));
                acc = params.add(acc, params.mul(params.mul(beta, sgn), vshare[j]));
                acc = params.add(acc, params.mul(params.mul(alpha, tcoef), inst.x));
                if p == 0 {
                    acc = params.add(acc, params.mul(beta, cconst));
                }
            }
            out.push(vec![acc]);
        }
        Ok(out)
    }

    fn core_states(&self) -> Vec<Vec<DreluCoreState>> {
        self.inst.iter().map(|i| i.cores.clone()).collect()
    }

    fn observed_verdicts(&self) -> Vec<Vec<bool>> {
        self.verdicts.clone()
    }
}
