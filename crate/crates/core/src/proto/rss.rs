//! Replicated-sharing sign test and relu.
//!
//! The prologue (round 0) establishes (2,3) sharings of two blinding bits:
//! `t` drawn by P0/P1 and `s` drawn by P2, costing exactly one ring element
//! on the wire (`s`'s completing fragment, P2 to P0). The product share
//! `[s*t]` needed for `[s XOR t]` starts as local cross terms; its
//! rerandomized reshare rides round 1 alongside the masked arrays, and the
//! relu product reshare rides round 2 alongside the verdict broadcast, so
//! the online body stays at two rounds.
//!
//! Per-instance stream-draw order (lane `LANE_RSS`):
//! - seed012: `s` fragment 1, then the (2,3) zero triple for `t`;
//! - seed01:  the bit `t`, then the (3,3) zero legs in reshare order;
//! - seed02:  the (3,3) zero legs;
//! - seed12:  `s` fragment 2, then the (3,3) zero legs;
//! - seed2:   the bit `s`.

use super::drelu::{core_build, core_draws, core_verdict, DreluCoreState, FlipBit};
use super::{map_indices, EngineCtx, Kind, PartyEngine, PartyOutputs};
use crate::error::{Error, Result};
use crate::prg::{PrgStream, SeedLabel, LANE_RSS};
use crate::ring::Elem;
use crate::sharing::{rss_share_t, rss_zero33_frag};
use crate::transport::Frame;

struct RssInstance {
    x: [Elem; 2],
    s_frags: [Elem; 2],
    t_frags: [Elem; 2],
    t_bit: u8,
    s_bit: u8,
    /// Rerandomized own leg of the `s*t` reshare.
    st_own: Elem,
    /// (3,3) zero leg for the relu product reshare.
    zeta2: Elem,
    core: Option<DreluCoreState>,
}

pub struct RssEngine {
    ctx: EngineCtx,
    kind: Kind,
    party: u8,
    b: usize,
    inst: Vec<RssInstance>,
    st_recv: Vec<Elem>,
    dpp: Vec<Elem>,
    prod_own: Vec<Elem>,
    prod_recv: Vec<Elem>,
    w_from: [Option<Vec<Elem>>; 2],
    verdicts: Vec<Vec<bool>>,
}

impl RssEngine {
    pub fn new(ctx: EngineCtx, kind: Kind, party: u8, inputs: Vec<Vec<[Elem; 2]>>) -> Result<Self> {
        let b = inputs.len();
        let inst = inputs
            .into_iter()
            .map(|mut ins| {
                let x = ins.pop().ok_or_else(|| Error::Request("missing input".into()))?;
                Ok(RssInstance {
                    x,
                    s_frags: [0, 0],
                    t_frags: [0, 0],
                    t_bit: 0,
                    s_bit: 0,
                    st_own: 0,
                    zeta2: 0,
                    core: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ctx,
            kind,
            party,
            b,
            inst,
            st_recv: Vec::new(),
            dpp: Vec::new(),
            prod_own: Vec::new(),
            prod_recv: Vec::new(),
            w_from: [None, None],
            verdicts: Vec::new(),
        })
    }

    fn needs_product(&self) -> bool {
        self.kind == Kind::RssRelu
    }

    /// Prologue draws for one instance; returns P2's outgoing `s` fragment.
    fn prologue_draws(&self, idx: usize, inst: &mut RssInstance) -> Option<Elem> {
        let ctx = &self.ctx;
        let params = ctx.params;
        let party = self.party;
        let relu = self.needs_product();

        let mut s012 = ctx.stream(SeedLabel::S012, idx, LANE_RSS);
        let s1 = s012.draw(&params);

        let mut s01 = (party != 2).then(|| ctx.stream(SeedLabel::S01, idx, LANE_RSS));
        if let Some(s01) = s01.as_mut() {
            inst.t_bit = s01.draw_bit();
        }
        let t_share = rss_share_t(&params, party, &mut s012, inst.t_bit);
        inst.t_frags = t_share.frags;

        let mut s02 = (party != 1).then(|| ctx.stream(SeedLabel::S02, idx, LANE_RSS));
        let mut s12 = (party != 0).then(|| ctx.stream(SeedLabel::S12, idx, LANE_RSS));

        let mut out = None;
        match party {
            0 => {
                // fragment 0 arrives from P2 in round 0
                inst.s_frags = [0, s1];
            }
            1 => {
                let s2 = s12.as_mut().unwrap().draw(&params);
                inst.s_frags = [s1, s2];
            }
            2 => {
                let s2 = s12.as_mut().unwrap().draw(&params);
                let mut own = ctx.stream(SeedLabel::S2, idx, LANE_RSS);
                inst.s_bit = own.draw_bit();
                let s0 = params.sub(params.sub(Elem::from(inst.s_bit), s1), s2);
                inst.s_frags = [s2, s0];
                out = Some(s0);
            }
            _ => unreachable!(),
        }

        let zero33 = |s01: &mut Option<PrgStream>,
                          s02: &mut Option<PrgStream>,
                          s12: &mut Option<PrgStream>| {
            match party {
                0 => rss_zero33_frag(&params, s02.as_mut().unwrap(), s01.as_mut().unwrap()),
                1 => rss_zero33_frag(&params, s01.as_mut().unwrap(), s12.as_mut().unwrap()),
                _ => rss_zero33_frag(&params, s12.as_mut().unwrap(), s02.as_mut().unwrap()),
            }
        };
        let zeta1 = zero33(&mut s01, &mut s02, &mut s12);
        if relu {
            inst.zeta2 = zero33(&mut s01, &mut s02, &mut s12);
        }

        // local cross terms of s*t, rerandomized for the reshare
        let cross = params.add(
            params.add(
                params.mul(inst.s_frags[0], inst.t_frags[0]),
                params.mul(inst.s_frags[0], inst.t_frags[1]),
            ),
            params.mul(inst.s_frags[1], inst.t_frags[0]),
        );
        inst.st_own = params.add(cross, zeta1);
        out
    }

    /// Own share pair of `s XOR t` once the reshare leg arrived.
    fn sigma(&self, i: usize) -> [Elem; 2] {
        let params = self.ctx.params;
        let inst = &self.inst[i];
        let st = [inst.st_own, self.st_recv[i]];
        [0, 1].map(|k| {
            params.sub(
                params.add(inst.s_frags[k], inst.t_frags[k]),
                params.mul(2, st[k]),
            )
        })
    }
}

impl PartyEngine for RssEngine {
    fn sends(&mut self, round: u8) -> Result<Vec<(u8, Frame)>> {
        let params = self.ctx.params;
        match round {
            0 => {
                let mut inst = std::mem::take(&mut self.inst);
                let mut s0_out = Vec::with_capacity(self.b);
                for (idx, item) in inst.iter_mut().enumerate() {
                    if let Some(s0) = self.prologue_draws(idx, item) {
                        s0_out.push(s0);
                    }
                }
                self.inst = inst;
                if self.party == 2 {
                    Ok(vec![(0, self.ctx.frame(2, 0, s0_out))])
                } else {
                    Ok(vec![])
                }
            }
            1 => {
                // P0's s fragment 0 was completed by the round-0 delivery;
                // cross terms were deferred for it
                if self.party == 0 {
                    for inst in &mut self.inst {
                        // recompute cross with the real fragment: only the
                        // s0-dependent terms were missing
                        let add = params.add(
                            params.mul(inst.s_frags[0], inst.t_frags[0]),
                            params.mul(inst.s_frags[0], inst.t_frags[1]),
                        );
                        inst.st_own = params.add(inst.st_own, add);
                    }
                }
                match self.party {
                    p @ (0 | 1) => {
                        let ctx = self.ctx.clone();
                        let exec = ctx.exec;
                        let cores: Vec<DreluCoreState> =
                            map_indices(exec, self.inst.len(), |idx| {
                                let inst = &self.inst[idx];
                                // additive projection: P0 folds both its
                                // fragments, P1 contributes the one P0 lacks
                                let frag = if p == 0 {
                                    params.add(inst.x[0], inst.x[1])
                                } else {
                                    inst.x[1]
                                };
                                let mut s01 = ctx.stream(SeedLabel::S01, idx, 0);
                                let draws = core_draws(
                                    &params,
                                    &mut s01,
                                    FlipBit::External(inst.t_bit),
                                    ctx.pins.as_ref(),
                                );
                                core_build(&params, p, frag, &draws)
                            });
                        let mut w: Vec<Elem> = Vec::new();
                        for c in &cores {
                            w.extend_from_slice(&c.w);
                        }
                        for (inst, core) in self.inst.iter_mut().zip(cores) {
                            inst.core = Some(core);
                        }
                        let st: Vec<Elem> = self.inst.iter().map(|i| i.st_own).collect();
                        if p == 0 {
                            // reshare target of P0 is P2; ride the array frame
                            let mut payload = w;
                            payload.extend_from_slice(&st);
                            Ok(vec![(2, self.ctx.frame(0, 1, payload))])
                        } else {
                            Ok(vec![
                                (2, self.ctx.frame(1, 1, w)),
                                (0, self.ctx.frame(1, 1, st)),
                            ])
                        }
                    }
                    _ => {
                        let st: Vec<Elem> = self.inst.iter().map(|i| i.st_own).collect();
                        Ok(vec![(1, self.ctx.frame(2, 1, st))])
                    }
                }
            }
            2 => match self.party {
                2 => {
                    let arr = usize::from(params.ellx()) + 2;
                    let (Some(w0), Some(w1)) = (&self.w_from[0], &self.w_from[1]) else {
                        return Err(Error::Session("missing round-1 arrays".into()));
                    };
                    if w0.len() != w1.len() || w0.len() != self.b * arr {
                        return Err(Error::Frame("mismatched array lengths".into()));
                    }
                    self.verdicts = map_indices(self.ctx.exec, self.b, |i| {
                        vec![core_verdict(&params, &w0[i * arr..(i + 1) * arr], &w1[i * arr..(i + 1) * arr])]
                    });
                    self.dpp = self
                        .verdicts
                        .iter()
                        .enumerate()
                        .map(|(i, v)| Elem::from(v[0] ^ (self.inst[i].s_bit == 1)))
                        .collect();
                    let mut to1 = self.dpp.clone();
                    let mut frames = vec![(0, self.ctx.frame(2, 2, self.dpp.clone()))];
                    if self.needs_product() {
                        let prod = self.product_legs();
                        to1.extend_from_slice(&prod);
                        self.prod_own = prod;
                    }
                    frames.push((1, self.ctx.frame(2, 2, to1)));
                    Ok(frames)
                }
                p => {
                    if !self.needs_product() {
                        return Ok(vec![]);
                    }
                    let prod = self.product_legs();
                    self.prod_own = prod.clone();
                    let target = if p == 0 { 2 } else { 0 };
                    Ok(vec![(target, self.ctx.frame(p, 2, prod))])
                }
            },
            _ => Ok(vec![]),
        }
    }

    fn receive(&mut self, frame: Frame) -> Result<()> {
        let params = self.ctx.params;
        let sender = frame.header.sender;
        let round = frame.header.round;
        let arr = usize::from(params.ellx()) + 2;
        match (self.party, round, sender) {
            (0, 0, 2) => {
                let elems = frame.expect_elems()?;
                if elems.len() != self.b {
                    return Err(Error::Frame("bad prologue count".into()));
                }
                for (inst, &s0) in self.inst.iter_mut().zip(elems) {
                    inst.s_frags[0] = s0;
                }
            }
            (2, 1, 0) => {
                let elems = frame.expect_elems()?;
                if elems.len() != self.b * (arr + 1) {
                    return Err(Error::Frame("bad array frame".into()));
                }
                self.w_from[0] = Some(elems[..self.b * arr].to_vec());
                self.st_recv = elems[self.b * arr..].to_vec();
            }
            (2, 1, 1) => {
                let elems = frame.expect_elems()?;
                if elems.len() != self.b * arr {
                    return Err(Error::Frame("bad array frame".into()));
                }
                self.w_from[1] = Some(elems.to_vec());
            }
            (0, 1, 1) | (1, 1, 2) => {
                let elems = frame.expect_elems()?;
                if elems.len() != self.b {
                    return Err(Error::Frame("bad reshare count".into()));
                }
                self.st_recv = elems.to_vec();
            }
            (0, 2, 2) => {
                let elems = frame.expect_elems()?;
                if elems.len() != self.b {
                    return Err(Error::Frame("bad verdict count".into()));
                }
                self.dpp = elems.to_vec();
            }
            (1, 2, 2) => {
                let elems = frame.expect_elems()?;
                let want = if self.needs_product() { 2 * self.b } else { self.b };
                if elems.len() != want {
                    return Err(Error::Frame("bad verdict count".into()));
                }
                self.dpp = elems[..self.b].to_vec();
                if self.needs_product() {
                    self.prod_recv = elems[self.b..].to_vec();
                }
            }
            (0, 2, 1) | (2, 2, 0) => {
                let elems = frame.expect_elems()?;
                if elems.len() != self.b {
                    return Err(Error::Frame("bad product count".into()));
                }
                self.prod_recv = elems.to_vec();
            }
            _ => {
                return Err(Error::UnexpectedFrame {
                    expected: "replicated schedule".into(),
                    got: format!("party {} round {round} from {sender}", self.party),
                })
            }
        }
        Ok(())
    }

    fn finish(self: Box<Self>) -> Result<PartyOutputs> {
        let params = self.ctx.params;
        if self.st_recv.len() != self.b || self.dpp.len() != self.b {
            return Err(Error::Session("round data not delivered".into()));
        }
        if self.needs_product() && self.prod_recv.len() != self.b {
            return Err(Error::Session("product reshare not delivered".into()));
        }
        let mut out = Vec::with_capacity(self.b);
        for i in 0..self.b {
            let dpp = self.dpp[i];
            // 1 - 2 * D''
            let flip = params.sub(1, params.mul(2, dpp));
            let frags: [Elem; 2] = if self.needs_product() {
                let pi = [self.prod_own[i], self.prod_recv[i]];
                let x = self.inst[i].x;
                [0, 1].map(|k| {
                    params.add(params.mul(dpp, x[k]), params.mul(flip, pi[k]))
                })
            } else {
                let sigma = self.sigma(i);
                let mut f = [0, 1].map(|k| params.mul(flip, sigma[k]));
                // constant lands on fragment 0, held by P0 and P2
                if self.party == 0 {
                    f[0] = params.add(f[0], dpp);
                } else if self.party == 2 {
                    f[1] = params.add(f[1], dpp);
                }
                f
            };
            out.push(vec![frags[0], frags[1]]);
        }
        Ok(out)
    }

    fn core_states(&self) -> Vec<Vec<DreluCoreState>> {
        self.inst
            .iter()
            .filter_map(|i| i.core.as_ref().map(|c| vec![c.clone()]))
            .collect()
    }

    fn observed_verdicts(&self) -> Vec<Vec<bool>> {
        self.verdicts.clone()
    }
}

impl RssEngine {
    /// Rerandomized own legs of the `(s XOR t) * x` product reshare.
    fn product_legs(&self) -> Vec<Elem> {
        let params = self.ctx.params;
        (0..self.b)
            .map(|i| {
                let sigma = self.sigma(i);
                let x = self.inst[i].x;
                let cross = params.add(
                    params.add(params.mul(sigma[0], x[0]), params.mul(sigma[0], x[1])),
                    params.mul(sigma[1], x[0]),
                );
                params.add(cross, self.inst[i].zeta2)
            })
            .collect()
    }
}
