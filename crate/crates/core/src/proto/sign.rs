//! Sign-test engines: the blinded sign protocol, the unblinded comparison,
//! and equality (two sign tests combined by P2).

use super::drelu::{core_build, core_draws, core_verdict, DreluCoreState, FlipBit};
use super::{map_indices, EngineCtx, Kind, PartyEngine, PartyOutputs};
use crate::error::{Error, Result};
use crate::prg::{SeedLabel, LANE_P2};
use crate::ring::Elem;
use crate::transport::Frame;

pub struct SignEngine {
    ctx: EngineCtx,
    kind: Kind,
    party: u8,
    b: usize,
    // P0/P1
    inputs: Vec<Vec<Elem>>,
    cores: Vec<Vec<DreluCoreState>>,
    verdict_frags: Vec<Elem>,
    // P2
    w_from: [Option<Vec<Elem>>; 2],
    verdicts: Vec<Vec<bool>>,
}

impl SignEngine {
    pub fn new(ctx: EngineCtx, kind: Kind, party: u8, inputs: Vec<Vec<Elem>>) -> Result<Self> {
        let b = if party == 2 {
            0
        } else {
            inputs.len()
        };
        Ok(Self {
            ctx,
            kind,
            party,
            b,
            inputs,
            cores: Vec::new(),
            verdict_frags: Vec::new(),
            w_from: [None, None],
            verdicts: Vec::new(),
        })
    }

    fn cores_per_instance(&self) -> usize {
        if self.kind == Kind::Equality {
            2
        } else {
            1
        }
    }

    fn build_cores(&mut self) {
        let ctx = &self.ctx;
        let params = ctx.params;
        let party = self.party;
        let kind = self.kind.clone();
        let inputs = &self.inputs;
        self.cores = map_indices(ctx.exec, inputs.len(), |idx| {
            let ins = &inputs[idx];
            let core_inputs: Vec<(Elem, FlipBit)> = match &kind {
                Kind::DRelu => vec![(ins[0], FlipBit::Internal)],
                Kind::UCmp => vec![(params.sub(ins[0], ins[1]), FlipBit::None)],
                Kind::Equality => vec![
                    (params.sub(ins[0], ins[1]), FlipBit::Internal),
                    (params.sub(ins[1], ins[0]), FlipBit::Internal),
                ],
                _ => unreachable!(),
            };
            core_inputs
                .into_iter()
                .enumerate()
                .map(|(lane, (frag, flip))| {
                    let mut stream = ctx.stream(SeedLabel::S01, idx, lane as u16);
                    let draws = core_draws(&params, &mut stream, flip, ctx.pins.as_ref());
                    core_build(&params, party, frag, &draws)
                })
                .collect()
        });
    }
}

impl PartyEngine for SignEngine {
    fn sends(&mut self, round: u8) -> Result<Vec<(u8, Frame)>> {
        match (round, self.party) {
            (1, 0) | (1, 1) => {
                self.build_cores();
                let w: Vec<Elem> = self
                    .cores
                    .iter()
                    .flat_map(|cs| cs.iter().flat_map(|c| c.w.iter().copied()))
                    .collect();
                Ok(vec![(2, self.ctx.frame(self.party, 1, w))])
            }
            (2, 2) => {
                let params = self.ctx.params;
                let arr = usize::from(params.ellx()) + 2;
                let per = self.cores_per_instance();
                let (Some(w0), Some(w1)) = (&self.w_from[0], &self.w_from[1]) else {
                    return Err(Error::Session("missing round-1 arrays".into()));
                };
                if w0.len() != w1.len() || w0.len() % (arr * per) != 0 {
                    return Err(Error::Frame("mismatched array lengths".into()));
                }
                let b = w0.len() / (arr * per);
                self.verdicts = map_indices(self.ctx.exec, b, |i| {
                    (0..per)
                        .map(|c| {
                            let lo = (i * per + c) * arr;
                            core_verdict(&params, &w0[lo..lo + arr], &w1[lo..lo + arr])
                        })
                        .collect()
                });
                if self.kind == Kind::UCmp {
                    return Ok(vec![]);
                }
                let mut to0 = Vec::with_capacity(b);
                let mut to1 = Vec::with_capacity(b);
                for (i, vs) in self.verdicts.iter().enumerate() {
                    let v = Elem::from(vs.iter().fold(false, |acc, &x| acc ^ x));
                    let mut s2 = self.ctx.stream(SeedLabel::S2, i, LANE_P2);
                    let r = s2.draw(&params);
                    to0.push(r);
                    to1.push(params.sub(v, r));
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
            (0 | 1, 2, 2) => {
                let elems = frame.expect_elems()?;
                if elems.len() != self.b {
                    return Err(Error::Frame("bad verdict-share count".into()));
                }
                self.verdict_frags = elems.to_vec();
            }
            _ => {
                return Err(Error::UnexpectedFrame {
                    expected: "sign-protocol schedule".into(),
                    got: format!("party {} round {round} from {sender}", self.party),
                })
            }
        }
        Ok(())
    }

    fn finish(self: Box<Self>) -> Result<PartyOutputs> {
        let params = self.ctx.params;
        match self.party {
            2 => {
                if self.kind == Kind::UCmp {
                    Ok(self
                        .verdicts
                        .iter()
                        .map(|vs| vec![Elem::from(vs[0])])
                        .collect())
                } else {
                    Ok(vec![])
                }
            }
            p => {
                if self.kind == Kind::UCmp {
                    return Ok(vec![]);
                }
                if self.verdict_frags.len() != self.b {
                    return Err(Error::Session("verdict shares not delivered".into()));
                }
                let mut out = Vec::with_capacity(self.b);
                for (i, cs) in self.cores.iter().enumerate() {
                    let vf = self.verdict_frags[i];
                    let frag = match self.kind {
                        // t XOR verdict: (1 - 2t)[v] + t
                        Kind::DRelu => {
                            let t = cs[0].t;
                            let s = if t == 1 { params.neg(1) } else { 1 };
                            let mut f = params.mul(s, vf);
                            if p == 0 {
                                f = params.add(f, Elem::from(t));
                            }
                            f
                        }
                        // 1 - (t0^t1) XOR verdict: (1 - t') - (1 - 2t')[v]
                        Kind::Equality => {
                            let t = cs[0].t ^ cs[1].t;
                            let s = if t == 1 { params.neg(1) } else { 1 };
                            let mut f = params.neg(params.mul(s, vf));
                            if p == 0 {
                                f = params.add(f, Elem::from(1 - t));
                            }
                            f
                        }
                        _ => unreachable!(),
                    };
                    out.push(vec![frag]);
                }
                Ok(out)
            }
        }
    }

    fn core_states(&self) -> Vec<Vec<DreluCoreState>> {
        self.cores.clone()
    }

    fn observed_verdicts(&self) -> Vec<Vec<bool>> {
        self.verdicts.clone()
    }
}
