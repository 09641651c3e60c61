//! Engines for the two-segment functions built from one sign test and one
//! Beaver multiplication: relu, abs, dynamic relu, max2/min2, funnel relu.
//!
//! Round 1 carries the masked array to P2 and the `e = z - a` opening
//! between P0 and P1; in round 2 P2 answers with `d = verdict' - b` (and the
//! triple correction to P1), after which the output is a local affine
//! combination keyed by the flip bit.

use super::drelu::{core_build, core_draws, core_verdict, DreluCoreState, FlipBit};
use super::{map_indices, EngineCtx, Kind, PartyEngine, PartyOutputs};
use crate::error::{Error, Result};
use crate::prg::{SeedLabel, LANE_TRIPLE};
use crate::ring::Elem;
use crate::sharing::{beaver_combine, TripleFrag};
use crate::transport::Frame;

struct P01Instance {
    x: Elem,
    /// Fragment fed to the sign test and multiplied by its verdict.
    z: Elem,
    /// Second-operand fragment (max2/min2) or `T(x)` fragment (funnel).
    aux: Elem,
    core: DreluCoreState,
    triple: TripleFrag,
    e_own: Elem,
}

pub struct MulEngine {
    ctx: EngineCtx,
    kind: Kind,
    party: u8,
    b: usize,
    // P0/P1
    inst: Vec<P01Instance>,
    e_other: Vec<Elem>,
    d: Vec<Elem>,
    corr: Vec<Elem>,
    // P2
    w_from: [Option<Vec<Elem>>; 2],
    verdicts: Vec<Vec<bool>>,
}

impl MulEngine {
    pub fn new(ctx: EngineCtx, kind: Kind, party: u8, inputs: Vec<Vec<Elem>>) -> Result<Self> {
        let b = inputs.len();
        let mut engine = Self {
            ctx,
            kind,
            party,
            b,
            inst: Vec::new(),
            e_other: Vec::new(),
            d: Vec::new(),
            corr: Vec::new(),
            w_from: [None, None],
            verdicts: Vec::new(),
        };
        if party != 2 {
            engine.build_instances(inputs);
        }
        Ok(engine)
    }

    fn build_instances(&mut self, inputs: Vec<Vec<Elem>>) {
        let ctx = &self.ctx;
        let params = ctx.params;
        let party = self.party;
        let kind = self.kind.clone();
        let label = if party == 0 { SeedLabel::S02 } else { SeedLabel::S12 };
        self.inst = map_indices(ctx.exec, inputs.len(), |idx| {
            let ins = &inputs[idx];
            let x = ins[0];
            let (z, aux) = match &kind {
                Kind::Relu | Kind::Abs | Kind::DynRelu { .. } => (x, 0),
                Kind::Max2 | Kind::Min2 => (params.sub(x, ins[1]), ins[1]),
                Kind::FunnelRelu { scale, offset } => {
                    let mut tx = params.mul(*scale, x);
                    if party == 0 {
                        tx = params.add(tx, *offset);
                    }
                    (params.sub(x, tx), tx)
                }
                _ => unreachable!(),
            };
            let mut s01 = ctx.stream(SeedLabel::S01, idx, 0);
            let draws = core_draws(&params, &mut s01, FlipBit::Internal, ctx.pins.as_ref());
            let core = core_build(&params, party, z, &draws);
            let mut ts = ctx.stream(label, idx, LANE_TRIPLE);
            let a = ts.draw(&params);
            let bb = ts.draw(&params);
            let c = if party == 0 { ts.draw(&params) } else { 0 };
            let triple = TripleFrag { a, b: bb, c };
            let e_own = params.sub(z, a);
            P01Instance { x, z, aux, core, triple, e_own }
        });
    }
}

impl PartyEngine for MulEngine {
    fn sends(&mut self, round: u8) -> Result<Vec<(u8, Frame)>> {
        match (round, self.party) {
            (1, p @ (0 | 1)) => {
                let w: Vec<Elem> =
                    self.inst.iter().flat_map(|i| i.core.w.iter().copied()).collect();
                let e: Vec<Elem> = self.inst.iter().map(|i| i.e_own).collect();
                Ok(vec![
                    (2, self.ctx.frame(p, 1, w)),
                    (1 - p, self.ctx.frame(p, 1, e)),
                ])
            }
            (2, 2) => {
                let params = self.ctx.params;
                let arr = usize::from(params.ellx()) + 2;
                let (Some(w0), Some(w1)) = (&self.w_from[0], &self.w_from[1]) else {
                    return Err(Error::Session("missing round-1 arrays".into()));
                };
                if w0.len() != w1.len() || w0.len() % arr != 0 {
                    return Err(Error::Frame("mismatched array lengths".into()));
                }
                let b = w0.len() / arr;
                self.verdicts = map_indices(self.ctx.exec, b, |i| {
                    vec![core_verdict(&params, &w0[i * arr..(i + 1) * arr], &w1[i * arr..(i + 1) * arr])]
                });
                let mut to0 = Vec::with_capacity(b);
                let mut to1 = Vec::with_capacity(2 * b);
                let mut corrs = Vec::with_capacity(b);
                for (i, vs) in self.verdicts.iter().enumerate() {
                    let mut s02 = self.ctx.stream(SeedLabel::S02, i, LANE_TRIPLE);
                    let mut s12 = self.ctx.stream(SeedLabel::S12, i, LANE_TRIPLE);
                    let a0 = s02.draw(&params);
                    let b0 = s02.draw(&params);
                    let c0 = s02.draw(&params);
                    let a1 = s12.draw(&params);
                    let b1 = s12.draw(&params);
                    let bsum = params.add(b0, b1);
                    let d = params.sub(Elem::from(vs[0]), bsum);
                    let c = params.mul(params.add(a0, a1), bsum);
                    to0.push(d);
                    to1.push(d);
                    corrs.push(params.sub(c, c0));
                }
                to1.extend_from_slice(&corrs);
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
            (0, 2, 2) => {
                let elems = frame.expect_elems()?;
                if elems.len() != self.b {
                    return Err(Error::Frame("bad response count".into()));
                }
                self.d = elems.to_vec();
            }
            (1, 2, 2) => {
                let elems = frame.expect_elems()?;
                if elems.len() != 2 * self.b {
                    return Err(Error::Frame("bad response count".into()));
                }
                self.d = elems[..self.b].to_vec();
                self.corr = elems[self.b..].to_vec();
            }
            _ => {
                return Err(Error::UnexpectedFrame {
                    expected: "relu-family schedule".into(),
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
        if self.e_other.len() != self.b || self.d.len() != self.b {
            return Err(Error::Session("round data not delivered".into()));
        }
        let p = self.party;
        let mut out = Vec::with_capacity(self.b);
        for (i, inst) in self.inst.iter().enumerate() {
            let mut triple = inst.triple;
            if p == 1 {
                triple.c = self.corr[i];
            }
            let e = params.add(inst.e_own, self.e_other[i]);
            let d = self.d[i];
            let bv = beaver_combine(&params, p, &triple, e, d);
            let t = Elem::from(inst.core.t);
            let s = if inst.core.t == 1 { params.neg(1) } else { 1 };
            let frag = match &self.kind {
                // (1 - 2t) B + t z
                Kind::Relu => params.add(params.mul(s, bv), params.mul(t, inst.z)),
                // (2 - 4t) B + (2t - 1) x
                Kind::Abs => params.add(
                    params.mul(params.mul(2, s), bv),
                    params.mul(params.neg(s), inst.x),
                ),
                // (1-2t)(a1-a0) B + ((a1-a0) t + a0) x
                Kind::DynRelu { alpha0, alpha1 } => {
                    let delta = params.sub(*alpha1, *alpha0);
                    params.add(
                        params.mul(params.mul(s, delta), bv),
                        params.mul(params.add(params.mul(delta, t), *alpha0), inst.x),
                    )
                }
                // relu(x - y) + y
                Kind::Max2 => params.add(
                    params.add(params.mul(s, bv), params.mul(t, inst.z)),
                    inst.aux,
                ),
                // x - relu(x - y)
                Kind::Min2 => params.sub(
                    inst.x,
                    params.add(params.mul(s, bv), params.mul(t, inst.z)),
                ),
                // relu(x - T(x)) + T(x)
                Kind::FunnelRelu { .. } => params.add(
                    params.add(params.mul(s, bv), params.mul(t, inst.z)),
                    inst.aux,
                ),
                _ => unreachable!(),
            };
            out.push(vec![frag]);
        }
        Ok(out)
    }

    fn core_states(&self) -> Vec<Vec<DreluCoreState>> {
        self.inst.iter().map(|i| vec![i.core.clone()]).collect()
    }

    fn observed_verdicts(&self) -> Vec<Vec<bool>> {
        self.verdicts.clone()
    }
}
