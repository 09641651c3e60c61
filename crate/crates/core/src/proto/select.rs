//! Selection engines: maximum, minimum, sort and median of `n` shared
//! inputs via one shuffled round of pairwise unblinded comparisons.
//!
//! P0 and P1 shuffle the input vector under a shared permutation, open
//! `e_i = phi_i - a_i` to each other, and send one masked comparison array
//! per pair `(i, j)`, `i < j`, to P2. P2 reconstructs the upper-triangular
//! verdict matrix, locates the target index (or builds the full rank
//! permutation matrix for sort), and answers with Beaver openings of the
//! selection weights plus balanced triple corrections (even slots toward
//! P0, odd toward P1).

use super::drelu::{core_build, core_draws, core_verdict, DreluCoreState, FlipBit};
use super::{map_indices, EngineCtx, Kind, PartyEngine, PartyOutputs};
use crate::error::{Error, Result};
use crate::prg::{SeedLabel, LANE_SHUFFLE, LANE_TRIPLE};
use crate::ring::Elem;
use crate::sharing::{beaver_combine, TripleFrag};
use crate::transport::Frame;

struct P01Instance {
    cores: Vec<DreluCoreState>,
    a: Vec<Elem>,
    bs: Vec<Elem>,
    cs: Vec<Option<Elem>>,
    e_own: Vec<Elem>,
}

pub struct SelectEngine {
    ctx: EngineCtx,
    kind: Kind,
    party: u8,
    b: usize,
    n: usize,
    inst: Vec<P01Instance>,
    e_other: Vec<Elem>,
    resp: Vec<Elem>,
    w_from: [Option<Vec<Elem>>; 2],
    verdicts: Vec<Vec<bool>>,
}

/// Upper-triangular pair index of `(i, j)`, `i < j`, in lexicographic order.
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// First index that beats every earlier one (column zeros) and dominates
/// every later one (row ones) among `alive`.
fn select_index(verdict: &dyn Fn(usize, usize) -> bool, alive: &[usize], want_max: bool) -> usize {
    'cand: for (pos, &c) in alive.iter().enumerate() {
        for &i in &alive[..pos] {
            if verdict(i, c) == want_max {
                continue 'cand;
            }
        }
        for &j in &alive[pos + 1..] {
            if verdict(c, j) != want_max {
                continue 'cand;
            }
        }
        return c;
    }
    // a corrupted comparison round can leave no consistent index; the
    // protocol stays silent and emits a deterministic fallback
    alive[0]
}

impl SelectEngine {
    pub fn new(
        ctx: EngineCtx,
        kind: Kind,
        party: u8,
        inputs: Vec<Vec<Elem>>,
        width: usize,
    ) -> Result<Self> {
        let b = inputs.len();
        let n = if party == 2 { width } else { inputs.first().map_or(0, Vec::len) };
        if n < 2 {
            return Err(Error::Request("selection needs at least two inputs".into()));
        }
        if party != 2 && inputs.iter().any(|v| v.len() != n) {
            return Err(Error::Request("ragged selection batch".into()));
        }
        let mut engine = Self {
            ctx,
            kind,
            party,
            b,
            n,
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

    fn is_sort(&self) -> bool {
        matches!(self.kind, Kind::Sort { .. })
    }

    /// Beaver slots: `n` selection weights, or `n^2` matrix entries for sort.
    fn slots(&self) -> usize {
        if self.is_sort() {
            self.n * self.n
        } else {
            self.n
        }
    }

    fn resp_width(&self, party: u8) -> usize {
        let j = self.slots();
        if party == 0 {
            j + j.div_ceil(2)
        } else {
            j + j / 2
        }
    }

    fn pairs(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    fn build_instances(&mut self, inputs: Vec<Vec<Elem>>) {
        let ctx = &self.ctx;
        let params = ctx.params;
        let party = self.party;
        let n = self.n;
        let slots = self.slots();
        let label = if party == 0 { SeedLabel::S02 } else { SeedLabel::S12 };
        self.inst = map_indices(ctx.exec, inputs.len(), |idx| {
            let mut shuffle = ctx.stream(SeedLabel::S01, idx, LANE_SHUFFLE);
            let perm = shuffle.draw_perm(n);
            let phi: Vec<Elem> = perm.iter().map(|&s| inputs[idx][usize::from(s)]).collect();
            let mut cores = Vec::with_capacity(n * (n - 1) / 2);
            let mut lane = 0u16;
            for i in 0..n {
                for j in i + 1..n {
                    let z = params.sub(phi[i], phi[j]);
                    let mut s01 = ctx.stream(SeedLabel::S01, idx, lane);
                    lane += 1;
                    let draws = core_draws(&params, &mut s01, FlipBit::None, ctx.pins.as_ref());
                    cores.push(core_build(&params, party, z, &draws));
                }
            }
            let mut ts = ctx.stream(label, idx, LANE_TRIPLE);
            let a: Vec<Elem> = (0..n).map(|_| ts.draw(&params)).collect();
            let bs: Vec<Elem> = (0..slots).map(|_| ts.draw(&params)).collect();
            let mut cs = vec![None; slots];
            for (j, slot) in cs.iter_mut().enumerate() {
                if (party == 0 && j % 2 == 1) || (party == 1 && j % 2 == 0) {
                    *slot = Some(ts.draw(&params));
                }
            }
            let e_own: Vec<Elem> = (0..n).map(|i| params.sub(phi[i], a[i])).collect();
            P01Instance { cores, a, bs, cs, e_own }
        });
    }

    /// P2: selection weights per instance from the verdict matrix.
    fn weights(&self, vs: &[bool], n: usize) -> Vec<Elem> {
        let verdict = |i: usize, j: usize| vs[pair_index(n, i, j)];
        match &self.kind {
            Kind::MaxN | Kind::MinN => {
                let want_max = self.kind == Kind::MaxN;
                let alive: Vec<usize> = (0..n).collect();
                let target = select_index(&verdict, &alive, want_max);
                (0..n).map(|i| Elem::from(i == target)).collect()
            }
            Kind::MedN => {
                let mut alive: Vec<usize> = (0..n).collect();
                for _ in 0..(n + 1) / 2 - 1 {
                    let t = select_index(&verdict, &alive, true);
                    alive.retain(|&i| i != t);
                }
                let target = select_index(&verdict, &alive, true);
                (0..n).map(|i| Elem::from(i == target)).collect()
            }
            Kind::Sort { descending } => {
                let mut alive: Vec<usize> = (0..n).collect();
                let mut weights = vec![0 as Elem; n * n];
                for rank in 0..n {
                    let t = select_index(&verdict, &alive, *descending);
                    weights[rank * n + t] = 1;
                    alive.retain(|&i| i != t);
                }
                weights
            }
            _ => unreachable!(),
        }
    }
}

impl PartyEngine for SelectEngine {
    fn sends(&mut self, round: u8) -> Result<Vec<(u8, Frame)>> {
        match (round, self.party) {
            (1, p @ (0 | 1)) => {
                let w: Vec<Elem> = self
                    .inst
                    .iter()
                    .flat_map(|i| i.cores.iter().flat_map(|c| c.w.iter().copied()))
                    .collect();
                let e: Vec<Elem> = self.inst.iter().flat_map(|i| i.e_own.iter().copied()).collect();
                Ok(vec![
                    (2, self.ctx.frame(p, 1, w)),
                    (1 - p, self.ctx.frame(p, 1, e)),
                ])
            }
            (2, 2) => {
                let params = self.ctx.params;
                let arr = usize::from(params.ellx()) + 2;
                let n = self.n;
                let (Some(w0), Some(w1)) = (&self.w_from[0], &self.w_from[1]) else {
                    return Err(Error::Session("missing round-1 arrays".into()));
                };
                // P2 learns n from the request metadata; frames must agree
                let pairs = self.pairs();
                let per = pairs * arr;
                if w0.len() != w1.len() || per == 0 || w0.len() % per != 0 {
                    return Err(Error::Frame("mismatched array lengths".into()));
                }
                let b = w0.len() / per;
                self.verdicts = map_indices(self.ctx.exec, b, |i| {
                    (0..pairs)
                        .map(|c| {
                            let lo = i * per + c * arr;
                            core_verdict(&params, &w0[lo..lo + arr], &w1[lo..lo + arr])
                        })
                        .collect()
                });
                let slots = self.slots();
                let mut to0 = Vec::with_capacity(b * self.resp_width(0));
                let mut to1 = Vec::with_capacity(b * self.resp_width(1));
                for (i, vs) in self.verdicts.iter().enumerate() {
                    let weights = self.weights(vs, n);
                    let mut s02 = self.ctx.stream(SeedLabel::S02, i, LANE_TRIPLE);
                    let mut s12 = self.ctx.stream(SeedLabel::S12, i, LANE_TRIPLE);
                    let a0: Vec<Elem> = (0..n).map(|_| s02.draw(&params)).collect();
                    let b0: Vec<Elem> = (0..slots).map(|_| s02.draw(&params)).collect();
                    let a1: Vec<Elem> = (0..n).map(|_| s12.draw(&params)).collect();
                    let b1: Vec<Elem> = (0..slots).map(|_| s12.draw(&params)).collect();
                    let mut d = Vec::with_capacity(slots);
                    let mut corr0 = Vec::new();
                    let mut corr1 = Vec::new();
                    for j in 0..slots {
                        let bsum = params.add(b0[j], b1[j]);
                        d.push(params.sub(weights[j], bsum));
                        // slot j multiplies phi_{j mod n}
                        let asum = params.add(a0[j % n], a1[j % n]);
                        let c = params.mul(asum, bsum);
                        if j % 2 == 0 {
                            let c1 = s12.draw(&params);
                            corr0.push(params.sub(c, c1));
                        } else {
                            let c0 = s02.draw(&params);
                            corr1.push(params.sub(c, c0));
                        }
                    }
                    to0.extend_from_slice(&d);
                    to0.extend_from_slice(&corr0);
                    to1.extend_from_slice(&d);
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
                if elems.len() != self.b * self.n {
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
                    expected: "selection schedule".into(),
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
        if self.e_other.len() != self.b * self.n || self.resp.len() != self.b * self.resp_width(self.party) {
            return Err(Error::Session("round data not delivered".into()));
        }
        let p = self.party;
        let n = self.n;
        let slots = self.slots();
        let width = self.resp_width(p);
        let mut out = Vec::with_capacity(self.b);
        for (i, inst) in self.inst.iter().enumerate() {
            let block = &self.resp[i * width..(i + 1) * width];
            let d = &block[..slots];
            let corrs = &block[slots..];
            let e: Vec<Elem> = (0..n)
                .map(|j| params.add(inst.e_own[j], self.e_other[i * n + j]))
                .collect();
            let mut corr_iter = corrs.iter();
            let mut terms = Vec::with_capacity(slots);
            for j in 0..slots {
                let c = match inst.cs[j] {
                    Some(c) => c,
                    None => *corr_iter.next().ok_or_else(|| {
                        Error::Frame("missing triple correction".into())
                    })?,
                };
                let triple = TripleFrag { a: inst.a[j % n], b: inst.bs[j], c };
                terms.push(beaver_combine(&params, p, &triple, e[j % n], d[j]));
            }
            if self.is_sort() {
                let rows: Vec<Elem> = (0..n)
                    .map(|rank| {
                        let mut acc: Elem = 0;
                        for j in 0..n {
                            acc = params.add(acc, terms[rank * n + j]);
                        }
                        acc
                    })
                    .collect();
                out.push(rows);
            } else {
                let mut acc: Elem = 0;
                for &t in &terms {
                    acc = params.add(acc, t);
                }
                out.push(vec![acc]);
            }
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
