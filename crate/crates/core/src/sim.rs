//! In-process deterministic execution: all three engines run lockstep in one
//! thread with immediate message delivery, full metering, and a transcript
//! for assertions. The networked runtime drives the same engines over TCP.

use crate::error::{Error, Result};
use crate::prg::{Seed, SeedLabel, SeedSet, Tag};
use crate::proto::drelu::CorePins;
use crate::proto::{build_engine, EngineCtx, ExecMode, Kind, PartyInputs};
use crate::ring::{Elem, RingParams};
use crate::transport::{Dir, Meter, Payload};
use sha2::{Digest, Sha256};

/// The five session seeds plus the client's splitting seed.
#[derive(Clone, Debug)]
pub struct FullSeeds {
    pub s01: Seed,
    pub s02: Seed,
    pub s12: Seed,
    pub s012: Seed,
    pub s2: Seed,
    pub client: Seed,
}

impl FullSeeds {
    /// Expands one master seed into the full set; test convenience.
    pub fn from_master(master: &[u8]) -> FullSeeds {
        let derive = |label: &[u8]| {
            let mut h = Sha256::new();
            h.update(master);
            h.update(label);
            Seed(h.finalize().into())
        };
        FullSeeds {
            s01: derive(b"s01"),
            s02: derive(b"s02"),
            s12: derive(b"s12"),
            s012: derive(b"s012"),
            s2: derive(b"s2"),
            client: derive(b"client"),
        }
    }

    /// The client split seed is derived from the pairwise seeds so that every
    /// run of a session is reproducible from its configuration alone.
    pub fn client_seed_from(s01: &Seed, s02: &Seed, s12: &Seed) -> Seed {
        let mut h = Sha256::new();
        h.update(s01.0);
        h.update(s02.0);
        h.update(s12.0);
        h.update(b"client-split");
        Seed(h.finalize().into())
    }

    /// Seeds visible to `party` under the session topology.
    pub fn for_party(&self, party: u8) -> SeedSet {
        let mut set = SeedSet::empty();
        set.s012 = Some(self.s012.clone());
        match party {
            0 => {
                set.s01 = Some(self.s01.clone());
                set.s02 = Some(self.s02.clone());
            }
            1 => {
                set.s01 = Some(self.s01.clone());
                set.s12 = Some(self.s12.clone());
            }
            2 => {
                set.s02 = Some(self.s02.clone());
                set.s12 = Some(self.s12.clone());
                set.s2 = Some(self.s2.clone());
            }
            _ => panic!("party id out of range"),
        }
        set
    }

    pub fn client_set(&self) -> SeedSet {
        let mut set = SeedSet::empty();
        set.client = Some(self.client.clone());
        set
    }
}

/// Session-level knobs of an in-process run.
#[derive(Clone)]
pub struct SimConfig {
    pub params: RingParams,
    pub session: [u8; 8],
    pub seeds: FullSeeds,
    pub base_instance: u32,
    pub exec: ExecMode,
    /// Keep frame payloads in the transcript (costly for large batches).
    pub record_payloads: bool,
    /// Reconstruct the per-core masked-array views (costly for large
    /// batches).
    pub record_cores: bool,
}

impl SimConfig {
    pub fn new(params: RingParams, seeds: FullSeeds) -> SimConfig {
        SimConfig {
            params,
            session: *b"simsess0",
            seeds,
            base_instance: 0,
            exec: ExecMode::Sequential,
            record_payloads: false,
            record_cores: false,
        }
    }
}

/// Test hooks for pinned runs.
#[derive(Clone, Default)]
pub struct Pins {
    pub core: Option<CorePins>,
    /// Pinned first fragments of the client split, `[instance][input]`.
    pub client_frag0: Option<Vec<Vec<Elem>>>,
}

/// One routed frame of a run.
#[derive(Debug, Clone)]
pub struct RoutedFrame {
    pub from: u8,
    pub to: u8,
    pub round: u8,
    pub count: usize,
    pub payload: Option<Vec<Elem>>,
}

/// Global view of one masked-array core, reconstructed from both fragment
/// holders.
#[derive(Debug, Clone)]
pub struct CoreTranscript {
    pub t: u8,
    pub masks: Vec<Elem>,
    pub perm: Vec<u16>,
    pub u: Vec<Elem>,
    pub v: Vec<Elem>,
    pub w: Vec<Elem>,
}

pub struct SimOutcome {
    /// Reconstructed ring outputs, `[instance][element]`.
    pub outputs: Vec<Vec<Elem>>,
    /// Raw per-party output fragments.
    pub party_outputs: [Vec<Vec<Elem>>; 3],
    pub meter: Meter,
    pub frames: Vec<RoutedFrame>,
    /// `[instance][core]` global masked-array views.
    pub cores: Vec<Vec<CoreTranscript>>,
    /// P2's observed verdicts, `[instance][core or slot]`.
    pub p2_verdicts: Vec<Vec<bool>>,
}

/// Splits plaintext ring inputs into the three parties' engine inputs.
pub fn split_inputs(
    cfg: &SimConfig,
    kind: &Kind,
    inputs: &[Vec<Elem>],
    pins: Option<&Pins>,
) -> Result<[PartyInputs; 3]> {
    split_inputs_with(
        &cfg.params,
        &cfg.seeds.client_set(),
        cfg.session,
        cfg.base_instance,
        kind,
        inputs,
        pins,
    )
}

/// Client-side share splitting, usable outside the simulator.
pub fn split_inputs_with(
    params: &RingParams,
    client: &SeedSet,
    session: [u8; 8],
    base_instance: u32,
    kind: &Kind,
    inputs: &[Vec<Elem>],
    pins: Option<&Pins>,
) -> Result<[PartyInputs; 3]> {
    let params = *params;
    let width = inputs.first().map_or(0, Vec::len);
    let mut p: [PartyInputs; 3] = Default::default();
    for inputs_of in p.iter_mut() {
        inputs_of.width = width;
    }
    for (idx, ins) in inputs.iter().enumerate() {
        let mut stream = client.stream(
            SeedLabel::Client,
            Tag {
                protocol: kind.wire_id(),
                session,
                instance: base_instance + idx as u32,
                lane: 0,
            },
        );
        if kind.is_rss() {
            let (mut f0, mut f1, mut f2) = (vec![], vec![], vec![]);
            for &x in ins {
                if !params.in_input_range(x) {
                    return Err(Error::Range(format!("input {x} outside the ellx domain")));
                }
                let x0 = stream.draw(&params);
                let x1 = stream.draw(&params);
                let x2 = params.sub(params.sub(x, x0), x1);
                f0.push([x0, x1]);
                f1.push([x1, x2]);
                f2.push([x2, x0]);
            }
            p[0].rss.push(f0);
            p[1].rss.push(f1);
            p[2].rss.push(f2);
        } else {
            let (mut f0, mut f1) = (vec![], vec![]);
            for (j, &x) in ins.iter().enumerate() {
                if !params.in_input_range(x) {
                    return Err(Error::Range(format!("input {x} outside the ellx domain")));
                }
                let mut r = stream.draw(&params);
                if let Some(pin) = pins.and_then(|p| p.client_frag0.as_ref()) {
                    r = pin[idx][j];
                }
                f0.push(r);
                f1.push(params.sub(x, r));
            }
            p[0].ass.push(f0);
            p[1].ass.push(f1);
        }
    }
    Ok(p)
}

/// Runs one protocol batch across all three engines in lockstep.
pub fn run_protocol(
    cfg: &SimConfig,
    kind: &Kind,
    inputs: &[Vec<Elem>],
    pins: Option<&Pins>,
) -> Result<SimOutcome> {
    if let Some(arity) = kind.arity() {
        if inputs.iter().any(|v| v.len() != arity) {
            return Err(Error::Request(format!(
                "{} expects {arity} input(s) per instance",
                kind.name()
            )));
        }
    }
    let party_inputs = split_inputs(cfg, kind, inputs, pins)?;
    let mut engines: Vec<_> = party_inputs
        .into_iter()
        .enumerate()
        .map(|(party, pi)| {
            let ctx = EngineCtx {
                params: cfg.params,
                session: cfg.session,
                protocol: kind.wire_id(),
                base_instance: cfg.base_instance,
                exec: cfg.exec,
                seeds: cfg.seeds.for_party(party as u8),
                pins: pins.and_then(|p| p.core.clone()),
            };
            build_engine(ctx, kind.clone(), party as u8, pi)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut meter = Meter::new();
    let mut frames = Vec::new();
    for round in 0..=2u8 {
        let mut outbox = Vec::new();
        for engine in engines.iter_mut() {
            outbox.extend(engine.sends(round)?);
        }
        for (to, frame) in outbox {
            let from = frame.header.sender;
            let dir = Dir::from_pair(from, to)
                .ok_or_else(|| Error::Frame(format!("bad route {from}->{to}")))?;
            let count = match &frame.payload {
                Payload::Elems(v) => v.len(),
                Payload::Raw(b) => b.len(),
            };
            meter.record(dir, round, count, &cfg.params);
            frames.push(RoutedFrame {
                from,
                to,
                round,
                count,
                payload: if cfg.record_payloads {
                    frame.expect_elems().ok().map(<[Elem]>::to_vec)
                } else {
                    None
                },
            });
            engines[usize::from(to)].receive(frame)?;
        }
    }

    // global core view before the engines are consumed
    let (c0, c1) = if cfg.record_cores {
        (engines[0].core_states(), engines[1].core_states())
    } else {
        (Vec::new(), Vec::new())
    };
    let params = cfg.params;
    let mut cores = Vec::with_capacity(c0.len());
    for (a, b) in c0.iter().zip(&c1) {
        let mut per_inst = Vec::with_capacity(a.len());
        for (s0, s1) in a.iter().zip(b) {
            assert_eq!(s0.t, s1.t);
            assert_eq!(s0.masks, s1.masks);
            assert_eq!(s0.perm, s1.perm);
            let join = |x: &[Elem], y: &[Elem]| -> Vec<Elem> {
                x.iter().zip(y).map(|(&a, &b)| params.add(a, b)).collect()
            };
            per_inst.push(CoreTranscript {
                t: s0.t,
                masks: s0.masks.clone(),
                perm: s0.perm.clone(),
                u: join(&s0.u, &s1.u),
                v: join(&s0.v, &s1.v),
                w: join(&s0.w, &s1.w),
            });
        }
        cores.push(per_inst);
    }
    let p2_verdicts = engines[2].observed_verdicts();

    let mut drain = engines.into_iter();
    let o0 = drain.next().unwrap().finish()?;
    let o1 = drain.next().unwrap().finish()?;
    let o2 = drain.next().unwrap().finish()?;

    let outputs = reconstruct_outputs(&params, kind, &o0, &o1, &o2)?;
    Ok(SimOutcome {
        outputs,
        party_outputs: [o0, o1, o2],
        meter,
        frames,
        cores,
        p2_verdicts,
    })
}

/// Joins per-party output fragments into ring values, enforcing replication
/// consistency for the replicated protocols.
pub fn reconstruct_outputs(
    params: &RingParams,
    kind: &Kind,
    o0: &[Vec<Elem>],
    o1: &[Vec<Elem>],
    o2: &[Vec<Elem>],
) -> Result<Vec<Vec<Elem>>> {
    if kind == &Kind::UCmp {
        return Ok(o2.to_vec());
    }
    if kind.is_rss() {
        let mut out = Vec::with_capacity(o0.len());
        for i in 0..o0.len() {
            let (a, b, c) = (&o0[i], &o1[i], &o2[i]);
            if a[1] != b[0] || b[1] != c[0] || c[1] != a[0] {
                return Err(Error::Session("replication consistency violated".into()));
            }
            out.push(vec![params.add(params.add(a[0], b[0]), c[0])]);
        }
        return Ok(out);
    }
    let mut out = Vec::with_capacity(o0.len());
    for i in 0..o0.len() {
        out.push(
            o0[i]
                .iter()
                .zip(&o1[i])
                .map(|(&a, &b)| params.add(a, b))
                .collect(),
        );
    }
    Ok(out)
}

/// Strictly single-threaded deterministic simulation; the public entry point.
pub fn simulate(
    cfg: &SimConfig,
    kind: &Kind,
    inputs: &[Vec<Elem>],
    pins: Option<&Pins>,
) -> Result<SimOutcome> {
    let mut cfg = cfg.clone();
    cfg.exec = ExecMode::Sequential;
    run_protocol(&cfg, kind, inputs, pins)
}

/// Convenience: run a batch of signed inputs and decode signed outputs.
pub fn simulate_signed(
    cfg: &SimConfig,
    kind: &Kind,
    inputs: &[Vec<i128>],
    pins: Option<&Pins>,
) -> Result<Vec<Vec<i128>>> {
    let params = cfg.params;
    let ring_inputs: Result<Vec<Vec<Elem>>> = inputs
        .iter()
        .map(|ins| ins.iter().map(|&v| params.encode_input(v)).collect())
        .collect();
    let outcome = simulate(cfg, kind, &ring_inputs?, pins)?;
    Ok(outcome
        .outputs
        .iter()
        .map(|o| o.iter().map(|&e| params.decode_signed(e)).collect())
        .collect())
}
