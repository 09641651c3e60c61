//! The three-party protocol engines.
//!
//! Every protocol runs in two online rounds (the replicated-sharing variants
//! add a round-0 prologue): round 1 carries the masked-and-shuffled
//! truncation arrays from P0/P1 to P2 (plus any Beaver openings between
//! P0 and P1), round 2 carries P2's blinded verdicts, Beaver `d` values and
//! triple corrections back. Engines are deterministic state machines: the
//! driver calls [`PartyEngine::sends`] for rounds 0..=2, delivers the
//! returned frames before the next round, and calls
//! [`PartyEngine::finish`] at the end.
//!
//! Stream-draw discipline (both holders of a seed always draw in the same
//! order, per instance):
//! - masked-array lane `k` (seed01): masks `r_*, r_0..r_ellx`, the flip bit
//!   when drawn internally, the shuffle, then the constant-share fragment;
//! - triple lane (seed02/seed12): the `a` fragments, then the `b` fragments
//!   slot by slot, then the seed-held `c` halves in ascending slot order;
//! - replicated-sharing lane: see `rss.rs`;
//! - verdict lane (seed2): one fragment per shared verdict in slot order.

use crate::error::{Error, Result};
use crate::ring::{Elem, RingParams};
use crate::transport::Frame;

pub mod drelu;
pub mod mul;
pub mod plu;
pub mod rss;
pub mod select;
pub mod sign;

pub use drelu::{strawman_drelu, DreluCoreState};

/// Which non-linear function a session instance computes, including its
/// public parameters (already ring-encoded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    DRelu,
    /// Unblinded comparison of a share pair; the assisting party learns the
    /// verdict. Simulator-only diagnostic building block.
    UCmp,
    Equality,
    Relu,
    Abs,
    DynRelu { alpha0: Elem, alpha1: Elem },
    Max2,
    Min2,
    FunnelRelu { scale: Elem, offset: Elem },
    Plu { spec: PluSpec },
    MaxN,
    MinN,
    Sort { descending: bool },
    MedN,
    RssDRelu,
    RssRelu,
}

/// Piecewise-linear unit description: `m + 1` strictly increasing breakpoints
/// and `m + 2` segment coefficients, all in ring encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PluSpec {
    pub gammas: Vec<Elem>,
    pub alphas: Vec<Elem>,
    pub betas: Vec<Elem>,
}

impl PluSpec {
    pub fn validate(&self, params: &RingParams) -> Result<()> {
        if self.gammas.is_empty() {
            return Err(Error::Request("piecewise spec needs at least one breakpoint".into()));
        }
        if self.alphas.len() != self.gammas.len() + 1 || self.betas.len() != self.gammas.len() + 1 {
            return Err(Error::Request(
                "piecewise spec needs one more coefficient pair than breakpoints".into(),
            ));
        }
        for w in self.gammas.windows(2) {
            if params.decode_signed(w[0]) >= params.decode_signed(w[1]) {
                return Err(Error::Request("breakpoints must be strictly increasing".into()));
            }
        }
        Ok(())
    }

    /// Number of inner breakpoint count `m` (segments = m + 2).
    pub fn m(&self) -> usize {
        self.gammas.len() - 1
    }

    /// Triple/verdict slots: `m + 2`.
    pub fn slots(&self) -> usize {
        self.gammas.len() + 1
    }

    /// The standard ReLU6 segment layout with breakpoint image `six`.
    pub fn relu6(params: &RingParams, six: Elem) -> PluSpec {
        let _ = params;
        PluSpec { gammas: vec![0, six], alphas: vec![0, 1, 0], betas: vec![0, 0, six] }
    }
}

impl Kind {
    pub fn wire_id(&self) -> u8 {
        match self {
            Kind::DRelu => 1,
            Kind::Equality => 2,
            Kind::Relu => 3,
            Kind::Abs => 4,
            Kind::DynRelu { .. } => 5,
            Kind::Max2 => 6,
            Kind::Min2 => 7,
            Kind::FunnelRelu { .. } => 8,
            Kind::Plu { .. } => 9,
            Kind::MaxN => 10,
            Kind::MinN => 11,
            Kind::Sort { .. } => 12,
            Kind::MedN => 13,
            Kind::RssDRelu => 14,
            Kind::RssRelu => 15,
            Kind::UCmp => 16,
        }
    }

    /// Public parameters as wire elements (paired with the id and flag byte).
    pub fn wire_params(&self) -> (u8, Vec<Elem>) {
        match self {
            Kind::DynRelu { alpha0, alpha1 } => (0, vec![*alpha0, *alpha1]),
            Kind::FunnelRelu { scale, offset } => (0, vec![*scale, *offset]),
            Kind::Plu { spec } => {
                let mut v = vec![spec.gammas.len() as Elem];
                v.extend_from_slice(&spec.gammas);
                v.extend_from_slice(&spec.alphas);
                v.extend_from_slice(&spec.betas);
                (0, v)
            }
            Kind::Sort { descending } => (u8::from(*descending), vec![]),
            _ => (0, vec![]),
        }
    }

    pub fn from_wire(id: u8, flag: u8, params: &[Elem]) -> Result<Kind> {
        let need = |n: usize| -> Result<()> {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::Request(format!("protocol {id} expects {n} parameters")))
            }
        };
        Ok(match id {
            1 => Kind::DRelu,
            2 => Kind::Equality,
            3 => Kind::Relu,
            4 => Kind::Abs,
            5 => {
                need(2)?;
                Kind::DynRelu { alpha0: params[0], alpha1: params[1] }
            }
            6 => Kind::Max2,
            7 => Kind::Min2,
            8 => {
                need(2)?;
                Kind::FunnelRelu { scale: params[0], offset: params[1] }
            }
            9 => {
                if params.is_empty() {
                    return Err(Error::Request("missing piecewise spec".into()));
                }
                let g = params[0] as usize;
                need(1 + g + 2 * (g + 1))?;
                let gammas = params[1..1 + g].to_vec();
                let alphas = params[1 + g..2 + 2 * g].to_vec();
                let betas = params[2 + 2 * g..3 + 3 * g].to_vec();
                Kind::Plu { spec: PluSpec { gammas, alphas, betas } }
            }
            10 => Kind::MaxN,
            11 => Kind::MinN,
            12 => Kind::Sort { descending: flag != 0 },
            13 => Kind::MedN,
            14 => Kind::RssDRelu,
            15 => Kind::RssRelu,
            16 => Kind::UCmp,
            other => return Err(Error::Request(format!("unknown protocol id {other}"))),
        })
    }

    /// Shared inputs per instance; `None` means variadic (`n >= 2`).
    pub fn arity(&self) -> Option<usize> {
        match self {
            Kind::Equality | Kind::Max2 | Kind::Min2 | Kind::UCmp => Some(2),
            Kind::MaxN | Kind::MinN | Kind::Sort { .. } | Kind::MedN => None,
            _ => Some(1),
        }
    }

    /// Output elements per instance given the input width.
    pub fn output_width(&self, n: usize) -> usize {
        match self {
            Kind::Sort { .. } => n,
            _ => 1,
        }
    }

    pub fn is_rss(&self) -> bool {
        matches!(self, Kind::RssDRelu | Kind::RssRelu)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kind::DRelu => "drelu",
            Kind::UCmp => "ucmp",
            Kind::Equality => "equality",
            Kind::Relu => "relu",
            Kind::Abs => "abs",
            Kind::DynRelu { .. } => "dynrelu",
            Kind::Max2 => "max2",
            Kind::Min2 => "min2",
            Kind::FunnelRelu { .. } => "funnel",
            Kind::Plu { .. } => "plu",
            Kind::MaxN => "max",
            Kind::MinN => "min",
            Kind::Sort { descending: true } => "sort",
            Kind::Sort { descending: false } => "sort-asc",
            Kind::MedN => "med",
            Kind::RssDRelu => "rss-drelu",
            Kind::RssRelu => "rss-relu",
        }
    }
}

/// One scheduled frame of a protocol run: everything the transport needs to
/// know statically. Rounds are 0 (prologue), 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduledFrame {
    pub from: u8,
    pub to: u8,
    pub round: u8,
    pub count: usize,
}

/// The static message schedule of `kind` for a batch of `b` instances of
/// input width `n`. The meter and the networked receive loop both derive
/// from this table.
pub fn schedule(kind: &Kind, params: &RingParams, b: usize, n: usize) -> Vec<ScheduledFrame> {
    let arr = usize::from(params.ellx()) + 2;
    let f = |from, to, round, count| ScheduledFrame { from, to, round, count };
    match kind {
        Kind::DRelu => vec![
            f(0, 2, 1, b * arr),
            f(1, 2, 1, b * arr),
            f(2, 0, 2, b),
            f(2, 1, 2, b),
        ],
        Kind::UCmp => vec![f(0, 2, 1, b * arr), f(1, 2, 1, b * arr)],
        Kind::Equality => vec![
            f(0, 2, 1, 2 * b * arr),
            f(1, 2, 1, 2 * b * arr),
            f(2, 0, 2, b),
            f(2, 1, 2, b),
        ],
        Kind::Relu
        | Kind::Abs
        | Kind::DynRelu { .. }
        | Kind::Max2
        | Kind::Min2
        | Kind::FunnelRelu { .. } => vec![
            f(0, 2, 1, b * arr),
            f(1, 2, 1, b * arr),
            f(0, 1, 1, b),
            f(1, 0, 1, b),
            f(2, 0, 2, b),
            f(2, 1, 2, 2 * b),
        ],
        Kind::Plu { spec } => {
            let k = spec.slots();
            vec![
                f(0, 2, 1, b * (k - 1) * arr),
                f(1, 2, 1, b * (k - 1) * arr),
                f(0, 1, 1, b),
                f(1, 0, 1, b),
                f(2, 0, 2, b * (2 * k + k.div_ceil(2))),
                f(2, 1, 2, b * (2 * k + k / 2)),
            ]
        }
        Kind::MaxN | Kind::MinN | Kind::MedN => {
            let pairs = n * (n - 1) / 2;
            vec![
                f(0, 2, 1, b * pairs * arr),
                f(1, 2, 1, b * pairs * arr),
                f(0, 1, 1, b * n),
                f(1, 0, 1, b * n),
                f(2, 0, 2, b * (n + n.div_ceil(2))),
                f(2, 1, 2, b * (n + n / 2)),
            ]
        }
        Kind::Sort { .. } => {
            let pairs = n * (n - 1) / 2;
            let nn = n * n;
            vec![
                f(0, 2, 1, b * pairs * arr),
                f(1, 2, 1, b * pairs * arr),
                f(0, 1, 1, b * n),
                f(1, 0, 1, b * n),
                f(2, 0, 2, b * (nn + nn.div_ceil(2))),
                f(2, 1, 2, b * (nn + nn / 2)),
            ]
        }
        Kind::RssDRelu => vec![
            f(2, 0, 0, b),
            f(0, 2, 1, b * (arr + 1)),
            f(1, 2, 1, b * arr),
            f(1, 0, 1, b),
            f(2, 1, 1, b),
            f(2, 0, 2, b),
            f(2, 1, 2, b),
        ],
        Kind::RssRelu => vec![
            f(2, 0, 0, b),
            f(0, 2, 1, b * (arr + 1)),
            f(1, 2, 1, b * arr),
            f(1, 0, 1, b),
            f(2, 1, 1, b),
            f(2, 0, 2, b),
            f(2, 1, 2, 2 * b),
            f(1, 0, 2, b),
            f(0, 2, 2, b),
        ],
    }
}

/// Per-party engine inputs: additive fragments for P0/P1 (P2 holds none), or
/// replicated fragment pairs for all three parties.
#[derive(Debug, Clone, Default)]
pub struct PartyInputs {
    /// `[instance][input]` additive fragments.
    pub ass: Vec<Vec<Elem>>,
    /// `[instance][input]` replicated fragment pairs.
    pub rss: Vec<Vec<[Elem; 2]>>,
    /// Inputs per instance; tells the shareless party the protocol width.
    pub width: usize,
}

/// Outputs one party hands back to the client: `[instance][element]`.
pub type PartyOutputs = Vec<Vec<Elem>>;

/// A deterministic protocol state machine for one party.
pub trait PartyEngine {
    /// Frames this party sends in `round` (0, 1 or 2) paired with their
    /// destination party, given everything delivered for earlier rounds.
    fn sends(&mut self, round: u8) -> Result<Vec<(u8, Frame)>>;

    /// Delivers one frame; the driver guarantees round order.
    fn receive(&mut self, frame: Frame) -> Result<()>;

    /// Consumes the engine after round 2 and returns the output fragments.
    fn finish(self: Box<Self>) -> Result<PartyOutputs>;

    /// Masked-array internals for transcript assembly (P0/P1 only).
    fn core_states(&self) -> Vec<Vec<DreluCoreState>> {
        Vec::new()
    }

    /// Plaintext verdicts observed by the assisting party, one list per
    /// instance (P2 only).
    fn observed_verdicts(&self) -> Vec<Vec<bool>> {
        Vec::new()
    }
}

/// Execution strategy for the data-parallel per-instance loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    /// Rayon-parallel when the `parallel` feature is enabled; falls back to
    /// sequential otherwise. Deterministic either way: all randomness is
    /// pre-keyed per instance.
    Parallel,
}

/// Everything an engine needs besides its inputs.
#[derive(Clone)]
pub struct EngineCtx {
    pub params: RingParams,
    pub session: [u8; 8],
    pub protocol: u8,
    pub base_instance: u32,
    pub exec: ExecMode,
    pub seeds: crate::prg::SeedSet,
    /// Simulator-only core-draw overrides, applied to every core.
    pub pins: Option<drelu::CorePins>,
}

impl EngineCtx {
    pub fn stream(
        &self,
        label: crate::prg::SeedLabel,
        instance_offset: usize,
        lane: u16,
    ) -> crate::prg::PrgStream {
        self.seeds.stream(
            label,
            crate::prg::Tag {
                protocol: self.protocol,
                session: self.session,
                instance: self.base_instance + instance_offset as u32,
                lane,
            },
        )
    }

    pub fn frame(&self, sender: u8, round: u8, elems: Vec<Elem>) -> Frame {
        Frame::elems(self.session, sender, self.protocol, self.base_instance, round, elems)
    }
}

/// Builds the engine for `party`. P0/P1 inputs are additive fragments except
/// for the replicated protocols, where all three parties hold fragment pairs.
pub fn build_engine(
    ctx: EngineCtx,
    kind: Kind,
    party: u8,
    inputs: PartyInputs,
) -> Result<Box<dyn PartyEngine + Send>> {
    match &kind {
        Kind::DRelu | Kind::UCmp | Kind::Equality => {
            Ok(Box::new(sign::SignEngine::new(ctx, kind, party, inputs.ass)?))
        }
        Kind::Relu
        | Kind::Abs
        | Kind::DynRelu { .. }
        | Kind::Max2
        | Kind::Min2
        | Kind::FunnelRelu { .. } => Ok(Box::new(mul::MulEngine::new(ctx, kind, party, inputs.ass)?)),
        Kind::Plu { .. } => Ok(Box::new(plu::PluEngine::new(ctx, kind, party, inputs.ass)?)),
        Kind::MaxN | Kind::MinN | Kind::Sort { .. } | Kind::MedN => Ok(Box::new(
            select::SelectEngine::new(ctx, kind, party, inputs.ass, inputs.width)?,
        )),
        Kind::RssDRelu | Kind::RssRelu => {
            Ok(Box::new(rss::RssEngine::new(ctx, kind, party, inputs.rss)?))
        }
    }
}

/// Maps `f` over a batch, in parallel when requested and available.
pub fn map_batch<T, U, F>(mode: ExecMode, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Maps `f` over instance indices `0..n`.
pub fn map_indices<U, F>(mode: ExecMode, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    (0..n).map(f).collect()
}
