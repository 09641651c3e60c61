//! Networked runtime: three long-running party processes plus a client, all
//! speaking the frame format over TCP (one connection per channel per
//! session).
//!
//! Connection setup: every party listens on its configured endpoint. The
//! first frame on any inbound connection is a HELLO naming the sender and
//! session; connections are routed to a per-session handler, spawned on
//! first contact. Within a session, party `i` dials every party `j < i` and
//! accepts the rest, so the graph converges without coordination. The
//! client connects to all three.
//!
//! Per request, the client sends a REQUEST (protocol id, width, batch,
//! public parameters, input fragments) to each party, the engines run the
//! scheduled rounds, and each party answers with a RESPONSE carrying its
//! output fragments plus a METER with its send-side accounting.

use crate::config::SessionConfig;
use crate::error::{Error, Result};
use crate::prg::SeedSet;
use crate::proto::{
    build_engine, schedule, EngineCtx, ExecMode, Kind, PartyInputs, ScheduledFrame,
};
use crate::ring::{Elem, RingParams};
use crate::sim::{reconstruct_outputs, split_inputs_with, FullSeeds};
use crate::transport::{
    Dir, Frame, Meter, Payload, CLIENT_ID, CTRL_BYE, CTRL_ERROR, CTRL_HELLO, CTRL_METER,
    CTRL_REQUEST, CTRL_RESPONSE,
};
use std::collections::HashMap;
use std::io::{BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc;
use std::time::Duration;

const DIAL_ATTEMPTS: u32 = 50;
const DIAL_BACKOFF: Duration = Duration::from_millis(100);
const DEFAULT_IO_TIMEOUT: Duration = Duration::from_secs(30);

fn io_timeout() -> Duration {
    std::env::var("B3PC_IO_TIMEOUT_MS")
        .ok()
        .and_then(|v| v.parse().ok())
        .map(Duration::from_millis)
        .unwrap_or(DEFAULT_IO_TIMEOUT)
}

/// One framed duplex channel.
pub struct Conn {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Conn {
    fn new(stream: TcpStream) -> Result<Conn> {
        stream.set_nodelay(true)?;
        stream.set_read_timeout(Some(io_timeout()))?;
        let writer = stream.try_clone()?;
        Ok(Conn { reader: BufReader::new(stream), writer })
    }

    fn send(&mut self, frame: &Frame, params: &RingParams) -> Result<()> {
        frame.write_to(&mut self.writer, params)?;
        self.writer.flush()?;
        Ok(())
    }

    fn recv(&mut self, params: &RingParams) -> Result<Frame> {
        Frame::decode_from(&mut self.reader, params)
    }
}

// --- request/response payload codecs ---------------------------------------

struct Request {
    kind: Kind,
    width: usize,
    batch: usize,
    /// Flattened `[instance][input]` fragments; additive parties carry one
    /// element per input, replicated parties two.
    shares: Vec<Elem>,
}

fn encode_request(kind: &Kind, width: usize, batch: usize, shares: &[Elem]) -> Vec<u8> {
    let (flag, params) = kind.wire_params();
    let mut out = Vec::new();
    out.push(kind.wire_id());
    out.push(flag);
    out.extend_from_slice(&(width as u32).to_le_bytes());
    out.extend_from_slice(&(batch as u32).to_le_bytes());
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for p in &params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    for s in shares {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

fn decode_request(bytes: &[u8]) -> Result<Request> {
    if bytes.len() < 14 {
        return Err(Error::Request("truncated request".into()));
    }
    let id = bytes[0];
    let flag = bytes[1];
    let width = u32::from_le_bytes(bytes[2..6].try_into().unwrap()) as usize;
    let batch = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let n_params = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
    let rest = &bytes[14..];
    if rest.len() < n_params * 8 || rest.len() % 8 != 0 {
        return Err(Error::Request("malformed request payload".into()));
    }
    let words: Vec<Elem> = rest
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let kind = Kind::from_wire(id, flag, &words[..n_params])?;
    Ok(Request { kind, width, batch, shares: words[n_params..].to_vec() })
}

fn elems_bytes(elems: &[Elem]) -> Vec<u8> {
    let mut out = Vec::with_capacity(elems.len() * 8);
    for e in elems {
        out.extend_from_slice(&e.to_le_bytes());
    }
    out
}

fn bytes_elems(bytes: &[u8]) -> Result<Vec<Elem>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::Frame("payload not word-aligned".into()));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

// --- party process ----------------------------------------------------------

/// Runs one party: binds its endpoint and serves sessions until the process
/// is terminated. Never returns except on a bind error.
pub fn run_party(cfg: &SessionConfig, party: u8) -> Result<()> {
    let addr = cfg.addr_of(party)?;
    let listener = TcpListener::bind((addr.host.as_str(), addr.port))?;
    serve_party(cfg, party, listener)
}

/// Accept loop over an already bound listener (lets tests pick free ports).
pub fn serve_party(cfg: &SessionConfig, party: u8, listener: TcpListener) -> Result<()> {
    let params = cfg.params()?;
    let mut sessions: HashMap<[u8; 8], mpsc::Sender<(u8, Conn)>> = HashMap::new();
    loop {
        let (stream, _) = listener.accept()?;
        let mut conn = match Conn::new(stream) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let hello = match conn.recv(&params) {
            Ok(f) if f.header.protocol == CTRL_HELLO => f,
            _ => continue,
        };
        let session = hello.header.session;
        let sender = hello.header.sender;
        let tx = sessions.entry(session).or_insert_with(|| {
            let (tx, rx) = mpsc::channel();
            let cfg = cfg.clone();
            std::thread::spawn(move || {
                if let Err(e) = run_session(&cfg, party, session, rx) {
                    eprintln!("party {party}: session failed: {e}");
                }
            });
            tx
        });
        if tx.send((sender, conn)).is_err() {
            sessions.remove(&session);
        }
    }
}

/// Channels of one live session, keyed by peer id.
struct SessionLinks {
    peers: [Option<Conn>; 3],
    client: Conn,
}

fn dial_peer(cfg: &SessionConfig, me: u8, peer: u8, session: [u8; 8]) -> Result<Conn> {
    let params = cfg.params()?;
    let addr = cfg.addr_of(peer)?;
    let mut last = None;
    for _ in 0..DIAL_ATTEMPTS {
        match TcpStream::connect((addr.host.as_str(), addr.port)) {
            Ok(stream) => {
                let mut conn = Conn::new(stream)?;
                conn.send(&Frame::raw(session, me, CTRL_HELLO, 0, vec![]), &params)?;
                return Ok(conn);
            }
            Err(e) => {
                last = Some(e);
                std::thread::sleep(DIAL_BACKOFF);
            }
        }
    }
    Err(Error::Session(format!("cannot reach party {peer}: {:?}", last)))
}

fn collect_links(
    cfg: &SessionConfig,
    me: u8,
    session: [u8; 8],
    rx: mpsc::Receiver<(u8, Conn)>,
) -> Result<SessionLinks> {
    let mut peers: [Option<Conn>; 3] = [None, None, None];
    let mut client = None;
    // inbound: all higher-id peers plus the client
    let expected_inbound = usize::from(2 - me) + 1;
    for _ in 0..expected_inbound {
        let (sender, conn) = rx
            .recv_timeout(io_timeout())
            .map_err(|_| Error::Session("session setup timed out".into()))?;
        if sender == CLIENT_ID {
            client = Some(conn);
        } else if sender > me && sender < 3 {
            peers[usize::from(sender)] = Some(conn);
        }
    }
    for peer in 0..me {
        peers[usize::from(peer)] = Some(dial_peer(cfg, me, peer, session)?);
    }
    let client = client.ok_or_else(|| Error::Session("client never connected".into()))?;
    Ok(SessionLinks { peers, client })
}

fn run_session(
    cfg: &SessionConfig,
    me: u8,
    session: [u8; 8],
    rx: mpsc::Receiver<(u8, Conn)>,
) -> Result<()> {
    let params = cfg.params()?;
    let mut links = collect_links(cfg, me, session, rx)?;
    let seeds = cfg.seeds()?.for_party(me);
    let mut next_instance: u32 = 0;
    loop {
        let frame = match links.client.recv(&params) {
            Ok(f) => f,
            Err(_) => return Ok(()), // client gone; session over
        };
        match frame.header.protocol {
            CTRL_BYE => return Ok(()),
            CTRL_REQUEST => {
                let req = decode_request(frame.expect_raw()?)?;
                let base = next_instance;
                next_instance += req.batch as u32;
                match serve_request(cfg, me, session, &seeds, &mut links, &req, base) {
                    Ok(()) => {}
                    Err(e) => {
                        let msg = e.to_string().into_bytes();
                        let _ = links
                            .client
                            .send(&Frame::raw(session, me, CTRL_ERROR, 3, msg), &params);
                        return Err(e);
                    }
                }
            }
            other => {
                return Err(Error::UnexpectedFrame {
                    expected: "request or bye".into(),
                    got: format!("control {other:#x}"),
                })
            }
        }
    }
}

fn party_inputs_from(req: &Request, me: u8) -> Result<PartyInputs> {
    let mut pi = PartyInputs { width: req.width, ..Default::default() };
    let per = if req.kind.is_rss() { 2 * req.width } else { req.width };
    if req.kind.is_rss() {
        if req.shares.len() != req.batch * per {
            return Err(Error::Request("bad share payload size".into()));
        }
        for i in 0..req.batch {
            let block = &req.shares[i * per..(i + 1) * per];
            pi.rss.push(block.chunks_exact(2).map(|c| [c[0], c[1]]).collect());
        }
    } else if me != 2 {
        if req.shares.len() != req.batch * per {
            return Err(Error::Request("bad share payload size".into()));
        }
        for i in 0..req.batch {
            pi.ass.push(req.shares[i * per..(i + 1) * per].to_vec());
        }
    } else if !req.shares.is_empty() {
        return Err(Error::Request("assisting party must not receive fragments".into()));
    }
    Ok(pi)
}

fn serve_request(
    cfg: &SessionConfig,
    me: u8,
    session: [u8; 8],
    seeds: &SeedSet,
    links: &mut SessionLinks,
    req: &Request,
    base_instance: u32,
) -> Result<()> {
    let params = cfg.params()?;
    if req.kind == Kind::UCmp {
        return Err(Error::Request("ucmp is a simulator-only diagnostic".into()));
    }
    if cfg.rss() != req.kind.is_rss() {
        return Err(Error::Request(format!(
            "protocol {} does not match the session sharing scheme",
            req.kind.name()
        )));
    }
    let inputs = party_inputs_from(req, me)?;
    let ctx = EngineCtx {
        params,
        session,
        protocol: req.kind.wire_id(),
        base_instance,
        exec: ExecMode::Parallel,
        seeds: seeds.clone(),
        pins: None,
    };
    let mut engine = build_engine(ctx, req.kind.clone(), me, inputs)?;
    let plan = schedule(&req.kind, &params, req.batch, req.width);
    let mut meter = Meter::new();

    for round in 0..=2u8 {
        let outgoing = engine.sends(round)?;
        let mut grouped: HashMap<u8, Vec<Frame>> = HashMap::new();
        for (to, frame) in outgoing {
            let dir = Dir::from_pair(me, to)
                .ok_or_else(|| Error::Frame(format!("bad route {me}->{to}")))?;
            let count = match &frame.payload {
                Payload::Elems(v) => v.len(),
                Payload::Raw(b) => b.len(),
            };
            meter.record(dir, round, count, &params);
            grouped.entry(to).or_default().push(frame);
        }
        let expected: Vec<&ScheduledFrame> = plan
            .iter()
            .filter(|f| f.to == me && f.round == round)
            .collect();

        // split every peer link into halves so this round's writes can run
        // concurrently with the scheduled reads: both endpoints of a channel
        // may push large frames at once, and neither may block the other
        let mut readers: [Option<&mut BufReader<TcpStream>>; 3] = [None, None, None];
        let mut writers: [Option<&mut TcpStream>; 3] = [None, None, None];
        for (i, link) in links.peers.iter_mut().enumerate() {
            if let Some(conn) = link.as_mut() {
                readers[i] = Some(&mut conn.reader);
                writers[i] = Some(&mut conn.writer);
            }
        }
        std::thread::scope(|scope| -> Result<()> {
            let mut handles = Vec::new();
            for (to, frames) in grouped {
                let writer = writers[usize::from(to)]
                    .take()
                    .ok_or_else(|| Error::Session(format!("no link to party {to}")))?;
                handles.push(scope.spawn(move || -> Result<()> {
                    for frame in frames {
                        frame.write_to(writer, &params)?;
                    }
                    writer.flush()?;
                    Ok(())
                }));
            }
            for exp in &expected {
                let reader = readers[usize::from(exp.from)]
                    .as_mut()
                    .ok_or_else(|| Error::Session(format!("no link to party {}", exp.from)))?;
                let frame = Frame::decode_from(reader, &params).map_err(|e| {
                    Error::Session(format!("party {} unreachable mid-round: {e}", exp.from))
                })?;
                if frame.header.sender != exp.from
                    || frame.header.round != round
                    || frame.header.session != session
                {
                    return Err(Error::UnexpectedFrame {
                        expected: format!("round {round} from {}", exp.from),
                        got: format!(
                            "round {} from {}",
                            frame.header.round, frame.header.sender
                        ),
                    });
                }
                let got = frame.expect_elems()?.len();
                if got != exp.count {
                    return Err(Error::Frame(format!(
                        "scheduled {} elements from {}, got {got}",
                        exp.count, exp.from
                    )));
                }
                engine.receive(frame)?;
            }
            for handle in handles {
                handle
                    .join()
                    .map_err(|_| Error::Session("writer panicked".into()))??;
            }
            Ok(())
        })?;
    }

    let outputs = engine.finish()?;
    let flat: Vec<Elem> = outputs.iter().flatten().copied().collect();
    links
        .client
        .send(&Frame::raw(session, me, CTRL_RESPONSE, 3, elems_bytes(&flat)), &params)?;
    links
        .client
        .send(&Frame::raw(session, me, CTRL_METER, 3, meter.encode()), &params)?;
    Ok(())
}

// --- client -----------------------------------------------------------------

/// Result of one networked protocol run.
pub struct RunOutcome {
    /// Reconstructed ring outputs, `[instance][element]`.
    pub outputs: Vec<Vec<Elem>>,
    /// Per-party output fragments as returned on the wire.
    pub party_outputs: [Vec<Vec<Elem>>; 3],
    /// Sum of the three parties' send-side meters.
    pub meter: Meter,
}

/// A client session against three running parties.
pub struct Client {
    params: RingParams,
    session: [u8; 8],
    seeds: FullSeeds,
    conns: [Conn; 3],
    next_instance: u32,
}

impl Client {
    pub fn connect(cfg: &SessionConfig) -> Result<Client> {
        let params = cfg.params()?;
        let session = cfg.session_bytes()?;
        let seeds = cfg.seeds()?;
        let mut conns = Vec::new();
        for id in 0..3u8 {
            let addr = cfg.addr_of(id)?;
            let mut last = None;
            let mut made = None;
            for _ in 0..DIAL_ATTEMPTS {
                match TcpStream::connect((addr.host.as_str(), addr.port)) {
                    Ok(stream) => {
                        let mut conn = Conn::new(stream)?;
                        conn.send(&Frame::raw(session, CLIENT_ID, CTRL_HELLO, 0, vec![]), &params)?;
                        made = Some(conn);
                        break;
                    }
                    Err(e) => {
                        last = Some(e);
                        std::thread::sleep(DIAL_BACKOFF);
                    }
                }
            }
            conns.push(made.ok_or_else(|| {
                Error::Session(format!("cannot reach party {id}: {last:?}"))
            })?);
        }
        let conns: [Conn; 3] = conns.try_into().map_err(|_| Error::Session("conns".into()))?;
        Ok(Client { params, session, seeds, conns, next_instance: 0 })
    }

    /// Splits `inputs`, submits one batch, waits for outputs, reconstructs.
    pub fn run(&mut self, kind: &Kind, inputs: &[Vec<Elem>]) -> Result<RunOutcome> {
        let params = self.params;
        for ins in inputs {
            for &x in ins {
                if !params.in_input_range(x) {
                    return Err(Error::Range(format!("input {x} outside the ellx domain")));
                }
            }
        }
        let width = inputs.first().map_or(0, Vec::len);
        let batch = inputs.len();
        let base = self.next_instance;
        self.next_instance += batch as u32;
        let split = split_inputs_with(
            &params,
            &self.seeds.client_set(),
            self.session,
            base,
            kind,
            inputs,
            None,
        )?;
        for (party, pi) in split.iter().enumerate() {
            let shares: Vec<Elem> = if kind.is_rss() {
                pi.rss
                    .iter()
                    .flat_map(|inst| inst.iter().flat_map(|p| p.iter().copied()))
                    .collect()
            } else {
                pi.ass.iter().flatten().copied().collect()
            };
            let payload = encode_request(kind, width, batch, &shares);
            self.conns[party].send(
                &Frame::raw(self.session, CLIENT_ID, CTRL_REQUEST, 0, payload),
                &params,
            )?;
        }
        let mut party_outputs: [Vec<Vec<Elem>>; 3] = Default::default();
        let mut meter = Meter::new();
        for party in 0..3usize {
            let response = self.conns[party].recv(&params)?;
            match response.header.protocol {
                CTRL_RESPONSE => {}
                CTRL_ERROR => {
                    let msg = String::from_utf8_lossy(response.expect_raw()?).into_owned();
                    return Err(Error::Session(format!("party {party}: {msg}")));
                }
                other => {
                    return Err(Error::UnexpectedFrame {
                        expected: "response".into(),
                        got: format!("control {other:#x}"),
                    })
                }
            }
            let flat = bytes_elems(response.expect_raw()?)?;
            let out_width = if kind.is_rss() { 2 } else { kind.output_width(width) };
            let expect = match (kind.is_rss(), party) {
                (false, 2) => 0,
                _ => batch * out_width,
            };
            if flat.len() != expect {
                return Err(Error::Frame(format!(
                    "party {party} returned {} output elements, expected {expect}",
                    flat.len()
                )));
            }
            party_outputs[party] = flat.chunks(out_width.max(1)).map(<[Elem]>::to_vec).collect();
            let m = self.conns[party].recv(&params)?;
            if m.header.protocol != CTRL_METER {
                return Err(Error::UnexpectedFrame {
                    expected: "meter".into(),
                    got: format!("control {:#x}", m.header.protocol),
                });
            }
            meter.merge(&Meter::decode(m.expect_raw()?)?);
        }
        let outputs = reconstruct_outputs(
            &params,
            kind,
            &party_outputs[0],
            &party_outputs[1],
            &party_outputs[2],
        )?;
        Ok(RunOutcome { outputs, party_outputs, meter })
    }

    pub fn bye(&mut self) {
        for conn in &mut self.conns {
            let _ = conn.send(
                &Frame::raw(self.session, CLIENT_ID, CTRL_BYE, 0xff, vec![]),
                &self.params,
            );
        }
    }
}
