//! Channel framing and byte/round accounting.
//!
//! Every message is one frame: a 24-byte header followed by `count` ring
//! elements packed little-endian at `ell/8` bytes each. Control frames
//! (protocol ids `0xF0` and up) carry raw bytes instead, with `count` giving
//! the byte length.

use crate::error::{Error, Result};
use crate::ring::{Elem, RingParams};
use std::io::{Read, Write};

pub const MAGIC: [u8; 4] = *b"B3PC";
pub const VERSION: u8 = 1;
pub const HEADER_BYTES: usize = 24;
/// Sender id used by the client.
pub const CLIENT_ID: u8 = 0xff;

// Control-plane protocol ids.
pub const CTRL_HELLO: u8 = 0xf0;
pub const CTRL_REQUEST: u8 = 0xf1;
pub const CTRL_RESPONSE: u8 = 0xf2;
pub const CTRL_METER: u8 = 0xf3;
pub const CTRL_ERROR: u8 = 0xf4;
pub const CTRL_BYE: u8 = 0xf5;

const MAX_PAYLOAD_ELEMS: u64 = 1 << 31;

/// A directed party-to-party channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dir {
    C01,
    C02,
    C12,
    C10,
    C20,
    C21,
}

pub const ALL_DIRS: [Dir; 6] = [Dir::C01, Dir::C02, Dir::C12, Dir::C10, Dir::C20, Dir::C21];

impl Dir {
    pub fn from_pair(from: u8, to: u8) -> Option<Dir> {
        match (from, to) {
            (0, 1) => Some(Dir::C01),
            (0, 2) => Some(Dir::C02),
            (1, 2) => Some(Dir::C12),
            (1, 0) => Some(Dir::C10),
            (2, 0) => Some(Dir::C20),
            (2, 1) => Some(Dir::C21),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Dir::C01 => 0,
            Dir::C02 => 1,
            Dir::C12 => 2,
            Dir::C10 => 3,
            Dir::C20 => 4,
            Dir::C21 => 5,
        }
    }

    pub fn endpoints(self) -> (u8, u8) {
        match self {
            Dir::C01 => (0, 1),
            Dir::C02 => (0, 2),
            Dir::C12 => (1, 2),
            Dir::C10 => (1, 0),
            Dir::C20 => (2, 0),
            Dir::C21 => (2, 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub session: [u8; 8],
    pub sender: u8,
    pub protocol: u8,
    pub instance: u32,
    pub round: u8,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Elems(Vec<Elem>),
    Raw(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub header: FrameHeader,
    pub payload: Payload,
}

impl Frame {
    pub fn elems(
        session: [u8; 8],
        sender: u8,
        protocol: u8,
        instance: u32,
        round: u8,
        elems: Vec<Elem>,
    ) -> Frame {
        let count = elems.len() as u32;
        Frame {
            header: FrameHeader { session, sender, protocol, instance, round, count },
            payload: Payload::Elems(elems),
        }
    }

    pub fn raw(session: [u8; 8], sender: u8, protocol: u8, round: u8, bytes: Vec<u8>) -> Frame {
        let count = bytes.len() as u32;
        Frame {
            header: FrameHeader { session, sender, protocol, instance: 0, round, count },
            payload: Payload::Raw(bytes),
        }
    }

    pub fn expect_elems(&self) -> Result<&[Elem]> {
        match &self.payload {
            Payload::Elems(v) => Ok(v),
            Payload::Raw(_) => Err(Error::Frame("expected element payload".into())),
        }
    }

    pub fn expect_raw(&self) -> Result<&[u8]> {
        match &self.payload {
            Payload::Raw(v) => Ok(v),
            Payload::Elems(_) => Err(Error::Frame("expected raw payload".into())),
        }
    }

    pub fn is_control(&self) -> bool {
        self.header.protocol >= CTRL_HELLO
    }

    pub fn encode(&self, params: &RingParams) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(HEADER_BYTES);
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&h.session);
        out.push(h.sender);
        out.push(h.protocol);
        out.extend_from_slice(&h.instance.to_le_bytes());
        out.push(h.round);
        out.extend_from_slice(&h.count.to_le_bytes());
        debug_assert_eq!(out.len(), HEADER_BYTES);
        match &self.payload {
            Payload::Elems(elems) => {
                let w = params.elem_bytes();
                out.reserve(elems.len() * w);
                for &e in elems {
                    out.extend_from_slice(&e.to_le_bytes()[..w]);
                }
            }
            Payload::Raw(bytes) => out.extend_from_slice(bytes),
        }
        out
    }

    pub fn decode_from(reader: &mut impl Read, params: &RingParams) -> Result<Frame> {
        let mut head = [0u8; HEADER_BYTES];
        reader.read_exact(&mut head)?;
        if head[0..4] != MAGIC {
            return Err(Error::Frame("bad magic".into()));
        }
        if head[4] != VERSION {
            return Err(Error::Frame(format!("unsupported version {}", head[4])));
        }
        let mut session = [0u8; 8];
        session.copy_from_slice(&head[5..13]);
        let sender = head[13];
        let protocol = head[14];
        let instance = u32::from_le_bytes(head[15..19].try_into().unwrap());
        let round = head[19];
        let count = u32::from_le_bytes(head[20..24].try_into().unwrap());
        if u64::from(count) > MAX_PAYLOAD_ELEMS {
            return Err(Error::Frame(format!("oversized frame: {count} elements")));
        }
        let header = FrameHeader { session, sender, protocol, instance, round, count };
        let payload = if protocol >= CTRL_HELLO {
            let mut bytes = vec![0u8; count as usize];
            reader.read_exact(&mut bytes)?;
            Payload::Raw(bytes)
        } else {
            let w = params.elem_bytes();
            let mut bytes = vec![0u8; count as usize * w];
            reader.read_exact(&mut bytes)?;
            let mut elems = Vec::with_capacity(count as usize);
            for chunk in bytes.chunks_exact(w) {
                let mut buf = [0u8; 8];
                buf[..w].copy_from_slice(chunk);
                elems.push(u64::from_le_bytes(buf));
            }
            Payload::Elems(elems)
        };
        Ok(Frame { header, payload })
    }

    pub fn write_to(&self, writer: &mut impl Write, params: &RingParams) -> Result<()> {
        writer.write_all(&self.encode(params))?;
        Ok(())
    }
}

/// Per-channel payload accounting for one protocol run. Bits count ring
/// elements only (`count * ell`); framing overhead is excluded so the totals
/// are comparable across element widths.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Meter {
    bits: [u64; 6],
    msgs: [u64; 6],
    prologue_bits: [u64; 6],
    rounds_seen: u8,
}

impl Meter {
    pub fn new() -> Meter {
        Meter::default()
    }

    pub fn record(&mut self, dir: Dir, round: u8, elem_count: usize, params: &RingParams) {
        let bits = elem_count as u64 * u64::from(params.ell());
        if round == 0 {
            self.prologue_bits[dir.index()] += bits;
        } else {
            self.bits[dir.index()] += bits;
            self.rounds_seen = self.rounds_seen.max(round);
        }
        self.msgs[dir.index()] += 1;
    }

    /// Online payload bits sent on `dir` (prologue excluded).
    pub fn bits(&self, dir: Dir) -> u64 {
        self.bits[dir.index()]
    }

    /// Prologue (round 0) payload bits sent on `dir`.
    pub fn prologue_bits(&self, dir: Dir) -> u64 {
        self.prologue_bits[dir.index()]
    }

    pub fn total_bits(&self) -> u64 {
        self.bits.iter().sum()
    }

    pub fn msgs(&self, dir: Dir) -> u64 {
        self.msgs[dir.index()]
    }

    /// Number of unparallelizable online rounds.
    pub fn rounds(&self) -> u8 {
        self.rounds_seen
    }

    pub fn bytes(&self, dir: Dir) -> u64 {
        (self.bits(dir) + self.prologue_bits(dir)) / 8
    }

    pub fn merge(&mut self, other: &Meter) {
        for i in 0..6 {
            self.bits[i] += other.bits[i];
            self.msgs[i] += other.msgs[i];
            self.prologue_bits[i] += other.prologue_bits[i];
        }
        self.rounds_seen = self.rounds_seen.max(other.rounds_seen);
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(6 * 16 + 1);
        for i in 0..6 {
            out.extend_from_slice(&self.bits[i].to_le_bytes());
        }
        for i in 0..6 {
            out.extend_from_slice(&self.prologue_bits[i].to_le_bytes());
        }
        for i in 0..6 {
            out.extend_from_slice(&self.msgs[i].to_le_bytes());
        }
        out.push(self.rounds_seen);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Meter> {
        if bytes.len() != 6 * 24 + 1 {
            return Err(Error::Frame("bad meter payload".into()));
        }
        let mut m = Meter::new();
        let word = |i: usize| u64::from_le_bytes(bytes[i * 8..(i + 1) * 8].try_into().unwrap());
        for i in 0..6 {
            m.bits[i] = word(i);
            m.prologue_bits[i] = word(6 + i);
            m.msgs[i] = word(12 + i);
        }
        m.rounds_seen = bytes[6 * 24];
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn frame_round_trip(
            ell_idx in 0usize..4,
            session in proptest::array::uniform8(any::<u8>()),
            sender in 0u8..3,
            protocol in 1u8..17,
            instance in any::<u32>(),
            round in 0u8..4,
            elems in proptest::collection::vec(any::<u64>(), 0..64),
        ) {
            let ells = [16u8, 24, 40, 64];
            let params = RingParams::with_default_frac(ells[ell_idx], ells[ell_idx] / 2 - 1).unwrap();
            let elems: Vec<u64> = elems.into_iter().map(|e| params.reduce(e)).collect();
            let frame = Frame::elems(session, sender, protocol, instance, round, elems);
            let bytes = frame.encode(&params);
            let decoded = Frame::decode_from(&mut &bytes[..], &params).unwrap();
            prop_assert_eq!(frame, decoded);
        }

        #[test]
        fn control_frame_round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
            let params = RingParams::new(40, 16, 8).unwrap();
            let frame = Frame::raw([9; 8], CLIENT_ID, CTRL_REQUEST, 0, bytes);
            let encoded = frame.encode(&params);
            let decoded = Frame::decode_from(&mut &encoded[..], &params).unwrap();
            prop_assert_eq!(frame, decoded);
        }
    }

    #[test]
    fn element_width_is_ell_over_8() {
        let params = RingParams::new(40, 16, 8).unwrap();
        let frame = Frame::elems([0; 8], 0, 1, 0, 1, vec![0xffff_ffff_ff, 1]);
        let bytes = frame.encode(&params);
        assert_eq!(bytes.len(), HEADER_BYTES + 2 * 5);
    }

    #[test]
    fn meter_round_trip() {
        let params = RingParams::new(40, 16, 8).unwrap();
        let mut m = Meter::new();
        m.record(Dir::C02, 1, 18, &params);
        m.record(Dir::C20, 2, 1, &params);
        m.record(Dir::C20, 0, 1, &params);
        assert_eq!(m.bits(Dir::C02), 720);
        assert_eq!(m.rounds(), 2);
        assert_eq!(m.prologue_bits(Dir::C20), 40);
        let decoded = Meter::decode(&m.encode()).unwrap();
        assert_eq!(m, decoded);
    }

    #[test]
    fn bad_magic_rejected() {
        let params = RingParams::new(16, 8, 4).unwrap();
        let mut bytes = Frame::elems([0; 8], 0, 1, 0, 1, vec![1]).encode(&params);
        bytes[0] = b'X';
        assert!(Frame::decode_from(&mut &bytes[..], &params).is_err());
    }
}
