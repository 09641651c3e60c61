//! Deterministic seeded randomness shared pairwise/threewise between parties.
//!
//! Every stream is a ChaCha20 keystream keyed by
//! `SHA-256(seed || label || protocol || session || instance || lane || "b3pc.prg.v1")`,
//! so two holders of the same seed derive bit-identical draws for the same
//! tag, and streams with different tags are independent. Pinning vectors in
//! the tests freeze the construction; any drift is a breaking change.

use crate::error::{Error, Result};
use crate::ring::{Elem, RingParams};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub const SEED_BYTES: usize = 32;

/// A 32-byte secret seed plus the channel label it belongs to.
#[derive(Clone, PartialEq, Eq)]
pub struct Seed(pub [u8; SEED_BYTES]);

impl Seed {
    pub fn from_hex(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() != SEED_BYTES * 2 {
            return Err(Error::Config(format!(
                "seed must be {} hex chars, got {}",
                SEED_BYTES * 2,
                s.len()
            )));
        }
        let mut out = [0u8; SEED_BYTES];
        for (i, byte) in out.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&s[2 * i..2 * i + 2], 16)
                .map_err(|_| Error::Config(format!("invalid hex in seed: {s}")))?;
        }
        Ok(Self(out))
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl std::fmt::Debug for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // never print key material
        write!(f, "Seed(..)")
    }
}

/// Channel a seed belongs to, mixed into stream derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedLabel {
    S01,
    S02,
    S12,
    S012,
    S2,
    /// Client-side share-splitting randomness.
    Client,
}

impl SeedLabel {
    fn byte(self) -> u8 {
        match self {
            SeedLabel::S01 => 0x01,
            SeedLabel::S02 => 0x02,
            SeedLabel::S12 => 0x12,
            SeedLabel::S012 => 0x13,
            SeedLabel::S2 => 0x22,
            SeedLabel::Client => 0xcc,
        }
    }
}

/// Domain-separation tag. `instance` is the session-wide monotone instance
/// counter; `lane` separates independent streams inside one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tag {
    pub protocol: u8,
    pub session: [u8; 8],
    pub instance: u32,
    pub lane: u16,
}

/// Lane of the per-instance triple-mask stream.
pub const LANE_TRIPLE: u16 = 0x8000;
/// Lane of the replicated-sharing helper stream.
pub const LANE_RSS: u16 = 0x8001;
/// Lane of the assisting party's verdict-sharing stream.
pub const LANE_P2: u16 = 0x8002;
/// Lane of the input-vector shuffle stream.
pub const LANE_SHUFFLE: u16 = 0x8003;

/// One deterministic draw stream: single consumer, monotone position.
pub struct PrgStream {
    rng: ChaCha20Rng,
}

impl PrgStream {
    pub fn new(seed: &Seed, label: SeedLabel, tag: Tag) -> Self {
        let mut h = Sha256::new();
        h.update(seed.0);
        h.update([label.byte()]);
        h.update([tag.protocol]);
        h.update(tag.session);
        h.update(tag.instance.to_be_bytes());
        h.update(tag.lane.to_be_bytes());
        h.update(b"b3pc.prg.v1");
        let key: [u8; 32] = h.finalize().into();
        Self { rng: ChaCha20Rng::from_seed(key) }
    }

    /// Uniform element of `[0, 2^ell)`.
    pub fn draw(&mut self, params: &RingParams) -> Elem {
        self.rng.next_u64() & params.mask()
    }

    /// Uniform element of `[1, 2^ell)`; rejection-resamples zero.
    pub fn draw_nonzero(&mut self, params: &RingParams) -> Elem {
        loop {
            let v = self.draw(params);
            if v != 0 {
                return v;
            }
        }
    }

    /// Uniform bit.
    pub fn draw_bit(&mut self) -> u8 {
        (self.rng.next_u64() & 1) as u8
    }

    /// Uniform index in `[0, bound)`.
    pub fn draw_index(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        (self.rng.next_u64() % bound as u64) as usize
    }

    /// Fisher-Yates permutation of `0..n`: `perm[i]` is the source slot of
    /// the element that ends up at position `i`.
    pub fn draw_perm(&mut self, n: usize) -> Vec<u16> {
        let mut perm: Vec<u16> = (0..n as u16).collect();
        for i in (1..n).rev() {
            let j = self.draw_index(i + 1);
            perm.swap(i, j);
        }
        perm
    }
}

/// Shuffles `items` in place with the stream's next permutation draws.
pub fn shuffle<T>(stream: &mut PrgStream, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = stream.draw_index(i + 1);
        items.swap(i, j);
    }
}

/// Applies a permutation produced by [`PrgStream::draw_perm`].
pub fn apply_perm<T: Copy>(perm: &[u16], items: &[T]) -> Vec<T> {
    perm.iter().map(|&src| items[usize::from(src)]).collect()
}

/// The seeds one party (or the client) holds. Held seeds follow the session
/// topology: P0 holds s01/s02, P1 holds s01/s12, P2 holds s02/s12/s2, and
/// s012 is common to all three.
#[derive(Clone, Debug)]
pub struct SeedSet {
    pub s01: Option<Seed>,
    pub s02: Option<Seed>,
    pub s12: Option<Seed>,
    pub s012: Option<Seed>,
    pub s2: Option<Seed>,
    pub client: Option<Seed>,
}

impl SeedSet {
    pub fn empty() -> Self {
        Self { s01: None, s02: None, s12: None, s012: None, s2: None, client: None }
    }

    pub fn stream(&self, label: SeedLabel, tag: Tag) -> PrgStream {
        let seed = match label {
            SeedLabel::S01 => self.s01.as_ref(),
            SeedLabel::S02 => self.s02.as_ref(),
            SeedLabel::S12 => self.s12.as_ref(),
            SeedLabel::S012 => self.s012.as_ref(),
            SeedLabel::S2 => self.s2.as_ref(),
            SeedLabel::Client => self.client.as_ref(),
        }
        .unwrap_or_else(|| panic!("party does not hold seed {label:?}"));
        PrgStream::new(seed, label, tag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> RingParams {
        RingParams::new(16, 8, 4).unwrap()
    }

    fn tag(instance: u32, lane: u16) -> Tag {
        Tag { protocol: 1, session: *b"session!", instance, lane }
    }

    fn seed(byte: u8) -> Seed {
        Seed([byte; 32])
    }

    // Frozen outputs; these pin the stream construction bit-for-bit.
    #[test]
    fn pinned_vectors() {
        let mut s = PrgStream::new(&seed(7), SeedLabel::S01, tag(0, 0));
        let p = RingParams::new(64, 32, 16).unwrap();
        let got: Vec<u64> = (0..4).map(|_| s.draw(&p)).collect();
        assert_eq!(
            got,
            vec![
                16122372605052360248,
                10280305794675375393,
                17959601490441249673,
                13146506379421365066,
            ]
        );
        let mut s2 = PrgStream::new(
            &seed(3),
            SeedLabel::S12,
            Tag { protocol: 9, session: *b"abcdefgh", instance: 7, lane: 2 },
        );
        assert_eq!(s2.draw(&p), 9818966213272736659);
        assert_eq!(s2.draw(&p), 10502729961828807241);
    }

    #[test]
    fn determinism_across_holders() {
        let p = params();
        let mut a = PrgStream::new(&seed(3), SeedLabel::S01, tag(5, 2));
        let mut b = PrgStream::new(&seed(3), SeedLabel::S01, tag(5, 2));
        for _ in 0..100 {
            assert_eq!(a.draw(&p), b.draw(&p));
        }
        assert_eq!(a.draw_bit(), b.draw_bit());
        assert_eq!(a.draw_perm(10), b.draw_perm(10));
    }

    #[test]
    fn tag_separation() {
        let p = params();
        let mut a = PrgStream::new(&seed(3), SeedLabel::S01, tag(5, 2));
        let mut b = PrgStream::new(&seed(3), SeedLabel::S01, tag(6, 2));
        let mut c = PrgStream::new(&seed(3), SeedLabel::S02, tag(5, 2));
        let first = a.draw(&p);
        assert_ne!(first, b.draw(&p));
        assert_ne!(first, c.draw(&p));
    }

    #[test]
    fn bit_bias_small() {
        let p = params();
        let mut s = PrgStream::new(&seed(9), SeedLabel::S12, tag(0, 0));
        let n = 100_000;
        let mut ones = [0u32; 16];
        for _ in 0..n {
            let v = s.draw(&p);
            for (b, count) in ones.iter_mut().enumerate() {
                *count += ((v >> b) & 1) as u32;
            }
        }
        for (b, &count) in ones.iter().enumerate() {
            let bias = (f64::from(count) / n as f64 - 0.5).abs();
            assert!(bias < 0.01, "bit {b} bias {bias}");
        }
    }

    #[test]
    fn coin_mean() {
        let mut s = PrgStream::new(&seed(11), SeedLabel::S01, tag(1, 0));
        let n = 100_000;
        let ones: u32 = (0..n).map(|_| u32::from(s.draw_bit())).sum();
        let mean = f64::from(ones) / f64::from(n);
        assert!((0.49..=0.51).contains(&mean), "mean {mean}");
    }

    #[test]
    fn nonzero_never_zero() {
        let p = RingParams::new(10, 8, 4).unwrap();
        let mut s = PrgStream::new(&seed(2), SeedLabel::S02, tag(0, 0));
        for _ in 0..1_000_000 {
            assert_ne!(s.draw_nonzero(&p), 0);
        }
    }

    #[test]
    fn nonzero_frequencies_uniform() {
        let p = RingParams::new(8, 4, 2).unwrap();
        let mut s = PrgStream::new(&seed(2), SeedLabel::S02, tag(1, 0));
        let n = 255_000usize;
        let mut counts = [0u32; 256];
        for _ in 0..n {
            counts[s.draw_nonzero(&p) as usize] += 1;
        }
        assert_eq!(counts[0], 0);
        let expect = n as f64 / 255.0;
        for (v, &c) in counts.iter().enumerate().skip(1) {
            let rel = (f64::from(c) - expect).abs() / expect;
            assert!(rel < 0.15, "value {v} count {c}");
        }
    }

    #[test]
    fn shuffle_trivial_cases() {
        let mut s = PrgStream::new(&seed(1), SeedLabel::S01, tag(0, 1));
        let mut empty: Vec<u8> = vec![];
        shuffle(&mut s, &mut empty);
        assert!(empty.is_empty());
        let mut single = vec![42];
        shuffle(&mut s, &mut single);
        assert_eq!(single, vec![42]);
    }

    #[test]
    fn shuffle_uniform_over_permutations() {
        let mut counts = std::collections::HashMap::new();
        let trials = 100_000;
        for i in 0..trials {
            let mut s = PrgStream::new(&seed(4), SeedLabel::S01, tag(i, 0));
            let mut items = [0u8, 1, 2, 3];
            shuffle(&mut s, &mut items);
            *counts.entry(items).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 24);
        for (perm, &c) in &counts {
            let freq = f64::from(c) / f64::from(trials);
            assert!(
                (freq - 1.0 / 24.0).abs() < 0.005,
                "perm {perm:?} freq {freq}"
            );
        }
    }
}
