//! Latency/throughput harness. Rows mirror the batched-evaluation layout:
//! per-protocol latency, amortized latency and throughput at a given batch
//! size, plus per-channel byte counts and the measured round count.

use crate::error::Result;
use crate::net::Client;
use crate::prg::{PrgStream, Seed, SeedLabel, Tag};
use crate::proto::{ExecMode, Kind};
use crate::ring::{Elem, RingParams};
use crate::sim::{run_protocol, SimConfig};
use crate::transport::{Dir, Meter};
use std::time::Instant;

/// Batch sizes used when none is given.
pub const BATCH_PRESETS: [usize; 6] = [1, 100, 1_000, 5_000, 10_000, 20_000];

#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub protocol: String,
    pub batch: usize,
    pub latency_us: f64,
    pub amortized_us: f64,
    pub ops_per_s: f64,
    pub bytes: [u64; 6],
    pub rounds: u8,
}

impl MetricsRow {
    pub fn csv_header() -> &'static str {
        "protocol,batch,latency_us,amortized_us,ops_per_s,\
         bytes_01,bytes_02,bytes_12,bytes_10,bytes_20,bytes_21,rounds"
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{:.2},{:.4},{:.1},{},{},{},{},{},{},{}",
            self.protocol,
            self.batch,
            self.latency_us,
            self.amortized_us,
            self.ops_per_s,
            self.bytes[0],
            self.bytes[1],
            self.bytes[2],
            self.bytes[3],
            self.bytes[4],
            self.bytes[5],
            self.rounds,
        )
    }

    fn from_meter(protocol: &str, batch: usize, latency_us: f64, meter: &Meter) -> MetricsRow {
        MetricsRow {
            protocol: protocol.into(),
            batch,
            latency_us,
            amortized_us: latency_us / batch as f64,
            ops_per_s: batch as f64 / (latency_us / 1e6),
            bytes: [Dir::C01, Dir::C02, Dir::C12, Dir::C10, Dir::C20, Dir::C21]
                .map(|d| meter.bytes(d)),
            rounds: meter.rounds(),
        }
    }
}

/// Deterministic in-range inputs for benches and sweeps: `batch` instances
/// of `width` values each, magnitudes kept below `2^(ellx-1)` so pairwise
/// differences stay in the input domain.
pub fn gen_inputs(params: &RingParams, width: usize, batch: usize, seed_byte: u8) -> Vec<Vec<Elem>> {
    let mut stream = PrgStream::new(
        &Seed([seed_byte; 32]),
        SeedLabel::Client,
        Tag { protocol: 0xee, session: *b"genbatch", instance: 0, lane: 0 },
    );
    let half_bits = u32::from(params.ellx()) - 1;
    let bound: i128 = 1i128 << half_bits;
    (0..batch)
        .map(|_| {
            (0..width)
                .map(|_| {
                    let raw = stream.draw(params) as i128 % (2 * bound - 1);
                    params.encode_input(raw - (bound - 1)).expect("in range")
                })
                .collect()
        })
        .collect()
}

/// Benches one protocol against the in-process engines.
pub fn bench_sim(
    cfg: &SimConfig,
    kind: &Kind,
    width: usize,
    batch: usize,
    iters: usize,
    exec: ExecMode,
) -> Result<MetricsRow> {
    let mut cfg = cfg.clone();
    cfg.exec = exec;
    cfg.record_payloads = false;
    let inputs = gen_inputs(&cfg.params, width, batch, 0x42);
    let mut meter = Meter::new();
    // warmup
    run_protocol(&cfg, kind, &inputs, None)?;
    let start = Instant::now();
    for _ in 0..iters.max(1) {
        let outcome = run_protocol(&cfg, kind, &inputs, None)?;
        meter = outcome.meter;
    }
    let latency_us = start.elapsed().as_secs_f64() * 1e6 / iters.max(1) as f64;
    Ok(MetricsRow::from_meter(kind.name(), batch, latency_us, &meter))
}

/// Benches one protocol against live parties through `client`.
pub fn bench_net(
    client: &mut Client,
    params: &RingParams,
    kind: &Kind,
    width: usize,
    batch: usize,
    iters: usize,
) -> Result<MetricsRow> {
    let inputs = gen_inputs(params, width, batch, 0x42);
    let ring_inputs: Vec<Vec<Elem>> = inputs;
    // warmup
    client.run(kind, &ring_inputs)?;
    let mut meter = Meter::new();
    let start = Instant::now();
    for _ in 0..iters.max(1) {
        let outcome = client.run(kind, &ring_inputs)?;
        meter = outcome.meter;
    }
    let latency_us = start.elapsed().as_secs_f64() * 1e6 / iters.max(1) as f64;
    Ok(MetricsRow::from_meter(kind.name(), batch, latency_us, &meter))
}
