//! Command-line front end: party processes, the client, the deterministic
//! simulator, the exhaustive oracle suites, and the bench harness.

use b3pc::bench::{bench_net, bench_sim, gen_inputs, MetricsRow, BATCH_PRESETS};
use b3pc::config::SessionConfig;
use b3pc::fixed::{fx_decode, fx_encode};
use b3pc::net::{run_party, Client};
use b3pc::oracle;
use b3pc::proto::{ExecMode, Kind, PluSpec};
use b3pc::ring::{Elem, RingParams};
use b3pc::sim::{simulate, FullSeeds, SimConfig};
use b3pc::trunc::{classify, pattern_check, trunc_reconstruct, PatternVerdict, TruncClass};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "b3pc", about = "Three-party secure non-linear computation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one long-lived party process.
    Party {
        #[arg(long)]
        id: u8,
        #[arg(long)]
        config: PathBuf,
    },
    /// Client-side operations against running parties.
    Client {
        #[command(subcommand)]
        command: ClientCommand,
    },
    /// Deterministic in-process simulation checked against the plaintext
    /// oracle.
    Simulate {
        #[arg(long)]
        protocol: String,
        #[arg(long, default_value_t = 40)]
        ring_bits: u8,
        #[arg(long, default_value_t = 16)]
        prec_bits: u8,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Master seed (hex) from which all session seeds derive.
        #[arg(long)]
        pin_seed: Option<String>,
        /// Inputs per instance for the n-ary protocols.
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Exhaustive verification suites.
    Oracle {
        /// `truncation`, `drelu` or `all`.
        suite: String,
        #[arg(long, default_value_t = 12)]
        ring_bits: u8,
        #[arg(long, default_value_t = 4)]
        prec_bits: u8,
    },
    /// Latency/throughput measurements; emits CSV rows.
    Bench {
        #[arg(long)]
        protocol: String,
        /// Batch size; all presets when omitted.
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long, default_value_t = 3)]
        iters: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        /// `sim` (default) or `net`; `net` needs running parties.
        #[arg(long, default_value = "sim")]
        mode: String,
        /// Force the sequential engine path.
        #[arg(long)]
        seq: bool,
        #[arg(long, default_value_t = 9)]
        n: usize,
        #[arg(long, default_value_t = 40)]
        ring_bits: u8,
        #[arg(long, default_value_t = 16)]
        prec_bits: u8,
    },
}

#[derive(Subcommand)]
enum ClientCommand {
    /// Submit a batch and print the reconstructed outputs.
    Run(ClientRun),
}

#[derive(Args)]
struct ClientRun {
    #[arg(long)]
    protocol: String,
    #[arg(long)]
    config: PathBuf,
    /// Input file: one instance per line; n-ary instances hold
    /// comma/space-separated values.
    #[arg(long)]
    inputs: Option<PathBuf>,
    /// Inline comma-separated values, one instance per value (unary
    /// protocols) or per `;`-separated group.
    #[arg(long)]
    values: Option<String>,
    /// Write outputs here instead of stdout, line-aligned with the inputs.
    #[arg(long)]
    output: Option<PathBuf>,
    /// dynrelu coefficients (plain integers).
    #[arg(long)]
    alpha0: Option<i64>,
    #[arg(long)]
    alpha1: Option<i64>,
    /// funnel map `T(x) = scale*x + offset` (scale plain, offset scaled).
    #[arg(long)]
    tmap: Option<String>,
    /// plu breakpoints and per-segment coefficients, comma separated;
    /// alphas are plain integers, betas/gammas are scaled like inputs.
    #[arg(long)]
    gammas: Option<String>,
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    betas: Option<String>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> b3pc::Result<ExitCode> {
    match Cli::parse().command {
        Command::Party { id, config } => {
            let cfg = SessionConfig::load(&config)?;
            for w in cfg.validate()? {
                eprintln!("warning: {w}");
            }
            run_party(&cfg, id)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Client { command: ClientCommand::Run(args) } => client_run(args),
        Command::Simulate { protocol, ring_bits, prec_bits, trials, pin_seed, n } => {
            simulate_cmd(&protocol, ring_bits, prec_bits, trials, pin_seed.as_deref(), n)
        }
        Command::Oracle { suite, ring_bits, prec_bits } => oracle_cmd(&suite, ring_bits, prec_bits),
        Command::Bench { protocol, batch, iters, config, mode, seq, n, ring_bits, prec_bits } => {
            bench_cmd(&protocol, batch, iters, config, &mode, seq, n, ring_bits, prec_bits)
        }
    }
}

/// Builds a protocol kind from its CLI name plus optional arguments.
fn parse_kind(name: &str, params: &RingParams, args: Option<&ClientRun>) -> b3pc::Result<Kind> {
    let scale_list = |s: &str, scaled: bool| -> b3pc::Result<Vec<Elem>> {
        s.split(',')
            .map(|tok| {
                let v: f64 = tok
                    .trim()
                    .parse()
                    .map_err(|_| b3pc::Error::Request(format!("bad number {tok:?}")))?;
                if scaled {
                    fx_encode(params, v)
                } else {
                    params.encode_signed(v as i128)
                }
            })
            .collect()
    };
    Ok(match name {
        "drelu" => Kind::DRelu,
        "equality" => Kind::Equality,
        "relu" => Kind::Relu,
        "abs" => Kind::Abs,
        "max2" => Kind::Max2,
        "min2" => Kind::Min2,
        "max" => Kind::MaxN,
        "min" => Kind::MinN,
        "sort" => Kind::Sort { descending: true },
        "sort-asc" => Kind::Sort { descending: false },
        "med" => Kind::MedN,
        "rss-drelu" => Kind::RssDRelu,
        "rss-relu" => Kind::RssRelu,
        "relu6" => {
            let six = fx_encode(params, 6.0)?;
            Kind::Plu { spec: PluSpec::relu6(params, six) }
        }
        "dynrelu" => {
            let (a0, a1) = match args {
                Some(a) => (a.alpha0.unwrap_or(0), a.alpha1.unwrap_or(1)),
                None => (2, 3),
            };
            Kind::DynRelu {
                alpha0: params.encode_signed(i128::from(a0))?,
                alpha1: params.encode_signed(i128::from(a1))?,
            }
        }
        "funnel" => {
            let (scale, offset) = match args.and_then(|a| a.tmap.as_deref()) {
                Some(t) => {
                    let parts: Vec<&str> = t.split(',').collect();
                    if parts.len() != 2 {
                        return Err(b3pc::Error::Request("tmap expects scale,offset".into()));
                    }
                    let scale: i128 = parts[0]
                        .trim()
                        .parse()
                        .map_err(|_| b3pc::Error::Request("bad tmap scale".into()))?;
                    let off: f64 = parts[1]
                        .trim()
                        .parse()
                        .map_err(|_| b3pc::Error::Request("bad tmap offset".into()))?;
                    (params.encode_signed(scale)?, fx_encode(params, off)?)
                }
                None => (0, fx_encode(params, 3.0)?),
            };
            Kind::FunnelRelu { scale, offset }
        }
        "plu" => {
            let a = args.ok_or_else(|| {
                b3pc::Error::Request("plu needs --gammas/--alphas/--betas".into())
            })?;
            let gammas = scale_list(
                a.gammas.as_deref().ok_or_else(|| b3pc::Error::Request("missing --gammas".into()))?,
                true,
            )?;
            let alphas = scale_list(
                a.alphas.as_deref().ok_or_else(|| b3pc::Error::Request("missing --alphas".into()))?,
                false,
            )?;
            let betas = scale_list(
                a.betas.as_deref().ok_or_else(|| b3pc::Error::Request("missing --betas".into()))?,
                true,
            )?;
            let spec = PluSpec { gammas, alphas, betas };
            spec.validate(params)?;
            Kind::Plu { spec }
        }
        other => return Err(b3pc::Error::Request(format!("unknown protocol {other:?}"))),
    })
}

fn parse_instances(text: &str, params: &RingParams) -> b3pc::Result<Vec<Vec<Elem>>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: b3pc::Result<Vec<Elem>> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|tok| {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| b3pc::Error::Request(format!("bad input value {tok:?}")))?;
                fx_encode(params, v)
            })
            .collect();
        out.push(vals?);
    }
    if out.is_empty() {
        return Err(b3pc::Error::Request("no inputs given".into()));
    }
    Ok(out)
}

fn client_run(args: ClientRun) -> b3pc::Result<ExitCode> {
    let cfg = SessionConfig::load(&args.config)?;
    for w in cfg.validate()? {
        eprintln!("warning: {w}");
    }
    let params = cfg.params()?;
    let kind = parse_kind(&args.protocol, &params, Some(&args))?;
    let text = match (&args.inputs, &args.values) {
        (Some(path), _) => std::fs::read_to_string(path)?,
        (None, Some(values)) => values.replace(';', "\n").replace(',', " "),
        (None, None) => return Err(b3pc::Error::Request("need --inputs or --values".into())),
    };
    let instances = parse_instances(&text, &params)?;
    let mut client = Client::connect(&cfg)?;
    let mut lines = Vec::new();
    for chunk in instances.chunks(cfg.batch.max(1)) {
        let outcome = client.run(&kind, chunk)?;
        for inst in &outcome.outputs {
            let rendered: Vec<String> = inst
                .iter()
                .map(|&e| render_value(&params, e))
                .collect();
            lines.push(rendered.join(","));
        }
    }
    client.bye();
    let body = lines.join("\n") + "\n";
    match &args.output {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn render_value(params: &RingParams, e: Elem) -> String {
    if params.frac_bits() == 0 {
        format!("{}", params.decode_signed(e))
    } else {
        format!("{}", fx_decode(params, e))
    }
}

/// Plaintext reference for one instance of a simulator-supported protocol.
fn oracle_eval(kind: &Kind, params: &RingParams, ins: &[i128]) -> Vec<i128> {
    match kind {
        Kind::DRelu | Kind::RssDRelu => vec![oracle::drelu(ins[0])],
        Kind::UCmp => vec![oracle::cmp(ins[0], ins[1])],
        Kind::Equality => vec![oracle::equality(ins[0], ins[1])],
        Kind::Relu | Kind::RssRelu => vec![oracle::relu(ins[0])],
        Kind::Abs => vec![oracle::abs(ins[0])],
        Kind::DynRelu { alpha0, alpha1 } => vec![oracle::dynamic_relu(
            params.decode_signed(*alpha0),
            params.decode_signed(*alpha1),
            ins[0],
        )],
        Kind::Max2 => vec![oracle::max2(ins[0], ins[1])],
        Kind::Min2 => vec![oracle::min2(ins[0], ins[1])],
        Kind::FunnelRelu { scale, offset } => vec![oracle::funnel_relu(
            params.decode_signed(*scale),
            params.decode_signed(*offset),
            ins[0],
        )],
        Kind::Plu { spec } => {
            let dec = |v: &[Elem]| -> Vec<i128> {
                v.iter().map(|&e| params.decode_signed(e)).collect()
            };
            vec![oracle::plu(&dec(&spec.gammas), &dec(&spec.alphas), &dec(&spec.betas), ins[0])]
        }
        Kind::MaxN => vec![oracle::max_n(ins)],
        Kind::MinN => vec![oracle::min_n(ins)],
        Kind::Sort { descending } => oracle::sort_n(ins, *descending),
        Kind::MedN => vec![oracle::median_n(ins)],
    }
}

fn simulate_cmd(
    protocol: &str,
    ring_bits: u8,
    prec_bits: u8,
    trials: usize,
    pin_seed: Option<&str>,
    n: usize,
) -> b3pc::Result<ExitCode> {
    let params = RingParams::with_default_frac(ring_bits, prec_bits)?;
    let master = pin_seed.unwrap_or("b3pc-simulate").as_bytes().to_vec();
    let mut sim_cfg = SimConfig::new(params, FullSeeds::from_master(&master));
    sim_cfg.record_payloads = false;
    let mut kind = parse_kind(protocol, &params, None)?;
    if protocol == "ucmp" {
        kind = Kind::UCmp;
    }
    let width = kind.arity().unwrap_or(n);
    let inputs = gen_inputs(&params, width, trials, 0x51);
    let mut mismatches = 0usize;
    let outcome = simulate(&sim_cfg, &kind, &inputs, None)?;
    for (ins, outs) in inputs.iter().zip(&outcome.outputs) {
        let signed: Vec<i128> = ins.iter().map(|&e| params.decode_signed(e)).collect();
        let want = oracle_eval(&kind, &params, &signed);
        let got: Vec<i128> = outs.iter().map(|&e| params.decode_signed(e)).collect();
        if want != got {
            mismatches += 1;
        }
    }
    println!(
        "protocol={} trials={trials} mismatches={mismatches} rounds={} \
         bits02={} bits12={} bits20={} bits21={} bits01={} bits10={}",
        kind.name(),
        outcome.meter.rounds(),
        outcome.meter.bits(b3pc::transport::Dir::C02),
        outcome.meter.bits(b3pc::transport::Dir::C12),
        outcome.meter.bits(b3pc::transport::Dir::C20),
        outcome.meter.bits(b3pc::transport::Dir::C21),
        outcome.meter.bits(b3pc::transport::Dir::C01),
        outcome.meter.bits(b3pc::transport::Dir::C10),
    );
    Ok(if mismatches == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn oracle_cmd(suite: &str, ring_bits: u8, prec_bits: u8) -> b3pc::Result<ExitCode> {
    let params = RingParams::with_default_frac(ring_bits, prec_bits)?;
    let mut ok = true;
    if suite == "truncation" || suite == "all" {
        ok &= truncation_suite(&params)?;
    }
    if suite == "drelu" || suite == "all" {
        ok &= drelu_suite(&params)?;
    }
    if !["truncation", "drelu", "all"].contains(&suite) {
        return Err(b3pc::Error::Request(format!("unknown suite {suite:?}")));
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn truncation_suite(params: &RingParams) -> b3pc::Result<bool> {
    let ell = params.ell();
    let ellx = params.ellx();
    let exhaustive = ell <= 16;
    let splits: Vec<Elem> = if exhaustive {
        (0..(1u64 << ell)).collect()
    } else {
        // sampled splits on wide rings
        let step = (1u128 << ell) / 65_536;
        (0..65_536u64).map(|i| (u128::from(i) * step) as u64).collect()
    };
    let bound = 1i128 << ellx;
    let mut checked = 0u64;
    let mut mismatches = 0u64;
    let mut wrap_worst = 0f64;
    let mut pattern_violations = 0u64;
    for v in (1 - bound)..bound {
        let x = params.encode_input(v)?;
        let mut wraps = 0u64;
        for &r in &splits {
            for k in 1..=u32::from(ellx) {
                let pred = classify(params, x, r, k);
                checked += 1;
                if pred.class == TruncClass::WrapFailure {
                    if k == 1 {
                        wraps += 1;
                    }
                } else if trunc_reconstruct(params, x, r, k) != pred.value {
                    mismatches += 1;
                }
            }
            if x != 0 {
                if let PatternVerdict::Violation { .. } = pattern_check(params, x, r) {
                    pattern_violations += 1;
                }
            }
        }
        wrap_worst = wrap_worst.max(wraps as f64 / splits.len() as f64);
    }
    let wrap_bound = 2f64.powi(i32::from(ellx) + 1 - i32::from(ell));
    let pass = mismatches == 0 && pattern_violations == 0 && wrap_worst <= wrap_bound;
    println!(
        "truncation suite: checked={checked} mismatches={mismatches} \
         pattern_violations={pattern_violations} worst_wrap_fraction={wrap_worst:.6} \
         bound={wrap_bound:.6} mode={} -> {}",
        if exhaustive { "exhaustive" } else { "sampled" },
        if pass { "pass" } else { "FAIL" },
    );
    Ok(pass)
}

fn drelu_suite(params: &RingParams) -> b3pc::Result<bool> {
    let sim_cfg = SimConfig::new(*params, FullSeeds::from_master(b"oracle-drelu"));
    let bound: i128 = 1i128 << params.ellx().min(10);
    let inputs: Vec<Vec<Elem>> = ((1 - bound)..bound)
        .map(|v| params.encode_input(v).map(|e| vec![e]))
        .collect::<b3pc::Result<_>>()?;
    let outcome = simulate(&sim_cfg, &Kind::DRelu, &inputs, None)?;
    let mut mismatches = 0u64;
    for (ins, outs) in inputs.iter().zip(&outcome.outputs) {
        let v = params.decode_signed(ins[0]);
        if params.decode_signed(outs[0]) != oracle::drelu(v) {
            mismatches += 1;
        }
    }
    let pass = mismatches == 0;
    println!(
        "drelu suite: inputs={} mismatches={mismatches} rounds={} -> {}",
        inputs.len(),
        outcome.meter.rounds(),
        if pass { "pass" } else { "FAIL" },
    );
    Ok(pass)
}

#[allow(clippy::too_many_arguments)]
fn bench_cmd(
    protocol: &str,
    batch: Option<usize>,
    iters: usize,
    config: Option<PathBuf>,
    mode: &str,
    seq: bool,
    n: usize,
    ring_bits: u8,
    prec_bits: u8,
) -> b3pc::Result<ExitCode> {
    let (params, seeds, cfg) = match &config {
        Some(path) => {
            let cfg = SessionConfig::load(path)?;
            (cfg.params()?, cfg.seeds()?, Some(cfg))
        }
        None => (
            RingParams::with_default_frac(ring_bits, prec_bits)?,
            FullSeeds::from_master(b"bench-default"),
            None,
        ),
    };
    let kind = parse_kind(protocol, &params, None)?;
    let width = kind.arity().unwrap_or(n);
    let batches: Vec<usize> = match batch {
        Some(b) => vec![b],
        None => BATCH_PRESETS.to_vec(),
    };
    println!("{}", MetricsRow::csv_header());
    match mode {
        "sim" => {
            let sim_cfg = SimConfig::new(params, seeds);
            let exec = if seq { ExecMode::Sequential } else { ExecMode::Parallel };
            for b in batches {
                let row = bench_sim(&sim_cfg, &kind, width, b, iters, exec)?;
                println!("{}", row.to_csv());
            }
        }
        "net" => {
            let cfg = cfg.ok_or_else(|| {
                b3pc::Error::Request("net mode needs --config with live parties".into())
            })?;
            let mut client = Client::connect(&cfg)?;
            for b in batches {
                let row = bench_net(&mut client, &params, &kind, width, b, iters)?;
                println!("{}", row.to_csv());
            }
            client.bye();
        }
        other => return Err(b3pc::Error::Request(format!("unknown mode {other:?}"))),
    }
    Ok(ExitCode::SUCCESS)
}
