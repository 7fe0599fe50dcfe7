//! Encode/decode micro-benchmarks for the Mojette and Reed-Solomon codes.
//!
//! Every scenario works on one in-memory block of random bytes. Inputs,
//! schedules and inverted matrices are prepared before timing starts; the
//! timed code touches only preallocated buffers. Each sample times a batch
//! of calls sized to dwarf the clock granularity, and reports the per-call
//! time. Scenarios of one suite are sampled round-robin.

use std::fmt;
use std::hint::black_box;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::code::{choose_subset, schedule_cache, BlockDecoder, BlockEncoder, CodeParams};
use crate::error::{Error, Result};
use crate::rs::{encode_parity_into, RsDecoder, RsMatrix};
use crate::transform::Projection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Implementation {
    Mojette,
    Rs,
}

impl fmt::Display for Implementation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Implementation::Mojette => "mojette",
            Implementation::Rs => "rs",
        })
    }
}

impl FromStr for Implementation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mojette" => Ok(Implementation::Mojette),
            "rs" => Ok(Implementation::Rs),
            other => Err(Error::Report(format!("unknown implementation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operation {
    Encode,
    Decode,
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operation::Encode => "encode",
            Operation::Decode => "decode",
        })
    }
}

impl FromStr for Operation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "encode" => Ok(Operation::Encode),
            "decode" => Ok(Operation::Decode),
            other => Err(Error::Report(format!("unknown operation {other:?}"))),
        }
    }
}

/// One measurement to take.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchScenario {
    pub implementation: Implementation,
    pub operation: Operation,
    pub n: usize,
    pub k: usize,
    pub block_size: usize,
    /// Lost packets before decoding. Always 0 for encode.
    pub erasures: usize,
    pub repetitions: usize,
    pub warmup: usize,
    /// Mojette symbol width in bytes.
    pub width: usize,
    pub seed: u64,
}

impl BenchScenario {
    pub fn new(implementation: Implementation, operation: Operation, n: usize, k: usize, block_size: usize) -> Self {
        BenchScenario {
            implementation,
            operation,
            n,
            k,
            block_size,
            erasures: 0,
            repetitions: 101,
            warmup: 10,
            width: 16,
            seed: 0x6d6f_6a65,
        }
    }

    pub fn with_erasures(mut self, erasures: usize) -> Self {
        self.erasures = erasures;
        self
    }

    pub fn with_repetitions(mut self, repetitions: usize, warmup: usize) -> Self {
        self.repetitions = repetitions;
        self.warmup = warmup;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(Error::InvalidScenario(why));
        if self.k == 0 || self.k > self.n || self.n > 255 {
            return bad(format!("(n={}, k={}) is not a valid code", self.n, self.k));
        }
        if self.block_size == 0 || self.repetitions == 0 {
            return bad("block size and repetitions must be positive".into());
        }
        if self.erasures > self.n - self.k {
            return bad(format!("{} erasures exceed n-k = {}", self.erasures, self.n - self.k));
        }
        if self.operation == Operation::Encode && self.erasures != 0 {
            return bad("encode scenarios take no erasures".into());
        }
        crate::geometry::SymbolWidth::new(self.width)?;
        Ok(())
    }

    /// Non-fatal remarks, such as a block that needs padding.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.block_size.is_multiple_of(self.k * self.width) {
            out.push(format!(
                "block size {} is not a multiple of k*W = {}; the grid is zero-padded",
                self.block_size,
                self.k * self.width
            ));
        }
        out
    }

    /// Bytes of one packet handed to the RS coder.
    fn packet_len(&self) -> usize {
        self.block_size.div_ceil(self.k)
    }
}

/// Result of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub scenario: BenchScenario,
    pub median_ns: f64,
    pub stddev_ns: f64,
    /// `block_size / median`, in MB/s (10^6 bytes).
    pub throughput_mbps: f64,
    /// Median time of the matching memcpy baseline.
    pub baseline_ns: f64,
    /// Median time-stamp-counter ticks per call where the platform has one.
    pub cycles: Option<u64>,
    /// Whether the measuring thread was pinned to one logical processor.
    pub pinned: bool,
}

impl BenchReport {
    pub fn row(&self) -> ReportRow {
        let s = &self.scenario;
        ReportRow {
            implementation: s.implementation,
            n: s.n,
            k: s.k,
            block_size: s.block_size,
            erasures: s.erasures,
            median_ns: self.median_ns,
            stddev_ns: self.stddev_ns,
            throughput_mbps: self.throughput_mbps,
            baseline_ns: self.baseline_ns,
            operation: s.operation,
            cycles: self.cycles,
        }
    }
}

/// Flat report line, in output column order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub implementation: Implementation,
    pub n: usize,
    pub k: usize,
    pub block_size: usize,
    pub erasures: usize,
    pub median_ns: f64,
    pub stddev_ns: f64,
    pub throughput_mbps: f64,
    pub baseline_ns: f64,
    pub operation: Operation,
    pub cycles: Option<u64>,
}

pub const COLUMNS: [&str; 11] = [
    "impl",
    "n",
    "k",
    "block_size",
    "erasures",
    "median_ns",
    "stddev_ns",
    "throughput_mbps",
    "baseline_ns",
    "op",
    "cycles",
];

impl ReportRow {
    fn fields(&self) -> [String; 11] {
        [
            self.implementation.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            self.block_size.to_string(),
            self.erasures.to_string(),
            self.median_ns.to_string(),
            self.stddev_ns.to_string(),
            self.throughput_mbps.to_string(),
            self.baseline_ns.to_string(),
            self.operation.to_string(),
            self.cycles.map(|c| c.to_string()).unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(Error::Report(format!("unknown format {other:?}"))),
        }
    }
}

/// The default grid: both codes, `(6,4)` and `(12,8)`, 4 KiB and 8 KiB,
/// one encode row plus decode rows for `0..=n-k` erasures.
pub fn default_scenarios(repetitions: usize, seed: u64) -> Vec<BenchScenario> {
    let mut out = Vec::new();
    for implementation in [Implementation::Mojette, Implementation::Rs] {
        for (n, k) in [(6, 4), (12, 8)] {
            for block_size in [4096, 8192] {
                let base = BenchScenario::new(implementation, Operation::Encode, n, k, block_size)
                    .with_repetitions(repetitions, 10)
                    .with_seed(seed);
                out.push(base.clone());
                for erasures in 0..=n - k {
                    out.push(BenchScenario {
                        operation: Operation::Decode,
                        ..base.clone()
                    }
                    .with_erasures(erasures));
                }
            }
        }
    }
    out
}

fn median(sorted: &[f64]) -> f64 {
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

fn stddev(samples: &[f64]) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
    var.sqrt()
}

/// Smallest non-zero step of the monotonic clock, in ns.
pub fn timer_granularity_ns() -> u64 {
    let mut best = u64::MAX;
    for _ in 0..200 {
        let start = Instant::now();
        let mut now = Instant::now();
        while now == start {
            now = Instant::now();
        }
        best = best.min((now - start).as_nanos() as u64);
    }
    best
}

#[cfg(target_arch = "x86_64")]
#[inline]
fn cycle_counter() -> Option<u64> {
    // SAFETY: rdtsc is available on every x86_64 processor.
    Some(unsafe { core::arch::x86_64::_rdtsc() })
}

#[cfg(not(target_arch = "x86_64"))]
#[inline]
fn cycle_counter() -> Option<u64> {
    None
}

struct Timing {
    median_ns: f64,
    stddev_ns: f64,
    cycles: Option<u64>,
}

/// Batch size so one batch lasts at least this many clock steps, and never
/// less than `MIN_BATCH_NS`.
const GRANULARITY_FACTOR: u64 = 1000;
const MIN_BATCH_NS: u64 = 100_000;
const MAX_BATCH: u64 = 1 << 20;

/// A timed operation with all of its inputs and outputs preallocated.
enum Workload {
    MojetteEncode {
        encoder: BlockEncoder,
        block: Vec<u8>,
    },
    MojetteDecode {
        decoder: BlockDecoder,
        inputs: Vec<Projection>,
    },
    RsEncode {
        matrix: RsMatrix,
        data: Vec<Vec<u8>>,
        parity: Vec<Vec<u8>>,
    },
    RsDecode {
        decoder: RsDecoder,
        inputs: Vec<Vec<u8>>,
        out: Vec<Vec<u8>>,
    },
    Memcpy {
        packet: usize,
        src: Vec<u8>,
        dst: Vec<u8>,
    },
}

impl Workload {
    fn run(&mut self) {
        match self {
            Workload::MojetteEncode { encoder, block } => {
                black_box(encoder.encode(black_box(block)).expect("sized block"));
            }
            Workload::MojetteDecode { decoder, inputs } => {
                black_box(decoder.decode(black_box(inputs)).expect("prepared inputs"));
            }
            Workload::RsEncode { matrix, data, parity } => {
                encode_parity_into(black_box(data), matrix, parity).expect("sized packets");
                black_box(parity);
            }
            Workload::RsDecode { decoder, inputs, out } => {
                decoder.decode_into(black_box(inputs), out).expect("sized packets");
                black_box(out);
            }
            Workload::Memcpy { packet, src, dst } => {
                for (d, s) in dst.chunks_mut(*packet).zip(src.chunks(*packet)) {
                    d.copy_from_slice(black_box(s));
                }
                black_box(dst);
            }
        }
    }
}

/// Times several workloads together: every round runs one batch of each,
/// so slow phases of the machine spread evenly over all of them.
fn measure(jobs: &mut [(Workload, usize, usize)], granularity: u64) -> Result<Vec<Timing>> {
    let target = (granularity.max(1) * GRANULARITY_FACTOR).max(MIN_BATCH_NS);
    let mut batches = Vec::with_capacity(jobs.len());
    for (work, _, warmup) in jobs.iter_mut() {
        for _ in 0..(*warmup).max(1) {
            work.run();
        }
        let mut batch = 1u64;
        loop {
            let start = Instant::now();
            for _ in 0..batch {
                work.run();
            }
            if start.elapsed().as_nanos() as u64 >= target || batch >= MAX_BATCH {
                break;
            }
            batch = (batch * 2).min(MAX_BATCH);
        }
        batches.push(batch);
    }

    let rounds = jobs.iter().map(|j| j.1).max().unwrap_or(0);
    let mut times: Vec<Vec<f64>> = jobs.iter().map(|j| Vec::with_capacity(j.1)).collect();
    let mut ticks: Vec<Vec<u64>> = jobs.iter().map(|j| Vec::with_capacity(j.1)).collect();
    for round in 0..rounds {
        for (i, (work, reps, _)) in jobs.iter_mut().enumerate() {
            if round >= *reps {
                continue;
            }
            let batch = batches[i];
            let c0 = cycle_counter();
            let start = Instant::now();
            for _ in 0..batch {
                work.run();
            }
            let took = start.elapsed().as_nanos() as f64;
            if let (Some(a), Some(b)) = (c0, cycle_counter()) {
                ticks[i].push(b.wrapping_sub(a) / batch);
            }
            times[i].push(took);
        }
    }

    times
        .into_iter()
        .zip(ticks)
        .zip(batches)
        .map(|((mut times, mut ticks), batch)| {
            times.sort_by(f64::total_cmp);
            let batch_median = median(&times);
            if (granularity as f64) > 0.01 * batch_median {
                return Err(Error::TimerResolutionTooCoarse {
                    granularity_ns: granularity,
                    median_ns: batch_median as u64,
                });
            }
            let per_call: Vec<f64> = times.iter().map(|t| t / batch as f64).collect();
            ticks.sort_unstable();
            Ok(Timing {
                median_ns: median(&per_call),
                stddev_ns: stddev(&per_call),
                cycles: (!ticks.is_empty()).then(|| ticks[ticks.len() / 2]),
            })
        })
        .collect()
}

/// Bytes copied by the memcpy baseline: `n` packets of `block/k` bytes to
/// encode, `k` of them to decode.
pub fn baseline_bytes(scenario: &BenchScenario) -> usize {
    let packets = match scenario.operation {
        Operation::Encode => scenario.n,
        Operation::Decode => scenario.k,
    };
    packets * scenario.block_size / scenario.k
}

fn memcpy_workload(scenario: &BenchScenario) -> Workload {
    let total = baseline_bytes(scenario);
    Workload::Memcpy {
        packet: (scenario.block_size / scenario.k).max(1),
        src: (0..total).map(|i| i as u8).collect(),
        dst: vec![0xff; total],
    }
}

/// Median time to copy [`baseline_bytes`] packet by packet between
/// pre-touched buffers.
pub fn memcpy_baseline(scenario: &BenchScenario) -> Result<f64> {
    scenario.validate()?;
    let mut jobs = [(memcpy_workload(scenario), scenario.repetitions, scenario.warmup)];
    Ok(measure(&mut jobs, timer_granularity_ns())?[0].median_ns)
}

/// Runs every scenario on the calling thread, interleaving their samples.
pub fn run_suite(scenarios: &[BenchScenario]) -> Result<Vec<BenchReport>> {
    for s in scenarios {
        s.validate()?;
    }
    let mut jobs = Vec::with_capacity(2 * scenarios.len());
    for s in scenarios {
        jobs.push((prepare(s)?, s.repetitions, s.warmup));
        jobs.push((memcpy_workload(s), s.repetitions, s.warmup));
    }
    let pin = CpuPin::current_thread();
    let granularity = timer_granularity_ns();
    let timings = measure(&mut jobs, granularity)?;
    Ok(scenarios
        .iter()
        .zip(timings.chunks_exact(2))
        .map(|(s, t)| BenchReport {
            scenario: s.clone(),
            median_ns: t[0].median_ns,
            stddev_ns: t[0].stddev_ns,
            throughput_mbps: s.block_size as f64 * 1e3 / t[0].median_ns,
            baseline_ns: t[1].median_ns,
            cycles: t[0].cycles,
            pinned: pin.pinned,
        })
        .collect())
}

/// Builds the inputs of one scenario and checks its output once, outside
/// the timed region.
fn prepare(s: &BenchScenario) -> Result<Workload> {
    let mut rng = StdRng::seed_from_u64(s.seed);
    let block: Vec<u8> = (0..s.block_size).map(|_| rng.gen()).collect();
    match (s.implementation, s.operation) {
        (Implementation::Mojette, Operation::Encode) => {
            let (params, cols, padded) = mojette_setup(s, &block)?;
            Ok(Workload::MojetteEncode {
                encoder: BlockEncoder::new(params, cols),
                block: padded,
            })
        }
        (Implementation::Mojette, Operation::Decode) => mojette_decode(s, &block, &mut rng),
        (Implementation::Rs, Operation::Encode) => Ok(Workload::RsEncode {
            matrix: RsMatrix::vandermonde(s.n, s.k)?,
            data: rs_packets(s, &block),
            parity: vec![vec![0u8; s.packet_len()]; s.n - s.k],
        }),
        (Implementation::Rs, Operation::Decode) => rs_decode(s, &block, &mut rng),
    }
}

fn mojette_setup(s: &BenchScenario, block: &[u8]) -> Result<(CodeParams, usize, Vec<u8>)> {
    let params = CodeParams::new(s.n, s.k, s.width)?;
    let cols = params.columns_for(block.len())?;
    let mut padded = block.to_vec();
    padded.resize(params.block_bytes(cols), 0);
    Ok((params, cols, padded))
}

fn mojette_decode(s: &BenchScenario, block: &[u8], rng: &mut StdRng) -> Result<Workload> {
    let (params, cols, padded) = mojette_setup(s, block)?;
    let mut encoder = BlockEncoder::new(params.clone(), cols);
    let projections = encoder.encode(&padded)?;
    let mut order: Vec<usize> = (0..s.n).collect();
    order.shuffle(rng);
    let mut survivors = order[s.erasures..].to_vec();
    survivors.sort_unstable();
    let chosen = choose_subset(&params, &survivors)?;
    let mut decoder = BlockDecoder::new(&params, cols, &chosen, schedule_cache())?;
    let inputs: Vec<Projection> = chosen.iter().map(|&i| projections[i].clone()).collect();
    if decoder.decode(&inputs)? != padded.as_slice() {
        return Err(Error::Report("mojette decode produced wrong block".into()));
    }
    Ok(Workload::MojetteDecode { decoder, inputs })
}

fn rs_packets(s: &BenchScenario, block: &[u8]) -> Vec<Vec<u8>> {
    let len = s.packet_len();
    let mut padded = block.to_vec();
    padded.resize(len * s.k, 0);
    padded.chunks(len).map(<[u8]>::to_vec).collect()
}

fn rs_decode(s: &BenchScenario, block: &[u8], rng: &mut StdRng) -> Result<Workload> {
    let matrix = RsMatrix::vandermonde(s.n, s.k)?;
    let data = rs_packets(s, block);
    let mut parity = vec![vec![0u8; s.packet_len()]; s.n - s.k];
    encode_parity_into(&data, &matrix, &mut parity)?;

    // only data packets are lost; the first parities stand in for them
    let mut order: Vec<usize> = (0..s.k).collect();
    order.shuffle(rng);
    let mut survivors: Vec<usize> = order[s.erasures..].to_vec();
    survivors.sort_unstable();
    survivors.extend(s.k..s.k + s.erasures);
    let decoder = RsDecoder::new(&matrix, &survivors)?;
    let inputs: Vec<Vec<u8>> = survivors
        .iter()
        .map(|&i| if i < s.k { data[i].clone() } else { parity[i - s.k].clone() })
        .collect();
    let mut out = vec![vec![0u8; s.packet_len()]; s.k];
    decoder.decode_into(&inputs, &mut out)?;
    if out != data {
        return Err(Error::Report("rs decode produced wrong packets".into()));
    }
    Ok(Workload::RsDecode { decoder, inputs, out })
}

/// Serializes reports. Column order is fixed by [`COLUMNS`].
pub fn emit_report(reports: &[BenchReport], format: Format) -> Result<Vec<u8>> {
    if reports.is_empty() {
        return Err(Error::EmptyReport);
    }
    let io = |e: std::io::Error| Error::Report(e.to_string());
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(COLUMNS).map_err(|e| Error::Report(e.to_string()))?;
            for r in reports {
                w.write_record(r.row().fields()).map_err(|e| Error::Report(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Error::Report(e.to_string()))
        }
        Format::Markdown => {
            let mut out = Vec::new();
            let pinning = if reports.iter().all(|r| r.pinned) {
                "pinned to one logical processor"
            } else {
                "not pinned (unsupported on this platform)"
            };
            writeln!(out, "<!-- cpu: {pinning} -->").map_err(io)?;
            writeln!(out, "| {} |", COLUMNS.join(" | ")).map_err(io)?;
            writeln!(out, "|{}", "---|".repeat(COLUMNS.len())).map_err(io)?;
            for r in reports {
                writeln!(out, "| {} |", r.row().fields().join(" | ")).map_err(io)?;
            }
            Ok(out)
        }
    }
}

/// Parses CSV produced by [`emit_report`].
pub fn parse_csv(bytes: &[u8]) -> Result<Vec<ReportRow>> {
    let bad = |what: &str| Error::Report(format!("malformed report: {what}"));
    let mut reader = csv::Reader::from_reader(bytes);
    let header = reader.headers().map_err(|e| Error::Report(e.to_string()))?;
    if header.iter().ne(COLUMNS) {
        return Err(bad("unexpected header"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let rec = record.map_err(|e| Error::Report(e.to_string()))?;
        let field = |i: usize| rec.get(i).ok_or_else(|| bad(COLUMNS[i]));
        let num = |i: usize| field(i)?.parse::<usize>().map_err(|_| bad(COLUMNS[i]));
        let real = |i: usize| field(i)?.parse::<f64>().map_err(|_| bad(COLUMNS[i]));
        let cycles = field(10)?;
        rows.push(ReportRow {
            implementation: field(0)?.parse()?,
            n: num(1)?,
            k: num(2)?,
            block_size: num(3)?,
            erasures: num(4)?,
            median_ns: real(5)?,
            stddev_ns: real(6)?,
            throughput_mbps: real(7)?,
            baseline_ns: real(8)?,
            operation: field(9)?.parse()?,
            cycles: if cycles.is_empty() {
                None
            } else {
                Some(cycles.parse().map_err(|_| bad("cycles"))?)
            },
        });
    }
    Ok(rows)
}

/// Pins the calling thread to the processor it is running on and restores
/// the previous affinity on drop.
struct CpuPin {
    pinned: bool,
    #[cfg(target_os = "linux")]
    previous: Option<libc::cpu_set_t>,
}

impl CpuPin {
    #[cfg(target_os = "linux")]
    fn current_thread() -> Self {
        // SAFETY: cpu_set_t is plain data; the calls only read and write
        // the sets passed by pointer with their exact size.
        unsafe {
            let mut previous: libc::cpu_set_t = std::mem::zeroed();
            let size = std::mem::size_of::<libc::cpu_set_t>();
            if libc::sched_getaffinity(0, size, &mut previous) != 0 {
                return CpuPin { pinned: false, previous: None };
            }
            let cpu = libc::sched_getcpu();
            if cpu < 0 {
                return CpuPin { pinned: false, previous: None };
            }
            let mut one: libc::cpu_set_t = std::mem::zeroed();
            libc::CPU_SET(cpu as usize, &mut one);
            let pinned = libc::sched_setaffinity(0, size, &one) == 0;
            CpuPin {
                pinned,
                previous: pinned.then_some(previous),
            }
        }
    }

    #[cfg(not(target_os = "linux"))]
    fn current_thread() -> Self {
        CpuPin { pinned: false }
    }
}

impl Drop for CpuPin {
    fn drop(&mut self) {
        #[cfg(target_os = "linux")]
        if let Some(previous) = self.previous.take() {
            // SAFETY: see `current_thread`.
            unsafe {
                libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &previous);
            }
        }
    }
}
