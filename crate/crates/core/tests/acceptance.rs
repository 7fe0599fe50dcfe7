//! Acceptance suite. Runs every criterion in sequence, prints one PASS/FAIL
//! line per criterion and exits non-zero if any failed.
//!
//! ```bash
//! cargo test --test acceptance
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use itertools::Itertools;
use mojette::bench::{run_suite, BenchReport, BenchScenario, Implementation, Operation};
use mojette::cli::{cmd_decode, CliError};
use mojette::rs::{gf_inv, gf_mul, rs_decode, rs_encode, RsMatrix};
use mojette::{
    bin_count, build_schedule, decode_block, encode_block, forward, inverse_iterative, inverse_scheduled, katz_ok,
    storage_overhead, unused_bins, xor_into, CodeParams, Direction, EncodedBlock, Error, Grid, Projection,
    SymbolWidth,
};
use num_rational::Ratio;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

fn random_bytes(rng: &mut StdRng, len: usize) -> Vec<u8> {
    let mut v = vec![0u8; len];
    rng.fill_bytes(&mut v);
    v
}

fn random_grid(rng: &mut StdRng, cols: usize, rows: usize, width: usize) -> Grid {
    let cells = random_bytes(rng, cols * rows * width);
    Grid::from_bytes(cols, rows, SymbolWidth::new(width).unwrap(), cells).unwrap()
}

fn keep(block: &EncodedBlock, kept: &[usize]) -> Vec<Projection> {
    kept.iter().map(|&i| block.projections[i].clone()).collect()
}

fn any_k_decodability() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let mut patterns = 0;
    for (n, k, size) in [(6, 4, 4096), (6, 4, 8192), (12, 8, 8192)] {
        let params = CodeParams::new(n, k, 16).unwrap();
        let data = random_bytes(&mut rng, size);
        let block = encode_block(&data, &params).unwrap();
        for kept in (0..n).combinations(k) {
            let out = decode_block(&keep(&block, &kept), &params, size).map_err(|e| format!("({n},{k}) {kept:?}: {e}"))?;
            ensure!(out == data, "({n},{k}) {size} B, kept {kept:?}: output differs");
            patterns += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(patterns == 15 + 15 + 495, "ran {patterns} patterns");
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{patterns} patterns bit-exact in {elapsed:.2?}"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let (mut equal, mut both_failed) = (0, 0);
    let mut case = 0;
    while equal < 1000 {
        case += 1;
        ensure!(case < 5000, "only {equal} reconstructible cases generated");
        let cols = rng.gen_range(1..=64);
        let rows = rng.gen_range(1..=8);
        let width = 1 << rng.gen_range(0..=4);
        let grid = random_grid(&mut rng, cols, rows, width);
        let dirs: Vec<Direction> = if case % 2 == 0 {
            let mut ps: Vec<i32> = (-8..=8).collect();
            ps.shuffle(&mut rng);
            ps[..rows].iter().map(|&p| Direction::unit(p)).collect()
        } else {
            let mut pool: Vec<Direction> = (-6..=6)
                .flat_map(|p| (1..=3).map(move |q| (p, q)))
                .filter_map(|(p, q)| Direction::new(p, q).ok())
                .collect();
            pool.shuffle(&mut rng);
            pool.truncate(rng.gen_range(1..=rows + 2));
            pool
        };
        let projs: Vec<Projection> = dirs.iter().map(|&d| forward(&grid, d)).collect();
        let iterative = inverse_iterative(&projs, cols, rows);
        match build_schedule(&dirs, cols, rows) {
            Ok(schedule) => {
                let scheduled = inverse_scheduled(&projs, &schedule).map_err(|e| e.to_string())?;
                let iterative = iterative.map_err(|e| format!("case {case}: iterative failed: {e}"))?;
                ensure!(scheduled == iterative, "case {case}: outputs differ");
                ensure!(scheduled == grid, "case {case}: wrong reconstruction");
                equal += 1;
            }
            Err(Error::InsufficientProjections { .. }) => {
                ensure!(iterative.is_err(), "case {case}: schedule failed but iterative succeeded");
                both_failed += 1;
            }
            Err(e) => return Err(format!("case {case}: {e}")),
        }
    }
    Ok(format!("{equal} cases equal, {both_failed} non-reconstructible cases agreed"))
}

fn bin_count_properties() -> Outcome {
    let dirs: Vec<Direction> = (-8..=8)
        .flat_map(|p| (1..=3).map(move |q| (p, q)))
        .filter_map(|(p, q)| Direction::new(p, q).ok())
        .collect();
    let mut rng = StdRng::seed_from_u64(3);
    let mut shapes = 0;
    for cols in 1..=32 {
        for rows in 1..=32 {
            let grid = random_grid(&mut rng, cols, rows, 1);
            for &dir in &dirs {
                let (lo, hi) = (0..cols)
                    .cartesian_product(0..rows)
                    .map(|(c, r)| dir.bin_index(c, r))
                    .minmax()
                    .into_option()
                    .unwrap();
                let measured = (hi - lo + 1) as usize;
                let proj = forward(&grid, dir);
                ensure!(
                    bin_count(dir, cols, rows) == measured && proj.len() == measured,
                    "{dir} on {cols}x{rows}: formula {} measured {measured} projection {}",
                    bin_count(dir, cols, rows),
                    proj.len()
                );
                shapes += 1;
            }
        }
    }

    let mut invariants = 0;
    for _ in 0..500 {
        let (cols, rows) = (rng.gen_range(1..=32), rng.gen_range(1..=32));
        let width = 1 << rng.gen_range(0..=4);
        let a = random_grid(&mut rng, cols, rows, width);
        let b = random_grid(&mut rng, cols, rows, width);
        let dir = *dirs.choose(&mut rng).unwrap();

        let mut total = vec![0u8; width];
        for cell in a.as_bytes().chunks(width) {
            xor_into(&mut total, cell);
        }
        let mut bins_total = vec![0u8; width];
        let pa = forward(&a, dir);
        for bin in pa.bins().chunks(width) {
            xor_into(&mut bins_total, bin);
        }
        ensure!(total == bins_total, "conservation fails for {dir} on {cols}x{rows}");

        let mut sum = a.clone();
        xor_into(sum.as_bytes_mut(), b.as_bytes());
        let mut expect = pa.into_bins();
        xor_into(&mut expect, forward(&b, dir).bins());
        ensure!(forward(&sum, dir).into_bins() == expect, "linearity fails for {dir} on {cols}x{rows}");
        invariants += 1;
    }
    Ok(format!("{shapes} (direction, shape) pairs, {invariants} randomized invariant checks"))
}

fn katz_tests() -> Outcome {
    let pool: Vec<Direction> = (-3..=3)
        .flat_map(|p| (1..=3).map(move |q| (p, q)))
        .filter_map(|(p, q)| Direction::new(p, q).ok())
        .collect();
    let mut rng = StdRng::seed_from_u64(4);
    let mut negatives = 0;
    for cols in 1..=8 {
        for rows in 1..=8 {
            let grid = random_grid(&mut rng, cols, rows, 1);
            for size in 1..=3 {
                for dirs in pool.iter().copied().combinations(size) {
                    if katz_ok(&dirs, cols, rows).unwrap() {
                        continue;
                    }
                    let projs: Vec<Projection> = dirs.iter().map(|&d| forward(&grid, d)).collect();
                    let got = inverse_iterative(&projs, cols, rows);
                    ensure!(
                        matches!(got, Err(Error::InsufficientProjections { .. })),
                        "{dirs:?} on {cols}x{rows}: expected InsufficientProjections, got {:?}",
                        got.map(|_| "a grid")
                    );
                    negatives += 1;
                }
            }
        }
    }
    ensure!(negatives > 0, "no failing sets enumerated");

    let mut positives = 0;
    for rows in 1..=6 {
        for ps in (-4..=4).combinations(rows) {
            let dirs: Vec<Direction> = ps.iter().map(|&p| Direction::unit(p)).collect();
            for cols in [1, 2, 5, 16, 33, 64] {
                let grid = random_grid(&mut rng, cols, rows, 4);
                let projs: Vec<Projection> = dirs.iter().map(|&d| forward(&grid, d)).collect();
                let back = inverse_iterative(&projs, cols, rows).map_err(|e| format!("{ps:?} on {cols}x{rows}: {e}"))?;
                ensure!(back == grid, "{ps:?} on {cols}x{rows}: wrong reconstruction");
                positives += 1;
            }
        }
    }
    Ok(format!("{negatives} failing sets stalled, {positives} q=1 sets of Q directions reconstructed"))
}

fn bench(scenarios: Vec<BenchScenario>) -> Result<Vec<BenchReport>, String> {
    run_suite(&scenarios).map_err(|e| e.to_string())
}

const REPS: usize = 501;

fn encode_scenario(imp: Implementation, n: usize, k: usize, size: usize) -> BenchScenario {
    BenchScenario::new(imp, Operation::Encode, n, k, size).with_repetitions(REPS, 20)
}

fn linear_cost() -> Outcome {
    let mut details = Vec::new();
    for (n, k) in [(6, 4), (12, 8)] {
        let r = bench(vec![
            encode_scenario(Implementation::Mojette, n, k, 4096),
            encode_scenario(Implementation::Mojette, n, k, 8192),
        ])?;
        let ratio = r[1].median_ns / r[0].median_ns;
        details.push(format!("({n},{k}) {:.0}/{:.0} ns = {ratio:.2}", r[1].median_ns, r[0].median_ns));
        ensure!((1.5..=2.5).contains(&ratio), "8K/4K encode ratio {}", details.join(", "));
    }
    Ok(format!("8K/4K encode ratio {}", details.join(", ")))
}

fn decode_flatness() -> Outcome {
    let mut details = Vec::new();
    for (n, k) in [(6, 4), (12, 8)] {
        for size in [4096, 8192] {
            let scenarios = (1..=n - k)
                .map(|e| {
                    BenchScenario::new(Implementation::Mojette, Operation::Decode, n, k, size)
                        .with_erasures(e)
                        .with_repetitions(REPS, 20)
                })
                .collect();
            let medians: Vec<f64> = bench(scenarios)?.iter().map(|r| r.median_ns).collect();
            let (lo, hi) = medians.iter().copied().minmax().into_option().unwrap();
            let spread = (hi - lo) / lo;
            details.push(format!("({n},{k}) {size} B {:.1}%", spread * 100.0));
            ensure!(spread < 0.20, "decode medians {medians:?} spread {:.1}%", spread * 100.0);
        }
    }
    Ok(format!("max/min - 1: {}", details.join(", ")))
}

fn speed_vs_rs() -> Outcome {
    let r = bench(vec![
        encode_scenario(Implementation::Mojette, 6, 4, 4096),
        encode_scenario(Implementation::Rs, 6, 4, 4096),
    ])?;
    let factor = r[0].throughput_mbps / r[1].throughput_mbps;
    let detail = format!(
        "mojette {:.0} MB/s, rs {:.0} MB/s, factor {factor:.2}",
        r[0].throughput_mbps, r[1].throughput_mbps
    );
    ensure!(factor >= 1.5, "{detail}");
    Ok(detail)
}

fn overhead_report() -> Outcome {
    let params = CodeParams::new(6, 4, 16).unwrap();
    let overhead = storage_overhead(&params, 64);
    ensure!(overhead == Ratio::new(411, 384), "overhead {overhead}");

    let cols = 8;
    let unused = unused_bins(&params, cols).map_err(|e| e.to_string())?;
    let zeroed: usize = unused.iter().map(BTreeSet::len).sum();
    let mut rng = StdRng::seed_from_u64(8);
    let data = random_bytes(&mut rng, params.block_bytes(cols));
    let mut block = encode_block(&data, &params).unwrap();
    for (proj, bins) in block.projections.iter_mut().zip(&unused) {
        for &b in bins {
            proj.bin_mut(b).unwrap().fill(0);
        }
    }
    for kept in (0..6).combinations(4) {
        let out = decode_block(&keep(&block, &kept), &params, data.len()).map_err(|e| format!("{kept:?}: {e}"))?;
        ensure!(out == data, "{kept:?}: output differs after zeroing unused bins");
    }
    Ok(format!("overhead {overhead} (= 411/384); {zeroed} unused bins zeroed, 15 subsets decode"))
}

fn run_bin(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_mojette"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn cli_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(9);
    let data = random_bytes(&mut rng, 1 << 20);
    let input = dir.path().join("random.bin");
    fs::write(&input, &data).unwrap();
    let out_dir = dir.path().join("proj");

    let res = run_bin(&["encode", p(&input), "-n", "6", "-k", "4", "-w", "16", "-o", p(&out_dir)])?;
    ensure!(res.status.success(), "encode: {}", String::from_utf8_lossy(&res.stderr));
    let files: Vec<PathBuf> = (0..6).map(|i| out_dir.join(format!("random.p{i}.mjec"))).collect();

    let mut args = vec!["verify"];
    args.extend(files.iter().map(|f| p(f)));
    let res = run_bin(&args)?;
    let stdout = String::from_utf8_lossy(&res.stdout);
    ensure!(res.status.success() && stdout.contains("decodable: yes (6/4)"), "verify: {stdout}");

    let restored = dir.path().join("restored.bin");
    for kept in (0..6).combinations(4) {
        let mut args = vec!["decode"];
        args.extend(kept.iter().map(|&i| p(&files[i])));
        args.extend(["-o", p(&restored)]);
        let res = run_bin(&args)?;
        ensure!(res.status.success(), "decode {kept:?}: {}", String::from_utf8_lossy(&res.stderr));
        ensure!(fs::read(&restored).unwrap() == data, "decode {kept:?}: output differs");
    }

    let original = fs::read(&files[2]).unwrap();
    let mut detected = 0;
    for offset in [10, 30, 5000, original.len() - 1] {
        let mut bytes = original.clone();
        bytes[offset] ^= 0x40;
        fs::write(&files[2], &bytes).unwrap();
        match cmd_decode(&files[..4], &restored) {
            Err(CliError::CrcMismatch { path, .. }) if path == files[2] => {}
            other => return Err(format!("byte {offset}: expected CrcMismatch, got {other:?}")),
        }
        let mut args = vec!["decode"];
        args.extend(files[..4].iter().map(|f| p(f)));
        args.extend(["-o", p(&restored)]);
        let res = run_bin(&args)?;
        let stderr = String::from_utf8_lossy(&res.stderr);
        ensure!(
            res.status.code() == Some(2) && stderr.contains("CRC mismatch"),
            "byte {offset}: exit {:?}, {stderr}",
            res.status.code()
        );
        detected += 1;
    }
    fs::write(&files[2], &original).unwrap();
    Ok(format!("1 MiB identity via 15 subsets, {detected}/4 single-byte corruptions caught"))
}

/// Carry-less product reduced by x^8 + x^4 + x^3 + x^2 + 1.
fn slow_mul(a: u8, b: u8) -> u8 {
    let mut acc: u16 = 0;
    for i in 0..8 {
        if b >> i & 1 == 1 {
            acc ^= (a as u16) << i;
        }
    }
    for bit in (8..16).rev() {
        if acc >> bit & 1 == 1 {
            acc ^= 0x11d << (bit - 8);
        }
    }
    acc as u8
}

fn rs_self_consistency() -> Outcome {
    let mut rng = StdRng::seed_from_u64(10);
    let mut patterns = 0;
    for (n, k) in [(6, 4), (12, 8)] {
        let matrix = RsMatrix::vandermonde(n, k).map_err(|e| e.to_string())?;
        let data: Vec<Vec<u8>> = (0..k).map(|_| random_bytes(&mut rng, 512)).collect();
        let refs: Vec<&[u8]> = data.iter().map(Vec::as_slice).collect();
        let all = rs_encode(&refs, &matrix).map_err(|e| e.to_string())?;
        for e in 0..=n - k {
            for lost in (0..n).combinations(e) {
                let kept: Vec<(usize, &[u8])> =
                    (0..n).filter(|i| !lost.contains(i)).map(|i| (i, all[i].as_slice())).collect();
                let out = rs_decode(&kept, &matrix).map_err(|e| format!("({n},{k}) lost {lost:?}: {e}"))?;
                ensure!(out == data, "({n},{k}) lost {lost:?}: output differs");
                patterns += 1;
            }
        }
    }

    for _ in 0..100_000 {
        let (a, b, c): (u8, u8, u8) = rng.gen();
        ensure!(gf_mul(a, b) == slow_mul(a, b), "{a} * {b}");
        ensure!(gf_mul(a, b) == gf_mul(b, a), "commutativity {a} {b}");
        ensure!(gf_mul(gf_mul(a, b), c) == gf_mul(a, gf_mul(b, c)), "associativity {a} {b} {c}");
        ensure!(gf_mul(a, b ^ c) == gf_mul(a, b) ^ gf_mul(a, c), "distributivity {a} {b} {c}");
        ensure!(gf_mul(a, 1) == a && gf_mul(a, 0) == 0, "identity {a}");
        ensure!(a == 0 || gf_mul(a, gf_inv(a)) == 1, "inverse {a}");
    }
    Ok(format!("{patterns} erasure patterns exact, 100000 field triples"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("any-k decodability", any_k_decodability),
        ("scheduled vs iterative oracle", oracle_equivalence),
        ("bin count, conservation, linearity", bin_count_properties),
        ("Katz negative/positive", katz_tests),
        ("encode cost linear in block size", linear_cost),
        ("decode time flat across erasures", decode_flatness),
        ("encode faster than Reed-Solomon", speed_vs_rs),
        ("storage overhead and unused bins", overhead_report),
        ("CLI round trip and corruption", cli_round_trip),
        ("Reed-Solomon self-consistency", rs_self_consistency),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  C{:<2} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  C{:<2} {name}: {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
