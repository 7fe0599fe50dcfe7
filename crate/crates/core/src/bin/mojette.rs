use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mojette::bench::Format;
use mojette::cli::{cmd_bench, cmd_decode, cmd_encode, cmd_verify, BenchOptions, CliError};

#[derive(Parser)]
#[command(name = "mojette", version, about = "Mojette erasure coding of files")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a file into n projection files
    Encode {
        input: PathBuf,
        /// Output directory
        #[arg(short = 'o', default_value = ".")]
        out_dir: PathBuf,
        #[arg(short = 'n', default_value_t = 6)]
        n: usize,
        #[arg(short = 'k', default_value_t = 4)]
        k: usize,
        /// Symbol width in bytes
        #[arg(short = 'w', default_value_t = 16)]
        width: usize,
    },
    /// Rebuild a file from any k projection files
    Decode {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(short = 'o')]
        output: PathBuf,
    },
    /// Check projection files and report decodability
    Verify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run the encode/decode micro-benchmarks
    Bench {
        #[arg(long, default_value = "markdown", value_parser = ["csv", "markdown"])]
        format: String,
        #[arg(long, default_value_t = 101)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the report here instead of stdout
        #[arg(short = 'o')]
        output: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Encode { input, out_dir, n, k, width } => {
            println!("{}", cmd_encode(&input, &out_dir, n, k, width)?);
        }
        Command::Decode { files, output } => {
            let len = cmd_decode(&files, &output)?;
            println!("wrote {} ({len} bytes)", output.display());
        }
        Command::Verify { files } => {
            let report = cmd_verify(&files)?;
            println!("{report}");
            if report.invalid_count() > 0 {
                return Err(CliError::VerifyFailed(report.invalid_count()));
            }
        }
        Command::Bench { format, reps, seed, output } => {
            let format: Format = format.parse().map_err(|e: mojette::Error| CliError::Usage(e.to_string()))?;
            let report = cmd_bench(&BenchOptions { format, repetitions: reps, seed })?;
            match output {
                Some(path) => std::fs::write(&path, report).map_err(|source| CliError::Io { path, source })?,
                None => std::io::stdout()
                    .write_all(&report)
                    .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
