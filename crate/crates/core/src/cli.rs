//! Commands behind the `mojette` binary, callable as a library.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 I/O error.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use thiserror::Error;

use crate::bench::{default_scenarios, emit_report, run_suite, Format};
use crate::code::{decode_block, encode_block, storage_overhead, CodeParams};
use crate::error::Error;
use crate::format::{FormatError, ProjectionFile, ProjectionHeader};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: CRC mismatch ({source})", path.display())]
    CrcMismatch {
        path: PathBuf,
        #[source]
        source: FormatError,
    },

    #[error("{}: header does not match {}", path.display(), reference.display())]
    HeaderMismatch { path: PathBuf, reference: PathBuf },

    #[error("{}: {source}", path.display())]
    Format {
        path: PathBuf,
        #[source]
        source: FormatError,
    },

    #[error(transparent)]
    Code(#[from] Error),

    #[error("{0} of the files failed verification")]
    VerifyFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 3,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Outcome of [`cmd_encode`].
#[derive(Debug, Clone)]
pub struct EncodeSummary {
    pub files: Vec<PathBuf>,
    pub cols: usize,
    pub overhead: Ratio<u64>,
}

impl fmt::Display for EncodeSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for path in &self.files {
            writeln!(f, "wrote {}", path.display())?;
        }
        write!(
            f,
            "storage overhead: {} ({:.4})",
            self.overhead,
            *self.overhead.numer() as f64 / *self.overhead.denom() as f64
        )
    }
}

/// Output file name of projection `index` for `input`.
pub fn projection_file_name(input: &Path, index: usize) -> String {
    let stem = input.file_stem().map(|s| s.to_string_lossy()).unwrap_or_else(|| "block".into());
    format!("{stem}.p{index}.mjec")
}

/// Encodes `input` as one block and writes one file per projection.
pub fn cmd_encode(input: &Path, out_dir: &Path, n: usize, k: usize, width: usize) -> Result<EncodeSummary, CliError> {
    let params = CodeParams::new(n, k, width).map_err(|e| CliError::Usage(e.to_string()))?;
    let data = fs::read(input).map_err(io_err(input))?;
    if data.is_empty() {
        return Err(CliError::Usage(format!("{} is empty", input.display())));
    }
    let block = encode_block(&data, &params)?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut files = Vec::with_capacity(params.n());
    for (index, proj) in block.projections.iter().enumerate() {
        let header = ProjectionHeader::for_projection(&params, index, block.cols, data.len()).map_err(|source| {
            CliError::Format {
                path: input.to_path_buf(),
                source,
            }
        })?;
        let file = ProjectionFile::new(header, proj.bins().to_vec()).expect("bins sized by the encoder");
        let path = out_dir.join(projection_file_name(input, index));
        fs::write(&path, file.to_bytes()).map_err(io_err(&path))?;
        files.push(path);
    }
    Ok(EncodeSummary {
        files,
        cols: block.cols,
        overhead: storage_overhead(&params, block.cols),
    })
}

fn load(path: &Path) -> Result<ProjectionFile, CliError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    ProjectionFile::from_bytes(&bytes).map_err(|source| {
        if source.is_crc() {
            CliError::CrcMismatch {
                path: path.to_path_buf(),
                source,
            }
        } else {
            CliError::Format {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

/// Rebuilds the original file from `k` or more projection files.
pub fn cmd_decode(files: &[PathBuf], output: &Path) -> Result<usize, CliError> {
    if files.is_empty() {
        return Err(CliError::Usage("no projection files given".into()));
    }
    let loaded = files.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    let reference = &loaded[0].header;
    for (file, path) in loaded.iter().zip(files).skip(1) {
        if !file.header.same_encoding(reference) {
            return Err(CliError::HeaderMismatch {
                path: path.clone(),
                reference: files[0].clone(),
            });
        }
    }
    let params = reference.params();
    let projs: Vec<_> = loaded.iter().map(ProjectionFile::to_projection).collect();
    let data = decode_block(&projs, &params, reference.payload_len as usize)?;
    fs::write(output, &data).map_err(io_err(output))?;
    Ok(data.len())
}

#[derive(Debug, Clone)]
pub enum CheckOutcome {
    Valid { header: ProjectionHeader },
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct FileCheck {
    pub path: PathBuf,
    pub outcome: CheckOutcome,
}

/// Diagnostics from [`cmd_verify`].
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub files: Vec<FileCheck>,
    /// Distinct valid projections of the first valid file's encoding.
    pub distinct_valid: usize,
    pub k: Option<usize>,
}

impl VerifyReport {
    pub fn decodable(&self) -> bool {
        self.k.is_some_and(|k| self.distinct_valid >= k)
    }

    pub fn invalid_count(&self) -> usize {
        self.files
            .iter()
            .filter(|f| matches!(f.outcome, CheckOutcome::Invalid(_)))
            .count()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.files {
            match &check.outcome {
                CheckOutcome::Valid { header } => writeln!(
                    f,
                    "{}: ok index={} dir={} bins={} (expected {}) crc=ok",
                    check.path.display(),
                    header.proj_index,
                    header.direction(),
                    header.bin_count(),
                    crate::geometry::bin_count(header.direction(), header.cols as usize, header.k as usize),
                )?,
                CheckOutcome::Invalid(why) => writeln!(f, "{}: INVALID {why}", check.path.display())?,
            }
        }
        write!(
            f,
            "decodable: {} ({}/{})",
            if self.decodable() { "yes" } else { "no" },
            self.distinct_valid,
            self.k.map(|k| k.to_string()).unwrap_or_else(|| "?".into())
        )
    }
}

/// Checks every file independently and summarizes decodability.
pub fn cmd_verify(files: &[PathBuf]) -> Result<VerifyReport, CliError> {
    if files.is_empty() {
        return Err(CliError::Usage("no projection files given".into()));
    }
    let mut checks = Vec::with_capacity(files.len());
    let mut reference: Option<(ProjectionHeader, &PathBuf)> = None;
    let mut indices = std::collections::BTreeSet::new();
    for path in files {
        let outcome = match load(path) {
            Err(e) => CheckOutcome::Invalid(match e {
                CliError::Format { source, .. } | CliError::CrcMismatch { source, .. } => source.to_string(),
                other => other.to_string(),
            }),
            Ok(file) => match &reference {
                Some((r, rpath)) if !file.header.same_encoding(r) => {
                    CheckOutcome::Invalid(format!("header does not match {}", rpath.display()))
                }
                _ => {
                    reference.get_or_insert((file.header.clone(), path));
                    indices.insert(file.header.proj_index);
                    CheckOutcome::Valid { header: file.header }
                }
            },
        };
        checks.push(FileCheck {
            path: path.clone(),
            outcome,
        });
    }
    Ok(VerifyReport {
        files: checks,
        distinct_valid: indices.len(),
        k: reference.map(|(h, _)| h.k as usize),
    })
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub format: Format,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            format: Format::Markdown,
            repetitions: 101,
            seed: 1,
        }
    }
}

/// Runs the default benchmark grid and renders the report.
pub fn cmd_bench(options: &BenchOptions) -> Result<Vec<u8>, CliError> {
    if options.repetitions == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let reports = run_suite(&default_scenarios(options.repetitions, options.seed))?;
    Ok(emit_report(&reports, options.format)?)
}
