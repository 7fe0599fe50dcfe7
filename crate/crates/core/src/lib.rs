//! Packet erasure coding with the Mojette transform.
//!
//! A data block is laid out as a grid of `k` rows of fixed-width symbols.
//! Each of the `n` encoded packets is one discrete projection of that grid
//! along a direction `(p, 1)`. Any `k` projections determine the grid, and
//! decoding replays a precomputed back-projection path using nothing but
//! XORs.
//!
//! ```
//! use mojette::{decode_block, encode_block, CodeParams};
//!
//! let params = CodeParams::new(6, 4, 16).unwrap();
//! let data: Vec<u8> = (0..4096u32).map(|i| (i * 31 % 251) as u8).collect();
//! let block = encode_block(&data, &params).unwrap();
//!
//! // lose any two packets
//! let survivors = &block.projections[2..];
//! assert_eq!(decode_block(survivors, &params, data.len()).unwrap(), data);
//! ```
//!
//! Module map:
//!
//! - [`geometry`], [`transform`], [`inverse`], [`schedule`]: the transform
//!   kernel on grids and projections.
//! - [`code`]: the `(n, k)` erasure code on byte blocks.
//! - [`rs`]: a systematic Vandermonde Reed-Solomon code over GF(2^8), used
//!   as an independent reference and benchmark competitor.
//! - [`bench`]: micro-benchmark harness and report output.
//! - [`format`] and [`cli`]: the on-disk projection file and the commands
//!   behind the `mojette` binary.

pub mod bench;
pub mod cli;
pub mod code;
mod error;
pub mod format;
pub mod geometry;
pub mod inverse;
pub mod rs;
pub mod schedule;
pub mod transform;
mod xor;

pub use code::{
    decode_block, encode_block, select_directions, storage_overhead, unused_bins, CodeParams,
    EncodedBlock,
};
pub use error::{Error, Result};
pub use geometry::{bin_count, katz_ok, Direction, Grid, SymbolWidth};
pub use inverse::inverse_iterative;
pub use schedule::{build_schedule, inverse_scheduled, ReconstructionSchedule, Step};
pub use transform::{forward, forward_with_stats, ForwardStats, Projection};
pub use xor::xor_into;
