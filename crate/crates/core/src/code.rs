//! The `(n, k)` erasure code.
//!
//! A block is zero-padded to `k·P·W` bytes and laid out as `k` rows of `P`
//! symbols, one row per data packet. The `n` encoded packets are the
//! projections of that grid along `(p, 1)` for `n` distinct `p`. Since
//! every direction has `q = 1`, any `k` of them satisfy the Katz criterion
//! on a `k`-row grid and the block can be rebuilt from them.

use std::borrow::Borrow;
use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use itertools::Itertools;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::geometry::{bin_count, Direction, Grid, SymbolWidth};
use crate::schedule::{build_schedule, ReconstructionSchedule};
use crate::transform::{forward_into, Projection};

/// Upper bound on `C(n, k)` for [`unused_bins`].
pub const DEFAULT_SUBSET_CAP: u128 = 100_000;

/// Code parameters: `n` projections, any `k` of which decode.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodeParams {
    k: usize,
    width: SymbolWidth,
    directions: Vec<Direction>,
}

impl CodeParams {
    /// `(n, k)` code over `width`-byte symbols with the directions of
    /// [`select_directions`].
    pub fn new(n: usize, k: usize, width: usize) -> Result<Self> {
        Self::with_directions(k, SymbolWidth::new(width)?, select_directions(n))
    }

    /// Code over an explicit direction list; `n` is its length.
    pub fn with_directions(k: usize, width: SymbolWidth, directions: Vec<Direction>) -> Result<Self> {
        let n = directions.len();
        if k == 0 || k > n || n > 255 {
            return Err(Error::InvalidParams(format!("need 1 <= k <= n <= 255, got n={n} k={k}")));
        }
        if let Some(d) = directions.iter().find(|d| d.q() != 1) {
            return Err(Error::InvalidParams(format!("direction {d} does not have q = 1")));
        }
        let distinct: BTreeSet<i32> = directions.iter().map(|d| d.p()).collect();
        if distinct.len() != n {
            return Err(Error::InvalidParams("directions must have distinct p".into()));
        }
        Ok(CodeParams {
            k,
            width,
            directions,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.directions.len()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn width(&self) -> SymbolWidth {
        self.width
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn index_of(&self, dir: Direction) -> Option<usize> {
        self.directions.iter().position(|&d| d == dir)
    }

    /// Columns `P` of the grid holding a `payload_len`-byte block.
    pub fn columns_for(&self, payload_len: usize) -> Result<usize> {
        if payload_len == 0 {
            return Err(Error::EmptyInput);
        }
        let cols = payload_len.div_ceil(self.k * self.width.bytes());
        if cols as u64 > u32::MAX as u64 {
            return Err(Error::BlockTooLarge { cols: cols as u64 });
        }
        Ok(cols)
    }

    /// Bytes of one padded block with `cols` columns.
    pub fn block_bytes(&self, cols: usize) -> usize {
        self.k * cols * self.width.bytes()
    }
}

/// `n` directions `(p, 1)` with `p` running 0, 1, -1, 2, -2, ...
pub fn select_directions(n: usize) -> Vec<Direction> {
    (0..n)
        .map(|i| {
            let mag = i.div_ceil(2) as i32;
            Direction::unit(if i % 2 == 1 { mag } else { -mag })
        })
        .collect()
}

/// One encoded block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedBlock {
    pub params: CodeParams,
    pub payload_len: usize,
    /// Grid columns `P`.
    pub cols: usize,
    /// `projections[i]` is along `params.directions()[i]`.
    pub projections: Vec<Projection>,
}

/// Encodes `data` into `n` projections.
pub fn encode_block(data: &[u8], params: &CodeParams) -> Result<EncodedBlock> {
    let cols = params.columns_for(data.len())?;
    let mut padded = data.to_vec();
    padded.resize(params.block_bytes(cols), 0);
    let mut encoder = BlockEncoder::new(params.clone(), cols);
    encoder.encode(&padded)?;
    Ok(EncodedBlock {
        params: params.clone(),
        payload_len: data.len(),
        cols,
        projections: encoder.into_projections(),
    })
}

/// Reusable encoder for blocks of exactly `k·P·W` bytes. Encoding into the
/// held projections performs no allocation.
#[derive(Debug, Clone)]
pub struct BlockEncoder {
    params: CodeParams,
    cols: usize,
    projections: Vec<Projection>,
}

impl BlockEncoder {
    pub fn new(params: CodeParams, cols: usize) -> Self {
        let projections = params
            .directions
            .iter()
            .map(|&d| Projection::zeroed(d, cols, params.k, params.width))
            .collect();
        BlockEncoder {
            params,
            cols,
            projections,
        }
    }

    pub fn encode(&mut self, block: &[u8]) -> Result<&[Projection]> {
        let expected = self.params.block_bytes(self.cols);
        if block.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: block.len(),
            });
        }
        for proj in &mut self.projections {
            forward_into(block, self.cols, self.params.k, proj);
        }
        Ok(&self.projections)
    }

    pub fn projections(&self) -> &[Projection] {
        &self.projections
    }

    pub fn into_projections(self) -> Vec<Projection> {
        self.projections
    }
}

type CacheKey = (Vec<Direction>, usize, usize);

/// Reconstruction schedules keyed by `(directions, P, k)`.
///
/// Readers share the map; a miss builds outside the lock and inserts. Two
/// racing builders produce equal schedules so either insert may win.
#[derive(Debug, Default)]
pub struct ScheduleCache {
    map: RwLock<HashMap<CacheKey, Arc<ReconstructionSchedule>>>,
}

impl ScheduleCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_build(&self, dirs: &[Direction], cols: usize, rows: usize) -> Result<Arc<ReconstructionSchedule>> {
        let key = (dirs.to_vec(), cols, rows);
        if let Some(hit) = self.map.read().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(Arc::clone(hit));
        }
        let built = Arc::new(build_schedule(dirs, cols, rows)?);
        let mut map = self.map.write().unwrap_or_else(|e| e.into_inner());
        Ok(Arc::clone(map.entry(key).or_insert(built)))
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Process-wide cache used by [`decode_block`].
pub fn schedule_cache() -> &'static ScheduleCache {
    static CACHE: OnceLock<ScheduleCache> = OnceLock::new();
    CACHE.get_or_init(ScheduleCache::new)
}

/// Picks the `k` projections to decode from: smallest `|p|` first, ties by
/// position in the code's direction list. Returns canonical indices in
/// ascending order.
pub fn choose_subset(params: &CodeParams, available: &[usize]) -> Result<Vec<usize>> {
    if available.len() < params.k {
        return Err(Error::NotEnoughProjections {
            got: available.len(),
            need: params.k,
        });
    }
    let mut chosen: Vec<usize> = available
        .iter()
        .copied()
        .sorted_by_key(|&i| (params.directions[i].p().unsigned_abs(), i))
        .take(params.k)
        .collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Reusable decoder for one fixed set of `k` surviving projections.
#[derive(Debug, Clone)]
pub struct BlockDecoder {
    schedule: Arc<ReconstructionSchedule>,
    indices: Vec<usize>,
    grid: Grid,
}

impl BlockDecoder {
    /// Decoder reading the projections at canonical `indices` (exactly `k`).
    pub fn new(params: &CodeParams, cols: usize, indices: &[usize], cache: &ScheduleCache) -> Result<Self> {
        if indices.len() != params.k {
            return Err(Error::NotEnoughProjections {
                got: indices.len(),
                need: params.k,
            });
        }
        let dirs: Vec<Direction> = indices
            .iter()
            .map(|&i| {
                params
                    .directions
                    .get(i)
                    .copied()
                    .ok_or_else(|| Error::InvalidParams(format!("no projection index {i}")))
            })
            .collect::<Result<_>>()?;
        let schedule = cache.get_or_build(&dirs, cols, params.k)?;
        Ok(BlockDecoder {
            schedule,
            indices: indices.to_vec(),
            grid: Grid::zeroed(cols, params.k, params.width)?,
        })
    }

    /// Canonical indices this decoder expects, in order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn schedule(&self) -> &ReconstructionSchedule {
        &self.schedule
    }

    /// Rebuilds the padded block from projections given in [`indices`](Self::indices) order.
    pub fn decode<B: Borrow<Projection>>(&mut self, projs: &[B]) -> Result<&[u8]> {
        self.schedule.replay_into(projs, &mut self.grid)?;
        Ok(self.grid.as_bytes())
    }
}

/// Decodes a block from any `k` or more of its projections.
///
/// Exactly `k` projections are replayed. Any surplus ones are checked
/// against the rebuilt block and a mismatch is reported as
/// [`Error::InconsistentProjections`].
pub fn decode_block(projs: &[Projection], params: &CodeParams, payload_len: usize) -> Result<Vec<u8>> {
    decode_block_with(projs, params, payload_len, schedule_cache())
}

/// [`decode_block`] with an explicit schedule cache.
pub fn decode_block_with(
    projs: &[Projection],
    params: &CodeParams,
    payload_len: usize,
    cache: &ScheduleCache,
) -> Result<Vec<u8>> {
    let cols = params.columns_for(payload_len)?;
    let mut by_index: Vec<Option<&Projection>> = vec![None; params.n()];
    for proj in projs {
        let i = params.index_of(proj.dir()).ok_or(Error::UnknownDirection(proj.dir()))?;
        if by_index[i].replace(proj).is_some() {
            return Err(Error::DuplicateDirection(proj.dir()));
        }
        let expected = bin_count(proj.dir(), cols, params.k) * params.width.bytes();
        if proj.width() != params.width || proj.bins().len() != expected {
            return Err(Error::ProjectionSize {
                index: i,
                expected,
                actual: proj.bins().len(),
            });
        }
    }
    let available: Vec<usize> = (0..params.n()).filter(|&i| by_index[i].is_some()).collect();
    let chosen = choose_subset(params, &available)?;
    let mut decoder = BlockDecoder::new(params, cols, &chosen, cache)?;
    let inputs: Vec<&Projection> = chosen.iter().map(|&i| by_index[i].unwrap()).collect();
    decoder.decode(&inputs)?;

    for &i in available.iter().filter(|i| !chosen.contains(i)) {
        let given = by_index[i].unwrap();
        let mut fresh = Projection::zeroed(given.dir(), cols, params.k, params.width);
        forward_into(decoder.grid.as_bytes(), cols, params.k, &mut fresh);
        if fresh.bins() != given.bins() {
            return Err(Error::InconsistentProjections(given.dir()));
        }
    }

    let mut out = decoder.grid.into_bytes();
    out.truncate(payload_len);
    Ok(out)
}

/// Stored symbols relative to an MDS code: `Σ bin_count / (n·P)`.
pub fn storage_overhead(params: &CodeParams, cols: usize) -> Ratio<u64> {
    let stored: u64 = params
        .directions
        .iter()
        .map(|&d| bin_count(d, cols, params.k) as u64)
        .sum();
    Ratio::new(stored, (params.n() * cols) as u64)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Bins of each projection that no `k`-subset decode ever reads or
/// updates, by bin index. Uses [`DEFAULT_SUBSET_CAP`].
pub fn unused_bins(params: &CodeParams, cols: usize) -> Result<Vec<BTreeSet<i64>>> {
    unused_bins_with_cap(params, cols, DEFAULT_SUBSET_CAP)
}

pub fn unused_bins_with_cap(params: &CodeParams, cols: usize, cap: u128) -> Result<Vec<BTreeSet<i64>>> {
    let subsets = binomial(params.n(), params.k);
    if subsets > cap {
        return Err(Error::TooManySubsets { subsets, cap });
    }
    let mut unused: Vec<BTreeSet<i64>> = params
        .directions
        .iter()
        .map(|&d| {
            let b_min = d.b_min(cols, params.k);
            (b_min..b_min + bin_count(d, cols, params.k) as i64).collect()
        })
        .collect();
    for subset in (0..params.n()).combinations(params.k) {
        let dirs: Vec<Direction> = subset.iter().map(|&i| params.directions[i]).collect();
        let schedule = build_schedule(&dirs, cols, params.k)?;
        for (local, b) in schedule.referenced_bins() {
            unused[subset[local]].remove(&b);
        }
    }
    Ok(unused)
}
