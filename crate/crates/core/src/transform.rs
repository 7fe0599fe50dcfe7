//! Forward Mojette transform with XOR as the bin addition.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{bin_count, Direction, Grid, SymbolWidth};
use crate::xor::{copy_symbol, with_width, xor_array, xor_symbol};

/// The bins of one grid projected along one direction.
///
/// `bins()` holds `len()` symbols; symbol `i` is bin index `b_min() + i`.
#[derive(Clone, PartialEq, Eq)]
pub struct Projection {
    dir: Direction,
    b_min: i64,
    width: SymbolWidth,
    bins: Vec<u8>,
}

impl Projection {
    /// All-zero projection sized for a `cols × rows` grid.
    pub fn zeroed(dir: Direction, cols: usize, rows: usize, width: SymbolWidth) -> Self {
        Projection {
            dir,
            b_min: dir.b_min(cols, rows),
            width,
            bins: vec![0; bin_count(dir, cols, rows) * width.bytes()],
        }
    }

    /// Wraps existing bin bytes, checking their length against the grid shape.
    pub fn from_bins(
        dir: Direction,
        cols: usize,
        rows: usize,
        width: SymbolWidth,
        bins: Vec<u8>,
    ) -> Result<Self> {
        if cols == 0 || rows == 0 {
            return Err(Error::InvalidGrid(format!("{cols}x{rows} has no pixels")));
        }
        let expected = bin_count(dir, cols, rows) * width.bytes();
        if bins.len() != expected {
            return Err(Error::ProjectionSize {
                index: 0,
                expected,
                actual: bins.len(),
            });
        }
        Ok(Projection {
            dir,
            b_min: dir.b_min(cols, rows),
            width,
            bins,
        })
    }

    #[inline]
    pub fn dir(&self) -> Direction {
        self.dir
    }

    #[inline]
    pub fn b_min(&self) -> i64 {
        self.b_min
    }

    #[inline]
    pub fn width(&self) -> SymbolWidth {
        self.width
    }

    /// Number of bins.
    #[inline]
    pub fn len(&self) -> usize {
        self.bins.len() / self.width.bytes()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn bins(&self) -> &[u8] {
        &self.bins
    }

    pub fn bins_mut(&mut self) -> &mut [u8] {
        &mut self.bins
    }

    pub fn into_bins(self) -> Vec<u8> {
        self.bins
    }

    /// Symbol of bin index `b`, if it is inside the projection.
    pub fn bin(&self, b: i64) -> Option<&[u8]> {
        let idx = usize::try_from(b - self.b_min).ok()?;
        let w = self.width.bytes();
        self.bins.get(idx * w..(idx + 1) * w)
    }

    pub fn bin_mut(&mut self, b: i64) -> Option<&mut [u8]> {
        let idx = usize::try_from(b - self.b_min).ok()?;
        let w = self.width.bytes();
        self.bins.get_mut(idx * w..(idx + 1) * w)
    }

    /// Bin indices covered by this projection.
    pub fn indices(&self) -> std::ops::Range<i64> {
        self.b_min..self.b_min + self.len() as i64
    }
}

impl fmt::Debug for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Projection")
            .field("dir", &self.dir)
            .field("b_min", &self.b_min)
            .field("bins", &self.len())
            .finish_non_exhaustive()
    }
}

/// Symbol operations performed by one forward pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ForwardStats {
    /// First write into a bin.
    pub copies: usize,
    /// Accumulations into an already written bin.
    pub xors: usize,
}

/// Projects `grid` along `dir`.
pub fn forward(grid: &Grid, dir: Direction) -> Projection {
    forward_with_stats(grid, dir).0
}

/// [`forward`], also reporting how many symbols were copied and XORed.
pub fn forward_with_stats(grid: &Grid, dir: Direction) -> (Projection, ForwardStats) {
    let mut proj = Projection::zeroed(dir, grid.cols(), grid.rows(), grid.width());
    let stats = forward_into(grid.as_bytes(), grid.cols(), grid.rows(), &mut proj);
    (proj, stats)
}

/// Projects raw row-major `cells` into a pre-sized projection. Every bin
/// byte is overwritten.
pub(crate) fn forward_into(
    cells: &[u8],
    cols: usize,
    rows: usize,
    proj: &mut Projection,
) -> ForwardStats {
    let width = proj.width.bytes();
    debug_assert_eq!(cells.len(), cols * rows * width);
    debug_assert_eq!(proj.len(), bin_count(proj.dir, cols, rows));
    let (dir, b_min) = (proj.dir, proj.b_min);
    let bins = &mut proj.bins;
    if dir.q() == 1 {
        with_width!(width, W => forward_unit::<W>(cells, cols, rows, dir.p() as i64, b_min, bins))
    } else {
        with_width!(width, W => forward_general::<W>(cells, cols, rows, dir, b_min, bins))
    }
}

/// `q = 1`: row `r` lands on the contiguous bin range ending at `r·p`,
/// column 0 on the highest index. Bins first reached by this row are
/// copied, the others accumulated.
fn forward_unit<const W: usize>(
    cells: &[u8],
    cols: usize,
    rows: usize,
    p: i64,
    b_min: i64,
    bins: &mut [u8],
) -> ForwardStats {
    debug_assert_eq!(cells.len(), cols * rows * W);
    let step = p.unsigned_abs() as usize;
    if step > cols {
        // rows do not overlap, leaving untouched bins between them
        bins.fill(0);
    }
    let (cells, _) = cells.as_chunks::<W>();
    let (bins, _) = bins.as_chunks_mut::<W>();
    let mut stats = ForwardStats::default();
    for (row, src) in cells.chunks_exact(cols).enumerate() {
        let top = (row as i64 * p - b_min) as usize;
        // column c lands on bin top - c
        let dst = &mut bins[top + 1 - cols..=top];
        let fresh = if row == 0 { cols } else { step.min(cols) };
        stats.copies += fresh;
        stats.xors += cols - fresh;
        // column c lands on bin top - c; new bins are the first columns
        // when p >= 0, the last ones otherwise
        let split = if p >= 0 { fresh } else { cols - fresh };
        let (head_src, tail_src) = src.split_at(split);
        let (tail_dst, head_dst) = dst.split_at_mut(cols - split);
        let head = head_src.iter().zip(head_dst.iter_mut().rev());
        let tail = tail_src.iter().zip(tail_dst.iter_mut().rev());
        let (copied, xored) = if p >= 0 { (head, tail) } else { (tail, head) };
        for (s, d) in copied {
            *d = *s;
        }
        for (s, d) in xored {
            xor_array::<W>(d, s);
        }
    }
    stats
}

fn forward_general<const W: usize>(
    cells: &[u8],
    cols: usize,
    rows: usize,
    dir: Direction,
    b_min: i64,
    bins: &mut [u8],
) -> ForwardStats {
    bins.fill(0);
    let mut touched = vec![false; bins.len() / W];
    let mut stats = ForwardStats::default();
    for row in 0..rows {
        for col in 0..cols {
            let idx = (dir.bin_index(col, row) - b_min) as usize;
            let src = &cells[(row * cols + col) * W..][..W];
            let dst = &mut bins[idx * W..][..W];
            if touched[idx] {
                xor_symbol::<W>(dst, src);
                stats.xors += 1;
            } else {
                copy_symbol::<W>(dst, src);
                touched[idx] = true;
                stats.copies += 1;
            }
        }
    }
    stats
}
