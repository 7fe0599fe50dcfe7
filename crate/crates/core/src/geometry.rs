//! Discrete geometry of the Mojette lattice.
//!
//! A grid of `cols × rows` pixels is projected along a direction `(p, q)`.
//! The pixel at `(col, row)` falls into bin `b = -col·q + row·p`. Pixels
//! are fixed-width symbols; every symbol in a grid or projection shares the
//! same [`SymbolWidth`].

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Byte width of one pixel or bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolWidth(usize);

impl SymbolWidth {
    /// 128-bit symbols.
    pub const DEFAULT: SymbolWidth = SymbolWidth(16);

    pub fn new(bytes: usize) -> Result<Self> {
        if bytes == 0 || bytes > 64 || !bytes.is_power_of_two() {
            return Err(Error::InvalidSymbolWidth(bytes));
        }
        Ok(SymbolWidth(bytes))
    }

    #[inline]
    pub fn bytes(self) -> usize {
        self.0
    }
}

impl Default for SymbolWidth {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for SymbolWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A projection angle given by a co-prime pair `(p, q)` with `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction {
    p: i32,
    q: i32,
}

impl Direction {
    pub fn new(p: i32, q: i32) -> Result<Self> {
        if q <= 0 || gcd(p.unsigned_abs(), q.unsigned_abs()) != 1 {
            return Err(Error::NotCoprime { p, q });
        }
        Ok(Direction { p, q })
    }

    /// The `(p, 1)` direction used by the erasure code. Always co-prime.
    pub fn unit(p: i32) -> Self {
        Direction { p, q: 1 }
    }

    #[inline]
    pub fn p(self) -> i32 {
        self.p
    }

    #[inline]
    pub fn q(self) -> i32 {
        self.q
    }

    /// Bin index crossed by pixel `(col, row)`.
    #[inline]
    pub fn bin_index(self, col: usize, row: usize) -> i64 {
        -(col as i64) * self.q as i64 + row as i64 * self.p as i64
    }

    /// Smallest bin index over a `cols × rows` grid.
    pub fn b_min(self, cols: usize, rows: usize) -> i64 {
        let rows_span = (rows as i64 - 1) * self.p as i64;
        -(cols as i64 - 1) * self.q as i64 + rows_span.min(0)
    }

    /// Pixels `(col, row)` lying on the line of bin `b`, by ascending row.
    pub fn line(self, b: i64, cols: usize, rows: usize) -> impl Iterator<Item = (usize, usize)> {
        let (p, q) = (self.p as i64, self.q as i64);
        (0..rows).filter_map(move |row| {
            let num = row as i64 * p - b;
            if num.rem_euclid(q) != 0 {
                return None;
            }
            let col = num / q;
            (0..cols as i64).contains(&col).then_some((col as usize, row))
        })
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Number of bins of the projection of a `cols × rows` grid along `dir`:
/// `|p|(rows-1) + |q|(cols-1) + 1`.
pub fn bin_count(dir: Direction, cols: usize, rows: usize) -> usize {
    debug_assert!(cols >= 1 && rows >= 1);
    dir.p.unsigned_abs() as usize * (rows - 1) + dir.q as usize * (cols - 1) + 1
}

/// Katz criterion: a `cols × rows` grid is uniquely determined by the
/// projections along `dirs` iff `cols ≤ Σ|p|` or `rows ≤ Σq`.
pub fn katz_ok(dirs: &[Direction], cols: usize, rows: usize) -> Result<bool> {
    ensure_distinct(dirs)?;
    let sum_p: u64 = dirs.iter().map(|d| d.p.unsigned_abs() as u64).sum();
    let sum_q: u64 = dirs.iter().map(|d| d.q as u64).sum();
    Ok(cols as u64 <= sum_p || rows as u64 <= sum_q)
}

pub(crate) fn ensure_distinct(dirs: &[Direction]) -> Result<()> {
    let mut seen = HashSet::with_capacity(dirs.len());
    for &d in dirs {
        if !seen.insert(d) {
            return Err(Error::DuplicateDirection(d));
        }
    }
    Ok(())
}

/// A `cols × rows` image of fixed-width symbols stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Grid {
    cols: usize,
    rows: usize,
    width: SymbolWidth,
    cells: Vec<u8>,
}

impl Grid {
    pub fn zeroed(cols: usize, rows: usize, width: SymbolWidth) -> Result<Self> {
        check_shape(cols, rows)?;
        Ok(Grid {
            cols,
            rows,
            width,
            cells: vec![0; cols * rows * width.bytes()],
        })
    }

    pub fn from_bytes(cols: usize, rows: usize, width: SymbolWidth, cells: Vec<u8>) -> Result<Self> {
        check_shape(cols, rows)?;
        let expected = cols * rows * width.bytes();
        if cells.len() != expected {
            return Err(Error::InvalidGrid(format!(
                "{} bytes of cells for a {cols}x{rows} grid of {width}-byte symbols (expected {expected})",
                cells.len()
            )));
        }
        Ok(Grid {
            cols,
            rows,
            width,
            cells,
        })
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn width(&self) -> SymbolWidth {
        self.width
    }

    pub fn cell(&self, col: usize, row: usize) -> &[u8] {
        let w = self.width.bytes();
        let at = (row * self.cols + col) * w;
        &self.cells[at..at + w]
    }

    pub fn cell_mut(&mut self, col: usize, row: usize) -> &mut [u8] {
        let w = self.width.bytes();
        let at = (row * self.cols + col) * w;
        &mut self.cells[at..at + w]
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.cells
    }

    pub fn as_bytes_mut(&mut self) -> &mut [u8] {
        &mut self.cells
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.cells
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("cols", &self.cols)
            .field("rows", &self.rows)
            .field("width", &self.width.bytes())
            .finish_non_exhaustive()
    }
}

fn check_shape(cols: usize, rows: usize) -> Result<()> {
    if cols == 0 || rows == 0 {
        return Err(Error::InvalidGrid(format!("{cols}x{rows} has no pixels")));
    }
    Ok(())
}
