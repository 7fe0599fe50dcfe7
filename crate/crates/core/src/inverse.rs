//! Reference inverse: peel reconstructible bins until the grid is known.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geometry::{bin_count, ensure_distinct, Grid, SymbolWidth};
use crate::transform::{forward, Projection};
use crate::xor::xor_into;

/// Per-bin count of pixels not yet reconstructed, one vector per projection.
pub(crate) fn line_counts(dirs: impl Iterator<Item = crate::Direction>, cols: usize, rows: usize) -> Vec<Vec<u32>> {
    dirs.map(|dir| {
        let b_min = dir.b_min(cols, rows);
        let mut counts = vec![0u32; bin_count(dir, cols, rows)];
        for row in 0..rows {
            for col in 0..cols {
                counts[(dir.bin_index(col, row) - b_min) as usize] += 1;
            }
        }
        counts
    })
    .collect()
}

/// Checks that `projs` are distinct, share a width and are sized for a
/// `cols × rows` grid. Returns the common width.
pub(crate) fn validate_projections(projs: &[Projection], cols: usize, rows: usize) -> Result<SymbolWidth> {
    if cols == 0 || rows == 0 {
        return Err(Error::InvalidGrid(format!("{cols}x{rows} has no pixels")));
    }
    let dirs: Vec<_> = projs.iter().map(Projection::dir).collect();
    ensure_distinct(&dirs)?;
    let width = projs.first().map(Projection::width).unwrap_or_default();
    for (index, proj) in projs.iter().enumerate() {
        let expected = bin_count(proj.dir(), cols, rows) * width.bytes();
        if proj.width() != width || proj.bins().len() != expected {
            return Err(Error::ProjectionSize {
                index,
                expected,
                actual: proj.bins().len(),
            });
        }
    }
    Ok(width)
}

/// Reconstructs the `cols × rows` grid from its projections.
///
/// Any bin whose line crosses a single unknown pixel gives that pixel's
/// value directly; the pixel is then XORed out of every projection. After
/// the grid is complete each input is re-encoded and compared, so
/// redundant projections that disagree with the rest are reported as
/// [`Error::InconsistentProjections`].
pub fn inverse_iterative(projs: &[Projection], cols: usize, rows: usize) -> Result<Grid> {
    let width = validate_projections(projs, cols, rows)?;
    let w = width.bytes();
    let mut grid = Grid::zeroed(cols, rows, width)?;
    let mut work: Vec<Vec<u8>> = projs.iter().map(|p| p.bins().to_vec()).collect();
    let mut counts = line_counts(projs.iter().map(Projection::dir), cols, rows);
    let mut known = vec![false; cols * rows];
    let mut remaining = cols * rows;

    let mut ready: VecDeque<(usize, usize)> = counts
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().enumerate().filter(|(_, &n)| n == 1).map(move |(idx, _)| (i, idx)))
        .collect();

    let mut pixel = vec![0u8; w];
    while let Some((i, idx)) = ready.pop_front() {
        if counts[i][idx] != 1 {
            continue;
        }
        let dir = projs[i].dir();
        let b = projs[i].b_min() + idx as i64;
        let (col, row) = dir
            .line(b, cols, rows)
            .find(|&(c, r)| !known[r * cols + c])
            .expect("count of 1 implies one unknown pixel on the line");

        pixel.copy_from_slice(&work[i][idx * w..(idx + 1) * w]);
        grid.cell_mut(col, row).copy_from_slice(&pixel);
        known[row * cols + col] = true;
        remaining -= 1;

        for (j, proj) in projs.iter().enumerate() {
            let jdx = (proj.dir().bin_index(col, row) - proj.b_min()) as usize;
            xor_into(&mut work[j][jdx * w..(jdx + 1) * w], &pixel);
            counts[j][jdx] -= 1;
            if counts[j][jdx] == 1 {
                ready.push_back((j, jdx));
            }
        }
    }

    if remaining > 0 {
        return Err(Error::InsufficientProjections { remaining });
    }
    for proj in projs {
        if forward(&grid, proj.dir()).bins() != proj.bins() {
            return Err(Error::InconsistentProjections(proj.dir()));
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Direction;

    fn w1() -> SymbolWidth {
        SymbolWidth::new(1).unwrap()
    }

    #[test]
    fn recovers_two_by_two_from_diagonals() {
        let g = Grid::from_bytes(2, 2, w1(), vec![0x01, 0x02, 0x04, 0x08]).unwrap();
        let projs = vec![
            Projection::from_bins(Direction::unit(1), 2, 2, w1(), vec![0x02, 0x09, 0x04]).unwrap(),
            Projection::from_bins(Direction::unit(-1), 2, 2, w1(), vec![0x08, 0x06, 0x01]).unwrap(),
        ];
        assert_eq!(inverse_iterative(&projs, 2, 2).unwrap(), g);
    }

    #[test]
    fn single_row_from_vertical_projection() {
        let g = Grid::from_bytes(5, 1, w1(), vec![9, 8, 7, 6, 5]).unwrap();
        let proj = forward(&g, Direction::unit(0));
        assert_eq!(inverse_iterative(&[proj], 5, 1).unwrap(), g);
    }

    #[test]
    fn katz_failure_stalls() {
        let g = Grid::from_bytes(3, 3, w1(), (1..=9).collect()).unwrap();
        let projs: Vec<_> = [0, 1].into_iter().map(|p| forward(&g, Direction::unit(p))).collect();
        assert!(matches!(
            inverse_iterative(&projs, 3, 3),
            Err(Error::InsufficientProjections { .. })
        ));
        assert!(matches!(
            inverse_iterative(&[], 1, 1),
            Err(Error::InsufficientProjections { remaining: 1 })
        ));
    }

    #[test]
    fn corrupted_redundant_projection_is_inconsistent() {
        let g = Grid::from_bytes(3, 2, w1(), (1..=6).collect()).unwrap();
        let mut projs: Vec<_> = [0, 1, -1].into_iter().map(|p| forward(&g, Direction::unit(p))).collect();
        projs[2].bins_mut()[1] ^= 0x40;
        assert!(matches!(
            inverse_iterative(&projs, 3, 2),
            Err(Error::InconsistentProjections(_))
        ));
    }

    #[test]
    fn rejects_duplicates_and_bad_sizes() {
        let g = Grid::zeroed(3, 2, w1()).unwrap();
        let p = forward(&g, Direction::unit(1));
        assert_eq!(
            inverse_iterative(&[p.clone(), p.clone()], 3, 2),
            Err(Error::DuplicateDirection(Direction::unit(1)))
        );
        assert!(matches!(
            inverse_iterative(&[p], 4, 2),
            Err(Error::ProjectionSize { .. })
        ));
    }
}
