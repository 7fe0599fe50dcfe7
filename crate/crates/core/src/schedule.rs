//! Precomputed reconstruction paths.
//!
//! For a fixed grid shape and projection set, the order in which pixels
//! become reconstructible does not depend on pixel values. Running the
//! peeling decoder on bin counts alone yields a list of steps that can be
//! replayed on any data with no searching.
//!
//! A step's bin has exactly one unknown pixel left on its line, so that
//! pixel is the original bin value XORed with the other, already known,
//! pixels of the line. Replay computes it in that form: it reads input bins
//! without copying them and never touches a bin no step reads.

use std::borrow::Borrow;
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::{bin_count, ensure_distinct, Direction, Grid};
use crate::inverse::line_counts;
use crate::transform::Projection;
use crate::xor::{with_width, xor_array};

/// One back-projection: pixel `(col, row)` is read from bin `bin_index` of
/// projection `proj_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step {
    pub proj_index: usize,
    pub bin_index: i64,
    pub col: usize,
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconstructionSchedule {
    cols: usize,
    rows: usize,
    directions: Vec<Direction>,
    steps: Vec<Step>,
    /// Per step: projection, symbol offset of the bin in it, grid cell.
    reads: Vec<(u32, u32, u32)>,
    /// `gathers[gather_ends[s-1]..gather_ends[s]]` are the known cells on
    /// the line of step `s`.
    gather_ends: Vec<u32>,
    gathers: Vec<u32>,
}

impl ReconstructionSchedule {
    pub fn grid_shape(&self) -> (usize, usize) {
        (self.cols, self.rows)
    }

    pub fn directions_used(&self) -> &[Direction] {
        &self.directions
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Pixel XORs performed by one replay.
    pub fn xor_count(&self) -> usize {
        self.gathers.len()
    }

    /// Every `(proj_index, bin_index)` a replay reads.
    pub fn referenced_bins(&self) -> Vec<(usize, i64)> {
        let mut out: Vec<(usize, i64)> = self.steps.iter().map(|s| (s.proj_index, s.bin_index)).collect();
        out.sort_unstable();
        out
    }

    fn check_inputs<B: Borrow<Projection>>(&self, projs: &[B], out: &Grid) -> Result<()> {
        if projs.len() != self.directions.len() {
            return Err(Error::ScheduleMismatch(format!(
                "{} projections for a schedule over {}",
                projs.len(),
                self.directions.len()
            )));
        }
        if (out.cols(), out.rows()) != (self.cols, self.rows) {
            return Err(Error::ScheduleMismatch(format!(
                "output grid is {}x{}, schedule is {}x{}",
                out.cols(),
                out.rows(),
                self.cols,
                self.rows
            )));
        }
        for (i, (proj, &dir)) in projs.iter().zip(&self.directions).enumerate() {
            let proj = proj.borrow();
            if proj.dir() != dir {
                return Err(Error::ScheduleMismatch(format!(
                    "projection {i} has direction {}, schedule expects {dir}",
                    proj.dir()
                )));
            }
            if proj.width() != out.width() || proj.len() != bin_count(dir, self.cols, self.rows) {
                return Err(Error::ScheduleMismatch(format!(
                    "projection {i} holds {} bins of {} bytes, expected {} of {}",
                    proj.len(),
                    proj.width(),
                    bin_count(dir, self.cols, self.rows),
                    out.width()
                )));
            }
        }
        Ok(())
    }

    /// Replays the schedule into `out`. Does not allocate.
    pub fn replay_into<B: Borrow<Projection>>(&self, projs: &[B], out: &mut Grid) -> Result<()> {
        self.check_inputs(projs, out)?;
        let w = out.width().bytes();
        with_width!(w, W => self.replay_kernel::<W, B>(projs, out.as_bytes_mut()));
        Ok(())
    }

    fn replay_kernel<const W: usize, B: Borrow<Projection>>(&self, projs: &[B], cells: &mut [u8]) {
        let (cells, _) = cells.as_chunks_mut::<W>();
        let mut start = 0;
        for (&(proj, bin, cell), &end) in self.reads.iter().zip(&self.gather_ends) {
            let (bins, _) = projs[proj as usize].borrow().bins().as_chunks::<W>();
            let mut pixel = bins[bin as usize];
            for &g in &self.gathers[start..end as usize] {
                xor_array::<W>(&mut pixel, &cells[g as usize]);
            }
            cells[cell as usize] = pixel;
            start = end as usize;
        }
    }
}

/// Simulates the peeling decoder on bin counts and records its path.
///
/// Each round takes the first bin, scanning projections in input order and
/// bin indices ascending, whose line holds exactly one unknown pixel.
pub fn build_schedule(dirs: &[Direction], cols: usize, rows: usize) -> Result<ReconstructionSchedule> {
    if cols == 0 || rows == 0 {
        return Err(Error::InvalidGrid(format!("{cols}x{rows} has no pixels")));
    }
    let too_big = |n: usize| n > u32::MAX as usize;
    if cols.checked_mul(rows).is_none_or(too_big) || dirs.iter().any(|&d| too_big(bin_count(d, cols, rows))) {
        return Err(Error::InvalidGrid(format!("{cols}x{rows} is too large to schedule")));
    }
    ensure_distinct(dirs)?;
    let mut counts = line_counts(dirs.iter().copied(), cols, rows);
    let b_mins: Vec<i64> = dirs.iter().map(|d| d.b_min(cols, rows)).collect();
    let mut ready: BTreeSet<(usize, usize)> = counts
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().enumerate().filter(|(_, &n)| n == 1).map(move |(idx, _)| (i, idx)))
        .collect();
    let mut known = vec![false; cols * rows];
    let mut steps = Vec::with_capacity(cols * rows);

    while let Some((i, idx)) = ready.pop_first() {
        let b = b_mins[i] + idx as i64;
        let (col, row) = dirs[i]
            .line(b, cols, rows)
            .find(|&(c, r)| !known[r * cols + c])
            .expect("count of 1 implies one unknown pixel on the line");
        known[row * cols + col] = true;
        steps.push(Step {
            proj_index: i,
            bin_index: b,
            col,
            row,
        });
        for (j, dir) in dirs.iter().enumerate() {
            let jdx = (dir.bin_index(col, row) - b_mins[j]) as usize;
            counts[j][jdx] -= 1;
            match counts[j][jdx] {
                1 => {
                    ready.insert((j, jdx));
                }
                0 => {
                    ready.remove(&(j, jdx));
                }
                _ => {}
            }
        }
    }

    if steps.len() < cols * rows {
        return Err(Error::InsufficientProjections {
            remaining: cols * rows - steps.len(),
        });
    }
    Ok(compile(dirs.to_vec(), cols, rows, steps))
}

fn compile(directions: Vec<Direction>, cols: usize, rows: usize, steps: Vec<Step>) -> ReconstructionSchedule {
    let b_mins: Vec<i64> = directions.iter().map(|d| d.b_min(cols, rows)).collect();
    let mut reads = Vec::with_capacity(steps.len());
    let mut gather_ends = Vec::with_capacity(steps.len());
    let mut gathers = Vec::new();
    for step in &steps {
        let dir = directions[step.proj_index];
        let cell = step.row * cols + step.col;
        reads.push((
            step.proj_index as u32,
            (step.bin_index - b_mins[step.proj_index]) as u32,
            cell as u32,
        ));
        gathers.extend(
            dir.line(step.bin_index, cols, rows)
                .map(|(c, r)| (r * cols + c) as u32)
                .filter(|&g| g != cell as u32),
        );
        gather_ends.push(gathers.len() as u32);
    }
    ReconstructionSchedule {
        cols,
        rows,
        directions,
        steps,
        reads,
        gather_ends,
        gathers,
    }
}

/// Rebuilds the grid by replaying `schedule` over `projs`, which must carry
/// the schedule's directions in the same order.
pub fn inverse_scheduled(projs: &[Projection], schedule: &ReconstructionSchedule) -> Result<Grid> {
    let (cols, rows) = schedule.grid_shape();
    let width = projs
        .first()
        .map(Projection::width)
        .ok_or_else(|| Error::ScheduleMismatch("no projections".into()))?;
    let mut grid = Grid::zeroed(cols, rows, width)?;
    schedule.replay_into(projs, &mut grid)?;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SymbolWidth;
    use crate::inverse::inverse_iterative;
    use crate::transform::forward;

    /// Re-runs the steps against fresh counts and checks that every read
    /// bin holds exactly one unknown pixel at that moment.
    fn replay_is_sound(s: &ReconstructionSchedule) -> bool {
        let (cols, rows) = s.grid_shape();
        let dirs = s.directions_used();
        let mut counts = line_counts(dirs.iter().copied(), cols, rows);
        let mut seen = vec![false; cols * rows];
        for step in s.steps() {
            let dir = dirs[step.proj_index];
            if dir.bin_index(step.col, step.row) != step.bin_index {
                return false;
            }
            let idx = (step.bin_index - dir.b_min(cols, rows)) as usize;
            if counts[step.proj_index][idx] != 1 || seen[step.row * cols + step.col] {
                return false;
            }
            seen[step.row * cols + step.col] = true;
            for (j, d) in dirs.iter().enumerate() {
                counts[j][(d.bin_index(step.col, step.row) - d.b_min(cols, rows)) as usize] -= 1;
            }
        }
        seen.iter().all(|&x| x)
    }

    #[test]
    fn single_row_schedule() {
        let s = build_schedule(&[Direction::unit(0)], 4, 1).unwrap();
        assert_eq!(s.steps().len(), 4);
        assert!(s.steps().iter().all(|st| st.proj_index == 0));
        let mut cols: Vec<_> = s.steps().iter().map(|st| st.col).collect();
        cols.sort();
        assert_eq!(cols, vec![0, 1, 2, 3]);
    }

    #[test]
    fn two_by_two_schedule() {
        let dirs = [Direction::unit(1), Direction::unit(-1)];
        let s = build_schedule(&dirs, 2, 2).unwrap();
        assert!(replay_is_sound(&s));
        // corners of (1,1) first, then (-1,1) frees the centre bin of (1,1)
        let expected = [
            Step { proj_index: 0, bin_index: -1, col: 1, row: 0 },
            Step { proj_index: 0, bin_index: 1, col: 0, row: 1 },
            Step { proj_index: 1, bin_index: -2, col: 1, row: 1 },
            Step { proj_index: 0, bin_index: 0, col: 0, row: 0 },
        ];
        assert_eq!(s.steps(), &expected[..]);

        let w = SymbolWidth::new(1).unwrap();
        let g = Grid::from_bytes(2, 2, w, vec![0x01, 0x02, 0x04, 0x08]).unwrap();
        let projs: Vec<_> = dirs.iter().map(|&d| forward(&g, d)).collect();
        assert_eq!(inverse_scheduled(&projs, &s).unwrap(), g);
    }

    #[test]
    fn deterministic() {
        let dirs: Vec<_> = [0, 1, -1, 2].into_iter().map(Direction::unit).collect();
        assert_eq!(build_schedule(&dirs, 9, 4).unwrap(), build_schedule(&dirs, 9, 4).unwrap());
    }

    #[test]
    fn stall_reports_insufficient() {
        let dirs = [Direction::unit(0), Direction::unit(1)];
        assert!(matches!(
            build_schedule(&dirs, 3, 3),
            Err(Error::InsufficientProjections { .. })
        ));
    }

    #[test]
    fn zero_projections_give_zero_grid() {
        let dirs: Vec<_> = [0, 1, -1].into_iter().map(Direction::unit).collect();
        let w = SymbolWidth::new(16).unwrap();
        let s = build_schedule(&dirs, 6, 3).unwrap();
        let projs: Vec<_> = dirs.iter().map(|&d| Projection::zeroed(d, 6, 3, w)).collect();
        let g = inverse_scheduled(&projs, &s).unwrap();
        assert_eq!(g, Grid::zeroed(6, 3, w).unwrap());
    }

    #[test]
    fn mismatched_inputs() {
        let dirs = [Direction::unit(1), Direction::unit(-1)];
        let s = build_schedule(&dirs, 2, 2).unwrap();
        let w = SymbolWidth::new(1).unwrap();
        let swapped: Vec<_> = dirs.iter().rev().map(|&d| Projection::zeroed(d, 2, 2, w)).collect();
        assert!(matches!(inverse_scheduled(&swapped, &s), Err(Error::ScheduleMismatch(_))));
        let wrong_size: Vec<_> = dirs.iter().map(|&d| Projection::zeroed(d, 3, 2, w)).collect();
        assert!(matches!(inverse_scheduled(&wrong_size, &s), Err(Error::ScheduleMismatch(_))));
        assert!(matches!(inverse_scheduled(&[], &s), Err(Error::ScheduleMismatch(_))));
    }

    #[test]
    fn equals_iterative_on_six_four_subsets() {
        use itertools::Itertools;
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let all: Vec<_> = [0, 1, -1, 2, -2, 3].into_iter().map(Direction::unit).collect();
        let w = SymbolWidth::new(16).unwrap();
        for _ in 0..4 {
            let cols = rng.gen_range(1..40);
            let cells: Vec<u8> = (0..cols * 4 * 16).map(|_| rng.gen()).collect();
            let g = Grid::from_bytes(cols, 4, w, cells).unwrap();
            for subset in all.iter().copied().combinations(4) {
                let projs: Vec<_> = subset.iter().map(|&d| forward(&g, d)).collect();
                let s = build_schedule(&subset, cols, 4).unwrap();
                assert!(replay_is_sound(&s));
                assert_eq!(s.steps().len(), cols * 4);
                let fast = inverse_scheduled(&projs, &s).unwrap();
                assert_eq!(fast, inverse_iterative(&projs, cols, 4).unwrap());
                assert_eq!(fast, g);
            }
        }
    }

    #[test]
    fn xor_count_matches_line_lengths() {
        let dirs: Vec<_> = [0, 1, -1, 2].into_iter().map(Direction::unit).collect();
        let (cols, rows) = (64, 4);
        let s = build_schedule(&dirs, cols, rows).unwrap();
        let expect: usize = s
            .steps()
            .iter()
            .map(|st| {
                let on_line = (0..cols)
                    .flat_map(|c| (0..rows).map(move |r| (c, r)))
                    .filter(|&(c, r)| dirs[st.proj_index].bin_index(c, r) == st.bin_index)
                    .count();
                on_line - 1
            })
            .sum();
        assert_eq!(s.xor_count(), expect);
        assert!(s.xor_count() <= cols * rows * (dirs.len() - 1));
        // every step reads its own bin
        assert_eq!(s.referenced_bins().len(), cols * rows);
    }
}
