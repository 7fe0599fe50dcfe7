//! Exact reconstruction by peeling, and what happens when the direction set
//! cannot determine the grid.
//!
//! ```bash
//! cargo run --example reconstruction
//! ```

use mojette::{forward, inverse_iterative, katz_ok, Direction, Error, Grid, SymbolWidth};

fn main() -> mojette::Result<()> {
    let (cols, rows) = (8, 3);
    let width = SymbolWidth::new(8)?;
    let cells: Vec<u8> = (0..cols * rows * 8).map(|i| (i * 73 + 11) as u8).collect();
    let grid = Grid::from_bytes(cols, rows, width, cells)?;

    let sets: [&[(i32, i32)]; 3] = [
        &[(0, 1), (1, 1), (-1, 1)],
        &[(2, 1), (-3, 1), (5, 1)],
        &[(0, 1), (1, 1)],
    ];
    for set in sets {
        let dirs: Vec<Direction> = set.iter().map(|&(p, q)| Direction::new(p, q)).collect::<Result<_, _>>()?;
        let projs: Vec<_> = dirs.iter().map(|&d| forward(&grid, d)).collect();
        let names: Vec<String> = dirs.iter().map(|d| d.to_string()).collect();
        print!("{{{}}} katz={}: ", names.join(","), katz_ok(&dirs, cols, rows)?);
        match inverse_iterative(&projs, cols, rows) {
            Ok(back) => {
                assert_eq!(back, grid);
                println!("reconstructed exactly");
            }
            Err(Error::InsufficientProjections { remaining }) => {
                println!("stalled with {remaining} pixels unresolved");
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
