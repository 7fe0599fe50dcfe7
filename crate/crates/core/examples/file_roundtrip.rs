//! Write projection files, lose two of them, verify and rebuild.
//!
//! ```bash
//! cargo run --example file_roundtrip
//! ```

use std::fs;

use mojette::cli::{cmd_decode, cmd_encode, cmd_verify};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let input = dir.path().join("notes.txt");
    let text = "the quick brown fox jumps over the lazy dog\n".repeat(200);
    fs::write(&input, &text)?;

    let summary = cmd_encode(&input, &dir.path().join("shards"), 6, 4, 16)?;
    println!("{summary}");

    fs::remove_file(&summary.files[0])?;
    fs::remove_file(&summary.files[3])?;
    println!("{}", cmd_verify(&summary.files)?);

    let survivors: Vec<_> = summary.files.iter().filter(|p| p.exists()).cloned().collect();
    let output = dir.path().join("restored.txt");
    let len = cmd_decode(&survivors, &output)?;
    assert_eq!(fs::read_to_string(&output)?, text);
    println!("restored {len} bytes");
    Ok(())
}
