//! Systematic Reed-Solomon over GF(2^8), the MDS reference point.
//!
//! ```bash
//! cargo run --example reed_solomon
//! ```

use mojette::rs::{gf_inv, gf_mul, rs_decode, rs_encode, RsMatrix};

fn main() -> mojette::Result<()> {
    println!("0x53 * 0xca = {:#04x}", gf_mul(0x53, 0xca));
    println!("inv(0x53) = {:#04x}", gf_inv(0x53));

    let (n, k) = (6, 4);
    let matrix = RsMatrix::vandermonde(n, k)?;
    for i in 0..n {
        println!("  row {i}: {:02x?}", matrix.row(i));
    }

    let data: Vec<Vec<u8>> = (0..k).map(|i| format!("packet number {i}").into_bytes()).collect();
    let refs: Vec<&[u8]> = data.iter().map(Vec::as_slice).collect();
    let packets = rs_encode(&refs, &matrix)?;

    let survivors: Vec<(usize, &[u8])> = [1, 3, 4, 5].into_iter().map(|i| (i, packets[i].as_slice())).collect();
    let back = rs_decode(&survivors, &matrix)?;
    assert_eq!(back, data);
    for packet in back {
        println!("{}", String::from_utf8_lossy(&packet));
    }
    Ok(())
}
