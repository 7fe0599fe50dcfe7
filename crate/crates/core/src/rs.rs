//! Systematic Vandermonde Reed-Solomon over GF(2^8).
//!
//! Scalar, table-driven arithmetic: one log/exp lookup pair per byte
//! multiply. This is the reference competitor for the Mojette code.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::xor::xor_into;

/// Field polynomial x^8 + x^4 + x^3 + x^2 + 1.
pub const POLYNOMIAL: u16 = 0x11D;

/// Log and anti-log tables for generator 2.
#[derive(Debug, Clone)]
pub struct GfTables {
    /// `log[0]` is unused.
    pub log: [u8; 256],
    /// Doubled so `exp[log a + log b]` needs no reduction.
    pub exp: [u8; 510],
}

impl GfTables {
    const fn build() -> Self {
        let mut log = [0u8; 256];
        let mut exp = [0u8; 510];
        let mut x: u16 = 1;
        let mut i = 0;
        while i < 255 {
            exp[i] = x as u8;
            exp[i + 255] = x as u8;
            log[x as usize] = i as u8;
            x <<= 1;
            if x & 0x100 != 0 {
                x ^= POLYNOMIAL;
            }
            i += 1;
        }
        GfTables { log, exp }
    }
}

pub static TABLES: GfTables = GfTables::build();

#[inline]
pub fn gf_mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    TABLES.exp[TABLES.log[a as usize] as usize + TABLES.log[b as usize] as usize]
}

/// Multiplicative inverse; `a` must be non-zero.
pub fn gf_inv(a: u8) -> u8 {
    assert_ne!(a, 0, "zero has no inverse");
    TABLES.exp[255 - TABLES.log[a as usize] as usize]
}

pub fn gf_pow(a: u8, e: usize) -> u8 {
    if e == 0 {
        return 1;
    }
    if a == 0 {
        return 0;
    }
    TABLES.exp[(TABLES.log[a as usize] as usize * e) % 255]
}

/// `dst ^= c · src`, byte by byte.
fn mul_add(dst: &mut [u8], src: &[u8], c: u8) {
    match c {
        0 => {}
        1 => xor_into(dst, src),
        _ => {
            let lc = TABLES.log[c as usize] as usize;
            for (d, &s) in dst.iter_mut().zip(src) {
                if s != 0 {
                    *d ^= TABLES.exp[lc + TABLES.log[s as usize] as usize];
                }
            }
        }
    }
}

type Matrix = Vec<Vec<u8>>;

/// Inverts a square matrix by Gauss-Jordan elimination.
fn invert(mut m: Matrix) -> Result<Matrix> {
    let n = m.len();
    let mut inv: Matrix = (0..n).map(|i| (0..n).map(|j| (i == j) as u8).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| m[r][col] != 0).ok_or(Error::SingularMatrix)?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = gf_inv(m[col][col]);
        for j in 0..n {
            m[col][j] = gf_mul(m[col][j], scale);
            inv[col][j] = gf_mul(inv[col][j], scale);
        }
        for r in 0..n {
            let f = m[r][col];
            if r != col && f != 0 {
                for j in 0..n {
                    m[r][j] ^= gf_mul(f, m[col][j]);
                    inv[r][j] ^= gf_mul(f, inv[col][j]);
                }
            }
        }
    }
    Ok(inv)
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| row.iter().zip(b).fold(0, |acc, (&x, brow)| acc ^ gf_mul(x, brow[j])))
                .collect()
        })
        .collect()
}

/// `n × k` generator matrix whose top `k × k` block is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsMatrix {
    n: usize,
    k: usize,
    rows: Matrix,
}

/// Above this many `k`-subsets the MDS check is skipped.
const MDS_CHECK_LIMIT: usize = 10_000;

impl RsMatrix {
    /// Systematic form of the Vandermonde matrix `V[i][j] = i^j`: `V·T⁻¹`
    /// where `T` is its top `k × k` block. Every `k × k` submatrix is
    /// checked for invertibility when there are at most 10 000 of them.
    pub fn vandermonde(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n || n > 256 {
            return Err(Error::InvalidParams(format!("need 1 <= k <= n <= 256, got n={n} k={k}")));
        }
        let v: Matrix = (0..n).map(|i| (0..k).map(|j| gf_pow(i as u8, j)).collect()).collect();
        let top_inv = invert(v[..k].to_vec())?;
        let rows = mat_mul(&v, &top_inv);
        let matrix = RsMatrix { n, k, rows };
        let subsets = (0..k.min(n - k)).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1));
        if subsets <= MDS_CHECK_LIMIT {
            for subset in (0..n).combinations(k) {
                matrix.submatrix(&subset).map(invert).transpose()?;
            }
        }
        Ok(matrix)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.rows[i]
    }

    fn submatrix(&self, indices: &[usize]) -> Option<Matrix> {
        indices.iter().map(|&i| self.rows.get(i).cloned()).collect()
    }
}

fn check_lengths<'a>(packets: impl IntoIterator<Item = &'a [u8]>) -> Result<usize> {
    let mut len = None;
    for p in packets {
        match len {
            None => len = Some(p.len()),
            Some(l) if l != p.len() => {
                return Err(Error::LengthMismatch {
                    expected: l,
                    actual: p.len(),
                })
            }
            _ => {}
        }
    }
    Ok(len.unwrap_or(0))
}

/// Writes the `n - k` parity packets for `data` into `parity`.
pub fn encode_parity_into<P: AsRef<[u8]>>(data: &[P], matrix: &RsMatrix, parity: &mut [Vec<u8>]) -> Result<()> {
    if data.len() != matrix.k || parity.len() != matrix.n - matrix.k {
        return Err(Error::InvalidParams(format!(
            "expected {} data and {} parity packets, got {} and {}",
            matrix.k,
            matrix.n - matrix.k,
            data.len(),
            parity.len()
        )));
    }
    let len = check_lengths(data.iter().map(AsRef::as_ref))?;
    for (out, row) in parity.iter_mut().zip(&matrix.rows[matrix.k..]) {
        if out.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                actual: out.len(),
            });
        }
        out.fill(0);
        for (src, &c) in data.iter().zip(row) {
            mul_add(out, src.as_ref(), c);
        }
    }
    Ok(())
}

/// Encodes `k` equal-length packets into `n`; the first `k` are the input.
pub fn rs_encode(data: &[&[u8]], matrix: &RsMatrix) -> Result<Vec<Vec<u8>>> {
    let len = check_lengths(data.iter().copied())?;
    let mut parity = vec![vec![0u8; len]; matrix.n - matrix.k];
    encode_parity_into(data, matrix, &mut parity)?;
    let mut out: Vec<Vec<u8>> = data.iter().map(|d| d.to_vec()).collect();
    out.extend(parity);
    Ok(out)
}

/// Decoder for one fixed set of `k` surviving packet indices. The
/// submatrix inversion happens once, in [`RsDecoder::new`].
#[derive(Debug, Clone)]
pub struct RsDecoder {
    k: usize,
    survivors: Vec<usize>,
    recipe: Vec<Source>,
}

#[derive(Debug, Clone)]
enum Source {
    /// Copy the survivor at this position.
    Survivor(usize),
    /// Combine all survivors with these coefficients.
    Combine(Vec<u8>),
}

impl RsDecoder {
    pub fn new(matrix: &RsMatrix, survivors: &[usize]) -> Result<Self> {
        let k = matrix.k;
        if survivors.len() != k || survivors.iter().any(|&i| i >= matrix.n) || !survivors.iter().all_unique() {
            return Err(Error::InvalidParams(format!(
                "need {k} distinct packet indices below {}, got {survivors:?}",
                matrix.n
            )));
        }
        let missing = (0..k).any(|d| !survivors.contains(&d));
        let inverse = if missing {
            Some(invert(matrix.submatrix(survivors).expect("indices checked"))?)
        } else {
            None
        };
        let recipe = (0..k)
            .map(|d| match survivors.iter().position(|&s| s == d) {
                Some(pos) => Source::Survivor(pos),
                None => Source::Combine(inverse.as_ref().expect("missing data implies inverse")[d].clone()),
            })
            .collect();
        Ok(RsDecoder {
            k,
            survivors: survivors.to_vec(),
            recipe,
        })
    }

    pub fn survivors(&self) -> &[usize] {
        &self.survivors
    }

    /// True when every data packet survived and decoding is a copy.
    pub fn is_copy(&self) -> bool {
        self.recipe.iter().all(|r| matches!(r, Source::Survivor(_)))
    }

    /// `packets[i]` is the packet at index `survivors()[i]`.
    pub fn decode_into<P: AsRef<[u8]>>(&self, packets: &[P], out: &mut [Vec<u8>]) -> Result<()> {
        if packets.len() != self.k || out.len() != self.k {
            return Err(Error::InvalidParams(format!("expected {} packets", self.k)));
        }
        let len = check_lengths(packets.iter().map(AsRef::as_ref))?;
        for (dst, recipe) in out.iter_mut().zip(&self.recipe) {
            if dst.len() != len {
                return Err(Error::LengthMismatch {
                    expected: len,
                    actual: dst.len(),
                });
            }
            match recipe {
                Source::Survivor(pos) => dst.copy_from_slice(packets[*pos].as_ref()),
                Source::Combine(coeffs) => {
                    dst.fill(0);
                    for (src, &c) in packets.iter().zip(coeffs) {
                        mul_add(dst, src.as_ref(), c);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Recovers the `k` data packets from any `k` survivors `(index, packet)`.
pub fn rs_decode(packets: &[(usize, &[u8])], matrix: &RsMatrix) -> Result<Vec<Vec<u8>>> {
    let used: Vec<(usize, &[u8])> = packets.iter().copied().take(matrix.k).collect();
    if used.len() < matrix.k {
        return Err(Error::NotEnoughProjections {
            got: used.len(),
            need: matrix.k,
        });
    }
    let indices: Vec<usize> = used.iter().map(|p| p.0).collect();
    let decoder = RsDecoder::new(matrix, &indices)?;
    let bufs: Vec<&[u8]> = used.iter().map(|p| p.1).collect();
    let len = check_lengths(bufs.iter().copied())?;
    let mut out = vec![vec![0u8; len]; matrix.k];
    decoder.decode_into(&bufs, &mut out)?;
    Ok(out)
}
