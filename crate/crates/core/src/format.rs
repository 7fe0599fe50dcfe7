//! Self-describing projection files (`.mjec`).
//!
//! All integers are little-endian.
//!
//! | offset   | size | field                                        |
//! |----------|------|----------------------------------------------|
//! | 0        | 4    | magic `MJEC`                                 |
//! | 4        | 1    | version (1)                                  |
//! | 5        | 1    | flags (0)                                    |
//! | 6        | 1    | n                                            |
//! | 7        | 1    | k                                            |
//! | 8        | 2    | symbol width W                               |
//! | 10       | 1    | projection index                             |
//! | 11       | 2    | p (signed)                                   |
//! | 13       | 2    | q (1)                                        |
//! | 15       | 4    | columns P                                    |
//! | 19       | 8    | payload length in bytes                      |
//! | 27       | 2n   | p of every projection of the code (signed)   |
//! | 27+2n    | 4    | CRC-32 of bytes `0..27+2n`                   |
//! | 31+2n    | B·W  | bins                                         |
//! | 31+2n+BW | 4    | CRC-32 of the bins                           |

use thiserror::Error;

use crate::code::CodeParams;
use crate::geometry::{bin_count, Direction, SymbolWidth};
use crate::transform::Projection;

pub const MAGIC: [u8; 4] = *b"MJEC";
pub const VERSION: u8 = 1;
const FIXED_LEN: usize = 27;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("file truncated: need {needed} bytes, have {got}")]
    Truncated { needed: usize, got: usize },
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("unsupported flags {0:#04x}")]
    UnsupportedFlags(u8),
    #[error("header CRC mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    HeaderCrc { stored: u32, computed: u32 },
    #[error("payload CRC mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    PayloadCrc { stored: u32, computed: u32 },
    #[error("{0} unexpected trailing bytes")]
    TrailingBytes(usize),
    #[error("invalid header: {0}")]
    Invalid(String),
}

impl FormatError {
    pub fn is_crc(&self) -> bool {
        matches!(self, FormatError::HeaderCrc { .. } | FormatError::PayloadCrc { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionHeader {
    pub n: u8,
    pub k: u8,
    pub width: u16,
    pub proj_index: u8,
    pub p: i16,
    pub q: u16,
    pub cols: u32,
    pub payload_len: u64,
    pub dirset: Vec<i16>,
}

impl ProjectionHeader {
    pub fn for_projection(params: &CodeParams, proj_index: usize, cols: usize, payload_len: usize) -> Result<Self, FormatError> {
        let invalid = |m: String| FormatError::Invalid(m);
        let dirset = params
            .directions()
            .iter()
            .map(|d| i16::try_from(d.p()).map_err(|_| invalid(format!("p = {} does not fit 16 bits", d.p()))))
            .collect::<Result<Vec<_>, _>>()?;
        let header = ProjectionHeader {
            n: u8::try_from(params.n()).map_err(|_| invalid("n > 255".into()))?,
            k: params.k() as u8,
            width: params.width().bytes() as u16,
            proj_index: u8::try_from(proj_index).map_err(|_| invalid("index > 255".into()))?,
            p: *dirset
                .get(proj_index)
                .ok_or_else(|| invalid(format!("no projection {proj_index}")))?,
            q: 1,
            cols: u32::try_from(cols).map_err(|_| invalid("P exceeds 32 bits".into()))?,
            payload_len: payload_len as u64,
            dirset,
        };
        header.validate()?;
        Ok(header)
    }

    /// Serialized header length including its CRC.
    pub fn encoded_len(&self) -> usize {
        FIXED_LEN + 2 * self.dirset.len() + 4
    }

    pub fn direction(&self) -> Direction {
        Direction::unit(self.p as i32)
    }

    pub fn symbol_width(&self) -> SymbolWidth {
        SymbolWidth::new(self.width as usize).expect("validated header")
    }

    pub fn bin_count(&self) -> usize {
        bin_count(self.direction(), self.cols as usize, self.k as usize)
    }

    pub fn bin_bytes(&self) -> usize {
        self.bin_count() * self.width as usize
    }

    pub fn params(&self) -> CodeParams {
        let dirs = self.dirset.iter().map(|&p| Direction::unit(p as i32)).collect();
        CodeParams::with_directions(self.k as usize, self.symbol_width(), dirs).expect("validated header")
    }

    /// Fields shared by every file of one encoding.
    pub fn same_encoding(&self, other: &ProjectionHeader) -> bool {
        (self.n, self.k, self.width, self.cols, self.payload_len, &self.dirset)
            == (other.n, other.k, other.width, other.cols, other.payload_len, &other.dirset)
    }

    fn validate(&self) -> Result<(), FormatError> {
        let invalid = |m: String| Err(FormatError::Invalid(m));
        if self.dirset.len() != self.n as usize {
            return invalid(format!("{} directions for n = {}", self.dirset.len(), self.n));
        }
        if self.proj_index >= self.n {
            return invalid(format!("projection index {} >= n = {}", self.proj_index, self.n));
        }
        if self.dirset[self.proj_index as usize] != self.p {
            return invalid(format!("p = {} but direction set lists {}", self.p, self.dirset[self.proj_index as usize]));
        }
        if self.q != 1 {
            return invalid(format!("q = {} (only 1 is supported)", self.q));
        }
        if SymbolWidth::new(self.width as usize).is_err() {
            return invalid(format!("symbol width {}", self.width));
        }
        let dirs: Vec<Direction> = self.dirset.iter().map(|&p| Direction::unit(p as i32)).collect();
        let params = CodeParams::with_directions(self.k as usize, self.symbol_width(), dirs)
            .map_err(|e| FormatError::Invalid(e.to_string()))?;
        let cols = usize::try_from(self.payload_len)
            .map_err(|_| FormatError::Invalid("payload too large".into()))
            .and_then(|len| params.columns_for(len).map_err(|e| FormatError::Invalid(e.to_string())))?;
        if cols != self.cols as usize {
            return invalid(format!("P = {} but the payload needs {cols}", self.cols));
        }
        Ok(())
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        let start = out.len();
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(0);
        out.push(self.n);
        out.push(self.k);
        out.extend_from_slice(&self.width.to_le_bytes());
        out.push(self.proj_index);
        out.extend_from_slice(&self.p.to_le_bytes());
        out.extend_from_slice(&self.q.to_le_bytes());
        out.extend_from_slice(&self.cols.to_le_bytes());
        out.extend_from_slice(&self.payload_len.to_le_bytes());
        for p in &self.dirset {
            out.extend_from_slice(&p.to_le_bytes());
        }
        let crc = crc32fast::hash(&out[start..]);
        out.extend_from_slice(&crc.to_le_bytes());
    }

    /// Parses and checks a header; returns it with its encoded length.
    pub fn parse(bytes: &[u8]) -> Result<(Self, usize), FormatError> {
        need(bytes, FIXED_LEN)?;
        if bytes[..4] != MAGIC {
            return Err(FormatError::BadMagic);
        }
        let n = bytes[6];
        let end = FIXED_LEN + 2 * n as usize;
        need(bytes, end + 4)?;
        let stored = u32::from_le_bytes(bytes[end..end + 4].try_into().unwrap());
        let computed = crc32fast::hash(&bytes[..end]);
        if stored != computed {
            return Err(FormatError::HeaderCrc { stored, computed });
        }
        if bytes[4] != VERSION {
            return Err(FormatError::UnsupportedVersion(bytes[4]));
        }
        if bytes[5] != 0 {
            return Err(FormatError::UnsupportedFlags(bytes[5]));
        }
        let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
        let header = ProjectionHeader {
            n,
            k: bytes[7],
            width: u16_at(8),
            proj_index: bytes[10],
            p: u16_at(11) as i16,
            q: u16_at(13),
            cols: u32::from_le_bytes(bytes[15..19].try_into().unwrap()),
            payload_len: u64::from_le_bytes(bytes[19..27].try_into().unwrap()),
            dirset: (0..n as usize).map(|i| u16_at(FIXED_LEN + 2 * i) as i16).collect(),
        };
        header.validate()?;
        Ok((header, end + 4))
    }
}

fn need(bytes: &[u8], needed: usize) -> Result<(), FormatError> {
    if bytes.len() < needed {
        return Err(FormatError::Truncated {
            needed,
            got: bytes.len(),
        });
    }
    Ok(())
}

/// One projection as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionFile {
    pub header: ProjectionHeader,
    pub bins: Vec<u8>,
}

impl ProjectionFile {
    pub fn new(header: ProjectionHeader, bins: Vec<u8>) -> Result<Self, FormatError> {
        if bins.len() != header.bin_bytes() {
            return Err(FormatError::Invalid(format!(
                "{} bytes of bins, header implies {}",
                bins.len(),
                header.bin_bytes()
            )));
        }
        Ok(ProjectionFile { header, bins })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.header.encoded_len() + self.bins.len() + 4);
        self.header.write_to(&mut out);
        out.extend_from_slice(&self.bins);
        out.extend_from_slice(&crc32fast::hash(&self.bins).to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        let (header, at) = ProjectionHeader::parse(bytes)?;
        let end = at + header.bin_bytes();
        need(bytes, end + 4)?;
        if bytes.len() > end + 4 {
            return Err(FormatError::TrailingBytes(bytes.len() - end - 4));
        }
        let bins = &bytes[at..end];
        let stored = u32::from_le_bytes(bytes[end..end + 4].try_into().unwrap());
        let computed = crc32fast::hash(bins);
        if stored != computed {
            return Err(FormatError::PayloadCrc { stored, computed });
        }
        Ok(ProjectionFile {
            header,
            bins: bins.to_vec(),
        })
    }

    pub fn to_projection(&self) -> Projection {
        let h = &self.header;
        Projection::from_bins(h.direction(), h.cols as usize, h.k as usize, h.symbol_width(), self.bins.clone())
            .expect("bin length checked against header")
    }
}
