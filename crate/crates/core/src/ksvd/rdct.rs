//! `RDCT` dictionary files.
//!
//! Layout (all little-endian):
//!
//! | offset | size      | field                                 |
//! |--------|-----------|---------------------------------------|
//! | 0      | 4         | magic `b"RDCT"`                       |
//! | 4      | 4         | version, `u32` = 1                    |
//! | 8      | 4         | `n`, `u32`                            |
//! | 12     | 4         | `K`, `u32`                            |
//! | 16     | `8·n·K`   | atoms as `f64`, column-major          |

use nalgebra::DMatrix;

use crate::coder::Dictionary;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"RDCT";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

pub fn write_dictionary(dict: &Dictionary) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * dict.dim() * dict.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(dict.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(dict.len() as u32).to_le_bytes());
    // nalgebra storage is already column-major.
    for v in dict.atoms().as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

pub fn read_dictionary(bytes: &[u8]) -> Result<Dictionary> {
    if bytes.len() < HEADER_LEN {
        if !MAGIC.starts_with(&bytes[..bytes.len().min(4)]) {
            return Err(Error::parse(0, "bad magic, expected RDCT"));
        }
        return Err(Error::parse(bytes.len(), "header truncated"));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::parse(0, "bad magic, expected RDCT"));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::parse(4, format!("unsupported version {version}")));
    }
    let n = u32_at(bytes, 8) as usize;
    let k = u32_at(bytes, 12) as usize;
    if n == 0 {
        return Err(Error::parse(8, "n must be positive"));
    }
    if k == 0 {
        return Err(Error::parse(12, "K must be positive"));
    }
    let count = n
        .checked_mul(k)
        .filter(|c| c.checked_mul(8).is_some())
        .ok_or_else(|| Error::parse(8, "dimensions overflow"))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() < count * 8 {
        return Err(Error::Truncated {
            expected: count,
            found: payload.len() / 8,
        });
    }
    if payload.len() > count * 8 {
        return Err(Error::parse(
            HEADER_LEN + count * 8,
            "trailing bytes after atoms",
        ));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let atoms = DMatrix::from_vec(n, k, values);
    Dictionary::new(atoms).map_err(|e| match e {
        Error::Contract(msg) => Error::parse(HEADER_LEN, msg),
        other => other,
    })
}
