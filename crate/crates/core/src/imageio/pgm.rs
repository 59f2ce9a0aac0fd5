//! Netpbm graymap (PGM) codec: P5 binary and P2 plain, 8- and 16-bit.

use super::Image;
use crate::{Error, Result};

const MAX_MAXVAL: u32 = 65535;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    /// Skips whitespace and `#` comments (which run to end of line).
    fn skip_separators(&mut self) {
        while let Some(b) = self.peek() {
            if b == b'#' {
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Reads a decimal token, returning it with its starting offset.
    fn number(&mut self, what: &str) -> Result<(u32, usize)> {
        self.skip_separators();
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(b) = self.peek().filter(u8::is_ascii_digit) {
            value = value * 10 + u64::from(b - b'0');
            if value > u64::from(u32::MAX) {
                return Err(Error::parse(start, format!("{what} overflows")));
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Err(match self.peek() {
                None => Error::parse(start, format!("unexpected end of header reading {what}")),
                Some(b) => Error::parse(
                    start,
                    format!("expected decimal {what}, found byte 0x{b:02x}"),
                ),
            });
        }
        Ok((value as u32, start))
    }
}

/// Decodes a P5 or P2 graymap, scaling samples by `1/maxval` into `[0, 1]`.
///
/// Samples wider than 8 bits (maxval > 255) are big-endian. Color and
/// bitmap Netpbm variants are rejected.
pub fn read_pgm(bytes: &[u8]) -> Result<Image> {
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        Some([b'P', b'3' | b'6']) => {
            return Err(Error::parse(
                0,
                "color PPM input is not supported (grayscale only)",
            ))
        }
        Some(m) => {
            return Err(Error::parse(
                0,
                format!("unsupported magic {:?}", String::from_utf8_lossy(m)),
            ))
        }
        None => return Err(Error::parse(0, "stream too short for a magic number")),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur
        .peek()
        .is_some_and(|b| b.is_ascii_whitespace() || b == b'#')
    {
        return Err(Error::parse(
            2,
            "magic number must be followed by whitespace",
        ));
    }

    let (width, width_at) = cur.number("width")?;
    let (height, height_at) = cur.number("height")?;
    let (maxval, maxval_at) = cur.number("maxval")?;
    if width == 0 {
        return Err(Error::parse(width_at, "width must be positive"));
    }
    if height == 0 {
        return Err(Error::parse(height_at, "height must be positive"));
    }
    if maxval == 0 || maxval > MAX_MAXVAL {
        return Err(Error::parse(
            maxval_at,
            format!("maxval {maxval} outside 1..={MAX_MAXVAL}"),
        ));
    }
    let count = (width as usize)
        .checked_mul(height as usize)
        .ok_or_else(|| Error::parse(width_at, "image dimensions overflow"))?;
    let scale = 1.0 / f64::from(maxval);

    let raw = if binary {
        read_binary_raster(&mut cur, count, maxval)?
    } else {
        read_plain_raster(&mut cur, count, maxval)?
    };
    let data = raw.into_iter().map(|s| f64::from(s) * scale).collect();
    Image::new(width as usize, height as usize, data)
}

fn read_binary_raster(cur: &mut Cursor<'_>, count: usize, maxval: u32) -> Result<Vec<u32>> {
    // Exactly one whitespace byte separates the header from the raster.
    match cur.peek() {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => return Err(Error::parse(cur.pos, "expected whitespace after maxval")),
        None => {
            return Err(Error::Truncated {
                expected: count,
                found: 0,
            })
        }
    }
    let width = if maxval > 255 { 2 } else { 1 };
    let payload = &cur.bytes[cur.pos..];
    if payload.len() < count * width {
        return Err(Error::Truncated {
            expected: count,
            found: payload.len() / width,
        });
    }
    let samples: Vec<u32> = if width == 1 {
        payload[..count].iter().map(|&b| u32::from(b)).collect()
    } else {
        payload[..count * 2]
            .chunks_exact(2)
            .map(|c| u32::from(u16::from_be_bytes([c[0], c[1]])))
            .collect()
    };
    if let Some(i) = samples.iter().position(|&s| s > maxval) {
        return Err(Error::parse(
            cur.pos + i * width,
            format!("sample {} exceeds maxval {maxval}", samples[i]),
        ));
    }
    Ok(samples)
}

fn read_plain_raster(cur: &mut Cursor<'_>, count: usize, maxval: u32) -> Result<Vec<u32>> {
    let mut samples = Vec::with_capacity(count);
    for i in 0..count {
        cur.skip_separators();
        if cur.peek().is_none() {
            return Err(Error::Truncated {
                expected: count,
                found: i,
            });
        }
        let (s, at) = cur.number("sample")?;
        if s > maxval {
            return Err(Error::parse(
                at,
                format!("sample {s} exceeds maxval {maxval}"),
            ));
        }
        samples.push(s);
    }
    Ok(samples)
}

/// Encodes `img` as binary P5 with the given maxval.
///
/// Each sample becomes `round(clamp(v, 0, 1) · maxval)`, rounding halves away
/// from zero.
pub fn write_pgm(img: &Image, maxval: u32) -> Result<Vec<u8>> {
    if maxval == 0 || maxval > MAX_MAXVAL {
        return Err(Error::contract(format!(
            "maxval {maxval} outside 1..={MAX_MAXVAL}"
        )));
    }
    let header = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval);
    let wide = maxval > 255;
    let mut out = Vec::with_capacity(header.len() + img.data().len() * if wide { 2 } else { 1 });
    out.extend_from_slice(header.as_bytes());
    let m = f64::from(maxval);
    for &v in img.data() {
        let s = (v.clamp(0.0, 1.0) * m).round() as u16;
        if wide {
            out.extend_from_slice(&s.to_be_bytes());
        } else {
            out.push(s as u8);
        }
    }
    Ok(out)
}
