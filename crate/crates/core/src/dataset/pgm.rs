//! Netpbm graymap (PGM) reader and writer, plain (P2) and raw (P5).

use crate::error::{Result, SannError};

use super::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    /// ASCII decimal samples.
    Plain,
    /// Binary samples, one byte per sample when maxval < 256, else two bytes big-endian.
    Raw,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Skips whitespace and `#` comments (which run to the end of the line).
    fn skip_separators(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_separators();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(SannError::Parse(format!("expected {what} at byte {start}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|e| SannError::Parse(format!("bad {what}: {e}")))
    }
}

/// Parses a P2 or P5 graymap; pixels are divided by maxval into `[0, 1]`.
pub fn load_pgm(bytes: &[u8]) -> Result<Image> {
    let format = match bytes.get(..2) {
        Some(b"P2") => PgmFormat::Plain,
        Some(b"P5") => PgmFormat::Raw,
        Some(magic) => {
            return Err(SannError::Parse(format!(
                "unsupported magic {:?}; expected P2 or P5",
                String::from_utf8_lossy(magic)
            )))
        }
        None => return Err(SannError::Parse("file too short for a PGM header".into())),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur.bytes.get(2).is_some_and(|c| c.is_ascii_whitespace() || *c == b'#') {
        return Err(SannError::Parse("missing whitespace after magic number".into()));
    }
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(SannError::Parse(format!("maxval {maxval} outside 1..=65535")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| SannError::Parse("image dimensions overflow".into()))?;
    let scale = f64::from(maxval);

    let mut samples = Vec::with_capacity(n);
    match format {
        PgmFormat::Plain => {
            for _ in 0..n {
                let v = cur.number("sample").map_err(|_| SannError::Parse("truncated pixel data".into()))?;
                samples.push(v);
            }
        }
        PgmFormat::Raw => {
            // Exactly one whitespace byte separates maxval from the raster.
            if !cur.bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
                return Err(SannError::Parse("missing whitespace before raster".into()));
            }
            cur.pos += 1;
            let width_bytes = if maxval < 256 { 1 } else { 2 };
            let raster = &bytes[cur.pos..];
            if raster.len() < n * width_bytes {
                return Err(SannError::Parse(format!(
                    "truncated raster: {} of {} bytes",
                    raster.len(),
                    n * width_bytes
                )));
            }
            for i in 0..n {
                let v = if width_bytes == 1 {
                    u32::from(raster[i])
                } else {
                    u32::from(u16::from_be_bytes([raster[2 * i], raster[2 * i + 1]]))
                };
                samples.push(v);
            }
        }
    }
    if let Some(bad) = samples.iter().find(|&&v| v > maxval) {
        return Err(SannError::Parse(format!("sample {bad} exceeds maxval {maxval}")));
    }
    Image::new(width, height, samples.into_iter().map(|v| f64::from(v) / scale).collect())
}

/// Encodes with maxval 255; pixels are rounded to the nearest level.
pub fn write_pgm(img: &Image, format: PgmFormat) -> Vec<u8> {
    let levels: Vec<u8> = img
        .pixels()
        .iter()
        .map(|p| (p * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    match format {
        PgmFormat::Raw => {
            let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
            out.extend_from_slice(&levels);
            out
        }
        PgmFormat::Plain => {
            let mut out = format!("P2\n{} {}\n255\n", img.width(), img.height());
            for row in levels.chunks(img.width().max(1)) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}
