//! Minimal PGM (P2 ASCII / P5 binary, 8-bit) image I/O.
//!
//! Pixels are stored as values in `[0, 1]` (`v / maxval`). Images convert to
//! signal vectors column-major: pixel `(row q, col l)` lands at `l * rows + q`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{BenchError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub rows: usize,
    pub cols: usize,
    /// Row-major pixel values in `[0, 1]`.
    pub pixels: Vec<f64>,
}

impl Image {
    pub fn from_vector(x: &[f64], rows: usize, cols: usize) -> Result<Self> {
        if x.len() != rows * cols {
            return Err(BenchError::LengthMismatch(x.len(), rows * cols));
        }
        let mut pixels = vec![0.0; x.len()];
        for l in 0..cols {
            for q in 0..rows {
                pixels[q * cols + l] = x[l * rows + q];
            }
        }
        Ok(Image { rows, cols, pixels })
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.pixels.len()];
        for q in 0..self.rows {
            for l in 0..self.cols {
                x[l * self.rows + q] = self.pixels[q * self.cols + l];
            }
        }
        x
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::decode(&fs::read(path)?)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let magic = next_token(bytes, &mut pos)?;
        let binary = match magic.as_str() {
            "P2" => false,
            "P5" => true,
            other => return Err(BenchError::Pgm(format!("unsupported magic {other:?}"))),
        };
        let cols = parse_header_int(bytes, &mut pos, "width")?;
        let rows = parse_header_int(bytes, &mut pos, "height")?;
        let maxval = parse_header_int(bytes, &mut pos, "maxval")?;
        if maxval == 0 || maxval > 255 {
            return Err(BenchError::Pgm(format!("maxval {maxval} outside 1..=255")));
        }
        let count = rows * cols;
        let raw: Vec<usize> = if binary {
            // Exactly one whitespace byte separates the header from the raster.
            pos += 1;
            let data = bytes
                .get(pos..pos + count)
                .ok_or_else(|| BenchError::Pgm("truncated raster".into()))?;
            data.iter().map(|b| *b as usize).collect()
        } else {
            (0..count)
                .map(|_| parse_header_int(bytes, &mut pos, "pixel"))
                .collect::<Result<_>>()?
        };
        if let Some(v) = raw.iter().find(|v| **v > maxval) {
            return Err(BenchError::Pgm(format!("pixel {v} exceeds maxval {maxval}")));
        }
        Ok(Image {
            rows,
            cols,
            pixels: raw.into_iter().map(|v| v as f64 / maxval as f64).collect(),
        })
    }

    /// 8-bit quantization of the pixels, clamped to `[0, 1]`.
    fn quantized(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect()
    }

    pub fn encode_p5(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.cols, self.rows).into_bytes();
        out.extend(self.quantized());
        out
    }

    pub fn encode_p2(&self) -> Vec<u8> {
        let mut out = format!("P2\n{} {}\n255\n", self.cols, self.rows);
        for row in self.quantized().chunks(self.cols.max(1)) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out.into_bytes()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.encode_p5())?;
        Ok(())
    }
}

fn skip_space_and_comments(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() {
        match bytes[*pos] {
            b'#' => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            c if c.is_ascii_whitespace() => *pos += 1,
            _ => break,
        }
    }
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
    skip_space_and_comments(bytes, pos);
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(BenchError::Pgm("unexpected end of file".into()));
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn parse_header_int(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)?;
    tok.parse()
        .map_err(|_| BenchError::Pgm(format!("invalid {what} {tok:?}")))
}
