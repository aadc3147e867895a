//! Portable Float Map reader/writer.
//!
//! Header is `PF` (color) or `Pf` (grayscale), then `width height`, then the
//! scale whose sign encodes byte order (negative = little endian). Scanlines
//! are stored bottom-up. Pixel payloads round-trip bit exactly.

use super::{HdrImage, ScalarGrid};
use crate::error::{Error, Result};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum PfmImage {
    Rgb(HdrImage),
    Gray(ScalarGrid),
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::MalformedHeader("unexpected end of header".into()));
    }
    String::from_utf8(bytes[start..*pos].to_vec())
        .map_err(|_| Error::MalformedHeader("non-UTF8 header token".into()))
}

pub fn read_pfm(path: &Path) -> Result<PfmImage> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;

    let mut pos = 0;
    let magic = next_token(&bytes, &mut pos)?;
    let channels = match magic.as_str() {
        "PF" => 3,
        "Pf" => 1,
        other => {
            return Err(Error::MalformedHeader(format!(
                "bad magic {other:?}, expected PF or Pf"
            )))
        }
    };
    let width: usize = next_token(&bytes, &mut pos)?
        .parse()
        .map_err(|_| Error::MalformedHeader("bad width".into()))?;
    let height: usize = next_token(&bytes, &mut pos)?
        .parse()
        .map_err(|_| Error::MalformedHeader("bad height".into()))?;
    let scale: f64 = next_token(&bytes, &mut pos)?
        .parse()
        .map_err(|_| Error::MalformedHeader("bad scale".into()))?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader("zero dimension".into()));
    }
    // Exactly one whitespace byte separates the header from the payload.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::MalformedHeader("missing header terminator".into()));
    }
    pos += 1;

    let little_endian = scale < 0.0;
    let expected = width * height * channels * 4;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(Error::TruncatedData {
            expected,
            found: payload.len(),
        });
    }

    let mut values = Vec::with_capacity(width * height * channels);
    for chunk in payload[..expected].chunks_exact(4) {
        let raw: [u8; 4] = chunk.try_into().unwrap();
        values.push(if little_endian {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        });
    }

    // Scanlines are bottom-up on disk; flip into top-down rows.
    let row_len = width * channels;
    let mut top_down = Vec::with_capacity(values.len());
    for v in 0..height {
        let file_row = height - 1 - v;
        top_down.extend_from_slice(&values[file_row * row_len..(file_row + 1) * row_len]);
    }

    if channels == 3 {
        let pixels = top_down
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect();
        Ok(PfmImage::Rgb(HdrImage {
            width,
            height,
            pixels,
        }))
    } else {
        Ok(PfmImage::Gray(ScalarGrid {
            width,
            height,
            data: top_down,
        }))
    }
}

fn write_payload<W: Write>(
    out: &mut W,
    magic: &str,
    width: usize,
    height: usize,
    little_endian: bool,
    mut rows: impl FnMut(usize, &mut Vec<u8>),
) -> Result<()> {
    let scale = if little_endian { "-1.0" } else { "1.0" };
    write!(out, "{magic}\n{width} {height}\n{scale}\n")?;
    let mut buf = Vec::new();
    for file_row in 0..height {
        let v = height - 1 - file_row;
        buf.clear();
        rows(v, &mut buf);
        out.write_all(&buf)?;
    }
    Ok(())
}

fn push_f32(buf: &mut Vec<u8>, x: f32, little_endian: bool) {
    buf.extend_from_slice(&if little_endian {
        x.to_le_bytes()
    } else {
        x.to_be_bytes()
    });
}

pub fn write_pfm_rgb(path: &Path, img: &HdrImage, little_endian: bool) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_payload(&mut out, "PF", img.width, img.height, little_endian, |v, buf| {
        for u in 0..img.width {
            for c in img.pixels[v * img.width + u] {
                push_f32(buf, c, little_endian);
            }
        }
    })?;
    out.flush()?;
    Ok(())
}

pub fn write_pfm_gray(path: &Path, grid: &ScalarGrid, little_endian: bool) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_payload(&mut out, "Pf", grid.width, grid.height, little_endian, |v, buf| {
        for u in 0..grid.width {
            push_f32(buf, grid.data[v * grid.width + u], little_endian);
        }
    })?;
    out.flush()?;
    Ok(())
}
