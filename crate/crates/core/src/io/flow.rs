//! Two-channel vector fields: an ASCII line `FLO2 <w> <h>` followed by
//! w·h pairs of little-endian f32, u then v per pixel, row-major.

use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::window::MultiChannelImage;

fn malformed(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        format: "FLO2",
        offset: offset as u64,
        message: message.into(),
    }
}

pub fn decode_flow(bytes: &[u8]) -> Result<MultiChannelImage> {
    let eol = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| malformed(bytes.len(), "missing header line"))?;
    let line = std::str::from_utf8(&bytes[..eol]).map_err(|_| malformed(0, "header is not ASCII"))?;
    let fields: Vec<&str> = line.split(' ').collect();
    let [magic, w, h] = fields[..] else {
        return Err(malformed(0, format!("expected `FLO2 <w> <h>`, got {line:?}")));
    };
    if magic != "FLO2" {
        return Err(malformed(0, "expected magic FLO2"));
    }
    let dim = |s: &str| s.parse::<usize>().ok().filter(|&v| v > 0);
    let (Some(w), Some(h)) = (dim(w), dim(h)) else {
        return Err(malformed(5, "dimensions must be positive integers"));
    };
    let count = w
        .checked_mul(h)
        .and_then(|p| p.checked_mul(2))
        .ok_or_else(|| malformed(5, "dimensions overflow"))?;
    let payload = &bytes[eol + 1..];
    if payload.len() != count * 4 {
        return Err(malformed(
            eol + 1 + payload.len().min(count * 4),
            format!("payload holds {} bytes, header declares {}", payload.len(), count * 4),
        ));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    MultiChannelImage::new(&[w, h], 2, 1.0, data)
}

/// Samples are narrowed to f32.
pub fn encode_flow(img: &MultiChannelImage) -> Result<Vec<u8>> {
    if img.channels() != 2 || img.dims() != 2 {
        return Err(invalid("flow files hold planar two-channel fields"));
    }
    let ext = img.extent();
    let mut out = format!("FLO2 {} {}\n", ext[0], ext[1]).into_bytes();
    for v in img.data() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn read_flow(path: impl AsRef<Path>) -> Result<MultiChannelImage> {
    decode_flow(&std::fs::read(path)?)
}

pub fn write_flow(path: impl AsRef<Path>, img: &MultiChannelImage) -> Result<()> {
    std::fs::write(path, encode_flow(img)?)?;
    Ok(())
}
