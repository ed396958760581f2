//! Binary PGM (P5) and PPM (P6) with maxval 255.
//!
//! Samples are scaled to [0, 1] on read and quantised on write, so 8-bit
//! data round-trips exactly. Row 0 of the file is y = 0.

use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::window::MultiChannelImage;

fn malformed(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        format: "PNM",
        offset: offset as u64,
        message: message.into(),
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(malformed(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed(start, format!("{what} out of range")))
    }
}

/// Parses a P5 or P6 byte stream.
pub fn decode_pnm(bytes: &[u8]) -> Result<MultiChannelImage> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(malformed(0, "expected magic number P5 or P6")),
    };
    let mut hd = Header { bytes, pos: 2 };
    let width = hd.number("width")?;
    let height = hd.number("height")?;
    hd.skip_space();
    let maxval_at = hd.pos;
    let maxval = hd.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(malformed(maxval_at, "image dimensions must be positive"));
    }
    if maxval != 255 {
        return Err(malformed(maxval_at, format!("unsupported maxval {maxval}, only 255 is read")));
    }
    match bytes.get(hd.pos) {
        Some(b) if b.is_ascii_whitespace() => hd.pos += 1,
        _ => return Err(malformed(hd.pos, "expected whitespace after maxval")),
    }
    let need = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(channels))
        .ok_or_else(|| malformed(2, "image dimensions overflow"))?;
    let payload = &bytes[hd.pos..];
    if payload.len() < need {
        return Err(malformed(
            bytes.len(),
            format!("truncated payload, {} of {need} sample bytes present", payload.len()),
        ));
    }
    let data = payload[..need].iter().map(|&b| b as f64 / 255.0).collect();
    MultiChannelImage::new(&[width, height], channels, 1.0, data)
}

/// Encodes a planar 1- or 3-channel image; samples are clamped to [0, 1].
pub fn encode_pnm(img: &MultiChannelImage) -> Result<Vec<u8>> {
    let magic = match img.channels() {
        1 => "P5",
        3 => "P6",
        c => return Err(invalid(format!("PNM stores 1 or 3 channels, image has {c}"))),
    };
    if img.dims() != 2 {
        return Err(invalid("PNM stores planar images only"));
    }
    let ext = img.extent();
    let mut out = format!("{magic}\n{} {}\n255\n", ext[0], ext[1]).into_bytes();
    out.extend(img.data().iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    Ok(out)
}

pub fn read_image(path: impl AsRef<Path>) -> Result<MultiChannelImage> {
    decode_pnm(&std::fs::read(path)?)
}

pub fn write_image(path: impl AsRef<Path>, img: &MultiChannelImage) -> Result<()> {
    std::fs::write(path, encode_pnm(img)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn offset_of(e: Error) -> u64 {
        match e {
            Error::Format { offset, .. } => offset,
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn colour_round_trip() {
        let data: Vec<f64> = (0..12).map(|i| (i * 21) as f64 / 255.0).collect();
        let img = MultiChannelImage::new(&[2, 2], 3, 1.0, data).unwrap();
        let bytes = encode_pnm(&img).unwrap();
        assert!(bytes.starts_with(b"P6\n2 2\n255\n"));
        assert_eq!(decode_pnm(&bytes).unwrap(), img);
    }

    #[test]
    fn grey_with_comments() {
        let bytes = b"P5 # grey\n3 # w\n1\n255\n\x00\x80\xff";
        let img = decode_pnm(bytes).unwrap();
        assert_eq!(img.channels(), 1);
        assert_eq!(img.extent(), &[3, 1]);
        assert_eq!(img.data(), &[0.0, 128.0 / 255.0, 1.0]);
    }

    #[test]
    fn truncated_payload_names_offset() {
        let bytes = b"P6\n2 2\n255\n\x01\x02\x03";
        let e = decode_pnm(bytes).unwrap_err();
        assert!(e.to_string().contains("byte 14"), "{e}");
        assert_eq!(offset_of(e), 14);
    }

    #[test]
    fn header_errors() {
        assert_eq!(offset_of(decode_pnm(b"P3\n1 1\n255\n\x00").unwrap_err()), 0);
        assert_eq!(offset_of(decode_pnm(b"P5\n1 1\n65535\n\x00\x00").unwrap_err()), 7);
        assert_eq!(offset_of(decode_pnm(b"P5\nx 1\n255\n\x00").unwrap_err()), 3);
        assert!(decode_pnm(b"P5\n0 1\n255\n").is_err());
    }

    #[test]
    fn writer_quantises_and_rejects_two_channels() {
        let img = MultiChannelImage::new(&[2, 1], 1, 1.0, vec![-0.5, 1.7]).unwrap();
        assert!(encode_pnm(&img).unwrap().ends_with(&[0, 255]));
        let two = MultiChannelImage::filled(&[1, 1], 1.0, &[0.0, 0.0]).unwrap();
        assert!(encode_pnm(&two).is_err());
    }
}
