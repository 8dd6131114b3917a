//! File I/O between on-disk image formats and the in-memory plane
//! representation, plus the 64x64 watermark bitmap formats.
//!
//! Covers and marked images move through PNG or BMP only (both lossless);
//! the output format mirrors the input extension. Watermark bitmaps accept
//! PBM (P4), packed raw bits, or any readable image where dark pixels are
//! ones.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use sobomark_core::MultiImage;

/// Load a cover or marked image. Grayscale sources become one plane, color
/// sources three (alpha is dropped; 16-bit depth is narrowed to 8).
pub fn load_image(path: &Path) -> Result<MultiImage> {
    let dynimg = image::open(path).with_context(|| format!("reading {}", path.display()))?;
    let (w, h) = (dynimg.width() as usize, dynimg.height() as usize);
    let planes = match dynimg {
        DynamicImage::ImageLuma8(g) => {
            vec![g.into_raw()]
        }
        DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLuma16(_) => {
            vec![dynimg.to_luma8().into_raw()]
        }
        other => {
            let rgb = other.to_rgb8();
            let mut planes = vec![Vec::with_capacity(w * h); 3];
            for px in rgb.pixels() {
                for c in 0..3 {
                    planes[c].push(px.0[c]);
                }
            }
            // Formats without a grayscale encoding (BMP) hand gray content
            // back as RGB; collapse it so round trips keep one plane.
            if planes[0] == planes[1] && planes[1] == planes[2] {
                planes.truncate(1);
            }
            planes
        }
    };
    MultiImage::from_planes(w, h, planes).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

/// Save to PNG or BMP according to the target extension.
pub fn save_image(img: &MultiImage, path: &Path) -> Result<()> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    if ext != "png" && ext != "bmp" {
        bail!(
            "{}: images are written as .png or .bmp only",
            path.display()
        );
    }
    let (w, h) = (img.width() as u32, img.height() as u32);
    match img.num_channels() {
        1 => {
            let buf: ImageBuffer<Luma<u8>, _> =
                ImageBuffer::from_raw(w, h, img.plane(0).to_vec()).expect("plane size");
            buf.save(path)
                .with_context(|| format!("writing {}", path.display()))
        }
        3 => {
            let mut raw = Vec::with_capacity(img.width() * img.height() * 3);
            for i in 0..img.width() * img.height() {
                for c in 0..3 {
                    raw.push(img.plane(c)[i]);
                }
            }
            let buf: ImageBuffer<Rgb<u8>, _> =
                ImageBuffer::from_raw(w, h, raw).expect("plane size");
            buf.save(path)
                .with_context(|| format!("writing {}", path.display()))
        }
        n => bail!("cannot save {n}-channel image"),
    }
}

fn unpack_bits(packed: &[u8], count: usize) -> Vec<u8> {
    let mut bits = Vec::with_capacity(count);
    for i in 0..count {
        bits.push((packed[i / 8] >> (7 - i % 8)) & 1);
    }
    bits
}

fn pack_bits(bits: &[u8]) -> Vec<u8> {
    let mut packed = vec![0u8; (bits.len() + 7) / 8];
    for (i, &b) in bits.iter().enumerate() {
        if b & 1 == 1 {
            packed[i / 8] |= 1 << (7 - i % 8);
        }
    }
    packed
}

fn parse_pbm(data: &[u8], path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    // P4 header: magic, whitespace/comments, width, height, single
    // whitespace byte, then packed rows each padded to a byte boundary.
    let mut pos = 2; // past "P4"
    let mut fields = Vec::new();
    while fields.len() < 2 {
        while pos < data.len() && (data[pos].is_ascii_whitespace() || data[pos] == b'#') {
            if data[pos] == b'#' {
                while pos < data.len() && data[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < data.len() && data[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            bail!("{}: malformed PBM header", path.display());
        }
        fields.push(std::str::from_utf8(&data[start..pos])?.parse::<usize>()?);
    }
    pos += 1; // single whitespace after height
    let (w, h) = (fields[0], fields[1]);
    let row_bytes = (w + 7) / 8;
    if data.len() < pos + row_bytes * h {
        bail!("{}: PBM payload truncated", path.display());
    }
    let mut bits = Vec::with_capacity(w * h);
    for row in 0..h {
        let row_data = &data[pos + row * row_bytes..pos + (row + 1) * row_bytes];
        bits.extend(unpack_bits(row_data, w));
    }
    Ok((w, h, bits))
}

/// Load a watermark bitmap as 0/1 bits in row-major order.
///
/// `.pbm` is read as binary P4 (1 = ink = bit 1); `.bin` as packed bits,
/// most significant bit first, assumed square; anything else is decoded as
/// an image where luma < 128 means bit 1.
pub fn load_bits(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    if ext == "bin" {
        let data = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let bits = unpack_bits(&data, data.len() * 8);
        let side = (bits.len() as f64).sqrt() as usize;
        if side * side != bits.len() {
            bail!(
                "{}: raw watermark must be square (got {} bits)",
                path.display(),
                bits.len()
            );
        }
        return Ok((side, side, bits));
    }
    let data = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if data.starts_with(b"P4") {
        return parse_pbm(&data, path);
    }
    let img = image::load_from_memory(&data)
        .with_context(|| format!("decoding {}", path.display()))?
        .to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let bits = img.pixels().map(|p| (p.0[0] < 128) as u8).collect();
    Ok((w, h, bits))
}

/// Save 0/1 bits as a bitmap. `.pbm` writes binary P4, `.bin` packed raw
/// bits, `.png`/`.bmp` a black-on-white image (bit 1 = black).
pub fn save_bits(bits: &[u8], w: usize, h: usize, path: &Path) -> Result<()> {
    if bits.len() != w * h {
        bail!("bitmap size mismatch: {} bits for {w}x{h}", bits.len());
    }
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "pbm" => {
            let mut out = format!("P4\n{w} {h}\n").into_bytes();
            for row in bits.chunks(w) {
                out.extend(pack_bits(row));
            }
            fs::write(path, out).with_context(|| format!("writing {}", path.display()))
        }
        "bin" => fs::write(path, pack_bits(bits))
            .with_context(|| format!("writing {}", path.display())),
        "png" | "bmp" => {
            let plane: Vec<u8> = bits.iter().map(|&b| if b & 1 == 1 { 0 } else { 255 }).collect();
            let img = MultiImage::from_planes(w, h, vec![plane])
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            save_image(&img, path)
        }
        _ => bail!(
            "{}: watermark bitmaps are written as .pbm, .bin, .png, or .bmp",
            path.display()
        ),
    }
}
