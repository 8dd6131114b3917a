//! Dual watermark pipeline on 8x8 blocks: a robust bit per block via
//! quantization index modulation of one moment coefficient, plus a fragile
//! per-block signature in the pixel LSBs for tamper localization.

use crate::chaos::{chaotic_permutation, scramble, unscramble, ChaosKey};
use crate::error::Error;
use crate::img::MultiImage;
use crate::moments::MomentBasis;
use crate::numerics::round_half_away;
use crate::qim::{qim_embed, qim_extract};
use crate::zigzag::{inverse_zigzag, zigzag, zigzag_indices};
use alloc::vec;
use alloc::vec::Vec;
use sha2::{Digest, Sha256};

/// Side of the square processing blocks.
pub const BLOCK: usize = 8;
/// Side of the square binary watermark.
pub const WM_SIDE: usize = 64;
/// Number of robust watermark bits (one per block).
pub const WM_BITS: usize = WM_SIDE * WM_SIDE;
/// Pixels per block carrying the fragile signature (leading zigzag slots).
pub const FRAGILE_SLOTS: usize = 16;

/// Which channels carry the robust payload. The fragile signature always
/// covers every channel.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChannelPolicy {
    /// Third channel only (blue for RGB; the last one if fewer).
    Blue,
    /// Every channel, majority vote on extraction (ties decode to 0).
    All,
}

/// Everything the embedder and extractor share.
pub struct WatermarkParams<'a> {
    pub basis: &'a MomentBasis,
    pub key: ChaosKey,
    /// Secret seed of the fragile block signature.
    pub kappa: &'a [u8],
    /// Quantization step of the robust lattice.
    pub delta: f64,
    /// Zigzag slot of the carrier coefficient.
    pub coeff_index: usize,
    pub policy: ChannelPolicy,
}

/// Extraction output: recovered bits, authenticity verdict, and the
/// per-block tamper map (row-major, 1 = signature check failed).
pub struct ExtractReport {
    pub bits: Vec<u8>,
    pub authentic: bool,
    pub tamper_map: Vec<u8>,
    pub map_w: usize,
    pub map_h: usize,
}

/// 16-bit block signature: leading two bytes of SHA-256 of the secret,
/// MSB first.
fn fragile_signature(kappa: &[u8]) -> [u8; FRAGILE_SLOTS] {
    let digest = Sha256::digest(kappa);
    let sig = ((digest[0] as u16) << 8) | digest[1] as u16;
    let mut bits = [0u8; FRAGILE_SLOTS];
    for (i, b) in bits.iter_mut().enumerate() {
        *b = ((sig >> (15 - i)) & 1) as u8;
    }
    bits
}

fn robust_channels(policy: ChannelPolicy, num_channels: usize) -> Vec<usize> {
    match policy {
        ChannelPolicy::Blue => vec![2.min(num_channels - 1)],
        ChannelPolicy::All => (0..num_channels).collect(),
    }
}

struct BlockLayout {
    bx: usize,
    by: usize,
    total: usize,
}

fn check_geometry(img: &MultiImage, p: &WatermarkParams) -> Result<BlockLayout, Error> {
    let (w, h) = (img.width(), img.height());
    if w % BLOCK != 0 || h % BLOCK != 0 {
        return Err(Error::BlockAlignment {
            width: w,
            height: h,
        });
    }
    let bx = w / BLOCK;
    let by = h / BLOCK;
    let total = bx * by;
    if total < WM_BITS {
        return Err(Error::Capacity {
            needed: WM_BITS,
            available: total,
        });
    }
    if p.basis.size() != BLOCK {
        return Err(Error::DimensionMismatch {
            expected: BLOCK,
            got: p.basis.size(),
        });
    }
    if !(p.delta > 0.0) || !p.delta.is_finite() {
        return Err(Error::InvalidParams("quantization step must be positive"));
    }
    if p.coeff_index >= BLOCK * BLOCK {
        return Err(Error::InvalidParams("carrier slot outside the block"));
    }
    Ok(BlockLayout { bx, by, total })
}

fn read_block(plane: &[u8], width: usize, bxi: usize, byi: usize) -> Vec<f64> {
    let mut blk = Vec::with_capacity(BLOCK * BLOCK);
    for r in 0..BLOCK {
        let row = (byi * BLOCK + r) * width + bxi * BLOCK;
        for c in 0..BLOCK {
            blk.push(plane[row + c] as f64);
        }
    }
    blk
}

/// Embed 4096 scrambled robust bits and the fragile signature; returns the
/// watermarked image. The robust payload lands in the first 4096 blocks in
/// raster order of the channels selected by the policy; all other samples
/// pass through unchanged (up to LSB stamping).
pub fn embed(cover: &MultiImage, bits: &[u8], p: &WatermarkParams) -> Result<MultiImage, Error> {
    let layout = check_geometry(cover, p)?;
    if bits.len() != WM_BITS {
        return Err(Error::DimensionMismatch {
            expected: WM_BITS,
            got: bits.len(),
        });
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::InvalidParams("watermark bits must be 0 or 1"));
    }
    let perm = chaotic_permutation(&p.key, WM_BITS)?;
    let scrambled = scramble(bits, &perm);
    let sig = fragile_signature(p.kappa);
    let zz = zigzag_indices(BLOCK);
    let robust = robust_channels(p.policy, cover.num_channels());

    let mut out = cover.clone();
    let width = cover.width();
    for ch in 0..cover.num_channels() {
        let is_robust = robust.contains(&ch);
        for b in 0..layout.total {
            let (bxi, byi) = (b % layout.bx, b / layout.bx);
            let mut blk = read_block(cover.plane(ch), width, bxi, byi);
            if is_robust && b < WM_BITS {
                let m = p.basis.direct_moments(&blk)?;
                let mut zv = zigzag(&m, BLOCK);
                zv[p.coeff_index] = qim_embed(zv[p.coeff_index], scrambled[b], p.delta);
                blk = p.basis.inverse_moments(&inverse_zigzag(&zv, BLOCK))?;
            }
            let plane = out.plane_mut(ch);
            for r in 0..BLOCK {
                let row = (byi * BLOCK + r) * width + bxi * BLOCK;
                for c in 0..BLOCK {
                    let v = round_half_away(blk[r * BLOCK + c]).clamp(0.0, 255.0);
                    plane[row + c] = v as u8;
                }
            }
            for (slot, &(r, c)) in zz[..FRAGILE_SLOTS].iter().enumerate() {
                let idx = (byi * BLOCK + r) * width + bxi * BLOCK + c;
                plane[idx] = (plane[idx] & !1) | sig[slot];
            }
        }
    }
    Ok(out)
}

/// Recover the robust bits, check every block's fragile signature, and
/// report the tamper map. The whole image is always scanned.
pub fn extract(img: &MultiImage, p: &WatermarkParams) -> Result<ExtractReport, Error> {
    let layout = check_geometry(img, p)?;
    let perm = chaotic_permutation(&p.key, WM_BITS)?;
    let sig = fragile_signature(p.kappa);
    let zz = zigzag_indices(BLOCK);
    let robust = robust_channels(p.policy, img.num_channels());
    let width = img.width();

    let mut tamper = vec![0u8; layout.total];
    for ch in 0..img.num_channels() {
        let plane = img.plane(ch);
        for b in 0..layout.total {
            let (bxi, byi) = (b % layout.bx, b / layout.bx);
            for (slot, &(r, c)) in zz[..FRAGILE_SLOTS].iter().enumerate() {
                let idx = (byi * BLOCK + r) * width + bxi * BLOCK + c;
                if plane[idx] & 1 != sig[slot] {
                    tamper[b] = 1;
                    break;
                }
            }
        }
    }
    let authentic = tamper.iter().all(|&t| t == 0);

    let mut ones = vec![0usize; WM_BITS];
    for &ch in &robust {
        let plane = img.plane(ch);
        for b in 0..WM_BITS {
            let (bxi, byi) = (b % layout.bx, b / layout.bx);
            let blk = read_block(plane, width, bxi, byi);
            let m = p.basis.direct_moments(&blk)?;
            let zv = zigzag(&m, BLOCK);
            ones[b] += qim_extract(zv[p.coeff_index], p.delta) as usize;
        }
    }
    let scrambled: Vec<u8> = ones
        .iter()
        .map(|&o| if 2 * o > robust.len() { 1 } else { 0 })
        .collect();
    let bits = unscramble(&scrambled, &perm);

    Ok(ExtractReport {
        bits,
        authentic,
        tamper_map: tamper,
        map_w: layout.bx,
        map_h: layout.by,
    })
}
