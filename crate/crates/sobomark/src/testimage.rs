//! Deterministic synthetic covers: smooth low-frequency structure plus a
//! highlight blob and mild noise, mapped into a mid-range band so the
//! embedding stage never pushes samples past the clip points.

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sobomark_core::MultiImage;

/// Generate a `side x side` cover with `channels` planes. The same
/// `(side, channels, seed)` triple always yields identical bytes.
pub fn gen_cover(side: usize, channels: usize, seed: u64) -> Result<MultiImage> {
    let mut img =
        MultiImage::new(side, side, channels).map_err(|e| anyhow::anyhow!("{e}"))?;
    let s = side as f64;
    for c in 0..channels {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9).wrapping_add(c as u64));
        let phase = (seed % 97) as f64 + c as f64 * 11.0;
        let (cx, cy) = (
            s * (0.3 + 0.4 * ((seed % 7) as f64 / 6.0)),
            s * (0.3 + 0.4 * ((seed % 11) as f64 / 10.0)),
        );
        let sigma = s * 0.16;
        let mut field = vec![0.0f64; side * side];
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for y in 0..side {
            for x in 0..side {
                let (xf, yf) = (x as f64, y as f64);
                let wave = 0.55
                    * ((xf + phase) / 37.0).sin()
                    * ((yf + 2.0 * phase) / 53.0).cos();
                let r2 = (xf - cx).powi(2) + (yf - cy).powi(2);
                let blob = 0.35 * (-r2 / (2.0 * sigma * sigma)).exp();
                let noise = 0.06 * (rng.gen::<f64>() - 0.5);
                let v = wave + blob + noise;
                lo = lo.min(v);
                hi = hi.max(v);
                field[y * side + x] = v;
            }
        }
        let span = if hi > lo { hi - lo } else { 1.0 };
        for y in 0..side {
            for x in 0..side {
                let t = (field[y * side + x] - lo) / span;
                img.set(c, x, y, (55.0 + 145.0 * t).round() as u8);
            }
        }
    }
    Ok(img)
}
