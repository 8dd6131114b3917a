//! Image fidelity and bitstream error metrics.

use crate::error::Error;
use crate::img::MultiImage;
use crate::numerics::log10;

/// Peak signal-to-noise ratio between two images of identical shape,
/// returned as (psnr_db, mse). The peak is the largest sample value seen
/// in either image; identical images give (+inf, 0).
pub fn psnr(a: &MultiImage, b: &MultiImage) -> Result<(f64, f64), Error> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch {
            expected: a.width() * a.height(),
            got: b.width() * b.height(),
        });
    }
    if a.num_channels() != b.num_channels() {
        return Err(Error::DimensionMismatch {
            expected: a.num_channels(),
            got: b.num_channels(),
        });
    }
    let mut sq = 0.0f64;
    for c in 0..a.num_channels() {
        for (&u, &v) in a.plane(c).iter().zip(b.plane(c)) {
            let d = u as f64 - v as f64;
            sq += d * d;
        }
    }
    let samples = (a.width() * a.height() * a.num_channels()) as f64;
    let mse = sq / samples;
    if mse == 0.0 {
        return Ok((f64::INFINITY, 0.0));
    }
    let peak = a.max_sample().max(b.max_sample()) as f64;
    Ok((10.0 * log10(peak * peak / mse), mse))
}

/// Bit error rate between two equal-length bit vectors (values 0/1).
pub fn ber(a: &[u8], b: &[u8]) -> Result<f64, Error> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidParams("bit vectors must be non-empty"));
    }
    let wrong = a
        .iter()
        .zip(b)
        .filter(|(x, y)| (**x & 1) != (**y & 1))
        .count();
    Ok(wrong as f64 / a.len() as f64)
}
