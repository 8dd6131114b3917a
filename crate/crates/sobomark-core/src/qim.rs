//! Binary quantization index modulation on a scalar coefficient: two
//! interleaved uniform lattices, offset by half the step.

use crate::numerics::{abs, round_half_away};

/// Dither offset of a bit's lattice.
fn dither(bit: u8, delta: f64) -> f64 {
    if bit == 0 {
        0.0
    } else {
        delta / 2.0
    }
}

/// Quantize v onto the lattice of `bit` (step `delta`, ties round away
/// from zero).
pub fn qim_embed(v: f64, bit: u8, delta: f64) -> f64 {
    let d = dither(bit & 1, delta);
    round_half_away((v - d) / delta) * delta + d
}

/// Decode by nearest lattice; equidistant values decode to 0.
pub fn qim_extract(v: f64, delta: f64) -> u8 {
    let d0 = abs(v - qim_embed(v, 0, delta));
    let d1 = abs(v - qim_embed(v, 1, delta));
    if d1 < d0 {
        1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embeds_onto_the_requested_lattice() {
        assert_eq!(qim_embed(37.0, 1, 16.0), 40.0);
        assert_eq!(qim_embed(32.0, 0, 16.0), 32.0);
        assert_eq!(qim_embed(-3.0, 0, 16.0), 0.0);
        assert_eq!(qim_embed(-13.0, 1, 16.0), -8.0);
    }

    #[test]
    fn extraction_inverts_embedding() {
        for delta in [16.0, 48.0, 96.0] {
            for bit in [0u8, 1] {
                for v in [-250.0, -37.5, 0.0, 1.0, 88.8, 1234.5] {
                    let e = qim_embed(v, bit, delta);
                    assert_eq!(qim_extract(e, delta), bit, "v={v} delta={delta}");
                }
            }
        }
    }

    #[test]
    fn survives_perturbation_within_quarter_step() {
        let delta = 96.0;
        for bit in [0u8, 1] {
            let e = qim_embed(500.0, bit, delta);
            for eps in [-23.9, -10.0, 10.0, 23.9] {
                assert_eq!(qim_extract(e + eps, delta), bit);
            }
        }
    }

    #[test]
    fn equidistant_decodes_to_zero() {
        assert_eq!(qim_extract(36.0, 16.0), 0);
        assert_eq!(qim_extract(40.0, 16.0), 1);
        assert_eq!(qim_extract(-4.0, 16.0), 0);
    }
}
