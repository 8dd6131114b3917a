//! Diagonal (zigzag) scan order for square coefficient matrices, matching
//! the classic JPEG traversal for n = 8.

use alloc::vec::Vec;

/// (row, col) pairs in scan order; even diagonals walk bottom-left to
/// top-right, odd ones the reverse.
pub fn zigzag_indices(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n);
    for d in 0..(2 * n).saturating_sub(1) {
        let lo = d.saturating_sub(n - 1);
        let hi = d.min(n - 1);
        if d % 2 == 0 {
            for r in (lo..=hi).rev() {
                out.push((r, d - r));
            }
        } else {
            for r in lo..=hi {
                out.push((r, d - r));
            }
        }
    }
    out
}

/// Row-major n x n matrix -> scan-ordered vector.
pub fn zigzag(m: &[f64], n: usize) -> Vec<f64> {
    zigzag_indices(n).iter().map(|&(r, c)| m[r * n + c]).collect()
}

/// Scan-ordered vector -> row-major n x n matrix.
pub fn inverse_zigzag(v: &[f64], n: usize) -> Vec<f64> {
    let mut m = alloc::vec![0.0f64; n * n];
    for (i, &(r, c)) in zigzag_indices(n).iter().enumerate() {
        m[r * n + c] = v[i];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_matches_jpeg_for_8x8() {
        let flat: Vec<usize> = zigzag_indices(8).iter().map(|&(r, c)| r * 8 + c).collect();
        let head = [0usize, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5];
        assert_eq!(&flat[..16], &head);
        assert_eq!(flat[28], 7); // scan slot 28 is the top-right corner M[0][7]
        assert_eq!(flat.len(), 64);
        assert_eq!(flat.last(), Some(&63));
    }

    #[test]
    fn roundtrip_is_identity() {
        for n in [1usize, 2, 3, 8] {
            let m: Vec<f64> = (0..n * n).map(|i| i as f64).collect();
            assert_eq!(inverse_zigzag(&zigzag(&m, n), n), m);
        }
    }

    #[test]
    fn covers_every_cell_once() {
        let idx = zigzag_indices(5);
        let mut seen = [false; 25];
        for (r, c) in idx {
            assert!(!seen[r * 5 + c]);
            seen[r * 5 + c] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
