//! Minimal planar multi-channel 8-bit image container shared by the
//! watermarking pipeline and the quality metrics.

use crate::error::Error;
use alloc::vec;
use alloc::vec::Vec;

/// Planar image: each channel is a row-major `width * height` byte plane.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiImage {
    width: usize,
    height: usize,
    channels: Vec<Vec<u8>>,
}

impl MultiImage {
    /// Zero-filled image; needs at least one channel and non-empty dims.
    pub fn new(width: usize, height: usize, num_channels: usize) -> Result<Self, Error> {
        if width == 0 || height == 0 || num_channels == 0 {
            return Err(Error::InvalidParams("image dimensions must be positive"));
        }
        Ok(MultiImage {
            width,
            height,
            channels: vec![vec![0u8; width * height]; num_channels],
        })
    }

    /// Wrap existing planes; all must have `width * height` samples.
    pub fn from_planes(width: usize, height: usize, planes: Vec<Vec<u8>>) -> Result<Self, Error> {
        if width == 0 || height == 0 || planes.is_empty() {
            return Err(Error::InvalidParams("image dimensions must be positive"));
        }
        for p in &planes {
            if p.len() != width * height {
                return Err(Error::DimensionMismatch {
                    expected: width * height,
                    got: p.len(),
                });
            }
        }
        Ok(MultiImage {
            width,
            height,
            channels: planes,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn plane(&self, c: usize) -> &[u8] {
        &self.channels[c]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [u8] {
        &mut self.channels[c]
    }

    pub fn get(&self, c: usize, x: usize, y: usize) -> u8 {
        self.channels[c][y * self.width + x]
    }

    pub fn set(&mut self, c: usize, x: usize, y: usize, v: u8) {
        self.channels[c][y * self.width + x] = v;
    }

    /// Largest sample value across all channels.
    pub fn max_sample(&self) -> u8 {
        self.channels
            .iter()
            .flat_map(|p| p.iter().copied())
            .max()
            .unwrap_or(0)
    }
}
