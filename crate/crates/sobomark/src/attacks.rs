//! Channel-wise image degradations used to probe watermark robustness.
//! Every attack is deterministic given its spec (the noise attack draws
//! from a seeded stream cipher), so evaluation runs are reproducible.

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex, FftPlanner};
use sobomark_core::MultiImage;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AttackKind {
    /// Blacks out a top-anchored band covering `param` percent of the area.
    Cropping,
    /// Frequency-domain low-pass: keeps the centered ellipsoid with
    /// semi-axes `(W, H) / (2 * param)` and zeroes everything outside.
    FourierEllipsoid,
    /// Gaussian blur with sigma = `param`, truncated at four sigma.
    Gaussian,
    /// Adds the Laplacian-of-Gaussian response (sigma = `param`) onto the
    /// image, an edge-amplifying perturbation.
    GaussianLaplace,
    /// Sliding-window minimum with a `param x param` window.
    MinimumFilter,
    /// Sets a `param` fraction of pixels to 0 or 255 with equal odds.
    SaltPepper,
}

impl AttackKind {
    pub const ALL: [AttackKind; 6] = [
        AttackKind::Cropping,
        AttackKind::FourierEllipsoid,
        AttackKind::Gaussian,
        AttackKind::GaussianLaplace,
        AttackKind::MinimumFilter,
        AttackKind::SaltPepper,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AttackKind::Cropping => "cropping",
            AttackKind::FourierEllipsoid => "fourier-ellipsoid",
            AttackKind::Gaussian => "gaussian",
            AttackKind::GaussianLaplace => "gaussian-laplace",
            AttackKind::MinimumFilter => "minimum-filter",
            AttackKind::SaltPepper => "salt-pepper",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        let canon = name.to_ascii_lowercase().replace('_', "-");
        for kind in Self::ALL {
            if kind.name() == canon {
                return Ok(kind);
            }
        }
        let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
        bail!("unknown attack {name:?}; known: {}", names.join(", "));
    }

    /// The parameter sweep used by batch evaluation.
    pub fn grid(&self) -> Vec<f64> {
        match self {
            AttackKind::Cropping => (1..=8).map(|k| 5.0 * k as f64).collect(),
            AttackKind::FourierEllipsoid | AttackKind::MinimumFilter => {
                (1..=8).map(|k| k as f64).collect()
            }
            AttackKind::Gaussian => (1..=8).map(|k| 0.1 * k as f64).collect(),
            AttackKind::GaussianLaplace | AttackKind::SaltPepper => {
                (1..=8).map(|k| 0.01 * k as f64).collect()
            }
        }
    }

    fn in_grid(&self, param: f64) -> bool {
        self.grid()
            .iter()
            .any(|g| (param - g).abs() <= 1e-9 * g.max(1.0))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub param: f64,
    pub seed: u64,
}

/// Apply `spec` to a copy of `img`. Parameters off the standard sweep are
/// allowed (a warning is printed) as long as they are meaningful.
pub fn apply(img: &MultiImage, spec: &AttackSpec) -> Result<MultiImage> {
    if !spec.kind.in_grid(spec.param) {
        eprintln!(
            "warning: {} parameter {} is outside the standard sweep {:?}",
            spec.kind.name(),
            spec.param,
            spec.kind.grid()
        );
    }
    match spec.kind {
        AttackKind::Cropping => cropping(img, spec.param),
        AttackKind::FourierEllipsoid => fourier_ellipsoid(img, spec.param),
        AttackKind::Gaussian => gaussian(img, spec.param),
        AttackKind::GaussianLaplace => gaussian_laplace(img, spec.param),
        AttackKind::MinimumFilter => minimum_filter(img, spec.param),
        AttackKind::SaltPepper => salt_pepper(img, spec.param, spec.seed),
    }
}

fn clip_round(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn cropping(img: &MultiImage, percent: f64) -> Result<MultiImage> {
    if !(0.0..=100.0).contains(&percent) {
        bail!("cropping percentage must lie in [0, 100]");
    }
    let (w, h) = (img.width(), img.height());
    let rows = ((h as f64 * percent / 100.0).round() as usize).min(h);
    let mut out = img.clone();
    for c in 0..img.num_channels() {
        out.plane_mut(c)[..rows * w].fill(0);
    }
    Ok(out)
}

fn fourier_ellipsoid(img: &MultiImage, param: f64) -> Result<MultiImage> {
    if !(param >= 1.0) {
        bail!("fourier-ellipsoid box size must be at least 1");
    }
    let (w, h) = (img.width(), img.height());
    let (ax, ay) = (w as f64 / (2.0 * param), h as f64 / (2.0 * param));
    let mut planner = FftPlanner::<f64>::new();
    let row_fft = planner.plan_fft_forward(w);
    let col_fft = planner.plan_fft_forward(h);
    let row_ifft = planner.plan_fft_inverse(w);
    let col_ifft = planner.plan_fft_inverse(h);

    let mut out = img.clone();
    for c in 0..img.num_channels() {
        let mut grid: Vec<Complex<f64>> = img
            .plane(c)
            .iter()
            .map(|&v| Complex::new(v as f64, 0.0))
            .collect();
        for row in grid.chunks_mut(w) {
            row_fft.process(row);
        }
        let mut col = vec![Complex::new(0.0, 0.0); h];
        for x in 0..w {
            for y in 0..h {
                col[y] = grid[y * w + x];
            }
            col_fft.process(&mut col);
            for y in 0..h {
                grid[y * w + x] = col[y];
            }
        }
        for y in 0..h {
            // Distance from DC in cycles, accounting for wrap-around.
            let fy = y.min(h - y) as f64;
            for x in 0..w {
                let fx = x.min(w - x) as f64;
                if (fx / ax).powi(2) + (fy / ay).powi(2) > 1.0 {
                    grid[y * w + x] = Complex::new(0.0, 0.0);
                }
            }
        }
        for x in 0..w {
            for y in 0..h {
                col[y] = grid[y * w + x];
            }
            col_ifft.process(&mut col);
            for y in 0..h {
                grid[y * w + x] = col[y];
            }
        }
        for row in grid.chunks_mut(w) {
            row_ifft.process(row);
        }
        let scale = 1.0 / (w * h) as f64;
        let plane = out.plane_mut(c);
        for (dst, src) in plane.iter_mut().zip(&grid) {
            *dst = clip_round(src.re * scale);
        }
    }
    Ok(out)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Mirror index reflection about the boundary samples.
fn reflect(i: i64, n: i64) -> usize {
    let mut i = i;
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

fn separable_blur(plane: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let radius = (kernel.len() / 2) as i64;
    let mut tmp = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &kv) in kernel.iter().enumerate() {
                let xi = reflect(x as i64 + t as i64 - radius, w as i64);
                acc += kv * plane[y * w + xi];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut outp = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &kv) in kernel.iter().enumerate() {
                let yi = reflect(y as i64 + t as i64 - radius, h as i64);
                acc += kv * tmp[yi * w + x];
            }
            outp[y * w + x] = acc;
        }
    }
    outp
}

fn to_f64(plane: &[u8]) -> Vec<f64> {
    plane.iter().map(|&v| v as f64).collect()
}

fn gaussian(img: &MultiImage, sigma: f64) -> Result<MultiImage> {
    if !(sigma > 0.0) {
        bail!("gaussian sigma must be positive");
    }
    let (w, h) = (img.width(), img.height());
    let kernel = gaussian_kernel(sigma);
    let mut out = img.clone();
    for c in 0..img.num_channels() {
        let blurred = separable_blur(&to_f64(img.plane(c)), w, h, &kernel);
        for (dst, &v) in out.plane_mut(c).iter_mut().zip(&blurred) {
            *dst = clip_round(v);
        }
    }
    Ok(out)
}

fn gaussian_laplace(img: &MultiImage, sigma: f64) -> Result<MultiImage> {
    if !(sigma > 0.0) {
        bail!("gaussian-laplace sigma must be positive");
    }
    let (w, h) = (img.width(), img.height());
    let kernel = gaussian_kernel(sigma);
    let mut out = img.clone();
    for c in 0..img.num_channels() {
        let orig = to_f64(img.plane(c));
        let smooth = separable_blur(&orig, w, h, &kernel);
        let plane = out.plane_mut(c);
        for y in 0..h {
            for x in 0..w {
                // Five-point Laplacian of the smoothed field, borders
                // replicated.
                let at = |xx: i64, yy: i64| {
                    let xi = xx.clamp(0, w as i64 - 1) as usize;
                    let yi = yy.clamp(0, h as i64 - 1) as usize;
                    smooth[yi * w + xi]
                };
                let (xi, yi) = (x as i64, y as i64);
                let lap = at(xi - 1, yi) + at(xi + 1, yi) + at(xi, yi - 1) + at(xi, yi + 1)
                    - 4.0 * at(xi, yi);
                plane[y * w + x] = clip_round(orig[y * w + x] + lap);
            }
        }
    }
    Ok(out)
}

fn minimum_filter(img: &MultiImage, param: f64) -> Result<MultiImage> {
    let k = param.round() as i64;
    if k < 1 || (param - k as f64).abs() > 1e-9 {
        bail!("minimum-filter size must be a positive integer");
    }
    let (w, h) = (img.width(), img.height());
    // Window offsets for even sizes lean one extra sample to the right/
    // bottom, matching the usual anchor convention.
    let (lo, hi) = (-((k - 1) / 2), k / 2);
    let mut out = img.clone();
    for c in 0..img.num_channels() {
        let src = img.plane(c);
        let plane = out.plane_mut(c);
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let mut m = u8::MAX;
                for dy in lo..=hi {
                    let yi = (y + dy).clamp(0, h as i64 - 1) as usize;
                    for dx in lo..=hi {
                        let xi = (x + dx).clamp(0, w as i64 - 1) as usize;
                        m = m.min(src[yi * w + xi]);
                    }
                }
                plane[y as usize * w + x as usize] = m;
            }
        }
    }
    Ok(out)
}

fn salt_pepper(img: &MultiImage, fraction: f64, seed: u64) -> Result<MultiImage> {
    if !(0.0..=1.0).contains(&fraction) {
        bail!("salt-pepper fraction must lie in [0, 1]");
    }
    let n = img.width() * img.height();
    let hits = ((n as f64) * fraction).round() as usize;
    let mut out = img.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Partial Fisher-Yates: the first `hits` entries become a uniform
    // sample of distinct pixel positions.
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..hits.min(n) {
        let pick = rng.gen_range(i..n);
        idx.swap(i, pick);
        let value = if rng.gen::<bool>() { 255 } else { 0 };
        for c in 0..img.num_channels() {
            out.plane_mut(c)[idx[i]] = value;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(side: usize, v: u8) -> MultiImage {
        let mut img = MultiImage::new(side, side, 1).unwrap();
        img.plane_mut(0).fill(v);
        img
    }

    fn textured(side: usize) -> MultiImage {
        let mut img = MultiImage::new(side, side, 1).unwrap();
        for y in 0..side {
            for x in 0..side {
                img.set(0, x, y, ((x * 31 + y * 17 + (x * y) % 13) % 256) as u8);
            }
        }
        img
    }

    #[test]
    fn names_round_trip() {
        for kind in AttackKind::ALL {
            assert_eq!(AttackKind::from_name(kind.name()).unwrap(), kind);
            assert_eq!(kind.grid().len(), 8);
        }
        assert_eq!(
            AttackKind::from_name("Salt_Pepper").unwrap(),
            AttackKind::SaltPepper
        );
        assert!(AttackKind::from_name("rotation").is_err());
    }

    #[test]
    fn cropping_blacks_exact_area() {
        let img = constant(64, 199);
        let out = cropping(&img, 25.0).unwrap();
        let zeros = out.plane(0).iter().filter(|&&v| v == 0).count();
        assert_eq!(zeros, 64 * 16);
        assert_eq!(out.plane(0)[16 * 64], 199); // first surviving row
        let all = cropping(&img, 100.0).unwrap();
        assert!(all.plane(0).iter().all(|&v| v == 0));
    }

    #[test]
    fn minimum_filter_identity_and_erosion() {
        let img = textured(32);
        let same = minimum_filter(&img, 1.0).unwrap();
        assert_eq!(same.plane(0), img.plane(0));

        let mut dot = constant(16, 255);
        dot.set(0, 8, 8, 0);
        let eroded = minimum_filter(&dot, 3.0).unwrap();
        let zeros = eroded.plane(0).iter().filter(|&&v| v == 0).count();
        assert_eq!(zeros, 9);
        assert_eq!(eroded.get(0, 7, 7), 0);
        assert_eq!(eroded.get(0, 6, 8), 255);
    }

    #[test]
    fn gaussian_preserves_constants_and_smooths() {
        let flat = constant(32, 137);
        let out = gaussian(&flat, 0.8).unwrap();
        assert_eq!(out.plane(0), flat.plane(0));

        let img = textured(32);
        let blurred = gaussian(&img, 0.8).unwrap();
        let var = |p: &[u8]| {
            let mean = p.iter().map(|&v| v as f64).sum::<f64>() / p.len() as f64;
            p.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / p.len() as f64
        };
        assert!(var(blurred.plane(0)) < var(img.plane(0)));
    }

    #[test]
    fn laplace_of_gaussian_leaves_flat_regions() {
        let flat = constant(24, 90);
        let out = gaussian_laplace(&flat, 0.05).unwrap();
        assert_eq!(out.plane(0), flat.plane(0));
        let img = textured(24);
        let sharp = gaussian_laplace(&img, 0.05).unwrap();
        assert_ne!(sharp.plane(0), img.plane(0));
    }

    #[test]
    fn fourier_lowpass_preserves_dc_and_smooths() {
        let flat = constant(32, 123);
        let out = fourier_ellipsoid(&flat, 4.0).unwrap();
        assert_eq!(out.plane(0), flat.plane(0));

        let img = textured(32);
        let weak = fourier_ellipsoid(&img, 1.0).unwrap();
        let strong = fourier_ellipsoid(&img, 8.0).unwrap();
        let dist = |a: &[u8], b: &[u8]| -> f64 {
            a.iter()
                .zip(b)
                .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
                .sum()
        };
        assert!(dist(strong.plane(0), img.plane(0)) > dist(weak.plane(0), img.plane(0)));
    }

    #[test]
    fn salt_pepper_hits_exact_count_deterministically() {
        let img = constant(64, 100);
        let spec = AttackSpec {
            kind: AttackKind::SaltPepper,
            param: 0.05,
            seed: 42,
        };
        let a = apply(&img, &spec).unwrap();
        let b = apply(&img, &spec).unwrap();
        assert_eq!(a.plane(0), b.plane(0));
        let changed = a.plane(0).iter().filter(|&&v| v != 100).count();
        assert_eq!(changed, (64.0f64 * 64.0 * 0.05).round() as usize);
        assert!(a.plane(0).iter().all(|&v| v == 0 || v == 255 || v == 100));

        let zero = salt_pepper(&img, 0.0, 1).unwrap();
        assert_eq!(zero.plane(0), img.plane(0));
        let full = salt_pepper(&img, 1.0, 1).unwrap();
        assert!(full.plane(0).iter().all(|&v| v == 0 || v == 255));
    }

    #[test]
    fn off_grid_parameters_still_apply() {
        let img = constant(16, 80);
        let out = apply(
            &img,
            &AttackSpec {
                kind: AttackKind::Cropping,
                param: 12.5,
                seed: 0,
            },
        )
        .unwrap();
        assert_eq!(out.plane(0).iter().filter(|&&v| v == 0).count(), 16 * 2);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let img = constant(16, 80);
        assert!(cropping(&img, -1.0).is_err());
        assert!(gaussian(&img, 0.0).is_err());
        assert!(minimum_filter(&img, 2.5).is_err());
        assert!(salt_pepper(&img, 1.5, 0).is_err());
        assert!(fourier_ellipsoid(&img, 0.5).is_err());
    }
}
