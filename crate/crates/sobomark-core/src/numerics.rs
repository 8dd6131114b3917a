//! Difference operators, falling factorials, compensated summation, and
//! residual bookkeeping shared by the polynomial modules.

/// Falling factorial `[x]_k = x (x-1) ... (x-k+1)`, with `[x]_0 = 1`.
pub fn falling_factorial(x: f64, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r *= x - i as f64;
    }
    r
}

/// Binomial coefficient as a float (exact for the small orders used here).
pub fn binomial(k: usize, m: usize) -> f64 {
    if m > k {
        return 0.0;
    }
    let m = m.min(k - m);
    let mut r = 1.0;
    for i in 0..m {
        r = r * (k - i) as f64 / (i + 1) as f64;
    }
    libm::round(r)
}

/// `n!` as a float (exact for n <= 18).
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// k-th forward difference by binomial expansion:
/// `D^k f(x) = sum_m (-1)^{k-m} C(k,m) f(x+m)`.
pub fn forward_diff<F: Fn(f64) -> f64>(f: F, k: usize, x: f64) -> f64 {
    let mut s = 0.0;
    for m in 0..=k {
        let term = binomial(k, m) * f(x + m as f64);
        if (k - m) % 2 == 0 {
            s += term;
        } else {
            s -= term;
        }
    }
    s
}

/// k-th backward difference; uses `∇^k f(x) = Δ^k f(x-k)`.
pub fn backward_diff<F: Fn(f64) -> f64>(f: F, k: usize, x: f64) -> f64 {
    forward_diff(f, k, x - k as f64)
}

/// Neumaier-compensated accumulator: robust against terms that span many
/// orders of magnitude, which the kernel sums do.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    s: f64,
    c: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.s + v;
        if abs(self.s) >= abs(v) {
            self.c += (self.s - t) + v;
        } else {
            self.c += (v - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// Residual of a verified identity: the raw defect together with a magnitude
/// scale assembled from the additive terms appearing on both sides, floored
/// at 1 so identities between tiny quantities are not judged in absolute
/// underflow territory.
#[derive(Clone, Copy, Debug)]
pub struct Residual {
    pub raw: f64,
    pub scale: f64,
}

impl Residual {
    /// `defect` is lhs - rhs; `terms` are the additive products of both sides.
    pub fn new(defect: f64, terms: &[f64]) -> Self {
        let mut scale = 1.0;
        for &t in terms {
            let a = abs(t);
            if a > scale {
                scale = a;
            }
        }
        Residual { raw: defect, scale }
    }

    /// Defect relative to the term scale.
    pub fn ratio(&self) -> f64 {
        abs(self.raw) / self.scale
    }

    pub fn within(&self, eps: f64) -> bool {
        abs(self.raw) <= eps * self.scale
    }
}

/// Round half away from zero (matches byte-image quantization).
pub fn round_half_away(v: f64) -> f64 {
    libm::round(v)
}

pub(crate) fn abs(v: f64) -> f64 {
    if v < 0.0 {
        -v
    } else {
        v
    }
}

pub(crate) use libm::{exp, floor, log as ln, log10, log1p};

pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}
