//! Weighted, norm-scaled Sobolev basis values and the block moment
//! transform built from them.
//!
//! The basis entry is `Sbar_k(x) = S_k(x) sqrt(rho(x) / <S_k,S_k>)`; an
//! N x N image block C maps to moments `M = A C A^T` and back via
//! `C = A^T M A`, with `A[k][x] = Sbar_k(x)`.

use crate::error::Error;
use crate::numerics::{abs, exp, ln, CompensatedSum};
use crate::sobolev::SobolevFamily;
use alloc::vec;
use alloc::vec::Vec;

/// `Sbar_n(x)`, evaluated with the weight and norm combined in log space
/// so that extreme magnitudes cancel before exponentiation. Uses the
/// lattice-series polynomial path, which stays relatively accurate at the
/// near-root points the recurrence cannot resolve.
pub fn weighted_eval(sf: &SobolevFamily, n: usize, x: usize) -> f64 {
    let scale_ln = 0.5 * (sf.family().rho_ln(x) - ln(sf.norm_sq(n)));
    sf.eval_lattice(n, x) * exp(scale_ln)
}

/// `Sbar_n(x)` through the Sobolev three-term relation at degree n-1,
/// with the norm ratios folded into the coefficients. Needs n >= 2; errs
/// where the relation degenerates (Xi2 = 0, identically so for Charlier
/// at degrees at or below the difference order) or a coefficient is
/// singular.
pub fn weighted_recurrence_eval(sf: &SobolevFamily, n: usize, x: usize) -> Result<f64, Error> {
    if n < 2 {
        return Err(Error::InvalidParams(
            "recurrence form needs degree n >= 2",
        ));
    }
    let (xi2, a, b) = sf.recurrence_coeffs(n - 1, x as f64)?;
    if xi2 == 0.0 {
        return Err(Error::SingularPoint("three-term relation degenerates"));
    }
    let ln_nm = ln(sf.norm_sq(n));
    let r1 = exp(0.5 * (ln(sf.norm_sq(n - 1)) - ln_nm));
    let r2 = exp(0.5 * (ln(sf.norm_sq(n - 2)) - ln_nm));
    let psi1 = r1 * (a / xi2);
    let psi2 = r2 * (b / xi2);
    Ok(psi1 * weighted_eval(sf, n - 1, x) + psi2 * weighted_eval(sf, n - 2, x))
}

/// Recurrence form where defined, direct evaluation elsewhere.
pub fn weighted_recurrence_or_direct(sf: &SobolevFamily, n: usize, x: usize) -> f64 {
    weighted_recurrence_eval(sf, n, x).unwrap_or_else(|_| weighted_eval(sf, n, x))
}

/// Precomputed N x N table of weighted basis values for block transforms.
#[derive(Clone, Debug)]
pub struct MomentBasis {
    n: usize,
    a: Vec<f64>, // a[k * n + x] = Sbar_k(x)
}

impl MomentBasis {
    /// Tabulate degrees 0..n-1 at lattice points 0..n-1. Every entry must
    /// come out finite; a non-finite entry reports its (degree, point).
    pub fn build(sf: &SobolevFamily, n: usize) -> Result<Self, Error> {
        if n < 2 {
            return Err(Error::InvalidParams("basis size must be at least 2"));
        }
        let mut a = vec![0.0f64; n * n];
        for k in 0..n {
            for x in 0..n {
                let v = weighted_eval(sf, k, x);
                if !v.is_finite() {
                    return Err(Error::Construction {
                        degree: k,
                        point: x,
                    });
                }
                a[k * n + x] = v;
            }
        }
        Ok(MomentBasis { n, a })
    }

    /// Wrap a precomputed table (row-major, `a[k*n+x]`).
    #[doc(hidden)]
    pub fn from_raw(n: usize, a: Vec<f64>) -> Self {
        assert_eq!(a.len(), n * n);
        MomentBasis { n, a }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// `Sbar_k(x)`.
    pub fn value(&self, k: usize, x: usize) -> f64 {
        self.a[k * self.n + x]
    }

    /// Moments `M = A C A^T` of a row-major N x N block.
    pub fn direct_moments(&self, block: &[f64]) -> Result<Vec<f64>, Error> {
        let n = self.n;
        if block.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: block.len(),
            });
        }
        // T = C A^T, then M = A T
        let mut t = vec![0.0f64; n * n];
        for x in 0..n {
            for q in 0..n {
                let mut s = 0.0;
                for y in 0..n {
                    s += block[x * n + y] * self.a[q * n + y];
                }
                t[x * n + q] = s;
            }
        }
        let mut m = vec![0.0f64; n * n];
        for p in 0..n {
            for q in 0..n {
                let mut s = 0.0;
                for x in 0..n {
                    s += self.a[p * n + x] * t[x * n + q];
                }
                m[p * n + q] = s;
            }
        }
        Ok(m)
    }

    /// Reconstruction `C = A^T M A` from a row-major N x N moment matrix.
    pub fn inverse_moments(&self, m: &[f64]) -> Result<Vec<f64>, Error> {
        let n = self.n;
        if m.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: m.len(),
            });
        }
        // U = M A, then C = A^T U
        let mut u = vec![0.0f64; n * n];
        for p in 0..n {
            for y in 0..n {
                let mut s = 0.0;
                for q in 0..n {
                    s += m[p * n + q] * self.a[q * n + y];
                }
                u[p * n + y] = s;
            }
        }
        let mut c = vec![0.0f64; n * n];
        for x in 0..n {
            for y in 0..n {
                let mut s = 0.0;
                for p in 0..n {
                    s += self.a[p * n + x] * u[p * n + y];
                }
                c[x * n + y] = s;
            }
        }
        Ok(c)
    }

    /// `max |(A A^T - I)_{pq}|`: how far the truncated lattice sample of
    /// the basis is from orthonormal.
    pub fn gram_deviation(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                let mut acc = CompensatedSum::new();
                for x in 0..n {
                    acc.add(self.a[p * n + x] * self.a[q * n + x]);
                }
                let want = if p == q { 1.0 } else { 0.0 };
                let dev = abs(acc.value() - want);
                if dev > worst {
                    worst = dev;
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::FamilyParams;
    use crate::sobolev::SobolevParams;

    fn rel(a: f64, b: f64) -> f64 {
        abs(a - b) / abs(b).max(f64::MIN_POSITIVE)
    }

    struct Case {
        sf: SobolevFamily,
        w2_at_3: f64,
        w4_at_6: f64,
        w7_at_7: f64,
        rho_ln_12: f64,
    }

    // Reference values computed independently at 50-digit precision.
    fn cases() -> Vec<Case> {
        vec![
            Case {
                sf: SobolevFamily::new(
                    FamilyParams::charlier(0.0007).unwrap(),
                    SobolevParams::new(-17.0, 1e-47, 5).unwrap(),
                ),
                w2_at_3: 0.04577765767773463871119164,
                w4_at_6: 0.00191456997710207691210341,
                w7_at_7: 0.9947569171425467204650269,
                rho_ln_12: -107.1610771707123193211167,
            },
            Case {
                sf: SobolevFamily::new(
                    FamilyParams::charlier(0.0005).unwrap(),
                    SobolevParams::new(-21.0, 1e-77, 3).unwrap(),
                ),
                w2_at_3: 0.03870079375114781139457349,
                w4_at_6: 0.001368051638320871805633952,
                w7_at_7: 0.9962535297529688543117348,
                rho_ln_12: -111.1985440101668744871718,
            },
            Case {
                sf: SobolevFamily::new(
                    FamilyParams::meixner(0.0008, 0.000041).unwrap(),
                    SobolevParams::new(-17.0, 1e-47, 5).unwrap(),
                ),
                w2_at_3: 0.06911654913568318586253124,
                w4_at_6: 0.009735472828299711581752785,
                w7_at_7: 0.9611745764672922356003504,
                rho_ln_12: -98.15750729094248686401467,
            },
            Case {
                sf: SobolevFamily::new(
                    FamilyParams::meixner(0.0001, 0.000075).unwrap(),
                    SobolevParams::new(-21.0, 1e-77, 3).unwrap(),
                ),
                w2_at_3: 0.0244880083102208033124335,
                w4_at_6: 0.001223785966870190719316427,
                w7_at_7: 0.9951058209469435263935384,
                rho_ln_12: -122.5067870715110880512675,
            },
            Case {
                sf: SobolevFamily::new(
                    FamilyParams::charlier(1.0).unwrap(),
                    SobolevParams::new(-1.0, 1.0, 2).unwrap(),
                ),
                w2_at_3: 0.1010884432854389039339666,
                w4_at_6: 0.3670253778143807576427034,
                w7_at_7: -0.2740394279514123540180857,
                rho_ln_12: -20.98721449566188614951736,
            },
            Case {
                sf: SobolevFamily::new(
                    FamilyParams::meixner(0.3, 0.7).unwrap(),
                    SobolevParams::new(-2.0, 0.5, 1).unwrap(),
                ),
                w2_at_3: 0.3563063579440748937587335,
                w4_at_6: 0.0003912068956554937650831214,
                w7_at_7: 0.2435157734139037456872154,
                rho_ln_12: -15.46271221453469588539129,
            },
        ]
    }

    #[test]
    fn weighted_values_match_frozen_references() {
        for (i, c) in cases().iter().enumerate() {
            assert!(
                rel(weighted_eval(&c.sf, 2, 3), c.w2_at_3) < 1e-11,
                "case {i}: {}",
                weighted_eval(&c.sf, 2, 3)
            );
            assert!(rel(weighted_eval(&c.sf, 4, 6), c.w4_at_6) < 1e-10, "case {i}");
            assert!(rel(weighted_eval(&c.sf, 7, 7), c.w7_at_7) < 1e-10, "case {i}");
            assert!(
                rel(c.sf.family().rho_ln(12), c.rho_ln_12) < 1e-13,
                "case {i} rho_ln"
            );
        }
    }

    #[test]
    fn recurrence_form_agrees_with_direct() {
        for (i, c) in cases().iter().enumerate() {
            for n in 2..=7usize {
                for x in 0..8usize {
                    match weighted_recurrence_eval(&c.sf, n, x) {
                        Ok(v) => {
                            let d = weighted_eval(&c.sf, n, x);
                            // accuracy is relative to what feeds the relation
                            let scale = abs(d)
                                .max(abs(weighted_eval(&c.sf, n - 1, x)))
                                .max(abs(weighted_eval(&c.sf, n - 2, x)))
                                .max(1e-3);
                            assert!(
                                abs(v - d) <= 1e-8 * scale,
                                "case {i} n={n} x={x}: {v} vs {d}"
                            );
                        }
                        Err(Error::SingularPoint(_)) => {
                            // falls back to direct evaluation
                            let v = weighted_recurrence_or_direct(&c.sf, n, x);
                            assert_eq!(v, weighted_eval(&c.sf, n, x));
                        }
                        Err(e) => panic!("case {i} n={n} x={x}: {e:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_relation_is_reported() {
        // below the difference order the relation collapses (Xi2 = 0)
        let sf = SobolevFamily::new(
            FamilyParams::charlier(0.0007).unwrap(),
            SobolevParams::new(-17.0, 1e-47, 5).unwrap(),
        );
        assert!(matches!(
            weighted_recurrence_eval(&sf, 2, 3),
            Err(Error::SingularPoint(_))
        ));
        let v = weighted_recurrence_or_direct(&sf, 2, 3);
        assert_eq!(v, weighted_eval(&sf, 2, 3));
    }

    #[test]
    fn build_validates_inputs() {
        let sf = SobolevFamily::new(
            FamilyParams::charlier(1.0).unwrap(),
            SobolevParams::new(-1.0, 1.0, 2).unwrap(),
        );
        assert!(MomentBasis::build(&sf, 1).is_err());
        let b = MomentBasis::build(&sf, 8).unwrap();
        assert_eq!(b.size(), 8);
        assert!(matches!(
            b.direct_moments(&[0.0; 63]),
            Err(Error::DimensionMismatch { expected: 64, got: 63 })
        ));
        assert!(matches!(
            b.inverse_moments(&[0.0; 10]),
            Err(Error::DimensionMismatch { expected: 64, got: 10 })
        ));
    }

    fn xorshift_blocks(count: usize) -> Vec<[f64; 64]> {
        // deterministic pseudo-random byte blocks
        let mut s = 0x243F6A8885A308D3u64;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            s
        };
        (0..count)
            .map(|_| {
                let mut b = [0.0f64; 64];
                for v in b.iter_mut() {
                    *v = (next() & 0xFF) as f64;
                }
                b
            })
            .collect()
    }

    #[test]
    fn roundtrip_error_stays_in_measured_range() {
        // The truncated 8-point sample of the basis is NOT orthonormal in
        // f64 at the shipped parameter sets, so A^T(ACA^T)A != C exactly.
        // These bounds pin the measured behavior; shrinking them below
        // ~1e-6 is not achievable with this basis in double precision.
        let presets: [(SobolevFamily, f64, f64); 4] = [
            (
                SobolevFamily::new(
                    FamilyParams::charlier(0.0007).unwrap(),
                    SobolevParams::new(-17.0, 1e-47, 5).unwrap(),
                ),
                8e-3,
                4.5,
            ),
            (
                SobolevFamily::new(
                    FamilyParams::charlier(0.0005).unwrap(),
                    SobolevParams::new(-21.0, 1e-77, 3).unwrap(),
                ),
                6e-3,
                3.5,
            ),
            (
                SobolevFamily::new(
                    FamilyParams::meixner(0.0008, 0.000041).unwrap(),
                    SobolevParams::new(-17.0, 1e-47, 5).unwrap(),
                ),
                6e-2,
                32.0,
            ),
            (
                SobolevFamily::new(
                    FamilyParams::meixner(0.0001, 0.000075).unwrap(),
                    SobolevParams::new(-21.0, 1e-77, 3).unwrap(),
                ),
                8e-3,
                4.5,
            ),
        ];
        let blocks = xorshift_blocks(100);
        for (i, (sf, gram_bound, rt_bound)) in presets.iter().enumerate() {
            let b = MomentBasis::build(sf, 8).unwrap();
            let dev = b.gram_deviation();
            assert!(dev < *gram_bound, "preset {i}: gram {dev}");
            assert!(dev > 1e-4, "preset {i}: gram unexpectedly small ({dev})");
            let mut worst = 0.0f64;
            for blk in &blocks {
                let m = b.direct_moments(blk).unwrap();
                let r = b.inverse_moments(&m).unwrap();
                for (u, v) in blk.iter().zip(r.iter()) {
                    worst = worst.max(abs(u - v));
                }
            }
            assert!(worst < *rt_bound, "preset {i}: roundtrip {worst}");
            assert!(worst > 1e-3, "preset {i}: roundtrip unexpectedly small");
        }
    }

    #[test]
    fn truncation_deficit_shrinks_with_the_point_mass() {
        // With degree 7 sampled at only 8 lattice points, the missing
        // x >= 8 weight mass scales with lambda's reach; the deviation
        // must fall monotonically across these decades.
        let fam = FamilyParams::charlier(0.0007).unwrap();
        let mut last = f64::INFINITY;
        for lam in [1e-31, 1e-32, 1e-33] {
            let sf = SobolevFamily::new(fam, SobolevParams::new(-17.0, lam, 5).unwrap());
            let dev = MomentBasis::build(&sf, 8).unwrap().gram_deviation();
            assert!(dev < last, "lambda={lam}: {dev} !< {last}");
            last = dev;
        }
    }

    #[test]
    fn moments_invert_exactly_for_orthonormal_table() {
        // sanity-check the two transforms against a genuinely orthonormal
        // table (identity), where the roundtrip must be exact
        let eye: Vec<f64> = (0..64)
            .map(|i| if i % 9 == 0 { 1.0 } else { 0.0 })
            .collect();
        let b = MomentBasis::from_raw(8, eye);
        assert_eq!(b.gram_deviation(), 0.0);
        let blk: Vec<f64> = (0..64).map(|i| i as f64).collect();
        let m = b.direct_moments(&blk).unwrap();
        assert_eq!(m, blk);
        let r = b.inverse_moments(&m).unwrap();
        assert_eq!(r, blk);
    }
}
