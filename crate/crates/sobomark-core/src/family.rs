//! Classical monic Charlier and Meixner polynomials: recurrence data,
//! evaluation, difference operators, norms, weights, and reproducing
//! kernels with difference derivatives.

use crate::error::Error;
use crate::numerics::{
    abs, binomial, exp, factorial, floor, ln, ln_gamma, log1p, CompensatedSum, Residual,
};
use alloc::vec::Vec;

/// Below this |x-y| the kernel falls back to the definitional sum: the
/// closed-quotient form is 0/0-unstable near the diagonal.
pub const DELTA_CD: f64 = 1e-6;

/// Relative tail threshold of the series-truncation rule.
pub const TAIL_REL: f64 = 1e-18;
/// Number of consecutive below-threshold terms required before stopping.
pub const TAIL_RUN: usize = 8;
/// Hard cap on the summation range.
pub const X_MAX: usize = 10_000;

/// Which classical family.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FamilyKind {
    Charlier,
    Meixner,
}

/// Parameters of a classical monic family; the single source of its
/// recurrence/structure coefficients, weight, and norms.
#[derive(Clone, Copy, Debug)]
pub struct FamilyParams {
    kind: FamilyKind,
    mu: f64,
    gamma: f64, // unused (0) for Charlier
}

impl FamilyParams {
    /// Charlier family with Poisson weight `e^{-mu} mu^x / x!`; requires mu > 0.
    pub fn charlier(mu: f64) -> Result<Self, Error> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParams("Charlier requires mu > 0"));
        }
        Ok(FamilyParams {
            kind: FamilyKind::Charlier,
            mu,
            gamma: 0.0,
        })
    }

    /// Meixner family with negative-binomial weight `mu^x (gamma)_x / x!`;
    /// requires 0 < mu < 1 and gamma > 0.
    pub fn meixner(mu: f64, gamma: f64) -> Result<Self, Error> {
        if !(mu > 0.0 && mu < 1.0) || !mu.is_finite() {
            return Err(Error::InvalidParams("Meixner requires 0 < mu < 1"));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParams("Meixner requires gamma > 0"));
        }
        Ok(FamilyParams {
            kind: FamilyKind::Meixner,
            mu,
            gamma,
        })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn gamma(&self) -> Option<f64> {
        match self.kind {
            FamilyKind::Charlier => None,
            FamilyKind::Meixner => Some(self.gamma),
        }
    }

    /// Recurrence coefficient alpha_n of `x P_n = P_{n+1} + alpha_n P_n + beta_n P_{n-1}`.
    pub fn rec_alpha(&self, n: usize) -> f64 {
        let n = n as f64;
        match self.kind {
            FamilyKind::Charlier => n + self.mu,
            FamilyKind::Meixner => (n * (1.0 + self.mu) + self.mu * self.gamma) / (1.0 - self.mu),
        }
    }

    /// `x - rec_alpha(k)`, grouped as `(x - k) - mu-part`. The centres sit
    /// at `k + O(mu)` (Charlier) and `(k + O(mu))/(1-mu)` (Meixner), so for
    /// lattice x near k the literal subtraction cancels down to the O(mu)
    /// part and keeps only its rounding; the grouped form subtracts the
    /// integers exactly first.
    pub(crate) fn x_minus_rec_alpha(&self, k: usize, x: f64) -> f64 {
        let kf = k as f64;
        match self.kind {
            FamilyKind::Charlier => (x - kf) - self.mu,
            FamilyKind::Meixner => {
                ((x - kf) - self.mu * (x + kf + self.gamma)) / (1.0 - self.mu)
            }
        }
    }

    /// Recurrence coefficient beta_n (zero at n = 0).
    pub fn rec_beta(&self, n: usize) -> f64 {
        let n = n as f64;
        match self.kind {
            FamilyKind::Charlier => n * self.mu,
            FamilyKind::Meixner => {
                let d = self.mu - 1.0;
                n * self.mu * (n - 1.0 + self.gamma) / (d * d)
            }
        }
    }

    /// Coefficient of P_n in `(sigma+tau) D P_n = struct_alpha_n P_n + struct_beta_n P_{n-1}`.
    pub fn struct_alpha(&self, n: usize) -> f64 {
        match self.kind {
            FamilyKind::Charlier => 0.0,
            FamilyKind::Meixner => n as f64 * self.mu,
        }
    }

    /// Coefficient of P_{n-1} in the structure relation.
    pub fn struct_beta(&self, n: usize) -> f64 {
        let n = n as f64;
        match self.kind {
            FamilyKind::Charlier => n * self.mu,
            FamilyKind::Meixner => n * self.mu * (n - 1.0 + self.gamma) / (1.0 - self.mu),
        }
    }

    /// sigma(x) of the hypergeometric-type difference equation.
    pub fn sigma(&self, x: f64) -> f64 {
        x
    }

    /// tau(x) of the hypergeometric-type difference equation.
    pub fn tau(&self, x: f64) -> f64 {
        match self.kind {
            FamilyKind::Charlier => self.mu - x,
            FamilyKind::Meixner => (self.mu - 1.0) * x + self.mu * self.gamma,
        }
    }

    /// Eigenvalue lambda_n of the hypergeometric-type equation.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        match self.kind {
            FamilyKind::Charlier => n as f64,
            FamilyKind::Meixner => (1.0 - self.mu) * n as f64,
        }
    }

    /// `theta(x) = 1/(sigma(x)+tau(x))`, evaluated from the per-family
    /// closed form (`1/mu` and `1/(mu(x+gamma))`) to avoid the cancellation
    /// of forming sigma+tau at large x.
    pub fn theta(&self, x: f64) -> Result<f64, Error> {
        let denom = match self.kind {
            FamilyKind::Charlier => self.mu,
            FamilyKind::Meixner => self.mu * (x + self.gamma),
        };
        if denom == 0.0 {
            return Err(Error::SingularPoint("sigma + tau vanishes"));
        }
        Ok(1.0 / denom)
    }

    /// Classical-limit nabla-coefficient of the symmetrized difference
    /// equation: `struct_beta_n theta(x) T1 - (1 + struct_alpha_n theta(x)) T2`,
    /// where (T1, T2) expand `D^2 P_n` in {P_n, P_{n-1}}. Assembled from
    /// those parts the pieces are ~theta^2 while the contraction is only
    /// ~theta, so near a theta pole the difference is pure rounding noise;
    /// the per-family closed form keeps full relative accuracy.
    pub(crate) fn sode_nabla_classical(&self, n: usize, x: f64) -> Result<f64, Error> {
        if n <= 1 {
            // D^2 P_1 = 0, so both expansion coefficients vanish.
            return Ok(0.0);
        }
        let nf = n as f64;
        match self.kind {
            FamilyKind::Charlier => Ok(nf * (self.mu - x - 1.0) / self.mu),
            FamilyKind::Meixner => {
                // Grouped so x = -1 yields mu*gamma exactly rather than a
                // cancelled difference.
                let d0 = x + self.gamma;
                let d1 = (x + 1.0) + self.gamma;
                if d0 == 0.0 || d1 == 0.0 {
                    return Err(Error::SingularPoint("sigma + tau vanishes"));
                }
                Ok(nf * (nf - 1.0 + self.gamma) * (self.mu * d1 - (x + 1.0))
                    / (self.mu * (1.0 - self.mu) * d0 * d1))
            }
        }
    }

    /// Natural log of the weight at integer grid points.
    pub fn rho_ln(&self, x: usize) -> f64 {
        let xf = x as f64;
        match self.kind {
            FamilyKind::Charlier => -self.mu + xf * ln(self.mu) - ln_gamma(xf + 1.0),
            FamilyKind::Meixner => {
                xf * ln(self.mu) + ln_gamma(self.gamma + xf)
                    - ln_gamma(self.gamma)
                    - ln_gamma(xf + 1.0)
            }
        }
    }

    /// Weight at integer grid points.
    pub fn rho(&self, x: usize) -> f64 {
        exp(self.rho_ln(x))
    }

    /// Natural log of the squared norm of monic P_n.
    pub fn norm_sq_ln(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self.kind {
            FamilyKind::Charlier => ln_gamma(nf + 1.0) + nf * ln(self.mu),
            FamilyKind::Meixner => {
                ln_gamma(nf + 1.0) + ln_gamma(self.gamma + nf) - ln_gamma(self.gamma)
                    + nf * ln(self.mu)
                    - (self.gamma + 2.0 * nf) * log1p(-self.mu)
            }
        }
    }

    /// Squared norm of monic P_n (computed in log space).
    pub fn norm_sq(&self, n: usize) -> f64 {
        exp(self.norm_sq_ln(n))
    }

    /// Monic P_n(x) by forward iteration of the three-term recurrence.
    pub fn eval(&self, n: usize, x: f64) -> f64 {
        self.eval_pair(n, x).0
    }

    /// `(P_n(x), P_{n-1}(x))`, with `P_{-1} = 0`.
    pub fn eval_pair(&self, n: usize, x: f64) -> (f64, f64) {
        let mut prev = 0.0;
        let mut cur = 1.0;
        for k in 0..n {
            let next = self.x_minus_rec_alpha(k, x) * cur - self.rec_beta(k) * prev;
            prev = cur;
            cur = next;
        }
        (cur, prev)
    }

    /// P_n at a non-negative lattice point by the terminating series
    ///
    /// `P_n(x) = sum_k (-1)^{n-k} k! C(n,k) C(x,k) prod_{i=k}^{n-1}(gamma+i) w^{n-k}`
    ///
    /// (`w = mu` for Charlier, `mu/(1-mu)` for Meixner; the product is 1
    /// for Charlier). Unlike the forward recurrence — whose rounding
    /// errors are amplified by ~n! at the near-root lattice points of
    /// small-mu families — the series keeps full relative accuracy there,
    /// which the truncated orthogonality sums need.
    pub fn eval_lattice(&self, n: usize, x: usize) -> f64 {
        let w = match self.kind {
            FamilyKind::Charlier => self.mu,
            FamilyKind::Meixner => self.mu / (1.0 - self.mu),
        };
        let mut acc = CompensatedSum::new();
        for k in 0..=n.min(x) {
            let mut t = factorial(k) * binomial(n, k) * binomial(x, k);
            for _ in k..n {
                t *= w;
            }
            if let FamilyKind::Meixner = self.kind {
                for i in k..n {
                    t *= self.gamma + i as f64;
                }
            }
            if (n - k) % 2 == 1 {
                t = -t;
            }
            acc.add(t); // ascending k: largest terms last at small w
        }
        acc.value()
    }

    /// P_n(x) by the best-conditioned evaluator for the point: the
    /// terminating series on the non-negative lattice (where the
    /// recurrence can lose all relative accuracy near roots), the
    /// recurrence elsewhere.
    pub(crate) fn point_eval(&self, n: usize, x: f64) -> f64 {
        if x >= 0.0 && x <= X_MAX as f64 && x == floor(x) {
            self.eval_lattice(n, x as usize)
        } else {
            self.eval(n, x)
        }
    }

    /// k-th forward difference of P_n at x by binomial expansion, with the
    /// polynomial short-circuits `k > n -> 0` and `k = n -> n!` exact.
    pub fn diff(&self, n: usize, k: usize, x: f64) -> f64 {
        if k > n {
            return 0.0;
        }
        if k == n {
            return factorial(n);
        }
        let mut s = 0.0;
        for m in 0..=k {
            let term = binomial(k, m) * self.point_eval(n, x + m as f64);
            if (k - m) % 2 == 0 {
                s += term;
            } else {
                s -= term;
            }
        }
        s
    }

    /// Reproducing kernel `K_n(x,y) = sum_{k<=n} P_k(x)P_k(y)/||P_k||^2`.
    ///
    /// Off the diagonal (|x-y| > DELTA_CD) the Christoffel-Darboux closed
    /// quotient is used; near it the definitional sum.
    pub fn kernel(&self, n: usize, x: f64, y: f64) -> f64 {
        if abs(x - y) > DELTA_CD {
            let (pn1x, pnx) = (self.point_eval(n + 1, x), self.point_eval(n, x));
            let (pn1y, pny) = (self.point_eval(n + 1, y), self.point_eval(n, y));
            (pn1x * pny - pnx * pn1y) / (self.norm_sq(n) * (x - y))
        } else {
            self.kernel_ij(n, 0, 0, x, y)
        }
    }

    /// Kernel with difference orders:
    /// `K_n^{(i,j)}(x,y) = sum_{k<=n} D^i P_k(x) D^j P_k(y) / ||P_k||^2`.
    pub fn kernel_ij(&self, n: usize, i: usize, j: usize, x: f64, y: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for k in 0..=n {
            acc.add(self.diff(k, i, x) * self.diff(k, j, y) / self.norm_sq(k));
        }
        acc.value()
    }

    /// Truncated weighted series `sum_{x>=0} f(x) rho(x)`.
    ///
    /// Stops once `rho(x)(1+x)^{2 n_cap}` stays below `TAIL_REL` times the
    /// larger of |partial sum| and the largest |term| for `TAIL_RUN`
    /// consecutive x (capped at `X_MAX`). `n_cap` bounds the polynomial
    /// degree of `f`.
    pub fn weighted_sum<F: Fn(usize) -> f64>(&self, f: F, n_cap: usize) -> f64 {
        let mut acc = CompensatedSum::new();
        let mut max_term = 0.0f64;
        let mut run = 0usize;
        for x in 0..=X_MAX {
            let rho = self.rho(x);
            let term = f(x) * rho;
            acc.add(term);
            if abs(term) > max_term {
                max_term = abs(term);
            }
            let anchor = {
                let a = abs(acc.value());
                let m = if a > max_term { a } else { max_term };
                if m > f64::MIN_POSITIVE {
                    m
                } else {
                    f64::MIN_POSITIVE
                }
            };
            let bound = rho * exp(2.0 * n_cap as f64 * log1p(x as f64));
            if bound < TAIL_REL * anchor {
                run += 1;
                if run >= TAIL_RUN {
                    break;
                }
            } else {
                run = 0;
            }
        }
        acc.value()
    }

    /// Residual of the structure relation
    /// `(sigma+tau) D P_n = struct_alpha_n P_n + struct_beta_n P_{n-1}`.
    pub fn verify_structure_relation(&self, n: usize, x: f64) -> Residual {
        let (pn, pm) = self.eval_pair(n, x);
        let st = self.sigma(x) + self.tau(x);
        let lhs = st * self.diff(n, 1, x);
        let t1 = self.struct_alpha(n) * pn;
        let t2 = self.struct_beta(n) * pm;
        Residual::new(lhs - t1 - t2, &[lhs, t1, t2])
    }

    /// Residual of the hypergeometric-type equation
    /// `sigma D∇P_n + tau DP_n + lambda_n P_n = 0`.
    pub fn verify_hypergeometric(&self, n: usize, x: f64) -> Residual {
        let t1 = self.sigma(x) * self.diff(n, 2, x - 1.0); // D∇ = D^2 shifted
        let t2 = self.tau(x) * self.diff(n, 1, x);
        let t3 = self.eigenvalue(n) * self.eval(n, x);
        Residual::new(t1 + t2 + t3, &[t1, t2, t3])
    }
}

/// Truncated classical inner product `sum_x P_n(x) P_m(x) rho(x)`, with
/// the factors evaluated by the lattice series so cancellation across x
/// is genuine rather than noise.
pub fn classical_inner(fam: &FamilyParams, n: usize, m: usize) -> f64 {
    let cap = n.max(m).max(1);
    fam.weighted_sum(|x| fam.eval_lattice(n, x) * fam.eval_lattice(m, x), cap)
}

/// All monic values P_0..P_n at x in one recurrence pass.
pub fn eval_all(fam: &FamilyParams, n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut prev = 0.0;
    let mut cur = 1.0;
    out.push(cur);
    for k in 0..n {
        let next = fam.x_minus_rec_alpha(k, x) * cur - fam.rec_beta(k) * prev;
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}
