//! Exact-rational reference implementations used to pin test expectations.
//!
//! Everything here favours correctness over speed: the polynomial recurrence,
//! difference operators, kernels, and the Sobolev correction are evaluated in
//! `BigRational` arithmetic so the main crate's `f64` code can be compared
//! against an independent ground truth.
//!
//! For the Charlier family every quantity is an exact rational (for rational
//! `mu`). For the Meixner family every quantity is rational except the common
//! factor `(1-mu)^gamma` appearing in the norms; that constant is computed
//! once by rational Taylor series (`ln(1-mu)` followed by `exp`) to 60+
//! significant digits and then rounded to denominator `10^65` so subsequent
//! arithmetic stays fast. All downstream operations are exact over that one
//! approximate constant, which keeps results reliable to well over 50
//! significant digits — far beyond the 1e-10 comparisons made by tests.

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

use num_traits::{One, Signed, ToPrimitive, Zero};

/// Which classical family the oracle models.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Kind {
    Charlier,
    Meixner,
}

/// Parse a decimal string such as `"0.0007"`, `"1e-47"`, or `"-17"` into an
/// exact rational.
pub fn parse_rational(s: &str) -> BigRational {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().expect("exponent")),
        None => (s, 0i64),
    };
    let neg = mant.starts_with('-');
    let mant = mant.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    let digits: String = [int_part, frac_part].concat();
    let mut num: BigInt = digits.parse().expect("mantissa digits");
    if neg {
        num = -num;
    }
    let shift = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    if shift >= 0 {
        BigRational::from_integer(num * ten.pow(shift as u32))
    } else {
        BigRational::new(num, ten.pow((-shift) as u32))
    }
}

fn rat_i64(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn factorial(n: usize) -> BigInt {
    (1..=n as u64).fold(BigInt::one(), |acc, k| acc * k)
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut num = BigInt::one();
    for i in 0..k {
        num *= n - i;
    }
    num / factorial(k)
}

/// Round `r` to the nearest rational with denominator `10^digits`.
fn round_denominator(r: &BigRational, digits: u32) -> BigRational {
    let scale = BigInt::from(10).pow(digits);
    let scaled = r * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.round().to_integer(), scale)
}

/// `ln(1-mu)` as a rational Taylor series, truncated near 10^-(digits+5).
fn ln_one_minus(mu: &BigRational, digits: u32) -> BigRational {
    let tiny = BigRational::new(BigInt::one(), BigInt::from(10).pow(digits + 5));
    let mut term = mu.clone(); // mu^k
    let mut sum = BigRational::zero();
    let mut k = 1u32;
    loop {
        let contrib = &term / rat_i64(k as i64);
        if contrib.abs() < tiny && k > 1 {
            break;
        }
        sum += &contrib;
        term *= mu;
        term = round_denominator(&term, digits + 20);
        k += 1;
        assert!(k < 100_000, "ln series failed to converge");
    }
    -sum
}

/// `exp(z)` as a rational Taylor series (|z| < 1 in all uses here).
fn exp_series(z: &BigRational, digits: u32) -> BigRational {
    let tiny = BigRational::new(BigInt::one(), BigInt::from(10).pow(digits + 5));
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let mut k = 1i64;
    loop {
        term = &term * z / rat_i64(k);
        term = round_denominator(&term, digits + 20);
        if term.abs() < tiny {
            break;
        }
        sum += &term;
        k += 1;
        assert!(k < 10_000, "exp series failed to converge");
    }
    sum
}

/// Convert a rational of arbitrary magnitude to the nearest `f64` without
/// overflowing on huge numerators/denominators: the quotient is normalized
/// to roughly 80 bits by power-of-two shifts first.
pub fn to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let num = r.numer().magnitude().clone();
    let den = r.denom().magnitude().clone();
    let shift = num.bits() as i64 - den.bits() as i64 - 80;
    let (n2, d2) = if shift >= 0 {
        (num, den << shift as u64)
    } else {
        (num << (-shift) as u64, den)
    };
    let q = n2 / d2;
    let qf = q.to_f64().expect("80-bit quotient fits f64");
    let v = if shift.abs() > 1030 {
        if shift > 0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        qf * 2f64.powi(shift as i32)
    };
    if neg {
        -v
    } else {
        v
    }
}

/// Rational-arithmetic model of a classical monic family.
#[derive(Clone, Debug)]
pub struct OracleFamily {
    kind: Kind,
    mu: BigRational,
    gamma: BigRational,
    /// `(1-mu)^{-gamma}` to ~60 digits (Meixner); exactly 1 for Charlier.
    inv_cgam: BigRational,
}

impl OracleFamily {
    pub fn charlier(mu: &str) -> Self {
        let mu = parse_rational(mu);
        assert!(mu.is_positive(), "Charlier needs mu > 0");
        OracleFamily {
            kind: Kind::Charlier,
            mu,
            gamma: BigRational::zero(),
            inv_cgam: BigRational::one(),
        }
    }

    pub fn meixner(mu: &str, gamma: &str) -> Self {
        let mu = parse_rational(mu);
        let gamma = parse_rational(gamma);
        assert!(
            mu.is_positive() && mu < BigRational::one(),
            "Meixner needs 0 < mu < 1"
        );
        assert!(gamma.is_positive(), "Meixner needs gamma > 0");
        let digits = 70;
        let z = &gamma * ln_one_minus(&mu, digits);
        let cgam = exp_series(&z, digits); // (1-mu)^gamma
        let inv_cgam = round_denominator(&(BigRational::one() / cgam), 65);
        OracleFamily {
            kind: Kind::Meixner,
            mu,
            gamma,
            inv_cgam,
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    /// Recurrence coefficient alpha_n.
    pub fn alpha(&self, n: usize) -> BigRational {
        let n = rat_i64(n as i64);
        match self.kind {
            Kind::Charlier => n + &self.mu,
            Kind::Meixner => {
                (&n * (BigRational::one() + &self.mu) + &self.mu * &self.gamma)
                    / (BigRational::one() - &self.mu)
            }
        }
    }

    /// Recurrence coefficient beta_n.
    pub fn beta(&self, n: usize) -> BigRational {
        let nr = rat_i64(n as i64);
        match self.kind {
            Kind::Charlier => nr * &self.mu,
            Kind::Meixner => {
                let d = &self.mu - BigRational::one();
                nr.clone() * &self.mu * (nr - BigRational::one() + &self.gamma) / (&d * &d)
            }
        }
    }

    /// Squared norm of the monic polynomial of degree `n`.
    pub fn norm_sq(&self, n: usize) -> BigRational {
        let fact = BigRational::from_integer(factorial(n));
        match self.kind {
            Kind::Charlier => {
                let mut p = BigRational::one();
                for _ in 0..n {
                    p *= &self.mu;
                }
                fact * p
            }
            Kind::Meixner => {
                // n! (gamma)_n mu^n / (1-mu)^{2n} * (1-mu)^{-gamma}
                let mut poch = BigRational::one();
                for i in 0..n {
                    poch *= &self.gamma + rat_i64(i as i64);
                }
                let om = BigRational::one() - &self.mu;
                let mut p = BigRational::one();
                for _ in 0..n {
                    p *= &self.mu / (&om * &om);
                }
                fact * poch * p * &self.inv_cgam
            }
        }
    }

    /// Monic P_n(x) by forward recurrence.
    pub fn eval(&self, n: usize, x: &BigRational) -> BigRational {
        let mut prev = BigRational::zero();
        let mut cur = BigRational::one();
        for k in 0..n {
            let next = (x - self.alpha(k)) * &cur - self.beta(k) * &prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    /// k-th forward difference of P_n at x (binomial expansion; zero for k > n).
    pub fn diff(&self, n: usize, k: usize, x: &BigRational) -> BigRational {
        if k > n {
            return BigRational::zero();
        }
        let mut sum = BigRational::zero();
        for m in 0..=k {
            let c = BigRational::from_integer(binomial(k, m));
            let v = self.eval(n, &(x + rat_i64(m as i64)));
            if (k - m) % 2 == 0 {
                sum += c * v;
            } else {
                sum -= c * v;
            }
        }
        sum
    }

    /// Kernel with difference orders: sum_{k<=n} D^i P_k(x) D^j P_k(y) / ||P_k||^2.
    pub fn kernel_ij(
        &self,
        n: usize,
        i: usize,
        j: usize,
        x: &BigRational,
        y: &BigRational,
    ) -> BigRational {
        let mut sum = BigRational::zero();
        for k in 0..=n {
            sum += self.diff(k, i, x) * self.diff(k, j, y) / self.norm_sq(k);
        }
        sum
    }
}

/// Rational-arithmetic model of the Sobolev-type construction.
#[derive(Clone, Debug)]
pub struct OracleSobolev {
    pub fam: OracleFamily,
    a: BigRational,
    lam: BigRational,
    j: usize,
}

impl OracleSobolev {
    pub fn new(fam: OracleFamily, alpha: &str, lambda: &str, j: usize) -> Self {
        let a = parse_rational(alpha);
        let lam = parse_rational(lambda);
        assert!(a.is_negative(), "alpha must be negative");
        assert!(lam.is_positive(), "lambda must be positive");
        OracleSobolev { fam, a, lam, j }
    }

    /// Correction factor c_n = lambda D^j P_n(a) / (1 + lambda K_{n-1}^{(j,j)}(a,a)).
    pub fn c(&self, n: usize) -> BigRational {
        if n == 0 {
            return BigRational::zero();
        }
        let k = self.fam.kernel_ij(n - 1, self.j, self.j, &self.a, &self.a);
        &self.lam * self.fam.diff(n, self.j, &self.a) / (BigRational::one() + &self.lam * k)
    }

    /// Sobolev-type polynomial S_n(x) via the connection formula.
    pub fn eval(&self, n: usize, x: &BigRational) -> BigRational {
        if n == 0 {
            return BigRational::one();
        }
        self.fam.eval(n, x) - self.c(n) * self.fam.kernel_ij(n - 1, 0, self.j, x, &self.a)
    }

    /// Closed-form squared Sobolev norm:
    /// ||P_n||^2 + lambda (D^j P_n(a))^2 / (1 + lambda K_{n-1}^{(j,j)}(a,a)).
    pub fn norm_sq(&self, n: usize) -> BigRational {
        if n == 0 {
            let base = self.fam.norm_sq(0);
            return if self.j == 0 { base + &self.lam } else { base };
        }
        let k = self.fam.kernel_ij(n - 1, self.j, self.j, &self.a, &self.a);
        let d = self.fam.diff(n, self.j, &self.a);
        self.fam.norm_sq(n) + &self.lam * &d * &d / (BigRational::one() + &self.lam * k)
    }
}
