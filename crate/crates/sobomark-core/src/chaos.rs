//! Piecewise-linear chaotic map (PWLCM) keystream and the index
//! permutation derived from it.

use crate::error::Error;
use alloc::vec;
use alloc::vec::Vec;

/// Keep iterates strictly inside (0, 1): landing exactly on the boundary
/// fixed points would freeze the orbit.
const NUDGE: f64 = 1e-13;

/// Iteration budget per permutation slot before the key is declared
/// degenerate.
const BUDGET_PER_SLOT: usize = 64;

/// One step of the piecewise-linear chaotic map with control parameter p:
/// `x/p` on (0,p], `(x-p)/(1/2-p)` on (p,1/2], mirrored for x > 1/2.
pub fn pwlcm_next(x: f64, p: f64) -> Result<f64, Error> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::Domain("control parameter must lie in (0, 0.5)"));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain("chaotic state must lie in (0, 1)"));
    }
    let y = if x <= p {
        x / p
    } else if x <= 0.5 {
        (x - p) / (0.5 - p)
    } else {
        return pwlcm_next(1.0 - x, p);
    };
    Ok(if y <= 0.0 {
        NUDGE
    } else if y >= 1.0 {
        1.0 - NUDGE
    } else {
        y
    })
}

/// Secret state of the chaotic keystream.
#[derive(Clone, Copy, Debug)]
pub struct ChaosKey {
    x0: f64,
    mu_c: f64,
}

impl ChaosKey {
    /// Requires 0 < x0 < 1 and 0 < mu_c < 0.5, excluding the two initial
    /// states (x0 = mu_c, x0 = 0.5) that map straight onto a boundary.
    pub fn new(x0: f64, mu_c: f64) -> Result<Self, Error> {
        if !(mu_c > 0.0 && mu_c < 0.5) {
            return Err(Error::InvalidParams(
                "chaotic control parameter must lie in (0, 0.5)",
            ));
        }
        if !(x0 > 0.0 && x0 < 1.0) {
            return Err(Error::InvalidParams("chaotic seed must lie in (0, 1)"));
        }
        if x0 == mu_c || x0 == 0.5 {
            return Err(Error::InvalidParams(
                "chaotic seed must avoid the map break points",
            ));
        }
        Ok(ChaosKey { x0, mu_c })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn mu_c(&self) -> f64 {
        self.mu_c
    }
}

/// Key-dependent permutation of 0..n: iterate the map, project each state
/// to an index by `floor(x * 1e14) mod n`, and keep first occurrences.
/// Errs with `DegenerateKey` if the orbit cannot fill the permutation
/// within `64 n` iterations.
pub fn chaotic_permutation(key: &ChaosKey, n: usize) -> Result<Vec<usize>, Error> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut x = key.x0;
    let budget = BUDGET_PER_SLOT * n;
    for _ in 0..budget {
        x = pwlcm_next(x, key.mu_c)?;
        let idx = ((x * 1e14) as u64 % n as u64) as usize;
        if !used[idx] {
            used[idx] = true;
            perm.push(idx);
            if perm.len() == n {
                return Ok(perm);
            }
        }
    }
    Err(Error::DegenerateKey)
}

/// Gather: `out[i] = values[perm[i]]`.
pub fn scramble<T: Copy>(values: &[T], perm: &[usize]) -> Vec<T> {
    perm.iter().map(|&p| values[p]).collect()
}

/// Scatter back: `out[perm[i]] = values[i]`.
pub fn unscramble<T: Copy + Default>(values: &[T], perm: &[usize]) -> Vec<T> {
    let mut out = vec![T::default(); values.len()];
    for (i, &p) in perm.iter().enumerate() {
        out[p] = values[i];
    }
    out
}
