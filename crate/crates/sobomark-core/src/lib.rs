//! Discrete orthogonal moments of Sobolev-perturbed Charlier and Meixner
//! polynomials, and a dual (robust + fragile) block watermarking scheme
//! built on them.
//!
//! The crate is `no_std` (with `alloc`); all I/O, file formats, and the
//! CLI live in the companion `sobomark` crate.
//!
//! Layer map:
//! - [`family`]: classical monic families (recurrences, weights, kernels)
//! - [`sobolev`]: point-mass perturbed families, connection coefficients,
//!   and the algebraic identity suite
//! - [`moments`]: weighted basis tables and block moment transforms
//! - [`zigzag`], [`chaos`], [`qim`]: scan order, keyed permutation,
//!   lattice modulation
//! - [`img`], [`watermark`], [`metrics`]: pixel pipeline and quality
//!   measures

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod chaos;
pub mod error;
pub mod family;
pub mod img;
pub mod metrics;
pub mod moments;
pub mod numerics;
pub mod qim;
pub mod sobolev;
pub mod watermark;
pub mod zigzag;

pub use chaos::{chaotic_permutation, pwlcm_next, scramble, unscramble, ChaosKey};
pub use error::Error;
pub use family::{FamilyKind, FamilyParams};
pub use img::MultiImage;
pub use metrics::{ber, psnr};
pub use moments::{
    weighted_eval, weighted_recurrence_eval, weighted_recurrence_or_direct, MomentBasis,
};
pub use numerics::{
    backward_diff, binomial, factorial, falling_factorial, forward_diff, CompensatedSum, Residual,
};
pub use qim::{qim_embed, qim_extract};
pub use sobolev::{
    run_identity_suite, IdentityGrid, IdentityKind, IdentityOutcome, SobolevFamily, SobolevParams,
    DEFAULT_N_MAX, EPS_ID,
};
pub use watermark::{
    embed, extract, ChannelPolicy, ExtractReport, WatermarkParams, BLOCK, FRAGILE_SLOTS, WM_BITS,
    WM_SIDE,
};
pub use zigzag::{inverse_zigzag, zigzag, zigzag_indices};
