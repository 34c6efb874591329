//! Exact arithmetic for power-free polynomial values and ergodic averages
//! taken along the number of prime factors Ω(n).
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is single
//! threaded and deterministic; the `powerfree` crate drives the segmented
//! routines in parallel and carries the file formats and the CLI.
//!
//! Module map:
//!
//! * [`arith`]: segmented sieves for Ω, μ, λ and squarefree masks.
//! * [`poly`]: exact integer polynomials, fixed divisors, resultants,
//!   irreducibility certificates.
//! * [`local_roots`]: roots and root counts of f modulo p and p^k.
//! * [`kfree`]: k-free value sieves and the S1/S2 and E_f tail diagnostics.
//! * [`density`]: Euler products with two-sided tail intervals.
//! * [`dynamics`]: uniquely ergodic model systems and orbit tables.
//! * [`ergodic`]: Ω-histograms, ergodic averages and convergence reports.
#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

pub mod arith;
pub mod bitset;
pub mod density;
pub mod dynamics;
pub mod ergodic;
mod error;
pub mod factor;
pub mod kfree;
pub mod local_roots;
pub mod poly;
pub mod zp;

pub use bitset::BitSet;
pub use error::{Error, Result};
pub use poly::IntPolynomial;
