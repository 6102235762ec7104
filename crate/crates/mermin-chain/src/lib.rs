//! Mermin–Klyshko polynomials, sequential unsharp measurements, and chained
//! violations of the Mermin inequality for n-qubit states.
//!
//! The crate simulates scenarios in which one or two parties of an n-partite
//! Bell test are replaced by a chain of independent observers, each performing
//! an unsharp measurement and forwarding the post-measurement state (Lüders
//! rule). For GHZ and W states it constructs per-step sharpness sequences
//! γ_k(θ) such that *every* observer in the chain still certifies multipartite
//! nonlocality (Mermin value > 1), and it verifies the analytic values against
//! a brute-force density-matrix oracle.
//!
//! Module map:
//!
//! * [`linalg`] — dense complex matrices, Pauli operators, tensor products,
//!   Hermitian square roots, density-matrix validation.
//! * [`mermin`] — Mermin–Klyshko operator recursion, closed-form coefficient
//!   tables, Mermin values, classical deterministic bound.
//! * [`luders`] — input-averaged Lüders measurement channels for one chained
//!   slot (single chain) or two (double chain).
//! * [`strategy`] — per-scenario observable assignments, scaling constants
//!   N_n, sharpness sequences γ_k(θ), and the θ-window search.
//! * [`scenarios`] — end-to-end runs producing per-step violation reports
//!   with both analytic and brute-force Mermin values.
//!
//! The crate is `no_std` (with `alloc`); all I/O and serialization live in the
//! companion CLI crate.

#![cfg_attr(not(test), no_std)]
#![warn(missing_docs)]

extern crate alloc;

mod error;

pub mod linalg;
pub mod luders;
pub mod mermin;
pub mod scenarios;
pub mod strategy;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
