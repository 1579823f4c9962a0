//! Spectral Picard solver for the generalized BBM equation
//! `u_t - u_xxt + u_x + u^{p-1} u_x = 0` with quasi-periodic initial data,
//! together with the combinatorial and analytic tools used to verify it.
//!
//! Fourier coefficients `c(t, n)`, `n` in `Z^nu`, obey
//! `c' = lambda(n) c + (lambda(n)/p) c^{*p}` with
//! `lambda(n) = -i<n>/(1 + <n>^2)`. [`picard`] solves the Duhamel form of that
//! system on a truncated lattice; [`oracle`] integrates the same system with
//! RK4; [`combinatorics`] expands the Picard iterates as weighted trees.

pub mod bounds;
pub mod combinatorics;
pub mod io;
pub mod lattice;
pub mod oracle;
pub mod picard;
pub mod spectral;

pub use lattice::{FrequencyVector, MultiIndex, Truncation};
pub use picard::{solve, SolverConfig, TimeGridField};
pub use spectral::{CoeffField, DecayProfile};
