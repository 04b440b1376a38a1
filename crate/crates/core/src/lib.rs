//! Random directed and undirected graphs with prescribed degree sequences.
//!
//! The crate bundles everything needed to sample such graphs (approximately)
//! uniformly, measure their second singular value or extreme eigenvalue, and
//! evaluate the Orlicz norms, tail bounds, dispersion statistics and
//! discrepancy certificates that control those spectra.
//!
//! Module map:
//!
//! * [`norms`]: the exponential (`ψ`) and `t ln t` Orlicz norms, the row shift `Δ(Q)`.
//! * [`tailbounds`]: Bennett / Bernstein / Freedman evaluators and the
//!   linear-form deviation bound.
//! * [`graph`]: graph types, degree conditions, feasibility, file formats.
//! * [`sampler`]: exact enumeration and switch-chain sampling.
//! * [`spectral`]: dense reference solvers and matrix-free Lanczos.
//! * [`pstats`]: column/row counts, dispersion vectors, codegrees and the
//!   switching ratio identity.
//! * [`discrepancy`]: edge counts, level sets, light/heavy couples.
//! * [`harness`]: reproducible Monte Carlo experiments and record output.

pub mod discrepancy;
pub mod graph;
pub mod harness;
pub mod matrix;
pub mod norms;
pub mod pstats;
pub mod rng;
pub mod sampler;
pub mod spectral;
pub mod tailbounds;

pub use graph::{DegreeSequencePair, Digraph01, Interval, URegGraph};
pub use matrix::DenseMatrix;
