//! CRT lattice index codes over the integers.
//!
//! Level codes over distinct prime fields are combined through the Chinese
//! remainder theorem into one code over `Z_q` (Construction pi_A) and lifted
//! to a lattice. Receivers that already know some of the messages decode
//! over a sparser translated sublattice; the resulting side-information gain
//! is what this crate computes, designs for and simulates.
//!
//! Exact geometry (codes, lattices, distances, volumes) uses machine
//! integers. The real-valued parts ([`lattices::IntegerLattice::quantize`],
//! [`sim`]) are generic over [`Real`]; the aliases below fix the common
//! `f64` instantiation.

pub mod codes;
pub mod codespec;
pub mod designer;
mod error;
pub mod index_code;
pub mod lattices;
mod limits;
pub mod ring_arith;
mod scalar;
pub mod sim;

pub use codes::{Codebook, LinearCode};
pub use designer::{DesignKind, UniformDesign};
pub use error::{Error, Result};
pub use index_code::{CrtIndexCode, GainReport, Subset};
pub use lattices::IntegerLattice;
pub use limits::Limits;
pub use ring_arith::{CrtBasis, PrimeSet, SquareDecomposition};
pub use scalar::Real;

/// Channel configuration with `f64` noise parameters.
pub type ChannelConfig = sim::ChannelConfig<f64>;
/// Channel configuration with `f32` noise parameters.
pub type ChannelConfig32 = sim::ChannelConfig<f32>;
/// Simulated error-rate curve in `f64`.
pub type SerCurve = sim::SerCurve<f64>;
/// Simulated error-rate curve in `f32`.
pub type SerCurve32 = sim::SerCurve<f32>;
/// One point of an `f64` error-rate curve.
pub type SerPoint = sim::SerPoint<f64>;
