//! Dispersive qubit readout simulator.
//!
//! A rectangular readout pulse is attenuated, filtered by the state-dependent
//! resonator transmission, and read at the carrier bin after white noise from
//! a quantum-limited/thermal amplifier cascade is added. Repeating this for
//! both qubit states yields I-Q ensembles whose overlap is the readout error.
//!
//! The numerics are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar to `f64`, with `*32` variants for single precision.

// `!(x > 0)` is used throughout to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod error;
pub mod fidelity;
pub mod montecarlo;
pub mod noise;
pub mod resonator;
pub mod scalar;
pub mod signal;
pub mod sweep;
pub mod touchstone;
pub mod units;

pub use error::{Error, Result};
pub use resonator::QubitState;
pub use scalar::Real;

pub type Complex = num_complex::Complex<f64>;

pub type Constants = units::Constants<f64>;
pub type TwoPortTable = touchstone::TwoPortTable<f64>;
pub type ResonatorModel = resonator::ResonatorModel<f64>;
pub type DispersivePair = resonator::DispersivePair<f64>;
pub type PulseSpec = signal::PulseSpec<f64>;
pub type GridParams = signal::GridParams<f64>;
pub type SimGrid = signal::SimGrid<f64>;
pub type Spectrum = signal::Spectrum<f64>;
pub type Envelope = signal::Envelope<f64>;
pub type NoiseSource = noise::NoiseSource<f64>;
pub type ChainConfig = chain::ChainConfig<f64>;
pub type IQEnsemble = montecarlo::IQEnsemble<f64>;
pub type BlobStats = fidelity::BlobStats<f64>;
pub type SweepRow = sweep::SweepRow<f64>;
pub type CalibrationPoint = sweep::CalibrationPoint<f64>;
pub type CalibrationTarget = sweep::CalibrationTarget<f64>;

pub type PulseSpec32 = signal::PulseSpec<f32>;
pub type GridParams32 = signal::GridParams<f32>;
pub type ChainConfig32 = chain::ChainConfig<f32>;
pub type IQEnsemble32 = montecarlo::IQEnsemble<f32>;
pub type SweepRow32 = sweep::SweepRow<f32>;
