//! Statevector simulation and classical post-processing for entanglement
//! spectroscopy: Rényi-entropy estimation circuits, a configurable hardware
//! noise model, symmetry-based post-selection, and eigenvalue reconstruction
//! from power sums, all verified against exact reference computations.

pub mod bits;
pub mod circuits;
pub mod compile;
pub mod error;
pub mod estimators;
pub mod gate;
pub mod noise;
pub mod oracle;
pub mod postselect;
pub mod roots;
pub mod runner;
pub mod statevector;

pub use bits::Bits;
pub use circuits::{Circuit, Layout, Subsystem};
pub use error::{Error, Result};
pub use estimators::{RenyiEstimate, ShotSet, Spectrum};
pub use gate::{Gate, Mat2};
pub use noise::NoiseParams;
pub use oracle::DensityMatrix;
pub use statevector::{StateVector, MAX_QUBITS};
