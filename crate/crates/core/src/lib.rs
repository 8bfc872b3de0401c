//! Fourier series loading.
//!
//! Compiles a truncated Fourier series of a (possibly multi-dimensional,
//! complex-valued) function into an explicit state-preparation circuit:
//! a small coefficient loader on `D(m+1)` qubits, a CNOT fan-out that
//! zero-pads the spectrum, and an inverse QFT per dimension. The crate also
//! ships the pieces needed to check the result end to end: a dense
//! statevector simulator, exact truncation infidelities, analytic bounds and
//! gate/depth accounting.
//!
//! Conventions used throughout:
//!
//! * qubit 0 is the most significant bit of a basis index;
//! * dimension `d` of a `D`-dimensional grid occupies qubits `d*n .. (d+1)*n`;
//! * grid samples are stored row-major with dimension 0 slowest, which is the
//!   same order as statevector indices.

pub mod circuit;
pub mod compile;
pub mod error;
pub mod fourier;
pub mod frqi;
pub mod funcs;
pub mod linalg;
pub mod sim;
pub mod synth;

pub use circuit::{Circuit, Gate, GateCounts, GateKind};
pub use compile::{CompileReport, FanOut, FslPlan, Loader, NonPeriodic};
pub use error::{FslError, Result};
pub use fourier::{FourierSpec, GridFunction, SpectralTail, Spectrum};
pub use sim::{ShotHistogram, Simulator, Statevector};

pub use num_complex::Complex64;
