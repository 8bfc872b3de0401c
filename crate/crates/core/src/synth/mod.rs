//! Circuit synthesis: state loaders, unitary synthesis and the inverse QFT.

pub mod qft;
pub mod qsd;
pub mod schmidt;
pub mod ucr;

pub use qft::build_inverse_qft;
pub use qsd::synth_unitary;
pub use schmidt::{build_schmidt_circuit, schmidt_decompose, SchmidtForm};
pub use ucr::{build_ucr_circuit, gray_transform, inverse_gray_transform, mottonen_angles, UcrAngles};

use crate::circuit::Circuit;
use crate::error::Result;

/// Replaces every opaque block with its exact gate-level synthesis.
pub fn decompose_opaque(c: &Circuit) -> Result<Circuit> {
    c.map_opaque(synth_unitary)
}
