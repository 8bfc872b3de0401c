use std::f64::consts::PI;

use crate::circuit::{Circuit, Gate};

/// Inverse QFT on `q` qubits: `|p⟩ ↦ 2^{-q/2} Σ_k e^{-2πipk/2^q} |k⟩`.
///
/// The gate body is the adjoint of the swap-free QFT network with wires
/// mirrored, which leaves the output bit-reversed. With `elide_swaps` the
/// reversal is recorded in the output permutation, otherwise it is emitted
/// as SWAP gates.
pub fn build_inverse_qft(q: usize, elide_swaps: bool) -> Circuit {
    assert!(q >= 1, "inverse QFT needs at least one qubit");
    let mut forward = Vec::new();
    for j in 0..q {
        forward.push(Gate::h(j));
        for k in j + 1..q {
            forward.push(Gate::cphase(k, j, PI / (1u64 << (k - j)) as f64));
        }
    }
    let mirror = |x: usize| q - 1 - x;
    let gates: Vec<Gate> = forward
        .iter()
        .rev()
        .map(|g| {
            let inv = g.inverse();
            Gate { kind: inv.kind, qubits: inv.qubits.into_iter().map(mirror).collect() }
        })
        .collect();
    let reversal: Vec<usize> = (0..q).rev().collect();
    let c = Circuit::from_parts(q, gates, reversal).expect("well-formed inverse QFT");
    if elide_swaps {
        c
    } else {
        c.with_explicit_swaps()
    }
}
