//! Uniformly controlled rotations and the amplitude-and-phase state loader
//! built from them.

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, ELIDE_TOL};
use crate::error::{FslError, Result};

/// Angles of the rotation cascade that prepares a `q`-qubit state.
///
/// Level `ℓ` rotates qubit `ℓ` conditioned on qubits `0..ℓ` (qubit 0 the most
/// significant control bit), so both per-level vectors have length `2^ℓ`.
#[derive(Clone, Debug, PartialEq)]
pub struct UcrAngles {
    pub alpha_y: Vec<Vec<f64>>,
    pub alpha_z: Vec<Vec<f64>>,
    /// Twice the mean phase; `RZ(−global_phase)` on `|0⟩` restores it exactly.
    pub global_phase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Y,
    Z,
}

fn num_qubits_of(len: usize) -> Result<usize> {
    if !len.is_power_of_two() {
        return Err(FslError::NonPowerOfTwoLength(len));
    }
    Ok(len.trailing_zeros() as usize)
}

pub fn mottonen_angles(target: &[Complex64]) -> Result<UcrAngles> {
    let q = num_qubits_of(target.len())?;
    let mags: Vec<f64> = target.iter().map(|a| a.norm_sqr()).collect();
    let total: f64 = mags.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(FslError::NonUnitNorm(total));
    }
    let phases: Vec<f64> = target.iter().map(|a| if a.norm_sqr() > 0.0 { a.arg() } else { 0.0 }).collect();
    let mut alpha_y = Vec::with_capacity(q);
    let mut alpha_z = Vec::with_capacity(q);
    for level in 0..q {
        let block = 1usize << (q - level);
        let half = block / 2;
        let mut ys = Vec::with_capacity(1 << level);
        let mut zs = Vec::with_capacity(1 << level);
        for c in 0..(1usize << level) {
            let lo = c * block;
            let lower: f64 = mags[lo..lo + half].iter().sum();
            let upper: f64 = mags[lo + half..lo + block].iter().sum();
            let mass = lower + upper;
            ys.push(if mass > 0.0 { 2.0 * (upper / mass).clamp(0.0, 1.0).sqrt().asin() } else { 0.0 });
            let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
            zs.push(mean(&phases[lo + half..lo + block]) - mean(&phases[lo..lo + half]));
        }
        alpha_y.push(ys);
        alpha_z.push(zs);
    }
    let global_phase = 2.0 * phases.iter().sum::<f64>() / phases.len() as f64;
    Ok(UcrAngles { alpha_y, alpha_z, global_phase })
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// In-place unnormalized Walsh–Hadamard transform.
fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let (s, d) = (*x + *y, *x - *y);
                *x = s;
                *y = d;
            }
        }
        h *= 2;
    }
}

/// `θ_k = 2^{-j} Σ_ℓ (−1)^{ℓ·g_k} α_ℓ` with `g_k` the binary-reflected Gray code.
pub fn gray_transform(alpha: &[f64]) -> Result<Vec<f64>> {
    let j = num_qubits_of(alpha.len())?;
    let mut w = alpha.to_vec();
    walsh_hadamard(&mut w);
    let scale = 1.0 / (1u64 << j) as f64;
    Ok((0..alpha.len()).map(|k| w[gray(k)] * scale).collect())
}

/// Inverse of [`gray_transform`]: `α = 2^j Mᵀ θ`.
pub fn inverse_gray_transform(theta: &[f64]) -> Result<Vec<f64>> {
    num_qubits_of(theta.len())?;
    let mut by_code = vec![0.0; theta.len()];
    for (k, &t) in theta.iter().enumerate() {
        by_code[gray(k)] = t;
    }
    walsh_hadamard(&mut by_code);
    Ok(by_code)
}

/// Control index (into `controls`) of the CNOT that follows rotation `i`.
fn cnot_control(i: usize, j: usize) -> usize {
    let len = 1usize << j;
    let flip = gray(i) ^ gray((i + 1) % len);
    j - 1 - flip.trailing_zeros() as usize
}

fn rotation(axis: Axis, target: usize, theta: f64) -> Gate {
    match axis {
        Axis::Y => Gate::ry(target, theta),
        Axis::Z => Gate::rz(target, theta),
    }
}

/// Appends a rotation on `target` whose angle is `angles[x]` when the controls
/// read `x` (`controls[0]` most significant). Uses `2^j` rotations and, for
/// `j ≥ 1`, `2^j` CNOTs; the last CNOT is controlled by `controls[0]`.
/// `reversed` emits the mirrored sequence, which implements the same operator
/// and starts with that CNOT instead.
pub fn append_uniformly_controlled(
    circ: &mut Circuit,
    axis: Axis,
    target: usize,
    controls: &[usize],
    angles: &[f64],
    reversed: bool,
) -> Result<()> {
    let j = controls.len();
    if angles.len() != 1 << j {
        return Err(FslError::DimensionMismatch { expected: 1 << j, found: angles.len() });
    }
    if j == 0 {
        circ.push(rotation(axis, target, angles[0]));
        return Ok(());
    }
    let theta = gray_transform(angles)?;
    let steps = 1usize << j;
    let emit = |i: usize, circ: &mut Circuit| {
        let cnot = Gate::cnot(controls[cnot_control(i, j)], target);
        let rot = rotation(axis, target, theta[i]);
        if reversed {
            circ.push(cnot);
            circ.push(rot);
        } else {
            circ.push(rot);
            circ.push(cnot);
        }
    };
    if reversed {
        (0..steps).rev().for_each(|i| emit(i, circ));
    } else {
        (0..steps).for_each(|i| emit(i, circ));
    }
    Ok(())
}

/// Appends the loader for `target` onto `qubits` (`qubits[0]` most significant)
/// of a circuit assumed to hold `|0…0⟩` there. No peephole pass is run.
///
/// The `Y` and `Z` cascades are interleaved level by level with each `Z` level
/// mirrored, so the CNOT closing `Y_ℓ` meets the identical CNOT opening `Z_ℓ`.
pub fn append_state_loader(circ: &mut Circuit, qubits: &[usize], target: &[Complex64]) -> Result<()> {
    let q = num_qubits_of(target.len())?;
    if qubits.len() != q {
        return Err(FslError::DimensionMismatch { expected: q, found: qubits.len() });
    }
    let angles = mottonen_angles(target)?;
    circ.push(Gate::rz(qubits[0], -angles.global_phase));
    for level in 0..q {
        let controls = &qubits[..level];
        append_uniformly_controlled(circ, Axis::Y, qubits[level], controls, &angles.alpha_y[level], false)?;
        append_uniformly_controlled(circ, Axis::Z, qubits[level], controls, &angles.alpha_z[level], true)?;
    }
    Ok(())
}

/// Standalone loader on `log₂ len` qubits, with zero-angle rotations elided and
/// adjacent CNOT pairs cancelled.
pub fn build_ucr_circuit(target: &[Complex64]) -> Result<Circuit> {
    let q = num_qubits_of(target.len())?;
    if q == 0 {
        return Err(FslError::InvalidArgument("state must span at least one qubit".into()));
    }
    let mut c = Circuit::new(q);
    let qubits: Vec<usize> = (0..q).collect();
    append_state_loader(&mut c, &qubits, target)?;
    c.elide_small_rotations(ELIDE_TOL);
    c.cancel_adjacent_cnots();
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::sim::{Simulator, Statevector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn random_state(q: usize, rng: &mut impl Rng) -> Vec<Complex64> {
        let v: Vec<Complex64> =
            (0..1 << q).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|a| a / n).collect()
    }

    #[test]
    fn zero_state_angles_vanish() {
        let mut t = vec![Complex64::new(0.0, 0.0); 8];
        t[0] = Complex64::new(1.0, 0.0);
        let a = mottonen_angles(&t).unwrap();
        assert!(a.alpha_y.iter().flatten().all(|&x| x == 0.0));
        assert!(a.alpha_z.iter().flatten().all(|&x| x == 0.0));
        assert_eq!(a.global_phase, 0.0);
        let c = build_ucr_circuit(&t).unwrap();
        assert!(c.gates().is_empty());
    }

    #[test]
    fn plus_state_angle() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = mottonen_angles(&[Complex64::new(s, 0.0), Complex64::new(s, 0.0)]).unwrap();
        assert!((a.alpha_y[0][0] - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn gray_transform_small_cases() {
        assert_eq!(gray_transform(&[0.7]).unwrap(), vec![0.7]);
        let t = gray_transform(&[3.0, 1.0]).unwrap();
        assert_eq!(t, vec![2.0, 1.0]);
        assert!(matches!(gray_transform(&[1.0, 2.0, 3.0]), Err(FslError::NonPowerOfTwoLength(3))));
    }

    #[test]
    fn gray_transform_matches_definition_and_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let alpha: Vec<f64> = (0..16).map(|_| rng.gen::<f64>() * 6.0 - 3.0).collect();
        let theta = gray_transform(&alpha).unwrap();
        for (k, &t) in theta.iter().enumerate() {
            let g = k ^ (k >> 1);
            let direct: f64 = alpha
                .iter()
                .enumerate()
                .map(|(l, a)| if (l & g).count_ones() % 2 == 0 { *a } else { -*a })
                .sum::<f64>()
                / 16.0;
            assert!((t - direct).abs() < 1e-12);
        }
        let back = inverse_gray_transform(&theta).unwrap();
        for (a, b) in alpha.iter().zip(back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    /// Block-diagonal matrix of the intended multiplexed rotation, built directly.
    fn multiplexed_oracle(axis: Axis, angles: &[f64]) -> CMatrix {
        let j = angles.len().trailing_zeros() as usize;
        let dim = 2usize << j;
        let mut m = CMatrix::zeros(dim, dim);
        for (x, &a) in angles.iter().enumerate() {
            let r = rotation(axis, 0, a).matrix();
            for r0 in 0..2 {
                for c0 in 0..2 {
                    m[(2 * x + r0, 2 * x + c0)] = r[(r0, c0)];
                }
            }
        }
        m
    }

    fn circuit_matrix(c: &Circuit) -> CMatrix {
        let dim = 1usize << c.num_qubits();
        let sim = Simulator::new(12);
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let out = sim.run(c, Statevector::basis(c.num_qubits(), col)).unwrap();
            for (row, a) in out.amplitudes().iter().enumerate() {
                m[(row, col)] = *a;
            }
        }
        m
    }

    #[test]
    fn gray_circuit_equals_multiplexed_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for axis in [Axis::Y, Axis::Z] {
            for reversed in [false, true] {
                let angles: Vec<f64> = (0..8).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
                let mut c = Circuit::new(4);
                // Controls on qubits 0..3, target last so the oracle's block layout applies.
                append_uniformly_controlled(&mut c, axis, 3, &[0, 1, 2], &angles, reversed).unwrap();
                let diff = (circuit_matrix(&c) - multiplexed_oracle(axis, &angles)).norm();
                assert!(diff < 1e-12, "{axis:?} reversed={reversed}: {diff}");
                let last = if reversed { &c.gates()[0] } else { c.gates().last().unwrap() };
                assert_eq!(last, &Gate::cnot(0, 3));
            }
        }
    }

    #[test]
    fn loader_reproduces_random_states_including_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for q in 1..=6 {
            for _ in 0..10 {
                let t = random_state(q, &mut rng);
                let c = build_ucr_circuit(&t).unwrap();
                let out = Simulator::new(12).run_from_zero(&c).unwrap();
                for (a, b) in out.amplitudes().iter().zip(&t) {
                    assert!((a - b).norm() < 1e-10, "q={q}");
                }
            }
        }
    }

    #[test]
    fn loader_handles_zero_blocks() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut t = vec![Complex64::new(0.0, 0.0); 8];
        t[1] = Complex64::new(0.0, s);
        t[6] = Complex64::new(-s, 0.0);
        let c = build_ucr_circuit(&t).unwrap();
        let out = Simulator::new(8).run_from_zero(&c).unwrap();
        let target = Statevector::from_amplitudes(t).unwrap();
        assert!(out.fidelity(&target).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn counts_after_peephole() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for q in 1..=7 {
            let t = random_state(q, &mut rng);
            let k = build_ucr_circuit(&t).unwrap().gate_counts();
            assert_eq!(k.single_qubit, (1 << (q + 1)) - 1, "q={q}");
            assert_eq!(k.two_qubit, (1 << (q + 1)) - 2 * q - 2, "q={q}");
        }
    }
}
