use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, ELIDE_TOL};
use crate::error::{FslError, Result};
use crate::linalg::{complete_basis, CMatrix};
use crate::synth::ucr::append_state_loader;

/// `|ψ⟩ = Σ_k σ_k (U|k⟩) ⊗ (V|k⟩)` over a top/bottom split of the register.
#[derive(Clone, Debug)]
pub struct SchmidtForm {
    pub left_qubits: usize,
    pub right_qubits: usize,
    /// Nonnegative, descending, `2^right_qubits` entries.
    pub coeffs: Vec<f64>,
    pub u: CMatrix,
    pub v: CMatrix,
}

/// Splits `q` qubits into the top `⌈q/2⌉` and bottom `⌊q/2⌋`.
pub fn schmidt_decompose(target: &[Complex64]) -> Result<SchmidtForm> {
    if !target.len().is_power_of_two() {
        return Err(FslError::NonPowerOfTwoLength(target.len()));
    }
    let q = target.len().trailing_zeros() as usize;
    if q < 2 {
        return Err(FslError::InvalidArgument("Schmidt split needs at least two qubits".into()));
    }
    let (left, right) = (q.div_ceil(2), q / 2);
    let (rows, cols) = (1usize << left, 1usize << right);
    let psi = CMatrix::from_fn(rows, cols, |r, c| target[r * cols + c]);
    let svd = psi.svd(true, true);
    let u_thin = svd.u.expect("requested U");
    let w_adj = svd.v_t.expect("requested Vᵀ");
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let coeffs: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_cols = CMatrix::from_fn(rows, cols, |r, k| u_thin[(r, order[k])]);
    // Ψ = U Σ W†, so the right factor of term k is conj(w_k), i.e. row k of W† transposed.
    let v = CMatrix::from_fn(cols, cols, |r, k| w_adj[(order[k], r)]);
    Ok(SchmidtForm { left_qubits: left, right_qubits: right, coeffs, u: complete_basis(&u_cols), v })
}

/// Appends the Schmidt loader on `qubits` (`qubits[0]` most significant):
/// coefficient load on the low half of the left register, a CNOT per right
/// qubit copying it across, then `U` and `V` as opaque blocks.
pub fn append_schmidt_loader(circ: &mut Circuit, qubits: &[usize], target: &[Complex64]) -> Result<()> {
    let form = schmidt_decompose(target)?;
    let (l, r) = (form.left_qubits, form.right_qubits);
    if qubits.len() != l + r {
        return Err(FslError::DimensionMismatch { expected: l + r, found: qubits.len() });
    }
    let sigma: Vec<Complex64> = form.coeffs.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    let norm = sigma.iter().map(|s| s.norm_sqr()).sum::<f64>().sqrt();
    let sigma: Vec<Complex64> = sigma.into_iter().map(|s| s / norm).collect();
    append_state_loader(circ, &qubits[l - r..l], &sigma)?;
    for i in 0..r {
        circ.push(Gate::cnot(qubits[l - r + i], qubits[l + i]));
    }
    circ.push(Gate::opaque("U", form.u, qubits[..l].to_vec())?);
    circ.push(Gate::opaque("V", form.v, qubits[l..].to_vec())?);
    Ok(())
}

pub fn build_schmidt_circuit(target: &[Complex64]) -> Result<Circuit> {
    if !target.len().is_power_of_two() {
        return Err(FslError::NonPowerOfTwoLength(target.len()));
    }
    let q = target.len().trailing_zeros() as usize;
    let mut c = Circuit::new(q.max(1));
    let qubits: Vec<usize> = (0..q).collect();
    append_schmidt_loader(&mut c, &qubits, target)?;
    c.elide_small_rotations(ELIDE_TOL);
    c.cancel_adjacent_cnots();
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, unitarity_error};
    use crate::sim::{Simulator, Statevector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(q: usize, rng: &mut impl Rng) -> Vec<Complex64> {
        let v: Vec<Complex64> =
            (0..1 << q).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|a| a / n).collect()
    }

    #[test]
    fn product_state_has_rank_one() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = [Complex64::new(s, 0.0), Complex64::new(0.0, s)];
        let b = [Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)];
        let t: Vec<Complex64> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        let f = schmidt_decompose(&t).unwrap();
        assert!((f.coeffs[0] - 1.0).abs() < 1e-12);
        assert!(f.coeffs[1].abs() < 1e-12);
    }

    #[test]
    fn bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let t = vec![Complex64::new(s, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(s, 0.0)];
        let f = schmidt_decompose(&t).unwrap();
        assert!((f.coeffs[0] - s).abs() < 1e-12 && (f.coeffs[1] - s).abs() < 1e-12);
        let c = build_schmidt_circuit(&t).unwrap();
        assert_eq!(c.gate_counts().two_qubit, 1);
        let out = Simulator::new(4).run_from_zero(&c).unwrap();
        assert!(out.fidelity(&Statevector::from_amplitudes(t).unwrap()).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn decomposition_reconstructs_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for q in 2..=5 {
            let t = random_state(q, &mut rng);
            let f = schmidt_decompose(&t).unwrap();
            assert!(unitarity_error(&f.u) < 1e-10 && unitarity_error(&f.v) < 1e-10);
            assert!(f.coeffs.windows(2).all(|w| w[0] >= w[1]));
            assert!((f.coeffs.iter().map(|s| s * s).sum::<f64>() - 1.0).abs() < 1e-10);
            let uv = kron(&f.u, &f.v);
            let rd = 1usize << f.right_qubits;
            let mut diag = nalgebra::DVector::from_element(1 << q, Complex64::new(0.0, 0.0));
            for (k, &s) in f.coeffs.iter().enumerate() {
                diag[k * rd + k] = Complex64::new(s, 0.0);
            }
            let rebuilt = uv * diag;
            for (a, b) in rebuilt.iter().zip(&t) {
                assert!((a - b).norm() < 1e-10, "q={q}");
            }
        }
    }

    #[test]
    fn circuit_loads_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for q in 2..=7 {
            let t = random_state(q, &mut rng);
            let c = build_schmidt_circuit(&t).unwrap();
            let out = Simulator::new(12).run_from_zero(&c).unwrap();
            let f = out.fidelity(&Statevector::from_amplitudes(t).unwrap()).unwrap();
            assert!(f > 1.0 - 1e-9, "q={q}: {f}");
        }
    }
}
