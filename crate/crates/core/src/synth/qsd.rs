//! Exact unitary synthesis by recursive cosine–sine (quantum Shannon) decomposition.

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, ELIDE_TOL};
use crate::error::{FslError, Result};
use crate::linalg::{complete_basis, ensure_unitary, phase_insensitive_distance, unitary_eigen, CMatrix};
use crate::synth::ucr::{append_uniformly_controlled, Axis};

/// Circuit over `log₂ dim` qubits equal to `u` up to a global phase, using only
/// `RY`, `RZ` and `CNOT`.
pub fn synth_unitary(u: &CMatrix) -> Result<Circuit> {
    let dim = u.nrows();
    if !u.is_square() || !dim.is_power_of_two() || dim < 2 {
        return Err(FslError::NonPowerOfTwoLength(dim));
    }
    ensure_unitary(u, 1e-10)?;
    let q = dim.trailing_zeros() as usize;
    let mut c = Circuit::new(q);
    let qubits: Vec<usize> = (0..q).collect();
    append_unitary(&mut c, &qubits, u);
    c.elide_small_rotations(ELIDE_TOL);
    c.cancel_adjacent_cnots();
    Ok(c)
}

fn is_identity_up_to_phase(u: &CMatrix) -> bool {
    phase_insensitive_distance(u, &CMatrix::identity(u.nrows(), u.ncols())) < 1e-13
}

fn append_unitary(c: &mut Circuit, qubits: &[usize], u: &CMatrix) {
    if is_identity_up_to_phase(u) {
        return;
    }
    if qubits.len() == 1 {
        append_zyz(c, qubits[0], u);
        return;
    }
    let h = u.nrows() / 2;
    let block = |r: usize, col: usize| u.view((r * h, col * h), (h, h)).into_owned();
    let (u00, u01, u10, u11) = (block(0, 0), block(0, 1), block(1, 0), block(1, 1));

    // U00 = L0 C R0.
    let svd = u00.svd(true, true);
    let l0 = svd.u.expect("U requested");
    let r0 = svd.v_t.expect("Vᵀ requested");
    let cos: Vec<f64> = svd.singular_values.iter().map(|s| s.clamp(0.0, 1.0)).collect();

    // U10 R0† = L1 S: orthonormalize its columns, largest sine first.
    let y = &u10 * r0.adjoint();
    let mut order: Vec<usize> = (0..h).collect();
    order.sort_by(|&a, &b| y.column(b).norm().total_cmp(&y.column(a).norm()));
    let mut cols: Vec<(usize, nalgebra::DVector<Complex64>)> = Vec::with_capacity(h);
    for &i in &order {
        let mut v = y.column(i).into_owned();
        if v.norm() < 1e-13 {
            continue;
        }
        for _ in 0..2 {
            for (_, b) in &cols {
                let p = b.dotc(&v);
                v -= b * p;
            }
        }
        let n = v.norm();
        if n < 1e-13 {
            continue;
        }
        cols.push((i, v / Complex64::new(n, 0.0)));
    }
    let mut l1 = CMatrix::zeros(h, h);
    let known: Vec<usize> = cols.iter().map(|(i, _)| *i).collect();
    let full = if cols.is_empty() {
        CMatrix::identity(h, h)
    } else {
        complete_basis(&CMatrix::from_columns(&cols.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>()))
    };
    let mut spare = known.len();
    for i in 0..h {
        let src = match known.iter().position(|&k| k == i) {
            Some(p) => p,
            None => {
                spare += 1;
                spare - 1
            }
        };
        l1.set_column(i, &full.column(src));
    }
    let sin: Vec<f64> = (0..h).map(|i| l1.column(i).dotc(&y.column(i)).re).collect();

    // R1 = −S L0† U01 + C L1† U11.
    let sd = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(h, sin.iter().map(|&s| Complex64::new(s, 0.0))));
    let cd = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(h, cos.iter().map(|&x| Complex64::new(x, 0.0))));
    let r1 = -(&sd * l0.adjoint() * &u01) + &cd * l1.adjoint() * &u11;

    let angles: Vec<f64> = sin.iter().zip(&cos).map(|(s, co)| 2.0 * s.atan2(*co)).collect();
    append_multiplexed(c, qubits, &r0, &r1);
    append_uniformly_controlled(c, Axis::Y, qubits[0], &qubits[1..], &angles, false).expect("angle count");
    append_multiplexed(c, qubits, &l0, &l1);
}

/// Appends `A0 ⊕ A1` controlled by `qubits[0]` as `(I⊗W)`, a multiplexed `RZ`
/// on `qubits[0]`, then `(I⊗V)`, where `A0 = V D W` and `A1 = V D† W`.
fn append_multiplexed(c: &mut Circuit, qubits: &[usize], a0: &CMatrix, a1: &CMatrix) {
    let rest = &qubits[1..];
    if (a0 - a1).norm() < 1e-12 {
        append_unitary(c, rest, a0);
        return;
    }
    let (v, lambdas) = unitary_eigen(&(a0 * a1.adjoint()));
    let phases: Vec<f64> = lambdas.iter().map(|l| l.arg()).collect();
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        phases.len(),
        phases.iter().map(|&p| Complex64::from_polar(1.0, p / 2.0)),
    ));
    let w = &d * v.adjoint() * a1;
    append_unitary(c, rest, &w);
    // D ⊕ D† is RZ(−φ_i) on qubits[0] for control value i.
    let angles: Vec<f64> = phases.iter().map(|p| -p).collect();
    append_uniformly_controlled(c, Axis::Z, qubits[0], rest, &angles, false).expect("angle count");
    append_unitary(c, rest, &v);
}

/// `u = e^{iγ} RZ(a) RY(b) RZ(c)`; emits `RZ(c)`, `RY(b)`, `RZ(a)` in time order.
fn append_zyz(c: &mut Circuit, q: usize, u: &CMatrix) {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let s = det.sqrt();
    let (u00, u10, u11) = (u[(0, 0)] / s, u[(1, 0)] / s, u[(1, 1)] / s);
    // In SU(2), u11 = e^{i(a+c)/2} cos(b/2) and u10 = e^{i(a−c)/2} sin(b/2).
    let b = 2.0 * u10.norm().atan2(u00.norm());
    let sum = if u11.norm() > 1e-14 { 2.0 * u11.arg() } else { 0.0 };
    let diff = if u10.norm() > 1e-14 { 2.0 * u10.arg() } else { 0.0 };
    let (a, cz) = ((sum + diff) / 2.0, (sum - diff) / 2.0);
    c.push(Gate::rz(q, cz));
    c.push(Gate::ry(q, b));
    c.push(Gate::rz(q, a));
}
