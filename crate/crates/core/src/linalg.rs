//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{FslError, Result};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest entry of `|U†U − I|`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let expect = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - expect).norm());
        }
    }
    worst
}

pub fn ensure_unitary(u: &CMatrix, tol: f64) -> Result<()> {
    let err = unitarity_error(u);
    if err < tol {
        Ok(())
    } else {
        Err(FslError::NotUnitary(err))
    }
}

/// Kronecker product with `a` on the more significant index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Extend `k` orthonormal columns of a `d × k` matrix to a `d × d` unitary.
/// The given columns are kept verbatim as the leading columns.
pub fn complete_basis(cols: &CMatrix) -> CMatrix {
    let d = cols.nrows();
    let mut basis: Vec<nalgebra::DVector<Complex64>> =
        cols.column_iter().map(|c| c.into_owned()).collect();
    for e in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = nalgebra::DVector::from_element(d, ZERO);
        v[e] = ONE;
        // Two Gram-Schmidt sweeps keep the result orthonormal to working precision.
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v / Complex64::new(norm, 0.0));
        }
    }
    CMatrix::from_columns(&basis)
}

/// Eigendecomposition of a unitary matrix: returns `(V, λ)` with `M = V diag(λ) V†`,
/// `V` unitary and `|λ_i| = 1`.
///
/// A normal matrix shares its eigenvectors with the Hermitian combination
/// `Re(M) + r·Im(M)`; a generic `r` separates distinct eigenvalues.
pub fn unitary_eigen(m: &CMatrix) -> (CMatrix, Vec<Complex64>) {
    let d = m.nrows();
    let adj = m.adjoint();
    let herm_part = (m + &adj) * Complex64::new(0.5, 0.0);
    let anti_part = (m - &adj) * Complex64::new(0.0, -0.5);
    let mut best: Option<(f64, CMatrix, Vec<Complex64>)> = None;
    for r in [0.577_215_664_901_532_9, 1.324_717_957_244_746, -0.831_4, 2.174_9] {
        let h = &herm_part + &anti_part * Complex64::new(r, 0.0);
        let eig = nalgebra::SymmetricEigen::new(h);
        let v = eig.eigenvectors;
        let lambdas: Vec<Complex64> = (0..d)
            .map(|i| {
                let col = v.column(i);
                let val = col.dotc(&(m * col));
                val / val.norm()
            })
            .collect();
        let mut resid = 0.0f64;
        let mv = m * &v;
        for i in 0..d {
            for row in 0..d {
                resid = resid.max((mv[(row, i)] - v[(row, i)] * lambdas[i]).norm());
            }
        }
        if resid < 1e-11 {
            return (v, lambdas);
        }
        if best.as_ref().is_none_or(|b| resid < b.0) {
            best = Some((resid, v, lambdas));
        }
    }
    let (_, v, l) = best.expect("at least one attempt");
    (v, l)
}

/// `max |a − e^{iφ} b|` minimized over the global phase (phase taken from `tr(b†a)`).
pub fn phase_insensitive_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let overlap: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y * phase).norm())
        .fold(0.0, f64::max)
}
