//! Superoperators on row-major vectorized density matrices
//! (`vec(ρ)[i·n + j] = ρ_ij`), and the null-space steady-state solver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{DamsError, Result};
use crate::system::CMatrix;

pub type CVector = DVector<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn vectorize(rho: &CMatrix) -> CVector {
    let n = rho.nrows();
    CVector::from_fn(n * n, |k, _| rho[(k / n, k % n)])
}

pub fn unvectorize(v: &CVector, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

/// `ρ ↦ A ρ B`.
pub fn sandwich(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(&b.transpose())
}

fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `ρ ↦ −i[H, ρ]`.
pub fn hamiltonian_super(h: &CMatrix) -> CMatrix {
    let id = identity(h.nrows());
    let l = h.kronecker(&id) - id.kronecker(&h.transpose());
    l * (-I)
}

/// `ρ ↦ JρJ† − ½{J†J, ρ}`.
pub fn dissipator_super(j: &CMatrix) -> CMatrix {
    let id = identity(j.nrows());
    let jdj = j.adjoint() * j;
    let half = Complex64::new(0.5, 0.0);
    j.kronecker(&j.conjugate()) - (jdj.kronecker(&id) + id.kronecker(&jdj.transpose())) * half
}

/// Full Lindblad generator for Hamiltonian `h` and jump operators `jumps`.
pub fn lindbladian<'a>(h: &CMatrix, jumps: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    let mut l = hamiltonian_super(h);
    for j in jumps {
        l += dissipator_super(j);
    }
    l
}

/// Drive superoperator `ρ ↦ −i (a/2)[A, ρ]`, used for the probe sidebands.
pub fn drive_super(a: &CMatrix, amplitude: f64) -> CMatrix {
    hamiltonian_super(a) * Complex64::new(amplitude / 2.0, 0.0)
}

/// Stationary state of `l` reached from `initial`.
///
/// The null space of `l` is found by SVD (relative threshold `1e-10`). When it
/// is degenerate the result is the spectral projection of `initial` onto it,
/// which is the long-time limit of `exp(l t) initial` for a semisimple zero
/// eigenvalue. The returned matrix is Hermitized and has unit trace.
pub fn steady_state(l: &CMatrix, n: usize, initial: &CMatrix) -> Result<CMatrix> {
    let svd = l.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let null: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= 1e-10 * s_max.max(f64::MIN_POSITIVE))
        .map(|(k, _)| k)
        .collect();
    if null.is_empty() {
        let s_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        return Err(DamsError::NoSteadyState(format!(
            "smallest singular value {s_min:.3e} of {s_max:.3e}"
        )));
    }
    let dim = l.nrows();
    let k = null.len();
    let right = DMatrix::from_fn(dim, k, |r, c| v_t[(null[c], r)].conj());
    let left = DMatrix::from_fn(dim, k, |r, c| u[(r, null[c])]);

    let rho0 = vectorize(initial);
    let x = if k == 1 {
        right.column(0).into_owned()
    } else {
        let overlap = left.adjoint() * &right;
        let coeff = overlap
            .lu()
            .solve(&(left.adjoint() * &rho0))
            .ok_or_else(|| DamsError::NoSteadyState("defective zero eigenvalue".into()))?;
        &right * coeff
    };
    let rho = unvectorize(&x, n);
    let tr = rho.trace();
    if tr.norm() < 1e-14 {
        return Err(DamsError::NoSteadyState("stationary vector has zero trace".into()));
    }
    let rho = rho / tr;
    Ok((&rho + rho.adjoint()) * Complex64::new(0.5, 0.0))
}
