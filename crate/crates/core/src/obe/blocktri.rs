//! Block-tridiagonal solve, eliminating from both ends toward a chosen
//! center block.
//!
//! Row block `b` reads `lower(b) x[b−1] + diag(b) x[b] + upper(b) x[b+1] = r[b]`.
//! Eliminating inward from both ends means the center block is solved last,
//! with both neighbours folded in. That matters for harmonic balance, where
//! the center block on its own can be singular (dark states) while the full
//! system is not.

use nalgebra::linalg::LU;
use nalgebra::Dyn;
use num_complex::Complex64;

use crate::error::{DamsError, Result};
use crate::liouville::CVector;
use crate::system::CMatrix;

/// Below this ratio of smallest to largest LU pivot a block counts as singular.
pub const PIVOT_FLOOR: f64 = 1e-13;

pub struct Solution {
    pub blocks: Vec<CVector>,
    /// Smallest pivot ratio met during elimination.
    pub min_pivot_ratio: f64,
}

fn factor(m: CMatrix, context: &str, b: usize, worst: &mut f64) -> Result<LU<Complex64, Dyn, Dyn>> {
    let lu = m.lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..u.nrows() {
        let p = u[(i, i)].norm();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    *worst = worst.min(ratio);
    if !(ratio > PIVOT_FLOOR) {
        return Err(DamsError::Singular { context: format!("{context}, block {b}"), pivot_ratio: ratio });
    }
    Ok(lu)
}

fn solve_mat(lu: &LU<Complex64, Dyn, Dyn>, m: &CMatrix) -> CMatrix {
    lu.solve(m).expect("factor checked pivots")
}

fn solve_vec(lu: &LU<Complex64, Dyn, Dyn>, v: &CVector) -> CVector {
    lu.solve(v).expect("factor checked pivots")
}

/// Solves the system with `n_blocks` blocks, eliminating toward `center`.
/// `lower(0)` and `upper(n_blocks − 1)` are never called.
pub fn solve<D, L, U>(
    n_blocks: usize,
    center: usize,
    diag: D,
    lower: L,
    upper: U,
    rhs: &[CVector],
    context: &str,
) -> Result<Solution>
where
    D: Fn(usize) -> CMatrix,
    L: Fn(usize) -> CMatrix,
    U: Fn(usize) -> CMatrix,
{
    assert!(center < n_blocks && rhs.len() == n_blocks);
    let mut worst = f64::INFINITY;

    // Top: x[b] = X[b] x[b+1] + g[b] for b < center.
    let mut xs: Vec<CMatrix> = Vec::with_capacity(center);
    let mut gs: Vec<CVector> = Vec::with_capacity(center);
    for b in 0..center {
        let mut s = diag(b);
        let mut r = rhs[b].clone();
        if b > 0 {
            let lo = lower(b);
            s += &lo * &xs[b - 1];
            r -= &lo * &gs[b - 1];
        }
        let lu = factor(s, context, b, &mut worst)?;
        xs.push(-solve_mat(&lu, &upper(b)));
        gs.push(solve_vec(&lu, &r));
    }

    // Bottom: x[b] = Y[b] x[b−1] + h[b] for b > center, stored from the end.
    let mut ys: Vec<CMatrix> = Vec::with_capacity(n_blocks - center - 1);
    let mut hs: Vec<CVector> = Vec::with_capacity(n_blocks - center - 1);
    for b in (center + 1..n_blocks).rev() {
        let mut t = diag(b);
        let mut r = rhs[b].clone();
        if b + 1 < n_blocks {
            let up = upper(b);
            t += &up * ys.last().unwrap();
            r -= &up * hs.last().unwrap();
        }
        let lu = factor(t, context, b, &mut worst)?;
        ys.push(-solve_mat(&lu, &lower(b)));
        hs.push(solve_vec(&lu, &r));
    }
    ys.reverse();
    hs.reverse();
    // ys[j] belongs to block center + 1 + j.

    let mut c = diag(center);
    let mut r = rhs[center].clone();
    if center > 0 {
        let lo = lower(center);
        c += &lo * &xs[center - 1];
        r -= &lo * &gs[center - 1];
    }
    if center + 1 < n_blocks {
        let up = upper(center);
        c += &up * &ys[0];
        r -= &up * &hs[0];
    }
    let lu = factor(c, context, center, &mut worst)?;

    let mut blocks = vec![CVector::zeros(0); n_blocks];
    blocks[center] = solve_vec(&lu, &r);
    for b in (0..center).rev() {
        blocks[b] = &xs[b] * &blocks[b + 1] + &gs[b];
    }
    for b in center + 1..n_blocks {
        let j = b - center - 1;
        blocks[b] = &ys[j] * &blocks[b - 1] + &hs[j];
    }
    Ok(Solution { blocks, min_pivot_ratio: worst })
}
