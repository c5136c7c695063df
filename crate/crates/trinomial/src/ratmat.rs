//! Small exact linear-algebra helpers over the rationals.
//!
//! Dense row-major matrices, Gauss–Jordan elimination, and nullspace bases.
//! Everything here is desk-scale; no pivot-size heuristics are needed because
//! all arithmetic is exact.

use num::{BigRational, One, Zero};

pub(crate) type QVec = Vec<BigRational>;
pub(crate) type QMat = Vec<QVec>;

/// Reduced row echelon form in place; returns the pivot column of each
/// nonzero row, in order.
pub(crate) fn rref(mat: &mut QMat) -> Vec<usize> {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(p) = (row..rows).find(|&i| !mat[i][col].is_zero()) else {
            continue;
        };
        mat.swap(row, p);
        let inv = mat[row][col].recip();
        for x in &mut mat[row] {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != row && !mat[i][col].is_zero() {
                let factor = mat[i][col].clone();
                for c in col..cols {
                    let delta = &factor * &mat[row][c];
                    mat[i][c] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Basis of the right nullspace of `mat` (with `cols` columns), one vector
/// per free column, in free-column order. Each vector has a 1 in its free
/// column, making the basis canonical.
pub(crate) fn nullspace(mat: &QMat, cols: usize) -> Vec<QVec> {
    let mut work = mat.clone();
    let pivots = rref(&mut work);
    let mut is_pivot = vec![false; cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for free in 0..cols {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -work[r][free].clone();
        }
        basis.push(v);
    }
    basis
}
