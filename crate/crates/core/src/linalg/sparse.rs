//! Structure checks on assembled sparse matrices.
//!
//! Large benchmark systems are never densified; their symmetry, skewness
//! and semidefiniteness are certified directly on the CSR data.

use nalgebra_sparse::CsrMatrix;

use crate::scalar::Real;

/// Largest entry of `|M − s·Mᵀ|` for `s = ±1`.
fn transpose_defect<T: Real>(m: &CsrMatrix<T>, sign: T) -> T {
    let t = m.transpose();
    let mut worst = T::zero();
    for (i, j, &v) in m.triplet_iter() {
        let w = t
            .get_entry(i, j)
            .map(|e| e.into_value())
            .unwrap_or_else(T::zero);
        worst = worst.max((v - sign * w).abs());
    }
    for (i, j, &w) in t.triplet_iter() {
        if m.get_entry(i, j).is_none() {
            worst = worst.max(w.abs());
        }
    }
    worst
}

pub fn symmetry_defect<T: Real>(m: &CsrMatrix<T>) -> T {
    transpose_defect(m, T::one())
}

pub fn skew_defect<T: Real>(m: &CsrMatrix<T>) -> T {
    transpose_defect(m, -T::one())
}

pub fn max_abs<T: Real>(m: &CsrMatrix<T>) -> T {
    m.values().iter().fold(T::zero(), |a, &v| a.max(v.abs()))
}

/// Upper bound on the spectral norm of a symmetric matrix (max absolute row sum).
pub fn norm_inf<T: Real>(m: &CsrMatrix<T>) -> T {
    m.row_iter()
        .map(|r| r.values().iter().fold(T::zero(), |a, &v| a + v.abs()))
        .fold(T::zero(), |a, b| a.max(b))
}

/// Certifies `M + shift·I ≻ 0` for symmetric `M` with an envelope Cholesky.
///
/// Only the lower triangle is read. Returns `false` at the first non-positive
/// pivot. Cost is the sum of squared row envelopes, so this is meant for
/// banded matrices.
pub fn shifted_cholesky_succeeds<T: Real>(m: &CsrMatrix<T>, shift: T) -> bool {
    let n = m.nrows();
    // first column in the envelope of each row
    let mut first = vec![0usize; n];
    for (i, f) in first.iter_mut().enumerate() {
        *f = m
            .row(i)
            .col_indices()
            .iter()
            .copied()
            .filter(|&j| j <= i)
            .min()
            .unwrap_or(i);
    }
    let mut offsets = vec![0usize; n + 1];
    for i in 0..n {
        offsets[i + 1] = offsets[i] + (i - first[i] + 1);
    }
    let mut l = vec![T::zero(); offsets[n]];
    for i in 0..n {
        let row = m.row(i);
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            if j <= i {
                l[offsets[i] + j - first[i]] += v;
            }
        }
        l[offsets[i] + i - first[i]] += shift;
    }
    for i in 0..n {
        let fi = first[i];
        for j in fi..=i {
            let fj = first[j];
            let lo = fi.max(fj);
            let mut s = l[offsets[i] + j - fi];
            for k in lo..j {
                s -= l[offsets[i] + k - fi] * l[offsets[j] + k - fj];
            }
            if j == i {
                if !(s > T::zero()) {
                    return false;
                }
                l[offsets[i] + i - fi] = s.sqrt();
            } else {
                l[offsets[i] + j - fi] = s / l[offsets[j] + j - fj];
            }
        }
    }
    true
}

/// `M ⪰ −tol·I` test at tolerance `tol·‖M‖` (zero matrices pass).
pub fn is_psd<T: Real>(m: &CsrMatrix<T>, rel_tol: T) -> bool {
    let scale = norm_inf(m);
    if scale == T::zero() {
        return true;
    }
    shifted_cholesky_succeeds(m, rel_tol * scale)
}
