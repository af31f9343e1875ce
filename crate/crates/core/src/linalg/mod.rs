//! Dense linear-algebra kernels.
//!
//! Thin, checked wrappers around `nalgebra` factorizations plus the few
//! routines the reduction code needs that `nalgebra` does not provide
//! (biorthogonal generalized eigenvectors, rank-revealing orthonormalization,
//! null-space bases at an explicit tolerance).

mod eig;
pub mod sparse;

pub use eig::{gen_eig, GenEig};

use nalgebra::{Complex, ComplexField, DMatrix, DVector, SymmetricEigen, LU, SVD};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type RealMatrix<T> = DMatrix<T>;
pub type ComplexMatrix<T> = DMatrix<Complex<T>>;

/// Iteration cap handed to the `nalgebra` eigen/SVD drivers.
const MAX_SWEEPS: usize = 10_000;

/// Ascending eigenvalues with orthonormal eigenvectors of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEig<T: Real> {
    pub eigenvalues: DVector<T>,
    pub eigenvectors: DMatrix<T>,
}

/// `M = U diag(σ) Vᵀ` with σ descending.
#[derive(Debug, Clone)]
pub struct Svd<T: Real> {
    pub u: DMatrix<T>,
    pub singular_values: DVector<T>,
    pub v: DMatrix<T>,
}

pub fn frobenius<T: Real>(m: &DMatrix<T>) -> T {
    m.norm()
}

pub fn sym_part<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::lit(0.5)
}

pub fn skew_part<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m - m.transpose()) * T::lit(0.5)
}

pub fn check_square<T: nalgebra::Scalar>(name: &str, m: &DMatrix<T>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::dim(format!(
            "{name} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub fn check_finite<T: Real>(name: &str, m: &DMatrix<T>) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite {
                    name: name.to_string(),
                    row: i,
                    col: j,
                });
            }
        }
    }
    Ok(())
}

/// Symmetric eigendecomposition; the input is symmetrized first.
pub fn sym_eig<T: Real>(m: &DMatrix<T>) -> Result<SymEig<T>> {
    check_square("sym_eig input", m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(SymEig {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let eig =
        SymmetricEigen::try_new(sym_part(m), T::EPS, MAX_SWEEPS).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(SymEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Smallest eigenvalue of the symmetric part of `m` (`+∞` for an empty matrix).
pub fn min_sym_eigenvalue<T: Real>(m: &DMatrix<T>) -> Result<T> {
    if m.nrows() == 0 {
        return Ok(T::max_value().unwrap_or(T::lit(f64::MAX)));
    }
    Ok(sym_eig(m)?.eigenvalues[0])
}

/// Thin SVD, singular values sorted descending.
pub fn svd<T: Real>(m: &DMatrix<T>) -> Result<Svd<T>> {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return Ok(Svd {
            u: DMatrix::zeros(r, 0),
            singular_values: DVector::zeros(0),
            v: DMatrix::zeros(c, 0),
        });
    }
    let s = SVD::try_new(m.clone(), true, true, T::EPS, MAX_SWEEPS).ok_or(Error::NoConvergence)?;
    let u = s.u.ok_or(Error::NoConvergence)?;
    let vt = s.v_t.ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        s.singular_values[b]
            .partial_cmp(&s.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(Svd {
        u: DMatrix::from_fn(r, k, |i, j| u[(i, order[j])]),
        singular_values: DVector::from_iterator(k, order.iter().map(|&j| s.singular_values[j])),
        v: DMatrix::from_fn(c, k, |i, j| vt[(order[j], i)]),
    })
}

/// Standard numerical-rank tolerance `max(rows, cols) · ε · σ₁`.
pub fn default_rank_tol<T: Real>(rows: usize, cols: usize, sigma1: T) -> T {
    T::from_usize_lossy(rows.max(cols)) * T::EPS * sigma1
}

/// Number of singular values strictly above `tol`.
pub fn numerical_rank<T: Real>(singular_values: &DVector<T>, tol: T) -> usize {
    singular_values.iter().filter(|&&s| s > tol).count()
}

/// Orthonormal basis of the right null space of `m`.
///
/// `tol` defaults to [`default_rank_tol`]. Singular values `≤ tol` count as zero.
pub fn nullspace_basis<T: Real>(m: &DMatrix<T>, tol: Option<T>) -> Result<DMatrix<T>> {
    let (r, c) = m.shape();
    if c == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if r == 0 {
        return Ok(DMatrix::identity(c, c));
    }
    // Pad wide inputs with zero rows so the SVD returns a complete right basis.
    let padded;
    let work = if r < c {
        padded = {
            let mut p = DMatrix::zeros(c, c);
            p.view_mut((0, 0), (r, c)).copy_from(m);
            p
        };
        &padded
    } else {
        m
    };
    let s = svd(work)?;
    let sigma1 = s.singular_values[0];
    let tol = tol.unwrap_or_else(|| default_rank_tol(r, c, sigma1));
    let rank = numerical_rank(&s.singular_values, tol).min(r);
    Ok(s.v.columns(rank, c - rank).into_owned())
}

/// Orthonormal basis of the left null space (`Tᵀ M = 0`).
pub fn left_nullspace_basis<T: Real>(m: &DMatrix<T>, tol: Option<T>) -> Result<DMatrix<T>> {
    nullspace_basis(&m.transpose(), tol)
}

/// Orthonormal basis of the range of `m` at the given (or default) tolerance.
pub fn range_basis<T: Real>(m: &DMatrix<T>, tol: Option<T>) -> Result<DMatrix<T>> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Ok(DMatrix::zeros(r, 0));
    }
    let s = svd(m)?;
    let tol = tol.unwrap_or_else(|| default_rank_tol(r, c, s.singular_values[0]));
    let rank = numerical_rank(&s.singular_values, tol);
    Ok(s.u.columns(0, rank).into_owned())
}

/// LU factorization of the equilibrated matrix `Dr M Dc` with a one-norm
/// condition estimate.
///
/// Row and column scalings are powers of two, so they introduce no rounding.
/// The condition estimate refers to the scaled matrix; badly scaled but
/// well-posed systems (shifted descriptor pencils at large `|s|`) are accepted.
pub struct Factored<N: ComplexField> {
    lu: LU<N, nalgebra::Dyn, nalgebra::Dyn>,
    row_scale: Vec<N::RealField>,
    col_scale: Vec<N::RealField>,
    condition: f64,
}

fn one_norm<N: ComplexField>(m: &DMatrix<N>) -> f64
where
    N::RealField: Real,
{
    m.column_iter()
        .map(|c| c.iter().map(|x| x.clone().abs().as_f64()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn pow2_inverse<T: Real>(x: f64) -> T {
    if x == 0.0 || !x.is_finite() {
        return T::one();
    }
    T::lit((-x.log2().round()).exp2())
}

impl<N: ComplexField> Factored<N>
where
    N::RealField: Real,
{
    /// Factorizes `m`; fails when `m` is singular to working precision.
    pub fn new(m: &DMatrix<N>) -> Result<Self> {
        check_square("matrix", m)?;
        let n = m.nrows();
        let mut scaled = m.clone();
        let mut row_scale = Vec::with_capacity(n);
        for i in 0..n {
            let big = scaled
                .row(i)
                .iter()
                .map(|x| x.clone().abs().as_f64())
                .fold(0.0, f64::max);
            let f: N::RealField = pow2_inverse(big);
            scaled
                .row_mut(i)
                .iter_mut()
                .for_each(|x| *x = x.clone().scale(f));
            row_scale.push(f);
        }
        let mut col_scale = Vec::with_capacity(n);
        for j in 0..n {
            let big = scaled
                .column(j)
                .iter()
                .map(|x| x.clone().abs().as_f64())
                .fold(0.0, f64::max);
            let f: N::RealField = pow2_inverse(big);
            scaled
                .column_mut(j)
                .iter_mut()
                .for_each(|x| *x = x.clone().scale(f));
            col_scale.push(f);
        }
        let norm = one_norm(&scaled);
        let lu = scaled.lu();
        let u = lu.u();
        let (mut umax, mut umin) = (0.0f64, f64::INFINITY);
        for i in 0..n {
            let d = u[(i, i)].clone().abs().as_f64();
            umax = umax.max(d);
            umin = umin.min(d);
        }
        if n > 0 && (umin == 0.0 || !umin.is_finite()) {
            return Err(Error::Singular {
                condition: f64::INFINITY,
            });
        }
        let mut condition = if n == 0 { 1.0 } else { umax / umin };
        // Lower-bound ‖M⁻¹‖₁ with two probe vectors.
        for probe in 0..2 {
            let b = DMatrix::from_fn(n, 1, |i, _| {
                let sign = if probe == 1 && i % 2 == 1 { -1.0 } else { 1.0 };
                N::from_real(<N::RealField as Real>::lit(
                    sign * (1.0 + i as f64 / (n as f64 + 1.0)),
                ))
            });
            let bn = one_norm(&b).max(f64::MIN_POSITIVE);
            match lu.solve(&b) {
                Some(x) => condition = condition.max(norm * one_norm(&x) / bn),
                None => {
                    return Err(Error::Singular {
                        condition: f64::INFINITY,
                    })
                }
            }
        }
        let eps = <N::RealField as Real>::EPS.as_f64();
        if !condition.is_finite() || condition * eps > 0.5 {
            return Err(Error::Singular { condition });
        }
        Ok(Self {
            lu,
            row_scale,
            col_scale,
            condition,
        })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, rhs: &DMatrix<N>) -> Result<DMatrix<N>> {
        let mut b = rhs.clone();
        for (i, f) in self.row_scale.iter().enumerate() {
            b.row_mut(i)
                .iter_mut()
                .for_each(|x| *x = x.clone().scale(*f));
        }
        let mut x = self.lu.solve(&b).ok_or(Error::Singular {
            condition: self.condition,
        })?;
        for (i, f) in self.col_scale.iter().enumerate() {
            x.row_mut(i)
                .iter_mut()
                .for_each(|v| *v = v.clone().scale(*f));
        }
        Ok(x)
    }
}

/// Solves `M X = RHS` for complex square `M`.
pub fn solve_complex<T: Real>(
    m: &ComplexMatrix<T>,
    rhs: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    if rhs.nrows() != m.nrows() {
        return Err(Error::dim(format!(
            "right-hand side has {} rows, matrix has {}",
            rhs.nrows(),
            m.nrows()
        )));
    }
    Factored::new(m)?.solve(rhs)
}

/// Solves `M X = RHS` for real square `M`.
pub fn solve_real<T: Real>(m: &DMatrix<T>, rhs: &DMatrix<T>) -> Result<DMatrix<T>> {
    if rhs.nrows() != m.nrows() {
        return Err(Error::dim(format!(
            "right-hand side has {} rows, matrix has {}",
            rhs.nrows(),
            m.nrows()
        )));
    }
    Factored::new(m)?.solve(rhs)
}

/// One-norm condition estimate of a real square matrix (`∞` when singular).
pub fn condition_estimate<T: Real>(m: &DMatrix<T>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    match Factored::new(m) {
        Ok(f) => f.condition(),
        Err(Error::Singular { condition }) => condition,
        Err(_) => f64::INFINITY,
    }
}

pub fn to_complex<T: Real>(m: &DMatrix<T>) -> ComplexMatrix<T> {
    m.map(|x| Complex::new(x, T::zero()))
}

pub fn real_part<T: Real>(m: &ComplexMatrix<T>) -> DMatrix<T> {
    m.map(|z| z.re)
}

pub fn imag_part<T: Real>(m: &ComplexMatrix<T>) -> DMatrix<T> {
    m.map(|z| z.im)
}

/// Spectral norm of a complex matrix.
pub fn spectral_norm_complex<T: Real>(m: &ComplexMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.clone().singular_values().max()
}

/// Result of [`orthonormalize_columns`]: `q = v[:, kept] · transform`.
#[derive(Debug, Clone)]
pub struct Orthonormalized<T: Real> {
    pub q: DMatrix<T>,
    pub transform: DMatrix<T>,
    pub kept: Vec<usize>,
}

/// Rank-revealing Gram–Schmidt on unit-scaled columns (two passes per column).
///
/// A column is dropped when its component orthogonal to the previously kept
/// columns falls to `tol` or below (relative to its own norm).
pub fn orthonormalize_columns<T: Real>(v: &DMatrix<T>, tol: T) -> Orthonormalized<T> {
    let (n, r) = v.shape();
    let mut q_cols: Vec<DVector<T>> = Vec::new();
    // coefficients: q_k = Σ_j c_{jk} v_{kept_j}
    let mut coeffs: Vec<DVector<T>> = Vec::new();
    let mut kept = Vec::new();
    for j in 0..r {
        let col = v.column(j).into_owned();
        let norm = col.norm();
        if norm == T::zero() || !norm.is_finite() {
            continue;
        }
        let mut w = &col / norm;
        // w expressed in kept-column coordinates (plus the new column)
        let mut c = DVector::zeros(kept.len() + 1);
        c[kept.len()] = T::one() / norm;
        for _ in 0..2 {
            for (k, qk) in q_cols.iter().enumerate() {
                let h = qk.dot(&w);
                w -= qk * h;
                let ck = &coeffs[k];
                for (idx, val) in ck.iter().enumerate() {
                    c[idx] -= h * *val;
                }
            }
        }
        let wn = w.norm();
        if wn <= tol {
            continue;
        }
        w /= wn;
        c /= wn;
        kept.push(j);
        q_cols.push(w);
        // pad older coefficient vectors lazily
        coeffs.push(c);
    }
    let k = kept.len();
    let q = if k == 0 {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&q_cols)
    };
    let mut transform = DMatrix::zeros(k, k);
    for (col, c) in coeffs.iter().enumerate() {
        for (row, val) in c.iter().enumerate() {
            transform[(row, col)] = *val;
        }
    }
    Orthonormalized { q, transform, kept }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    }

    fn random(n: usize, m: usize, seed: &mut u64) -> DMatrix<f64> {
        DMatrix::from_fn(n, m, |_, _| lcg(seed))
    }

    #[test]
    fn sym_eig_diagonal_and_zero() {
        let e = sym_eig(&dmatrix![2.0, 0.0; 0.0, 1.0]).unwrap();
        assert_eq!(e.eigenvalues.as_slice(), &[1.0, 2.0]);
        assert!((f64::abs(e.eigenvectors[(1, 0)]) - 1.0).abs() < 1e-15);
        let z = sym_eig(&DMatrix::<f64>::zeros(3, 3)).unwrap();
        assert!(z.eigenvalues.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn sym_eig_reconstructs_random() {
        let mut seed = 11;
        let a = random(10, 10, &mut seed);
        let m = &a + a.transpose();
        let e = sym_eig(&m).unwrap();
        let rec =
            &e.eigenvectors * DMatrix::from_diagonal(&e.eigenvalues) * e.eigenvectors.transpose();
        assert!((rec - &m).norm() <= 1e-12 * m.norm());
        let qtq = e.eigenvectors.transpose() * &e.eigenvectors;
        assert!((qtq - DMatrix::identity(10, 10)).norm() < 1e-12);
        assert!(e.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn svd_cases() {
        let s = svd(&DMatrix::<f64>::identity(2, 2)).unwrap();
        assert_eq!(s.singular_values.as_slice(), &[1.0, 1.0]);
        let z = svd(&DMatrix::<f64>::zeros(3, 2)).unwrap();
        assert!(z.singular_values.iter().all(|&x| x == 0.0));
        // rank-1 outer product: σ₁ = ‖u‖‖v‖
        let u = DVector::from_vec(vec![1.0, 2.0, 2.0]);
        let v = DVector::from_vec(vec![3.0, 4.0]);
        let m = &u * v.transpose();
        let s = svd(&m).unwrap();
        assert!((s.singular_values[0] - 15.0).abs() < 1e-12);
        let tol = default_rank_tol(3, 2, s.singular_values[0]);
        assert_eq!(numerical_rank(&s.singular_values, tol), 1);
        let rec = &s.u * DMatrix::from_diagonal(&s.singular_values) * s.v.transpose();
        assert!((rec - m).norm() <= 1e-12 * 15.0);
    }

    #[test]
    fn complex_solve_cases() {
        let id = ComplexMatrix::<f64>::identity(3, 3);
        let b = ComplexMatrix::from_fn(3, 1, |i, _| Complex::new(i as f64, 1.0));
        assert_eq!(solve_complex(&id, &b).unwrap(), b);
        let m = to_complex(&dmatrix![1.0, -1.0; 1.0, 1.0]);
        let rhs = to_complex(&dmatrix![2.0; 1.0]);
        let x = solve_complex(&m, &rhs).unwrap();
        assert!((x[0] - Complex::new(1.5, 0.0)).norm() < 1e-15);
        assert!((x[1] - Complex::new(-0.5, 0.0)).norm() < 1e-15);
        let sing = to_complex(&dmatrix![1.0, 1.0; 1.0, 1.0]);
        assert!(matches!(
            solve_complex(&sing, &rhs),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn complex_solve_residual_on_random_instances() {
        let mut seed = 5;
        for trial in 0..1000 {
            let n = 1 + trial % 64;
            let re = random(n, n, &mut seed);
            let im = random(n, n, &mut seed);
            // diagonal shift keeps the instances well conditioned
            let m = ComplexMatrix::from_fn(n, n, |i, j| {
                Complex::new(re[(i, j)] + if i == j { n as f64 } else { 0.0 }, im[(i, j)])
            });
            let rhs =
                ComplexMatrix::from_fn(n, 2, |i, j| Complex::new(lcg(&mut seed), (i + j) as f64));
            let x = solve_complex(&m, &rhs).unwrap();
            let res = (&m * &x - &rhs).norm();
            assert!(res <= 1e-10 * m.norm() * x.norm(), "trial {trial}: {res}");
        }
    }

    #[test]
    fn nullspace_cases() {
        let z = nullspace_basis(&DMatrix::<f64>::zeros(2, 2), None).unwrap();
        assert_eq!(z.ncols(), 2);
        assert!((z.transpose() * &z - DMatrix::identity(2, 2)).norm() < 1e-14);
        assert_eq!(
            nullspace_basis(&DMatrix::<f64>::identity(3, 3), None)
                .unwrap()
                .ncols(),
            0
        );
        let s = nullspace_basis(&dmatrix![1.0, 0.0; 0.0, 0.0], None).unwrap();
        assert_eq!(s.ncols(), 1);
        assert!((f64::abs(s[(1, 0)]) - 1.0).abs() < 1e-15);
        // wide input
        let w = nullspace_basis(&dmatrix![1.0, 1.0, 0.0], None).unwrap();
        assert_eq!(w.ncols(), 2);
        assert!((dmatrix![1.0, 1.0, 0.0] * &w).norm() < 1e-14);
    }

    #[test]
    fn orthonormalize_drops_duplicates_and_tracks_transform() {
        let mut seed = 3;
        let mut v = random(6, 4, &mut seed);
        let c0 = v.column(0).into_owned();
        v.set_column(2, &(c0 * 3.0));
        let o = orthonormalize_columns(&v, 1e-12);
        assert_eq!(o.kept, vec![0, 1, 3]);
        let sel = DMatrix::from_columns(
            &o.kept
                .iter()
                .map(|&k| v.column(k).into_owned())
                .collect::<Vec<_>>(),
        );
        assert!((sel * &o.transform - &o.q).norm() < 1e-12);
        assert!((o.q.transpose() * &o.q - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn condition_estimate_detects_ill_conditioning() {
        assert!(condition_estimate(&DMatrix::<f64>::identity(4, 4)) < 10.0);
        assert!(condition_estimate(&dmatrix![1.0, 1.0; 1.0, 1.0 + 1e-13]) > 1e12);
    }
}
