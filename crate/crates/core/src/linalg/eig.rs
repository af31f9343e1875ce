//! Generalized eigenproblem `A v = λ E v` for symmetric positive definite `E`.

use nalgebra::{Cholesky, Complex, ComplexField, DMatrix, DVector, Schur};

use super::{check_square, sym_part, ComplexMatrix, MAX_SWEEPS};
use crate::error::{Error, Result};
use crate::scalar::{cplx, Real};

/// Eigenvector condition above which the pencil is reported as (nearly) defective.
pub const DEFECTIVE_CONDITION: f64 = 1e10;

/// Eigen-triplets of `(A, E)`.
///
/// Column `i` of `right` is `vᵢ` with `A vᵢ = λᵢ E vᵢ`; column `i` of `left`
/// is `wᵢ` with `wᵢᵀ A = λᵢ wᵢᵀ E` and `wᵢᵀ E vⱼ = δᵢⱼ` (plain transpose, no
/// conjugation). Complex eigenvalues appear as adjacent conjugate pairs,
/// positive imaginary part first, and their vectors are exact conjugates.
#[derive(Debug, Clone)]
pub struct GenEig<T: Real> {
    pub eigenvalues: Vec<Complex<T>>,
    pub right: ComplexMatrix<T>,
    pub left: ComplexMatrix<T>,
    pub eigenvector_condition: f64,
    pub defective: bool,
}

pub fn gen_eig<T: Real>(a: &DMatrix<T>, e: &DMatrix<T>) -> Result<GenEig<T>> {
    check_square("A", a)?;
    check_square("E", e)?;
    let n = a.nrows();
    if e.nrows() != n {
        return Err(Error::dim(format!(
            "A is {n}x{n} but E is {}x{}",
            e.nrows(),
            e.ncols()
        )));
    }
    if n == 0 {
        return Ok(GenEig {
            eigenvalues: Vec::new(),
            right: DMatrix::zeros(0, 0),
            left: DMatrix::zeros(0, 0),
            eigenvector_condition: 1.0,
            defective: false,
        });
    }
    let chol = Cholesky::new(sym_part(e))
        .ok_or_else(|| Error::NotPositiveDefinite("E in the generalized eigenproblem".into()))?;
    let l = chol.l();
    // M = L⁻¹ A L⁻ᵀ
    let x = l.solve_lower_triangular(a).ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    let m = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(Error::Singular {
            condition: f64::INFINITY,
        })?
        .transpose();

    let lambdas = ordered_eigenvalues(&m)?;
    let y = eigenvectors(&m, &lambdas);
    let cy = complexify(&l);
    let mut cond = vector_condition(&y);
    let z_rows = if cond.is_finite() && cond < 1e13 {
        y.clone().try_inverse()
    } else {
        None
    };
    let z_rows = match z_rows {
        Some(z) => z,
        None => {
            // Fall back to independent left vectors scaled pairwise.
            cond = f64::INFINITY;
            let zt = eigenvectors(&m.transpose(), &lambdas);
            let mut z = zt.transpose();
            for i in 0..n {
                let mut d = (z.row(i) * y.column(i))[(0, 0)];
                if d.modulus() == T::zero() {
                    d = cplx(T::EPS, T::zero());
                }
                let inv = Complex::new(T::one(), T::zero()) / d;
                z.row_mut(i).scale_mut_c(inv);
            }
            z
        }
    };
    let defective = cond > DEFECTIVE_CONDITION;
    if defective {
        log::warn!(
            "generalized eigenproblem is nearly defective (eigenvector condition {cond:.3e})"
        );
    }
    let right = cy.tr_solve_lower_triangular(&y).ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    let left = cy
        .tr_solve_lower_triangular(&z_rows.transpose())
        .ok_or(Error::Singular {
            condition: f64::INFINITY,
        })?;
    Ok(GenEig {
        eigenvalues: lambdas,
        right,
        left,
        eigenvector_condition: cond,
        defective,
    })
}

fn complexify<T: Real>(m: &DMatrix<T>) -> ComplexMatrix<T> {
    m.map(|x| cplx(x, T::zero()))
}

trait ScaleRow<T: Real> {
    fn scale_mut_c(&mut self, s: Complex<T>);
}

impl<T: Real, S> ScaleRow<T> for nalgebra::Matrix<Complex<T>, nalgebra::U1, nalgebra::Dyn, S>
where
    S: nalgebra::StorageMut<Complex<T>, nalgebra::U1, nalgebra::Dyn>,
{
    fn scale_mut_c(&mut self, s: Complex<T>) {
        for x in self.iter_mut() {
            *x *= s;
        }
    }
}

/// Eigenvalues of `m`, conjugate pairs adjacent, sorted by real part then |imag|.
fn ordered_eigenvalues<T: Real>(m: &DMatrix<T>) -> Result<Vec<Complex<T>>> {
    let schur = Schur::try_new(m.clone(), T::EPS, MAX_SWEEPS).ok_or(Error::NoConvergence)?;
    let raw = schur.complex_eigenvalues();
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    for z in raw.iter() {
        if z.im == T::zero() {
            reals.push(z.re);
        } else if z.im > T::zero() {
            upper.push(*z);
        }
    }
    let cmp = |a: &T, b: &T| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal);
    reals.sort_by(cmp);
    upper.sort_by(|a, b| cmp(&a.re, &b.re).then(cmp(&a.im, &b.im)));
    let mut out = Vec::with_capacity(m.nrows());
    let (mut i, mut j) = (0, 0);
    while i < reals.len() || j < upper.len() {
        let take_real = j >= upper.len() || (i < reals.len() && reals[i] <= upper[j].re);
        if take_real {
            out.push(cplx(reals[i], T::zero()));
            i += 1;
        } else {
            out.push(upper[j]);
            out.push(upper[j].conj());
            j += 1;
        }
    }
    Ok(out)
}

fn start_vector<T: Real>(n: usize, k: usize) -> DVector<T> {
    DVector::from_fn(n, |i, _| {
        let t = (i * 7 + k * 13 + 1) as f64;
        T::lit(1.0 + 0.5 * (t * 0.754_877_666).sin())
    })
}

/// Eigenvectors of the standard problem by shifted inverse iteration.
///
/// Vectors belonging to numerically equal eigenvalues are kept mutually
/// orthogonal so a semisimple multiple eigenvalue yields a full basis.
fn eigenvectors<T: Real>(m: &DMatrix<T>, lambdas: &[Complex<T>]) -> ComplexMatrix<T> {
    let n = m.nrows();
    let scale = m.norm().as_f64().max(f64::MIN_POSITIVE);
    let eps = T::EPS.as_f64();
    let mut y = ComplexMatrix::<T>::zeros(n, lambdas.len());
    let cm = complexify(m);
    let mut k = 0;
    while k < lambdas.len() {
        let lam = lambdas[k];
        // previous columns whose eigenvalue is numerically the same
        let cluster_tol = 1e-8_f64.max(1e3 * eps) * (scale + lam.modulus().as_f64());
        let cluster: Vec<usize> = (0..k)
            .filter(|&j| (lambdas[j] - lam).modulus().as_f64() <= cluster_tol)
            .collect();
        let v = inverse_iteration(&cm, lam, &y, &cluster, scale, k);
        y.set_column(k, &v);
        if lam.im != T::zero() {
            y.set_column(k + 1, &v.map(|z| z.conj()));
            k += 2;
        } else {
            k += 1;
        }
    }
    y
}

fn inverse_iteration<T: Real>(
    m: &ComplexMatrix<T>,
    lam: Complex<T>,
    done: &ComplexMatrix<T>,
    cluster: &[usize],
    scale: f64,
    k: usize,
) -> DVector<Complex<T>> {
    let n = m.nrows();
    let eps = T::EPS.as_f64();
    let mut delta = 1e-10_f64.max(10.0 * eps) * (scale + lam.modulus().as_f64());
    let real = lam.im == T::zero();
    let mut x: DVector<Complex<T>> = start_vector::<T>(n, k).map(|v| cplx(v, T::zero()));
    for _attempt in 0..8 {
        let shift = lam + cplx(T::lit(delta), T::zero());
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[(i, i)] -= shift;
        }
        let lu = shifted.lu();
        let mut ok = true;
        for _ in 0..3 {
            orthogonalize(&mut x, done, cluster);
            match lu.solve(&x) {
                Some(next) if next.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => {
                    x = next;
                    if real {
                        x.iter_mut().for_each(|z| z.im = T::zero());
                    }
                    orthogonalize(&mut x, done, cluster);
                    let nrm = x.norm();
                    if nrm == T::zero() {
                        ok = false;
                        break;
                    }
                    x /= cplx(nrm, T::zero());
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return phase_normalize(x);
        }
        delta *= 1e3;
        x = start_vector::<T>(n, k + 1).map(|v| cplx(v, T::zero()));
    }
    phase_normalize(x)
}

fn orthogonalize<T: Real>(x: &mut DVector<Complex<T>>, done: &ComplexMatrix<T>, cluster: &[usize]) {
    for _ in 0..2 {
        for &j in cluster {
            let q = done.column(j);
            let qn = q.norm_squared();
            if qn == T::zero() {
                continue;
            }
            let h = q.dotc(x) / cplx(qn, T::zero());
            *x -= q * h;
        }
    }
}

/// Rotates `x` so its largest-magnitude entry is real positive.
fn phase_normalize<T: Real>(mut x: DVector<Complex<T>>) -> DVector<Complex<T>> {
    let mut best = 0;
    let mut big = T::zero();
    for (i, z) in x.iter().enumerate() {
        if z.modulus() > big {
            big = z.modulus();
            best = i;
        }
    }
    if big > T::zero() {
        let p = x[best] / cplx(big, T::zero());
        x /= p;
        let nrm = x.norm();
        x /= cplx(nrm, T::zero());
    }
    x
}

/// Ratio of extreme singular values of the eigenvector matrix (columns unit-norm).
fn vector_condition<T: Real>(y: &ComplexMatrix<T>) -> f64 {
    let sv = y.clone().singular_values();
    let smax = sv.max().as_f64();
    let smin = sv.min().as_f64();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}
