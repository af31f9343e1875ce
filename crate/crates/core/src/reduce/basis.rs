use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;

use super::InterpolationData;
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize_columns, solve_real, to_complex, ComplexMatrix, Factored};
use crate::model::{GenericLti, Index2Partition};
use crate::scalar::{cplx, Real};
use crate::transfer::shifted_solve;

/// How the interpolation basis is post-processed after realification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisOptions {
    /// Orthonormalize the realified columns (dropping near-dependent ones).
    pub orthonormalize: bool,
    /// Relative drop tolerance of the orthonormalization.
    pub rank_tol: f64,
}

impl Default for BasisOptions {
    fn default() -> Self {
        Self {
            orthonormalize: true,
            rank_tol: 1e-12,
        }
    }
}

impl BasisOptions {
    /// Keeps the realified solution vectors as they are.
    pub fn raw() -> Self {
        Self {
            orthonormalize: false,
            ..Self::default()
        }
    }
}

/// Real projection basis with the direction matrix transformed alongside,
/// so that `V = V_raw T` and `𝔅 = 𝔅_raw T` for the same `T`.
#[derive(Debug, Clone)]
pub struct ProjectionBasis<T: Real> {
    pub v: DMatrix<T>,
    pub directions: DMatrix<T>,
    /// Columns discarded as numerically dependent.
    pub dropped: usize,
}

impl<T: Real> ProjectionBasis<T> {
    pub fn ncols(&self) -> usize {
        self.v.ncols()
    }

    /// Rows `start..start+len` of `V`.
    pub fn block(&self, start: usize, len: usize) -> DMatrix<T> {
        self.v.rows(start, len).into_owned()
    }
}

fn point_label<T: Real>(s: Complex<T>) -> String {
    format!("{:.6e}{:+.6e}i", s.re.as_f64(), s.im.as_f64())
}

fn singular_at<T: Real>(index: usize, s: Complex<T>, e: Error) -> Error {
    match e {
        Error::Singular { condition } => Error::SingularShift {
            index,
            point: point_label(s),
            condition,
        },
        other => other,
    }
}

/// Solves one system per representative point and fills in conjugates.
fn solve_columns<T: Real, F>(
    data: &InterpolationData<T>,
    rows: usize,
    solve: F,
) -> Result<ComplexMatrix<T>>
where
    F: Fn(usize, Complex<T>, &DVector<Complex<T>>) -> Result<DVector<Complex<T>>> + Sync,
{
    let reps = data.representatives();
    let cols = reps
        .par_iter()
        .map(|&i| {
            solve(i, data.points()[i], &data.directions()[i])
                .map_err(|e| singular_at(i, data.points()[i], e))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = ComplexMatrix::zeros(rows, data.len());
    for (&i, col) in reps.iter().zip(cols) {
        if data.points()[i].im != T::zero() {
            out.set_column(i + 1, &col.map(|z| z.conj()));
        }
        out.set_column(i, &col);
    }
    Ok(out)
}

/// Columns `(σᵢE − A)⁻¹ 𝓑 bᵢ` before realification.
pub fn interpolation_columns<T: Real>(
    sys: &GenericLti<T>,
    data: &InterpolationData<T>,
) -> Result<ComplexMatrix<T>> {
    data.check_inputs(sys.inputs())?;
    let cb = to_complex(&sys.b);
    solve_columns(data, sys.n(), |_, s, b| {
        let rhs = &cb * b;
        let x = shifted_solve(
            &sys.e,
            &sys.a,
            s,
            &DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()),
        )?;
        Ok(x.column(0).into_owned())
    })
}

/// First blocks `vᵢ` of `[[A11 − σᵢE11, J12], [−J12ᵀ, 0]] [vᵢ; zᵢ] = [𝓑 bᵢ; 0]`,
/// together with the multipliers `zᵢ`.
pub fn saddle_columns<T: Real>(
    part: &Index2Partition<'_, T>,
    input: &DMatrix<T>,
    data: &InterpolationData<T>,
) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    data.check_inputs(input.ncols())?;
    let (n1, n2) = (part.n1(), part.n2());
    let e11 = part.e11().into_owned();
    let a11 = part.a11();
    let j12 = part.j12().into_owned();
    let cb = to_complex(input);
    let full = solve_columns(data, n1 + n2, |_, s, b| {
        let mut m = ComplexMatrix::zeros(n1 + n2, n1 + n2);
        for j in 0..n1 {
            for i in 0..n1 {
                m[(i, j)] = cplx(a11[(i, j)] - s.re * e11[(i, j)], -s.im * e11[(i, j)]);
            }
        }
        for j in 0..n2 {
            for i in 0..n1 {
                m[(i, n1 + j)] = cplx(j12[(i, j)], T::zero());
                m[(n1 + j, i)] = cplx(-j12[(i, j)], T::zero());
            }
        }
        let mut rhs = ComplexMatrix::zeros(n1 + n2, 1);
        rhs.view_mut((0, 0), (n1, 1)).copy_from(&(&cb * b));
        let x = Factored::new(&m)?.solve(&rhs)?;
        Ok(x.column(0).into_owned())
    })?;
    Ok((
        full.rows(0, n1).into_owned(),
        full.rows(n1, n2).into_owned(),
    ))
}

/// Replaces each conjugate pair of columns `(v, v̄)` by `(Re v, Im v)`.
pub(crate) fn realify<T: Real>(cols: &ComplexMatrix<T>, data: &InterpolationData<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(cols.nrows(), cols.ncols());
    let mut k = 0;
    while k < cols.ncols() {
        out.set_column(k, &cols.column(k).map(|z| z.re));
        if data.points()[k].im != T::zero() {
            out.set_column(k + 1, &cols.column(k).map(|z| z.im));
            k += 2;
        } else {
            k += 1;
        }
    }
    out
}

/// Realifies and (optionally) orthonormalizes `cols`, carrying `𝔅` along.
pub(crate) fn finish_basis<T: Real>(
    cols: &ComplexMatrix<T>,
    data: &InterpolationData<T>,
    opts: &BasisOptions,
    what: &str,
) -> Result<ProjectionBasis<T>> {
    let v = realify(cols, data);
    let dirs = data.real_directions();
    if !opts.orthonormalize {
        let max = v.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
        if max == T::zero() {
            return Err(Error::DegenerateBasis(format!(
                "{what}: every basis column vanishes"
            )));
        }
        return Ok(ProjectionBasis {
            v,
            directions: dirs,
            dropped: 0,
        });
    }
    let o = orthonormalize_columns(&v, T::lit(opts.rank_tol));
    if o.kept.is_empty() {
        return Err(Error::DegenerateBasis(format!(
            "{what}: every basis column vanishes"
        )));
    }
    let dropped = v.ncols() - o.kept.len();
    if dropped > 0 {
        log::warn!(
            "{what}: dropped {dropped} numerically dependent basis column(s), reduced order {}",
            o.kept.len()
        );
    }
    let selected = DMatrix::from_columns(
        &o.kept
            .iter()
            .map(|&k| dirs.column(k).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok(ProjectionBasis {
        v: o.q,
        directions: selected * o.transform,
        dropped,
    })
}

/// Real basis whose span contains every `(σᵢE − A)⁻¹ 𝓑 bᵢ`.
pub fn build_v_generic<T: Real>(
    sys: &GenericLti<T>,
    data: &InterpolationData<T>,
    opts: &BasisOptions,
) -> Result<ProjectionBasis<T>> {
    let cols = interpolation_columns(sys, data)?;
    finish_basis(&cols, data, opts, "interpolation basis")
}

/// Real basis over the `x1` block from the saddle-point solves with input
/// map `B1 − P1`; every column lies in the kernel of `J12ᵀ`.
pub fn build_v_saddle<T: Real>(
    part: &Index2Partition<'_, T>,
    data: &InterpolationData<T>,
    opts: &BasisOptions,
) -> Result<ProjectionBasis<T>> {
    let input = part.b1() - part.p1();
    let (v, _) = saddle_columns(part, &input, data)?;
    finish_saddle_basis(part, &v, data, opts)
}

/// [`finish_basis`] followed by the orthogonal projection onto `ker J12ᵀ`.
///
/// Nearly dependent columns survive orthonormalization with rounding noise
/// magnified by the inverse of their residual norm; the projection strips
/// the part of that noise that would couple to the multiplier.
pub(crate) fn finish_saddle_basis<T: Real>(
    part: &Index2Partition<'_, T>,
    cols: &ComplexMatrix<T>,
    data: &InterpolationData<T>,
    opts: &BasisOptions,
) -> Result<ProjectionBasis<T>> {
    let mut basis = finish_basis(cols, data, opts, "saddle-point basis")?;
    let j12 = part.j12().into_owned();
    let gram = j12.transpose() * &j12;
    let coef = solve_real(&gram, &(j12.transpose() * &basis.v))?;
    basis.v -= &j12 * coef;
    if opts.orthonormalize {
        let o = orthonormalize_columns(&basis.v, T::lit(opts.rank_tol));
        if o.kept.len() < basis.v.ncols() {
            log::warn!(
                "saddle-point basis: {} column(s) lost in the kernel projection",
                basis.v.ncols() - o.kept.len()
            );
            basis.dropped += basis.v.ncols() - o.kept.len();
        }
        if o.kept.is_empty() {
            return Err(Error::DegenerateBasis(
                "saddle-point basis: every basis column vanishes".into(),
            ));
        }
        let selected = DMatrix::from_columns(
            &o.kept
                .iter()
                .map(|&k| basis.directions.column(k).into_owned())
                .collect::<Vec<_>>(),
        );
        basis.directions = selected * o.transform;
        basis.v = o.q;
    }
    Ok(basis)
}
