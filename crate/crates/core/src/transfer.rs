//! Transfer-function evaluation, polynomial parts, pole-residue forms and
//! frequency-domain error measures.

use std::io::Write;
use std::str::FromStr;

use nalgebra::{Cholesky, Complex, ComplexField, DMatrix, DVector, RowDVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, gen_eig, spectral_norm_complex, to_complex, ComplexMatrix, Factored};
use crate::model::{GenericLti, Index1Partition, Index2Partition, PhdaeSystem};
use crate::scalar::{cplx, Real};

/// Anything with a transfer function `H(s)`.
pub trait Transfer<T: Real>: Sync {
    fn inputs(&self) -> usize;
    fn outputs(&self) -> usize;

    fn eval(&self, s: Complex<T>) -> Result<ComplexMatrix<T>>;

    /// `H(s) b`.
    fn eval_tangential(
        &self,
        s: Complex<T>,
        b: &DVector<Complex<T>>,
    ) -> Result<DVector<Complex<T>>> {
        check_direction(b.len(), self.inputs())?;
        Ok(self.eval(s)? * b)
    }

    /// `cᵀ H(s)`.
    fn eval_tangential_left(
        &self,
        s: Complex<T>,
        c: &DVector<Complex<T>>,
    ) -> Result<RowDVector<Complex<T>>> {
        check_direction(c.len(), self.outputs())?;
        Ok(c.transpose() * self.eval(s)?)
    }
}

fn check_direction(len: usize, expected: usize) -> Result<()> {
    if len != expected {
        return Err(Error::dim(format!(
            "direction has length {len}, expected {expected}"
        )));
    }
    Ok(())
}

/// `sE − A` in complex arithmetic.
fn shifted<T: Real>(e: &DMatrix<T>, a: &DMatrix<T>, s: Complex<T>) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(e.nrows(), e.ncols(), |i, j| {
        cplx(s.re * e[(i, j)] - a[(i, j)], s.im * e[(i, j)])
    })
}

/// `(sE − A)⁻¹ rhs`, failing when `s` is numerically a pencil eigenvalue.
pub fn shifted_solve<T: Real>(
    e: &DMatrix<T>,
    a: &DMatrix<T>,
    s: Complex<T>,
    rhs: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    Factored::new(&shifted(e, a, s))?.solve(rhs)
}

/// `C (sE − A)⁻¹ B + D`.
pub fn descriptor_eval<T: Real>(
    e: &DMatrix<T>,
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    c: &DMatrix<T>,
    d: &DMatrix<T>,
    s: Complex<T>,
) -> Result<ComplexMatrix<T>> {
    let x = shifted_solve(e, a, s, &to_complex(b))?;
    Ok(to_complex(c) * x + to_complex(d))
}

impl<T: Real> Transfer<T> for GenericLti<T> {
    fn inputs(&self) -> usize {
        self.b.ncols()
    }
    fn outputs(&self) -> usize {
        self.c.nrows()
    }
    fn eval(&self, s: Complex<T>) -> Result<ComplexMatrix<T>> {
        descriptor_eval(&self.e, &self.a, &self.b, &self.c, &self.d, s)
    }
    fn eval_tangential(
        &self,
        s: Complex<T>,
        b: &DVector<Complex<T>>,
    ) -> Result<DVector<Complex<T>>> {
        check_direction(b.len(), self.inputs())?;
        let rhs = to_complex(&self.b) * b;
        let x = shifted_solve(
            &self.e,
            &self.a,
            s,
            &DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()),
        )?;
        let y = to_complex(&self.c) * x.column(0) + to_complex(&self.d) * b;
        Ok(y)
    }
}

impl<T: Real> Transfer<T> for PhdaeSystem<T> {
    fn inputs(&self) -> usize {
        self.m()
    }
    fn outputs(&self) -> usize {
        self.m()
    }
    fn eval(&self, s: Complex<T>) -> Result<ComplexMatrix<T>> {
        let a = self.j() - self.r();
        let b = self.b() - self.p();
        let c = (self.b() + self.p()).transpose();
        let d = self.s() + self.n_mat();
        descriptor_eval(self.e(), &a, &b, &c, &d, s)
    }
}

/// Polynomial part `P0 + s P1` of a transfer function.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPart<T: Real> {
    pub p0: DMatrix<T>,
    pub p1: DMatrix<T>,
}

impl<T: Real> PolynomialPart<T> {
    pub fn constant(p0: DMatrix<T>) -> Self {
        let (r, c) = p0.shape();
        Self {
            p0,
            p1: DMatrix::zeros(r, c),
        }
    }

    pub fn eval(&self, s: Complex<T>) -> ComplexMatrix<T> {
        to_complex(&self.p0) + to_complex(&self.p1) * s
    }

    pub fn is_constant(&self) -> bool {
        self.p1.iter().all(|v| *v == T::zero())
    }

    /// Largest entry-wise difference, relative to `1 + max(|P|)`.
    pub fn mismatch(&self, other: &Self) -> f64 {
        let scale = 1.0 + self.p0.amax().as_f64().max(self.p1.amax().as_f64());
        let d0 = (&self.p0 - &other.p0).amax().as_f64();
        let d1 = (&self.p1 - &other.p1).amax().as_f64();
        d0.max(d1) / scale
    }
}

/// Constant term `D − (B2+P2)ᵀ (J22−R22)⁻¹ (B2−P2)` of a semi-explicit index-1 system.
pub fn polynomial_part_index1<T: Real>(part: &Index1Partition<'_, T>) -> Result<PolynomialPart<T>> {
    let sys = part.system();
    let d = sys.s() + sys.n_mat();
    if part.n2() == 0 {
        return Ok(PolynomialPart::constant(d));
    }
    let c2 = (part.b2() + part.p2()).transpose();
    let b2 = part.b2() - part.p2();
    let x = linalg::solve_real(&part.a22(), &b2)?;
    Ok(PolynomialPart::constant(d - c2 * x))
}

/// Correction terms for a semi-explicit index-2 system with `G = E11⁻¹`,
/// `Z = (J12ᵀ G J12)⁻¹`, `𝓑ᵢ = Bᵢ − Pᵢ`, `𝓒ᵢ = (Bᵢ + Pᵢ)ᵀ`.
#[derive(Debug, Clone)]
pub(crate) struct Index2Terms<T: Real> {
    pub g_j12: DMatrix<T>,
    pub z: DMatrix<T>,
    pub b1: DMatrix<T>,
    pub b2: DMatrix<T>,
    pub c1: DMatrix<T>,
    pub c2: DMatrix<T>,
    pub a11: DMatrix<T>,
    pub e11: DMatrix<T>,
    pub j12: DMatrix<T>,
    pub d: DMatrix<T>,
}

impl<T: Real> Index2Terms<T> {
    pub fn new(part: &Index2Partition<'_, T>) -> Result<Self> {
        let sys = part.system();
        let e11 = part.e11().into_owned();
        let j12 = part.j12().into_owned();
        let chol = Cholesky::new(linalg::sym_part(&e11))
            .ok_or_else(|| Error::NotPositiveDefinite("E11".into()))?;
        let g_j12 = chol.solve(&j12);
        let coupling = j12.transpose() * &g_j12;
        let z = if coupling.nrows() == 0 {
            coupling
        } else {
            Factored::new(&coupling)?
                .solve(&DMatrix::identity(coupling.nrows(), coupling.nrows()))?
        };
        Ok(Self {
            g_j12,
            z,
            b1: part.b1() - part.p1(),
            b2: part.b2() - part.p2(),
            c1: (part.b1() + part.p1()).transpose(),
            c2: (part.b2() + part.p2()).transpose(),
            a11: part.a11(),
            e11,
            j12,
            d: sys.s() + sys.n_mat(),
        })
    }

    /// `G J12 Z`, the map from constraint forcing to the consistent `x1`.
    pub fn gjz(&self) -> DMatrix<T> {
        &self.g_j12 * &self.z
    }

    /// `Z J12ᵀ G`.
    pub fn zjg(&self) -> DMatrix<T> {
        &self.z * self.g_j12.transpose()
    }

    /// `𝓑 = 𝓑1 + A11 G J12 Z 𝓑2`.
    pub fn input_map(&self) -> DMatrix<T> {
        &self.b1 + &self.a11 * self.gjz() * &self.b2
    }

    /// `𝓒 = 𝓒1 − 𝓒2 Z J12ᵀ G A11`.
    pub fn output_map(&self) -> DMatrix<T> {
        &self.c1 - &self.c2 * self.zjg() * &self.a11
    }

    /// `𝓓₀ = D + 𝓒1 G J12 Z 𝓑2 − 𝓒2 Z J12ᵀ G 𝓑1 − 𝓒2 Z J12ᵀ G A11 G J12 Z 𝓑2`.
    pub fn d0(&self) -> DMatrix<T> {
        let gjz = self.gjz();
        let zjg = self.zjg();
        &self.d + &self.c1 * &gjz * &self.b2
            - &self.c2 * &zjg * &self.b1
            - &self.c2 * &zjg * &self.a11 * &gjz * &self.b2
    }

    /// `𝓓₁ = 𝓒2 Z 𝓑2`.
    pub fn d1(&self) -> DMatrix<T> {
        &self.c2 * &self.z * &self.b2
    }
}

/// Polynomial part `P0 + s P1` of a semi-explicit index-2 system.
///
/// `P1 = (B2+P2)ᵀ Z (B2−P2)`; `P0` collects every constant contribution of
/// the constraint forcing (it reduces to `D` when `B2 = P2 = 0`).
pub fn polynomial_part_index2<T: Real>(part: &Index2Partition<'_, T>) -> Result<PolynomialPart<T>> {
    let t = Index2Terms::new(part)?;
    Ok(PolynomialPart {
        p0: t.d0(),
        p1: t.d1(),
    })
}

/// `H(s) = Σᵢ cᵢ bᵢᵀ / (s − λᵢ) + D + s D1`.
#[derive(Debug, Clone)]
pub struct PoleResidueForm<T: Real> {
    pub poles: Vec<Complex<T>>,
    /// Left residue vectors `cᵢ` (length = outputs).
    pub left: Vec<DVector<Complex<T>>>,
    /// Right residue vectors `bᵢ` (length = inputs).
    pub right: Vec<DVector<Complex<T>>>,
    pub d: DMatrix<T>,
    pub d1: DMatrix<T>,
    /// Set when the eigenvector basis is ill-conditioned.
    pub defective: bool,
}

impl<T: Real> PoleResidueForm<T> {
    /// Decomposes `C (sE − A)⁻¹ B + D + s D1` for symmetric positive definite `E`.
    pub fn from_descriptor(
        e: &DMatrix<T>,
        a: &DMatrix<T>,
        b: &DMatrix<T>,
        c: &DMatrix<T>,
        d: &DMatrix<T>,
        d1: &DMatrix<T>,
    ) -> Result<Self> {
        let ge = gen_eig(a, e)?;
        let cb = to_complex(b);
        let cc = to_complex(c);
        let mut left = Vec::with_capacity(ge.eigenvalues.len());
        let mut right = Vec::with_capacity(ge.eigenvalues.len());
        for i in 0..ge.eigenvalues.len() {
            let mut ci: DVector<Complex<T>> = &cc * ge.right.column(i);
            let mut bi: DVector<Complex<T>> = (ge.left.column(i).transpose() * &cb).transpose();
            // Make the largest entry of bᵢ real positive; cᵢ absorbs the inverse.
            let mut best = 0;
            let mut big = T::zero();
            for (k, z) in bi.iter().enumerate() {
                if z.modulus() > big {
                    big = z.modulus();
                    best = k;
                }
            }
            if big > T::zero() {
                let phase = bi[best] / cplx(big, T::zero());
                bi /= phase;
                ci *= phase;
            }
            left.push(ci);
            right.push(bi);
        }
        Ok(Self {
            poles: ge.eigenvalues,
            left,
            right,
            d: d.clone(),
            d1: d1.clone(),
            defective: ge.defective,
        })
    }

    pub fn order(&self) -> usize {
        self.poles.len()
    }
}

impl<T: Real> Transfer<T> for PoleResidueForm<T> {
    fn inputs(&self) -> usize {
        self.d.ncols()
    }
    fn outputs(&self) -> usize {
        self.d.nrows()
    }
    fn eval(&self, s: Complex<T>) -> Result<ComplexMatrix<T>> {
        let mut h = to_complex(&self.d) + to_complex(&self.d1) * s;
        for ((lam, c), b) in self.poles.iter().zip(&self.left).zip(&self.right) {
            let den = s - lam;
            if den.modulus() == T::zero() {
                return Err(Error::Singular {
                    condition: f64::INFINITY,
                });
            }
            h += (c * b.transpose()) / den;
        }
        Ok(h)
    }
}

/// Strictly ascending angular frequencies (rad/s); evaluation points `s = iω`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.len() < 2 {
            return Err(Error::Config(
                "a frequency grid needs at least two points".into(),
            ));
        }
        if omegas.iter().any(|w| !w.is_finite()) || omegas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "frequencies must be finite and strictly ascending".into(),
            ));
        }
        Ok(Self { omegas })
    }

    /// `count` logarithmically spaced points on `[lo, hi]`.
    pub fn logspace(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Config(format!(
                "invalid logarithmic range [{lo}, {hi}]"
            )));
        }
        if count < 2 {
            return Err(Error::Config(
                "a frequency grid needs at least two points".into(),
            ));
        }
        let (a, b) = (lo.log10(), hi.log10());
        let step = (b - a) / (count - 1) as f64;
        let mut omegas: Vec<f64> = (0..count)
            .map(|k| 10f64.powf(a + step * k as f64))
            .collect();
        omegas[0] = lo;
        omegas[count - 1] = hi;
        Self::new(omegas)
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

impl Default for FrequencyGrid {
    /// 400 log-spaced points on `[1e-4, 1e4]`.
    fn default() -> Self {
        Self::logspace(1e-4, 1e4, 400).expect("valid default grid")
    }
}

impl FromStr for FrequencyGrid {
    type Err = Error;

    /// Parses `lo:hi:count`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || {
            Error::Config(format!(
                "frequency grid `{s}` is not of the form lo:hi:count"
            ))
        };
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        Self::logspace(lo, hi, count)
    }
}

/// Sampled transfer function on a grid.
#[derive(Debug, Clone)]
pub struct FrequencyResponse<T: Real> {
    pub omegas: Vec<f64>,
    pub values: Vec<ComplexMatrix<T>>,
}

fn at<T: Real>(omega: f64) -> Complex<T> {
    cplx(T::zero(), T::lit(omega))
}

/// Evaluates `H(iω)` on the grid, in parallel, preserving grid order.
pub fn frequency_response<T: Real, S: Transfer<T> + ?Sized>(
    sys: &S,
    grid: &FrequencyGrid,
) -> Result<FrequencyResponse<T>> {
    let values = grid
        .omegas()
        .par_iter()
        .map(|&w| sys.eval(at(w)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FrequencyResponse {
        omegas: grid.omegas().to_vec(),
        values,
    })
}

impl<T: Real> FrequencyResponse<T> {
    /// CSV with columns `omega, re_H11, im_H11, re_H12, ...` (row-major entries).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let (p, m) = self.values.first().map(|h| h.shape()).unwrap_or((0, 0));
        let mut header = vec!["omega".to_string()];
        for j in 1..=p {
            for k in 1..=m {
                header.push(format!("re_H{j}{k}"));
                header.push(format!("im_H{j}{k}"));
            }
        }
        w.write_record(&header).map_err(csv_error)?;
        for (omega, h) in self.omegas.iter().zip(&self.values) {
            let mut rec = vec![format!("{omega:.17e}")];
            for j in 0..p {
                for k in 0..m {
                    rec.push(format!("{:.17e}", h[(j, k)].re.as_f64()));
                    rec.push(format!("{:.17e}", h[(j, k)].im.as_f64()));
                }
            }
            w.write_record(&rec).map_err(csv_error)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<frequency response>".into(),
            source: e,
        })?;
        Ok(())
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    Error::Io {
        path: "<csv>".into(),
        source: std::io::Error::other(e.to_string()),
    }
}

fn check_io_dims<T: Real>(full: &dyn Transfer<T>, reduced: &dyn Transfer<T>) -> Result<()> {
    if full.inputs() != reduced.inputs() || full.outputs() != reduced.outputs() {
        return Err(Error::dim(format!(
            "full model is {}x{}, reduced model is {}x{}",
            full.outputs(),
            full.inputs(),
            reduced.outputs(),
            reduced.inputs()
        )));
    }
    Ok(())
}

/// Grid supremum of `‖H(iω) − Hr(iω)‖₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HinfError {
    pub absolute: f64,
    pub relative: f64,
    /// Frequency where the absolute error peaks.
    pub omega: f64,
    /// Grid supremum of `‖H(iω)‖₂`.
    pub reference: f64,
}

fn error_at<T: Real>(
    full: &dyn Transfer<T>,
    reduced: &dyn Transfer<T>,
    omega: f64,
) -> Result<(f64, f64)> {
    let h = full.eval(at(omega))?;
    let hr = reduced.eval(at(omega))?;
    Ok((
        spectral_norm_complex(&(&h - &hr)).as_f64(),
        spectral_norm_complex(&h).as_f64(),
    ))
}

/// Approximates `‖H − Hr‖_∞` by a grid supremum.
///
/// Three probes beyond the top of the grid detect an unbounded error (a
/// polynomial-part mismatch), which is reported instead of a finite value.
pub fn hinf_error<T: Real>(
    full: &dyn Transfer<T>,
    reduced: &dyn Transfer<T>,
    grid: &FrequencyGrid,
) -> Result<HinfError> {
    check_io_dims(full, reduced)?;
    let samples = grid
        .omegas()
        .par_iter()
        .map(|&w| error_at(full, reduced, w))
        .collect::<Result<Vec<_>>>()?;
    let mut best = HinfError {
        absolute: 0.0,
        relative: 0.0,
        omega: grid.omegas()[0],
        reference: 0.0,
    };
    for (&w, &(err, href)) in grid.omegas().iter().zip(&samples) {
        if err > best.absolute {
            best.absolute = err;
            best.omega = w;
        }
        best.reference = best.reference.max(href);
    }
    let top = *grid.omegas().last().expect("non-empty grid");
    let end_err = samples.last().expect("non-empty grid").0;
    let probes: Vec<f64> = [10.0, 100.0, 1000.0]
        .iter()
        .map(|k| error_at(full, reduced, top * k).map(|(e, _)| e))
        .collect::<Result<_>>()?;
    let growing = end_err < probes[0] && probes[0] < probes[1] && probes[1] < probes[2];
    let threshold = 1e-8 * (1.0 + best.reference);
    if growing && probes[2] > 10.0 * end_err.max(threshold) {
        return Err(Error::PolynomialMismatch(format!(
            "error grows from {end_err:.3e} at omega = {top:.3e} to {:.3e} at omega = {:.3e}",
            probes[2],
            top * 1000.0
        )));
    }
    best.relative = if best.reference > 0.0 {
        best.absolute / best.reference
    } else {
        best.absolute
    };
    Ok(best)
}

/// Settings of the adaptive H2 quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H2Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Frequencies above this are covered by the `1/ω²` tail estimate.
    pub cutoff: f64,
}

impl Default for H2Quadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-300,
            max_intervals: 4000,
            cutoff: 1e8,
        }
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> Result<f64> + Sync>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let xs: Vec<f64> = (0..15)
        .map(|k| {
            if k < 7 {
                c - h * XGK[k]
            } else if k == 7 {
                c
            } else {
                c + h * XGK[14 - k]
            }
        })
        .collect();
    let fx = xs.par_iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    let mut kron = WGK[7] * fx[7];
    let mut gauss = WG[3] * fx[7];
    for k in 0..7 {
        let pair = fx[k] + fx[14 - k];
        kron += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    Ok((kron * h, ((kron - gauss) * h).abs()))
}

/// Adaptive Gauss–Kronrod integration over `[a, b]` with interval bisection.
pub fn integrate_adaptive<F: Fn(f64) -> Result<f64> + Sync>(
    f: F,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<(f64, f64)> {
    let mut intervals: Vec<(f64, f64, f64, f64)> = Vec::new();
    for w in breakpoints.windows(2) {
        let (v, e) = gk15(&f, w[0], w[1])?;
        intervals.push((w[0], w[1], v, e));
    }
    loop {
        let total: f64 = intervals.iter().map(|t| t.2).sum();
        let err: f64 = intervals.iter().map(|t| t.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || intervals.len() >= max_intervals {
            if intervals.len() >= max_intervals {
                log::warn!("adaptive quadrature stopped at {max_intervals} intervals (error estimate {err:.3e})");
            }
            return Ok((total, err));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| {
                x.1 .3
                    .partial_cmp(&y.1 .3)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty");
        let (a, b, _, _) = intervals.swap_remove(idx);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(&f, a, m)?;
        let (v2, e2) = gk15(&f, m, b)?;
        intervals.push((a, m, v1, e1));
        intervals.push((m, b, v2, e2));
    }
}

/// `‖H − Hr‖_H2 = ( (1/2π) ∫ ‖H(iω) − Hr(iω)‖_F² dω )^{1/2}`.
///
/// Uses the symmetry of real systems to integrate over `ω ≥ 0` only, the
/// substitution `ω = tan θ`, and a `1/ω²` tail beyond the cutoff. Fails if
/// the difference does not decay at high frequency.
pub fn h2_error<T: Real>(
    full: &dyn Transfer<T>,
    reduced: &dyn Transfer<T>,
    quad: &H2Quadrature,
) -> Result<f64> {
    check_io_dims(full, reduced)?;
    let diff = |omega: f64| -> Result<f64> {
        let h = full.eval(at(omega))?;
        let hr = reduced.eval(at(omega))?;
        Ok((h - hr).norm_squared().as_f64())
    };
    let href = |omega: f64| -> Result<f64> { Ok(full.eval(at(omega))?.norm().as_f64()) };
    let w = quad.cutoff;
    let tail_lo = diff(w / 100.0)?.sqrt();
    let tail_hi = diff(w)?.sqrt();
    if tail_hi > 1e-6 * (1.0 + href(w)?) && tail_hi > 0.5 * tail_lo {
        return Err(Error::PolynomialMismatch(format!(
            "|H - Hr| = {tail_hi:.3e} at omega = {w:.1e} does not decay"
        )));
    }
    let integrand = |theta: f64| -> Result<f64> {
        let omega = theta.tan();
        let c = 1.0 + omega * omega;
        Ok(diff(omega)? * c)
    };
    let theta_max = w.atan();
    // Breakpoints at the decades keep resonances from hiding inside one panel.
    let mut breaks = vec![0.0];
    let mut decade = 1e-4;
    while decade < w {
        breaks.push(decade.atan());
        decade *= 10.0;
    }
    breaks.push(theta_max);
    let (integral, _) = integrate_adaptive(
        integrand,
        &breaks,
        quad.rel_tol,
        quad.abs_tol,
        quad.max_intervals,
    )?;
    let tail = w * tail_hi * tail_hi;
    let total = (integral + tail) / std::f64::consts::PI;
    Ok(total.max(0.0).sqrt())
}
