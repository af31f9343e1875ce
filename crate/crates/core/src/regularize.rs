//! Structured regularization and rank-condition diagnostics.

use std::fmt;

use nalgebra::{Cholesky, Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    self, default_rank_tol, left_nullspace_basis, nullspace_basis, numerical_rank, skew_part,
    sym_eig, sym_part, ComplexMatrix, Factored,
};
use crate::model::{GenericLti, PhdaeSystem};
use crate::scalar::{cplx, Real};

/// A rank condition `rank(M) = required` with its numerical evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTest {
    pub passed: bool,
    pub rank: usize,
    pub required: usize,
    /// Smallest singular value that must be nonzero, relative to `‖M‖₂`.
    pub gap: f64,
    /// Relative rank tolerance.
    pub tol: f64,
    /// Probe at which the worst case occurred (pointwise tests only).
    pub at: Option<Complex<f64>>,
}

impl fmt::Display for RankTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (rank {}/{}, gap {:.3e}, tol {:.3e}",
            if self.passed { "pass" } else { "FAIL" },
            self.rank,
            self.required,
            self.gap,
            self.tol
        )?;
        if let Some(z) = self.at {
            write!(f, ", at {:.4e}{:+.4e}i", z.re, z.im)?;
        }
        write!(f, ")")
    }
}

fn rank_test<T: Real>(
    m: &DMatrix<T>,
    required: usize,
    at: Option<Complex<f64>>,
) -> Result<RankTest> {
    let s = linalg::svd(m)?;
    let sigma1 = s.singular_values.get(0).copied().unwrap_or_else(T::zero);
    let tol = default_rank_tol(m.nrows(), m.ncols(), sigma1);
    let rank = numerical_rank(&s.singular_values, tol);
    let gap = if required == 0 {
        f64::INFINITY
    } else if sigma1 == T::zero() || s.singular_values.len() < required {
        0.0
    } else {
        (s.singular_values[required - 1] / sigma1).as_f64()
    };
    Ok(RankTest {
        passed: rank >= required,
        rank,
        required,
        gap,
        tol: (m.nrows().max(m.ncols()) as f64) * T::EPS.as_f64(),
        at,
    })
}

fn complex_rank_test<T: Real>(m: &ComplexMatrix<T>, required: usize, at: Complex<f64>) -> RankTest {
    let sv = m.clone().singular_values();
    let mut values: Vec<f64> = sv.iter().map(|x| x.as_f64()).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let sigma1 = values.first().copied().unwrap_or(0.0);
    let tol = (m.nrows().max(m.ncols()) as f64) * T::EPS.as_f64();
    let rank = values.iter().filter(|&&s| s > tol * sigma1).count();
    let gap = if sigma1 == 0.0 || values.len() < required {
        0.0
    } else {
        values[required - 1] / sigma1
    };
    RankTest {
        passed: rank >= required,
        rank,
        required,
        gap,
        tol,
        at: Some(at),
    }
}

/// Outcome of [`diagnose`].
#[derive(Debug, Clone)]
pub struct DiagnosisReport {
    /// `rank [λE − A, B] = n` at every probe.
    pub c1: RankTest,
    /// `rank [E, A S∞(E), B] = n`.
    pub c2: RankTest,
    /// `rank [λE − A; C] = n` at every probe.
    pub o1: RankTest,
    /// `rank [E; T∞(E)ᵀ A; C] = n`.
    pub o2: RankTest,
    /// `T∞(E)ᵀ A S∞(E)` square and nonsingular.
    pub index_leq1: bool,
    /// Relative smallest singular value of `T∞ᵀ A S∞` (`∞` if empty, 0 if not square).
    pub index_gap: f64,
    pub pencil_regular: bool,
    /// A point where `λE − A` is nonsingular.
    pub regularity_witness: Option<Complex<f64>>,
    /// Finite pencil eigenvalues included among the C1/O1 probes.
    pub eigenvalues_probed: usize,
    pub random_probes: usize,
}

impl fmt::Display for DiagnosisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "C1: {}", self.c1)?;
        writeln!(f, "C2: {}", self.c2)?;
        writeln!(f, "O1: {}", self.o1)?;
        writeln!(f, "O2: {}", self.o2)?;
        writeln!(
            f,
            "index <= 1: {} (gap {:.3e})",
            self.index_leq1, self.index_gap
        )?;
        write!(f, "pencil regular: {}", self.pencil_regular)?;
        if let Some(z) = self.regularity_witness {
            write!(f, " (witness {:.4e}{:+.4e}i)", z.re, z.im)?;
        }
        writeln!(f)?;
        write!(
            f,
            "probes: {} random, {} pencil eigenvalues",
            self.random_probes, self.eigenvalues_probed
        )
    }
}

/// Largest system for which pencil eigenvalues are added to the C1/O1 probes.
pub const EIGENVALUE_PROBE_CAP: usize = 400;

const PROBE_SEED: u64 = 0x05ee_d0c1;

fn shifted_complex<T: Real>(sys: &GenericLti<T>, s: Complex<T>) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(sys.n(), sys.n(), |i, j| {
        cplx(s.re * sys.e[(i, j)] - sys.a[(i, j)], s.im * sys.e[(i, j)])
    })
}

/// Finite eigenvalues of `λE − A` through the shift-and-invert map
/// `(A − μE)⁻¹E`, whose eigenvalue `θ ≠ 0` corresponds to `λ = μ + 1/θ`.
///
/// Eigenvalues with `|λ − μ|` beyond about `10⁶` times the smallest
/// `|λ − μ|` are indistinguishable from infinite ones and are not returned.
pub fn finite_pencil_eigenvalues<T: Real>(
    e: &DMatrix<T>,
    a: &DMatrix<T>,
    mu: T,
) -> Result<Vec<Complex<f64>>> {
    let n = e.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let shifted = a - e * mu;
    let m = Factored::new(&shifted)?.solve(e)?;
    let scale = m.norm().as_f64().max(f64::MIN_POSITIVE);
    // infinite eigenvalues of index two (nilpotent 2×2 blocks in θ = 0)
    // split to O(√eps) under rounding, so the cut sits well above that
    let cut = 1e2 * T::EPS.as_f64().sqrt() * scale;
    Ok(m.complex_eigenvalues()
        .iter()
        .map(|z| Complex::new(z.re.as_f64(), z.im.as_f64()))
        .filter(|z| z.norm() > cut)
        .map(|z| Complex::new(mu.as_f64(), 0.0) + Complex::new(1.0, 0.0) / z)
        .collect())
}

/// Rank conditions C1/C2/O1/O2, the index-≤1 test and pencil regularity.
///
/// C1/O1 are checked at `probes` random points plus, for `n ≤`
/// [`EIGENVALUE_PROBE_CAP`], every finite pencil eigenvalue.
pub fn diagnose<T: Real>(sys: &GenericLti<T>, probes: usize) -> Result<DiagnosisReport> {
    let n = sys.n();
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let scale = sys.e.norm().max(sys.a.norm()).as_f64().max(1.0);
    let mut random: Vec<Complex<f64>> = (0..probes)
        .map(|_| {
            let r = 10f64.powf(rng.random_range(-2.0..2.0)) * scale;
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            Complex::from_polar(r, phi)
        })
        .collect();

    let mut witness = None;
    for z in &random {
        if Factored::new(&shifted_complex(sys, cplx(T::lit(z.re), T::lit(z.im)))).is_ok() {
            witness = Some(*z);
            break;
        }
    }
    let pencil_regular = witness.is_some() || n == 0;

    let mut eig_points = Vec::new();
    if pencil_regular && n > 0 && n <= EIGENVALUE_PROBE_CAP {
        let mu = (0..8)
            .map(|k| T::lit(0.37 * scale * 1.7f64.powi(k)))
            .find(|&mu| Factored::new(&(&sys.a - &sys.e * mu)).is_ok());
        if let Some(mu) = mu {
            eig_points = finite_pencil_eigenvalues(&sys.e, &sys.a, mu)?;
        }
    }
    let n_eig = eig_points.len();
    random.extend(eig_points);

    let worst = |tests: Vec<RankTest>, required: usize| -> RankTest {
        tests
            .into_iter()
            .min_by(|a, b| {
                (a.passed, a.gap)
                    .partial_cmp(&(b.passed, b.gap))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(RankTest {
                passed: true,
                rank: required,
                required,
                gap: f64::INFINITY,
                tol: 0.0,
                at: None,
            })
    };
    let (m, p) = (sys.inputs(), sys.outputs());
    let mut c1 = Vec::with_capacity(random.len());
    let mut o1 = Vec::with_capacity(random.len());
    for z in &random {
        let pencil = shifted_complex(sys, cplx(T::lit(z.re), T::lit(z.im)));
        let mut row = ComplexMatrix::zeros(n, n + m);
        row.view_mut((0, 0), (n, n)).copy_from(&pencil);
        row.view_mut((0, n), (n, m))
            .copy_from(&linalg::to_complex(&sys.b));
        c1.push(complex_rank_test(&row, n, *z));
        let mut col = ComplexMatrix::zeros(n + p, n);
        col.view_mut((0, 0), (n, n)).copy_from(&pencil);
        col.view_mut((n, 0), (p, n))
            .copy_from(&linalg::to_complex(&sys.c));
        o1.push(complex_rank_test(&col, n, *z));
    }

    let s_inf = nullspace_basis(&sys.e, None)?;
    let t_inf = left_nullspace_basis(&sys.e, None)?;
    let a_s = &sys.a * &s_inf;
    let c2_mat = hstack(&[&sys.e, &a_s, &sys.b]);
    let t_a = t_inf.transpose() * &sys.a;
    let o2_mat = hstack(&[&sys.e.transpose(), &t_a.transpose(), &sys.c.transpose()]).transpose();

    let core = t_inf.transpose() * &a_s;
    let (index_leq1, index_gap) = if core.nrows() != core.ncols() {
        (false, 0.0)
    } else if core.nrows() == 0 {
        (true, f64::INFINITY)
    } else {
        let t = rank_test(&core, core.nrows(), None)?;
        // relative to the whole of A, so that a tiny block does not pass
        let rel = t.gap * linalg::svd(&core)?.singular_values[0].as_f64()
            / sys.a.norm().as_f64().max(f64::MIN_POSITIVE);
        (t.passed && rel > t.tol, rel)
    };

    Ok(DiagnosisReport {
        c1: worst(c1, n),
        c2: rank_test(&c2_mat, n, None)?,
        o1: worst(o1, n),
        o2: rank_test(&o2_mat, n, None)?,
        index_leq1,
        index_gap,
        pencil_regular,
        regularity_witness: witness,
        eigenvalues_probed: n_eig,
        random_probes: probes,
    })
}

fn hstack<T: Real>(blocks: &[&DMatrix<T>]) -> DMatrix<T> {
    let rows = blocks.iter().map(|b| b.nrows()).max().unwrap_or(0);
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), (b.nrows(), b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}

/// Output of [`remove_singular_part`].
#[derive(Debug, Clone)]
pub struct RegularPart<T: Real> {
    /// The subsystem on `(x̃1, x̃2)`.
    pub system: PhdaeSystem<T>,
    /// Size of the removed block `x̃3`.
    pub dropped: usize,
    /// Orthogonal `V` (n × n); the kept states are its first `n − dropped` columns.
    pub transform: DMatrix<T>,
    /// Size of `x̃1` (regular pencil part).
    pub n_regular: usize,
    /// Size of `x̃2` (zero pencil rows, `B2` of full row rank).
    pub n_input: usize,
}

/// Removes the common kernel of `E`, `J`, `R` that the input does not reach.
///
/// The common kernel is the nullspace of `[E; J; R]`; within it the input
/// map is row-compressed, and the part with zero input is dropped.
pub fn remove_singular_part<T: Real>(sys: &PhdaeSystem<T>) -> Result<RegularPart<T>> {
    let n = sys.n();
    let mut stacked = DMatrix::zeros(3 * n, n);
    stacked.view_mut((0, 0), (n, n)).copy_from(sys.e());
    stacked.view_mut((n, 0), (n, n)).copy_from(sys.j());
    stacked.view_mut((2 * n, 0), (n, n)).copy_from(sys.r());
    let kernel = if n == 0 {
        DMatrix::zeros(0, 0)
    } else {
        nullspace_basis(&stacked, None)?
    };
    let k = kernel.ncols();
    if k == 0 {
        return Ok(RegularPart {
            system: sys.clone(),
            dropped: 0,
            transform: DMatrix::identity(n, n),
            n_regular: n,
            n_input: 0,
        });
    }
    let complement = nullspace_basis(&kernel.transpose(), None)?;
    // row compression of the input acting on the kernel
    let bk = kernel.transpose() * (sys.b() - sys.p());
    let (q, u) = if bk.ncols() == 0 {
        (0, DMatrix::identity(k, k))
    } else {
        let mut padded = DMatrix::zeros(k, k.max(bk.ncols()));
        padded.view_mut((0, 0), (k, bk.ncols())).copy_from(&bk);
        let s = linalg::svd(&padded)?;
        let tol = default_rank_tol(k, bk.ncols(), s.singular_values[0]).max(default_rank_tol(
            n,
            sys.m(),
            sys.b().norm().max(sys.p().norm()),
        ));
        (numerical_rank(&s.singular_values, tol), s.u)
    };
    let rotated = &kernel * u;
    let mut transform = DMatrix::zeros(n, n);
    let nr = complement.ncols();
    transform.view_mut((0, 0), (n, nr)).copy_from(&complement);
    transform.view_mut((0, nr), (n, k)).copy_from(&rotated);
    let dropped = k - q;
    let kept = transform.columns(0, n - dropped).into_owned();
    let system = sys.congruence(&kept)?;
    let report = system.validate();
    if !report.passed() {
        log::warn!("regular part fails structural validation:\n{report}");
    }
    log::info!("singular part: common kernel {k}, input-reached {q}, dropped {dropped}");
    Ok(RegularPart {
        system,
        dropped,
        transform,
        n_regular: nr,
        n_input: q,
    })
}

/// One rank decision of the staircase.
#[derive(Debug, Clone, PartialEq)]
pub struct StepAudit {
    pub step: &'static str,
    /// Magnitudes examined, sorted descending.
    pub values: Vec<f64>,
    pub tol: f64,
    pub rank: usize,
    /// Smallest accepted and largest rejected value.
    pub smallest_kept: Option<f64>,
    pub largest_dropped: Option<f64>,
    /// Accepted and rejected values lie within a factor 10 of the tolerance.
    pub ambiguous: bool,
}

impl StepAudit {
    fn new(step: &'static str, mut values: Vec<f64>, tol: f64) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let rank = values.iter().filter(|&&v| v > tol).count();
        let smallest_kept = rank.checked_sub(1).map(|i| values[i]);
        let largest_dropped = values.get(rank).copied();
        let near = |v: Option<f64>| v.is_some_and(|v| v > tol / 10.0 && v < tol * 10.0);
        let ambiguous = near(smallest_kept) || near(largest_dropped);
        let audit = Self {
            step,
            values,
            tol,
            rank,
            smallest_kept,
            largest_dropped,
            ambiguous,
        };
        if ambiguous {
            log::warn!(
                "{step}: ambiguous rank decision at tol {tol:.3e}: candidate sizes {} and {}",
                rank,
                if near(smallest_kept) {
                    rank - 1
                } else {
                    rank + 1
                }
            );
        } else {
            log::debug!(
                "{step}: rank {rank}, kept >= {smallest_kept:?}, dropped <= {largest_dropped:?}"
            );
        }
        audit
    }
}

/// A named structural certificate of the condensed form.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
}

/// Block sizes of the staircase form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BlockSizes {
    pub n_dyn: usize,
    pub n_alg1_diss: usize,
    pub n_alg1_cons: usize,
    pub n_ind2: usize,
    pub n_sing: usize,
}

#[derive(Debug, Clone)]
pub struct CondensedForm<T: Real> {
    /// Accumulated orthogonal transformation.
    pub transform: DMatrix<T>,
    pub sizes: BlockSizes,
    /// `Vᵀ (E, J, R) V`, `Vᵀ B`, `Vᵀ P`.
    pub system: PhdaeSystem<T>,
    pub audit: Vec<StepAudit>,
    pub certificates: Vec<Certificate>,
}

impl<T: Real> CondensedForm<T> {
    pub fn certified(&self) -> bool {
        self.certificates.iter().all(|c| c.passed)
    }

    /// Plain-text block sizes and rank-gap audit.
    pub fn report(&self) -> String {
        self.to_string()
    }
}

impl<T: Real> fmt::Display for CondensedForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.sizes;
        writeln!(f, "block sizes")?;
        writeln!(f, "  n_dyn        {}", s.n_dyn)?;
        writeln!(f, "  n_alg1_diss  {}", s.n_alg1_diss)?;
        writeln!(f, "  n_alg1_cons  {}", s.n_alg1_cons)?;
        writeln!(f, "  n_ind2       {}", s.n_ind2)?;
        writeln!(f, "  n_sing       {}", s.n_sing)?;
        writeln!(f, "rank decisions")?;
        for a in &self.audit {
            writeln!(
                f,
                "  {:<10} rank {:>4} of {:>4}  tol {:.3e}  kept >= {}  dropped <= {}{}",
                a.step,
                a.rank,
                a.values.len(),
                a.tol,
                a.smallest_kept.map_or("-".into(), |v| format!("{v:.3e}")),
                a.largest_dropped.map_or("-".into(), |v| format!("{v:.3e}")),
                if a.ambiguous { "  AMBIGUOUS" } else { "" }
            )?;
        }
        writeln!(f, "certificates")?;
        for c in &self.certificates {
            writeln!(
                f,
                "  {:<24} {}  ({:.3e})",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.value
            )?;
        }
        Ok(())
    }
}

fn embed<T: Real>(n: usize, start: usize, q: &DMatrix<T>) -> DMatrix<T> {
    let mut t = DMatrix::identity(n, n);
    t.view_mut((start, start), (q.nrows(), q.ncols()))
        .copy_from(q);
    t
}

/// Eigenvectors of a symmetric block ordered by decreasing eigenvalue.
fn sym_split<T: Real>(m: &DMatrix<T>) -> Result<(DMatrix<T>, Vec<f64>)> {
    let eig = sym_eig(m)?;
    let k = m.nrows();
    let q = DMatrix::from_fn(k, k, |i, j| eig.eigenvectors[(i, k - 1 - j)]);
    let vals = (0..k)
        .map(|j| eig.eigenvalues[k - 1 - j].as_f64())
        .collect();
    Ok((q, vals))
}

/// Orthogonal `[range basis, kernel basis]` of a square block.
fn range_kernel_split<T: Real>(m: &DMatrix<T>) -> Result<(DMatrix<T>, Vec<f64>)> {
    let s = linalg::svd(m)?;
    let vals = s.singular_values.iter().map(|v| v.as_f64()).collect();
    Ok((s.v, vals))
}

/// Staircase form of the regular part: `E11 > 0`, `R22 > 0`, `J33`
/// nonsingular, `[J41 J42]` of full row rank, then the input-only block.
pub fn condensed_form<T: Real>(sys: &PhdaeSystem<T>) -> Result<CondensedForm<T>> {
    let n = sys.n();
    let mut v = DMatrix::<T>::identity(n, n);
    let mut audit = Vec::new();
    let scale = |m: &DMatrix<T>| {
        default_rank_tol(
            n,
            n,
            linalg::svd(m)
                .map(|s| s.singular_values.get(0).copied().unwrap_or_else(T::zero))
                .unwrap_or_else(|_| T::zero()),
        )
        .as_f64()
    };

    // E: positive definite part first
    let (q, vals) = sym_split(sys.e())?;
    let step = StepAudit::new("E", vals.iter().map(|x| x.abs()).collect(), scale(sys.e()));
    let n_dyn = vals.iter().filter(|&&x| x > step.tol).count();
    audit.push(step);
    v = &v * q;

    // R on the trailing block
    let r_t = v.transpose() * sys.r() * &v;
    let rest = n - n_dyn;
    let (q, vals) = sym_split(&r_t.view((n_dyn, n_dyn), (rest, rest)).into_owned())?;
    let step = StepAudit::new(
        "R22",
        vals.iter().map(|x| x.abs()).collect(),
        scale(sys.r()),
    );
    let n_diss = vals.iter().filter(|&&x| x > step.tol).count();
    audit.push(step);
    v = &v * embed(n, n_dyn, &q);

    // J on the next trailing block: range/kernel split of a skew block
    let off = n_dyn + n_diss;
    let rest = n - off;
    let j_t = v.transpose() * sys.j() * &v;
    let (q, vals) = range_kernel_split(&j_t.view((off, off), (rest, rest)).into_owned())?;
    let step = StepAudit::new("J33", vals, scale(sys.j()));
    let n_cons = step.rank;
    audit.push(step);
    v = &v * embed(n, off, &q);

    // remaining rows: those coupled through J to the first two blocks
    let off2 = off + n_cons;
    let rest = n - off2;
    let j_t = v.transpose() * sys.j() * &v;
    let coupling = j_t.view((off2, 0), (rest, off)).into_owned();
    let (n_ind2, q) = if rest == 0 || off == 0 {
        (0, DMatrix::identity(rest, rest))
    } else {
        let mut padded = DMatrix::zeros(rest, rest.max(off));
        padded.view_mut((0, 0), (rest, off)).copy_from(&coupling);
        let s = linalg::svd(&padded)?;
        let vals: Vec<f64> = s.singular_values.iter().map(|x| x.as_f64()).collect();
        let step = StepAudit::new("[J41 J42]", vals, scale(sys.j()));
        let k = step.rank.min(off);
        audit.push(step);
        (k, s.u)
    };
    v = &v * embed(n, off2, &q);
    let n_sing = rest - n_ind2;

    let system = sys.congruence(&v)?;
    let sizes = BlockSizes {
        n_dyn,
        n_alg1_diss: n_diss,
        n_alg1_cons: n_cons,
        n_ind2,
        n_sing,
    };
    let certificates = certify(&system, &sizes, &v)?;
    Ok(CondensedForm {
        transform: v,
        sizes,
        system,
        audit,
        certificates,
    })
}

fn certify<T: Real>(
    sys: &PhdaeSystem<T>,
    s: &BlockSizes,
    v: &DMatrix<T>,
) -> Result<Vec<Certificate>> {
    let n = sys.n();
    let tol = |m: &DMatrix<T>| default_rank_tol(n, n, m.norm()).as_f64() * 10.0;
    let mut out = Vec::new();
    let ortho = (v.transpose() * v - DMatrix::identity(n, n))
        .norm()
        .as_f64();
    out.push(Certificate {
        name: "transform orthogonal",
        passed: ortho <= 1e-12 * (n.max(1) as f64).sqrt(),
        value: ortho,
    });
    let min_eig = |m: DMatrix<T>| -> Result<f64> { Ok(linalg::min_sym_eigenvalue(&m)?.as_f64()) };
    let e11 = sys.e().view((0, 0), (s.n_dyn, s.n_dyn)).into_owned();
    let v_e = if s.n_dyn == 0 {
        f64::INFINITY
    } else {
        min_eig(e11)?
    };
    out.push(Certificate {
        name: "E11 > 0",
        passed: v_e > tol(sys.e()),
        value: v_e,
    });
    let o = s.n_dyn;
    let r22 = sys
        .r()
        .view((o, o), (s.n_alg1_diss, s.n_alg1_diss))
        .into_owned();
    let v_r = if s.n_alg1_diss == 0 {
        f64::INFINITY
    } else {
        min_eig(r22)?
    };
    out.push(Certificate {
        name: "R22 > 0",
        passed: v_r > tol(sys.r()),
        value: v_r,
    });
    let o = s.n_dyn + s.n_alg1_diss;
    let j33 = sys
        .j()
        .view((o, o), (s.n_alg1_cons, s.n_alg1_cons))
        .into_owned();
    let v_j = if s.n_alg1_cons == 0 {
        f64::INFINITY
    } else {
        linalg::svd(&j33)?.singular_values.min().as_f64()
    };
    out.push(Certificate {
        name: "J33 nonsingular",
        passed: v_j > tol(sys.j()),
        value: v_j,
    });
    let o4 = o + s.n_alg1_cons;
    let j4 = sys.j().view((o4, 0), (s.n_ind2, o)).into_owned();
    let v_4 = if s.n_ind2 == 0 {
        f64::INFINITY
    } else {
        let sv = linalg::svd(&j4)?.singular_values;
        if sv.len() < s.n_ind2 {
            0.0
        } else {
            sv[s.n_ind2 - 1].as_f64()
        }
    };
    out.push(Certificate {
        name: "[J41 J42] full row rank",
        passed: v_4 > tol(sys.j()),
        value: v_4,
    });
    let k = s.n_dyn + s.n_alg1_diss;
    let p_rest = sys.p().rows(k, n - k).amax().as_f64();
    let p_scale = sys
        .p()
        .amax()
        .as_f64()
        .max(sys.b().amax().as_f64())
        .max(1.0);
    out.push(Certificate {
        name: "P3, P4, P5 vanish",
        passed: p_rest <= 1e-10 * p_scale,
        value: p_rest,
    });
    // zero pattern of the pencil beyond the staircase blocks
    let e_rest = sys.e().columns(s.n_dyn, n - s.n_dyn).amax().as_f64();
    let r_rest = sys.r().columns(k, n - k).amax().as_f64();
    let zero_scale = sys
        .e()
        .amax()
        .as_f64()
        .max(sys.r().amax().as_f64())
        .max(1.0);
    out.push(Certificate {
        name: "E, R zero pattern",
        passed: e_rest.max(r_rest) <= 1e-10 * zero_scale,
        value: e_rest.max(r_rest),
    });
    Ok(out)
}

/// Closes the loop `u = v − K y` with `K` symmetric positive definite.
///
/// With `M = (K⁻¹ + D)⁻¹` the closed loop is `A − 𝓑 M 𝓒`, input map
/// `𝓑(I − M D)`, output map `(I − D M) 𝓒`, feedthrough `(I − D M) D`,
/// split back into pH form. The dissipation of `K` enters `R`.
pub fn output_feedback_regularize<T: Real>(
    sys: &PhdaeSystem<T>,
    k: &DMatrix<T>,
) -> Result<PhdaeSystem<T>> {
    let m = sys.m();
    if k.shape() != (m, m) {
        return Err(Error::dim(format!(
            "feedback gain is {}x{}, expected {m}x{m}",
            k.nrows(),
            k.ncols()
        )));
    }
    let asym = (k - k.transpose()).norm();
    if asym > T::tol(1e-12) * k.norm() {
        return Err(Error::NotPositiveDefinite(
            "feedback gain is not symmetric".into(),
        ));
    }
    let chol = Cholesky::new(sym_part(k))
        .ok_or_else(|| Error::NotPositiveDefinite("feedback gain".into()))?;
    let k_inv = chol.inverse();
    let g = sys.as_generic();
    let inner = &k_inv + &g.d;
    let mm = Factored::new(&inner)?.solve(&DMatrix::identity(m, m))?;
    let id = DMatrix::<T>::identity(m, m);
    let a = &g.a - &g.b * &mm * &g.c;
    let b = &g.b * (&id - &mm * &g.d);
    let c = (&id - &g.d * &mm) * &g.c;
    let d = (&id - &g.d * &mm) * &g.d;
    let half = T::lit(0.5);
    PhdaeSystem::new(
        g.e.clone(),
        skew_part(&a),
        -sym_part(&a),
        (&b + c.transpose()) * half,
        (c.transpose() - &b) * half,
        sym_part(&d),
        skew_part(&d),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::Transfer;
    use nalgebra::{dmatrix, DVector};

    fn worked() -> PhdaeSystem<f64> {
        PhdaeSystem::collocated(
            dmatrix![1.0, 0.0; 0.0, 0.0],
            dmatrix![0.0, 1.0; -1.0, 0.0],
            dmatrix![0.0, 0.0; 0.0, 1.0],
            dmatrix![2.0; 1.0],
        )
        .unwrap()
    }

    fn index2() -> PhdaeSystem<f64> {
        PhdaeSystem::collocated(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0])),
            dmatrix![0.0, 1.0, 0.0; -1.0, 0.0, 1.0; 0.0, -1.0, 0.0],
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0])),
            dmatrix![1.0; 0.0; 0.0],
        )
        .unwrap()
    }

    fn pad(sys: &PhdaeSystem<f64>, d: usize, b_row: Option<f64>) -> PhdaeSystem<f64> {
        let n = sys.n();
        let m = sys.m();
        let grow = |x: &DMatrix<f64>| {
            let mut y = DMatrix::zeros(n + d, n + d);
            y.view_mut((0, 0), (n, n)).copy_from(x);
            y
        };
        let mut b = DMatrix::zeros(n + d, m);
        b.view_mut((0, 0), (n, m)).copy_from(sys.b());
        if let Some(v) = b_row {
            b[(n, 0)] = v;
        }
        let mut p = DMatrix::zeros(n + d, m);
        p.view_mut((0, 0), (n, m)).copy_from(sys.p());
        PhdaeSystem::new(
            grow(sys.e()),
            grow(sys.j()),
            grow(sys.r()),
            b,
            p,
            sys.s().clone(),
            sys.n_mat().clone(),
        )
        .unwrap()
    }

    #[test]
    fn diagnose_examples() {
        let ode = PhdaeSystem::collocated(
            DMatrix::identity(2, 2),
            dmatrix![0.0, 1.0; -1.0, 0.0],
            DMatrix::identity(2, 2),
            dmatrix![1.0; 0.0],
        )
        .unwrap();
        let rep = diagnose(&ode.as_generic(), 16).unwrap();
        assert!(
            rep.index_leq1 && rep.pencil_regular && rep.c2.passed && rep.c1.passed,
            "{rep}"
        );
        assert_eq!(rep.eigenvalues_probed, 2);

        let rep = diagnose(&worked().as_generic(), 16).unwrap();
        assert!(rep.c2.passed && rep.o2.passed && rep.index_leq1, "{rep}");

        let rep = diagnose(&index2().as_generic(), 16).unwrap();
        assert!(!rep.index_leq1, "{rep}");
        assert!(rep.pencil_regular);
    }

    #[test]
    fn finite_eigenvalues_of_index2_fixture() {
        let g = index2().as_generic();
        let ev = finite_pencil_eigenvalues(&g.e, &g.a, 0.5).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0] - Complex::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn singular_pencil_is_detected() {
        let sys = pad(&worked(), 1, None);
        let rep = diagnose(&sys.as_generic(), 16).unwrap();
        assert!(!rep.pencil_regular);
    }

    #[test]
    fn regular_system_is_unchanged() {
        let out = remove_singular_part(&worked()).unwrap();
        assert_eq!(out.dropped, 0);
        assert_eq!(out.system, worked());
    }

    #[test]
    fn zero_padding_is_removed() {
        let base = worked();
        for d in [1, 2, 5] {
            let out = remove_singular_part(&pad(&base, d, None)).unwrap();
            assert_eq!(out.dropped, d);
            assert_eq!(out.system.n(), 2);
            assert!(out.system.validate().passed());
            for w in [0.01, 1.0, 100.0] {
                let s = Complex::new(0.0, w);
                assert!((out.system.eval(s).unwrap() - base.eval(s).unwrap()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn input_reached_padding_is_kept() {
        let out = remove_singular_part(&pad(&worked(), 1, Some(1.0))).unwrap();
        assert_eq!(out.dropped, 0);
        assert_eq!(out.n_input, 1);
        assert_eq!(out.n_regular, 2);
    }

    #[test]
    fn condensed_form_examples() {
        let ode = PhdaeSystem::collocated(
            DMatrix::identity(3, 3),
            DMatrix::zeros(3, 3),
            DMatrix::identity(3, 3),
            dmatrix![1.0; 0.0; 0.0],
        )
        .unwrap();
        let cf = condensed_form(&ode).unwrap();
        assert_eq!(
            cf.sizes,
            BlockSizes {
                n_dyn: 3,
                ..Default::default()
            }
        );

        let cf = condensed_form(&worked()).unwrap();
        assert_eq!(
            cf.sizes,
            BlockSizes {
                n_dyn: 1,
                n_alg1_diss: 1,
                ..Default::default()
            }
        );
        assert!(cf.certified(), "{cf}");

        let cf = condensed_form(&index2()).unwrap();
        assert_eq!(
            cf.sizes,
            BlockSizes {
                n_dyn: 2,
                n_ind2: 1,
                ..Default::default()
            }
        );
        assert!(cf.certified(), "{cf}");
        let report = cf.report();
        assert!(report.contains("n_ind2       1"));
    }

    #[test]
    fn condensed_form_with_conservative_and_singular_blocks() {
        // x1 dynamic; (x2, x3) a lossless algebraic pair; x4 input-only
        let e = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]));
        let j = dmatrix![
            0.0, 0.0, 0.0, 0.0;
            0.0, 0.0, 2.0, 0.0;
            0.0, -2.0, 0.0, 0.0;
            0.0, 0.0, 0.0, 0.0
        ];
        let r = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.0, 0.0, 0.0]));
        let b = dmatrix![1.0; 1.0; 0.0; 1.0];
        let sys = PhdaeSystem::collocated(e, j, r, b).unwrap();
        let cf = condensed_form(&sys).unwrap();
        assert_eq!(
            cf.sizes,
            BlockSizes {
                n_dyn: 1,
                n_alg1_cons: 2,
                n_sing: 1,
                ..Default::default()
            }
        );
        assert!(cf.certified(), "{cf}");
    }

    #[test]
    fn condensed_form_preserves_transfer() {
        let sys = index2();
        let cf = condensed_form(&sys).unwrap();
        for w in [0.1, 1.0, 10.0] {
            let s = Complex::new(0.0, w);
            assert!((cf.system.eval(s).unwrap() - sys.eval(s).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn feedback_examples() {
        let scalar =
            PhdaeSystem::collocated(dmatrix![0.0], dmatrix![0.0], dmatrix![0.0], dmatrix![1.0])
                .unwrap();
        let cl = output_feedback_regularize(&scalar, &dmatrix![1.0]).unwrap();
        assert_eq!(cl.as_generic().a[(0, 0)], -1.0);
        assert!(diagnose(&cl.as_generic(), 16).unwrap().index_leq1);

        let w = worked();
        let cl = output_feedback_regularize(&w, &DMatrix::identity(1, 1)).unwrap();
        assert!(cl.validate().passed());

        let cl = output_feedback_regularize(&w, &dmatrix![1e-12]).unwrap();
        assert!((cl.as_generic().a - w.as_generic().a).norm() < 1e-11);
        assert!(output_feedback_regularize(&w, &dmatrix![-1.0]).is_err());
    }
}
