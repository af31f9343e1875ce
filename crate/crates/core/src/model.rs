//! Port-Hamiltonian descriptor systems and their block-partitioned views.

use std::fmt;

use nalgebra::{Cholesky, DMatrix, DMatrixView, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, check_finite, check_square, condition_estimate};
use crate::scalar::Real;

/// Condition-number threshold above which a block counts as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Default relative tolerance of the structural checks (double precision).
pub const DEFAULT_TOL: f64 = 1e-10;

/// A linear pHDAE `E ẋ = (J − R) x + (B − P) u`, `y = (B + P)ᵀ x + (S + N) u`.
///
/// Construction checks only shapes and finiteness; the structural
/// conditions are reported by [`PhdaeSystem::validate_structure`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhdaeSystem<T: Real> {
    e: DMatrix<T>,
    j: DMatrix<T>,
    r: DMatrix<T>,
    b: DMatrix<T>,
    p: DMatrix<T>,
    s: DMatrix<T>,
    n: DMatrix<T>,
}

/// Descriptor system in unstructured form, `H(s) = C (sE − A)⁻¹ B + D`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericLti<T: Real> {
    pub e: DMatrix<T>,
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub c: DMatrix<T>,
    pub d: DMatrix<T>,
}

impl<T: Real> GenericLti<T> {
    pub fn new(
        e: DMatrix<T>,
        a: DMatrix<T>,
        b: DMatrix<T>,
        c: DMatrix<T>,
        d: DMatrix<T>,
    ) -> Result<Self> {
        check_square("E", &e)?;
        check_square("A", &a)?;
        let n = e.nrows();
        if a.nrows() != n || b.nrows() != n || c.ncols() != n {
            return Err(Error::dim(format!(
                "state dimension {n}: A {}x{}, B {}x{}, C {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::dim(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        for (name, m) in [("E", &e), ("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            check_finite(name, m)?;
        }
        Ok(Self { e, a, b, c, d })
    }

    pub fn n(&self) -> usize {
        self.e.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }
}

impl<T: Real> PhdaeSystem<T> {
    pub fn new(
        e: DMatrix<T>,
        j: DMatrix<T>,
        r: DMatrix<T>,
        b: DMatrix<T>,
        p: DMatrix<T>,
        s: DMatrix<T>,
        n: DMatrix<T>,
    ) -> Result<Self> {
        for (name, m) in [("E", &e), ("J", &j), ("R", &r), ("S", &s), ("N", &n)] {
            check_square(name, m)?;
        }
        let dim = e.nrows();
        let m = b.ncols();
        for (name, mat) in [("J", &j), ("R", &r)] {
            if mat.nrows() != dim {
                return Err(Error::dim(format!(
                    "{name} is {0}x{0}, E is {dim}x{dim}",
                    mat.nrows()
                )));
            }
        }
        if b.nrows() != dim || p.nrows() != dim || p.ncols() != m {
            return Err(Error::dim(format!(
                "B is {}x{}, P is {}x{}, expected {dim}x{m}",
                b.nrows(),
                b.ncols(),
                p.nrows(),
                p.ncols()
            )));
        }
        for (name, mat) in [("S", &s), ("N", &n)] {
            if mat.nrows() != m {
                return Err(Error::dim(format!(
                    "{name} is {0}x{0}, expected {m}x{m}",
                    mat.nrows()
                )));
            }
        }
        for (name, mat) in [
            ("E", &e),
            ("J", &j),
            ("R", &r),
            ("B", &b),
            ("P", &p),
            ("S", &s),
            ("N", &n),
        ] {
            check_finite(name, mat)?;
        }
        Ok(Self {
            e,
            j,
            r,
            b,
            p,
            s,
            n,
        })
    }

    /// System with `P = 0`, `S = 0`, `N = 0` (collocated output `y = Bᵀx`).
    pub fn collocated(e: DMatrix<T>, j: DMatrix<T>, r: DMatrix<T>, b: DMatrix<T>) -> Result<Self> {
        let (n, m) = b.shape();
        Self::new(
            e,
            j,
            r,
            b,
            DMatrix::zeros(n, m),
            DMatrix::zeros(m, m),
            DMatrix::zeros(m, m),
        )
    }

    pub fn n(&self) -> usize {
        self.e.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn e(&self) -> &DMatrix<T> {
        &self.e
    }
    pub fn j(&self) -> &DMatrix<T> {
        &self.j
    }
    pub fn r(&self) -> &DMatrix<T> {
        &self.r
    }
    pub fn b(&self) -> &DMatrix<T> {
        &self.b
    }
    pub fn p(&self) -> &DMatrix<T> {
        &self.p
    }
    pub fn s(&self) -> &DMatrix<T> {
        &self.s
    }
    pub fn n_mat(&self) -> &DMatrix<T> {
        &self.n
    }

    /// `W = [[R, P], [Pᵀ, S]]`.
    pub fn passivity_matrix(&self) -> DMatrix<T> {
        passivity_matrix(&self.r, &self.p, &self.s)
    }

    /// `½ xᵀ E x`.
    pub fn hamiltonian(&self, x: &DVector<T>) -> Result<T> {
        if x.len() != self.n() {
            return Err(Error::dim(format!(
                "state has length {}, expected {}",
                x.len(),
                self.n()
            )));
        }
        Ok((x.transpose() * &self.e * x)[(0, 0)] * T::lit(0.5))
    }

    pub fn as_generic(&self) -> GenericLti<T> {
        GenericLti {
            e: self.e.clone(),
            a: &self.j - &self.r,
            b: &self.b - &self.p,
            c: (&self.b + &self.p).transpose(),
            d: &self.s + &self.n,
        }
    }

    /// `(TᵀET, TᵀJT, TᵀRT, TᵀB, TᵀP, S, N)` for an `n × k` matrix `T`.
    pub fn congruence(&self, t: &DMatrix<T>) -> Result<Self> {
        if t.nrows() != self.n() {
            return Err(Error::dim(format!(
                "transformation has {} rows, system has n = {}",
                t.nrows(),
                self.n()
            )));
        }
        let tt = t.transpose();
        Self::new(
            &tt * &self.e * t,
            &tt * &self.j * t,
            &tt * &self.r * t,
            &tt * &self.b,
            &tt * &self.p,
            self.s.clone(),
            self.n.clone(),
        )
    }

    /// Symmetric permutation of the state: new state `k` is old state `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if order.len() != n
            || order
                .iter()
                .any(|&k| k >= n || std::mem::replace(&mut seen[k], true))
        {
            return Err(Error::dim(format!(
                "{order:?} is not a permutation of 0..{n}"
            )));
        }
        let pm = DMatrix::from_fn(
            n,
            n,
            |i, k| if order[k] == i { T::one() } else { T::zero() },
        );
        self.congruence(&pm)
    }

    /// Structural checks at the default tolerance.
    pub fn validate(&self) -> ValidationReport {
        self.validate_structure(T::tol(DEFAULT_TOL))
    }

    /// Checks the four defining conditions with relative tolerance `tol`.
    ///
    /// Symmetry defects are measured as `‖M ∓ Mᵀ‖_F / ‖M‖_F`; definiteness
    /// as the smallest eigenvalue, which must be `≥ −tol·‖M‖₂`.
    pub fn validate_structure(&self, tol: T) -> ValidationReport {
        let tol = tol.as_f64();
        let mut checks = Vec::with_capacity(4);

        let e_sym = relative_defect(&self.e, true);
        let e_min = min_eig_f64(&self.e);
        let e_scale = spectral_norm(&self.e);
        checks.push(Check {
            condition: Condition::EnergyMatrix,
            passed: e_sym <= tol && e_min >= -tol * e_scale,
            symmetry_defect: e_sym,
            min_eigenvalue: Some(e_min),
        });

        let j_skew = relative_defect(&self.j, false);
        checks.push(Check {
            condition: Condition::Skew,
            passed: j_skew <= tol,
            symmetry_defect: j_skew,
            min_eigenvalue: None,
        });

        let w = self.passivity_matrix();
        let w_sym = relative_defect(&w, true);
        let w_min = min_eig_f64(&w);
        let w_scale = spectral_norm(&w);
        checks.push(Check {
            condition: Condition::Passivity,
            passed: w_sym <= tol && w_min >= -tol * w_scale,
            symmetry_defect: w_sym,
            min_eigenvalue: Some(w_min),
        });

        let s_sym = relative_defect(&self.s, true);
        let n_skew = relative_defect(&self.n, false);
        checks.push(Check {
            condition: Condition::Feedthrough,
            passed: s_sym <= tol && n_skew <= tol,
            symmetry_defect: s_sym.max(n_skew),
            min_eigenvalue: None,
        });

        ValidationReport { tol, checks }
    }

    pub fn partition_index1(&self, n1: usize) -> Result<Index1Partition<'_, T>> {
        Index1Partition::new(self, n1)
    }

    pub fn partition_index2(&self, n1: usize) -> Result<Index2Partition<'_, T>> {
        Index2Partition::new(self, n1)
    }

    pub fn partition_mixed(&self, n1: usize, n2: usize) -> Result<MixedPartition<'_, T>> {
        MixedPartition::new(self, n1, n2)
    }
}

pub fn passivity_matrix<T: Real>(r: &DMatrix<T>, p: &DMatrix<T>, s: &DMatrix<T>) -> DMatrix<T> {
    let (n, m) = p.shape();
    let mut w = DMatrix::zeros(n + m, n + m);
    w.view_mut((0, 0), (n, n)).copy_from(r);
    w.view_mut((0, n), (n, m)).copy_from(p);
    w.view_mut((n, 0), (m, n)).copy_from(&p.transpose());
    w.view_mut((n, n), (m, m)).copy_from(s);
    w
}

/// `(M + Mᵀ)/2` and `(M − Mᵀ)/2`.
pub fn symmetric_skew_split<T: Real>(m: &DMatrix<T>) -> Result<(DMatrix<T>, DMatrix<T>)> {
    check_square("matrix", m)?;
    Ok((linalg::sym_part(m), linalg::skew_part(m)))
}

fn relative_defect<T: Real>(m: &DMatrix<T>, symmetric: bool) -> f64 {
    let norm = m.norm().as_f64();
    if norm == 0.0 {
        return 0.0;
    }
    let d = if symmetric {
        m - m.transpose()
    } else {
        m + m.transpose()
    };
    d.norm().as_f64() / norm
}

fn min_eig_f64<T: Real>(m: &DMatrix<T>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    linalg::min_sym_eigenvalue(m)
        .map(|x| x.as_f64())
        .unwrap_or(f64::NAN)
}

fn spectral_norm<T: Real>(m: &DMatrix<T>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    linalg::svd(m)
        .map(|s| s.singular_values[0].as_f64())
        .unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// `E = Eᵀ ⪰ 0`
    EnergyMatrix,
    /// `J = −Jᵀ`
    Skew,
    /// `W = Wᵀ ⪰ 0`
    Passivity,
    /// `S = Sᵀ`, `N = −Nᵀ`
    Feedthrough,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::EnergyMatrix => "E symmetric positive semidefinite",
            Condition::Skew => "J skew-symmetric",
            Condition::Passivity => "W = [[R, P], [P^T, S]] symmetric positive semidefinite",
            Condition::Feedthrough => "S symmetric, N skew-symmetric",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub condition: Condition,
    pub passed: bool,
    /// Relative (skew-)symmetry defect.
    pub symmetry_defect: f64,
    /// Smallest eigenvalue, for the definiteness conditions.
    pub min_eigenvalue: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub tol: f64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, condition: Condition) -> &Check {
        self.checks
            .iter()
            .find(|c| c.condition == condition)
            .expect("every condition is checked")
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "structure check (relative tolerance {:.1e})", self.tol)?;
        for c in &self.checks {
            write!(
                f,
                "  [{}] {}: symmetry defect {:.3e}",
                if c.passed { "pass" } else { "FAIL" },
                c.condition,
                c.symmetry_defect
            )?;
            if let Some(l) = c.min_eigenvalue {
                write!(f, ", min eigenvalue {l:.6e}")?;
            }
            writeln!(f)?;
        }
        write!(f, "result: {}", if self.passed() { "pass" } else { "FAIL" })
    }
}

fn block<T: Real>(
    m: &DMatrix<T>,
    r0: usize,
    c0: usize,
    nr: usize,
    nc: usize,
) -> DMatrixView<'_, T> {
    m.view((r0, c0), (nr, nc))
}

fn require_zero<T: Real>(name: &str, m: DMatrixView<'_, T>, scale: T) -> Result<()> {
    let tol = T::tol(DEFAULT_TOL) * scale.max(T::one());
    let worst = m.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    if worst > tol {
        return Err(Error::Partition(format!(
            "block {name} must vanish but has an entry of magnitude {worst:.3e}"
        )));
    }
    Ok(())
}

fn require_spd<T: Real>(name: &str, m: DMatrixView<'_, T>) -> Result<()> {
    let owned = m.into_owned();
    if owned.nrows() == 0 {
        return Ok(());
    }
    let min = linalg::min_sym_eigenvalue(&owned)?;
    let scale = spectral_norm(&owned);
    if Cholesky::new(linalg::sym_part(&owned)).is_none()
        || min.as_f64() <= T::tol(DEFAULT_TOL).as_f64() * scale
    {
        return Err(Error::Partition(format!(
            "{name} must be symmetric positive definite (smallest eigenvalue {:.3e})",
            min.as_f64()
        )));
    }
    Ok(())
}

fn require_nonsingular<T: Real>(name: &str, m: &DMatrix<T>) -> Result<()> {
    let cond = condition_estimate(m);
    if !(cond < SINGULAR_CONDITION) {
        return Err(Error::Partition(format!(
            "{name} is singular (condition estimate {cond:.3e})"
        )));
    }
    Ok(())
}

fn is_zero<T: Real>(m: DMatrixView<'_, T>, scale: T) -> bool {
    let tol = T::EPS * T::lit(16.0) * scale;
    m.iter().all(|v| v.abs() <= tol)
}

/// Semi-explicit index-1 view: `E = diag(E11, 0)`, `J22 − R22` nonsingular.
#[derive(Debug, Clone, Copy)]
pub struct Index1Partition<'a, T: Real> {
    sys: &'a PhdaeSystem<T>,
    n1: usize,
}

impl<'a, T: Real> Index1Partition<'a, T> {
    pub fn new(sys: &'a PhdaeSystem<T>, n1: usize) -> Result<Self> {
        let n = sys.n();
        if n1 > n {
            return Err(Error::Partition(format!("n1 = {n1} exceeds n = {n}")));
        }
        let n2 = n - n1;
        let part = Self { sys, n1 };
        let scale = sys.e.norm();
        require_zero("E12", block(&sys.e, 0, n1, n1, n2), scale)?;
        require_zero("E21", block(&sys.e, n1, 0, n2, n1), scale)?;
        require_zero("E22", block(&sys.e, n1, n1, n2, n2), scale)?;
        require_spd("E11", part.e11())?;
        if n2 > 0 {
            require_nonsingular("J22 - R22", &part.a22())?;
        }
        Ok(part)
    }

    pub fn system(&self) -> &'a PhdaeSystem<T> {
        self.sys
    }
    pub fn n1(&self) -> usize {
        self.n1
    }
    pub fn n2(&self) -> usize {
        self.sys.n() - self.n1
    }
    fn v(&self, m: &'a DMatrix<T>, bi: usize, bj: usize) -> DMatrixView<'a, T> {
        let (n1, n2) = (self.n1, self.n2());
        let (r0, nr) = if bi == 1 { (0, n1) } else { (n1, n2) };
        let (c0, nc) = match bj {
            0 => (0, m.ncols()),
            1 => (0, n1),
            _ => (n1, n2),
        };
        m.view((r0, c0), (nr, nc))
    }
    pub fn e11(&self) -> DMatrixView<'a, T> {
        self.v(&self.sys.e, 1, 1)
    }
    pub fn j11(&self) -> DMatrixView<'a, T> {
        self.v(&self.sys.j, 1, 1)
    }
    pub fn j12(&self) -> DMatrixView<'a, T> {
        self.v(&self.sys.j, 1, 2)
    }
    pub fn j21(&self) -> DMatrixView<'a, T> {
        self.v(&self.sys.j, 2, 1)
    }
    pub fn j22(&self) -> DMatrixView<'a, T> {
        self.v(&self.sys.j, 2, 2)
    }
    pub fn r11(&self) -> DMatrixView<'a, T> {
        self.v(&self.sys.r, 1, 1)
    }
    pub fn r12(&self) -> DMatrixView<'a, T> {
        self.v(&self.sys.r, 1, 2)
    }
    pub fn r22(&self) -> DMatrixView<'a, T> {
        self.v(&self.sys.r, 2, 2)
    }
    pub fn b1(&self) -> DMatrixView<'a, T> {
        self.v(&self.sys.b, 1, 0)
    }
    pub fn b2(&self) -> DMatrixView<'a, T> {
        self.v(&self.sys.b, 2, 0)
    }
    pub fn p1(&self) -> DMatrixView<'a, T> {
        self.v(&self.sys.p, 1, 0)
    }
    pub fn p2(&self) -> DMatrixView<'a, T> {
        self.v(&self.sys.p, 2, 0)
    }
    /// `J22 − R22`
    pub fn a22(&self) -> DMatrix<T> {
        self.j22() - self.r22()
    }
    /// True when `B2 = P2 = 0`, so the constant term needs no correction.
    pub fn b2_zero(&self) -> bool {
        let scale = self.sys.b.norm() + self.sys.p.norm();
        is_zero(self.b2(), scale) && is_zero(self.p2(), scale)
    }
}

/// Semi-explicit index-2 view: `E = diag(E11, 0)`, `J = [[J11, J12], [−J12ᵀ, 0]]`,
/// `R = diag(R11, 0)`, `J12ᵀ E11⁻¹ J12` nonsingular.
#[derive(Debug, Clone, Copy)]
pub struct Index2Partition<'a, T: Real> {
    sys: &'a PhdaeSystem<T>,
    n1: usize,
}

impl<'a, T: Real> Index2Partition<'a, T> {
    pub fn new(sys: &'a PhdaeSystem<T>, n1: usize) -> Result<Self> {
        let n = sys.n();
        if n1 > n {
            return Err(Error::Partition(format!("n1 = {n1} exceeds n = {n}")));
        }
        let n2 = n - n1;
        let part = Self { sys, n1 };
        let se = sys.e.norm();
        let sj = sys.j.norm();
        let sr = sys.r.norm();
        require_zero("E12", block(&sys.e, 0, n1, n1, n2), se)?;
        require_zero("E21", block(&sys.e, n1, 0, n2, n1), se)?;
        require_zero("E22", block(&sys.e, n1, n1, n2, n2), se)?;
        require_zero("J22", block(&sys.j, n1, n1, n2, n2), sj)?;
        require_zero("R12", block(&sys.r, 0, n1, n1, n2), sr)?;
        require_zero("R21", block(&sys.r, n1, 0, n2, n1), sr)?;
        require_zero("R22", block(&sys.r, n1, n1, n2, n2), sr)?;
        require_spd("E11", part.e11())?;
        if n2 > 0 {
            let coupling = part.coupling()?;
            require_nonsingular("J12^T E11^-1 J12 (constraint coupling)", &coupling)?;
        }
        Ok(part)
    }

    pub fn system(&self) -> &'a PhdaeSystem<T> {
        self.sys
    }
    pub fn n1(&self) -> usize {
        self.n1
    }
    pub fn n2(&self) -> usize {
        self.sys.n() - self.n1
    }
    fn rows(&self, m: &'a DMatrix<T>, top: bool) -> DMatrixView<'a, T> {
        if top {
            m.view((0, 0), (self.n1, m.ncols()))
        } else {
            m.view((self.n1, 0), (self.n2(), m.ncols()))
        }
    }
    pub fn e11(&self) -> DMatrixView<'a, T> {
        self.sys.e.view((0, 0), (self.n1, self.n1))
    }
    pub fn j11(&self) -> DMatrixView<'a, T> {
        self.sys.j.view((0, 0), (self.n1, self.n1))
    }
    pub fn r11(&self) -> DMatrixView<'a, T> {
        self.sys.r.view((0, 0), (self.n1, self.n1))
    }
    pub fn j12(&self) -> DMatrixView<'a, T> {
        self.sys.j.view((0, self.n1), (self.n1, self.n2()))
    }
    pub fn b1(&self) -> DMatrixView<'a, T> {
        self.rows(&self.sys.b, true)
    }
    pub fn b2(&self) -> DMatrixView<'a, T> {
        self.rows(&self.sys.b, false)
    }
    pub fn p1(&self) -> DMatrixView<'a, T> {
        self.rows(&self.sys.p, true)
    }
    pub fn p2(&self) -> DMatrixView<'a, T> {
        self.rows(&self.sys.p, false)
    }
    /// `J11 − R11`
    pub fn a11(&self) -> DMatrix<T> {
        self.j11() - self.r11()
    }
    /// `J12ᵀ E11⁻¹ J12`
    pub fn coupling(&self) -> Result<DMatrix<T>> {
        let e11 = self.e11().into_owned();
        let j12 = self.j12().into_owned();
        let x = Cholesky::new(linalg::sym_part(&e11))
            .ok_or_else(|| Error::NotPositiveDefinite("E11".into()))?
            .solve(&j12);
        Ok(j12.transpose() * x)
    }
    pub fn b2_zero(&self) -> bool {
        let scale = self.sys.b.norm() + self.sys.p.norm();
        is_zero(self.b2(), scale) && is_zero(self.p2(), scale)
    }
}

/// Index-1/index-2 view with states `(x1, x2, x3)`: leading two-by-two block
/// of `E` positive definite, `J31` square nonsingular (forcing `x1 = 0`),
/// `x3` a multiplier that does not enter the input or output.
#[derive(Debug, Clone, Copy)]
pub struct MixedPartition<'a, T: Real> {
    sys: &'a PhdaeSystem<T>,
    n1: usize,
    n2: usize,
}

impl<'a, T: Real> MixedPartition<'a, T> {
    pub fn new(sys: &'a PhdaeSystem<T>, n1: usize, n2: usize) -> Result<Self> {
        let n = sys.n();
        if n1 + n2 > n {
            return Err(Error::Partition(format!(
                "n1 + n2 = {} exceeds n = {n}",
                n1 + n2
            )));
        }
        let n3 = n - n1 - n2;
        if n3 != n1 {
            return Err(Error::Partition(format!(
                "J31 must be square: n1 = {n1} but n3 = {n3}"
            )));
        }
        let part = Self { sys, n1, n2 };
        let k = n1 + n2;
        let (se, sj, sr) = (sys.e.norm(), sys.j.norm(), sys.r.norm());
        require_zero("E13/E23", block(&sys.e, 0, k, k, n3), se)?;
        require_zero("E3*", block(&sys.e, k, 0, n3, n), se)?;
        require_zero("J23", block(&sys.j, n1, k, n2, n3), sj)?;
        require_zero("J32", block(&sys.j, k, n1, n3, n2), sj)?;
        require_zero("J33", block(&sys.j, k, k, n3, n3), sj)?;
        require_zero("R13/R23", block(&sys.r, 0, k, k, n3), sr)?;
        require_zero("R3*", block(&sys.r, k, 0, n3, n), sr)?;
        let sb = sys.b.norm() + sys.p.norm();
        require_zero("B3", block(&sys.b, k, 0, n3, sys.m()), sb)?;
        require_zero("P3", block(&sys.p, k, 0, n3, sys.m()), sb)?;
        require_spd("leading E block", sys.e.view((0, 0), (k, k)))?;
        if n2 > 0 {
            let a22 = block(&sys.j, n1, n1, n2, n2) - block(&sys.r, n1, n1, n2, n2);
            require_nonsingular("J22 - R22", &a22)?;
        }
        if n1 > 0 {
            require_nonsingular("J31", &part.j31().into_owned())?;
        }
        Ok(part)
    }

    pub fn system(&self) -> &'a PhdaeSystem<T> {
        self.sys
    }
    pub fn n1(&self) -> usize {
        self.n1
    }
    pub fn n2(&self) -> usize {
        self.n2
    }
    pub fn n3(&self) -> usize {
        self.n1
    }
    pub fn j31(&self) -> DMatrixView<'a, T> {
        let k = self.n1 + self.n2;
        self.sys.j.view((k, 0), (self.n1, self.n1))
    }
}
