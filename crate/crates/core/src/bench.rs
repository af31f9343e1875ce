//! Benchmark generators: constrained mass-spring chain, Oseen flow on a
//! staggered grid, and random structured systems for property tests.

use std::fmt;

use nalgebra::DMatrix;
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::sparse::{
    is_psd, max_abs, norm_inf, shifted_cholesky_succeeds, skew_defect, symmetry_defect,
};
use crate::model::PhdaeSystem;
use crate::reduce::{Blocks, Method};
use crate::scalar::Real;

/// pHDAE with sparse `E`, `J`, `R` and dense port matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePhdae<T: Real> {
    pub e: CsrMatrix<T>,
    pub j: CsrMatrix<T>,
    pub r: CsrMatrix<T>,
    pub b: DMatrix<T>,
    pub p: DMatrix<T>,
    pub s: DMatrix<T>,
    pub n: DMatrix<T>,
}

fn csr_to_dense<T: Real>(m: &CsrMatrix<T>) -> DMatrix<T> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, j, &v) in m.triplet_iter() {
        d[(i, j)] += v;
    }
    d
}

pub(crate) fn dense_to_csr<T: Real>(m: &DMatrix<T>) -> CsrMatrix<T> {
    let mut coo = CooMatrix::new(m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != T::zero() {
                coo.push(i, j, m[(i, j)]);
            }
        }
    }
    CsrMatrix::from(&coo)
}

impl<T: Real> SparsePhdae<T> {
    pub fn n(&self) -> usize {
        self.e.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn from_dense(sys: &PhdaeSystem<T>) -> Self {
        Self {
            e: dense_to_csr(sys.e()),
            j: dense_to_csr(sys.j()),
            r: dense_to_csr(sys.r()),
            b: sys.b().clone(),
            p: sys.p().clone(),
            s: sys.s().clone(),
            n: sys.n_mat().clone(),
        }
    }

    pub fn to_dense(&self) -> Result<PhdaeSystem<T>> {
        PhdaeSystem::new(
            csr_to_dense(&self.e),
            csr_to_dense(&self.j),
            csr_to_dense(&self.r),
            self.b.clone(),
            self.p.clone(),
            self.s.clone(),
            self.n.clone(),
        )
    }

    /// Sparse `W = [[R, P], [Pᵀ, S]]`.
    fn passivity_matrix(&self) -> CsrMatrix<T> {
        let (n, m) = (self.n(), self.m());
        let mut coo = CooMatrix::new(n + m, n + m);
        for (i, j, &v) in self.r.triplet_iter() {
            coo.push(i, j, v);
        }
        for j in 0..m {
            for i in 0..n {
                let v = self.p[(i, j)];
                if v != T::zero() {
                    coo.push(i, n + j, v);
                    coo.push(n + j, i, v);
                }
            }
            for i in 0..m {
                if self.s[(i, j)] != T::zero() {
                    coo.push(n + i, n + j, self.s[(i, j)]);
                }
            }
        }
        CsrMatrix::from(&coo)
    }

    /// Structural checks on the sparse data at relative tolerance `tol`.
    pub fn validate(&self, tol: f64) -> SparseReport {
        let mut checks = Vec::new();
        let rel = |d: T, m: &CsrMatrix<T>| {
            let s = max_abs(m).as_f64();
            if s == 0.0 {
                0.0
            } else {
                d.as_f64() / s
            }
        };
        let e_sym = rel(symmetry_defect(&self.e), &self.e);
        checks.push(SparseCheck::new("E symmetric", e_sym <= tol, e_sym));
        checks.push(SparseCheck::new(
            "E positive semidefinite",
            is_psd(&self.e, T::lit(tol)),
            tol,
        ));
        let j_skew = rel(skew_defect(&self.j), &self.j);
        checks.push(SparseCheck::new("J skew-symmetric", j_skew <= tol, j_skew));
        let w = self.passivity_matrix();
        let w_sym = rel(symmetry_defect(&w), &w);
        checks.push(SparseCheck::new("W symmetric", w_sym <= tol, w_sym));
        checks.push(SparseCheck::new(
            "W positive semidefinite",
            is_psd(&w, T::lit(tol)),
            tol,
        ));
        let s_sym = (&self.s - self.s.transpose()).amax().as_f64();
        let n_skew = (&self.n + self.n.transpose()).amax().as_f64();
        let fscale = self.s.amax().as_f64().max(self.n.amax().as_f64()).max(1.0);
        checks.push(SparseCheck::new(
            "S symmetric, N skew",
            s_sym.max(n_skew) <= tol * fscale,
            s_sym.max(n_skew),
        ));
        SparseReport { checks }
    }

    /// Semi-explicit index-2 block conditions for the split `n1 | n − n1`.
    ///
    /// The coupling `J12ᵀ E11⁻¹ J12` is nonsingular iff `J12` has full column
    /// rank (given `E11 > 0`), which is certified through `J12ᵀ J12 ≻ 0`.
    pub fn validate_index2(&self, n1: usize, tol: f64) -> SparseReport {
        let n = self.n();
        let mut checks = Vec::new();
        let outside = |m: &CsrMatrix<T>, keep: &dyn Fn(usize, usize) -> bool| -> f64 {
            let s = max_abs(m).as_f64().max(f64::MIN_POSITIVE);
            m.triplet_iter()
                .filter(|(i, j, _)| !keep(*i, *j))
                .fold(0.0f64, |a, (_, _, v)| a.max(v.abs().as_f64()))
                / s
        };
        let e_out = outside(&self.e, &|i, j| i < n1 && j < n1);
        checks.push(SparseCheck::new("E12, E21, E22 zero", e_out <= tol, e_out));
        let j_out = outside(&self.j, &|i, j| i < n1 || j < n1);
        checks.push(SparseCheck::new("J22 zero", j_out <= tol, j_out));
        let r_out = outside(&self.r, &|i, j| i < n1 && j < n1);
        checks.push(SparseCheck::new("R12, R21, R22 zero", r_out <= tol, r_out));

        let mut e11 = CooMatrix::new(n1, n1);
        for (i, j, &v) in self.e.triplet_iter() {
            if i < n1 && j < n1 {
                e11.push(i, j, v);
            }
        }
        let e11 = CsrMatrix::from(&e11);
        let shift = -T::lit(tol) * norm_inf(&e11);
        checks.push(SparseCheck::new(
            "E11 positive definite",
            shifted_cholesky_succeeds(&e11, shift),
            tol,
        ));

        let n2 = n - n1;
        let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); n2];
        for (i, j, &v) in self.j.triplet_iter() {
            if i < n1 && j >= n1 {
                cols[j - n1].push((i, v));
            }
        }
        // J12ᵀ J12 through shared rows
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); n1];
        for (c, entries) in cols.iter().enumerate() {
            for &(i, v) in entries {
                rows[i].push((c, v));
            }
        }
        let mut g = CooMatrix::new(n2, n2);
        for entries in &rows {
            for &(a, va) in entries {
                for &(b, vb) in entries {
                    g.push(a, b, va * vb);
                }
            }
        }
        let g = CsrMatrix::from(&g);
        let shift = -T::lit(tol) * norm_inf(&g);
        let ok = n2 > 0 && shifted_cholesky_succeeds(&g, shift);
        checks.push(SparseCheck::new("J12 full column rank", ok, tol));
        let sb = self
            .b
            .amax()
            .as_f64()
            .max(self.p.amax().as_f64())
            .max(f64::MIN_POSITIVE);
        let b2 = if n2 == 0 {
            0.0
        } else {
            (self.b.rows(n1, n2) - self.p.rows(n1, n2)).amax().as_f64() / sb
        };
        checks.push(SparseCheck::new("B2 - P2 zero (informational)", true, b2));
        SparseReport { checks }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseCheck {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
}

impl SparseCheck {
    fn new(name: &'static str, passed: bool, value: f64) -> Self {
        Self {
            name,
            passed,
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseReport {
    pub checks: Vec<SparseCheck>,
}

impl SparseReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SparseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<32} {}  ({:.3e})",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.value
            )?;
        }
        Ok(())
    }
}

/// Block structure a benchmark is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Index1 { n1: usize },
    Index2 { n1: usize },
    Mixed { n1: usize, n2: usize },
}

impl Structure {
    pub fn blocks(self) -> Blocks {
        match self {
            Structure::Index1 { n1 } | Structure::Index2 { n1 } => Blocks { n1, n2: 0 },
            Structure::Mixed { n1, n2 } => Blocks { n1, n2 },
        }
    }

    /// The reducer a benchmark of this structure is meant for. Index-1
    /// systems get the block-diagonal reducer, which keeps `Ŵ ⪰ 0` and a
    /// positive definite `Êr` under IRKA; the shifted one does neither.
    pub fn default_method(self, b2_zero: bool) -> Method {
        match self {
            Structure::Index1 { .. } => Method::Index1Block,
            Structure::Index2 { .. } if b2_zero => Method::Index2,
            Structure::Index2 { .. } => Method::Index2Augmented,
            Structure::Mixed { .. } => Method::Mixed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark<T: Real> {
    pub name: String,
    pub system: SparsePhdae<T>,
    pub structure: Structure,
}

/// Damped chain of `k` masses, each tied to its neighbours and to the ground
/// by a spring and a damper, with a rigid bar between the first and last mass.
#[derive(Debug, Clone, PartialEq)]
pub struct MassSpringSpec {
    pub masses: Vec<f64>,
    /// Neighbour springs, `k − 1` entries.
    pub springs: Vec<f64>,
    /// Neighbour dampers, `k − 1` entries.
    pub dampers: Vec<f64>,
    pub ground_springs: Vec<f64>,
    pub ground_dampers: Vec<f64>,
    /// Mass driven by the force input; the output is its velocity.
    pub input_node: usize,
}

impl MassSpringSpec {
    /// Masses 4, springs 4, dampers 1 throughout; input at the first mass.
    pub fn uniform(k: usize) -> Self {
        Self {
            masses: vec![4.0; k],
            springs: vec![4.0; k.saturating_sub(1)],
            dampers: vec![1.0; k.saturating_sub(1)],
            ground_springs: vec![4.0; k],
            ground_dampers: vec![1.0; k],
            input_node: 0,
        }
    }

    /// Constants drawn uniformly from fixed positive ranges.
    pub fn random(k: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize, lo: f64, hi: f64| {
            (0..n).map(|_| rng.random_range(lo..hi)).collect::<Vec<_>>()
        };
        let masses = draw(k, 1.0, 5.0);
        let springs = draw(k.saturating_sub(1), 1.0, 5.0);
        let dampers = draw(k.saturating_sub(1), 0.1, 1.0);
        let ground_springs = draw(k, 1.0, 5.0);
        let ground_dampers = draw(k, 0.1, 1.0);
        Self {
            masses,
            springs,
            dampers,
            ground_springs,
            ground_dampers,
            input_node: 0,
        }
    }

    pub fn k(&self) -> usize {
        self.masses.len()
    }

    fn check(&self) -> Result<()> {
        let k = self.k();
        if k < 2 {
            return Err(Error::InvalidSpec(format!(
                "a chain needs at least 2 masses, got {k}"
            )));
        }
        if self.springs.len() != k - 1 || self.dampers.len() != k - 1 {
            return Err(Error::InvalidSpec(
                "neighbour springs and dampers need k - 1 entries".into(),
            ));
        }
        if self.ground_springs.len() != k || self.ground_dampers.len() != k {
            return Err(Error::InvalidSpec(
                "ground springs and dampers need k entries".into(),
            ));
        }
        let all = self
            .masses
            .iter()
            .chain(&self.springs)
            .chain(&self.dampers)
            .chain(&self.ground_springs)
            .chain(&self.ground_dampers);
        for &c in all {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "physical constants must be positive, got {c}"
                )));
            }
        }
        if self.input_node >= k {
            return Err(Error::InvalidSpec(format!(
                "input node {} outside 0..{k}",
                self.input_node
            )));
        }
        Ok(())
    }
}

/// Tridiagonal `Σ ground + neighbour` matrix of a chain.
fn chain_matrix(
    coo: &mut CooMatrix<f64>,
    off: (usize, usize),
    sign: f64,
    ground: &[f64],
    links: &[f64],
) {
    let k = ground.len();
    for i in 0..k {
        let mut d = ground[i];
        if i > 0 {
            d += links[i - 1];
        }
        if i + 1 < k {
            d += links[i];
            coo.push(off.0 + i, off.1 + i + 1, -sign * links[i]);
            coo.push(off.0 + i + 1, off.1 + i, -sign * links[i]);
        }
        coo.push(off.0 + i, off.1 + i, sign * d);
    }
}

fn convert<T: Real>(coo: &CooMatrix<f64>) -> CsrMatrix<T> {
    let csr = CsrMatrix::from(coo);
    let (offsets, cols, vals) = csr.disassemble();
    let vals = vals.into_iter().map(T::lit).collect();
    CsrMatrix::try_from_csr_data(coo.nrows(), coo.ncols(), offsets, cols, vals)
        .expect("valid CSR layout")
}

/// Chain in the state `(v, q, λ)`: `E = diag(M, K, 0)`, `J11 = [[0, −K], [K, 0]]`,
/// `R = diag(C, 0, 0)`, `J12 = [Gᵀ; 0]` with `G = e₁ᵀ − e_kᵀ`.
pub fn mass_spring_chain<T: Real>(spec: &MassSpringSpec) -> Result<Benchmark<T>> {
    mass_spring_chain_b2(spec, 0.0)
}

/// [`mass_spring_chain`] with the input also entering the constraint row
/// with weight `amplitude`.
pub fn mass_spring_chain_b2<T: Real>(
    spec: &MassSpringSpec,
    amplitude: f64,
) -> Result<Benchmark<T>> {
    spec.check()?;
    if !amplitude.is_finite() {
        return Err(Error::InvalidSpec(
            "constraint forcing amplitude must be finite".into(),
        ));
    }
    let k = spec.k();
    let n = 2 * k + 1;
    let mut e = CooMatrix::new(n, n);
    for (i, &m) in spec.masses.iter().enumerate() {
        e.push(i, i, m);
    }
    chain_matrix(&mut e, (k, k), 1.0, &spec.ground_springs, &spec.springs);
    let mut j = CooMatrix::new(n, n);
    chain_matrix(&mut j, (0, k), -1.0, &spec.ground_springs, &spec.springs);
    chain_matrix(&mut j, (k, 0), 1.0, &spec.ground_springs, &spec.springs);
    let lam = 2 * k;
    j.push(0, lam, 1.0);
    j.push(k - 1, lam, -1.0);
    j.push(lam, 0, -1.0);
    j.push(lam, k - 1, 1.0);
    let mut r = CooMatrix::new(n, n);
    chain_matrix(&mut r, (0, 0), 1.0, &spec.ground_dampers, &spec.dampers);
    let mut b = DMatrix::zeros(n, 1);
    b[(spec.input_node, 0)] = T::one();
    b[(lam, 0)] = T::lit(amplitude);
    let name = if amplitude == 0.0 {
        format!("mass-spring-k{k}")
    } else {
        format!("mass-spring-b2-k{k}")
    };
    Ok(Benchmark {
        name,
        system: SparsePhdae {
            e: convert(&e),
            j: convert(&j),
            r: convert(&r),
            b,
            p: DMatrix::zeros(n, 1),
            s: DMatrix::zeros(1, 1),
            n: DMatrix::zeros(1, 1),
        },
        structure: Structure::Index2 { n1: 2 * k },
    })
}

/// Oseen flow on the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct OseenSpec {
    /// Cells per side.
    pub cells: usize,
    pub viscosity: f64,
    pub wind: (f64, f64),
    pub forcing: Forcing,
}

/// Spatial profile `b(x)` of the body force `f = b(x) u(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Forcing {
    /// Horizontal force on the left half. This field is a discrete gradient,
    /// so the pressure absorbs it and `H ≡ 0`.
    LeftHalfHorizontal,
    /// Horizontal force on the lower-left quadrant.
    LowerLeftQuadrant,
}

impl OseenSpec {
    /// Wind `(1, 0)`, viscosity `0.1`, horizontal forcing on the lower-left quadrant.
    pub fn new(cells: usize) -> Self {
        Self {
            cells,
            viscosity: 0.1,
            wind: (1.0, 0.0),
            forcing: Forcing::LowerLeftQuadrant,
        }
    }
}

/// Centred MAC discretization with no-slip walls and one pinned pressure.
///
/// Velocities live on interior cell faces (`2(n_g − 1)n_g` unknowns),
/// pressures at cell centres with cell `(0, 0)` removed (`n_g² − 1`).
/// `E11 = I`, `R11 = μ·(−Δh)`, `J11 = −(a·∇)h` (centred, hence skew),
/// `J12 = −∇h`.
pub fn oseen_grid<T: Real>(spec: &OseenSpec) -> Result<Benchmark<T>> {
    let ng = spec.cells;
    if ng < 3 {
        return Err(Error::InvalidSpec(format!(
            "the grid needs at least 3 cells per side, got {ng}"
        )));
    }
    if !(spec.viscosity > 0.0 && spec.viscosity.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "viscosity must be positive, got {}",
            spec.viscosity
        )));
    }
    if !(spec.wind.0.is_finite() && spec.wind.1.is_finite()) {
        return Err(Error::InvalidSpec("wind must be finite".into()));
    }
    let h = 1.0 / ng as f64;
    let nu = (ng - 1) * ng;
    let n1 = 2 * nu;
    let n2 = ng * ng - 1;
    let n = n1 + n2;
    // u at x = i h (i = 1..ng-1), y = (j + 1/2) h; v at x = (i + 1/2) h, y = j h (j = 1..ng-1)
    let u_idx = |i: usize, j: usize| j * (ng - 1) + (i - 1);
    let v_idx = |i: usize, j: usize| nu + (j - 1) * ng + i;
    let p_idx = |i: usize, j: usize| -> Option<usize> {
        let c = j * ng + i;
        (c != 0).then(|| n1 + c - 1)
    };
    let mu = spec.viscosity;
    let (a1, a2) = spec.wind;
    let lap = mu / (h * h);
    let conv = 0.5 / h;

    let mut e = CooMatrix::new(n, n);
    let mut j = CooMatrix::new(n, n);
    let mut r = CooMatrix::new(n, n);
    for k in 0..n1 {
        e.push(k, k, 1.0);
    }
    // component-wise stencil; `along` runs between walls on the unknown's own faces
    let mut stencil = |row: usize, nbrs: [(Option<usize>, bool, f64); 4]| {
        let mut diag = 4.0;
        for (nbr, ghost, wind) in nbrs {
            match nbr {
                Some(c) => {
                    r.push(row, c, -lap);
                    // −(a·∇) with centred differences
                    j.push(row, c, -wind * conv);
                }
                None if ghost => diag += 1.0,
                None => {}
            }
        }
        r.push(row, row, diag * lap);
    };
    for jj in 0..ng {
        for i in 1..ng {
            let row = u_idx(i, jj);
            stencil(
                row,
                [
                    ((i + 1 < ng).then(|| u_idx(i + 1, jj)), false, a1),
                    ((i > 1).then(|| u_idx(i - 1, jj)), false, -a1),
                    ((jj + 1 < ng).then(|| u_idx(i, jj + 1)), true, a2),
                    ((jj > 0).then(|| u_idx(i, jj - 1)), true, -a2),
                ],
            );
        }
    }
    for jj in 1..ng {
        for i in 0..ng {
            let row = v_idx(i, jj);
            stencil(
                row,
                [
                    ((i + 1 < ng).then(|| v_idx(i + 1, jj)), true, a1),
                    ((i > 0).then(|| v_idx(i - 1, jj)), true, -a1),
                    ((jj + 1 < ng).then(|| v_idx(i, jj + 1)), false, a2),
                    ((jj > 1).then(|| v_idx(i, jj - 1)), false, -a2),
                ],
            );
        }
    }
    // J12 = −∇h, J21 = ∇hᵀ
    let mut grad = |row: usize, lo: Option<usize>, hi: Option<usize>| {
        if let Some(c) = hi {
            j.push(row, c, -1.0 / h);
            j.push(c, row, 1.0 / h);
        }
        if let Some(c) = lo {
            j.push(row, c, 1.0 / h);
            j.push(c, row, -1.0 / h);
        }
    };
    for jj in 0..ng {
        for i in 1..ng {
            grad(u_idx(i, jj), p_idx(i - 1, jj), p_idx(i, jj));
        }
    }
    for jj in 1..ng {
        for i in 0..ng {
            grad(v_idx(i, jj), p_idx(i, jj - 1), p_idx(i, jj));
        }
    }
    let mut b = DMatrix::zeros(n, 1);
    for jj in 0..ng {
        for i in 1..ng {
            let x = i as f64 * h;
            let y = (jj as f64 + 0.5) * h;
            let on = match spec.forcing {
                Forcing::LeftHalfHorizontal => x < 0.5,
                Forcing::LowerLeftQuadrant => x < 0.5 && y < 0.5,
            };
            if on {
                b[(u_idx(i, jj), 0)] = T::one();
            }
        }
    }
    Ok(Benchmark {
        name: format!("oseen-{ng}"),
        system: SparsePhdae {
            e: convert(&e),
            j: convert(&j),
            r: convert(&r),
            b,
            p: DMatrix::zeros(n, 1),
            s: DMatrix::zeros(1, 1),
            n: DMatrix::zeros(1, 1),
        },
        structure: Structure::Index2 { n1 },
    })
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

fn random_skew(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = random_matrix(rng, n, n);
    &a - a.transpose()
}

/// `F Fᵀ / cols` plus `boost` on the diagonal range `boosted`.
fn random_psd(
    rng: &mut ChaCha8Rng,
    n: usize,
    boosted: std::ops::Range<usize>,
    boost: f64,
) -> DMatrix<f64> {
    let f = random_matrix(rng, n, n);
    let mut w = &f * f.transpose() / n.max(1) as f64;
    for i in boosted {
        w[(i, i)] += boost;
    }
    w
}

fn lift<T: Real>(m: &DMatrix<f64>) -> DMatrix<T> {
    m.map(T::lit)
}

/// Random semi-explicit index-1 pHDAE: `E = diag(E11, 0)` with `E11 > 0`,
/// `W ⪰ 0`, `R22 ≻ 0` (so `J22 − R22` is nonsingular). Deterministic per seed.
pub fn random_ph_index1<T: Real>(
    n1: usize,
    n2: usize,
    m: usize,
    seed: u64,
) -> Result<PhdaeSystem<T>> {
    if n1 == 0 || m == 0 {
        return Err(Error::InvalidSpec(
            "random_ph_index1 needs n1 >= 1 and m >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n1 + n2;
    let l = random_matrix(&mut rng, n1, n1);
    let mut e = DMatrix::zeros(n, n);
    let mut e11 = &l * l.transpose() / n1 as f64;
    for i in 0..n1 {
        e11[(i, i)] += 0.5;
    }
    e.view_mut((0, 0), (n1, n1)).copy_from(&e11);
    let j = random_skew(&mut rng, n);
    let w = random_psd(&mut rng, n + m, n1..n, 1.0);
    let b = random_matrix(&mut rng, n, m);
    let nn = random_skew(&mut rng, m) * 0.5;
    let sys = PhdaeSystem::new(
        lift(&e),
        lift(&j),
        lift(&w.view((0, 0), (n, n)).into_owned()),
        lift(&b),
        lift(&w.view((0, n), (n, m)).into_owned()),
        lift(&w.view((n, n), (m, m)).into_owned()),
        lift(&nn),
    )?;
    Ok(sys)
}

/// Random mixed-form pHDAE with states `(x1, x2, x3)`, `dim x3 = dim x1`:
/// leading `E` block positive definite, `J31` nonsingular, `x3` absent from
/// `E`, `R` and the ports, `R22 ≻ 0`.
pub fn random_ph_mixed<T: Real>(
    n1: usize,
    n2: usize,
    m: usize,
    seed: u64,
) -> Result<PhdaeSystem<T>> {
    if n1 == 0 || n2 == 0 || m == 0 {
        return Err(Error::InvalidSpec(
            "random_ph_mixed needs n1, n2, m >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = n1 + n2;
    let n = k + n1;
    let l = random_matrix(&mut rng, k, k);
    let mut ek = &l * l.transpose() / k as f64;
    for i in 0..k {
        ek[(i, i)] += 0.5;
    }
    let mut e = DMatrix::zeros(n, n);
    e.view_mut((0, 0), (k, k)).copy_from(&ek);
    let mut j = DMatrix::zeros(n, n);
    j.view_mut((0, 0), (k, k))
        .copy_from(&random_skew(&mut rng, k));
    let mut j31 = random_matrix(&mut rng, n1, n1);
    for i in 0..n1 {
        j31[(i, i)] += 2.0 * n1 as f64;
    }
    j.view_mut((k, 0), (n1, n1)).copy_from(&j31);
    j.view_mut((0, k), (n1, n1)).copy_from(&(-j31.transpose()));
    // W on (x1, x2, ports), then embedded with zero x3 rows
    let wk = random_psd(&mut rng, k + m, n1..k, 1.0);
    let mut r = DMatrix::zeros(n, n);
    r.view_mut((0, 0), (k, k))
        .copy_from(&wk.view((0, 0), (k, k)));
    let mut p = DMatrix::zeros(n, m);
    p.view_mut((0, 0), (k, m))
        .copy_from(&wk.view((0, k), (k, m)));
    let s = wk.view((k, k), (m, m)).into_owned();
    let mut b = DMatrix::zeros(n, m);
    b.view_mut((0, 0), (k, m))
        .copy_from(&random_matrix(&mut rng, k, m));
    let nn = random_skew(&mut rng, m) * 0.5;
    PhdaeSystem::new(
        lift(&e),
        lift(&j),
        lift(&r),
        lift(&b),
        lift(&p),
        lift(&s),
        lift(&nn),
    )
}
