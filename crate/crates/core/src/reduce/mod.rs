//! Interpolatory, structure-preserving reduction of pHDAE systems.

mod basis;
mod data;
mod index1;
mod index2;
mod mixed;

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix};

pub use basis::{
    build_v_generic, build_v_saddle, interpolation_columns, saddle_columns, BasisOptions,
    ProjectionBasis,
};
pub use data::InterpolationData;
pub use index1::{reduce_index1_blockdiag, reduce_index1_shifted};
pub use index2::{
    projector_oracle_index2, reduce_index2_nonzero_b2, reduce_index2_zero_b2, ProjectedIndex2,
};
pub use mixed::reduce_mixed;

use crate::error::{Error, Result};
use crate::linalg::{self, to_complex, ComplexMatrix};
use crate::model::{GenericLti, PhdaeSystem};
use crate::scalar::Real;
use crate::transfer::{polynomial_part_index1, PoleResidueForm, PolynomialPart, Transfer};

/// Absolute tolerance on `min eig(Ŵ)` for `ph_valid`.
pub const PH_TOL: f64 = 1e-10;

/// The structure-preserving reduction methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Semi-explicit index 1, reduced to an ODE with a shifted constant term.
    Index1Shifted,
    /// Semi-explicit index 1, compressing only the dynamic block.
    Index1Block,
    /// Semi-explicit index 2 without input in the constraint.
    Index2,
    /// Semi-explicit index 2 with input in the constraint (augmented `(u, u̇)`).
    Index2Augmented,
    /// Mixed index-1/index-2 form, compressing only the middle block.
    Mixed,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Index1Shifted,
        Method::Index1Block,
        Method::Index2,
        Method::Index2Augmented,
        Method::Mixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Index1Shifted => "index1-shifted",
            Method::Index1Block => "index1-block",
            Method::Index2 => "index2",
            Method::Index2Augmented => "index2-augmented",
            Method::Mixed => "mixed",
        }
    }

    /// Alternative numbered tag, also accepted by [`FromStr`].
    pub fn theorem_tag(self) -> &'static str {
        match self {
            Method::Index1Shifted => "theorem-2",
            Method::Index1Block => "theorem-3",
            Method::Index2 => "theorem-4",
            Method::Index2Augmented => "theorem-5",
            Method::Mixed => "theorem-6",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| {
                m.name() == key || m.theorem_tag() == key || m.theorem_tag().replace('-', "") == key
            })
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::Config(format!(
                    "unknown reduction method '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

/// Block layout of a reduced state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Implicit ODE, `E > 0`.
    Ode,
    /// Dynamic block of order `n1`, untouched algebraic block of order `n2`.
    Index1 { n1: usize, n2: usize },
    /// `(x1, x2, x3)` with `x1 = 0` enforced by the multiplier `x3`.
    Mixed { n1: usize, n2: usize, n3: usize },
}

/// A reduced pHDAE together with the evidence of its structure.
#[derive(Debug, Clone)]
pub struct ReducedModel<T: Real> {
    pub system: PhdaeSystem<T>,
    pub method: Method,
    /// `min eig(Ŵ) ≥ −1e-10` and the remaining structural conditions hold.
    pub ph_valid: bool,
    pub min_eig_w: T,
    pub polynomial_part: PolynomialPart<T>,
    /// Coefficient of `u̇` in the output, present for augmented-input models.
    pub d1: Option<DMatrix<T>>,
    pub layout: Layout,
    /// Basis columns dropped as numerically dependent.
    pub dropped_columns: usize,
    pub data: InterpolationData<T>,
}

impl<T: Real> ReducedModel<T> {
    pub(crate) fn assemble(
        system: PhdaeSystem<T>,
        method: Method,
        layout: Layout,
        d1: Option<DMatrix<T>>,
        dropped_columns: usize,
        data: &InterpolationData<T>,
    ) -> Result<Self> {
        let min_eig_w = linalg::min_sym_eigenvalue(&system.passivity_matrix())?;
        let structure = system.validate_structure(T::tol(PH_TOL));
        let ph_valid = structure.passed() && min_eig_w >= -T::tol(PH_TOL);
        let d = system.s() + system.n_mat();
        let mut polynomial_part = match layout {
            Layout::Index1 { n1, n2 } if n2 > 0 => {
                polynomial_part_index1(&system.partition_index1(n1)?)?
            }
            _ => PolynomialPart::constant(d),
        };
        if let Some(d1) = &d1 {
            polynomial_part.p1 = d1.clone();
        }
        Ok(Self {
            system,
            method,
            ph_valid,
            min_eig_w,
            polynomial_part,
            d1,
            layout,
            dropped_columns,
            data: data.clone(),
        })
    }

    pub fn order(&self) -> usize {
        self.system.n()
    }

    /// `true` when the model acts on `(u, u̇)`.
    pub fn augmented_input(&self) -> bool {
        self.d1.is_some()
    }

    /// Strictly proper dynamics with `E > 0` plus the constant feedthrough.
    ///
    /// Algebraic blocks are eliminated by a Schur complement; the mixed
    /// layout keeps only the middle block (the outer blocks vanish).
    pub fn proper_part(&self) -> Result<GenericLti<T>> {
        let g = self.system.as_generic();
        match self.layout {
            Layout::Ode => Ok(g),
            Layout::Index1 { n1, n2 } => {
                if n2 == 0 {
                    return Ok(g);
                }
                let a11 = g.a.view((0, 0), (n1, n1));
                let a12 = g.a.view((0, n1), (n1, n2));
                let a21 = g.a.view((n1, 0), (n2, n1));
                let a22 = g.a.view((n1, n1), (n2, n2)).into_owned();
                let b1 = g.b.rows(0, n1);
                let b2 = g.b.rows(n1, n2);
                let c1 = g.c.columns(0, n1);
                let c2 = g.c.columns(n1, n2);
                let mut rhs = DMatrix::zeros(n2, n1 + g.b.ncols());
                rhs.view_mut((0, 0), (n2, n1)).copy_from(&a21);
                rhs.view_mut((0, n1), (n2, g.b.ncols())).copy_from(&b2);
                let x = linalg::solve_real(&a22, &rhs)?;
                let xa = x.columns(0, n1);
                let xb = x.columns(n1, g.b.ncols());
                GenericLti::new(
                    g.e.view((0, 0), (n1, n1)).into_owned(),
                    a11 - a12 * xa,
                    b1 - a12 * xb,
                    c1 - c2 * xa,
                    &g.d - c2 * xb,
                )
            }
            Layout::Mixed { n1, n2, .. } => GenericLti::new(
                g.e.view((n1, n1), (n2, n2)).into_owned(),
                g.a.view((n1, n1), (n2, n2)).into_owned(),
                g.b.rows(n1, n2).into_owned(),
                g.c.columns(n1, n2).into_owned(),
                g.d.clone(),
            ),
        }
    }

    pub fn pole_residue(&self) -> Result<PoleResidueForm<T>> {
        let p = self.proper_part()?;
        let d1 = self
            .d1
            .clone()
            .unwrap_or_else(|| DMatrix::zeros(p.outputs(), p.inputs()));
        PoleResidueForm::from_descriptor(&p.e, &p.a, &p.b, &p.c, &p.d, &d1)
    }
}

impl<T: Real> Transfer<T> for ReducedModel<T> {
    fn inputs(&self) -> usize {
        self.system.m()
    }
    fn outputs(&self) -> usize {
        self.system.m()
    }
    fn eval(&self, s: Complex<T>) -> Result<ComplexMatrix<T>> {
        let h = self.system.eval(s)?;
        Ok(match &self.d1 {
            Some(d1) => h + to_complex(d1) * s,
            None => h,
        })
    }
}

/// Largest relative tangential interpolation defect
/// `‖H(σᵢ)bᵢ − Hr(σᵢ)bᵢ‖ / (1 + ‖H(σᵢ)bᵢ‖)`.
pub fn interpolation_residual<T: Real>(
    full: &dyn Transfer<T>,
    reduced: &dyn Transfer<T>,
    data: &InterpolationData<T>,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for (s, b) in data.points().iter().zip(data.directions()) {
        let h = full.eval_tangential(*s, b)?;
        let hr = reduced.eval_tangential(*s, b)?;
        worst = worst.max((&h - hr).norm().as_f64() / (1.0 + h.norm().as_f64()));
    }
    Ok(worst)
}

/// Block sizes of the partition a method works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Blocks {
    pub n1: usize,
    /// Middle block size, only used by [`Method::Mixed`].
    pub n2: usize,
}

/// Dispatches to the reducer for `method`.
pub fn reduce<T: Real>(
    sys: &PhdaeSystem<T>,
    method: Method,
    blocks: Blocks,
    data: &InterpolationData<T>,
    opts: &BasisOptions,
) -> Result<ReducedModel<T>> {
    match method {
        Method::Index1Shifted => {
            reduce_index1_shifted(&sys.partition_index1(blocks.n1)?, data, opts)
        }
        Method::Index1Block => {
            reduce_index1_blockdiag(&sys.partition_index1(blocks.n1)?, data, opts)
        }
        Method::Index2 => reduce_index2_zero_b2(&sys.partition_index2(blocks.n1)?, data, opts),
        Method::Index2Augmented => {
            reduce_index2_nonzero_b2(&sys.partition_index2(blocks.n1)?, data, opts)
        }
        Method::Mixed => reduce_mixed(&sys.partition_mixed(blocks.n1, blocks.n2)?, data, opts),
    }
}
