use nalgebra::{Complex, DMatrix};

use super::basis::{finish_saddle_basis, saddle_columns};
use super::{build_v_saddle, BasisOptions, InterpolationData, Layout, Method, ReducedModel};
use crate::error::{Error, Result};
use crate::linalg::{nullspace_basis, skew_part, sym_part, to_complex, ComplexMatrix};
use crate::model::{GenericLti, Index2Partition, PhdaeSystem};
use crate::scalar::Real;
use crate::transfer::{Index2Terms, Transfer};

fn galerkin_x1<T: Real>(
    part: &Index2Partition<'_, T>,
    v: &DMatrix<T>,
) -> (DMatrix<T>, DMatrix<T>, DMatrix<T>) {
    let vt = v.transpose();
    (
        sym_part(&(&vt * part.e11() * v)),
        skew_part(&(&vt * part.j11() * v)),
        sym_part(&(&vt * part.r11() * v)),
    )
}

/// One-sided projection onto the constraint kernel for `B2 = P2 = 0`:
/// `(VᵀE11V, VᵀJ11V, VᵀR11V, VᵀB1, VᵀP1, S, N)`.
pub fn reduce_index2_zero_b2<T: Real>(
    part: &Index2Partition<'_, T>,
    data: &InterpolationData<T>,
    opts: &BasisOptions,
) -> Result<ReducedModel<T>> {
    if !part.b2_zero() {
        return Err(Error::InvalidSpec(
            "the constraint block of B or P is nonzero; use the augmented index-2 reducer".into(),
        ));
    }
    let sys = part.system();
    let basis = build_v_saddle(part, data, opts)?;
    let v = &basis.v;
    let (e, j, r) = galerkin_x1(part, v);
    let reduced = PhdaeSystem::new(
        e,
        j,
        r,
        v.transpose() * part.b1(),
        v.transpose() * part.p1(),
        sys.s().clone(),
        sys.n_mat().clone(),
    )?;
    ReducedModel::assemble(
        reduced,
        Method::Index2,
        Layout::Ode,
        None,
        basis.dropped,
        data,
    )
}

/// Reduction with input in the constraint. The output gains `𝓓₁ u̇`.
///
/// `V` comes from the saddle solves with input map `𝓑`; the ports are
/// `B̂r = ½Vᵀ(𝓑 + 𝓒ᵀ)`, `P̂r = ½Vᵀ(𝓒ᵀ − 𝓑)` and the feedthrough is split
/// from `𝓓₀`. Falls back to [`reduce_index2_zero_b2`] when `B2 = P2 = 0`.
pub fn reduce_index2_nonzero_b2<T: Real>(
    part: &Index2Partition<'_, T>,
    data: &InterpolationData<T>,
    opts: &BasisOptions,
) -> Result<ReducedModel<T>> {
    if part.b2_zero() {
        let mut red = reduce_index2_zero_b2(part, data, opts)?;
        red.method = Method::Index2Augmented;
        return Ok(red);
    }
    let terms = Index2Terms::new(part)?;
    let input = terms.input_map();
    let output = terms.output_map();
    let (cols, _) = saddle_columns(part, &input, data)?;
    let basis = finish_saddle_basis(part, &cols, data, opts)?;
    let v = &basis.v;
    let (e, j, r) = galerkin_x1(part, v);
    let half = T::lit(0.5);
    let vt = v.transpose();
    let d0 = terms.d0();
    let reduced = PhdaeSystem::new(
        e,
        j,
        r,
        &vt * (&input + output.transpose()) * half,
        &vt * (output.transpose() - &input) * half,
        sym_part(&d0),
        skew_part(&d0),
    )?;
    ReducedModel::assemble(
        reduced,
        Method::Index2Augmented,
        Layout::Ode,
        Some(terms.d1()),
        basis.dropped,
        data,
    )
}

/// Explicit-projector form of a semi-explicit index-2 system.
#[derive(Debug, Clone)]
pub struct ProjectedIndex2<T: Real> {
    /// `(π_l E11 π_r, π_l A11 π_r, π_l 𝓑, 𝓒 π_r, 𝓓₀)` on the full `x1` space;
    /// its `E` is singular whenever a constraint is present.
    pub projected: GenericLti<T>,
    /// The same dynamics restricted to an orthonormal basis `Θ` of `ker J12ᵀ`.
    pub compressed: GenericLti<T>,
    /// `Θ`.
    pub kernel: DMatrix<T>,
    pub left: DMatrix<T>,
    pub right: DMatrix<T>,
    pub d1: DMatrix<T>,
}

/// Builds `π_l = I − J12 Z J12ᵀ E11⁻¹`, `π_r = I − E11⁻¹ J12 Z J12ᵀ` and
/// the projected system, for verification on small problems.
pub fn projector_oracle_index2<T: Real>(
    part: &Index2Partition<'_, T>,
) -> Result<ProjectedIndex2<T>> {
    let n1 = part.n1();
    let terms = Index2Terms::new(part)?;
    let id = DMatrix::<T>::identity(n1, n1);
    let left = &id - &terms.j12 * terms.zjg();
    let right = &id - terms.gjz() * terms.j12.transpose();
    let input = terms.input_map();
    let output = terms.output_map();
    let d0 = terms.d0();
    let projected = GenericLti::new(
        &left * &terms.e11 * &right,
        &left * &terms.a11 * &right,
        &left * &input,
        &output * &right,
        d0.clone(),
    )?;
    let kernel = nullspace_basis(&terms.j12.transpose(), None)?;
    let kt = kernel.transpose();
    let compressed = GenericLti::new(
        &kt * &projected.e * &kernel,
        &kt * &projected.a * &kernel,
        &kt * &projected.b,
        &projected.c * &kernel,
        d0,
    )?;
    Ok(ProjectedIndex2 {
        projected,
        compressed,
        kernel,
        left,
        right,
        d1: terms.d1(),
    })
}

impl<T: Real> ProjectedIndex2<T> {
    /// Galerkin reduction of the projected system with the basis `v`.
    pub fn galerkin(&self, v: &DMatrix<T>) -> Result<GenericLti<T>> {
        let vt = v.transpose();
        GenericLti::new(
            &vt * &self.projected.e * v,
            &vt * &self.projected.a * v,
            &vt * &self.projected.b,
            &self.projected.c * v,
            self.projected.d.clone(),
        )
    }
}

impl<T: Real> Transfer<T> for ProjectedIndex2<T> {
    fn inputs(&self) -> usize {
        self.compressed.inputs()
    }
    fn outputs(&self) -> usize {
        self.compressed.outputs()
    }
    fn eval(&self, s: Complex<T>) -> Result<ComplexMatrix<T>> {
        Ok(self.compressed.eval(s)? + to_complex(&self.d1) * s)
    }
}
