use nalgebra::DMatrix;

use super::basis::{finish_basis, interpolation_columns};
use super::{build_v_generic, BasisOptions, InterpolationData, Layout, Method, ReducedModel};
use crate::error::Result;
use crate::linalg::{self, skew_part, sym_part};
use crate::model::{Index1Partition, PhdaeSystem};
use crate::scalar::Real;

/// Reduced ODE whose constant term is shifted to the full system's
/// `𝓓 = D − 𝓒2 A22⁻¹ 𝓑2`.
///
/// With `K = 𝓒2 A22⁻¹ 𝓑2`: `Âr = VᵀAV − 𝔅ᵀK𝔅`, `𝓑̂r = Vᵀ𝓑 + 𝔅ᵀK`,
/// `𝓒̂r = 𝓒V + K𝔅`, `D̂r = D − K`. The result is split back into
/// `(Ĵr, R̂r, B̂r, P̂r, Ŝr, N̂r)`; whether `Ŵ ⪰ 0` is reported, not enforced.
pub fn reduce_index1_shifted<T: Real>(
    part: &Index1Partition<'_, T>,
    data: &InterpolationData<T>,
    opts: &BasisOptions,
) -> Result<ReducedModel<T>> {
    let sys = part.system();
    let g = sys.as_generic();
    let basis = build_v_generic(&g, data, opts)?;
    let v = &basis.v;
    let dirs = &basis.directions;
    let k = if part.n2() == 0 {
        DMatrix::zeros(sys.m(), sys.m())
    } else {
        let c2 = (part.b2() + part.p2()).transpose();
        let b2 = part.b2() - part.p2();
        c2 * linalg::solve_real(&part.a22(), &b2)?
    };
    let vt = v.transpose();
    let v1 = basis.block(0, part.n1());
    let er = sym_part(&(v1.transpose() * part.e11() * &v1));
    let ar = &vt * &g.a * v - dirs.transpose() * &k * dirs;
    let br = &vt * &g.b + dirs.transpose() * &k;
    let cr = &g.c * v + &k * dirs;
    let dr = &g.d - &k;
    let half = T::lit(0.5);
    let reduced = PhdaeSystem::new(
        er,
        skew_part(&ar),
        -sym_part(&ar),
        (&br + cr.transpose()) * half,
        (cr.transpose() - &br) * half,
        sym_part(&dr),
        skew_part(&dr),
    )?;
    ReducedModel::assemble(
        reduced,
        Method::Index1Shifted,
        Layout::Ode,
        None,
        basis.dropped,
        data,
    )
}

/// Congruence with `diag(V1, I)`: only the dynamic block is compressed, the
/// algebraic block is kept as it is.
pub fn reduce_index1_blockdiag<T: Real>(
    part: &Index1Partition<'_, T>,
    data: &InterpolationData<T>,
    opts: &BasisOptions,
) -> Result<ReducedModel<T>> {
    let sys = part.system();
    let (n1, n2) = (part.n1(), part.n2());
    let cols = interpolation_columns(&sys.as_generic(), data)?;
    let basis = finish_basis(
        &cols.rows(0, n1).into_owned(),
        data,
        opts,
        "dynamic block basis",
    )?;
    let r = basis.ncols();
    let mut t = DMatrix::zeros(n1 + n2, r + n2);
    t.view_mut((0, 0), (n1, r)).copy_from(&basis.v);
    t.view_mut((n1, r), (n2, n2)).fill_with_identity();
    let reduced = sys.congruence(&t)?;
    ReducedModel::assemble(
        reduced,
        Method::Index1Block,
        Layout::Index1 { n1: r, n2 },
        None,
        basis.dropped,
        data,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduce::interpolation_residual;
    use crate::scalar::cplx;
    use crate::transfer::{polynomial_part_index1, Transfer};
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

    fn at_one() -> InterpolationData<f64> {
        InterpolationData::real(&[1.0], &[DVector::from_element(1, 1.0)]).unwrap()
    }

    #[test]
    fn shifted_worked_example_by_hand() {
        let sys = worked();
        let part = sys.partition_index1(1).unwrap();
        let red = reduce_index1_shifted(&part, &at_one(), &BasisOptions::raw()).unwrap();
        let r = &red.system;
        let g = r.as_generic();
        assert!((r.e()[(0, 0)] - 2.25).abs() < 1e-14);
        assert!((g.a[(0, 0)] - 0.75).abs() < 1e-14);
        assert!((g.b[(0, 0)] - 1.5).abs() < 1e-14);
        assert!((g.c[(0, 0)] - 1.5).abs() < 1e-14);
        assert!((g.d[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((r.r()[(0, 0)] + 0.75).abs() < 1e-14);
        assert!(!red.ph_valid);
        assert!(red.min_eig_w < 0.0);
        let s = cplx(1.0, 0.0);
        assert!((red.eval(s).unwrap()[(0, 0)] - cplx(2.5, 0.0)).norm() < 1e-14);
        assert!((sys.eval(s).unwrap()[(0, 0)] - cplx(2.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn shifted_result_is_basis_invariant() {
        let sys = worked();
        let part = sys.partition_index1(1).unwrap();
        let raw = reduce_index1_shifted(&part, &at_one(), &BasisOptions::raw()).unwrap();
        let orth = reduce_index1_shifted(&part, &at_one(), &BasisOptions::default()).unwrap();
        for w in [0.1, 1.0, 10.0] {
            let s = cplx(0.0, w);
            assert!((raw.eval(s).unwrap() - orth.eval(s).unwrap()).norm() < 1e-13);
        }
        assert!(
            orth.polynomial_part
                .mismatch(&polynomial_part_index1(&part).unwrap())
                < 1e-14
        );
    }

    #[test]
    fn without_algebraic_input_shift_vanishes() {
        let sys = PhdaeSystem::collocated(
            dmatrix![1.0, 0.0; 0.0, 0.0],
            dmatrix![0.0, 1.0; -1.0, 0.0],
            dmatrix![0.0, 0.0; 0.0, 1.0],
            dmatrix![2.0; 0.0],
        )
        .unwrap();
        let part = sys.partition_index1(1).unwrap();
        let red = reduce_index1_shifted(&part, &at_one(), &BasisOptions::raw()).unwrap();
        let basis = build_v_generic(&sys.as_generic(), &at_one(), &BasisOptions::raw()).unwrap();
        let galerkin = basis.v.transpose() * sys.as_generic().a * &basis.v;
        let g = red.system.as_generic();
        assert!((g.a[(0, 0)] - galerkin[(0, 0)]).abs() < 1e-14);
        assert_eq!(g.d[(0, 0)], 0.0);
    }

    #[test]
    fn blockdiag_worked_example() {
        let sys = worked();
        let part = sys.partition_index1(1).unwrap();
        let red = reduce_index1_blockdiag(&part, &at_one(), &BasisOptions::raw()).unwrap();
        assert_eq!(red.order(), 2);
        assert!((red.system.e()[(0, 0)] - 2.25).abs() < 1e-14);
        assert_eq!(red.system.e()[(1, 1)], 0.0);
        let g = red.system.as_generic();
        assert_eq!(g.a[(1, 1)], -1.0);
        assert!(red.ph_valid);
        assert!(interpolation_residual(&sys, &red, &at_one()).unwrap() < 1e-14);
        let pp = red.proper_part().unwrap();
        assert_eq!(pp.n(), 1);
        assert!((pp.d[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn blockdiag_full_rank_reproduces_transfer() {
        let sys = worked();
        let part = sys.partition_index1(1).unwrap();
        let data = InterpolationData::real(
            &[0.5, 3.0],
            &[DVector::from_element(1, 1.0), DVector::from_element(1, 1.0)],
        )
        .unwrap();
        let red = reduce_index1_blockdiag(&part, &data, &BasisOptions::default()).unwrap();
        assert_eq!(red.dropped_columns, 1);
        for w in [1e-3, 1.0, 1e3] {
            let s = cplx(0.0, w);
            assert!((red.eval(s).unwrap() - sys.eval(s).unwrap()).norm() < 1e-12);
        }
    }
}
