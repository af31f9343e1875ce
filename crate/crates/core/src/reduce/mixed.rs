use nalgebra::DMatrix;

use super::basis::{finish_basis, interpolation_columns};
use super::{BasisOptions, InterpolationData, Layout, Method, ReducedModel};
use crate::error::Result;
use crate::model::MixedPartition;
use crate::scalar::Real;

/// Congruence with `diag(I, V2, I)`, where `V2` is the middle block of the
/// generic interpolation basis. The constraint blocks are untouched.
pub fn reduce_mixed<T: Real>(
    part: &MixedPartition<'_, T>,
    data: &InterpolationData<T>,
    opts: &BasisOptions,
) -> Result<ReducedModel<T>> {
    let sys = part.system();
    let (n1, n2, n3) = (part.n1(), part.n2(), part.n3());
    if n2 == 0 {
        return ReducedModel::assemble(
            sys.clone(),
            Method::Mixed,
            Layout::Mixed { n1, n2, n3 },
            None,
            0,
            data,
        );
    }
    let cols = interpolation_columns(&sys.as_generic(), data)?;
    let basis = finish_basis(
        &cols.rows(n1, n2).into_owned(),
        data,
        opts,
        "middle block basis",
    )?;
    let r = basis.ncols();
    let mut t = DMatrix::zeros(sys.n(), n1 + r + n3);
    t.view_mut((0, 0), (n1, n1)).fill_with_identity();
    t.view_mut((n1, n1), (n2, r)).copy_from(&basis.v);
    t.view_mut((n1 + n2, n1 + r), (n3, n3)).fill_with_identity();
    let reduced = sys.congruence(&t)?;
    ReducedModel::assemble(
        reduced,
        Method::Mixed,
        Layout::Mixed { n1, n2: r, n3 },
        None,
        basis.dropped,
        data,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhdaeSystem;
    use crate::reduce::interpolation_residual;
    use crate::scalar::cplx;
    use crate::transfer::Transfer;
    use nalgebra::{dmatrix, DVector};

    // states (x1, x2a, x2b, x3): x1 pinned by the multiplier x3
    fn small_mixed() -> PhdaeSystem<f64> {
        let e = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 1.0, 0.0]));
        let j = dmatrix![
            0.0, 0.5, 0.0, -1.0;
            -0.5, 0.0, 1.0, 0.0;
            0.0, -1.0, 0.0, 0.0;
            1.0, 0.0, 0.0, 0.0
        ];
        let r = DMatrix::from_diagonal(&DVector::from_vec(vec![0.3, 0.5, 0.2, 0.0]));
        let b = dmatrix![1.0; 1.0; 0.5; 0.0];
        PhdaeSystem::collocated(e, j, r, b).unwrap()
    }

    #[test]
    fn one_point_interpolates() {
        let sys = small_mixed();
        let part = sys.partition_mixed(1, 2).unwrap();
        let data = InterpolationData::real(&[0.7], &[DVector::from_element(1, 1.0)]).unwrap();
        let red = reduce_mixed(&part, &data, &BasisOptions::default()).unwrap();
        assert_eq!(red.order(), 3);
        assert!(red.ph_valid);
        assert!(interpolation_residual(&sys, &red, &data).unwrap() < 1e-12);
        assert_eq!(red.proper_part().unwrap().n(), 1);
    }

    #[test]
    fn full_middle_block_is_exact() {
        let sys = small_mixed();
        let part = sys.partition_mixed(1, 2).unwrap();
        let b = DVector::from_element(1, 1.0);
        let data = InterpolationData::real(&[0.5, 4.0], &[b.clone(), b]).unwrap();
        let red = reduce_mixed(&part, &data, &BasisOptions::default()).unwrap();
        for w in [1e-2, 1.0, 1e2] {
            let s = cplx(0.0, w);
            assert!((red.eval(s).unwrap() - sys.eval(s).unwrap()).norm() < 1e-10);
        }
    }
}
