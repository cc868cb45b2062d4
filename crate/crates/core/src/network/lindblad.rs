use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{Operator, I};
use crate::models::SlhModel;

/// `-i[H, ρ] + Σ_k (L_k ρ L_k† - ½{L_k† L_k, ρ})`.
pub fn lindblad_generator(m: &SlhModel, rho: &Operator) -> Result<Operator> {
    if rho.dim() != m.dim() {
        return Err(Error::DimMismatch {
            expected: m.dim(),
            found: rho.dim(),
        });
    }
    let mut out = m.h().commutator(rho).scale(-I);
    let half = Complex64::new(0.5, 0.0);
    for l in m.l_ops() {
        let l_adj = l.adjoint();
        let l_dag_l = &l_adj * &l;
        out += &(&(&l * rho) * &l_adj);
        out -= &(&(&l_dag_l * rho) + &(rho * &l_dag_l)).scale(half);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::{LabelSet, LabeledBlockMatrix};
    use crate::linalg::Tolerances;

    fn model(l: Operator, h: Operator) -> SlhModel {
        let k = LabelSet::of(&["a"]);
        let d = h.dim();
        SlhModel::new(k.clone(), LabeledBlockMatrix::identity(k, d), vec![l], h, &Tolerances::default()).unwrap()
    }

    #[test]
    fn no_coupling_is_commutator() {
        let h = Operator::from_real(&[&[1.0, 0.5], &[0.5, -1.0]]).unwrap();
        let rho = Operator::from_real(&[&[0.7, 0.1], &[0.1, 0.3]]).unwrap();
        let m = model(Operator::zeros(2), h.clone());
        let expect = h.commutator(&rho).scale(-I);
        assert!(lindblad_generator(&m, &rho).unwrap().approx_eq(&expect, 1e-15));
    }

    #[test]
    fn lowering_operator_decay() {
        let a = Operator::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let rho = Operator::from_real(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap();
        let out = lindblad_generator(&model(a, Operator::zeros(2)), &rho).unwrap();
        let expect = Operator::from_real(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!(out.approx_eq(&expect, 1e-15));
    }

    #[test]
    fn trace_preserved_on_maximally_mixed() {
        let l = Operator::from_pairs(&[&[(0.3, 0.2), (1.0, -0.5)], &[(0.0, 0.4), (-0.7, 0.0)]]).unwrap();
        let rho = Operator::identity(2).scale(Complex64::new(0.5, 0.0));
        let out = lindblad_generator(&model(l, Operator::zeros(2)), &rho).unwrap();
        assert!(out.trace().norm() < 1e-15);
    }

    #[test]
    fn rejects_wrong_dimension() {
        let m = model(Operator::zeros(2), Operator::zeros(2));
        assert!(matches!(lindblad_generator(&m, &Operator::zeros(3)), Err(Error::DimMismatch { .. })));
    }
}
