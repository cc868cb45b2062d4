use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use qfn::sampling::{random_operator, random_unitary, sample_rng, well_conditioned};
use qfn::{LabelSet, LabeledBlockMatrix, Operator, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn condition_number(a: &Operator) -> f64 {
    let sv = a.singular_values();
    let hi = sv.iter().cloned().fold(0.0, f64::max);
    let lo = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

fn random_block(rng: &mut impl Rng, labels: &LabelSet, dim: usize) -> LabeledBlockMatrix {
    let flat = random_operator(rng, labels.len() * dim);
    LabeledBlockMatrix::unflatten(&flat, labels.clone(), labels.clone(), dim).unwrap()
}

/// Disjoint non-empty `b1`, `b2` out of four labels, leaving at least one label.
fn random_partition(rng: &mut impl Rng, labels: &LabelSet) -> (LabelSet, LabelSet) {
    let mut all = labels.labels().to_vec();
    all.shuffle(rng);
    let k1 = rng.random_range(1..=2);
    let k2 = rng.random_range(1..=(3 - k1));
    let b1 = LabelSet::new(all[..k1].to_vec()).unwrap();
    let b2 = LabelSet::new(all[k1..k1 + k2].to_vec()).unwrap();
    (b1, b2)
}

/// `X_kk - X_kb X_bb^{-1} X_bk`, computed with dense nalgebra matrices.
fn schur_oracle(x: &LabeledBlockMatrix, short: &LabelSet) -> LabeledBlockMatrix {
    let keep = x.rows().difference(short);
    let d = x.dim();
    let dense = |r: &LabelSet, c: &LabelSet| {
        DMatrix::from_fn(r.len() * d, c.len() * d, |i, j| {
            x.entry(&r.labels()[i / d], &c.labels()[j / d]).unwrap()[(i % d, j % d)]
        })
    };
    let pivot_inv = dense(short, short).try_inverse().unwrap();
    let reduced = dense(&keep, &keep) - dense(&keep, short) * pivot_inv * dense(short, &keep);
    let flat = Operator::from_fn(keep.len() * d, |i, j| reduced[(i, j)]);
    LabeledBlockMatrix::unflatten(&flat, keep.clone(), keep, d).unwrap()
}

proptest! {
    #[test]
    fn unitary_inverse_is_adjoint(seed in any::<u64>(), dim in 1usize..6) {
        let u = random_unitary(&mut sample_rng(seed, 0), dim);
        prop_assert!(u.is_unitary(&tol()));
        prop_assert!(u.inverse(&tol()).unwrap().approx_eq(&u.adjoint(), tol().eq_tol));
    }

    #[test]
    fn imaginary_part_is_selfadjoint(seed in any::<u64>(), dim in 1usize..6) {
        let x = random_operator(&mut sample_rng(seed, 0), dim);
        prop_assert!(x.imag_part().is_selfadjoint(&tol()));
    }

    #[test]
    fn double_inverse_is_identity_map(seed in any::<u64>(), dim in 1usize..6) {
        let a = random_operator(&mut sample_rng(seed, 0), dim);
        prop_assume!(condition_number(&a) < 1e6);
        let back = a.inverse(&tol()).unwrap().inverse(&tol()).unwrap();
        prop_assert!(back.max_abs_diff(&a) <= 10.0 * tol().eq_tol * a.max_abs().max(1.0));
    }

    #[test]
    fn block_inverse_is_two_sided(seed in any::<u64>(), dim in 1usize..3, n in 1usize..4) {
        let labels = LabelSet::new((0..n).map(|k| format!("x{k}").as_str().into())).unwrap();
        let x = random_block(&mut sample_rng(seed, 0), &labels, dim);
        prop_assume!(well_conditioned(&x));
        let inv = x.block_inverse(&tol()).unwrap();
        let id = LabeledBlockMatrix::identity(labels, dim);
        prop_assert!(x.try_mul(&inv).unwrap().max_abs_diff(&id) <= tol().eq_tol * 1e3);
        prop_assert!(inv.try_mul(&x).unwrap().max_abs_diff(&id) <= tol().eq_tol * 1e3);
    }

    #[test]
    fn nested_sub_blocks_compose(seed in any::<u64>(), dim in 1usize..3) {
        let mut rng = sample_rng(seed, 0);
        let labels = LabelSet::of(&["a", "b", "c", "d"]);
        let x = random_block(&mut rng, &labels, dim);
        let pick = |rng: &mut rand_chacha::ChaCha8Rng, from: &LabelSet, k: usize| {
            let mut v = from.labels().to_vec();
            v.shuffle(rng);
            LabelSet::new(v.into_iter().take(k)).unwrap()
        };
        let r = pick(&mut rng, &labels, 3);
        let c = pick(&mut rng, &labels, 2);
        let r2 = pick(&mut rng, &r, 2);
        let c2 = pick(&mut rng, &c, 1);
        let nested = x.sub_block(&r, &c).unwrap().sub_block(&r2, &c2).unwrap();
        prop_assert_eq!(nested, x.sub_block(&r2, &c2).unwrap());
    }

    #[test]
    fn shortening_order_is_irrelevant(seed in any::<u64>(), dim in 1usize..3) {
        let mut rng = sample_rng(seed, 0);
        let labels = LabelSet::of(&["a", "b", "c", "d"]);
        let x = random_block(&mut rng, &labels, dim);
        let (b1, b2) = random_partition(&mut rng, &labels);
        let both = b1.concat(&b2).unwrap();
        prop_assume!(well_conditioned(&x.sub_block(&both, &both).unwrap()));
        prop_assume!(well_conditioned(&x.sub_block(&b2, &b2).unwrap()));
        let step = x.schur_complement(&b2, &tol()).unwrap();
        prop_assume!(well_conditioned(&step.sub_block(&b1, &b1).unwrap()));
        let direct = x.schur_complement(&both, &tol()).unwrap();
        let twice = step.schur_complement(&b1, &tol()).unwrap();
        prop_assert!(direct.max_abs_diff(&twice) <= 10.0 * tol().eq_tol * direct.max_abs().max(1.0));
    }

    #[test]
    fn schur_matches_flattened_formula(seed in any::<u64>(), dim in 1usize..3) {
        let mut rng = sample_rng(seed, 0);
        let labels = LabelSet::of(&["a", "b", "c", "d"]);
        let x = random_block(&mut rng, &labels, dim);
        let (b1, _) = random_partition(&mut rng, &labels);
        prop_assume!(well_conditioned(&x.sub_block(&b1, &b1).unwrap()));
        let got = x.schur_complement(&b1, &tol()).unwrap();
        let expect = schur_oracle(&x, &b1);
        prop_assert_eq!(got.rows(), expect.rows());
        prop_assert!(got.max_abs_diff(&expect) <= tol().eq_tol * expect.max_abs().max(1.0));
    }
}

#[test]
fn singular_pivot_is_reported_with_its_size() {
    let x = LabeledBlockMatrix::scalar_real(LabelSet::of(&["a", "b"]), LabelSet::of(&["a", "b"]), &[&[1.0, 2.0], &[2.0, 4.0]])
        .unwrap();
    let err = x.block_inverse(&tol()).unwrap_err();
    assert_eq!(err.kind(), "Singular");
    assert!(err.smallest_pivot().unwrap() < 1e-12);
}

#[test]
fn schur_on_non_commuting_entries() {
    // Pivot entries that do not commute: the flattened inverse is required.
    let sx = Operator::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
    let sz = Operator::from_real(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
    let id = Operator::identity(2);
    let two = Operator::scalar(2, Complex64::new(2.0, 0.0));
    let labels = LabelSet::of(&["k", "b1", "b2"]);
    let x = LabeledBlockMatrix::from_blocks(
        labels.clone(),
        labels,
        2,
        vec![
            id.clone(), sx.clone(), sz.clone(),
            sz.clone(), two.clone(), sx.clone(),
            sx.clone(), sz.clone(), two.clone(),
        ],
    )
    .unwrap();
    let short = LabelSet::of(&["b1", "b2"]);
    let got = x.schur_complement(&short, &tol()).unwrap();
    assert!(got.max_abs_diff(&schur_oracle(&x, &short)) < 1e-12);
}
