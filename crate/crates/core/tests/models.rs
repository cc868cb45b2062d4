use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use qfn::models::{delta_hat, ito_delta_product};
use qfn::sampling::{channel_labels, random_operator, random_slh, random_strat, representable_slh, sample_rng, well_conditioned};
use qfn::{BhMatrix, LabelSet, LabeledBlockMatrix, Operator, SlhModel, StratGenerator, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn loose() -> f64 {
    10.0 * tol().eq_tol
}

fn generator_shaped(rng: &mut impl Rng, channels: &LabelSet, dim: usize) -> LabeledBlockMatrix {
    let labels = LabelSet::of(&["0"]).concat(channels).unwrap();
    let flat = random_operator(rng, labels.len() * dim);
    LabeledBlockMatrix::unflatten(&flat, labels.clone(), labels, dim).unwrap()
}

/// A Stratonovich sample whose Cayley pivot `I + (i/2)E_kk` is well conditioned.
fn cayley_strat(rng: &mut impl Rng, n: usize, dim: usize) -> StratGenerator {
    loop {
        let e = random_strat(rng, channel_labels("k", n), dim);
        let pivot = LabeledBlockMatrix::identity(e.channels(), dim)
            .try_add(&e.e_kk().scale(Complex64::new(0.0, 0.5)))
            .unwrap();
        if well_conditioned(&pivot) {
            return e;
        }
    }
}

proptest! {
    #[test]
    fn v_matrix_is_star_unitary(seed in any::<u64>(), n in 0usize..4, dim in 1usize..4) {
        let m = random_slh(&mut sample_rng(seed, 0), channel_labels("k", n), dim);
        prop_assert!(m.v_matrix().star_unitarity_defect() <= tol().eq_tol);
    }

    #[test]
    fn v_matrix_reads_back(seed in any::<u64>(), n in 0usize..4, dim in 1usize..4) {
        let m = random_slh(&mut sample_rng(seed, 0), channel_labels("k", n), dim);
        let back = SlhModel::from_v(&m.v_matrix(), &tol()).unwrap();
        prop_assert!(back.max_abs_diff(&m) <= tol().eq_tol);
    }

    #[test]
    fn hermitian_structure_iff_star_symmetric(seed in any::<u64>(), n in 1usize..4, dim in 1usize..3) {
        let mut rng = sample_rng(seed, 0);
        let e = random_strat(&mut rng, channel_labels("k", n), dim);
        let bh = e.bh();
        prop_assert!(bh.star().max_abs_diff(&bh) <= 1e-14);

        let raw = generator_shaped(&mut rng, &e.channels(), dim);
        let hermitian = raw.max_abs_diff(&raw.adjoint()) <= tol().eq_tol;
        let embedded = BhMatrix::embed(&raw).unwrap();
        let symmetric = embedded.star().max_abs_diff(&embedded) <= tol().eq_tol;
        prop_assert_eq!(hermitian, symmetric);
        prop_assert!(StratGenerator::new(raw, &tol()).is_err());
    }

    #[test]
    fn embedding_turns_delta_product_into_matrix_product(seed in any::<u64>(), n in 1usize..4, dim in 1usize..3) {
        let mut rng = sample_rng(seed, 0);
        let k = channel_labels("k", n);
        let x = generator_shaped(&mut rng, &k, dim);
        let y = generator_shaped(&mut rng, &k, dim);
        let lhs = BhMatrix::embed(&ito_delta_product(&x, &y).unwrap()).unwrap();
        let rhs = BhMatrix::embed(&x).unwrap().try_mul(&BhMatrix::embed(&y).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        // The delta product is the ordinary product through diag(0, I).
        let through = x.try_mul(&delta_hat(&k, dim)).unwrap().try_mul(&y).unwrap();
        prop_assert!(ito_delta_product(&x, &y).unwrap().max_abs_diff(&through) <= 1e-12);
    }

    #[test]
    fn strat_to_slh_to_strat(seed in any::<u64>(), n in 1usize..4, dim in 1usize..4) {
        let e = cayley_strat(&mut sample_rng(seed, 0), n, dim);
        let m = e.to_slh(&tol()).unwrap();
        m.validate(&tol()).unwrap();
        let back = StratGenerator::from_slh(&m, &tol()).unwrap();
        prop_assert!(back.max_abs_diff(&e) <= loose() * e.matrix().max_abs().max(1.0));
    }

    #[test]
    fn slh_to_strat_to_slh(seed in any::<u64>(), n in 1usize..4, dim in 1usize..4) {
        let m = representable_slh(&mut sample_rng(seed, 0), channel_labels("k", n), dim);
        let e = StratGenerator::from_slh(&m, &tol()).unwrap();
        let back = e.to_slh(&tol()).unwrap();
        prop_assert!(back.max_abs_diff(&m) <= loose());
    }

    #[test]
    fn cayley_factors_commute(seed in any::<u64>(), n in 1usize..4, dim in 1usize..3) {
        let e = cayley_strat(&mut sample_rng(seed, 0), n, dim);
        let id = LabeledBlockMatrix::identity(e.channels(), dim);
        let half = e.e_kk().scale(Complex64::new(0.0, 0.5));
        let plus_inv = id.try_add(&half).unwrap().block_inverse(&tol()).unwrap();
        let minus = id.try_sub(&half).unwrap();
        let left = plus_inv.try_mul(&minus).unwrap();
        let s = e.to_slh(&tol()).unwrap();
        prop_assert!(left.max_abs_diff(s.s()) <= loose());
    }

    #[test]
    fn doubling_lemma_reproduces_ito_matrix(seed in any::<u64>(), n in 1usize..4, dim in 1usize..3) {
        let e = cayley_strat(&mut sample_rng(seed, 0), n, dim);
        let lemma = e.ito_bh_via_doubling(&tol()).unwrap();
        let ito = BhMatrix::embed(e.to_slh(&tol()).unwrap().ito_generator().matrix()).unwrap();
        prop_assert!(lemma.max_abs_diff(&ito) <= loose() * ito.matrix().max_abs().max(1.0));
    }

    #[test]
    fn stratonovich_v_matches_ito_v(seed in any::<u64>(), n in 1usize..4, dim in 1usize..3) {
        let e = cayley_strat(&mut sample_rng(seed, 0), n, dim);
        let via_cayley = e.v_matrix(&tol()).unwrap();
        let via_slh = e.to_slh(&tol()).unwrap().v_matrix();
        prop_assert!(via_cayley.max_abs_diff(&via_slh) <= loose() * via_slh.matrix().max_abs().max(1.0));
        let g = via_cayley.try_sub(&BhMatrix::identity(e.channels(), dim)).unwrap();
        prop_assert!(g.off_pattern_norm() <= loose());
    }
}

#[test]
fn ito_generator_blocks_by_hand() {
    // S = i, L = 2, H = 3 on one channel: G00 = -(2 + 3i), G0k = -L*S = -2i, Gk0 = 2, Gkk = i - 1.
    let k = LabelSet::of(&["a"]);
    let sc = |re: f64, im: f64| Operator::scalar(1, Complex64::new(re, im));
    let s = LabeledBlockMatrix::from_blocks(k.clone(), k.clone(), 1, vec![sc(0.0, 1.0)]).unwrap();
    let m = SlhModel::new(k, s, vec![sc(2.0, 0.0)], sc(3.0, 0.0), &tol()).unwrap();
    let g = m.ito_generator().matrix().flatten().unwrap();
    let expect = [[(-2.0, -3.0), (0.0, -2.0)], [(2.0, 0.0), (-1.0, 1.0)]];
    for r in 0..2 {
        for c in 0..2 {
            assert_eq!(g[(r, c)], Complex64::new(expect[r][c].0, expect[r][c].1));
        }
    }
}

#[test]
fn mirror_is_not_representable() {
    let k = LabelSet::of(&["a"]);
    let minus = Operator::scalar(1, Complex64::new(-1.0, 0.0));
    let s = LabeledBlockMatrix::from_blocks(k.clone(), k.clone(), 1, vec![minus]).unwrap();
    let m = SlhModel::new(k, s, vec![Operator::zeros(1)], Operator::zeros(1), &tol()).unwrap();
    let err = StratGenerator::from_slh(&m, &tol()).unwrap_err();
    assert_eq!(err.kind(), "NotRepresentable");
    assert_eq!(err.block(), Some("I + S"));
    assert!(!m.is_strat_representable(&tol()));
}

#[test]
fn scalar_generator_gives_cayley_phase() {
    // E_kk = 2: S = (1 - i)/(1 + i) = -i.
    let k = LabelSet::of(&["a"]);
    let e_kk = LabeledBlockMatrix::scalar_real(k.clone(), k.clone(), &[&[2.0]]).unwrap();
    let e = StratGenerator::from_blocks(k, Operator::zeros(1), vec![Operator::zeros(1)], e_kk, &tol()).unwrap();
    let s = e.to_slh(&tol()).unwrap().s().flatten().unwrap();
    assert!((s[(0, 0)] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
}

#[test]
fn malformed_v_is_rejected() {
    let mut rng = sample_rng(11, 0);
    let m = random_slh(&mut rng, channel_labels("k", 2), 2);
    let v = m.v_matrix().scale(Complex64::new(2.0, 0.0));
    assert_eq!(SlhModel::from_v(&v, &tol()).unwrap_err().kind(), "MalformedV");
}
