//! Random operators, models and networks for property checks.
//!
//! Every sampler takes an explicit RNG. [`sample_rng`] derives an independent
//! ChaCha stream per sample index, so a batch gives the same samples whether
//! it runs sequentially or in parallel.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::block::{Label, LabelSet, LabeledBlockMatrix};
use crate::linalg::{Operator, Tolerances};
use crate::models::{generator_labels, SlhModel, StratGenerator};
use crate::netlist::{build_open_loop, slh_payload, ComponentDecl, Connection, NetworkSpec, PortRef};
use crate::network::{ChannelSplit, Permutation};

/// Samples whose required pivots have a smaller singular value than this are redrawn.
pub const PIVOT_FLOOR: f64 = 1e-6;

const MAX_REDRAWS: usize = 10_000;

pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Complex number with independent standard normal parts.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_operator<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    Operator::from_fn(dim, |_, _| gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    let a = random_operator(rng, dim);
    (&a + &a.adjoint()).scale(Complex64::new(0.5, 0.0))
}

/// Gram-Schmidt step: removes from column `c` its components along columns `0..c`.
fn project_out_previous(cols: &mut [Vec<Complex64>], c: usize) {
    let (done, rest) = cols.split_at_mut(c);
    let col = &mut rest[0];
    for p in done.iter() {
        let proj: Complex64 = p.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
        for (z, v) in col.iter_mut().zip(p) {
            *z -= proj * v;
        }
    }
}

/// Haar-distributed unitary: Gram-Schmidt on the columns of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    loop {
        let a = random_operator(rng, dim);
        let mut cols: Vec<Vec<Complex64>> = (0..dim).map(|c| (0..dim).map(|r| a[(r, c)]).collect()).collect();
        let mut degenerate = false;
        for c in 0..dim {
            project_out_previous(&mut cols, c);
            let norm = cols[c].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            for z in cols[c].iter_mut() {
                *z /= norm;
            }
        }
        if !degenerate {
            return Operator::from_fn(dim, |r, c| cols[c][r]);
        }
    }
}

/// Random density matrix `A A† / tr(A A†)`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    let a = random_operator(rng, dim);
    let rho = &a * &a.adjoint();
    let tr = rho.trace();
    rho.scale(Complex64::new(1.0 / tr.re, 0.0))
}

pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Permutation {
    let mut image: Vec<usize> = (0..n).collect();
    image.shuffle(rng);
    Permutation::new(image).expect("shuffle of 0..n is a bijection")
}

/// `prefix1, prefix2, ...`.
pub fn channel_labels(prefix: &str, n: usize) -> LabelSet {
    LabelSet::new((1..=n).map(|k| Label::from(format!("{prefix}{k}").as_str()))).expect("distinct by construction")
}

/// Haar `S`, Gaussian `L`, Gaussian Hermitian `H`.
pub fn random_slh<R: Rng + ?Sized>(rng: &mut R, channels: LabelSet, dim: usize) -> SlhModel {
    let n = channels.len();
    let s = LabeledBlockMatrix::unflatten(&random_unitary(rng, n * dim), channels.clone(), channels.clone(), dim)
        .expect("shape matches");
    let l = (0..n).map(|_| random_operator(rng, dim)).collect();
    let h = random_hermitian(rng, dim);
    SlhModel::new(channels, s, l, h, &loose()).expect("sampled model is valid")
}

/// Gaussian entries, then `E ← (E + E†)/2` over the flattened matrix.
pub fn random_strat<R: Rng + ?Sized>(rng: &mut R, channels: LabelSet, dim: usize) -> StratGenerator {
    let labels = generator_labels(&channels);
    let flat = random_hermitian(rng, labels.len() * dim);
    let e = LabeledBlockMatrix::unflatten(&flat, labels.clone(), labels, dim).expect("shape matches");
    StratGenerator::new(e, &loose()).expect("symmetrized sample is Hermitian-structured")
}

/// Validation tolerances for sampled data; exact structure holds up to round-off.
fn loose() -> Tolerances {
    Tolerances::with_eq_tol(1e-8).expect("valid tolerances")
}

/// Largest condition number accepted for the pivots of a sampled network.
pub const NETWORK_CONDITION_LIMIT: f64 = 1e4;

/// `σ_max / σ_min` of the flattened block.
pub fn condition_number(x: &LabeledBlockMatrix) -> f64 {
    let sv = x.flatten().map(|f| f.singular_values()).unwrap_or_default();
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

fn network_pivot_ok(x: &LabeledBlockMatrix) -> bool {
    x.rows().is_empty() || (well_conditioned(x) && condition_number(x) <= NETWORK_CONDITION_LIMIT)
}

/// True when the smallest singular value of the flattened block is at least [`PIVOT_FLOOR`].
pub fn well_conditioned(x: &LabeledBlockMatrix) -> bool {
    x.rows().is_empty() || x.flatten().map(|f| f.smallest_singular_value() >= PIVOT_FLOOR).unwrap_or(false)
}

/// Channels `e1.., i1..` in a shuffled order and the matching split, with
/// `|e|, |i|` drawn from `{1, 2}`.
pub fn random_split<R: Rng + ?Sized>(rng: &mut R) -> (LabelSet, ChannelSplit) {
    let ext = channel_labels("e", rng.random_range(1..=2));
    let int = channel_labels("i", rng.random_range(1..=2));
    let mut all: Vec<Label> = ext.iter().chain(int.iter()).cloned().collect();
    all.shuffle(rng);
    let channels = LabelSet::new(all).expect("distinct");
    let split = ChannelSplit::from_internal(&channels, int).expect("internal labels present");
    (channels, split)
}

fn i_minus_s_ii(m: &SlhModel, split: &ChannelSplit) -> LabeledBlockMatrix {
    let i = split.internal();
    LabeledBlockMatrix::identity(i.clone(), m.dim())
        .try_sub(&m.s().sub_block(i, i).expect("internal labels present"))
        .expect("same labels")
}

/// A Stratonovich generator with `d ∈ {1,2,3}` and a split for which both the
/// Stratonovich pivot `E_ii` and the loop pivot `I - S_ii` are well conditioned.
pub fn feedback_strat_case<R: Rng + ?Sized>(rng: &mut R) -> (StratGenerator, ChannelSplit) {
    for _ in 0..MAX_REDRAWS {
        let dim = rng.random_range(1..=3);
        let (channels, split) = random_split(rng);
        let e = random_strat(rng, channels, dim);
        let i = split.internal();
        if !well_conditioned(&e.matrix().sub_block(i, i).unwrap()) {
            continue;
        }
        let half = LabeledBlockMatrix::identity(e.channels(), dim).try_add(&e.e_kk().scale(Complex64::new(0.0, 0.5)));
        if !well_conditioned(&half.unwrap()) {
            continue;
        }
        let Ok(m) = e.to_slh(&Tolerances::default()) else { continue };
        if well_conditioned(&i_minus_s_ii(&m, &split)) {
            return (e, split);
        }
    }
    panic!("could not draw a well-conditioned feedback sample");
}

/// A Stratonovich generator with `d ∈ {1,2,3}` and a random split, conditioned
/// only on the Cayley pivot; its feedback pivots may be anything.
pub fn strat_with_split<R: Rng + ?Sized>(rng: &mut R) -> (StratGenerator, ChannelSplit) {
    let dim = rng.random_range(1..=3);
    let (channels, split) = random_split(rng);
    (random_strat(rng, channels, dim), split)
}

/// A random SLH model with `d ∈ {1,2,3}` and a well-posed split.
pub fn feedback_slh_case<R: Rng + ?Sized>(rng: &mut R) -> (SlhModel, ChannelSplit) {
    for _ in 0..MAX_REDRAWS {
        let dim = rng.random_range(1..=3);
        let (channels, split) = random_split(rng);
        let m = random_slh(rng, channels, dim);
        if well_conditioned(&i_minus_s_ii(&m, &split)) {
            return (m, split);
        }
    }
    panic!("could not draw a well-posed feedback sample");
}

/// A random SLH model with `I + S` well conditioned.
pub fn representable_slh<R: Rng + ?Sized>(rng: &mut R, channels: LabelSet, dim: usize) -> SlhModel {
    for _ in 0..MAX_REDRAWS {
        let m = random_slh(rng, channels.clone(), dim);
        let plus = LabeledBlockMatrix::identity(channels.clone(), dim).try_add(m.s()).unwrap();
        if well_conditioned(&plus) {
            return m;
        }
    }
    panic!("could not draw a representable model");
}

/// A unitary with a fixed vector supported on the internal channels, so that
/// `I - S_ii` is singular. Gram-Schmidt on `[v, gaussian columns]` gives `Q`;
/// `S = Q diag(1, U) Q†`.
pub fn loop_singular_slh<R: Rng + ?Sized>(rng: &mut R) -> (SlhModel, ChannelSplit) {
    let dim = rng.random_range(1..=2);
    let (channels, split) = random_split(rng);
    let n = channels.len() * dim;
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let first: Vec<Complex64> = (0..n)
        .map(|r| {
            if split.internal().contains(&channels.labels()[r / dim]) {
                gaussian(rng)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    cols.push(first);
    for _ in 1..n {
        cols.push((0..n).map(|_| gaussian(rng)).collect());
    }
    for c in 0..n {
        project_out_previous(&mut cols, c);
        let norm = cols[c].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[c].iter_mut() {
            *z /= norm;
        }
    }
    let q = Operator::from_fn(n, |r, c| cols[c][r]);
    let inner = random_unitary(rng, n - 1);
    let d = Operator::from_fn(n, |r, c| match (r, c) {
        (0, 0) => Complex64::new(1.0, 0.0),
        (0, _) | (_, 0) => Complex64::new(0.0, 0.0),
        _ => inner[(r - 1, c - 1)],
    });
    let s_flat = &(&q * &d) * &q.adjoint();
    let s = LabeledBlockMatrix::unflatten(&s_flat, channels.clone(), channels.clone(), dim).unwrap();
    let l = (0..channels.len()).map(|_| Operator::from_fn(dim, |_, _| gaussian(rng))).collect();
    let h = random_hermitian(rng, dim);
    (SlhModel::new(channels, s, l, h, &loose()).unwrap(), split)
}

/// A Stratonovich generator whose `E_ii` has a null vector.
pub fn schur_singular_strat<R: Rng + ?Sized>(rng: &mut R) -> (StratGenerator, ChannelSplit) {
    let dim = rng.random_range(1..=2);
    let (channels, split) = random_split(rng);
    let e = random_strat(rng, channels.clone(), dim);
    let i = split.internal();
    let n = i.len() * dim;
    let u: Vec<Complex64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let p = Operator::from_fn(n, |r, c| {
        let id = if r == c { 1.0 } else { 0.0 };
        Complex64::new(id, 0.0) - u[r] * u[c].conj() / (norm * norm)
    });
    let e_ii = e.matrix().sub_block(i, i).unwrap().flatten().unwrap();
    let projected = &(&p * &e_ii) * &p;
    let mut full = e.matrix().clone();
    let block = LabeledBlockMatrix::unflatten(&projected, i.clone(), i.clone(), dim).unwrap();
    for r in i {
        for c in i {
            full.set_entry(r, c, block.entry(r, c).unwrap().clone()).unwrap();
        }
    }
    (StratGenerator::new(full, &loose()).unwrap(), split)
}

fn network_component<R: Rng + ?Sized>(rng: &mut R, name: &str, dim: usize) -> ComponentDecl {
    let n = rng.random_range(1..=2);
    let ports = channel_labels("p", n);
    let m = loop {
        let m = representable_slh(rng, ports.clone(), dim);
        let i_plus_s = LabeledBlockMatrix::identity(ports.clone(), dim).try_add(m.s()).unwrap();
        if network_pivot_ok(&i_plus_s) {
            break m;
        }
    };
    ComponentDecl {
        name: name.to_string(),
        inputs: ports.iter().map(|l| l.as_str().to_string()).collect(),
        payload: slh_payload(&m),
    }
}

/// Two SLH components `c1`, `c2` with one or two ports each and `d ∈ {1, 2}`,
/// wired by a random non-empty partial injection from outputs to inputs.
/// Redrawn until the components are representable and the pivots of the open
/// loop (`I + (i/2)E_kk` and `E_ii` of its Stratonovich form, and `I - S_ii`)
/// pass [`PIVOT_FLOOR`] and have condition number at most
/// [`NETWORK_CONDITION_LIMIT`].
pub fn random_two_component_network<R: Rng + ?Sized>(rng: &mut R) -> NetworkSpec {
    let tol = Tolerances::default();
    for _ in 0..MAX_REDRAWS {
        let dim = rng.random_range(1..=2);
        let components = vec![network_component(rng, "c1", dim), network_component(rng, "c2", dim)];
        let mut ports: Vec<PortRef> = components
            .iter()
            .flat_map(|c| {
                c.inputs.iter().map(|p| PortRef {
                    component: c.name.clone(),
                    port: p.clone(),
                })
            })
            .collect();
        let count = rng.random_range(1..=ports.len());
        let mut sources = ports.clone();
        sources.shuffle(rng);
        ports.shuffle(rng);
        let connections = sources
            .into_iter()
            .zip(ports)
            .take(count)
            .map(|(from, to)| Connection { from, to })
            .collect();
        let spec = NetworkSpec {
            hilbert_dim: dim,
            components,
            connections,
        };
        let Ok(open) = build_open_loop(&spec, &tol) else { continue };
        let Some(e) = &open.strat else { continue };
        let i = open.split.internal();
        let cayley = LabeledBlockMatrix::identity(e.channels(), dim)
            .try_add(&e.e_kk().scale(Complex64::new(0.0, 0.5)))
            .unwrap();
        if network_pivot_ok(&cayley)
            && network_pivot_ok(&e.matrix().sub_block(i, i).unwrap())
            && network_pivot_ok(&i_minus_s_ii(&open.model, &open.split))
        {
            return spec;
        }
    }
    panic!("could not draw a well-posed network");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = sample_rng(7, 3).sample(StandardNormal);
        let b: f64 = sample_rng(7, 3).sample(StandardNormal);
        let c: f64 = sample_rng(7, 4).sample(StandardNormal);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unitary_samples_are_unitary() {
        let mut rng = sample_rng(1, 0);
        for d in 1..=6 {
            assert!(random_unitary(&mut rng, d).is_unitary(&Tolerances::default()));
        }
    }

    #[test]
    fn density_has_unit_trace_and_is_hermitian() {
        let mut rng = sample_rng(2, 0);
        let rho = random_density(&mut rng, 3);
        assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(rho.is_selfadjoint(&Tolerances::default()));
    }

    #[test]
    fn split_covers_channels() {
        let mut rng = sample_rng(3, 0);
        for _ in 0..20 {
            let (channels, split) = random_split(&mut rng);
            assert!(split.check_covers(&channels).is_ok());
            assert!(!split.internal().is_empty() && !split.external().is_empty());
        }
    }

    #[test]
    fn feedback_case_is_conditioned() {
        let mut rng = sample_rng(4, 0);
        let (e, split) = feedback_strat_case(&mut rng);
        let i = split.internal();
        assert!(well_conditioned(&e.matrix().sub_block(i, i).unwrap()));
    }
}
