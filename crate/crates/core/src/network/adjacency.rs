use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::block::{LabelSet, LabeledBlockMatrix};
use crate::error::{Error, Result};
use crate::linalg::{Operator, Tolerances};
use crate::models::SlhModel;

use super::ChannelSplit;

/// A bijection on `{0, .., n-1}`, stored as `image[k] = σ(k)`.
/// Displayed in 1-based cycle notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &k in &image {
            if k >= n || seen[k] {
                return Err(Error::InvalidValue(format!("{image:?} is not a permutation")));
            }
            seen[k] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self { image: (0..n).collect() }
    }

    /// Builds a permutation from disjoint 0-based cycles; unlisted points are fixed.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut image: Vec<usize> = (0..n).collect();
        for cycle in cycles {
            for (pos, &k) in cycle.iter().enumerate() {
                if k >= n {
                    return Err(Error::InvalidValue(format!("cycle entry {k} out of range for size {n}")));
                }
                image[k] = cycle[(pos + 1) % cycle.len()];
            }
        }
        Self::new(image)
    }

    pub fn size(&self) -> usize {
        self.image.len()
    }

    pub fn apply(&self, k: usize) -> usize {
        self.image[k]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(k, &v)| k == v)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.size()];
        for (k, &v) in self.image.iter().enumerate() {
            inv[v] = k;
        }
        Self { image: inv }
    }

    /// Disjoint cycles, each starting at its smallest element, fixed points included.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.size()];
        let mut out = Vec::new();
        for start in 0..self.size() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut k = self.image[start];
            while k != start {
                seen[k] = true;
                cycle.push(k);
                k = self.image[k];
            }
            out.push(cycle);
        }
        out
    }

    pub fn has_even_cycle(&self) -> bool {
        self.cycles().iter().any(|c| c.len() % 2 == 0)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.image.is_empty() {
            return write!(f, "()");
        }
        for cycle in self.cycles() {
            let parts: Vec<String> = cycle.iter().map(|k| (k + 1).to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

/// `η(σ)` over `labels`: block `(j, k)` is the identity iff `j = σ(k)`.
pub fn adjacency_matrix(sigma: &Permutation, labels: &LabelSet, dim: usize) -> Result<LabeledBlockMatrix> {
    if labels.len() != sigma.size() {
        return Err(Error::SizeMismatch {
            expected: labels.len(),
            found: sigma.size(),
        });
    }
    Ok(LabeledBlockMatrix::from_fn(labels.clone(), labels.clone(), dim, |r, c| {
        let j = labels.position(r).unwrap();
        let k = labels.position(c).unwrap();
        if j == sigma.apply(k) {
            Operator::identity(dim)
        } else {
            Operator::zeros(dim)
        }
    }))
}

/// The `E_kk` block whose Cayley transform is `η(σ)`:
/// `(2/i)(I - η)(I + η)^{-1}`. Fails exactly when `σ` has an even cycle.
pub fn permutation_strat(
    sigma: &Permutation,
    labels: &LabelSet,
    dim: usize,
    tol: &Tolerances,
) -> Result<LabeledBlockMatrix> {
    let even = || Error::EvenCycle {
        permutation: sigma.to_string(),
    };
    let eta = adjacency_matrix(sigma, labels, dim)?;
    if sigma.has_even_cycle() {
        return Err(even());
    }
    let id = LabeledBlockMatrix::identity(labels.clone(), dim);
    let plus_inv = id.try_add(&eta)?.block_inverse(tol).map_err(|_| even())?;
    Ok(id
        .try_sub(&eta)?
        .try_mul(&plus_inv)?
        .scale(Complex64::new(0.0, -2.0)))
}

/// Union over cycles of length `k` of the `k`-th roots of unity.
pub fn predicted_spectrum(sigma: &Permutation) -> Vec<Complex64> {
    sigma
        .cycles()
        .iter()
        .flat_map(|c| {
            let k = c.len();
            (0..k).map(move |j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64))
        })
        .collect()
}

/// Largest distance between a predicted eigenvalue of `η(σ)` and the
/// computed eigenvalue it is greedily paired with.
pub fn permutation_spectrum_defect(sigma: &Permutation) -> Result<f64> {
    if sigma.size() == 0 {
        return Ok(0.0);
    }
    let labels = LabelSet::new((0..sigma.size()).map(|k| crate::block::Label::from(format!("{k}").as_str())))?;
    let eta = adjacency_matrix(sigma, &labels, 1)?.flatten()?;
    let mut computed = eta.eigenvalues()?;
    let mut worst = 0.0_f64;
    for p in predicted_spectrum(sigma) {
        let (idx, dist) = computed
            .iter()
            .enumerate()
            .map(|(i, z)| (i, (z - p).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("as many computed as predicted eigenvalues");
        worst = worst.max(dist);
        computed.swap_remove(idx);
    }
    Ok(worst)
}

/// Permutes the input columns of `S`: new column `a` is old column `π(a)`,
/// positions taken in the model's channel order. `L` and `H` are unchanged.
pub fn permute_inputs(m: &SlhModel, pi: &Permutation) -> Result<SlhModel> {
    let k = m.channels();
    if pi.size() != k.len() {
        return Err(Error::SizeMismatch {
            expected: k.len(),
            found: pi.size(),
        });
    }
    let s = LabeledBlockMatrix::from_fn(k.clone(), k.clone(), m.dim(), |r, c| {
        let a = k.position(c).unwrap();
        let src = &k.labels()[pi.apply(a)];
        m.s().at(r.as_str(), src.as_str()).clone()
    });
    Ok(SlhModel::from_parts(k.clone(), s, m.l_column().clone(), m.h().clone()))
}

/// Replaces `S_ei`, `S_ii` by `S_ei η`, `S_ii η` with `σ` acting on the
/// internal channels in the split's order.
pub fn absorb_adjacency(m: &SlhModel, split: &ChannelSplit, sigma: &Permutation) -> Result<SlhModel> {
    split.check_covers(m.channels())?;
    let internal = split.internal();
    if sigma.size() != internal.len() {
        return Err(Error::SizeMismatch {
            expected: internal.len(),
            found: sigma.size(),
        });
    }
    let k = m.channels();
    let mut image: Vec<usize> = (0..k.len()).collect();
    for (pos, label) in internal.iter().enumerate() {
        let target = &internal.labels()[sigma.apply(pos)];
        image[k.position(label).unwrap()] = k.position(target).unwrap();
    }
    permute_inputs(m, &Permutation::new(image)?)
}
