use num_complex::Complex64;

use crate::block::{LabelSet, LabeledBlockMatrix};
use crate::error::{Error, PivotFailure, Result};
use crate::linalg::{Operator, Tolerances};
use crate::models::{generator_labels, BhMatrix, SlhModel, StratGenerator, ZERO_LABEL};

fn common_dim(dims: impl Iterator<Item = usize>) -> Result<usize> {
    let mut dims = dims.peekable();
    let d = *dims
        .peek()
        .ok_or_else(|| Error::InvalidValue("nothing to concatenate".into()))?;
    for other in dims {
        if other != d {
            return Err(Error::DimMismatch { expected: d, found: other });
        }
    }
    Ok(d)
}

fn joint_channels<'a>(mut sets: impl Iterator<Item = &'a LabelSet>) -> Result<LabelSet> {
    sets.try_fold(LabelSet::empty(), |acc, s| acc.concat(s))
}

/// Parallel composition: block-diagonal `S`, stacked `L`, summed `H`.
pub fn concat_slh(models: &[SlhModel]) -> Result<SlhModel> {
    let d = common_dim(models.iter().map(SlhModel::dim))?;
    let channels = joint_channels(models.iter().map(SlhModel::channels))?;
    let mut s = LabeledBlockMatrix::zeros(channels.clone(), channels.clone(), d);
    let mut l = LabeledBlockMatrix::zeros(channels.clone(), LabelSet::of(&[ZERO_LABEL]), d);
    let mut h = Operator::zeros(d);
    for m in models {
        for r in m.channels() {
            for c in m.channels() {
                s.set(r.as_str(), c.as_str(), m.s().at(r.as_str(), c.as_str()).clone());
            }
            l.set(r.as_str(), ZERO_LABEL, m.l(r)?.clone());
        }
        h += m.h();
    }
    Ok(SlhModel::from_parts(channels, s, l, h))
}

/// Parallel composition of Stratonovich generators: `E_00` adds, each
/// component keeps its own `0k`, `k0` and `kk` blocks, cross blocks vanish.
pub fn concat_strat(gens: &[StratGenerator]) -> Result<StratGenerator> {
    let d = common_dim(gens.iter().map(StratGenerator::dim))?;
    let per: Vec<LabelSet> = gens.iter().map(StratGenerator::channels).collect();
    let channels = joint_channels(per.iter())?;
    let labels = generator_labels(&channels);
    let mut e = LabeledBlockMatrix::zeros(labels.clone(), labels, d);
    let mut e00 = Operator::zeros(d);
    for (g, k) in gens.iter().zip(&per) {
        e00 += g.e00();
        let m = g.matrix();
        for r in k {
            e.set(ZERO_LABEL, r.as_str(), m.at(ZERO_LABEL, r.as_str()).clone());
            e.set(r.as_str(), ZERO_LABEL, m.at(r.as_str(), ZERO_LABEL).clone());
            for c in k {
                e.set(r.as_str(), c.as_str(), m.at(r.as_str(), c.as_str()).clone());
            }
        }
    }
    e.set(ZERO_LABEL, ZERO_LABEL, e00);
    Ok(StratGenerator::from_matrix_unchecked(e))
}

fn check_series_shapes(n2: usize, d2: usize, n1: usize, d1: usize) -> Result<()> {
    if d1 != d2 {
        return Err(Error::DimMismatch { expected: d2, found: d1 });
    }
    if n1 != n2 {
        return Err(Error::SizeMismatch { expected: n2, found: n1 });
    }
    Ok(())
}

/// Series product `second ◁ first`: the outputs of `first` drive `second`.
/// Channels are matched by position; the result carries `second`'s labels.
pub fn series_slh(second: &SlhModel, first: &SlhModel) -> Result<SlhModel> {
    check_series_shapes(second.n_channels(), second.dim(), first.n_channels(), first.dim())?;
    let channels = second.channels().clone();
    let first = first.relabeled(channels.clone())?;
    let s = second.s().try_mul(first.s())?;
    let s2_l1 = second.s().try_mul(first.l_column())?;
    let l = second.l_column().try_add(&s2_l1)?;
    let cross = second.l_column().adjoint().try_mul(&s2_l1)?;
    let h = &(first.h() + second.h()) + &cross.at(ZERO_LABEL, ZERO_LABEL).imag_part();
    Ok(SlhModel::from_parts(channels, s, l, h))
}

/// Series product in Stratonovich form:
/// `(𝕀 + i𝔼₂/2)^{-1} (𝔼₁ + 𝔼₂) (𝕀 - 𝔼₂𝔼₁/4)^{-1} (𝕀 + i𝔼₂/2)`.
pub fn series_strat(e2: &StratGenerator, e1: &StratGenerator, tol: &Tolerances) -> Result<StratGenerator> {
    check_series_shapes(e2.channels().len(), e2.dim(), e1.channels().len(), e1.dim())?;
    let channels = e2.channels();
    let b1 = e1.relabeled(channels.clone())?.bh();
    let b2 = e2.bh();
    let id = BhMatrix::identity(channels, e2.dim());
    let outer = id.try_add(&b2.scale(Complex64::new(0.0, 0.5)))?;
    let outer_inv = outer
        .inverse(tol)
        .map_err(|e| e.retag("𝕀 + (i/2)𝔼₂", PivotFailure::Singular))?;
    let middle_inv = id
        .try_sub(&b2.try_mul(&b1)?.scale(Complex64::new(0.25, 0.0)))?
        .inverse(tol)
        .map_err(|e| e.retag("𝕀 - (1/4)𝔼₂𝔼₁", PivotFailure::SeriesNotRepresentable))?;
    let product = outer_inv
        .try_mul(&b1.try_add(&b2)?)?
        .try_mul(&middle_inv)?
        .try_mul(&outer)?;
    Ok(StratGenerator::from_matrix_unchecked(product.extract()))
}
