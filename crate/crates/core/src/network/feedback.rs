//! Instantaneous feedback: the internal channels are fed back in as inputs
//! and eliminated. Four evaluation paths are provided so they can be checked
//! against one another.

use crate::block::{LabelSet, LabeledBlockMatrix};
use crate::error::{PivotFailure, Result};
use crate::linalg::Tolerances;
use crate::models::{BhMatrix, SlhModel, StratGenerator, ZERO_LABEL};

use super::adjacency::{adjacency_matrix, Permutation};
use super::ChannelSplit;

const ILL_POSED_BLOCK: &str = "I - S_ii";

struct Blocks {
    external: LabelSet,
    s_ee: LabeledBlockMatrix,
    s_ei: LabeledBlockMatrix,
    s_ie: LabeledBlockMatrix,
    s_ii: LabeledBlockMatrix,
    l_e: LabeledBlockMatrix,
    l_i: LabeledBlockMatrix,
}

fn split_blocks(m: &SlhModel, split: &ChannelSplit) -> Result<Blocks> {
    split.check_covers(m.channels())?;
    let i = split.internal();
    let e = m.channels().difference(i);
    let zero = LabelSet::of(&[ZERO_LABEL]);
    Ok(Blocks {
        s_ee: m.s().sub_block(&e, &e)?,
        s_ei: m.s().sub_block(&e, i)?,
        s_ie: m.s().sub_block(i, &e)?,
        s_ii: m.s().sub_block(i, i)?,
        l_e: m.l_column().sub_block(&e, &zero)?,
        l_i: m.l_column().sub_block(i, &zero)?,
        external: e,
    })
}

/// Shared tail of the SLH feedback formulas. `loop_gain` is the operator that
/// multiplies `L_i` and `S_ie` after `S_ei`: `(I - S_ii)^{-1}`, or
/// `η (I - S_ii η)^{-1}` when the adjacency is kept explicit.
fn assemble(m: &SlhModel, b: &Blocks, loop_gain: &LabeledBlockMatrix) -> Result<SlhModel> {
    let through = b.s_ei.try_mul(loop_gain)?;
    let s = b.s_ee.try_add(&through.try_mul(&b.s_ie)?)?;
    let l = b.l_e.try_add(&through.try_mul(&b.l_i)?)?;
    let row = b
        .l_e
        .adjoint()
        .try_mul(&b.s_ei)?
        .try_add(&b.l_i.adjoint().try_mul(&b.s_ii)?)?;
    let correction = row.try_mul(loop_gain)?.try_mul(&b.l_i)?;
    let h = m.h() + &correction.at(ZERO_LABEL, ZERO_LABEL).imag_part();
    Ok(SlhModel::from_parts(b.external.clone(), s, l, h))
}

/// Reduced SLH model with the internal outputs wired straight back to the
/// internal inputs of the same name:
/// `S_ee + S_ei (I - S_ii)^{-1} S_ie`, `L_e + S_ei (I - S_ii)^{-1} L_i`,
/// `H + Im{(L_e† S_ei + L_i† S_ii)(I - S_ii)^{-1} L_i}`.
pub fn feedback_slh(m: &SlhModel, split: &ChannelSplit, tol: &Tolerances) -> Result<SlhModel> {
    let b = split_blocks(m, split)?;
    let id = LabeledBlockMatrix::identity(split.internal().clone(), m.dim());
    let resolvent = id
        .try_sub(&b.s_ii)?
        .block_inverse_named(tol, ILL_POSED_BLOCK, PivotFailure::IllPosed)?;
    assemble(m, &b, &resolvent)
}

/// Feedback through an explicit adjacency `η(σ)` on the internal channels,
/// without absorbing it into `S` first.
pub fn feedback_slh_with_eta(
    m: &SlhModel,
    split: &ChannelSplit,
    sigma: &Permutation,
    tol: &Tolerances,
) -> Result<SlhModel> {
    let b = split_blocks(m, split)?;
    let eta = adjacency_matrix(sigma, split.internal(), m.dim())?;
    let id = LabeledBlockMatrix::identity(split.internal().clone(), m.dim());
    let resolvent = id
        .try_sub(&b.s_ii.try_mul(&eta)?)?
        .block_inverse_named(tol, "I - S_ii η", PivotFailure::IllPosed)?;
    assemble(m, &b, &eta.try_mul(&resolvent)?)
}

/// Möbius map on the Belavkin–Holevo matrix:
/// `V_ab + V_ai (I - V_ii)^{-1} V_ib` over the surviving labels.
pub fn feedback_v(v: &BhMatrix, split: &ChannelSplit, tol: &Tolerances) -> Result<BhMatrix> {
    split.check_covers(&v.channels())?;
    let m = v.matrix();
    let i = split.internal();
    let keep = m.rows().difference(i);
    let id = LabeledBlockMatrix::identity(i.clone(), v.dim());
    let resolvent = id
        .try_sub(&m.sub_block(i, i)?)?
        .block_inverse_named(tol, ILL_POSED_BLOCK, PivotFailure::IllPosed)?;
    let loop_term = m
        .sub_block(&keep, i)?
        .try_mul(&resolvent)?
        .try_mul(&m.sub_block(i, &keep)?)?;
    BhMatrix::from_matrix(m.sub_block(&keep, &keep)?.try_add(&loop_term)?)
}

/// `𝔾 = 𝕍 - 𝕀` shortened by the internal labels.
pub fn feedback_g_schur(m: &SlhModel, split: &ChannelSplit, tol: &Tolerances) -> Result<BhMatrix> {
    split.check_covers(m.channels())?;
    let g = m
        .v_matrix()
        .try_sub(&BhMatrix::identity(m.channels().clone(), m.dim()))?;
    let reduced = g
        .matrix()
        .schur_named(split.internal(), tol, "S_ii - I", PivotFailure::IllPosed)?;
    BhMatrix::from_matrix(reduced)
}

/// Reduced Stratonovich generator: the Schur complement of `E` with respect
/// to the internal channels.
pub fn feedback_strat(e: &StratGenerator, split: &ChannelSplit, tol: &Tolerances) -> Result<StratGenerator> {
    split.check_covers(&e.channels())?;
    let reduced = e
        .matrix()
        .schur_named(split.internal(), tol, "E_ii", PivotFailure::SchurUndefined)?;
    Ok(StratGenerator::from_matrix_unchecked(reduced))
}
