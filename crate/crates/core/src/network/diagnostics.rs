use num_complex::Complex64;
use serde::Serialize;

use crate::block::LabeledBlockMatrix;
use crate::error::{Error, PivotFailure, Result};
use crate::linalg::Tolerances;
use crate::models::{SlhModel, StratGenerator};

use super::ChannelSplit;

/// Which of the three feedback pivots are invertible for a given split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WellPosednessReport {
    /// `E_ii`: the Stratonovich-side Schur pivot.
    pub e_ii_invertible: bool,
    /// `E_ii - (i/2) E_ie (I_e + (i/2) E_ee)^{-1} E_ei`.
    pub script_e_ii_invertible: bool,
    /// `I - S_ii`: well-posedness of the network.
    pub i_minus_s_ii_invertible: bool,
    /// Smallest LU pivot of the second block, relative to the largest entry of `E`.
    pub smallest_pivot: f64,
}

/// Result of testing whether `E_ii` of the Stratonovich form is invertible,
/// directly and through the `S`-only shortcut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepresentabilityReport {
    pub e_ii_invertible: bool,
    /// `None` when `I_e + S_ee` is singular and the shortcut does not apply.
    pub shortcut_invertible: Option<bool>,
    /// Smallest LU pivot of `E_ii`, relative to the largest entry of `E`.
    pub smallest_pivot: f64,
}

/// Blocks carved out of a larger matrix are judged singular relative to the
/// scale of that matrix.
fn invertible(x: &LabeledBlockMatrix, tol: &Tolerances, reference: f64) -> bool {
    x.block_inverse_relative_to(tol, reference).is_ok()
}

/// `E_ii - (i/2) E_ie (I_e + (i/2) E_ee)^{-1} E_ei`.
pub fn script_e_ii(e: &StratGenerator, split: &ChannelSplit, tol: &Tolerances) -> Result<LabeledBlockMatrix> {
    let channels = e.channels();
    split.check_covers(&channels)?;
    let i = split.internal();
    let ext = channels.difference(i);
    let m = e.matrix();
    let e_ii = m.sub_block(i, i)?;
    if ext.is_empty() {
        return Ok(e_ii);
    }
    let half_i = Complex64::new(0.0, 0.5);
    let pivot_inv = LabeledBlockMatrix::identity(ext.clone(), e.dim())
        .try_add(&m.sub_block(&ext, &ext)?.scale(half_i))?
        .block_inverse_named(tol, "I_e + (i/2)E_ee", PivotFailure::Singular)?;
    let coupling = m
        .sub_block(i, &ext)?
        .try_mul(&pivot_inv)?
        .try_mul(&m.sub_block(&ext, i)?)?;
    e_ii.try_sub(&coupling.scale(half_i))
}

/// Reports the invertibility of `E_ii`, of the modified block above, and of
/// `I - S_ii`. The last two must agree; a disagreement is an
/// [`Error::InvariantViolation`].
pub fn wellposedness(e: &StratGenerator, split: &ChannelSplit, tol: &Tolerances) -> Result<WellPosednessReport> {
    let script = script_e_ii(e, split, tol)?;
    let i = split.internal();
    let e_ii = e.matrix().sub_block(i, i)?;
    let m = e.to_slh(tol)?;
    let i_minus_s_ii = LabeledBlockMatrix::identity(i.clone(), e.dim()).try_sub(&m.s().sub_block(i, i)?)?;
    let scale = e.matrix().max_abs();
    let report = WellPosednessReport {
        e_ii_invertible: invertible(&e_ii, tol, scale),
        script_e_ii_invertible: invertible(&script, tol, scale),
        // S here came through the Cayley map of E, so it is only accurate to
        // about |E| times the working precision.
        i_minus_s_ii_invertible: invertible(&i_minus_s_ii, tol, scale.max(1.0)),
        smallest_pivot: script.smallest_pivot_relative_to(scale),
    };
    if report.script_e_ii_invertible != report.i_minus_s_ii_invertible {
        return Err(Error::InvariantViolation(format!(
            "modified internal block invertible = {}, I - S_ii invertible = {}",
            report.script_e_ii_invertible, report.i_minus_s_ii_invertible
        )));
    }
    Ok(report)
}

/// `S_ii - S_ie (I_e + S_ee)^{-1} S_ei`.
pub fn script_s_ii(m: &SlhModel, split: &ChannelSplit, tol: &Tolerances) -> Result<LabeledBlockMatrix> {
    split.check_covers(m.channels())?;
    let i = split.internal();
    let ext = m.channels().difference(i);
    let s = m.s();
    let s_ii = s.sub_block(i, i)?;
    if ext.is_empty() {
        return Ok(s_ii);
    }
    let pivot_inv = LabeledBlockMatrix::identity(ext.clone(), m.dim())
        .try_add(&s.sub_block(&ext, &ext)?)?
        .block_inverse_named(tol, "I_e + S_ee", PivotFailure::Singular)?;
    s_ii.try_sub(&s.sub_block(i, &ext)?.try_mul(&pivot_inv)?.try_mul(&s.sub_block(&ext, i)?)?)
}

/// Tests `E_ii` of the Stratonovich form of `m` directly and through
/// `I - (S_ii - S_ie (I_e + S_ee)^{-1} S_ei)`, asserting they agree.
pub fn representability_report(
    m: &SlhModel,
    split: &ChannelSplit,
    tol: &Tolerances,
) -> Result<RepresentabilityReport> {
    split.check_covers(m.channels())?;
    let e = StratGenerator::from_slh(m, tol)?;
    let i = split.internal();
    let e_ii = e.matrix().sub_block(i, i)?;
    let scale = e.matrix().max_abs();
    let direct = invertible(&e_ii, tol, scale);
    let shortcut = match script_s_ii(m, split, tol) {
        Ok(s) => Some(invertible(
            &LabeledBlockMatrix::identity(i.clone(), m.dim()).try_sub(&s)?,
            tol,
            1.0,
        )),
        Err(Error::Singular { .. }) => None,
        Err(other) => return Err(other),
    };
    if shortcut.is_some_and(|s| s != direct) {
        return Err(Error::InvariantViolation(format!(
            "E_ii invertible = {direct}, shortcut says {}",
            !direct
        )));
    }
    Ok(RepresentabilityReport {
        e_ii_invertible: direct,
        shortcut_invertible: shortcut,
        smallest_pivot: e_ii.smallest_pivot_relative_to(scale),
    })
}

/// True iff the Stratonovich form of `m` has an invertible `E_ii`.
pub fn e_ii_representability(m: &SlhModel, split: &ChannelSplit, tol: &Tolerances) -> Result<bool> {
    representability_report(m, split, tol).map(|r| r.e_ii_invertible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::LabelSet;
    use crate::linalg::Operator;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn beam_splitter(alpha: f64, beta: Complex64, gamma: f64) -> StratGenerator {
        let k = LabelSet::of(&["1", "2"]);
        let e_kk = LabeledBlockMatrix::from_blocks(
            k.clone(),
            k.clone(),
            1,
            vec![
                Operator::scalar(1, c(alpha, 0.0)),
                Operator::scalar(1, beta),
                Operator::scalar(1, beta.conj()),
                Operator::scalar(1, c(gamma, 0.0)),
            ],
        )
        .unwrap();
        StratGenerator::from_blocks(k, Operator::zeros(1), vec![Operator::zeros(1); 2], e_kk, &tol()).unwrap()
    }

    #[test]
    fn beam_splitter_gamma_zero_is_well_posed() {
        let (alpha, beta) = (0.5, c(0.8, 0.6));
        let e = beam_splitter(alpha, beta, 0.0);
        let split = ChannelSplit::for_channels(&e.channels(), &["2"]).unwrap();
        let r = wellposedness(&e, &split, &tol()).unwrap();
        assert!(!r.e_ii_invertible);
        assert!(r.script_e_ii_invertible);
        assert!(r.i_minus_s_ii_invertible);

        let script = script_e_ii(&e, &split, &tol()).unwrap();
        let expect = c(0.0, -0.5) * beta.norm_sqr() / (c(1.0, 0.0) + c(0.0, 0.5) * alpha);
        assert!((script.at("2", "2")[(0, 0)] - expect).norm() < 1e-14);

        let m = e.to_slh(&tol()).unwrap();
        assert!(!e_ii_representability(&m, &split, &tol()).unwrap());
    }

    #[test]
    fn decoupled_zero_internal_is_ill_posed() {
        let e = beam_splitter(0.3, c(0.0, 0.0), 0.0);
        let split = ChannelSplit::for_channels(&e.channels(), &["2"]).unwrap();
        let r = wellposedness(&e, &split, &tol()).unwrap();
        assert!(!r.script_e_ii_invertible);
        assert!(!r.i_minus_s_ii_invertible);
        assert_eq!(r.smallest_pivot, 0.0);
    }

    #[test]
    fn identity_scattering_has_singular_e_ii() {
        let m = SlhModel::trivial(LabelSet::of(&["a", "b"]), 1);
        let split = ChannelSplit::for_channels(m.channels(), &["b"]).unwrap();
        assert!(!e_ii_representability(&m, &split, &tol()).unwrap());
    }

    #[test]
    fn mirror_is_not_representable() {
        let k = LabelSet::of(&["a"]);
        let s = LabeledBlockMatrix::from_blocks(k.clone(), k.clone(), 1, vec![Operator::scalar(1, c(-1.0, 0.0))])
            .unwrap();
        let m = SlhModel::new(k, s, vec![Operator::zeros(1)], Operator::zeros(1), &tol()).unwrap();
        let split = ChannelSplit::for_channels(m.channels(), &["a"]).unwrap();
        assert_eq!(e_ii_representability(&m, &split, &tol()).unwrap_err().kind(), "NotRepresentable");
    }
}
