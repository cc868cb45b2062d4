//! The three descriptions of one open system and the maps between them.
//!
//! * [`SlhModel`]: scattering `S`, coupling column `L`, Hamiltonian `H`.
//! * [`ItoGenerator`]: the Itô coefficient matrix `G` over `0 ∪ k`.
//! * [`StratGenerator`]: the Hermitian-structured Stratonovich matrix `E` over `0 ∪ k`.
//! * [`BhMatrix`]: the `(1 + n + 1)`-block Belavkin–Holevo embedding over
//!   `ō ∪ k ∪ 0̲`, where Itô products become ordinary matrix products.
//!
//! Conversions that need an inverse report the failing block by name.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::block::{Label, LabelSet, LabeledBlockMatrix};
use crate::error::{Error, PivotFailure, Result};
use crate::linalg::{Operator, Tolerances, I, ONE};

/// Row/column label of the "time" index in `G` and `E`.
pub const ZERO_LABEL: &str = "0";
/// Top row/column of a Belavkin–Holevo matrix.
pub const TOP_LABEL: &str = "ō";
/// Bottom row/column of a Belavkin–Holevo matrix.
pub const BOTTOM_LABEL: &str = "0̲";

const HALF_I: Complex64 = Complex64::new(0.0, 0.5);

/// Rejects channel names that collide with the structural labels.
pub fn check_channel_labels(channels: &LabelSet) -> Result<()> {
    for l in channels {
        let s = l.as_str();
        if s == ZERO_LABEL || s == TOP_LABEL || s == BOTTOM_LABEL || s.ends_with('\'') {
            return Err(Error::LabelCollision(format!("{s} is reserved")));
        }
    }
    Ok(())
}

fn zero_set() -> LabelSet {
    LabelSet::of(&[ZERO_LABEL])
}

/// `0 ∪ k`.
pub(crate) fn generator_labels(channels: &LabelSet) -> LabelSet {
    zero_set().concat(channels).expect("channel labels were checked")
}

/// `ō ∪ k ∪ 0̲`.
pub(crate) fn bh_labels(channels: &LabelSet) -> LabelSet {
    LabelSet::of(&[TOP_LABEL])
        .concat(channels)
        .and_then(|s| s.concat(&LabelSet::of(&[BOTTOM_LABEL])))
        .expect("channel labels were checked")
}

/// Lays out `[[x00, x0k], [xk0, xkk]]` over `0 ∪ k`.
fn assemble_generator(
    channels: &LabelSet,
    x00: &Operator,
    x0k: &LabeledBlockMatrix,
    xk0: &LabeledBlockMatrix,
    xkk: &LabeledBlockMatrix,
) -> LabeledBlockMatrix {
    let labels = generator_labels(channels);
    LabeledBlockMatrix::from_fn(labels.clone(), labels, x00.dim(), |r, c| {
        match (r.as_str() == ZERO_LABEL, c.as_str() == ZERO_LABEL) {
            (true, true) => x00.clone(),
            (true, false) => x0k.entry(&Label::from(ZERO_LABEL), c).unwrap().clone(),
            (false, true) => xk0.entry(r, &Label::from(ZERO_LABEL)).unwrap().clone(),
            (false, false) => xkk.entry(r, c).unwrap().clone(),
        }
    })
}

/// Channel labels of a square matrix over `0 ∪ k`, in order.
fn channels_of_generator(x: &LabeledBlockMatrix) -> Result<LabelSet> {
    let zero = Label::from(ZERO_LABEL);
    if !x.is_square_labeled() || x.rows().labels().first() != Some(&zero) {
        return Err(Error::InvalidValue(
            "expected a square matrix over 0 ∪ k with 0 first".into(),
        ));
    }
    let channels = x.rows().difference(&zero_set());
    check_channel_labels(&channels)?;
    Ok(channels)
}

/// Hudson–Parthasarathy parameters `(S, L, H)` over a channel set `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlhModel {
    channels: LabelSet,
    s: LabeledBlockMatrix,
    l: LabeledBlockMatrix,
    h: Operator,
}

impl SlhModel {
    /// Validated constructor: `S` unitary and `H` self-adjoint within `eq_tol`.
    pub fn new(
        channels: LabelSet,
        s: LabeledBlockMatrix,
        l: Vec<Operator>,
        h: Operator,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_channel_labels(&channels)?;
        let d = h.dim();
        if d == 0 {
            return Err(Error::InvalidValue("Hilbert dimension must be >= 1".into()));
        }
        if s.dim() != d {
            return Err(Error::DimMismatch { expected: d, found: s.dim() });
        }
        if l.len() != channels.len() {
            return Err(Error::SizeMismatch {
                expected: channels.len(),
                found: l.len(),
            });
        }
        if let Some(bad) = l.iter().find(|op| op.dim() != d) {
            return Err(Error::DimMismatch { expected: d, found: bad.dim() });
        }
        let s = s.sub_block(&channels, &channels)?;
        let l = LabeledBlockMatrix::from_blocks(channels.clone(), zero_set(), d, l)?;
        let m = Self { channels, s, l, h };
        m.validate(tol)?;
        Ok(m)
    }

    pub(crate) fn from_parts(
        channels: LabelSet,
        s: LabeledBlockMatrix,
        l: LabeledBlockMatrix,
        h: Operator,
    ) -> Self {
        debug_assert_eq!(s.rows(), &channels);
        debug_assert_eq!(l.rows(), &channels);
        Self { channels, s, l, h }
    }

    /// `(I, 0, 0)`.
    pub fn trivial(channels: LabelSet, dim: usize) -> Self {
        let s = LabeledBlockMatrix::identity(channels.clone(), dim);
        let l = LabeledBlockMatrix::zeros(channels.clone(), zero_set(), dim);
        Self::from_parts(channels, s, l, Operator::zeros(dim))
    }

    /// A system with no field channels, just a Hamiltonian.
    pub fn closed(h: Operator) -> Self {
        Self::trivial(LabelSet::empty(), h.dim()).with_hamiltonian(h)
    }

    fn with_hamiltonian(mut self, h: Operator) -> Self {
        self.h = h;
        self
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        if !self.channels.is_empty() && !self.s.flatten()?.is_unitary(tol) {
            return Err(Error::InvariantViolation("S is not unitary".into()));
        }
        if !self.h.is_selfadjoint(tol) {
            return Err(Error::InvariantViolation("H is not self-adjoint".into()));
        }
        Ok(())
    }

    pub fn channels(&self) -> &LabelSet {
        &self.channels
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn s(&self) -> &LabeledBlockMatrix {
        &self.s
    }

    /// Coupling operators as a column over `k x {0}`.
    pub fn l_column(&self) -> &LabeledBlockMatrix {
        &self.l
    }

    pub fn l(&self, channel: &Label) -> Result<&Operator> {
        self.l.entry(channel, &Label::from(ZERO_LABEL))
    }

    pub fn l_ops(&self) -> Vec<Operator> {
        self.channels.iter().map(|c| self.l(c).unwrap().clone()).collect()
    }

    pub fn h(&self) -> &Operator {
        &self.h
    }

    /// Same model under new channel names, matched by position.
    pub fn relabeled(&self, channels: LabelSet) -> Result<Self> {
        check_channel_labels(&channels)?;
        Ok(Self {
            s: self.s.relabeled(channels.clone(), channels.clone())?,
            l: self.l.relabeled(channels.clone(), zero_set())?,
            channels,
            h: self.h.clone(),
        })
    }

    /// Largest element-wise difference over `S`, `L` and `H`.
    pub fn max_abs_diff(&self, other: &SlhModel) -> f64 {
        if self.channels != other.channels {
            return f64::INFINITY;
        }
        self.s
            .max_abs_diff(&other.s)
            .max(self.l.max_abs_diff(&other.l))
            .max(self.h.max_abs_diff(&other.h))
    }

    /// `G` with blocks `-(L†L/2 + iH)`, `-L†S`, `L`, `S - I`.
    pub fn ito_generator(&self) -> ItoGenerator {
        let d = self.dim();
        let l_adj = self.l.adjoint();
        let l_dag_l = l_adj.try_mul(&self.l).expect("column shapes agree");
        let g00 = -&(&l_dag_l.at(ZERO_LABEL, ZERO_LABEL).scale(Complex64::new(0.5, 0.0))
            + &self.h.scale(I));
        let g0k = l_adj.try_mul(&self.s).expect("row shapes agree").scale(-ONE);
        let gkk = self
            .s
            .try_sub(&LabeledBlockMatrix::identity(self.channels.clone(), d))
            .expect("same labels");
        ItoGenerator {
            g: assemble_generator(&self.channels, &g00, &g0k, &self.l, &gkk),
        }
    }

    /// `V = 𝕀 + 𝓗(G)`.
    pub fn v_matrix(&self) -> BhMatrix {
        let g = BhMatrix::embed(&self.ito_generator().g).expect("generator is well-labeled");
        BhMatrix::identity(self.channels.clone(), self.dim())
            .try_add(&g)
            .expect("same labels")
    }

    /// Reads `(S, L, H)` back out of a `V` matrix, checking its shape.
    pub fn from_v(v: &BhMatrix, tol: &Tolerances) -> Result<Self> {
        let channels = v.channels().clone();
        let d = v.dim();
        let m = &v.m;
        let zero = Operator::zeros(d);
        let id = Operator::identity(d);
        let eq = tol.eq_tol;
        let bad = |what: &str| Err(Error::MalformedV(what.to_string()));

        if !m.at(TOP_LABEL, TOP_LABEL).approx_eq(&id, eq) || !m.at(BOTTOM_LABEL, BOTTOM_LABEL).approx_eq(&id, eq)
        {
            return bad("corner blocks must be the identity");
        }
        if !m.at(BOTTOM_LABEL, TOP_LABEL).approx_eq(&zero, eq) {
            return bad("bottom-left block must vanish");
        }
        for c in &channels {
            let c = c.as_str();
            if !m.at(c, TOP_LABEL).approx_eq(&zero, eq) || !m.at(BOTTOM_LABEL, c).approx_eq(&zero, eq) {
                return bad("first block column and last block row must vanish off the diagonal");
            }
        }

        let s = m.sub_block(&channels, &channels)?;
        let l = m
            .sub_block(&channels, &LabelSet::of(&[BOTTOM_LABEL]))?
            .relabeled(channels.clone(), zero_set())?;
        let k = m.at(TOP_LABEL, BOTTOM_LABEL);
        let h = (k - &k.adjoint()).scale(HALF_I);
        let model = Self::from_parts(channels.clone(), s, l, h);

        if !channels.is_empty() && !model.s.flatten()?.is_unitary(tol) {
            return bad("scattering block is not unitary");
        }
        let expected_row = model.l.adjoint().try_mul(&model.s)?.scale(-ONE);
        let row = m
            .sub_block(&LabelSet::of(&[TOP_LABEL]), &channels)?
            .relabeled(zero_set(), channels.clone())?;
        if !row.approx_eq(&expected_row, eq) {
            return bad("top row is not -L†S");
        }
        let l_dag_l = model.l.adjoint().try_mul(&model.l)?;
        let herm_k = (k + &k.adjoint()).scale(Complex64::new(0.5, 0.0));
        let expect_herm = l_dag_l.at(ZERO_LABEL, ZERO_LABEL).scale(Complex64::new(-0.5, 0.0));
        if !herm_k.approx_eq(&expect_herm, eq) {
            return bad("Hermitian part of the corner is not -L†L/2");
        }
        Ok(model)
    }

    /// Cayley map from a Stratonovich generator:
    /// `S = (I - iE/2)(I + iE/2)^{-1}`, `L = -i(I + iE/2)^{-1} E_k0`,
    /// `H = E_00 + Im{E_0k (I + iE/2)^{-1} E_k0} / 2`.
    pub fn from_strat(e: &StratGenerator, tol: &Tolerances) -> Result<Self> {
        let channels = e.channels();
        let d = e.dim();
        if channels.is_empty() {
            return Ok(Self::closed(e.e00().clone()));
        }
        let e_kk = e.e_kk();
        let e_k0 = e.e_k0();
        let e_0k = e.e_0k();
        let id = LabeledBlockMatrix::identity(channels.clone(), d);
        let half_e = e_kk.scale(HALF_I);
        let denom_inv = id
            .try_add(&half_e)?
            .block_inverse_named(tol, "I + (i/2)E_kk", PivotFailure::Singular)?;
        let s = id.try_sub(&half_e)?.try_mul(&denom_inv)?;
        let l = denom_inv.try_mul(&e_k0)?.scale(-I);
        let quad = e_0k.try_mul(&denom_inv)?.try_mul(&e_k0)?;
        let h = e.e00() + &quad.at(ZERO_LABEL, ZERO_LABEL).imag_part().scale(Complex64::new(0.5, 0.0));
        Ok(Self::from_parts(channels, s, l, h))
    }

    pub fn is_strat_representable(&self, tol: &Tolerances) -> bool {
        self.channels.is_empty()
            || LabeledBlockMatrix::identity(self.channels.clone(), self.dim())
                .try_add(&self.s)
                .map(|m| m.block_inverse_relative_to(tol, 1.0).is_ok())
                .unwrap_or(false)
    }
}

/// The Itô generator matrix over `0 ∪ k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ItoGenerator {
    g: LabeledBlockMatrix,
}

impl ItoGenerator {
    pub fn matrix(&self) -> &LabeledBlockMatrix {
        &self.g
    }

    pub fn into_matrix(self) -> LabeledBlockMatrix {
        self.g
    }
}

/// Stratonovich generator `E` over `0 ∪ k` with `E_αβ† = E_βα`.
#[derive(Debug, Clone, PartialEq)]
pub struct StratGenerator {
    e: LabeledBlockMatrix,
}

impl StratGenerator {
    /// Validated constructor: square over `0 ∪ k`, Hermitian structure within `eq_tol`.
    pub fn new(e: LabeledBlockMatrix, tol: &Tolerances) -> Result<Self> {
        channels_of_generator(&e)?;
        if !e.approx_eq(&e.adjoint(), tol.eq_tol) {
            return Err(Error::InvariantViolation(
                "Stratonovich generator must satisfy E_ab† = E_ba".into(),
            ));
        }
        let labels = e.rows().clone();
        Ok(Self {
            e: e.sub_block(&labels, &labels)?,
        })
    }

    pub(crate) fn from_matrix_unchecked(e: LabeledBlockMatrix) -> Self {
        Self { e }
    }

    /// Assembles `E` from `E_00`, the column `E_k0` and `E_kk`; `E_0k` is the adjoint of `E_k0`.
    pub fn from_blocks(
        channels: LabelSet,
        e00: Operator,
        e_k0: Vec<Operator>,
        e_kk: LabeledBlockMatrix,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_channel_labels(&channels)?;
        let d = e00.dim();
        let col = LabeledBlockMatrix::from_blocks(channels.clone(), zero_set(), d, e_k0)?;
        let e_kk = e_kk.sub_block(&channels, &channels)?;
        let m = assemble_generator(&channels, &e00, &col.adjoint(), &col, &e_kk);
        Self::new(m, tol)
    }

    /// The zero generator, i.e. the trivial system `(I, 0, 0)`.
    pub fn zero(channels: LabelSet, dim: usize) -> Self {
        let labels = generator_labels(&channels);
        Self {
            e: LabeledBlockMatrix::zeros(labels.clone(), labels, dim),
        }
    }

    pub fn matrix(&self) -> &LabeledBlockMatrix {
        &self.e
    }

    pub fn dim(&self) -> usize {
        self.e.dim()
    }

    pub fn channels(&self) -> LabelSet {
        self.e.rows().difference(&zero_set())
    }

    pub fn e00(&self) -> &Operator {
        self.e.at(ZERO_LABEL, ZERO_LABEL)
    }

    pub fn e_kk(&self) -> LabeledBlockMatrix {
        let k = self.channels();
        self.e.sub_block(&k, &k).unwrap()
    }

    pub fn e_k0(&self) -> LabeledBlockMatrix {
        self.e.sub_block(&self.channels(), &zero_set()).unwrap()
    }

    pub fn e_0k(&self) -> LabeledBlockMatrix {
        self.e.sub_block(&zero_set(), &self.channels()).unwrap()
    }

    pub fn max_abs_diff(&self, other: &StratGenerator) -> f64 {
        if self.e.rows() != other.e.rows() {
            return f64::INFINITY;
        }
        self.e.max_abs_diff(&other.e)
    }

    pub fn relabeled(&self, channels: LabelSet) -> Result<Self> {
        check_channel_labels(&channels)?;
        let labels = generator_labels(&channels);
        Ok(Self {
            e: self.e.relabeled(labels.clone(), labels)?,
        })
    }

    /// Inverse Cayley map, defined when `I + S` is invertible:
    /// `E_kk = (2/i)(I + S)^{-1}(I - S)`, `E_k0 = i(I + iE_kk/2) L`,
    /// `E_00 = H - Im{E_0k (I + iE_kk/2)^{-1} E_k0} / 2`.
    pub fn from_slh(m: &SlhModel, tol: &Tolerances) -> Result<Self> {
        let channels = m.channels().clone();
        let d = m.dim();
        if channels.is_empty() {
            let labels = zero_set();
            let mut e = LabeledBlockMatrix::zeros(labels.clone(), labels, d);
            e.set(ZERO_LABEL, ZERO_LABEL, m.h().clone());
            return Ok(Self { e });
        }
        let id = LabeledBlockMatrix::identity(channels.clone(), d);
        let plus_inv = id
            .try_add(m.s())?
            .block_inverse_named(tol, "I + S", PivotFailure::NotRepresentable)?;
        let e_kk = plus_inv.try_mul(&id.try_sub(m.s())?)?.scale(Complex64::new(0.0, -2.0));
        let denom = id.try_add(&e_kk.scale(HALF_I))?;
        let e_k0 = denom.try_mul(m.l_column())?.scale(I);
        let e_0k = e_k0.adjoint();
        let denom_inv = denom.block_inverse_named(tol, "I + (i/2)E_kk", PivotFailure::NotRepresentable)?;
        let quad = e_0k.try_mul(&denom_inv)?.try_mul(&e_k0)?;
        let e00 = m.h() - &quad.at(ZERO_LABEL, ZERO_LABEL).imag_part().scale(Complex64::new(0.5, 0.0));
        Ok(Self {
            e: assemble_generator(&channels, &e00, &e_0k, &e_k0, &e_kk),
        })
    }

    pub fn to_slh(&self, tol: &Tolerances) -> Result<SlhModel> {
        SlhModel::from_strat(self, tol)
    }

    /// `𝔼 = 𝓗(E)`.
    pub fn bh(&self) -> BhMatrix {
        BhMatrix::embed(&self.e).expect("generator is well-labeled")
    }

    /// `𝕍 = (𝕀 - (i/2)𝔼)(𝕀 + (i/2)𝔼)^{-1}`.
    pub fn v_matrix(&self, tol: &Tolerances) -> Result<BhMatrix> {
        let ee = self.bh();
        let id = BhMatrix::identity(self.channels(), self.dim());
        let half = ee.scale(HALF_I);
        let denom_inv = id
            .try_add(&half)?
            .inverse(tol)
            .map_err(|e| e.retag("𝕀 + (i/2)𝔼", PivotFailure::Singular))?;
        id.try_sub(&half)?.try_mul(&denom_inv)
    }

    /// `-Schur` over the primed copy of `[[2𝕀, √2𝕀], [√2𝕀, 𝕀 + (i/2)𝔼]]`,
    /// which reproduces `𝔾 = 𝕍 - 𝕀`.
    pub fn ito_bh_via_doubling(&self, tol: &Tolerances) -> Result<BhMatrix> {
        let channels = self.channels();
        let d = self.dim();
        let base = bh_labels(&channels);
        let primed = base.primed();
        let all = base.concat(&primed)?;
        let ee = self.bh();
        let mut doubled = LabeledBlockMatrix::zeros(all.clone(), all, d);
        let two = Operator::scalar(d, Complex64::new(2.0, 0.0));
        let root2 = Operator::scalar(d, Complex64::new(SQRT_2, 0.0));
        for (r, rp) in base.iter().zip(primed.iter()) {
            doubled.set_entry(r, r, two.clone())?;
            doubled.set_entry(r, rp, root2.clone())?;
            doubled.set_entry(rp, r, root2.clone())?;
            for (c, cp) in base.iter().zip(primed.iter()) {
                let mut entry = ee.m.entry(r, c)?.scale(HALF_I);
                if r == c {
                    entry += &Operator::identity(d);
                }
                doubled.set_entry(rp, cp, entry)?;
            }
        }
        let shortened = doubled.schur_named(&primed, tol, "doubled pivot 𝕀 + (i/2)𝔼", PivotFailure::Singular)?;
        Ok(BhMatrix {
            m: shortened.scale(-ONE),
        })
    }
}

/// A block matrix over `ō ∪ k ∪ 0̲`.
#[derive(Debug, Clone, PartialEq)]
pub struct BhMatrix {
    m: LabeledBlockMatrix,
}

impl BhMatrix {
    /// Wraps a matrix already laid out over `ō ∪ k ∪ 0̲`.
    pub fn from_matrix(m: LabeledBlockMatrix) -> Result<Self> {
        let top = Label::from(TOP_LABEL);
        let bottom = Label::from(BOTTOM_LABEL);
        let rows = m.rows().labels();
        if m.rows() != m.cols() || rows.first() != Some(&top) || rows.last() != Some(&bottom) || rows.len() < 2 {
            return Err(Error::MalformedV("labels must be ō ∪ k ∪ 0̲ on both axes".into()));
        }
        let channels = m.rows().difference(&LabelSet::of(&[TOP_LABEL, BOTTOM_LABEL]));
        check_channel_labels(&channels)?;
        Ok(Self { m })
    }

    pub fn identity(channels: LabelSet, dim: usize) -> Self {
        Self {
            m: LabeledBlockMatrix::identity(bh_labels(&channels), dim),
        }
    }

    pub fn zeros(channels: LabelSet, dim: usize) -> Self {
        let labels = bh_labels(&channels);
        Self {
            m: LabeledBlockMatrix::zeros(labels.clone(), labels, dim),
        }
    }

    /// `𝕁`: swaps `ō` and `0̲`, identity on `k`.
    pub fn swap_j(channels: LabelSet, dim: usize) -> Self {
        let mut j = Self::zeros(channels.clone(), dim);
        j.m.set(TOP_LABEL, BOTTOM_LABEL, Operator::identity(dim));
        j.m.set(BOTTOM_LABEL, TOP_LABEL, Operator::identity(dim));
        for c in &channels {
            j.m.set(c.as_str(), c.as_str(), Operator::identity(dim));
        }
        j
    }

    /// `𝓗(X) = [[0, x_0k, x_00], [0, x_kk, x_k0], [0, 0, 0]]`.
    pub fn embed(x: &LabeledBlockMatrix) -> Result<Self> {
        let channels = channels_of_generator(x)?;
        let d = x.dim();
        let mut out = Self::zeros(channels.clone(), d);
        out.m.set(TOP_LABEL, BOTTOM_LABEL, x.at(ZERO_LABEL, ZERO_LABEL).clone());
        for r in &channels {
            out.m.set(TOP_LABEL, r.as_str(), x.at(ZERO_LABEL, r.as_str()).clone());
            out.m.set(r.as_str(), BOTTOM_LABEL, x.at(r.as_str(), ZERO_LABEL).clone());
            for c in &channels {
                out.m.set(r.as_str(), c.as_str(), x.at(r.as_str(), c.as_str()).clone());
            }
        }
        Ok(out)
    }

    /// Reads an Itô-type matrix over `0 ∪ k` back out of the embedding
    /// (ignores the first block column and last block row).
    pub fn extract(&self) -> LabeledBlockMatrix {
        let channels = self.channels().clone();
        let m = &self.m;
        let labels = generator_labels(&channels);
        LabeledBlockMatrix::from_fn(labels.clone(), labels, self.dim(), |r, c| {
            let row = if r.as_str() == ZERO_LABEL { TOP_LABEL } else { r.as_str() };
            let col = if c.as_str() == ZERO_LABEL { BOTTOM_LABEL } else { c.as_str() };
            m.at(row, col).clone()
        })
    }

    /// Largest entry in the first block column or last block row.
    pub fn off_pattern_norm(&self) -> f64 {
        let labels = self.m.rows().clone();
        let mut worst = 0.0_f64;
        for l in &labels {
            worst = worst.max(self.m.at(l.as_str(), TOP_LABEL).max_abs());
            worst = worst.max(self.m.at(BOTTOM_LABEL, l.as_str()).max_abs());
        }
        worst
    }

    pub fn matrix(&self) -> &LabeledBlockMatrix {
        &self.m
    }

    pub fn channels(&self) -> LabelSet {
        self.m.rows().difference(&LabelSet::of(&[TOP_LABEL, BOTTOM_LABEL]))
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// `X⋆ = 𝕁 X† 𝕁`.
    pub fn star(&self) -> Self {
        let j = Self::swap_j(self.channels(), self.dim());
        let adj = Self { m: self.m.adjoint() };
        j.try_mul(&adj).and_then(|x| x.try_mul(&j)).expect("same labels")
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            m: self.m.try_mul(&other.m)?,
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            m: self.m.try_add(&other.m)?,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            m: self.m.try_sub(&other.m)?,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            m: self.m.scale(factor),
        }
    }

    /// Inverse judged against unit scale; every matrix inverted in the
    /// calculus is the identity plus a generator term.
    pub fn inverse(&self, tol: &Tolerances) -> Result<Self> {
        Ok(Self {
            m: self.m.block_inverse_relative_to(tol, 1.0)?,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m.max_abs_diff(&other.m)
    }

    /// `max(‖VV⋆ − 𝕀‖, ‖V⋆V − 𝕀‖)`, element-wise.
    pub fn star_unitarity_defect(&self) -> f64 {
        let id = Self::identity(self.channels(), self.dim());
        let star = self.star();
        let a = self.try_mul(&star).expect("same labels").max_abs_diff(&id);
        let b = star.try_mul(self).expect("same labels").max_abs_diff(&id);
        a.max(b)
    }

    pub fn is_star_unitary(&self, tol: &Tolerances) -> bool {
        self.star_unitarity_defect() <= tol.eq_tol
    }

    pub fn relabeled(&self, channels: LabelSet) -> Result<Self> {
        check_channel_labels(&channels)?;
        let labels = bh_labels(&channels);
        Ok(Self {
            m: self.m.relabeled(labels.clone(), labels)?,
        })
    }
}

/// Itô correction `X δ̂ Y`: block `(α, β)` is `Σ_k x_αk y_kβ`.
pub fn ito_delta_product(x: &LabeledBlockMatrix, y: &LabeledBlockMatrix) -> Result<LabeledBlockMatrix> {
    let channels = channels_of_generator(x)?;
    let other = channels_of_generator(y)?;
    if !channels.same_members(&other) {
        return Err(Error::LabelCollision("operands have different channel sets".into()));
    }
    let labels = x.rows().clone();
    let x_ak = x.sub_block(&labels, &channels)?;
    let y_kb = y.sub_block(&channels, y.cols())?;
    x_ak.try_mul(&y_kb)?.sub_block(&labels, &labels)
}

/// `δ̂ = diag(0, I_k)` over `0 ∪ k`.
pub fn delta_hat(channels: &LabelSet, dim: usize) -> LabeledBlockMatrix {
    let labels = generator_labels(channels);
    LabeledBlockMatrix::from_fn(labels.clone(), labels, dim, |r, c| {
        if r == c && r.as_str() != ZERO_LABEL {
            Operator::identity(dim)
        } else {
            Operator::zeros(dim)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(z: Complex64) -> Operator {
        Operator::scalar(1, z)
    }

    fn one_channel(s: Complex64, l: Complex64, h: f64) -> SlhModel {
        let k = LabelSet::of(&["a"]);
        let s = LabeledBlockMatrix::from_blocks(k.clone(), k.clone(), 1, vec![scalar(s)]).unwrap();
        SlhModel::new(k, s, vec![scalar(l)], scalar(c(h, 0.0)), &tol()).unwrap()
    }

    fn strat_1x1(e00: f64, ek0: Complex64, ekk: f64) -> StratGenerator {
        let k = LabelSet::of(&["a"]);
        let e_kk = LabeledBlockMatrix::from_blocks(k.clone(), k.clone(), 1, vec![scalar(c(ekk, 0.0))]).unwrap();
        StratGenerator::from_blocks(k, scalar(c(e00, 0.0)), vec![scalar(ek0)], e_kk, &tol()).unwrap()
    }

    #[test]
    fn ito_generator_pure_hamiltonian() {
        let g = one_channel(ONE, c(0.0, 0.0), 0.7).ito_generator();
        let g = g.matrix();
        assert!(g.at("0", "0").approx_eq(&scalar(c(0.0, -0.7)), 1e-15));
        assert!(g.at("0", "a").approx_eq(&scalar(c(0.0, 0.0)), 1e-15));
        assert!(g.at("a", "a").approx_eq(&scalar(c(0.0, 0.0)), 1e-15));
    }

    #[test]
    fn ito_generator_pure_coupling() {
        let l = c(0.3, -1.2);
        let m = one_channel(ONE, l, 0.0);
        let g = m.ito_generator();
        let g = g.matrix();
        assert!(g.at("0", "0").approx_eq(&scalar(c(-0.5 * l.norm_sqr(), 0.0)), 1e-15));
        assert!(g.at("0", "a").approx_eq(&scalar(-l.conj()), 1e-15));
        assert!(g.at("a", "0").approx_eq(&scalar(l), 1e-15));
        assert!(m.v_matrix().is_star_unitary(&tol()));
    }

    #[test]
    fn ito_generator_mirror() {
        let g = one_channel(-ONE, c(0.0, 0.0), 0.0).ito_generator();
        assert!(g.matrix().at("a", "a").approx_eq(&scalar(c(-2.0, 0.0)), 1e-15));
        assert!(g.matrix().at("0", "0").approx_eq(&scalar(c(0.0, 0.0)), 1e-15));
    }

    #[test]
    fn embed_layout() {
        let k = LabelSet::of(&["a"]);
        let labels = generator_labels(&k);
        let x = LabeledBlockMatrix::scalar_real(labels.clone(), labels, &[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let bh = BhMatrix::embed(&x).unwrap();
        let flat = bh.matrix().flatten().unwrap();
        let expect = [[0.0, 2.0, 1.0], [0.0, 4.0, 3.0], [0.0, 0.0, 0.0]];
        for r in 0..3 {
            for col in 0..3 {
                assert_eq!(flat[(r, col)].re, expect[r][col]);
            }
        }
        assert_eq!(bh.extract(), x);
    }

    #[test]
    fn delta_hat_is_idempotent() {
        let k = LabelSet::of(&["a", "b"]);
        let dh = delta_hat(&k, 2);
        assert_eq!(ito_delta_product(&dh, &dh).unwrap(), dh);
    }

    #[test]
    fn delta_product_with_identity_zeroes_first_column() {
        let k = LabelSet::of(&["a"]);
        let labels = generator_labels(&k);
        let x = LabeledBlockMatrix::scalar_real(labels.clone(), labels.clone(), &[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let id = LabeledBlockMatrix::identity(labels.clone(), 1);
        let p = ito_delta_product(&x, &id).unwrap();
        let expect = LabeledBlockMatrix::scalar_real(labels.clone(), labels, &[&[0.0, 2.0], &[0.0, 4.0]]).unwrap();
        assert_eq!(p, expect);
    }

    #[test]
    fn star_of_identity() {
        let id = BhMatrix::identity(LabelSet::of(&["a", "b"]), 2);
        assert_eq!(id.star(), id);
    }

    #[test]
    fn v_of_trivial_is_identity() {
        let m = SlhModel::trivial(LabelSet::of(&["a"]), 2);
        assert_eq!(m.v_matrix(), BhMatrix::identity(LabelSet::of(&["a"]), 2));
        assert_eq!(SlhModel::from_v(&m.v_matrix(), &tol()).unwrap(), m);
    }

    #[test]
    fn v_of_pure_coupling() {
        let l = c(0.4, 0.9);
        let v = one_channel(ONE, l, 0.0).v_matrix();
        let flat = v.matrix().flatten().unwrap();
        let expect = [
            [ONE, -l.conj(), c(-0.5 * l.norm_sqr(), 0.0)],
            [c(0.0, 0.0), ONE, l],
            [c(0.0, 0.0), c(0.0, 0.0), ONE],
        ];
        for r in 0..3 {
            for col in 0..3 {
                assert!((flat[(r, col)] - expect[r][col]).norm() < 1e-15);
            }
        }
        assert!(v.is_star_unitary(&tol()));
    }

    #[test]
    fn from_v_rejects_inconsistent_top_row() {
        let mut v = one_channel(ONE, c(0.4, 0.9), 0.2).v_matrix();
        let perturbed = v.m.at(TOP_LABEL, "a") + &scalar(c(1e-3, 0.0));
        v.m.set(TOP_LABEL, "a", perturbed);
        assert!(matches!(SlhModel::from_v(&v, &tol()), Err(Error::MalformedV(_))));
    }

    #[test]
    fn slh_from_strat_examples() {
        let zero = StratGenerator::zero(LabelSet::of(&["a"]), 2);
        let m = zero.to_slh(&tol()).unwrap();
        assert!(m.max_abs_diff(&SlhModel::trivial(LabelSet::of(&["a"]), 2)) < 1e-15);

        // E_kk = 2: S = (1 - i)/(1 + i) = -i.
        let m = strat_1x1(0.0, c(0.0, 0.0), 2.0).to_slh(&tol()).unwrap();
        assert!(m.s().at("a", "a").approx_eq(&scalar(c(0.0, -1.0)), 1e-15));
        assert!(m.l_ops()[0].approx_eq(&scalar(c(0.0, 0.0)), 1e-15));
        assert!(m.h().approx_eq(&scalar(c(0.0, 0.0)), 1e-15));

        // E_k0 = E_0k = 1, E_kk = 0: (1, -i, 0).
        let m = strat_1x1(0.0, ONE, 0.0).to_slh(&tol()).unwrap();
        assert!(m.s().at("a", "a").approx_eq(&scalar(ONE), 1e-15));
        assert!(m.l_ops()[0].approx_eq(&scalar(c(0.0, -1.0)), 1e-15));
        assert!(m.h().approx_eq(&scalar(c(0.0, 0.0)), 1e-15));
    }

    #[test]
    fn strat_from_slh_examples() {
        let k = LabelSet::of(&["a"]);
        let e = StratGenerator::from_slh(&SlhModel::trivial(k.clone(), 1), &tol()).unwrap();
        assert!(e.max_abs_diff(&StratGenerator::zero(k, 1)) < 1e-15);

        let e = StratGenerator::from_slh(&one_channel(ONE, c(0.0, -1.0), 0.0), &tol()).unwrap();
        assert!(e.max_abs_diff(&strat_1x1(0.0, ONE, 0.0)) < 1e-15);

        let err = StratGenerator::from_slh(&one_channel(-ONE, c(0.0, 0.0), 0.0), &tol()).unwrap_err();
        assert_eq!(err.kind(), "NotRepresentable");
        assert_eq!(err.block(), Some("I + S"));
    }

    #[test]
    fn v_from_strat_scalar() {
        let v = strat_1x1(0.0, c(0.0, 0.0), 2.0).v_matrix(&tol()).unwrap();
        assert!(v.matrix().at("a", "a").approx_eq(&scalar(c(0.0, -1.0)), 1e-15));
        let v0 = StratGenerator::zero(LabelSet::of(&["a"]), 1).v_matrix(&tol()).unwrap();
        assert_eq!(v0, BhMatrix::identity(LabelSet::of(&["a"]), 1));
    }

    #[test]
    fn reserved_channel_names_rejected() {
        for bad in ["0", "ō", "0̲", "x'"] {
            assert!(check_channel_labels(&LabelSet::of(&[bad])).is_err());
        }
    }

    #[test]
    fn strat_rejects_non_hermitian() {
        let labels = generator_labels(&LabelSet::of(&["a"]));
        let e = LabeledBlockMatrix::scalar_real(labels.clone(), labels, &[&[0.0, 1.0], &[2.0, 0.0]]).unwrap();
        assert!(matches!(StratGenerator::new(e, &tol()), Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn closed_model_round_trips() {
        let h = Operator::from_real(&[&[1.0, 0.5], &[0.5, -1.0]]).unwrap();
        let m = SlhModel::closed(h.clone());
        let e = StratGenerator::from_slh(&m, &tol()).unwrap();
        assert_eq!(e.e00(), &h);
        assert_eq!(e.to_slh(&tol()).unwrap(), m);
    }
}
