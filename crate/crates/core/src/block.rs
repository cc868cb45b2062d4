//! Block operator matrices indexed by ordered label sets.
//!
//! A [`LabeledBlockMatrix`] with rows `r` and columns `c` acts on
//! `h ⊗ C^c → h ⊗ C^r`; each entry is a `d x d` [`Operator`]. Entries are looked
//! up by label, never by position, so reordering a label set reorders the
//! matrix consistently.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, PivotFailure, Result};
use crate::linalg::{Operator, Tolerances};

/// A non-empty channel or index name, e.g. `"0"`, `"ō"` or `"bs.1"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidValue("labels must be non-empty".into()));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The copy of this label used when doubling an index set.
    pub fn primed(&self) -> Label {
        Label(format!("{}'", self.0))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    /// Panics on the empty string; use [`Label::new`] for untrusted input.
    fn from(s: &str) -> Self {
        Label::new(s).expect("label literal must be non-empty")
    }
}

/// An ordered set of labels without duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelSet {
    labels: Vec<Label>,
}

impl LabelSet {
    pub fn new(labels: impl IntoIterator<Item = Label>) -> Result<Self> {
        let mut out: Vec<Label> = Vec::new();
        for l in labels {
            if out.contains(&l) {
                return Err(Error::LabelCollision(l.0));
            }
            out.push(l);
        }
        Ok(Self { labels: out })
    }

    /// Builds a set from string literals. Panics on duplicates or empty names.
    pub fn of(names: &[&str]) -> Self {
        Self::new(names.iter().map(|n| Label::from(*n))).expect("literal label set must be valid")
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Label> {
        self.labels.iter()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn position(&self, label: &Label) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.position(label).is_some()
    }

    pub fn is_subset(&self, other: &LabelSet) -> bool {
        self.labels.iter().all(|l| other.contains(l))
    }

    pub fn same_members(&self, other: &LabelSet) -> bool {
        self.len() == other.len() && self.is_subset(other)
    }

    pub fn is_disjoint(&self, other: &LabelSet) -> bool {
        !self.labels.iter().any(|l| other.contains(l))
    }

    /// Members of `self` not in `other`, in `self`'s order.
    pub fn difference(&self, other: &LabelSet) -> LabelSet {
        LabelSet {
            labels: self.labels.iter().filter(|l| !other.contains(l)).cloned().collect(),
        }
    }

    /// `self` followed by `other`; fails on overlap.
    pub fn concat(&self, other: &LabelSet) -> Result<LabelSet> {
        LabelSet::new(self.labels.iter().chain(other.labels.iter()).cloned())
    }

    pub fn primed(&self) -> LabelSet {
        LabelSet {
            labels: self.labels.iter().map(Label::primed).collect(),
        }
    }
}

impl<'a> IntoIterator for &'a LabelSet {
    type Item = &'a Label;
    type IntoIter = std::slice::Iter<'a, Label>;

    fn into_iter(self) -> Self::IntoIter {
        self.labels.iter()
    }
}

/// A matrix of `d x d` operators indexed by `rows x cols`.
#[derive(Clone, PartialEq)]
pub struct LabeledBlockMatrix {
    rows: LabelSet,
    cols: LabelSet,
    dim: usize,
    blocks: Vec<Operator>,
}

impl fmt::Debug for LabeledBlockMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LabeledBlockMatrix(d={}) {{", self.dim)?;
        for r in &self.rows {
            for c in &self.cols {
                writeln!(f, "  [{r},{c}] = {:?}", self.entry(r, c).unwrap())?;
            }
        }
        write!(f, "}}")
    }
}

impl LabeledBlockMatrix {
    pub fn zeros(rows: LabelSet, cols: LabelSet, dim: usize) -> Self {
        let blocks = vec![Operator::zeros(dim); rows.len() * cols.len()];
        Self {
            rows,
            cols,
            dim,
            blocks,
        }
    }

    /// Identity block matrix over a square label set.
    pub fn identity(labels: LabelSet, dim: usize) -> Self {
        Self::from_fn(labels.clone(), labels, dim, |r, c| {
            if r == c {
                Operator::identity(dim)
            } else {
                Operator::zeros(dim)
            }
        })
    }

    pub fn from_fn(
        rows: LabelSet,
        cols: LabelSet,
        dim: usize,
        mut f: impl FnMut(&Label, &Label) -> Operator,
    ) -> Self {
        let mut blocks = Vec::with_capacity(rows.len() * cols.len());
        for r in &rows {
            for c in &cols {
                let op = f(r, c);
                assert_eq!(op.dim(), dim, "block [{r},{c}] has wrong dimension");
                blocks.push(op);
            }
        }
        Self {
            rows,
            cols,
            dim,
            blocks,
        }
    }

    /// Builds a matrix from row-major entries, checking every block is `dim x dim`.
    pub fn from_blocks(rows: LabelSet, cols: LabelSet, dim: usize, blocks: Vec<Operator>) -> Result<Self> {
        if blocks.len() != rows.len() * cols.len() {
            return Err(Error::SizeMismatch {
                expected: rows.len() * cols.len(),
                found: blocks.len(),
            });
        }
        if let Some(bad) = blocks.iter().find(|b| b.dim() != dim) {
            return Err(Error::DimMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self {
            rows,
            cols,
            dim,
            blocks,
        })
    }

    /// Scalar (d = 1) matrix from real entries; handy in tests and examples.
    pub fn scalar_real(rows: LabelSet, cols: LabelSet, values: &[&[f64]]) -> Result<Self> {
        let mut blocks = Vec::new();
        for row in values {
            for &v in *row {
                blocks.push(Operator::scalar(1, Complex64::new(v, 0.0)));
            }
        }
        Self::from_blocks(rows, cols, 1, blocks)
    }

    pub fn rows(&self) -> &LabelSet {
        &self.rows
    }

    pub fn cols(&self) -> &LabelSet {
        &self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_square_labeled(&self) -> bool {
        self.rows.same_members(&self.cols)
    }

    fn slot(&self, r: &Label, c: &Label) -> Result<usize> {
        let ri = self.rows.position(r).ok_or_else(|| Error::UnknownLabel(r.to_string()))?;
        let ci = self.cols.position(c).ok_or_else(|| Error::UnknownLabel(c.to_string()))?;
        Ok(ri * self.cols.len() + ci)
    }

    pub fn entry(&self, r: &Label, c: &Label) -> Result<&Operator> {
        Ok(&self.blocks[self.slot(r, c)?])
    }

    /// Entry lookup by label name; panics if absent. Internal wiring only.
    pub(crate) fn at(&self, r: &str, c: &str) -> &Operator {
        self.entry(&Label::from(r), &Label::from(c))
            .unwrap_or_else(|_| panic!("missing block [{r},{c}]"))
    }

    pub fn set_entry(&mut self, r: &Label, c: &Label, op: Operator) -> Result<()> {
        if op.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: op.dim(),
            });
        }
        let slot = self.slot(r, c)?;
        self.blocks[slot] = op;
        Ok(())
    }

    pub(crate) fn set(&mut self, r: &str, c: &str, op: Operator) {
        self.set_entry(&Label::from(r), &Label::from(c), op)
            .unwrap_or_else(|e| panic!("cannot set block [{r},{c}]: {e}"));
    }

    /// Copies the blocks `r x c`, in the order given by `r` and `c`.
    pub fn sub_block(&self, r: &LabelSet, c: &LabelSet) -> Result<Self> {
        let mut blocks = Vec::with_capacity(r.len() * c.len());
        for rl in r {
            for cl in c {
                blocks.push(self.entry(rl, cl)?.clone());
            }
        }
        Ok(Self {
            rows: r.clone(),
            cols: c.clone(),
            dim: self.dim,
            blocks,
        })
    }

    /// Same entries under new row/column names, matched by position.
    pub fn relabeled(&self, rows: LabelSet, cols: LabelSet) -> Result<Self> {
        if rows.len() != self.rows.len() || cols.len() != self.cols.len() {
            return Err(Error::SizeMismatch {
                expected: self.rows.len() * self.cols.len(),
                found: rows.len() * cols.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            dim: self.dim,
            blocks: self.blocks.clone(),
        })
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols.clone(), self.rows.clone(), self.dim, |r, c| {
            self.entry(c, r).expect("transposed label").adjoint()
        })
    }

    /// Multiplies every block by a scalar.
    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            dim: self.dim,
            blocks: self.blocks.iter().map(|b| b.scale(factor)).collect(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if !self.rows.same_members(&other.rows) || !self.cols.same_members(&other.cols) {
            return Err(Error::LabelCollision("operands are indexed by different label sets".into()));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self::from_fn(self.rows.clone(), self.cols.clone(), self.dim, |r, c| {
            self.entry(r, c).unwrap() + other.entry(r, c).unwrap()
        }))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self::from_fn(self.rows.clone(), self.cols.clone(), self.dim, |r, c| {
            self.entry(r, c).unwrap() - other.entry(r, c).unwrap()
        }))
    }

    /// Block product; `self.cols` and `other.rows` must hold the same labels.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if !self.cols.same_members(&other.rows) {
            return Err(Error::LabelCollision("inner label sets of a product differ".into()));
        }
        let mut out = Self::zeros(self.rows.clone(), other.cols.clone(), self.dim);
        for (ri, r) in self.rows.iter().enumerate() {
            for (ci, c) in other.cols.iter().enumerate() {
                let acc = &mut out.blocks[ri * other.cols.len() + ci];
                for k in &self.cols {
                    let a = self.entry(r, k).unwrap();
                    let b = other.entry(k, c).unwrap();
                    *acc += &(a * b);
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute entry difference, matching blocks by label.
    /// Infinite when the label sets or dimensions differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.check_same_shape(other).is_err() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for r in &self.rows {
            for c in &self.cols {
                worst = worst.max(self.entry(r, c).unwrap().max_abs_diff(other.entry(r, c).unwrap()));
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(Operator::max_abs).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Flattens a square-sized block matrix into one `(n d) x (n d)` operator.
    pub fn flatten(&self) -> Result<Operator> {
        if self.rows.len() != self.cols.len() {
            return Err(Error::SizeMismatch {
                expected: self.rows.len(),
                found: self.cols.len(),
            });
        }
        let d = self.dim;
        let n = self.rows.len();
        Ok(Operator::from_fn(n * d, |r, c| {
            self.blocks[(r / d) * n + c / d][(r % d, c % d)]
        }))
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn unflatten(flat: &Operator, rows: LabelSet, cols: LabelSet, dim: usize) -> Result<Self> {
        let n = rows.len();
        if cols.len() != n || flat.dim() != n * dim {
            return Err(Error::DimMismatch {
                expected: n * dim,
                found: flat.dim(),
            });
        }
        let mut blocks = Vec::with_capacity(n * n);
        for br in 0..n {
            for bc in 0..n {
                blocks.push(Operator::from_fn(dim, |r, c| flat[(br * dim + r, bc * dim + c)]));
            }
        }
        Ok(Self {
            rows,
            cols,
            dim,
            blocks,
        })
    }

    /// Whole-block inverse through the flattened matrix. The result is indexed
    /// by `cols x rows`.
    pub fn block_inverse(&self, tol: &Tolerances) -> Result<Self> {
        self.block_inverse_relative_to(tol, 0.0)
    }

    /// Block inverse with pivots judged against `max(reference, max entry)`.
    pub fn block_inverse_relative_to(&self, tol: &Tolerances, reference: f64) -> Result<Self> {
        if self.rows.len() != self.cols.len() {
            return Err(Error::SizeMismatch {
                expected: self.rows.len(),
                found: self.cols.len(),
            });
        }
        if self.rows.is_empty() {
            return Ok(Self::zeros(self.cols.clone(), self.rows.clone(), self.dim));
        }
        let inv = self.flatten()?.inverse_relative_to(tol, reference)?;
        Self::unflatten(&inv, self.cols.clone(), self.rows.clone(), self.dim)
    }

    /// Inverse of a pivot of the form `I ± X`, judged against unit scale, with
    /// a failure reported under `block`.
    pub(crate) fn block_inverse_named(&self, tol: &Tolerances, block: &str, kind: PivotFailure) -> Result<Self> {
        self.block_inverse_relative_to(tol, 1.0)
            .map_err(|e| e.retag(block, kind))
    }

    /// Smallest relative LU pivot of the flattened matrix (infinite when empty).
    pub fn smallest_relative_pivot(&self) -> f64 {
        self.smallest_pivot_relative_to(0.0)
    }

    pub fn smallest_pivot_relative_to(&self, reference: f64) -> f64 {
        if self.rows.is_empty() {
            return f64::INFINITY;
        }
        self.flatten()
            .map(|f| f.smallest_pivot_relative_to(reference))
            .unwrap_or(0.0)
    }

    /// `X_aa - X_ab X_bb^{-1} X_ba` with `b = short` and `a` the remaining rows
    /// in their original order. The pivot `X_bb` counts as singular relative to
    /// the largest entry of the whole of `X`.
    pub fn schur_complement(&self, short: &LabelSet, tol: &Tolerances) -> Result<Self> {
        if !self.is_square_labeled() {
            return Err(Error::InvalidValue("Schur complement needs rows = cols as sets".into()));
        }
        if let Some(missing) = short.iter().find(|l| !self.rows.contains(l)) {
            return Err(Error::UnknownLabel(missing.to_string()));
        }
        let keep = self.rows.difference(short);
        let x_aa = self.sub_block(&keep, &keep)?;
        if short.is_empty() {
            return Ok(x_aa);
        }
        let x_ab = self.sub_block(&keep, short)?;
        let x_ba = self.sub_block(short, &keep)?;
        let x_bb_inv = self
            .sub_block(short, short)?
            .block_inverse_relative_to(tol, self.max_abs())?;
        x_aa.try_sub(&x_ab.try_mul(&x_bb_inv)?.try_mul(&x_ba)?)
    }

    pub(crate) fn schur_named(
        &self,
        short: &LabelSet,
        tol: &Tolerances,
        block: &str,
        kind: PivotFailure,
    ) -> Result<Self> {
        self.schur_complement(short, tol).map_err(|e| e.retag(block, kind))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn three_by_three() -> LabeledBlockMatrix {
        LabeledBlockMatrix::scalar_real(
            LabelSet::of(&["0", "e", "i"]),
            LabelSet::of(&["0", "e", "i"]),
            &[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 10.0]],
        )
        .unwrap()
    }

    #[test]
    fn labels_reject_duplicates_and_empty() {
        assert!(Label::new("").is_err());
        let dup = LabelSet::new(vec![Label::from("a"), Label::from("a")]);
        assert!(matches!(dup, Err(Error::LabelCollision(_))));
    }

    #[test]
    fn sub_block_single_entry() {
        let x = three_by_three();
        let i = LabelSet::of(&["i"]);
        let s = x.sub_block(&i, &i).unwrap();
        assert_eq!(s.at("i", "i")[(0, 0)].re, 10.0);
        assert_eq!(s.rows().len(), 1);
    }

    #[test]
    fn sub_block_full_is_identity_op() {
        let x = three_by_three();
        assert_eq!(x.sub_block(x.rows(), x.cols()).unwrap(), x);
    }

    #[test]
    fn sub_block_reorders_rows() {
        let x = three_by_three();
        let s = x.sub_block(&LabelSet::of(&["e", "0"]), x.cols()).unwrap();
        for r in ["e", "0"] {
            for c in ["0", "e", "i"] {
                assert_eq!(s.at(r, c), x.at(r, c));
            }
        }
        // Row order in the flattened form follows the requested order.
        let sq = x.sub_block(&LabelSet::of(&["e", "0"]), &LabelSet::of(&["e", "0"])).unwrap();
        let flat = sq.flatten().unwrap();
        assert_eq!(flat[(0, 0)].re, 5.0);
        assert_eq!(flat[(0, 1)].re, 4.0);
    }

    #[test]
    fn sub_block_unknown_label() {
        let x = three_by_three();
        let err = x.sub_block(&LabelSet::of(&["z"]), x.cols()).unwrap_err();
        assert_eq!(err, Error::UnknownLabel("z".into()));
    }

    #[test]
    fn block_inverse_examples() {
        let ab = LabelSet::of(&["a", "b"]);
        let id = LabeledBlockMatrix::identity(ab.clone(), 2);
        assert!(id.block_inverse(&tol()).unwrap().approx_eq(&id, 0.0));

        let x = LabeledBlockMatrix::scalar_real(ab.clone(), ab.clone(), &[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
        let inv = x.block_inverse(&tol()).unwrap();
        let expect = LabeledBlockMatrix::scalar_real(ab.clone(), ab.clone(), &[&[1.0, -1.0], &[-1.0, 2.0]]).unwrap();
        assert!(inv.approx_eq(&expect, 1e-14));
        let back = x.try_mul(&inv).unwrap();
        assert!(back.approx_eq(&LabeledBlockMatrix::identity(ab.clone(), 1), tol().eq_tol));

        let sing = LabeledBlockMatrix::scalar_real(ab.clone(), ab, &[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert_eq!(sing.block_inverse(&tol()).unwrap_err().kind(), "Singular");
    }

    #[test]
    fn schur_examples() {
        let ab = LabelSet::of(&["a", "b"]);
        let x = LabeledBlockMatrix::scalar_real(ab.clone(), ab.clone(), &[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert_eq!(x.schur_complement(&LabelSet::empty(), &tol()).unwrap(), x);
        let s = x.schur_complement(&LabelSet::of(&["b"]), &tol()).unwrap();
        assert!((s.at("a", "a")[(0, 0)].re - 1.0).abs() < 1e-15);

        let decoupled =
            LabeledBlockMatrix::scalar_real(ab.clone(), ab, &[&[3.0, 0.0], &[0.0, 5.0]]).unwrap();
        let s = decoupled.schur_complement(&LabelSet::of(&["b"]), &tol()).unwrap();
        assert_eq!(s.at("a", "a")[(0, 0)].re, 3.0);
    }

    #[test]
    fn schur_of_singular_pivot_fails() {
        let ab = LabelSet::of(&["a", "b"]);
        let x = LabeledBlockMatrix::scalar_real(ab.clone(), ab, &[&[2.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(x.schur_complement(&LabelSet::of(&["b"]), &tol()).unwrap_err().kind(), "Singular");
    }

    #[test]
    fn flatten_round_trip() {
        let x = three_by_three();
        let back = LabeledBlockMatrix::unflatten(&x.flatten().unwrap(), x.rows().clone(), x.cols().clone(), 1).unwrap();
        assert_eq!(back, x);
    }
}
