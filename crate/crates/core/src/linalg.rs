//! Dense complex operators on the truncated initial space.
//!
//! An [`Operator`] is a square complex matrix stored row-major. Block matrices
//! flatten into operators of dimension `n * d`, so everything that needs an
//! inverse (Cayley transforms, Schur pivots, the feedback loop resolvent)
//! eventually goes through [`Operator::inverse`].

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Thresholds shared by every numerical decision in the crate.
///
/// `sing_tol` is relative: a pivot counts as zero when its magnitude is below
/// `sing_tol` times the largest absolute entry of the matrix being factored.
/// `eq_tol` is the element-wise threshold used for all equality predicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub sing_tol: f64,
    pub eq_tol: f64,
}

impl Tolerances {
    pub const DEFAULT_SING_TOL: f64 = 1e-12;
    pub const DEFAULT_EQ_TOL: f64 = 1e-9;

    pub fn new(sing_tol: f64, eq_tol: f64) -> Result<Self> {
        if !(sing_tol > 0.0 && sing_tol <= eq_tol && eq_tol < 1.0) {
            return Err(Error::InvalidValue(format!(
                "tolerances must satisfy 0 < sing_tol <= eq_tol < 1 (got {sing_tol:e}, {eq_tol:e})"
            )));
        }
        Ok(Self { sing_tol, eq_tol })
    }

    /// Overrides the equality threshold, lowering `sing_tol` if needed to keep
    /// `sing_tol <= eq_tol`.
    pub fn with_eq_tol(eq_tol: f64) -> Result<Self> {
        Self::new(Self::DEFAULT_SING_TOL.min(eq_tol), eq_tol)
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sing_tol: Self::DEFAULT_SING_TOL,
            eq_tol: Self::DEFAULT_EQ_TOL,
        }
    }
}

/// A square complex matrix.
#[derive(Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<Complex64>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, ONE)
    }

    /// `value * I_dim`.
    pub fn scalar(dim: usize, value: Complex64) -> Self {
        let mut op = Self::zeros(dim);
        for k in 0..dim {
            op[(k, k)] = value;
        }
        op
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    /// Builds an operator from nested rows, rejecting empty, ragged or non-finite input.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidValue("operator must have dimension >= 1".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidValue("operator entries must be finite".into()));
        }
        Ok(Self { dim, data })
    }

    /// Convenience for literals: rows of `(re, im)` pairs.
    pub fn from_pairs(rows: &[&[(f64, f64)]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
                .collect(),
        )
    }

    /// Convenience for real literals.
    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    /// Returns `Some(c)` when the operator is exactly `c * I`.
    pub fn as_scalar(&self) -> Option<Complex64> {
        let c = if self.dim == 0 { ZERO } else { self[(0, 0)] };
        for r in 0..self.dim {
            for col in 0..self.dim {
                let expect = if r == col { c } else { ZERO };
                if self[(r, col)] != expect {
                    return None;
                }
            }
        }
        Some(c)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self[(k, k)]).sum()
    }

    /// `(X - X†) / 2i`; always self-adjoint.
    pub fn imag_part(&self) -> Self {
        (self - &self.adjoint()).scale(Complex64::new(0.0, -0.5))
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute entry of `self - other`; infinite when dimensions differ.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_selfadjoint(&self, tol: &Tolerances) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol.eq_tol
    }

    pub fn is_unitary(&self, tol: &Tolerances) -> bool {
        let id = Self::identity(self.dim);
        let adj = self.adjoint();
        (&adj * self).max_abs_diff(&id) <= tol.eq_tol && (self * &adj).max_abs_diff(&id) <= tol.eq_tol
    }

    /// Partial-pivot LU factorization; see [`Lu`].
    pub fn lu(&self, tol: &Tolerances) -> Result<Lu> {
        Lu::factor(self, tol)
    }

    /// Inverse via partial-pivot LU. Fails with [`Error::Singular`] when a pivot
    /// drops below `sing_tol` relative to the largest initial entry.
    pub fn inverse(&self, tol: &Tolerances) -> Result<Self> {
        Ok(self.lu(tol)?.inverse())
    }

    /// True when the LU factorization succeeds under `tol`.
    pub fn is_invertible(&self, tol: &Tolerances) -> bool {
        self.lu(tol).is_ok()
    }

    /// Smallest relative pivot magnitude of the LU factorization, run to
    /// completion regardless of thresholds. Zero for an exactly singular matrix.
    pub fn smallest_relative_pivot(&self) -> f64 {
        Lu::pivot_profile(self, 0.0)
    }

    /// Inverse where pivots are judged against `max(reference, max |a_ij|)`
    /// rather than this matrix alone. Used when the operator is a block of a
    /// larger matrix whose scale should decide what counts as zero.
    pub fn inverse_relative_to(&self, tol: &Tolerances, reference: f64) -> Result<Self> {
        Ok(Lu::factor_scaled(self, tol, reference)?.inverse())
    }

    pub fn smallest_pivot_relative_to(&self, reference: f64) -> f64 {
        Lu::pivot_profile(self, reference)
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// Eigenvalues via complex Schur decomposition.
    ///
    /// QR iteration can stall when every eigenvalue has the same modulus
    /// (permutation matrices do this); on failure the decomposition is retried
    /// on `A + cI` for a fixed complex `c`, and `c` is subtracted again.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        if self.dim == 0 {
            return Ok(Vec::new());
        }
        let scale = self.max_abs().max(1.0);
        for shift in [Complex64::new(0.0, 0.0), Complex64::new(0.3, 0.27), Complex64::new(-0.58, 0.14)] {
            let c = shift * scale;
            let mut a = self.to_nalgebra();
            for k in 0..self.dim {
                a[(k, k)] += c;
            }
            if let Some(schur) = nalgebra::Schur::try_new(a, f64::EPSILON, 10_000) {
                let eig = schur
                    .eigenvalues()
                    .ok_or_else(|| Error::InvalidValue("Schur form is not triangular".into()))?;
                return Ok(eig.iter().map(|z| z - c).collect());
            }
        }
        Err(Error::InvalidValue("Schur iteration did not converge".into()))
    }

    pub fn singular_values(&self) -> Vec<f64> {
        if self.dim == 0 {
            return Vec::new();
        }
        self.to_nalgebra()
            .singular_values()
            .iter()
            .copied()
            .collect()
    }

    pub fn smallest_singular_value(&self) -> f64 {
        self.singular_values()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}x{})[", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        assert!(r < self.dim && c < self.dim, "index ({r},{c}) out of range for dim {}", self.dim);
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        assert!(r < self.dim && c < self.dim, "index ({r},{c}) out of range for dim {}", self.dim);
        &mut self.data[r * self.dim + c]
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch in add");
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch in sub");
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch in mul");
        let n = self.dim;
        let mut out = Operator::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }
}

impl Neg for &Operator {
    type Output = Operator;

    fn neg(self) -> Operator {
        self.scale(-ONE)
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch in add");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&Operator> for Operator {
    fn sub_assign(&mut self, rhs: &Operator) {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch in sub");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

/// Partial-pivot LU factors `P A = L U`, packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    packed: Operator,
    perm: Vec<usize>,
    smallest_pivot: f64,
}

impl Lu {
    fn factor(a: &Operator, tol: &Tolerances) -> Result<Self> {
        Self::factor_scaled(a, tol, 0.0)
    }

    /// As `factor`, but pivots are measured against `max(reference, max |a_ij|)`.
    fn factor_scaled(a: &Operator, tol: &Tolerances, reference: f64) -> Result<Self> {
        let n = a.dim;
        let scale = a.max_abs().max(reference);
        let threshold = tol.sing_tol * scale;
        let mut m = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut smallest = f64::INFINITY;

        for col in 0..n {
            let (pivot_row, pivot_abs) = (col..n)
                .map(|r| (r, m[(r, col)].norm()))
                .fold((col, -1.0), |best, cand| if cand.1 > best.1 { cand } else { best });
            let relative = if scale > 0.0 { pivot_abs / scale } else { 0.0 };
            smallest = smallest.min(relative);
            if pivot_abs == 0.0 || pivot_abs < threshold {
                return Err(Error::Singular {
                    block: String::new(),
                    smallest_pivot: relative,
                });
            }
            if pivot_row != col {
                for c in 0..n {
                    m.data.swap(col * n + c, pivot_row * n + c);
                }
                perm.swap(col, pivot_row);
            }
            let pivot = m[(col, col)];
            for r in (col + 1)..n {
                let factor = m[(r, col)] / pivot;
                m[(r, col)] = factor;
                if factor == ZERO {
                    continue;
                }
                for c in (col + 1)..n {
                    let upper = m[(col, c)];
                    m[(r, c)] -= factor * upper;
                }
            }
        }
        if n == 0 {
            smallest = f64::INFINITY;
        }
        Ok(Self {
            packed: m,
            perm,
            smallest_pivot: smallest,
        })
    }

    /// Runs elimination to completion and reports the smallest relative pivot.
    fn pivot_profile(a: &Operator, reference: f64) -> f64 {
        let tiny = Tolerances {
            sing_tol: f64::MIN_POSITIVE,
            eq_tol: 1e-9,
        };
        match Self::factor_scaled(a, &tiny, reference) {
            Ok(lu) => lu.smallest_pivot,
            Err(e) => e.smallest_pivot().unwrap_or(0.0),
        }
    }

    /// Smallest pivot magnitude divided by the largest entry of the input.
    pub fn smallest_pivot(&self) -> f64 {
        self.smallest_pivot
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.packed.dim;
        assert_eq!(rhs.len(), n, "rhs length mismatch");
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for r in 0..n {
            for c in 0..r {
                let l = self.packed[(r, c)];
                let yc = y[c];
                y[r] -= l * yc;
            }
        }
        for r in (0..n).rev() {
            for c in (r + 1)..n {
                let u = self.packed[(r, c)];
                let yc = y[c];
                y[r] -= u * yc;
            }
            y[r] /= self.packed[(r, r)];
        }
        y
    }

    pub fn inverse(&self) -> Operator {
        let n = self.packed.dim;
        let mut inv = Operator::zeros(n);
        let mut basis = vec![ZERO; n];
        for col in 0..n {
            basis.fill(ZERO);
            basis[col] = ONE;
            let x = self.solve(&basis);
            for (r, v) in x.into_iter().enumerate() {
                inv[(r, col)] = v;
            }
        }
        inv
    }
}
