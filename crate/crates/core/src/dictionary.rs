//! Monomial dictionaries.
//!
//! Columns are ordered graded-lexicographically: by total degree, and within
//! a degree by exponent vectors in descending lexicographic order, so for two
//! variables and degree two the columns are `1, x1, x2, x1^2, x1*x2, x2^2`.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent vector of a single monomial `x1^a1 * ... * xd^ad`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct MultiIndex {
    exponents: Vec<u32>,
    degree: u32,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        let degree = exponents.iter().sum();
        MultiIndex { exponents, degree }
    }

    pub fn zeros(d: usize) -> Self {
        MultiIndex::new(vec![0; d])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// Evaluates the monomial at `x`, with `0^0 = 1`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.exponents.len() {
            return Err(Error::DimensionMismatch {
                context: "evaluate_monomial",
                expected: self.exponents.len(),
                actual: x.len(),
            });
        }
        Ok(self
            .exponents
            .iter()
            .zip(x)
            .map(|(&a, &xi)| xi.powi(a as i32))
            .product())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| other.exponents.cmp(&self.exponents))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 0 {
            return f.write_str("1");
        }
        let mut first = true;
        for (j, &a) in self.exponents.iter().enumerate() {
            if a == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(f, "x{}", j + 1)?;
            if a > 1 {
                write!(f, "^{a}")?;
            }
        }
        Ok(())
    }
}

impl TryFrom<Vec<u32>> for MultiIndex {
    type Error = String;

    fn try_from(exponents: Vec<u32>) -> std::result::Result<Self, String> {
        if exponents.is_empty() {
            return Err("multi-index must have at least one exponent".into());
        }
        Ok(MultiIndex::new(exponents))
    }
}

impl From<MultiIndex> for Vec<u32> {
    fn from(alpha: MultiIndex) -> Vec<u32> {
        alpha.exponents
    }
}

/// `binomial(p + d, d)`, the number of monomials of degree at most `p` in `d` variables.
pub fn monomial_count(d: usize, p: u32) -> usize {
    let p = p as u128;
    let d = d as u128;
    let k = d.min(p);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (p + d + 1 - i) / i;
    }
    acc as usize
}

/// All multi-indices of dimension `d` and degree at most `p`, in graded-lex order.
pub fn enumerate_multi_indices(d: usize, p: i64) -> Result<Vec<MultiIndex>> {
    if d == 0 {
        return Err(Error::param("d", "dimension must be at least 1"));
    }
    if p < 0 {
        return Err(Error::param("p", format!("degree must be non-negative, got {p}")));
    }
    let p = p as u32;
    let mut out = Vec::with_capacity(monomial_count(d, p));
    let mut current = vec![0u32; d];
    for degree in 0..=p {
        compositions(degree, 0, &mut current, &mut out);
    }
    Ok(out)
}

// Writes every split of `remaining` over current[pos..] in descending lex order.
fn compositions(remaining: u32, pos: usize, current: &mut [u32], out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex::new(current.to_vec()));
        current[pos] = 0;
        return;
    }
    for a in (0..=remaining).rev() {
        current[pos] = a;
        compositions(remaining - a, pos + 1, current, out);
    }
    current[pos] = 0;
}

pub fn evaluate_monomial(alpha: &MultiIndex, x: &[f64]) -> Result<f64> {
    alpha.evaluate(x)
}

/// The `m x r` monomial dictionary together with its column ordering and scales.
#[derive(Clone, Debug)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    indices: Vec<MultiIndex>,
    column_scales: Vec<f64>,
    degree: u32,
}

impl DesignMatrix {
    /// Wraps an arbitrary `m x binomial(p + d, d)` matrix as a dictionary whose
    /// columns are labelled by the degree-`p` multi-indices in `d` variables.
    pub fn from_parts(values: DMatrix<f64>, d: usize, p: u32) -> Result<Self> {
        let indices = enumerate_multi_indices(d, p as i64)?;
        if values.ncols() != indices.len() {
            return Err(Error::DimensionMismatch {
                context: "dictionary columns",
                expected: indices.len(),
                actual: values.ncols(),
            });
        }
        if values.nrows() == 0 {
            return Err(Error::param("values", "dictionary must have at least one row"));
        }
        let r = indices.len();
        Ok(DesignMatrix {
            values,
            indices,
            column_scales: vec![1.0; r],
            degree: p,
        })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Norms divided out of each column; all ones for a raw dictionary.
    pub fn column_scales(&self) -> &[f64] {
        &self.column_scales
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.indices[0].dim()
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_normalized(&self) -> bool {
        self.column_scales.iter().any(|&s| s != 1.0)
    }

    /// Maps coefficients of the scaled dictionary back to the raw monomial basis.
    pub fn rescale_coefficients(&self, c: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            c.len(),
            c.iter().zip(&self.column_scales).map(|(ci, s)| ci / s),
        )
    }

    /// Position of a multi-index among the columns.
    pub fn column_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.indices.binary_search(alpha).ok()
    }
}

/// Evaluates every monomial of degree at most `p` on every row of `data`.
pub fn build_dictionary(data: &DMatrix<f64>, p: u32) -> Result<DesignMatrix> {
    let (m, d) = data.shape();
    if m == 0 || d == 0 {
        return Err(Error::param("data", "data matrix must be non-empty"));
    }
    let indices = enumerate_multi_indices(d, p as i64)?;
    let r = indices.len();
    let deg = p as usize;

    let mut values = DMatrix::zeros(m, r);
    let mut powers = vec![0.0; d * (deg + 1)];
    for i in 0..m {
        for j in 0..d {
            let x = data[(i, j)];
            let row = &mut powers[j * (deg + 1)..(j + 1) * (deg + 1)];
            row[0] = 1.0;
            for k in 1..=deg {
                row[k] = row[k - 1] * x;
            }
        }
        for (col, alpha) in indices.iter().enumerate() {
            values[(i, col)] = alpha
                .exponents()
                .iter()
                .enumerate()
                .map(|(j, &a)| powers[j * (deg + 1) + a as usize])
                .product();
        }
    }
    Ok(DesignMatrix {
        values,
        indices,
        column_scales: vec![1.0; r],
        degree: p,
    })
}

/// Scales every column to unit Euclidean norm, recording the norms.
pub fn normalize_columns(phi: &DesignMatrix) -> Result<DesignMatrix> {
    let mut out = phi.clone();
    for (j, mut col) in out.values.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::ZeroColumn {
                index: phi.indices[j].to_string(),
            });
        }
        col /= norm;
        out.column_scales[j] *= norm;
    }
    Ok(out)
}

/// The operator `A = [lambda^-1 * I_m, Phi]` acting on `w = [e_scaled, c]`.
///
/// The identity block is never stored.
#[derive(Clone, Debug)]
pub struct AugmentedMatrix {
    phi: DesignMatrix,
    lambda: f64,
}

impl AugmentedMatrix {
    pub fn new(phi: DesignMatrix, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
        }
        Ok(AugmentedMatrix { phi, lambda })
    }

    pub fn phi(&self) -> &DesignMatrix {
        &self.phi
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rows(&self) -> usize {
        self.phi.rows()
    }

    pub fn total_cols(&self) -> usize {
        self.phi.rows() + self.phi.cols()
    }

    /// `A w`.
    pub fn apply(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        let m = self.rows();
        if w.len() != self.total_cols() {
            return Err(Error::DimensionMismatch {
                context: "apply_augmented",
                expected: self.total_cols(),
                actual: w.len(),
            });
        }
        let mut out = DVector::zeros(m);
        self.apply_into(w, &mut out);
        Ok(out)
    }

    /// `A^T v`.
    pub fn apply_transpose(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let m = self.rows();
        if v.len() != m {
            return Err(Error::DimensionMismatch {
                context: "apply_augmented_transpose",
                expected: m,
                actual: v.len(),
            });
        }
        let mut out = DVector::zeros(self.total_cols());
        self.apply_transpose_into(v, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, w: &DVector<f64>, out: &mut DVector<f64>) {
        let m = self.rows();
        let inv = 1.0 / self.lambda;
        out.gemv(1.0, self.phi.values(), &w.rows(m, self.phi.cols()), 0.0);
        out.axpy(inv, &w.rows(0, m), 1.0);
    }

    pub(crate) fn apply_transpose_into(&self, v: &DVector<f64>, out: &mut DVector<f64>) {
        let m = self.rows();
        let inv = 1.0 / self.lambda;
        out.rows_mut(0, m).copy_from(&(v * inv));
        let mut tail = out.rows_mut(m, self.phi.cols());
        tail.gemv_tr(1.0, self.phi.values(), v, 0.0);
    }

    /// Materializes `A` densely; meant for small instances and tests.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.rows();
        let mut a = DMatrix::zeros(m, self.total_cols());
        for i in 0..m {
            a[(i, i)] = 1.0 / self.lambda;
        }
        a.columns_mut(m, self.phi.cols()).copy_from(self.phi.values());
        a
    }
}

/// `lambda^-1 * w[..m] + Phi * w[m..]`.
pub fn apply_augmented(a: &AugmentedMatrix, w: &DVector<f64>) -> Result<DVector<f64>> {
    a.apply(w)
}
