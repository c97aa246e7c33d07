use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dictionary::{DesignMatrix, MultiIndex};
use crate::error::{Error, Result};

/// One monomial term `coefficient * x^exponents`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponents: MultiIndex,
    pub coefficient: f64,
}

/// A sparse polynomial in `d` variables of degree at most `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolynomial", into = "RawPolynomial")]
pub struct GroundTruthPolynomial {
    d: usize,
    p: u32,
    terms: Vec<Term>,
}

#[derive(Serialize, Deserialize)]
struct RawPolynomial {
    d: usize,
    p: u32,
    terms: Vec<Term>,
}

impl TryFrom<RawPolynomial> for GroundTruthPolynomial {
    type Error = Error;

    fn try_from(raw: RawPolynomial) -> Result<Self> {
        GroundTruthPolynomial::new(raw.d, raw.p, raw.terms)
    }
}

impl From<GroundTruthPolynomial> for RawPolynomial {
    fn from(f: GroundTruthPolynomial) -> Self {
        RawPolynomial {
            d: f.d,
            p: f.p,
            terms: f.terms,
        }
    }
}

impl GroundTruthPolynomial {
    pub fn new(d: usize, p: u32, terms: Vec<Term>) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("d", "dimension must be at least 1"));
        }
        let mut seen = HashSet::new();
        for t in &terms {
            if t.exponents.dim() != d {
                return Err(Error::DimensionMismatch {
                    context: "polynomial term",
                    expected: d,
                    actual: t.exponents.dim(),
                });
            }
            if t.exponents.degree() > p {
                return Err(Error::param(
                    "terms",
                    format!("term {} has degree {} > {p}", t.exponents, t.exponents.degree()),
                ));
            }
            if !seen.insert(t.exponents.clone()) {
                return Err(Error::param("terms", format!("duplicate term {}", t.exponents)));
            }
        }
        Ok(GroundTruthPolynomial { d, p, terms })
    }

    /// Builds from `(exponents, coefficient)` pairs.
    pub fn from_pairs(d: usize, p: u32, pairs: &[(&[u32], f64)]) -> Result<Self> {
        let terms = pairs
            .iter()
            .map(|(e, c)| Term {
                exponents: MultiIndex::new(e.to_vec()),
                coefficient: *c,
            })
            .collect();
        Self::new(d, p, terms)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree_bound(&self) -> u32 {
        self.p
    }

    /// Largest actual term degree (0 for the zero polynomial).
    pub fn max_term_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.exponents.degree()).max().unwrap_or(0)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn sparsity(&self) -> usize {
        self.terms.len()
    }

    pub fn evaluate_point(&self, x: &[f64]) -> Result<f64> {
        self.terms
            .iter()
            .map(|t| t.exponents.evaluate(x).map(|v| t.coefficient * v))
            .sum()
    }

    /// Coefficients laid out in the column order of `phi` (raw monomial scale).
    pub fn coefficient_vector(&self, phi: &DesignMatrix) -> Result<DVector<f64>> {
        let mut c = DVector::zeros(phi.cols());
        for t in &self.terms {
            let j = phi.column_of(&t.exponents).ok_or_else(|| {
                Error::param(
                    "truth",
                    format!("term {} is not in the degree-{} dictionary", t.exponents, phi.degree()),
                )
            })?;
            c[j] = t.coefficient;
        }
        Ok(c)
    }

    /// Column positions of the nonzero terms in `phi`, ascending.
    pub fn support(&self, phi: &DesignMatrix) -> Result<Vec<usize>> {
        let c = self.coefficient_vector(phi)?;
        Ok(c.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, _)| j).collect())
    }

    /// `1 - 2 x1 x2 x3 + 5 x1^5` in three variables.
    pub fn example1() -> Self {
        Self::from_pairs(3, 5, &[(&[0, 0, 0], 1.0), (&[1, 1, 1], -2.0), (&[5, 0, 0], 5.0)])
            .expect("valid")
    }

    /// `-1 - 2 x1^p` in three variables.
    pub fn example2(p: u32) -> Self {
        Self::from_pairs(3, p, &[(&[0, 0, 0], -1.0), (&[p, 0, 0], -2.0)]).expect("valid")
    }

    /// `-8.5 + 9.6 x1 x4 + 0.3 x2 x5 + 5.7 x1^3 + 1.9 x3 x9^2` in ten variables.
    pub fn example3() -> Self {
        let mono = |pairs: &[(usize, u32)]| {
            let mut e = vec![0u32; 10];
            for &(j, a) in pairs {
                e[j - 1] = a;
            }
            MultiIndex::new(e)
        };
        let terms = [
            (mono(&[]), -8.5),
            (mono(&[(1, 1), (4, 1)]), 9.6),
            (mono(&[(2, 1), (5, 1)]), 0.3),
            (mono(&[(1, 3)]), 5.7),
            (mono(&[(3, 1), (9, 2)]), 1.9),
        ]
        .into_iter()
        .map(|(exponents, coefficient)| Term {
            exponents,
            coefficient,
        })
        .collect();
        Self::new(10, 3, terms).expect("valid")
    }

    /// `-1 + 2 x1^2 + 0.5 x5 x20` in twenty variables.
    pub fn example4() -> Self {
        let mut sq = vec![0u32; 20];
        sq[0] = 2;
        let mut cross = vec![0u32; 20];
        cross[4] = 1;
        cross[19] = 1;
        let terms = vec![
            Term {
                exponents: MultiIndex::zeros(20),
                coefficient: -1.0,
            },
            Term {
                exponents: MultiIndex::new(sq),
                coefficient: 2.0,
            },
            Term {
                exponents: MultiIndex::new(cross),
                coefficient: 0.5,
            },
        ];
        Self::new(20, 2, terms).expect("valid")
    }
}

/// `y_i = f(x_i)` for every row of `x`.
pub fn evaluate_polynomial(f: &GroundTruthPolynomial, x: &DMatrix<f64>) -> Result<DVector<f64>> {
    if x.ncols() != f.d {
        return Err(Error::DimensionMismatch {
            context: "evaluate_polynomial",
            expected: f.d,
            actual: x.ncols(),
        });
    }
    let mut row = vec![0.0; f.d];
    let mut y = DVector::zeros(x.nrows());
    for i in 0..x.nrows() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = x[(i, j)];
        }
        y[i] = f.evaluate_point(&row)?;
    }
    Ok(y)
}

/// Adds `epsilon * sin(2 pi x_i1)` to every output.
pub fn add_model_mismatch(y: &DVector<f64>, x: &DMatrix<f64>, epsilon: f64) -> DVector<f64> {
    DVector::from_fn(y.len(), |i, _| {
        y[i] + epsilon * (2.0 * std::f64::consts::PI * x[(i, 0)]).sin()
    })
}
