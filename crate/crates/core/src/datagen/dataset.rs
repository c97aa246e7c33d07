use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};

use super::corruption::{inject_corruption, CorruptionSpec};
use super::generators::Generator;
use super::polynomial::{add_model_mismatch, evaluate_polynomial, GroundTruthPolynomial};
use super::rng::child_seed;
use crate::error::{Error, Result};
use crate::fmt_float;

/// One simulated corrupted sample set.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub x_clean: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub y: DVector<f64>,
    pub corruption_support: Vec<usize>,
    pub theta: DMatrix<f64>,
    pub output_shift: DVector<f64>,
    /// Dense output noise (model mismatch).
    pub epsilon: DVector<f64>,
    pub generator_tag: String,
    pub seed: u64,
}

impl Dataset {
    /// Clean inputs from `generator`, outputs from `truth`, then corruption and
    /// `mismatch * sin(2 pi x1)` noise. Input and corruption draws use
    /// `child_seed(seed, 0)` and `child_seed(seed, 1)`.
    pub fn simulate(
        generator: &Generator,
        truth: &GroundTruthPolynomial,
        m: usize,
        corruption: &CorruptionSpec,
        mismatch: f64,
        seed: u64,
    ) -> Result<Self> {
        let x = generator.generate(m, truth.dim(), child_seed(seed, 0))?;
        let clean_y = evaluate_polynomial(truth, &x)?;
        let c = inject_corruption(&x, corruption, child_seed(seed, 1))?;
        let noisy = add_model_mismatch(&clean_y, &x, mismatch);
        let epsilon = &noisy - &clean_y;
        let y = noisy + &c.output_shift;
        Ok(Dataset {
            x_clean: x,
            u: c.u,
            y,
            corruption_support: c.support,
            theta: c.theta,
            output_shift: c.output_shift,
            epsilon,
            generator_tag: generator.tag().to_string(),
            seed,
        })
    }

    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    pub fn dim(&self) -> usize {
        self.u.ncols()
    }

    /// Writes `x1..xd,u1..ud,y,corrupted`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let d = self.dim();
        let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
        header.extend((1..=d).map(|j| format!("u{j}")));
        header.push("y".into());
        header.push("corrupted".into());
        writeln!(out, "{}", header.join(","))?;

        let mut flags = vec![false; self.rows()];
        for &i in &self.corruption_support {
            flags[i] = true;
        }
        let mut line = String::new();
        for i in 0..self.rows() {
            line.clear();
            for j in 0..d {
                line.push_str(&fmt_float(self.x_clean[(i, j)]));
                line.push(',');
            }
            for j in 0..d {
                line.push_str(&fmt_float(self.u[(i, j)]));
                line.push(',');
            }
            line.push_str(&fmt_float(self.y[i]));
            line.push(',');
            line.push(if flags[i] { '1' } else { '0' });
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Reads a file written by [`Dataset::write_csv`]. Fields not stored in
    /// the file (`theta`, noise split) are reconstructed where possible.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = rdr.headers()?.clone();
        let n = header.len();
        if n < 4 || (n - 2) % 2 != 0 {
            return Err(Error::Parse {
                location: "line 1".into(),
                reason: format!("expected x1..xd,u1..ud,y,corrupted; got {n} columns"),
            });
        }
        let d = (n - 2) / 2;
        for j in 0..d {
            for (pos, prefix) in [(j, "x"), (d + j, "u")] {
                let want = format!("{prefix}{}", j + 1);
                if &header[pos] != want.as_str() {
                    return Err(Error::Parse {
                        location: format!("line 1, column {}", pos + 1),
                        reason: format!("expected `{want}`, found `{}`", &header[pos]),
                    });
                }
            }
        }
        if &header[2 * d] != "y" || &header[2 * d + 1] != "corrupted" {
            return Err(Error::Parse {
                location: "line 1".into(),
                reason: "last two columns must be `y,corrupted`".into(),
            });
        }

        let mut x = Vec::new();
        let mut u = Vec::new();
        let mut y = Vec::new();
        let mut support = Vec::new();
        for (row_idx, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = row_idx + 2;
            let field = |k: usize| -> Result<f64> {
                rec.get(k)
                    .ok_or_else(|| Error::Parse {
                        location: format!("line {line}"),
                        reason: format!("missing column {}", k + 1),
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse {
                        location: format!("line {line}, column `{}`", &header[k]),
                        reason: e.to_string(),
                    })
            };
            for j in 0..d {
                x.push(field(j)?);
            }
            for j in 0..d {
                u.push(field(d + j)?);
            }
            y.push(field(2 * d)?);
            match rec.get(2 * d + 1).map(str::trim) {
                Some("0") => {}
                Some("1") => support.push(row_idx),
                other => {
                    return Err(Error::Parse {
                        location: format!("line {line}, column `corrupted`"),
                        reason: format!("expected 0 or 1, found {other:?}"),
                    })
                }
            }
        }
        let m = y.len();
        if m == 0 {
            return Err(Error::Parse {
                location: "line 2".into(),
                reason: "no data rows".into(),
            });
        }
        let x_clean = DMatrix::from_row_slice(m, d, &x);
        let u = DMatrix::from_row_slice(m, d, &u);
        let theta = &u - &x_clean;
        Ok(Dataset {
            x_clean,
            u,
            y: DVector::from_vec(y),
            corruption_support: support,
            theta,
            output_shift: DVector::zeros(m),
            epsilon: DVector::zeros(m),
            generator_tag: "file".into(),
            seed: 0,
        })
    }
}
