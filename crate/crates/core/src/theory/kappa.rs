use std::f64::consts::{LN_2, E};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Concentration regime together with its constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case", deny_unknown_fields)]
pub enum KappaSpec {
    Iid {
        c2: f64,
        c3: f64,
    },
    AlphaMixing {
        alpha_bar: f64,
        beta: f64,
        c_alpha: f64,
        c0: f64,
        c2: f64,
    },
    CMixing {
        sigma2: f64,
        b: f64,
        beta: f64,
    },
    UniformlyErgodic {
        lambda_doeblin: f64,
        k0: f64,
        b: f64,
    },
}

impl KappaSpec {
    pub fn regime(&self) -> &'static str {
        match self {
            KappaSpec::Iid { .. } => "iid",
            KappaSpec::AlphaMixing { .. } => "alpha_mixing",
            KappaSpec::CMixing { .. } => "c_mixing",
            KappaSpec::UniformlyErgodic { .. } => "uniformly_ergodic",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named: Vec<(&'static str, f64)> = match *self {
            KappaSpec::Iid { c2, c3 } => vec![("c2", c2), ("c3", c3)],
            KappaSpec::AlphaMixing { alpha_bar, beta, c_alpha, c0, c2 } => vec![
                ("alpha_bar", alpha_bar),
                ("beta", beta),
                ("c_alpha", c_alpha),
                ("c0", c0),
                ("c2", c2),
            ],
            KappaSpec::CMixing { sigma2, b, beta } => vec![("sigma2", sigma2), ("b", b), ("beta", beta)],
            KappaSpec::UniformlyErgodic { lambda_doeblin, k0, b } => {
                vec![("lambda_doeblin", lambda_doeblin), ("k0", k0), ("b", b)]
            }
        };
        for (name, v) in named {
            positive(name, v)?;
        }
        Ok(())
    }

    /// `kappa(zeta, m)` for this regime.
    pub fn kappa(&self, zeta: f64, m: f64) -> Result<f64> {
        match *self {
            KappaSpec::Iid { c2, c3 } => kappa_iid(zeta, m, c2, c3),
            KappaSpec::AlphaMixing { alpha_bar, beta, c_alpha, c0, c2 } => {
                kappa_alpha(zeta, m, alpha_bar, beta, c_alpha, c0, c2)
            }
            KappaSpec::CMixing { sigma2, b, beta } => kappa_cmix(zeta, m, sigma2, b, beta),
            KappaSpec::UniformlyErgodic { lambda_doeblin, k0, b } => {
                kappa_ue(zeta, m, lambda_doeblin, k0, b)
            }
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {v}")))
    }
}

fn at_least_one(m: f64) -> Result<()> {
    if m >= 1.0 && m.is_finite() {
        Ok(())
    } else {
        Err(Error::param("m", format!("must be at least 1, got {m}")))
    }
}

pub fn kappa_iid(zeta: f64, m: f64, c2: f64, c3: f64) -> Result<f64> {
    positive("zeta", zeta)?;
    at_least_one(m)?;
    positive("c2", c2)?;
    positive("c3", c3)?;
    Ok(zeta * zeta * m / (c2 + c3 * zeta) - LN_2)
}

/// Effective block count `floor(m / ceil((8m / c_alpha)^(1/(beta+1))))`.
pub fn alpha_block_count(m: f64, beta: f64, c_alpha: f64) -> f64 {
    let len = (8.0 * m / c_alpha).powf(1.0 / (beta + 1.0)).ceil().max(1.0);
    (m / len).floor()
}

/// `2 (1 + 4 e^-2 alpha_bar)`.
pub fn alpha_c1(alpha_bar: f64) -> f64 {
    2.0 * (1.0 + 4.0 * alpha_bar / (E * E))
}

pub fn kappa_alpha(
    zeta: f64,
    m: f64,
    alpha_bar: f64,
    beta: f64,
    c_alpha: f64,
    c0: f64,
    c2: f64,
) -> Result<f64> {
    positive("zeta", zeta)?;
    at_least_one(m)?;
    positive("alpha_bar", alpha_bar)?;
    positive("beta", beta)?;
    positive("c_alpha", c_alpha)?;
    positive("c0", c0)?;
    positive("c2", c2)?;
    let m_alpha = alpha_block_count(m, beta, c_alpha);
    if m_alpha < 1.0 {
        return Err(Error::BlockingTooSmall { m: m as u64 });
    }
    let c3 = 2.0 * c0 / 3.0;
    Ok(zeta * zeta * m_alpha / (c2 + c3 * zeta) - alpha_c1(alpha_bar).ln())
}

pub fn kappa_cmix(zeta: f64, m: f64, sigma2: f64, b: f64, beta: f64) -> Result<f64> {
    positive("zeta", zeta)?;
    if !(m >= 2.0 && m.is_finite()) {
        return Err(Error::param("m", format!("must be at least 2, got {m}")));
    }
    positive("sigma2", sigma2)?;
    positive("b", b)?;
    positive("beta", beta)?;
    let log_factor = m.ln().powf(2.0 / beta);
    Ok(m * zeta * zeta / (8.0 * log_factor * (sigma2 + zeta * b / 3.0)) - 4f64.ln())
}

/// Smallest `m` for which the uniformly ergodic inequality applies.
pub fn ue_validity_bound(zeta: f64, lambda_doeblin: f64, k0: f64, b: f64) -> f64 {
    1.0 + 3.0 * k0 * b / (lambda_doeblin * zeta)
}

pub fn kappa_ue(zeta: f64, m: f64, lambda_doeblin: f64, k0: f64, b: f64) -> Result<f64> {
    positive("zeta", zeta)?;
    at_least_one(m)?;
    positive("lambda_doeblin", lambda_doeblin)?;
    positive("k0", k0)?;
    positive("b", b)?;
    let bound = ue_validity_bound(zeta, lambda_doeblin, k0, b);
    if m < bound {
        return Err(Error::BelowValidityBound { m: m as u64, bound });
    }
    let inner = lambda_doeblin * zeta / (k0 * b) - 3.0 / (m - 1.0);
    Ok((m - 1.0) / 2.0 * inner * inner - LN_2)
}

/// Left side `kappa(m^-delta, m)` and right side `3 delta r ln m`.
pub fn kappa_condition_sides(spec: &KappaSpec, delta: f64, r: usize, m: f64) -> Result<(f64, f64)> {
    positive("delta", delta)?;
    spec.validate()?;
    let lhs = spec.kappa(m.powf(-delta), m)?;
    let rhs = 3.0 * delta * r as f64 * m.ln();
    Ok((lhs, rhs))
}

/// True iff `kappa(m^-delta, m) >= 3 delta r ln m`.
pub fn check_kappa_condition(spec: &KappaSpec, delta: f64, r: usize, m: f64) -> Result<bool> {
    let (lhs, rhs) = kappa_condition_sides(spec, delta, r, m)?;
    Ok(lhs >= rhs)
}
