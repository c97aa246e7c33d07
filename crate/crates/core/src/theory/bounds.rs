use crate::error::{Error, Result};
use crate::theory::kappa::{check_kappa_condition, KappaSpec};

fn check_constants(b_x: f64, b_theta: f64, d_const: f64, delta: f64) -> Result<()> {
    if !(b_x >= 0.0 && b_x.is_finite()) {
        return Err(Error::param("b_x", "must be non-negative and finite"));
    }
    if !(b_theta >= 0.0 && b_theta.is_finite()) {
        return Err(Error::param("b_theta", "must be non-negative and finite"));
    }
    if !(d_const > 0.0 && d_const.is_finite()) {
        return Err(Error::param("D", format!("must be positive, got {d_const}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    Ok(())
}

/// `1 + (B_X + B_Theta)^p`.
fn growth(b_x: f64, b_theta: f64, p: u32) -> f64 {
    1.0 + (b_x + b_theta).powi(p as i32)
}

fn to_count(v: f64) -> Result<u64> {
    if v.is_finite() && v < u64::MAX as f64 / 2.0 {
        Ok(v.max(1.0) as u64)
    } else {
        Err(Error::param("bound", format!("sample bound {v:e} does not fit in an integer")))
    }
}

/// Smallest integer `m >= base^(1/delta)`.
fn power_clause(b_x: f64, d_const: f64, delta: f64, p: u32) -> Result<u64> {
    let base = (3.0 + 3.0 * b_x.powi(p as i32)).max(4.0 / d_const);
    let target = base.powf(1.0 / delta);
    let mut m = to_count(target.ceil())?;
    while m > 1 && ((m - 1) as f64) >= target {
        m -= 1;
    }
    while (m as f64) < target {
        m += 1;
    }
    Ok(m)
}

/// Smallest integer `m > num / den`.
fn strict_clause(num: f64, den: f64) -> Result<u64> {
    let target = num / den;
    let mut m = to_count(target.floor() + 1.0)?;
    while m > 1 && ((m - 1) as f64) > target {
        m -= 1;
    }
    while (m as f64) <= target {
        m += 1;
    }
    Ok(m)
}

/// Smallest `m` with `m >= max(3 + 3 B_X^p, 4/D)^(1/delta)` and
/// `m > (4 + 8 s (1 + (B_X + B_Theta)^p)) / D`.
pub fn min_samples_nsp(b_x: f64, b_theta: f64, s: usize, d_const: f64, delta: f64, p: u32) -> Result<u64> {
    check_constants(b_x, b_theta, d_const, delta)?;
    let a = power_clause(b_x, d_const, delta, p)?;
    let b = strict_clause(4.0 + 8.0 * s as f64 * growth(b_x, b_theta, p), d_const)?;
    Ok(a.max(b))
}

/// Stable variant: the power clause together with
/// `m > (4 + 4 s (rho + 1)(1 + (B_X + B_Theta)^p)) / (rho D)`.
pub fn min_samples_stable_nsp(
    b_x: f64,
    b_theta: f64,
    s: usize,
    d_const: f64,
    delta: f64,
    p: u32,
    rho: f64,
) -> Result<u64> {
    check_constants(b_x, b_theta, d_const, delta)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param("rho", format!("must lie in (0, 1), got {rho}")));
    }
    let a = power_clause(b_x, d_const, delta, p)?;
    let num = 4.0 + 4.0 * s as f64 * (rho + 1.0) * growth(b_x, b_theta, p);
    let b = strict_clause(num, rho * d_const)?;
    Ok(a.max(b))
}

/// `4 / (m D - 8 s (1 + (B_X + B_Theta)^p))`; the corruption weight must exceed this.
pub fn lambda_threshold(m: u64, d_const: f64, s: usize, b_x: f64, b_theta: f64, p: u32) -> Result<f64> {
    check_constants(b_x, b_theta, d_const, 1.0)?;
    let needed = 8.0 * s as f64 * growth(b_x, b_theta, p);
    let den = m as f64 * d_const - needed;
    if den <= 0.0 {
        return Err(Error::SamplesTooSmall { m, needed });
    }
    Ok(4.0 / den)
}

/// Smallest `m >= 2` at which the concentration condition holds, assuming it
/// stays true once reached; `None` if it fails up to `1e15`.
pub fn min_samples_kappa(spec: &KappaSpec, delta: f64, r: usize) -> Result<Option<u64>> {
    let holds = |m: u64| -> Result<bool> {
        match check_kappa_condition(spec, delta, r, m as f64) {
            Ok(v) => Ok(v),
            Err(Error::BlockingTooSmall { .. } | Error::BelowValidityBound { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    let mut lo = 1u64;
    let mut hi = 2u64;
    while !holds(hi)? {
        lo = hi;
        hi *= 2;
        if hi > 1_000_000_000_000_000 {
            return Ok(None);
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clause_a(b_x: f64, d: f64, delta: f64, p: u32, m: u64) -> bool {
        m as f64 >= (3.0 + 3.0 * b_x.powi(p as i32)).max(4.0 / d).powf(1.0 / delta)
    }

    fn clause_b(b_x: f64, b_t: f64, s: usize, d: f64, p: u32, m: u64) -> bool {
        m as f64 > (4.0 + 8.0 * s as f64 * (1.0 + (b_x + b_t).powi(p as i32))) / d
    }

    #[test]
    fn nsp_bound_example() {
        assert_eq!(min_samples_nsp(1.0, 1.0, 5, 1.0, 0.5, 2).unwrap(), 205);
        assert!(min_samples_nsp(1.0, 1.0, 5, 0.0, 0.5, 2).is_err());
        assert!(min_samples_nsp(1.0, 1.0, 5, -1.0, 0.5, 2).is_err());
    }

    #[test]
    fn nsp_bound_large_d_limit() {
        let m = min_samples_nsp(1.0, 0.0, 1, 1e9, 0.25, 3).unwrap();
        assert_eq!(m, 6u64.pow(4));
    }

    #[test]
    fn stable_bound_at_rho_one_matches() {
        let num = 4.0 + 8.0 * 3.0 * (1.0 + 2f64.powi(3));
        let near_one = min_samples_stable_nsp(1.0, 1.0, 3, 0.5, 0.9, 3, 1.0 - 1e-12).unwrap();
        assert_eq!(near_one, ((num / 0.5).floor() as u64) + 1);
        assert_eq!(near_one, min_samples_nsp(1.0, 1.0, 3, 0.5, 0.9, 3).unwrap());
        assert!(min_samples_stable_nsp(1.0, 1.0, 3, 0.5, 0.9, 3, 1.0).is_err());
        assert!(min_samples_stable_nsp(1.0, 1.0, 3, 0.5, 0.9, 3, 0.0).is_err());
    }

    #[test]
    fn stable_bound_decreasing_in_rho() {
        let mut prev = u64::MAX;
        for k in 1..=9 {
            let m = min_samples_stable_nsp(0.5, 1.0, 4, 0.3, 0.7, 2, k as f64 / 10.0).unwrap();
            assert!(m <= prev);
            prev = m;
        }
    }

    #[test]
    fn lambda_threshold_values() {
        assert!((lambda_threshold(1000, 1.0, 5, 1.0, 1.0, 2).unwrap() - 0.005).abs() < 1e-15);
        assert!(matches!(lambda_threshold(200, 1.0, 5, 1.0, 1.0, 2), Err(Error::SamplesTooSmall { .. })));
        let mut prev = f64::INFINITY;
        for m in 201..400 {
            let t = lambda_threshold(m, 1.0, 5, 1.0, 1.0, 2).unwrap();
            assert!(t < prev);
            prev = t;
        }
        assert!(lambda_threshold(201, 1.0, 5, 1.0, 1.0, 2).unwrap() >= 4.0);
    }

    #[test]
    fn kappa_sample_minimum_is_tight() {
        let spec = KappaSpec::Iid { c2: 1.0, c3: 1.0 };
        let m = min_samples_kappa(&spec, 0.1, 56).unwrap().unwrap();
        assert!(check_kappa_condition(&spec, 0.1, 56, m as f64).unwrap());
        assert!(!check_kappa_condition(&spec, 0.1, 56, (m - 1) as f64).unwrap());
    }

    proptest! {
        #[test]
        fn nsp_bound_is_minimal(b_x in 0.0f64..2.0, b_t in 0.0f64..2.0, s in 1usize..20, d in 0.01f64..5.0, delta in 0.3f64..1.0, p in 1u32..5) {
            let m = min_samples_nsp(b_x, b_t, s, d, delta, p).unwrap();
            prop_assert!(clause_a(b_x, d, delta, p, m) && clause_b(b_x, b_t, s, d, p, m));
            prop_assert!(!(clause_a(b_x, d, delta, p, m - 1) && clause_b(b_x, b_t, s, d, p, m - 1)));
        }

        #[test]
        fn stable_bound_is_minimal(b_x in 0.0f64..2.0, b_t in 0.0f64..2.0, s in 1usize..20, d in 0.01f64..5.0, delta in 0.3f64..1.0, p in 1u32..5, rho in 0.05f64..0.95) {
            let m = min_samples_stable_nsp(b_x, b_t, s, d, delta, p, rho).unwrap();
            let stable = |m: u64| m as f64 > (4.0 + 4.0 * s as f64 * (rho + 1.0) * (1.0 + (b_x + b_t).powi(p as i32))) / (rho * d);
            prop_assert!(clause_a(b_x, d, delta, p, m) && stable(m));
            prop_assert!(!(clause_a(b_x, d, delta, p, m - 1) && stable(m - 1)));
        }
    }
}
