//! Gauss hypergeometric function ₂F₁(a, b; c; z) on the negative real axis.
//!
//! Regimes:
//! - `-0.5 <= z <= 0`: direct power series.
//! - `-9 <= z < -0.5`: Pfaff transformation
//!   `₂F₁(a,b;c;z) = (1-z)^{-a} ₂F₁(a, c-b; c; z/(z-1))`, series argument in `(1/3, 0.9]`.
//! - `z < -9`: the `1/z` connection formula, whose series argument lies in
//!   `[-1/9, 0)`. When `a - b` is an integer the connection coefficients are
//!   singular, so the Pfaff series is used with an enlarged term budget.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

const MAX_TERMS: usize = 5_000;
const MAX_TERMS_SLOW: usize = 200_000;

/// Evaluates ₂F₁(a, b; c; z) for real parameters and `z <= 0`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    for (name, v) in [("a", a), ("b", b), ("c", c), ("z", z)] {
        if !v.is_finite() {
            return Err(Error::domain(format!("2F1: {name} must be finite, got {v}")));
        }
    }
    if is_non_positive_integer(c) {
        return Err(Error::domain(format!("2F1: c = {c} is a non-positive integer")));
    }
    if z > 0.0 {
        return Err(Error::domain(format!("2F1: only z <= 0 is supported, got {z}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z >= -0.5 {
        return series(a, b, c, z, MAX_TERMS);
    }
    if z >= -9.0 || is_integer(a - b) {
        let budget = if z >= -9.0 { MAX_TERMS } else { MAX_TERMS_SLOW };
        let x = z / (z - 1.0);
        return Ok((1.0 - z).powf(-a) * series(a, c - b, c, x, budget)?);
    }
    inverse_argument(a, b, c, z)
}

fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() < 1e-9
}

fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && is_integer(x)
}

fn recip_gamma(x: f64) -> f64 {
    if is_non_positive_integer(x) {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// DLMF 15.8.2, specialised to `z < 0`.
fn inverse_argument(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let w = 1.0 / z;
    let mz = -z;
    let g_c = gamma(c);
    let first = g_c * gamma(b - a) * recip_gamma(b) * recip_gamma(c - a)
        * mz.powf(-a)
        * series(a, a - c + 1.0, a - b + 1.0, w, MAX_TERMS)?;
    let second = g_c * gamma(a - b) * recip_gamma(a) * recip_gamma(c - b)
        * mz.powf(-b)
        * series(b, b - c + 1.0, b - a + 1.0, w, MAX_TERMS)?;
    Ok(first + second)
}

/// Plain Gauss series; requires `|x| < 1`.
fn series(a: f64, b: f64, c: f64, x: f64, max_terms: usize) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small_run = 0;
    for n in 0..max_terms {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * x;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= 1e-17 * sum.abs() {
            small_run += 1;
            if small_run >= 2 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::Numeric {
        routine: "gauss_2f1",
        detail: format!(
            "series for 2F1({a}, {b}; {c}; {x}) did not converge in {max_terms} terms \
             (partial sum {sum:e}, last term {term:e})"
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn zero_argument_is_one() {
        assert_eq!(gauss_2f1(0.3, -1.7, 2.2, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn arctan_identity_all_regimes() {
        // 2F1(1, 1/2; 3/2; -x^2) = atan(x)/x
        for x in [0.1, 0.5, 0.7, 1.0, 2.0, 2.9, 3.1, 10.0, 100.0, 1000.0] {
            let v = gauss_2f1(1.0, 0.5, 1.5, -x * x).unwrap();
            let expected = x.atan() / x;
            assert!(rel(v, expected) < 1e-13, "x={x}: {v} vs {expected}");
        }
        assert!(rel(gauss_2f1(1.0, 0.5, 1.5, -1.0).unwrap(), PI / 4.0) < 1e-14);
    }

    #[test]
    fn log_identity() {
        // 2F1(1, 1; 2; -x) = ln(1+x)/x ; a-b integer takes the slow Pfaff path.
        for x in [0.25, 3.0, 20.0, 500.0] {
            let v = gauss_2f1(1.0, 1.0, 2.0, -x).unwrap();
            assert!(rel(v, (1.0 + x).ln() / x) < 1e-11, "x={x}");
        }
    }

    #[test]
    fn binomial_identity() {
        // 2F1(a, b; b; z) = (1-z)^{-a}
        for z in [-0.3, -4.0, -50.0, -1e5] {
            let v = gauss_2f1(0.7, 1.3, 1.3, z).unwrap();
            assert!(rel(v, (1.0 - z).powf(-0.7)) < 1e-12, "z={z}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(gauss_2f1(1.0, 1.0, -2.0, -0.5).is_err());
        assert!(gauss_2f1(1.0, 1.0, 2.0, 0.5).is_err());
        assert!(gauss_2f1(f64::NAN, 1.0, 2.0, -0.5).is_err());
    }
}
