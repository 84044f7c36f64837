//! Special-function kernel.
//!
//! The central object is the interference integral
//!
//! ```text
//! C(b, α) = ∫_b^∞ 1 / (1 + w^{α/2}) dw
//!         = (2π/α)·csc(2π/α) − b·₂F₁(1, 2/α; 1 + 2/α; −b^{α/2})
//! ```
//!
//! which appears in every Laplace transform of Poisson interference with an
//! exclusion disk. [`c_integral`] evaluates the closed form and
//! [`c_integral_quadrature`] is an independent quadrature route used to
//! cross-check it.

mod hypergeometric;
mod quadrature;

use std::f64::consts::PI;

pub use hypergeometric::gauss_2f1;
pub use quadrature::{integrate, integrate_to_infinity, QuadratureSettings};
pub use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{ensure_finite, Error, Result};

fn check_alpha(alpha: f64) -> Result<()> {
    ensure_finite("alpha", alpha)?;
    if alpha <= 2.0 {
        return Err(Error::domain(format!(
            "path-loss exponent must exceed 2 for a convergent interference integral, got {alpha}"
        )));
    }
    Ok(())
}

/// `(2π/α)·csc(2π/α)`, i.e. `C(0, α)`.
pub fn c_zero(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let x = 2.0 * PI / alpha;
    Ok(x / x.sin())
}

/// Closed-form `C(b, α)` via the Gauss hypergeometric function.
pub fn c_integral(b: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    ensure_finite("b", b)?;
    if b < 0.0 {
        return Err(Error::domain(format!("C(b, alpha) requires b >= 0, got {b}")));
    }
    let head = c_zero(alpha)?;
    if b == 0.0 {
        return Ok(head);
    }
    let delta = 2.0 / alpha;
    let z = -b.powf(alpha / 2.0);
    if !z.is_finite() {
        // b^{α/2} overflowed; only the leading tail term survives.
        return Ok(b.powf(1.0 - alpha / 2.0) / (alpha / 2.0 - 1.0));
    }
    let value = head - b * gauss_2f1(1.0, delta, 1.0 + delta, z)?;
    if value < 1e-6 * head && b > 1.5 {
        // The two terms cancel to more than six digits; switch to the
        // convergent tail expansion Σ (−1)^k b^{1−(k+1)α/2} / ((k+1)α/2 − 1).
        return Ok(large_b_tail(b, alpha));
    }
    Ok(value)
}

fn large_b_tail(b: f64, alpha: f64) -> f64 {
    let p = alpha / 2.0;
    let ratio = b.powf(-p);
    let mut power = b.powf(1.0 - p);
    let mut sum = 0.0;
    for k in 0..10_000 {
        let kk = (k + 1) as f64;
        let term = power / (kk * p - 1.0);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        power *= ratio;
    }
    sum
}

/// `C(b, α)` by adaptive quadrature, independent of the closed form.
///
/// `[b, X]` is integrated directly; the tail `[X, ∞)` is mapped to `[0, 1]`
/// with `w = X·s^{−1/(p−1)}`, `p = α/2`, which turns the algebraic decay into
/// the bounded integrand `X^{1−p}/(p−1) · 1/(1 + X^{−p} s^{p/(p−1)})`.
pub fn c_integral_quadrature(b: f64, alpha: f64, settings: &QuadratureSettings) -> Result<f64> {
    check_alpha(alpha)?;
    ensure_finite("b", b)?;
    if b < 0.0 {
        return Err(Error::domain(format!("C(b, alpha) requires b >= 0, got {b}")));
    }
    let p = alpha / 2.0;
    let split = b.max(1.0) + 1.0;
    let head = integrate(|w| 1.0 / (1.0 + w.powf(p)), b, split, settings)?;
    let scale = split.powf(1.0 - p) / (p - 1.0);
    let inner = split.powf(-p);
    let expo = p / (p - 1.0);
    let tail = integrate(|s| scale / (1.0 + inner * s.powf(expo)), 0.0, 1.0, settings)?;
    Ok(head + tail)
}

/// Pareto law of the received power `Y = h·X^{−α}` with `h ~ Exp(1)` and `X`
/// uniform in a disk of radius `range`: `F(y) = 1 − Γ(2/α+1)·y^{−2/α}/R²`,
/// clamped to `[0, 1]`.
pub fn pareto_received_power_cdf(y: f64, alpha: f64, range: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(range > 0.0 && range.is_finite()) {
        return Err(Error::domain(format!("range must be positive, got {range}")));
    }
    if y.is_nan() || y < 0.0 {
        return Err(Error::domain(format!("power must be non-negative, got {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y.is_infinite() {
        return Ok(1.0);
    }
    let delta = 2.0 / alpha;
    let v = 1.0 - gamma(delta + 1.0) * y.powf(-delta) / (range * range);
    Ok(v.clamp(0.0, 1.0))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    const B_GRID: [f64; 6] = [0.0, 0.01, 0.1, 1.0, 10.0, 100.0];
    const A_GRID: [f64; 6] = [2.5, 3.0, 3.5, 4.0, 5.0, 6.0];

    #[test]
    fn c_at_zero_alpha_four_is_half_pi() {
        assert!((c_integral(0.0, 4.0).unwrap() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn c_at_one_alpha_four_is_quarter_pi() {
        assert!((c_integral(1.0, 4.0).unwrap() - PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn c_alpha_four_matches_arctan() {
        for b in [1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0, 1e4] {
            let v = c_integral(b, 4.0).unwrap();
            assert!((v - (1.0 / b).atan()).abs() < 1e-12, "b={b}");
        }
    }

    #[test]
    fn c_two_three_closed_form_vs_quadrature() {
        let s = QuadratureSettings::default();
        let closed = c_integral(2.0, 3.0).unwrap();
        let quad = c_integral_quadrature(2.0, 3.0, &s).unwrap();
        assert!(((closed - quad) / quad).abs() < 1e-9, "{closed} vs {quad}");
        // 2F1(1, 2/3; 5/3; -8) is the hypergeometric factor of C(4, 3).
        let f = gauss_2f1(1.0, 2.0 / 3.0, 5.0 / 3.0, -8.0).unwrap();
        let via_f = c_zero(3.0).unwrap() - 4.0 * f;
        let quad4 = c_integral_quadrature(4.0, 3.0, &s).unwrap();
        assert!(((via_f - quad4) / quad4).abs() < 1e-9, "{via_f} vs {quad4}");
    }

    #[test]
    fn closed_form_and_quadrature_agree_on_grid() {
        let s = QuadratureSettings::default();
        for &alpha in &A_GRID {
            for &b in &B_GRID {
                let closed = c_integral(b, alpha).unwrap();
                let quad = c_integral_quadrature(b, alpha, &s).unwrap();
                let tol = s.abs_tol.max(s.rel_tol * quad.abs()).max(1e-9 * quad.abs());
                assert!((closed - quad).abs() <= tol, "b={b} alpha={alpha}: {closed} vs {quad}");
            }
        }
    }

    #[test]
    fn strictly_decreasing_and_positive_on_grid() {
        for &alpha in &A_GRID {
            for &b in &B_GRID {
                let v = c_integral(b, alpha).unwrap();
                let w = c_integral(b * 1.01 + 1e-3, alpha).unwrap();
                assert!(v > 0.0 && w < v, "b={b} alpha={alpha}");
            }
        }
    }

    #[test]
    fn vanishes_for_large_b() {
        let v = c_integral(1e6, 4.0).unwrap();
        assert!(v > 0.0 && v < 1e-5);
        assert!((v - (1e-6f64).atan()).abs() < 1e-15);
    }

    #[test]
    fn rejects_divergent_alpha() {
        assert!(matches!(c_integral(1.0, 2.0), Err(Error::Domain(_))));
        assert!(matches!(c_integral(1.0, 1.5), Err(Error::Domain(_))));
        assert!(c_integral(f64::NAN, 4.0).is_err());
        assert!(c_integral(-1.0, 4.0).is_err());
        assert!(c_integral(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn pareto_limits_and_root() {
        assert_eq!(pareto_received_power_cdf(f64::INFINITY, 4.0, 1.0).unwrap(), 1.0);
        assert!(pareto_received_power_cdf(1e300, 4.0, 1.0).unwrap() >= 1.0 - 1e-12);
        let root = (gamma(1.5) / 1.0).powf(2.0);
        assert!(pareto_received_power_cdf(root, 4.0, 1.0).unwrap().abs() < 1e-14);
        assert_eq!(pareto_received_power_cdf(root * 0.5, 4.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn pareto_monotone() {
        let mut prev = 0.0;
        for i in 0..200 {
            let y = 1e-6 * 1.2f64.powi(i);
            let v = pareto_received_power_cdf(y, 4.0, 10.0).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn db_round_trip() {
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((linear_to_db(db_to_linear(-3.7)) + 3.7).abs() < 1e-12);
    }
}
