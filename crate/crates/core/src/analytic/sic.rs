//! Decoding and cancellation probabilities of the SIC chain for a typical
//! uplink receiver in the single-tier equivalent network.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{c_integral, c_zero, gamma, integrate_to_infinity, QuadratureSettings};

fn check_common(eta_t: f64, alpha: f64) -> Result<()> {
    if !(eta_t.is_finite() && eta_t > 0.0) {
        return Err(Error::domain(format!("SIR threshold must be positive, got {eta_t}")));
    }
    if !(alpha.is_finite() && alpha > 2.0) {
        return Err(Error::domain(format!("alpha must exceed 2, got {alpha}")));
    }
    Ok(())
}

fn check_density(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {v}")))
    }
}

/// Success probability without cancellation:
/// `λ_eq / (λ_eq + μ_j η^{2/α} C(0, α))`.
pub fn ps_plain(eta_t: f64, lambda_eq: f64, mu_j: f64, alpha: f64) -> Result<f64> {
    check_common(eta_t, alpha)?;
    check_density("lambda_eq", lambda_eq)?;
    check_density("mu_j", mu_j)?;
    let c0 = c_zero(alpha)?;
    Ok(lambda_eq / (lambda_eq + mu_j * eta_t.powf(2.0 / alpha) * c0))
}

/// Options for [`ps_ic_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IcOptions {
    /// Divide by the serving-distance mass beyond the cancellation radius,
    /// `exp(−λ_eq π R_{I,n}²)`. Off by default.
    pub renormalize_serving_distance: bool,
    pub quadrature: QuadratureSettings,
}

/// Decoding probability after `n` cancellations with the interferers removed
/// inside the cancellation radius `R_{I,n}` and the serving distance
/// integrated from `R_{I,n}`.
pub fn ps_ic(eta_t: f64, n: usize, lambda_eq: f64, mu_j: f64, alpha: f64) -> Result<f64> {
    ps_ic_with(eta_t, n, lambda_eq, mu_j, alpha, &IcOptions::default())
}

pub fn ps_ic_with(
    eta_t: f64,
    n: usize,
    lambda_eq: f64,
    mu_j: f64,
    alpha: f64,
    opts: &IcOptions,
) -> Result<f64> {
    if n == 0 {
        return ps_plain(eta_t, lambda_eq, mu_j, alpha);
    }
    check_common(eta_t, alpha)?;
    check_density("lambda_eq", lambda_eq)?;
    check_density("mu_j", mu_j)?;
    // Dimensionless variable w = λ_eq π u²; the lower limit is λ_eq π R_{I,n}².
    let ratio = mu_j / lambda_eq;
    let w0 = n as f64 / ratio;
    let eta_d = eta_t.powf(2.0 / alpha);
    let integrand = |t: f64| {
        let w = w0 + t;
        let c = c_integral(w0 / (eta_d * w), alpha).unwrap_or(f64::NAN);
        (-ratio * eta_d * w * c - t).exp()
    };
    // The e^{−w0} factor is pulled out so the integrand stays O(1).
    let inner = integrate_to_infinity(integrand, 0.0, &opts.quadrature)?;
    let value = if opts.renormalize_serving_distance {
        inner
    } else {
        inner * (-w0).exp()
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Probability of decoding the `n`-th strongest interferer with the `n − 1`
/// stronger ones removed: `(1 + η^{2/α} C(η^{−2/α}, α))^{−n}`.
pub fn ps_can(eta_t: f64, n: usize, alpha: f64) -> Result<f64> {
    check_common(eta_t, alpha)?;
    let d = 2.0 / alpha;
    let per = 1.0 / (1.0 + eta_t.powf(d) * c_integral(eta_t.powf(-d), alpha)?);
    Ok(per.powi(n as i32))
}

/// Truncated-stable approximation of [`ps_can`] for `α = 4`:
/// `(√(9/4 + 3η) − 1/2)^{−n}`.
pub fn ps_can_tsd(eta_t: f64, n: usize) -> Result<f64> {
    if !(eta_t.is_finite() && eta_t >= 0.0) {
        return Err(Error::domain(format!("SIR threshold must be >= 0, got {eta_t}")));
    }
    let base = (2.25 + 3.0 * eta_t).sqrt() - 0.5;
    Ok(base.powi(-(n as i32)))
}

/// TSD conditional cancel probability for an interferer at distance `r`
/// (`α = 4`, unit power, Rayleigh fading).
pub fn tsd_conditional_cancel(eta_t: f64, mu_j: f64, r: f64) -> f64 {
    (-1.5 * mu_j * PI * r * r * ((1.0 + 4.0 * eta_t / 3.0).sqrt() - 1.0)).exp()
}

/// `k`-th cumulant of the interference from a PPP(`mu_j`) of transmitters with
/// power `q` outside radius `d_min`: `q^k·2πμ/(kα−2)·d_min^{2−kα}·E[h^k]`.
pub fn tsd_cumulant(k: u32, q: f64, mu_j: f64, d_min: f64, alpha: f64, fading_moment: f64) -> Result<f64> {
    let ka = k as f64 * alpha;
    if k == 0 || ka <= 2.0 {
        return Err(Error::domain(format!("cumulant order requires k·alpha > 2, got k={k}, alpha={alpha}")));
    }
    if !(d_min > 0.0 && d_min.is_finite()) {
        return Err(Error::domain(format!("d_min must be positive, got {d_min}")));
    }
    check_density("mu_j", mu_j)?;
    check_density("q", q)?;
    Ok(q.powi(k as i32) * 2.0 * PI * mu_j / (ka - 2.0) * d_min.powf(2.0 - ka) * fading_moment)
}

/// Parameters of a tilted stable law matched to the first two cumulants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TsdParams {
    /// Characteristic exponent `2/α`.
    pub alpha_i: f64,
    pub gamma_prime: f64,
    /// Tilt.
    pub g: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl TsdParams {
    /// Rayleigh-faded interferers (`E[h^k] = k!`).
    pub fn rayleigh(q: f64, mu_j: f64, d_min: f64, alpha: f64) -> Result<Self> {
        let kappa1 = tsd_cumulant(1, q, mu_j, d_min, alpha, 1.0)?;
        let kappa2 = tsd_cumulant(2, q, mu_j, d_min, alpha, 2.0)?;
        Self::from_cumulants(kappa1, kappa2, alpha)
    }

    pub fn from_cumulants(kappa1: f64, kappa2: f64, alpha: f64) -> Result<Self> {
        check_common(1.0, alpha)?;
        let alpha_i = 2.0 / alpha;
        let g = kappa1 * (1.0 - alpha_i) / kappa2;
        let gamma_prime = -kappa1 / (gamma(-alpha_i) * alpha_i * g.powf(alpha_i - 1.0));
        Ok(Self {
            alpha_i,
            gamma_prime,
            g,
            kappa1,
            kappa2,
        })
    }

    /// `exp(γ' Γ(−α_I) [(g + s)^{α_I} − g^{α_I}])`.
    pub fn laplace(&self, s: f64) -> f64 {
        let a = self.alpha_i;
        (self.gamma_prime * gamma(-a) * ((self.g + s).powf(a) - self.g.powf(a))).exp()
    }

    /// Cumulants implied by the fitted law, `(κ1, κ2)`.
    pub fn implied_cumulants(&self) -> (f64, f64) {
        let a = self.alpha_i;
        let c = self.gamma_prime * gamma(-a);
        let k1 = -c * a * self.g.powf(a - 1.0);
        let k2 = c * a * (a - 1.0) * self.g.powf(a - 2.0);
        (k1, k2)
    }
}

/// Excess kurtosis of the residual interference after `n` cancellations:
/// `6(α−1)² / ((2α−1)(n−1))`.
pub fn kurtosis_after_cancellation(alpha: f64, n: usize) -> Result<f64> {
    check_common(1.0, alpha)?;
    if n < 2 {
        return Err(Error::domain(format!("kurtosis needs n >= 2, got {n}")));
    }
    Ok(6.0 * (alpha - 1.0).powi(2) / (2.0 * alpha - 1.0) / (n as f64 - 1.0))
}

/// One term of the cancellation chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SicLevel {
    /// `Π_{n<i} (1 − P_s,IC(n))`.
    pub chain_outage_product: f64,
    /// `Π_{n=1}^{i} P_s,can(n)`.
    pub cancel_product: f64,
    /// `P_s,IC(i)`.
    pub decode_after_i: f64,
    pub level_contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SicGainBreakdown {
    pub ps_no_ic: f64,
    pub per_level: Vec<SicLevel>,
    pub ps_sic_total: f64,
}

impl SicGainBreakdown {
    /// Total after the first `n` levels.
    pub fn total_up_to(&self, n: usize) -> f64 {
        self.ps_no_ic
            + self
                .per_level
                .iter()
                .take(n)
                .map(|l| l.level_contribution)
                .sum::<f64>()
    }
}

/// Success probability with up to `n_max` cancellations, term by term.
pub fn ps_sic(eta_t: f64, n_max: usize, lambda_eq: f64, mu_j: f64, alpha: f64) -> Result<SicGainBreakdown> {
    ps_sic_with(eta_t, n_max, lambda_eq, mu_j, alpha, &IcOptions::default())
}

pub fn ps_sic_with(
    eta_t: f64,
    n_max: usize,
    lambda_eq: f64,
    mu_j: f64,
    alpha: f64,
    opts: &IcOptions,
) -> Result<SicGainBreakdown> {
    let ps0 = ps_plain(eta_t, lambda_eq, mu_j, alpha)?;
    let can1 = ps_can(eta_t, 1, alpha)?;
    let mut outage = 1.0 - ps0;
    let mut cancel = 1.0;
    let mut total = ps0;
    let mut per_level = Vec::with_capacity(n_max);
    for i in 1..=n_max {
        cancel *= can1.powi(i as i32);
        let decode = ps_ic_with(eta_t, i, lambda_eq, mu_j, alpha, opts)?;
        let contribution = outage * cancel * decode;
        per_level.push(SicLevel {
            chain_outage_product: outage,
            cancel_product: cancel,
            decode_after_i: decode,
            level_contribution: contribution,
        });
        total += contribution;
        outage *= 1.0 - decode;
    }
    Ok(SicGainBreakdown {
        ps_no_ic: ps0,
        per_level,
        ps_sic_total: total.min(1.0),
    })
}
