//! Uplink outage and success when the user picks the AP with the highest
//! instantaneous SIR, treating the per-AP SIRs as independent.

use crate::error::{Error, Result};
use crate::model::{equivalent_density, NetworkConfig};
use crate::numerics::{c_integral, c_zero, integrate_to_infinity, QuadratureSettings};

use super::sic::ps_can;

fn check_eta(eta_t: f64) -> Result<()> {
    if eta_t.is_finite() && eta_t > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("SIR threshold must be positive, got {eta_t}")))
    }
}

/// `Σ_k λ_k / μ̃_k`, the AP-to-weighted-user density ratio summed over tiers.
fn density_ratio(cfg: &NetworkConfig) -> f64 {
    let eq = equivalent_density(cfg);
    cfg.tiers
        .iter()
        .zip(&eq.mu_tilde)
        .map(|(t, m)| t.lambda / m)
        .sum()
}

/// `exp(−Σ_j λ_j Q_j^{2/α} / (η^{2/α} C(0,α) Σ_i μ_i Q_i^{2/α}))` with
/// `μ_i = p_{a,i} μ`.
pub fn outage_max_inst_sir(eta_t: f64, cfg: &NetworkConfig) -> Result<f64> {
    check_eta(eta_t)?;
    cfg.validate()?;
    let c0 = c_zero(cfg.alpha)?;
    let s = density_ratio(cfg);
    Ok((-s / (eta_t.powf(2.0 / cfg.alpha) * c0)).exp())
}

/// `∫_0^∞ P_gain(v) dv` in the variable `v = π μ̃_k u²`, in which the gain
/// integrand is the same for every reference tier.
pub fn max_inst_sir_gain_integral(eta_t: f64, n_max: usize, alpha: f64) -> Result<f64> {
    if n_max == 0 {
        return Ok(0.0);
    }
    let d = 2.0 / alpha;
    let eta_d = eta_t.powf(d);
    let can1 = ps_can(eta_t, 1, alpha)?;
    let gain = |v: f64| -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let decode = |n: usize| -> f64 {
            let b = n as f64 / (eta_d * v);
            (-eta_d * v * c_integral(b, alpha).unwrap_or(f64::NAN)).exp()
        };
        let mut outage = 1.0 - decode(0);
        let mut cancel = 1.0;
        let mut total = 0.0;
        for i in 1..=n_max {
            cancel *= can1.powi(i as i32);
            let p = decode(i);
            total += outage * cancel * p;
            outage *= 1.0 - p;
        }
        total
    };
    integrate_to_infinity(gain, 0.0, &QuadratureSettings::new(1e-10, 1e-13, 4000)?)
}

/// `1 − P_out · Π_k exp(−2πλ_k ∫ P_gain,k(u) u du)`, with `R_{I,n}` of each
/// tier-`k` factor taken from that tier's `μ̃_k`.
pub fn ps_sic_max_inst_sir(eta_t: f64, n_max: usize, cfg: &NetworkConfig) -> Result<f64> {
    let p_out = outage_max_inst_sir(eta_t, cfg)?;
    let g = max_inst_sir_gain_integral(eta_t, n_max, cfg.alpha)?;
    let s = density_ratio(cfg);
    Ok((1.0 - p_out * (-s * g).exp()).clamp(0.0, 1.0))
}
