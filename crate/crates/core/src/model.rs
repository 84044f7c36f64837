//! Network description, single-tier stochastic equivalence, association
//! probabilities and the distance laws shared by the closed forms and the
//! simulator.
//!
//! Powers are linear everywhere in this module. Tier indices are 0-based.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{db_to_linear, ln_gamma};

/// One tier of access points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierParams {
    /// AP density per m².
    pub lambda: f64,
    /// Downlink transmit power (linear, relative units).
    pub p_dl: f64,
    /// Uplink transmit power of users served by this tier.
    pub q_ul: f64,
    /// Range-expansion bias, `>= 1`.
    #[serde(default = "unit_bias")]
    pub bias: f64,
}

fn unit_bias() -> f64 {
    1.0
}

impl TierParams {
    pub fn new(lambda: f64, p_dl: f64, q_ul: f64) -> Self {
        Self {
            lambda,
            p_dl,
            q_ul,
            bias: 1.0,
        }
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.lambda) {
            return Err(Error::config(format!("tier density must be positive, got {}", self.lambda)));
        }
        if !ok(self.p_dl) {
            return Err(Error::config(format!("DL power must be positive, got {}", self.p_dl)));
        }
        if !ok(self.q_ul) {
            return Err(Error::config(format!("UL power must be positive, got {}", self.q_ul)));
        }
        if !(self.bias.is_finite() && self.bias >= 1.0) {
            return Err(Error::config(format!("bias must be >= 1, got {}", self.bias)));
        }
        Ok(())
    }
}

/// A K-tier deployment with a common path-loss exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub alpha: f64,
    /// Total user density per m².
    pub mu: f64,
    /// Density of users active on the tagged channel per m².
    pub mu_j: f64,
    pub tiers: Vec<TierParams>,
}

impl NetworkConfig {
    pub fn new(tiers: Vec<TierParams>, alpha: f64, mu: f64, mu_j: f64) -> Result<Self> {
        let cfg = Self { alpha, mu, mu_j, tiers };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Single tier with unit powers; `mu = mu_j`.
    pub fn single_tier(lambda: f64, mu_j: f64, alpha: f64) -> Result<Self> {
        Self::new(vec![TierParams::new(lambda, 1.0, 1.0)], alpha, mu_j, mu_j)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tiers.is_empty() {
            return Err(Error::config("at least one tier is required"));
        }
        if !(self.alpha.is_finite() && self.alpha > 2.0) {
            return Err(Error::config(format!("alpha must exceed 2, got {}", self.alpha)));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::config(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.mu_j.is_finite() && self.mu_j > 0.0) {
            return Err(Error::config(format!("mu_j must be positive, got {}", self.mu_j)));
        }
        if self.mu_j > self.mu * (1.0 + 1e-12) {
            return Err(Error::config(format!(
                "mu_j ({}) cannot exceed mu ({})",
                self.mu_j, self.mu
            )));
        }
        for (k, t) in self.tiers.iter().enumerate() {
            t.validate().map_err(|e| Error::config(format!("tier {}: {e}", k + 1)))?;
        }
        Ok(())
    }

    pub fn num_tiers(&self) -> usize {
        self.tiers.len()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: NetworkConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    fn check_tier(&self, k: usize) -> Result<()> {
        if k < self.tiers.len() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "tier index {k} out of range for a {}-tier network",
                self.tiers.len()
            )))
        }
    }

    fn delta(&self) -> f64 {
        2.0 / self.alpha
    }
}

/// `mu_j` from a channel count: `mu / floor(W/B)`.
pub fn mu_per_channel(mu: f64, channels: u32) -> Result<f64> {
    if channels == 0 {
        return Err(Error::config("channel count must be >= 1"));
    }
    Ok(mu / channels as f64)
}

/// SIR threshold and cancellation budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SicConfig {
    /// Linear SIR threshold.
    pub eta_t: f64,
    /// Maximum number of cancellations.
    pub n_max: usize,
}

impl SicConfig {
    pub fn new(eta_t: f64, n_max: usize) -> Result<Self> {
        if !(eta_t.is_finite() && eta_t > 0.0) {
            return Err(Error::config(format!("SIR threshold must be positive, got {eta_t}")));
        }
        Ok(Self { eta_t, n_max })
    }

    pub fn from_db(eta_db: f64, n_max: usize) -> Result<Self> {
        Self::new(db_to_linear(eta_db), n_max)
    }
}

/// Single-tier, unit-power network equivalent to a K-tier deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentNetwork {
    /// `Σ_k λ_k P_k^{2/α}`.
    pub lambda_eq: f64,
    /// Power-weighted user densities `μ̃_k = Σ_i μ_i (Q_i/Q_k)^{2/α}`, one per
    /// reference tier, with `μ_i = p_{a,i}·μ`.
    pub mu_tilde: Vec<f64>,
}

pub fn equivalent_density(cfg: &NetworkConfig) -> EquivalentNetwork {
    let d = cfg.delta();
    let lambda_eq = cfg.tiers.iter().map(|t| t.lambda * t.p_dl.powf(d)).sum();
    let mu_i = tier_user_densities(cfg);
    let q: Vec<f64> = cfg.tiers.iter().map(|t| t.q_ul).collect();
    let mu_tilde = (0..cfg.tiers.len())
        .map(|k| weighted_user_density(&q, &mu_i, cfg.alpha, k))
        .collect();
    EquivalentNetwork { lambda_eq, mu_tilde }
}

/// `Σ_i μ_i (Q_i/Q_k)^{2/α}` for explicit per-tier user densities.
pub fn weighted_user_density(q_ul: &[f64], mu: &[f64], alpha: f64, k: usize) -> f64 {
    let d = 2.0 / alpha;
    q_ul.iter()
        .zip(mu)
        .map(|(&qi, &mi)| mi * (qi / q_ul[k]).powf(d))
        .sum()
}

/// Per-tier user densities `μ_k = p_{a,k}·μ` under max-average-power association.
pub fn tier_user_densities(cfg: &NetworkConfig) -> Vec<f64> {
    (0..cfg.tiers.len())
        .map(|k| association_weighted(cfg, k, |t| t.p_dl) * cfg.mu)
        .collect()
}

fn association_weighted(cfg: &NetworkConfig, k: usize, weight: impl Fn(&TierParams) -> f64) -> f64 {
    let d = cfg.delta();
    let wk = weight(&cfg.tiers[k]);
    let denom: f64 = cfg
        .tiers
        .iter()
        .map(|t| t.lambda * (weight(t) / wk).powf(d))
        .sum();
    cfg.tiers[k].lambda / denom
}

/// `λ_k / Σ_i λ_i (P_i/P_k)^{2/α}`.
pub fn association_prob_max_power(cfg: &NetworkConfig, k: usize) -> Result<f64> {
    cfg.check_tier(k)?;
    Ok(association_weighted(cfg, k, |t| t.p_dl))
}

/// Biased association probability with weights `(P_i b_i / P_k b_k)^{2/α}`.
pub fn biased_association_prob(cfg: &NetworkConfig, k: usize) -> Result<f64> {
    cfg.check_tier(k)?;
    Ok(association_weighted(cfg, k, |t| t.p_dl * t.bias))
}

/// Probability that a user lies in the range-expanded area of tier `k`:
/// `p_{a,k}(B) − p_{a,k}(B | b_k = 1)`, written as
/// `1 − Σ_{i≠k} p_{a,i}(B) − p_{a,k}(B | b_k = 1)`.
pub fn rea_association_prob(cfg: &NetworkConfig, k: usize) -> Result<f64> {
    cfg.check_tier(k)?;
    let others: f64 = (0..cfg.tiers.len())
        .filter(|&i| i != k)
        .map(|i| association_weighted(cfg, i, |t| t.p_dl * t.bias))
        .sum();
    let mut unbiased_k = cfg.clone();
    unbiased_k.tiers[k].bias = 1.0;
    let own = association_weighted(&unbiased_k, k, |t| t.p_dl * t.bias);
    Ok((1.0 - others - own).max(0.0))
}

/// Nearest-AP distance density `2πλu·exp(−λπu²)`.
pub fn nearest_ap_distance_pdf(lambda_eq: f64, u: f64) -> f64 {
    if u < 0.0 {
        return 0.0;
    }
    2.0 * PI * lambda_eq * u * (-lambda_eq * PI * u * u).exp()
}

/// Density of the distance to the `n`-th nearest point of a PPP(`mu_j`):
/// `exp(−μπr²)·2(μπr²)ⁿ / (r·Γ(n))`.
pub fn nth_interferer_distance_pdf(mu_j: f64, n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("interferer order must be >= 1"));
    }
    if r <= 0.0 {
        return Ok(0.0);
    }
    let x = mu_j * PI * r * r;
    let nf = n as f64;
    let log = -x + nf * x.ln() + (2.0f64).ln() - r.ln() - ln_gamma(nf);
    Ok(log.exp())
}

/// Radius of the disk that holds `n` interferers on average: `√(n/(μπ))`.
pub fn cancellation_radius(mu_j: f64, n: usize) -> f64 {
    (n as f64 / (mu_j * PI)).sqrt()
}

/// Serving-distance density of users in the range-expanded area of tier `k`.
pub fn rea_distance_pdf(cfg: &NetworkConfig, k: usize, x: f64) -> Result<f64> {
    let p_re = rea_association_prob(cfg, k)?;
    if p_re <= 0.0 {
        return Err(Error::domain(format!(
            "tier {} has an empty range-expanded area (all biases equal)",
            k + 1
        )));
    }
    Ok(rea_distance_unnormalised(cfg, k, x) / p_re)
}

/// `2πλ_k x·[exp(−πΣλ_i(P_i b_i/P_k b_k)^{2/α}x²) − exp(−πΣλ_i(P_i/P_k)^{2/α}x²)]`.
pub fn rea_distance_unnormalised(cfg: &NetworkConfig, k: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let (biased, unbiased) = rea_exponents(cfg, k);
    2.0 * PI * cfg.tiers[k].lambda * x * ((-PI * biased * x * x).exp() - (-PI * unbiased * x * x).exp())
}

/// `(Σ_i λ_i (P_i b_i / P_k b_k)^{2/α}, Σ_i λ_i (P_i/P_k)^{2/α})`.
pub(crate) fn rea_exponents(cfg: &NetworkConfig, k: usize) -> (f64, f64) {
    let d = cfg.delta();
    let tk = &cfg.tiers[k];
    let biased = cfg
        .tiers
        .iter()
        .map(|t| t.lambda * ((t.p_dl * t.bias) / (tk.p_dl * tk.bias)).powf(d))
        .sum();
    let unbiased = cfg
        .tiers
        .iter()
        .map(|t| t.lambda * (t.p_dl / tk.p_dl).powf(d))
        .sum();
    (biased, unbiased)
}
