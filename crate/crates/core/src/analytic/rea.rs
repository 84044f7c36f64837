//! Downlink success of users in the range-expanded area of a tier, with and
//! without cancelling the strongest unbiased AP.

use crate::error::{Error, Result};
use crate::model::{rea_association_prob, NetworkConfig};
use crate::numerics::c_integral;

/// Success probability of a user in the range-expanded area of tier `k`.
///
/// `cancelled = 0`: tier-`i` interferers are excluded only down to the
/// biased association boundary, `C((b_i/(η b_k))^{2/α})`.
/// `cancelled = 1`: after removing the strongest unbiased AP every tier is
/// excluded down to the unbiased boundary, `C(η^{−2/α})`.
pub fn ps_ic_rea(eta_t: f64, cfg: &NetworkConfig, k: usize, cancelled: u8) -> Result<f64> {
    if !(eta_t.is_finite() && eta_t > 0.0) {
        return Err(Error::domain(format!("SIR threshold must be positive, got {eta_t}")));
    }
    if cancelled > 1 {
        return Err(Error::domain(format!("cancelled must be 0 or 1, got {cancelled}")));
    }
    cfg.validate()?;
    let p_re = rea_association_prob(cfg, k)?;
    if p_re <= 0.0 {
        return Err(Error::domain(format!(
            "tier {} has an empty range-expanded area (all biases equal)",
            k + 1
        )));
    }
    let d = 2.0 / cfg.alpha;
    let eta_d = eta_t.powf(d);
    let tk = &cfg.tiers[k];
    let mut biased = 0.0;
    let mut unbiased = 0.0;
    for t in &cfg.tiers {
        let w = (t.lambda / tk.lambda) * (t.p_dl / tk.p_dl).powf(d);
        let bias_ratio = (t.bias / tk.bias).powf(d);
        let c = if cancelled == 1 {
            c_integral(1.0 / eta_d, cfg.alpha)?
        } else {
            c_integral(bias_ratio / eta_d, cfg.alpha)?
        };
        biased += w * (eta_d * c + bias_ratio);
        unbiased += w * (eta_d * c + 1.0);
    }
    Ok(((1.0 / biased - 1.0 / unbiased) / p_re).clamp(0.0, 1.0))
}
