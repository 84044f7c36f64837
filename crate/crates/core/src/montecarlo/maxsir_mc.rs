//! Uplink with the typical user served by whichever AP of any tier sees the
//! highest instantaneous SIR, optionally after cancellation at that AP.

use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::model::{equivalent_density, tier_user_densities, NetworkConfig, SicConfig};
use crate::numerics::c_zero;

use super::chain::{fading_key, margins_from_top, ordered_top};
use super::{check_trials, map_trials, path_gain, sample_ppp, trial_rng, Estimate, McOptions, Ordering};

/// Ignored mass of the per-tier candidate region.
const CANDIDATE_TAIL: f64 = 1e-7;

/// Radius beyond which a tier-`k` AP decodes the typical user with total
/// probability below [`CANDIDATE_TAIL`] for every threshold `≥ eta_min`.
fn candidate_radius(lambda_k: f64, mu_tilde_k: f64, eta_min: f64, n_max: usize, alpha: f64, c0: f64) -> f64 {
    let a = eta_min.powf(2.0 / alpha) * c0;
    let v = (((lambda_k / mu_tilde_k) / (a * CANDIDATE_TAIL)).ln().max(0.0) + n_max as f64 + 1.0) / a;
    (v / (std::f64::consts::PI * mu_tilde_k)).sqrt()
}

struct Setup {
    radii: Vec<f64>,
    mu: Vec<f64>,
    window: f64,
}

fn setup(cfg: &NetworkConfig, eta_min: f64, n_max: usize, opts: &McOptions) -> Result<Setup> {
    cfg.validate()?;
    if !(eta_min.is_finite() && eta_min > 0.0) {
        return Err(Error::domain(format!("SIR threshold must be positive, got {eta_min}")));
    }
    let c0 = c_zero(cfg.alpha)?;
    let eq = equivalent_density(cfg);
    let mu = tier_user_densities(cfg);
    let radii: Vec<f64> = cfg
        .tiers
        .iter()
        .zip(&eq.mu_tilde)
        .map(|(t, &m)| candidate_radius(t.lambda, m, eta_min, n_max, cfg.alpha, c0))
        .collect();
    let mu_total: f64 = mu.iter().sum();
    let window = opts
        .window_radius
        .unwrap_or_else(|| radii.iter().cloned().fold(0.0, f64::max) + super::default_window(mu_total));
    Ok(Setup { radii, mu, window })
}

/// Chain margins `Θ_0..Θ_{n_max}` at every candidate AP of one trial.
fn candidate_margins(cfg: &NetworkConfig, s: &Setup, n_max: usize, seed: u64, i: u64) -> Result<Vec<Vec<f64>>> {
    let alpha = cfg.alpha;
    let mut rng = trial_rng(seed, i);
    let mut fading = trial_rng(fading_key(seed), i);
    let mut candidates = Vec::new();
    for (k, t) in cfg.tiers.iter().enumerate() {
        for p in sample_ppp(t.lambda, s.radii[k], &mut rng)? {
            candidates.push((p, t.q_ul));
        }
    }
    let mut users = Vec::new();
    for (k, t) in cfg.tiers.iter().enumerate() {
        for p in sample_ppp(s.mu[k], s.window, &mut rng)? {
            users.push((p, t.q_ul));
        }
    }
    let mut powers = Vec::with_capacity(users.len());
    let mut out = Vec::with_capacity(candidates.len());
    for (ap, q) in &candidates {
        let h: f64 = Exp1.sample(&mut fading);
        let signal = q * h * path_gain(ap.norm2(), alpha);
        powers.clear();
        for (u, qu) in &users {
            let g: f64 = Exp1.sample(&mut fading);
            powers.push(qu * g * path_gain(u.dist2(ap), alpha));
        }
        let (top, rest) = ordered_top(&powers, n_max, Ordering::PowerWithFading);
        out.push(margins_from_top(signal, &top, rest, n_max));
    }
    Ok(out)
}

/// Per-trial best margins `max_x Θ_N(x)` over candidate APs `x`, for
/// `N = 0..=n_max`. The user succeeds at `η ≥ eta_min` with budget `N` iff the
/// entry is `≥ η`. Interferers are the other users of every tier at their
/// tier's uplink power; fading is independent per link.
pub fn max_inst_sir_margins(
    cfg: &NetworkConfig,
    eta_min: f64,
    n_max: usize,
    trials: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<Vec<Vec<f64>>> {
    check_trials(trials, 1)?;
    let s = setup(cfg, eta_min, n_max, opts)?;
    let out = map_trials(0, trials, opts.threads, |i| -> Result<Vec<f64>> {
        let mut best = vec![f64::NEG_INFINITY; n_max + 1];
        for m in candidate_margins(cfg, &s, n_max, seed, i)? {
            for (b, v) in best.iter_mut().zip(m) {
                *b = b.max(v);
            }
        }
        Ok(best)
    })?;
    out.into_iter().collect()
}

/// Fraction of trials where some AP decodes the user within the budget.
pub fn simulate_max_inst_sir(cfg: &NetworkConfig, sic: &SicConfig, trials: u64, seed: u64, opts: &McOptions) -> Result<Estimate> {
    let margins = max_inst_sir_margins(cfg, sic.eta_t, sic.n_max, trials, seed, opts)?;
    let hits = margins.iter().filter(|m| m[sic.n_max] >= sic.eta_t).count() as u64;
    Ok(Estimate::from_counts(hits, trials, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::outage_max_inst_sir;
    use crate::model::TierParams;

    #[test]
    fn single_tier_success_near_independent_form() {
        // Shared interferers make the per-AP events positively correlated, so
        // the sampled success sits a little below the independent-AP form.
        let cfg = NetworkConfig::single_tier(1e-4, 1e-4, 4.0).unwrap();
        let sic = SicConfig::new(2.0, 0).unwrap();
        let e = simulate_max_inst_sir(&cfg, &sic, 4000, 1, &McOptions::default()).unwrap();
        let exact = 1.0 - outage_max_inst_sir(2.0, &cfg).unwrap();
        assert!((e.mean - exact).abs() < 0.04, "{e:?} vs {exact}");
    }

    #[test]
    fn mean_decoding_ap_count_is_exact() {
        // Campbell: E[#APs with SIR >= η] = Σ_k λ_k/(μ̃_k η^{2/α} C(0)),
        // whatever the correlation between APs.
        let cfg = NetworkConfig::new(
            vec![TierParams::new(1e-5, 10.0, 10.0), TierParams::new(1e-4, 1.0, 1.0)],
            4.0,
            1e-4,
            1e-4,
        )
        .unwrap();
        let eta = 2.0f64;
        let s = setup(&cfg, eta, 0, &McOptions::default()).unwrap();
        let counts: Vec<f64> = (0..20_000)
            .map(|i| {
                let m = candidate_margins(&cfg, &s, 0, 5, i).unwrap();
                m.iter().filter(|v| v[0] >= eta).count() as f64
            })
            .collect();
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / n;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let eq = equivalent_density(&cfg);
        let c0 = c_zero(4.0).unwrap();
        let exact: f64 = cfg
            .tiers
            .iter()
            .zip(&eq.mu_tilde)
            .map(|(t, m)| t.lambda / (m * eta.sqrt() * c0))
            .sum();
        assert!((mean - exact).abs() < 3.0 * (var / n).sqrt(), "{mean} vs {exact}");
    }

    #[test]
    fn margins_are_monotone_in_budget() {
        let cfg = NetworkConfig::new(
            vec![TierParams::new(1e-5, 10.0, 10.0), TierParams::new(1e-4, 1.0, 1.0)],
            4.0,
            1e-4,
            1e-4,
        )
        .unwrap();
        let m = max_inst_sir_margins(&cfg, 1.0, 3, 300, 2, &McOptions::default()).unwrap();
        for row in &m {
            assert!(row.windows(2).all(|w| w[0] <= w[1]));
        }
        let huge = SicConfig::new(1e9, 1).unwrap();
        assert!(simulate_max_inst_sir(&cfg, &huge, 300, 3, &McOptions::default()).unwrap().mean < 0.01);
    }
}
