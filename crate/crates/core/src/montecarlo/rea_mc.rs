//! Downlink users in the range-expanded area of a biased tier.

use std::f64::consts::PI;

use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{equivalent_density, rea_association_prob, NetworkConfig};

use super::chain::fading_key;
use super::{check_trials, collect_accepted, path_gain, sample_radial, trial_rng, Estimate, McOptions};

/// SIRs of one range-expanded user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReaSample {
    /// Distance to the serving AP in metres.
    pub distance: f64,
    /// SIR with every other AP interfering.
    pub sir: f64,
    /// SIR after the AP with the strongest unbiased mean power is removed.
    pub sir_cancelled: f64,
}

impl ReaSample {
    pub fn succeeds(&self, eta_t: f64, cancelled: u8) -> bool {
        if cancelled == 0 {
            self.sir >= eta_t
        } else {
            self.sir_cancelled >= eta_t
        }
    }
}

/// The tier with the largest bias, provided its range-expanded area is not
/// empty.
pub fn rea_tier(cfg: &NetworkConfig) -> Result<usize> {
    cfg.validate()?;
    let k = (0..cfg.tiers.len())
        .max_by(|&a, &b| cfg.tiers[a].bias.total_cmp(&cfg.tiers[b].bias).then(b.cmp(&a)))
        .ok_or_else(|| Error::config("network has no tiers"))?;
    if rea_association_prob(cfg, k)? <= 0.0 {
        return Err(Error::domain("no range-expanded area: every tier has the same bias"));
    }
    Ok(k)
}

/// Samples users until `trials` of them fall in the range-expanded area of
/// tier `k`, i.e. their biased winner is tier `k` while the strongest
/// unbiased AP belongs to another tier.
pub fn rea_sirs(cfg: &NetworkConfig, k: usize, trials: u64, seed: u64, opts: &McOptions) -> Result<Vec<ReaSample>> {
    cfg.validate()?;
    check_trials(trials, 1)?;
    let p_re = rea_association_prob(cfg, k)?;
    if p_re <= 0.0 {
        return Err(Error::domain(format!("tier {} has an empty range-expanded area", k + 1)));
    }
    let alpha = cfg.alpha;
    let window = opts
        .window_radius
        .unwrap_or_else(|| 40.0 / (PI * equivalent_density(cfg).lambda_eq).sqrt());
    let max_attempts = ((trials as f64 / p_re) * 20.0) as u64 + 100_000;

    collect_accepted(trials, max_attempts, opts.threads, |i| -> Option<Result<ReaSample>> {
        let mut rng = trial_rng(seed, i);
        // Nearest AP of each tier; infinite when the tier is empty in the window.
        let nearest: Vec<f64> = cfg
            .tiers
            .iter()
            .map(|t| {
                let e: f64 = Exp1.sample(&mut rng);
                let r2 = e / (PI * t.lambda);
                if r2 <= window * window {
                    r2
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let score = |j: usize, biased: bool| {
            let t = &cfg.tiers[j];
            let w = if biased { t.p_dl * t.bias } else { t.p_dl };
            w * path_gain(nearest[j], alpha)
        };
        let argmax = |biased: bool| {
            (0..nearest.len())
                .max_by(|&a, &b| score(a, biased).total_cmp(&score(b, biased)).then(b.cmp(&a)))
                .unwrap()
        };
        let unbiased = argmax(false);
        if argmax(true) != k || unbiased == k || !nearest[k].is_finite() {
            return None;
        }
        Some((|| {
            let mut fading = trial_rng(fading_key(seed), i);
            let mut rest = 0.0;
            let mut strongest = 0.0;
            for (j, t) in cfg.tiers.iter().enumerate() {
                if !nearest[j].is_finite() {
                    continue;
                }
                if j != k {
                    let g: f64 = Exp1.sample(&mut fading);
                    let x = g * t.p_dl * path_gain(nearest[j], alpha);
                    if j == unbiased {
                        strongest = x;
                    } else {
                        rest += x;
                    }
                }
                for (r2, _) in sample_radial(t.lambda, nearest[j].sqrt(), window, &mut rng)? {
                    let g: f64 = Exp1.sample(&mut fading);
                    rest += g * t.p_dl * path_gain(r2, alpha);
                }
            }
            let h: f64 = Exp1.sample(&mut fading);
            let signal = h * cfg.tiers[k].p_dl * path_gain(nearest[k], alpha);
            Ok(ReaSample {
                distance: nearest[k].sqrt(),
                sir: signal / (rest + strongest),
                sir_cancelled: signal / rest,
            })
        })())
    })?
    .into_iter()
    .collect()
}

/// Success of range-expanded users in the most biased tier, with
/// `cancelled = 1` removing the strongest unbiased AP before decoding.
pub fn simulate_rea(cfg: &NetworkConfig, eta_t: f64, cancelled: u8, trials: u64, seed: u64, opts: &McOptions) -> Result<Estimate> {
    if cancelled > 1 {
        return Err(Error::domain(format!("cancelled must be 0 or 1, got {cancelled}")));
    }
    let k = rea_tier(cfg)?;
    let samples = rea_sirs(cfg, k, trials, seed, opts)?;
    let hits = samples.iter().filter(|s| s.succeeds(eta_t, cancelled)).count() as u64;
    Ok(Estimate::from_counts(hits, trials, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{rea_distance_pdf, TierParams};

    fn fig6(b: f64) -> NetworkConfig {
        NetworkConfig::new(
            vec![
                TierParams::new(1e-5, 10.0, 10.0),
                TierParams::new(1e-4, 1.0, 1.0).with_bias(b),
            ],
            4.0,
            1e-4,
            1e-4,
        )
        .unwrap()
    }

    #[test]
    fn degenerate_biases_error() {
        assert!(matches!(rea_tier(&fig6(1.0)), Err(Error::Domain(_))));
        assert!(simulate_rea(&fig6(1.0), 1.0, 0, 100, 1, &McOptions::default()).is_err());
        assert_eq!(rea_tier(&fig6(5.0)).unwrap(), 1);
    }

    #[test]
    fn acceptance_rate_matches_rea_probability() {
        let cfg = fig6(5.0);
        let p = rea_association_prob(&cfg, 1).unwrap();
        let n = 200_000u64;
        let hits = (0..n)
            .filter(|&i| {
                let mut rng = trial_rng(9, i);
                let x: Vec<f64> = cfg
                    .tiers
                    .iter()
                    .map(|t| { let e: f64 = Exp1.sample(&mut rng); e } / (PI * t.lambda))
                    .collect();
                let s = |j: usize, b: bool| {
                    let t = &cfg.tiers[j];
                    (if b { t.p_dl * t.bias } else { t.p_dl }) / (x[j] * x[j])
                };
                s(1, true) > s(0, true) && s(0, false) > s(1, false)
            })
            .count() as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits / n as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn distances_follow_rea_law_and_cancel_helps() {
        let cfg = fig6(5.0);
        let samples = rea_sirs(&cfg, 1, 20_000, 3, &McOptions::default()).unwrap();
        assert!(samples.iter().all(|s| s.sir_cancelled >= s.sir));
        // Compare the mean serving distance with the REA distance density.
        let mean: f64 = samples.iter().map(|s| s.distance).sum::<f64>() / samples.len() as f64;
        let f = |x: f64| x * rea_distance_pdf(&cfg, 1, x).unwrap();
        let exact = crate::numerics::integrate_to_infinity(f, 0.0, &Default::default()).unwrap();
        let sd = (samples.iter().map(|s| (s.distance - mean).powi(2)).sum::<f64>() / samples.len() as f64).sqrt();
        assert!((mean - exact).abs() < 4.0 * sd / (samples.len() as f64).sqrt(), "{mean} vs {exact}");
    }
}
