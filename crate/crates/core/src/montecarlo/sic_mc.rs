//! Estimators for the uplink SIC quantities on the single-tier equivalent
//! network.

use std::f64::consts::PI;

use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::model::{cancellation_radius, equivalent_density, NetworkConfig, SicConfig};

use super::chain::ordered_top;
use super::{
    check_trials, default_window, map_trials, path_gain, sample_radial, sample_sic_scene, trial_rng, Estimate,
    McOptions, Ordering,
};

/// Per-stage SIR ratios of one scene under one ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRatios {
    /// `S/I_m` for `m = 0..=n_max`.
    pub signal: Vec<f64>,
    /// `X_(m)/I_m` for `m = 1..=n_max`. Stages past the last interferer are
    /// `+∞`.
    pub cancel: Vec<f64>,
}

impl ChainRatios {
    pub fn new(signal: f64, powers: &[f64], n_max: usize, ordering: Ordering) -> Self {
        let (top, rest) = ordered_top(powers, n_max, ordering);
        let k = top.len();
        let mut suffix = vec![rest; k + 1];
        for i in (0..k).rev() {
            suffix[i] = suffix[i + 1] + top[i];
        }
        let at = |m: usize| if m <= k { suffix[m] } else { 0.0 };
        Self {
            signal: (0..=n_max).map(|m| signal / at(m)).collect(),
            cancel: (1..=n_max)
                .map(|m| if m <= k { top[m - 1] / at(m) } else { f64::INFINITY })
                .collect(),
        }
    }

    pub fn n_max(&self) -> usize {
        self.cancel.len()
    }

    /// Chain success at threshold `eta` with at most `n` cancellations.
    pub fn succeeds(&self, eta: f64, n: usize) -> bool {
        for m in 0..=n.min(self.n_max()) {
            if m > 0 && self.cancel[m - 1] < eta {
                return false;
            }
            if self.signal[m] >= eta {
                return true;
            }
        }
        false
    }

    /// The chain attempts the `n`-th cancellation (`n ≥ 1`).
    pub fn reaches(&self, eta: f64, n: usize) -> bool {
        (0..n).all(|m| self.signal[m] < eta && (m == 0 || self.cancel[m - 1] >= eta))
    }

    /// `X_(n)/I_n ≥ eta`, irrespective of the earlier stages.
    pub fn cancels(&self, eta: f64, n: usize) -> bool {
        self.cancel[n - 1] >= eta
    }
}

/// Chain ratios of one sampled scene under both orderings.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneMargins {
    pub distance: ChainRatios,
    pub power: ChainRatios,
}

impl SceneMargins {
    pub fn get(&self, ordering: Ordering) -> &ChainRatios {
        match ordering {
            Ordering::DistanceOnly => &self.distance,
            Ordering::PowerWithFading => &self.power,
        }
    }
}

fn window(opts: &McOptions, mu_j: f64) -> f64 {
    opts.window_radius.unwrap_or_else(|| default_window(mu_j))
}

/// Samples `trials` equivalent-network scenes and keeps their chain ratios up
/// to `n_max` cancellations. One batch serves every threshold and budget.
pub fn sic_scene_margins(
    cfg: &NetworkConfig,
    n_max: usize,
    trials: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<Vec<SceneMargins>> {
    cfg.validate()?;
    let lambda_eq = equivalent_density(cfg).lambda_eq;
    let (mu_j, alpha) = (cfg.mu_j, cfg.alpha);
    let w = window(opts, mu_j);
    let out = map_trials(0, trials, opts.threads, |i| {
        let scene = sample_sic_scene(lambda_eq, mu_j, w, seed, i, opts.freeze_positions)?;
        let (s, p) = (scene.signal(alpha), scene.powers(alpha));
        Ok(SceneMargins {
            distance: ChainRatios::new(s, &p, n_max, Ordering::DistanceOnly),
            power: ChainRatios::new(s, &p, n_max, Ordering::PowerWithFading),
        })
    })?;
    out.into_iter().collect()
}

fn count(samples: &[SceneMargins], pred: impl Fn(&SceneMargins) -> bool) -> u64 {
    samples.iter().filter(|s| pred(s)).count() as u64
}

/// Fraction of uplink trials that decode within the cancellation budget,
/// cancelling strongest-first.
pub fn estimate_ps_sic_mc(cfg: &NetworkConfig, sic: &SicConfig, trials: u64, seed: u64, opts: &McOptions) -> Result<Estimate> {
    check_trials(trials, 1000)?;
    let samples = sic_scene_margins(cfg, sic.n_max, trials, seed, opts)?;
    let hits = count(&samples, |s| s.power.succeeds(sic.eta_t, sic.n_max));
    Ok(Estimate::from_counts(hits, trials, seed))
}

fn check_stage(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::domain("cancellation stage must be >= 1"))
    } else {
        Ok(())
    }
}

/// Unconditional `Pr[X_(n)/I_n ≥ η]` over scenes.
pub fn estimate_ps_can_mc(
    cfg: &NetworkConfig,
    eta_t: f64,
    n: usize,
    trials: u64,
    seed: u64,
    ordering: Ordering,
    opts: &McOptions,
) -> Result<Estimate> {
    check_stage(n)?;
    check_trials(trials, 1)?;
    let samples = sic_scene_margins(cfg, n, trials, seed, opts)?;
    let hits = count(&samples, |s| s.get(ordering).cancels(eta_t, n));
    Ok(Estimate::from_counts(hits, trials, seed))
}

/// Success of the `n`-th cancellation among the trials whose chain reaches
/// stage `n`. `trials` in the result is the number of such trials.
pub fn estimate_ps_can_chain_mc(
    cfg: &NetworkConfig,
    eta_t: f64,
    n: usize,
    trials: u64,
    seed: u64,
    ordering: Ordering,
    opts: &McOptions,
) -> Result<Estimate> {
    check_stage(n)?;
    check_trials(trials, 1)?;
    let samples = sic_scene_margins(cfg, n, trials, seed, opts)?;
    let (reached, ok) = chain_counts(&samples, eta_t, n, ordering);
    Ok(Estimate::from_counts(ok, reached, seed))
}

/// `(reached, cancelled)` counts of stage `n` in a batch.
pub fn chain_counts(samples: &[SceneMargins], eta_t: f64, n: usize, ordering: Ordering) -> (u64, u64) {
    let reached: Vec<&ChainRatios> = samples
        .iter()
        .map(|s| s.get(ordering))
        .filter(|r| r.reaches(eta_t, n))
        .collect();
    let ok = reached.iter().filter(|r| r.cancels(eta_t, n)).count() as u64;
    (reached.len() as u64, ok)
}

/// Decoding after the `n` nearest interferers are removed: interferers are
/// sampled outside `R_{I,n}` only, and a serving user closer than `R_{I,n}`
/// counts as a failure.
#[allow(clippy::too_many_arguments)]
pub fn estimate_ps_ic_mc(
    eta_t: f64,
    n: usize,
    lambda_eq: f64,
    mu_j: f64,
    alpha: f64,
    trials: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<Estimate> {
    check_trials(trials, 1)?;
    let r_in = cancellation_radius(mu_j, n);
    let w = window(opts, mu_j);
    if w <= r_in {
        return Err(Error::config(format!("window {w} m does not exceed the cancellation radius {r_in} m")));
    }
    let hits = map_trials(0, trials, opts.threads, |i| -> Result<bool> {
        let mut rng = trial_rng(seed, i);
        let e: f64 = Exp1.sample(&mut rng);
        let u2 = e / (PI * lambda_eq);
        if u2 < r_in * r_in {
            return Ok(false);
        }
        let h: f64 = Exp1.sample(&mut rng);
        let signal = h * path_gain(u2, alpha);
        let interference: f64 = sample_radial(mu_j, r_in, w, &mut rng)?
            .into_iter()
            .map(|(r2, _)| {
                let g: f64 = Exp1.sample(&mut rng);
                g * path_gain(r2, alpha)
            })
            .sum();
        Ok(signal >= eta_t * interference)
    })?;
    let mut s = 0;
    for h in hits {
        s += u64::from(h?);
    }
    Ok(Estimate::from_counts(s, trials, seed))
}
