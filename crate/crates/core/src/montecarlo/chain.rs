//! One uplink receiver: scene sampling, ordered interference sums and the
//! decode/cancel event chain.

use std::f64::consts::PI;

use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NetworkConfig, SicConfig};

use super::{path_gain, sample_radial, trial_rng};

/// How the receiver ranks interferers for cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// Nearest first, fading ignored when ranking.
    DistanceOnly,
    /// Strongest received power `h·r^{−α}` first.
    PowerWithFading,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferer {
    pub x: f64,
    pub y: f64,
    pub r2: f64,
    /// Unit-mean exponential fading mark.
    pub h: f64,
}

/// Interferers around a receiver at the origin, sorted by distance, plus the
/// serving link.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledScene {
    pub interferers: Vec<Interferer>,
    pub serving_distance: f64,
    pub serving_fading: f64,
    pub window_radius: f64,
    pub rng_seed: u64,
    pub stream: u64,
}

impl SampledScene {
    /// `h·r^{−α}` for every interferer, in distance order.
    pub fn powers(&self, alpha: f64) -> Vec<f64> {
        self.interferers.iter().map(|i| i.h * path_gain(i.r2, alpha)).collect()
    }

    pub fn signal(&self, alpha: f64) -> f64 {
        self.serving_fading * path_gain(self.serving_distance * self.serving_distance, alpha)
    }
}

/// Scene for the single-tier equivalent uplink: serving distance from the
/// nearest-AP law with density `lambda_eq`, interferers a PPP(`mu_j`) in the
/// disk of radius `window`, unit powers and Rayleigh fading.
pub fn sample_sic_scene(
    lambda_eq: f64,
    mu_j: f64,
    window: f64,
    seed: u64,
    stream: u64,
    freeze_positions: bool,
) -> Result<SampledScene> {
    // Positions and fading use separate streams so that the fading of the
    // k-th nearest point does not depend on the window size.
    let mut pos_rng = trial_rng(seed, if freeze_positions { u64::MAX } else { stream });
    let mut rng = trial_rng(fading_key(seed), stream);
    let e: f64 = Exp1.sample(&mut pos_rng);
    let serving_distance = (e / (PI * lambda_eq)).sqrt();
    let pts = sample_radial(mu_j, 0.0, window, &mut pos_rng)?;
    let serving_fading: f64 = Exp1.sample(&mut rng);
    let interferers = pts
        .into_iter()
        .map(|(r2, p)| Interferer {
            x: p.x,
            y: p.y,
            r2,
            h: Exp1.sample(&mut rng),
        })
        .collect();
    Ok(SampledScene {
        interferers,
        serving_distance,
        serving_fading,
        window_radius: window,
        rng_seed: seed,
        stream,
    })
}

/// Key of the fading streams derived from a run seed.
pub(crate) fn fading_key(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Where a failed trial stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureStage {
    /// No cancellation budget and the first decoding attempt failed.
    DecodeInitial,
    /// Decoding the `n`-th ordered interferer failed.
    CancelStage(usize),
    /// All `n` budgeted cancellations succeeded but the signal still did not
    /// decode; the budget is exhausted.
    DecodeAfter(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialOutcome {
    pub succeeded: bool,
    pub cancellations_used: usize,
    pub failure_stage: Option<FailureStage>,
}

/// Indices of interferers in cancellation order.
fn cancellation_order(powers: &[f64], ordering: Ordering) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..powers.len()).collect();
    if ordering == Ordering::PowerWithFading {
        // Stable sort keeps index order on ties.
        idx.sort_by(|&a, &b| powers[b].total_cmp(&powers[a]));
    }
    idx
}

/// `I_{Ωⁿ}`: the exact sum of all interferer powers except the first
/// `n_trim` in cancellation order.
pub fn trimmed_sum_oracle(scene: &SampledScene, alpha: f64, n_trim: usize, ordering: Ordering) -> Result<f64> {
    let powers = scene.powers(alpha);
    if n_trim > powers.len() {
        return Err(Error::domain(format!(
            "cannot trim {n_trim} of {} interferers",
            powers.len()
        )));
    }
    let order = cancellation_order(&powers, ordering);
    Ok(order[n_trim..].iter().map(|&i| powers[i]).sum())
}

/// Runs the decode/cancel chain step by step with exact re-summation at
/// every stage.
pub fn run_sic_trial(cfg: &NetworkConfig, sic: &SicConfig, scene: &SampledScene, ordering: Ordering) -> TrialOutcome {
    let alpha = cfg.alpha;
    let powers = scene.powers(alpha);
    let order = cancellation_order(&powers, ordering);
    let signal = scene.signal(alpha);
    let residual = |n: usize| -> f64 { order[n.min(order.len())..].iter().map(|&i| powers[i]).sum() };
    let eta = sic.eta_t;

    if signal >= eta * residual(0) {
        return TrialOutcome {
            succeeded: true,
            cancellations_used: 0,
            failure_stage: None,
        };
    }
    for n in 1..=sic.n_max {
        if n > order.len() {
            // Nothing left to cancel; the residual is already zero, so this
            // cannot be reached after a failed decode.
            break;
        }
        let target = powers[order[n - 1]];
        if target < eta * residual(n) {
            return TrialOutcome {
                succeeded: false,
                cancellations_used: n - 1,
                failure_stage: Some(FailureStage::CancelStage(n)),
            };
        }
        if signal >= eta * residual(n) {
            return TrialOutcome {
                succeeded: true,
                cancellations_used: n,
                failure_stage: None,
            };
        }
    }
    let stage = if sic.n_max == 0 {
        FailureStage::DecodeInitial
    } else {
        FailureStage::DecodeAfter(sic.n_max)
    };
    TrialOutcome {
        succeeded: false,
        cancellations_used: sic.n_max,
        failure_stage: Some(stage),
    }
}

/// The `k` first interferers in cancellation order and the sum of the rest.
pub(crate) fn ordered_top(powers: &[f64], k: usize, ordering: Ordering) -> (Vec<f64>, f64) {
    let k = k.min(powers.len());
    match ordering {
        Ordering::DistanceOnly => (powers[..k].to_vec(), powers[k..].iter().sum()),
        Ordering::PowerWithFading => {
            // Small insertion-sorted buffer; anything evicted or rejected goes
            // to the remainder, so no subtraction is ever needed.
            let mut top: Vec<f64> = Vec::with_capacity(k + 1);
            let mut rest = 0.0;
            for &p in powers {
                if top.len() < k {
                    let pos = top.iter().position(|&t| p > t).unwrap_or(top.len());
                    top.insert(pos, p);
                } else if k > 0 && p > top[k - 1] {
                    let pos = top.iter().position(|&t| p > t).unwrap_or(k - 1);
                    top.insert(pos, p);
                    rest += top.pop().unwrap();
                } else {
                    rest += p;
                }
            }
            (top, rest)
        }
    }
}

/// Best chain margin `Θ_N = max_{n ≤ N} min(S/I_n, min_{m ≤ n} X_(m)/I_m)` for
/// `N = 0..=n_max`. The trial succeeds at threshold `η` with budget `N` iff
/// `Θ_N ≥ η`.
pub fn chain_margins(signal: f64, powers: &[f64], n_max: usize, ordering: Ordering) -> Vec<f64> {
    let (top, rest) = ordered_top(powers, n_max, ordering);
    margins_from_top(signal, &top, rest, n_max)
}

pub(crate) fn margins_from_top(signal: f64, top: &[f64], rest: f64, n_max: usize) -> Vec<f64> {
    let k = top.len();
    // suffix[n] = I_n = rest + Σ_{i ≥ n} top[i]
    let mut suffix = vec![rest; k + 1];
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1] + top[i];
    }
    let mut out = Vec::with_capacity(n_max + 1);
    let mut cancel_min = f64::INFINITY;
    let mut best = f64::NEG_INFINITY;
    for n in 0..=n_max {
        if n > k {
            out.push(best);
            continue;
        }
        if n >= 1 {
            cancel_min = cancel_min.min(top[n - 1] / suffix[n]);
        }
        let theta = (signal / suffix[n]).min(cancel_min);
        best = best.max(theta);
        out.push(best);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::default_window;
    use proptest::prelude::*;

    fn cfg() -> NetworkConfig {
        NetworkConfig::single_tier(1e-4, 1e-4, 4.0).unwrap()
    }

    fn scene(stream: u64) -> SampledScene {
        sample_sic_scene(1e-4, 1e-4, default_window(1e-4), 9, stream, false).unwrap()
    }

    #[test]
    fn empty_scene_decodes() {
        let s = SampledScene {
            interferers: vec![],
            serving_distance: 100.0,
            serving_fading: 0.01,
            window_radius: 10.0,
            rng_seed: 0,
            stream: 0,
        };
        let out = run_sic_trial(&cfg(), &SicConfig::new(100.0, 3).unwrap(), &s, Ordering::DistanceOnly);
        assert!(out.succeeded && out.cancellations_used == 0);
        assert!(chain_margins(s.signal(4.0), &[], 3, Ordering::PowerWithFading)[0].is_infinite());
    }

    #[test]
    fn scene_invariants() {
        for i in 0..50 {
            let s = scene(i);
            assert!(s.interferers.iter().all(|p| p.h > 0.0 && p.r2 <= s.window_radius.powi(2)));
            assert!(s.interferers.windows(2).all(|w| w[0].r2 <= w[1].r2));
        }
        let frozen_a = sample_sic_scene(1e-4, 1e-4, 500.0, 9, 1, true).unwrap();
        let frozen_b = sample_sic_scene(1e-4, 1e-4, 500.0, 9, 2, true).unwrap();
        assert_eq!(frozen_a.interferers.len(), frozen_b.interferers.len());
        assert_eq!(frozen_a.interferers[0].r2, frozen_b.interferers[0].r2);
        assert_ne!(frozen_a.interferers[0].h, frozen_b.interferers[0].h);
    }

    #[test]
    fn trimmed_sum_edges_and_ordering() {
        for i in 0..10_000 {
            let s = sample_sic_scene(1e-4, 1e-4, 300.0, 21, i, false).unwrap();
            let k = s.interferers.len();
            let full: f64 = s.powers(4.0).iter().sum();
            assert!((trimmed_sum_oracle(&s, 4.0, 0, Ordering::DistanceOnly).unwrap() - full).abs() <= 1e-12 * full);
            assert_eq!(trimmed_sum_oracle(&s, 4.0, k, Ordering::PowerWithFading).unwrap(), 0.0);
            assert!(trimmed_sum_oracle(&s, 4.0, k + 1, Ordering::PowerWithFading).is_err());
            for n in 0..k.min(4) {
                let p = trimmed_sum_oracle(&s, 4.0, n, Ordering::PowerWithFading).unwrap();
                let d = trimmed_sum_oracle(&s, 4.0, n, Ordering::DistanceOnly).unwrap();
                assert!(p <= d * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn ordered_top_matches_sort() {
        let powers = [3.0, 9.0, 1.0, 9.0, 4.0, 0.5];
        let (top, rest) = ordered_top(&powers, 3, Ordering::PowerWithFading);
        assert_eq!(top, vec![9.0, 9.0, 4.0]);
        assert_eq!(rest, 4.5);
        let (top, rest) = ordered_top(&powers, 2, Ordering::DistanceOnly);
        assert_eq!(top, vec![3.0, 9.0]);
        assert_eq!(rest, 14.5);
        let (top, rest) = ordered_top(&powers, 0, Ordering::PowerWithFading);
        assert!(top.is_empty() && rest == 26.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn margins_agree_with_chain(stream in 0u64..1_000_000, db in -10.0f64..10.0, n_max in 0usize..5, fade in any::<bool>()) {
            let ordering = if fade { Ordering::PowerWithFading } else { Ordering::DistanceOnly };
            let s = scene(stream);
            let eta = 10f64.powf(db / 10.0);
            let margins = chain_margins(s.signal(4.0), &s.powers(4.0), n_max, ordering);
            for n in 0..=n_max {
                let out = run_sic_trial(&cfg(), &SicConfig::new(eta, n).unwrap(), &s, ordering);
                prop_assert_eq!(out.succeeded, margins[n] >= eta);
                if out.succeeded {
                    prop_assert!(out.cancellations_used <= n);
                }
            }
        }

        #[test]
        fn chain_consistency_and_monotone_threshold(stream in 0u64..1_000_000, db in -10.0f64..10.0, n_max in 0usize..5) {
            let s = scene(stream);
            let eta = 10f64.powf(db / 10.0);
            let sic = SicConfig::new(eta, n_max).unwrap();
            let out = run_sic_trial(&cfg(), &sic, &s, Ordering::PowerWithFading);
            let signal = s.signal(4.0);
            if out.succeeded {
                let n = out.cancellations_used;
                let after = trimmed_sum_oracle(&s, 4.0, n, Ordering::PowerWithFading).unwrap();
                prop_assert!(signal >= eta * after);
                if n > 0 {
                    let before = trimmed_sum_oracle(&s, 4.0, n - 1, Ordering::PowerWithFading).unwrap();
                    prop_assert!(signal < eta * before);
                }
                let lower = SicConfig::new(eta * 0.7, n_max).unwrap();
                prop_assert!(run_sic_trial(&cfg(), &lower, &s, Ordering::PowerWithFading).succeeded);
            } else {
                prop_assert!(out.failure_stage.is_some());
            }
            if n_max == 0 && !out.succeeded {
                prop_assert_eq!(out.failure_stage, Some(FailureStage::DecodeInitial));
            }
        }
    }
}
