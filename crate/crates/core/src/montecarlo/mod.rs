//! Seeded Monte Carlo estimators.
//!
//! Every trial draws from its own ChaCha8 stream, `stream = trial index`,
//! keyed by the run seed. Trials are mapped in parallel and collected in index
//! order, then reduced sequentially, so results do not depend on the number
//! of worker threads.

mod chain;
mod load_mc;
mod maxsir_mc;
mod ppp;
mod rea_mc;
mod sic_mc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub use chain::{
    chain_margins, run_sic_trial, sample_sic_scene, trimmed_sum_oracle, FailureStage, Interferer, Ordering,
    SampledScene, TrialOutcome,
};
pub use load_mc::{
    sample_tagged_cell_loads, simulate_load_policies, simulate_min_load, LoadPolicySamples, PolicySample,
};
pub use maxsir_mc::{max_inst_sir_margins, simulate_max_inst_sir};
pub use ppp::{sample_ppp, sample_radial, Point};
pub use rea_mc::{rea_sirs, rea_tier, simulate_rea, ReaSample};
pub use sic_mc::{
    chain_counts, estimate_ps_can_chain_mc, estimate_ps_can_mc, estimate_ps_ic_mc, estimate_ps_sic_mc,
    sic_scene_margins, ChainRatios, SceneMargins,
};

/// Run-wide knobs shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct McOptions {
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Override of the simulation window radius in metres.
    pub window_radius: Option<f64>,
    /// Reuse one set of positions for every trial, redrawing fading only.
    pub freeze_positions: bool,
}

impl McOptions {
    pub fn with_threads(threads: usize) -> Self {
        Self {
            threads: Some(threads),
            ..Self::default()
        }
    }
}

/// Bernoulli mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64, seed: u64) -> Self {
        if trials == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
                trials,
                seed,
            };
        }
        let mean = successes as f64 / trials as f64;
        Self {
            mean,
            stderr: (mean * (1.0 - mean) / trials as f64).sqrt(),
            trials,
            seed,
        }
    }

    /// Standard error used for agreement checks against a reference value
    /// `p`: the larger of the empirical one and the binomial error at `p`, so
    /// an all-fail or all-pass sample does not give a zero-width band.
    pub fn gate_stderr(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        self.stderr.max((p * (1.0 - p) / self.trials as f64).sqrt())
    }

    /// `|mean − reference| ≤ k·gate_stderr + slack`.
    pub fn agrees_with(&self, reference: f64, k: f64, slack: f64) -> bool {
        (self.mean - reference).abs() <= k * self.gate_stderr(reference) + slack
    }
}

/// Generator for one trial.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Maps `f` over trial indices `start..start + count` in parallel and returns
/// the results in index order.
pub fn map_trials<T, F>(start: u64, count: u64, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let run = || (start..start + count).into_par_iter().map(&f).collect::<Vec<T>>();
    match threads {
        None => Ok(run()),
        Some(0) => Err(Error::config("thread count must be >= 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(run))
        }
    }
}

/// Collects the first `wanted` accepted samples from attempts `0, 1, 2, …`,
/// in attempt order. `attempt` returns `None` for a rejected attempt.
pub(crate) fn collect_accepted<T, F>(wanted: u64, max_attempts: u64, threads: Option<usize>, attempt: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync + Send,
{
    let mut out = Vec::with_capacity(wanted as usize);
    let mut next = 0u64;
    let mut batch = wanted.max(1024);
    while (out.len() as u64) < wanted {
        if next >= max_attempts {
            return Err(Error::Numeric {
                routine: "collect_accepted",
                detail: format!(
                    "only {} of {wanted} samples accepted after {max_attempts} attempts",
                    out.len()
                ),
            });
        }
        let count = batch.min(max_attempts - next);
        let results = map_trials(next, count, threads, &attempt)?;
        next += count;
        for r in results.into_iter().flatten() {
            if (out.len() as u64) < wanted {
                out.push(r);
            }
        }
        batch = batch.saturating_mul(2);
    }
    Ok(out)
}

pub(crate) fn check_trials(trials: u64, minimum: u64) -> Result<()> {
    if trials < minimum {
        Err(Error::config(format!("at least {minimum} trials required, got {trials}")))
    } else {
        Ok(())
    }
}

/// Default window radius: `20/√(π·density)`, about 400 expected points.
pub fn default_window(density: f64) -> f64 {
    20.0 / (std::f64::consts::PI * density).sqrt()
}

/// Received power `h·r^{−α}` with a fast path for `α = 4`.
#[inline]
pub(crate) fn path_gain(r2: f64, alpha: f64) -> f64 {
    if alpha == 4.0 {
        1.0 / (r2 * r2)
    } else {
        r2.powf(-0.5 * alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn estimate_stderr_formula() {
        let e = Estimate::from_counts(250, 1000, 7);
        assert_eq!(e.mean, 0.25);
        assert!((e.stderr - (0.25f64 * 0.75 / 1000.0).sqrt()).abs() < 1e-15);
        let z = Estimate::from_counts(0, 1000, 7);
        assert_eq!(z.stderr, 0.0);
        assert!(z.gate_stderr(0.01) > 0.0);
        assert!(z.agrees_with(0.001, 3.0, 0.0));
    }

    #[test]
    fn map_trials_independent_of_threads() {
        let f = |i: u64| trial_rng(5, i).random::<u64>();
        let a = map_trials(0, 500, Some(1), f).unwrap();
        let b = map_trials(0, 500, Some(4), f).unwrap();
        assert_eq!(a, b);
        assert!(map_trials(0, 5, Some(0), f).is_err());
    }

    #[test]
    fn streams_differ() {
        let a: u64 = trial_rng(1, 0).random();
        let b: u64 = trial_rng(1, 1).random();
        let c: u64 = trial_rng(2, 0).random();
        assert!(a != b && a != c);
    }

    #[test]
    fn collect_accepted_is_ordered_and_deterministic() {
        let attempt = |i: u64| {
            let u: f64 = trial_rng(3, i).random();
            (u < 0.1).then_some(i)
        };
        let a = collect_accepted(300, 1_000_000, Some(1), attempt).unwrap();
        let b = collect_accepted(300, 1_000_000, Some(3), attempt).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(collect_accepted(10, 20, None, |_| None::<u64>).is_err());
    }
}
