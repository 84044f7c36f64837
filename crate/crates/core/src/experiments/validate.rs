//! Closed-form vs simulation checks, grouped into suites.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::analytic::{
    kurtosis_after_cancellation, load_pmf, outage_max_inst_sir, ps_can, ps_can_tsd, ps_ic_rea, ps_sic,
    ps_sic_max_inst_sir, rate_coverage_max_sir, rate_coverage_min_load, rate_coverage_min_load_sic,
};
use crate::error::{Error, Result};
use crate::model::{NetworkConfig, TierParams};
use crate::montecarlo::{
    default_window, estimate_ps_can_mc, max_inst_sir_margins, rea_sirs, rea_tier, sample_tagged_cell_loads,
    sic_scene_margins, simulate_load_policies, Estimate, McOptions, Ordering,
};
use crate::numerics::{c_integral, c_integral_quadrature, db_to_linear, QuadratureSettings};

use super::{FIG2_WINDOW_SCALE, FIG4_RANGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Numerics,
    Can,
    Sic,
    Minload,
    Maxsir,
    Rea,
    All,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Numerics,
        Suite::Can,
        Suite::Sic,
        Suite::Minload,
        Suite::Maxsir,
        Suite::Rea,
        Suite::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Numerics => "numerics",
            Suite::Can => "can",
            Suite::Sic => "sic",
            Suite::Minload => "minload",
            Suite::Maxsir => "maxsir",
            Suite::Rea => "rea",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::config(format!("unknown suite '{s}'")))
    }
}

/// One check: `passed` iff `measured <= tolerance`. Ordering checks report
/// the worst violation as `measured` against a zero tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(suite: Suite, name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            suite,
            name: name.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
        }
    }

    /// Holds when every value in `margins` is `>= 0`.
    fn ordering(suite: Suite, name: impl Into<String>, margins: impl IntoIterator<Item = f64>) -> Self {
        let worst = margins.into_iter().fold(0.0f64, |w, m| w.max(-m)) + 0.0;
        Self::new(suite, name, worst, 0.0)
    }

    /// Worst excess of `|mc − exact|` over `k·stderr + slack`; the reported
    /// tolerance is that band at the worst point.
    fn agreement(suite: Suite, name: impl Into<String>, pairs: &[(Estimate, f64)], k: f64, slack: f64) -> Self {
        let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
        for (e, exact) in pairs {
            let band = k * e.gate_stderr(*exact) + slack;
            let gap = (e.mean - exact).abs();
            if gap - band > worst.0 {
                worst = (gap - band, gap, band);
            }
        }
        Self::new(suite, name, worst.1, worst.2)
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{}: measured {:.6e}, tolerance {:.6e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

fn opts(threads: Option<usize>) -> McOptions {
    McOptions {
        threads,
        ..McOptions::default()
    }
}

fn runtime(suite: Suite, clock: Instant, limit_s: f64) -> CheckResult {
    CheckResult::new(suite, "runtime_s", clock.elapsed().as_secs_f64(), limit_s)
}

/// `C(b, α)` closed form against quadrature, `C(b, 4)` against `arctan(1/b)`,
/// and the residual kurtosis.
pub fn numerics() -> Result<Vec<CheckResult>> {
    let s = Suite::Numerics;
    let clock = Instant::now();
    let settings = QuadratureSettings::default();
    let bs = [0.0, 0.01, 0.1, 1.0, 10.0, 100.0];
    let mut rel = 0.0f64;
    for &alpha in &[2.5, 3.0, 3.5, 4.0, 5.0, 6.0] {
        for &b in &bs {
            let c = c_integral(b, alpha)?;
            let q = c_integral_quadrature(b, alpha, &settings)?;
            rel = rel.max(((c - q) / q).abs());
        }
    }
    let mut atan = 0.0f64;
    for &b in &bs {
        atan = atan.max((c_integral(b, 4.0)? - (1.0 / b).atan()).abs());
    }
    let k2 = kurtosis_after_cancellation(4.0, 2)?;
    let mut scaling = 0.0f64;
    for n in 2..=50 {
        scaling = scaling.max((kurtosis_after_cancellation(4.0, n)? * (n - 1) as f64 - k2).abs());
    }
    Ok(vec![
        CheckResult::new(s, "c_integral_vs_quadrature_rel", rel, 1e-9),
        CheckResult::new(s, "c_integral_alpha4_vs_arctan", atan, 1e-10),
        CheckResult::new(s, "kurtosis_alpha4_n2", (k2 - 54.0 / 7.0).abs(), 1e-12),
        CheckResult::new(s, "kurtosis_times_n_minus_1_constant", scaling, 1e-12),
        runtime(s, clock, 1.0),
    ])
}

/// Allowed gap of the strongest-first estimate: 0.05 at 0 dB and 0.01 at
/// 10 dB, linear in dB between and clamped outside.
pub fn fading_tolerance(eta_db: f64) -> f64 {
    let t = (eta_db / 10.0).clamp(0.0, 1.0);
    0.05 + t * (0.01 - 0.05)
}

/// Probability of cancelling the n-th interferer, single tier, α = 4.
pub fn cancellation(trials: u64, seed: u64, threads: Option<usize>) -> Result<Vec<CheckResult>> {
    let s = Suite::Can;
    let clock = Instant::now();
    let cfg = NetworkConfig::single_tier(1e-4, 1e-4, 4.0)?;
    let o = McOptions {
        window_radius: Some(FIG2_WINDOW_SCALE * default_window(cfg.mu_j)),
        ..opts(threads)
    };
    let batch = sic_scene_margins(&cfg, 8, trials, seed, &o)?;
    let mut out = Vec::new();
    for &db in &[0.0, 5.0, 10.0] {
        let eta = db_to_linear(db);
        let mut dist = Vec::new();
        let mut fade = 0.0f64;
        let mut tsd_rel = 0.0f64;
        for n in 1..=8 {
            let exact = ps_can(eta, n, 4.0)?;
            let count = |ord: Ordering| batch.iter().filter(|m| m.get(ord).cancels(eta, n)).count() as u64;
            dist.push((Estimate::from_counts(count(Ordering::DistanceOnly), trials, seed), exact));
            let f = Estimate::from_counts(count(Ordering::PowerWithFading), trials, seed);
            fade = fade.max((f.mean - exact).abs());
            let tsd = ps_can_tsd(eta, n)?;
            if n == 1 {
                out.push(CheckResult::new(s, format!("pgfl_vs_tsd_n1_{db}db"), (tsd - exact).abs(), 0.01));
            }
            if n <= 5 {
                tsd_rel = tsd_rel.max(((tsd - exact) / exact).abs());
            }
        }
        out.push(CheckResult::agreement(s, format!("mc_distance_order_{db}db"), &dist, 3.0, 0.0));
        out.push(CheckResult::new(s, format!("mc_fading_order_{db}db"), fade, fading_tolerance(db)));
        out.push(CheckResult::new(s, format!("pgfl_vs_tsd_rel_n_le_5_{db}db"), tsd_rel, 0.1));
    }
    out.push(runtime(s, clock, 120.0));
    Ok(out)
}

/// Cancellation probability at two user densities, η = 5 dB, n = 1..3.
pub fn scale_invariance(trials: u64, seed: u64, threads: Option<usize>) -> Result<Vec<CheckResult>> {
    let eta = db_to_linear(5.0);
    let lo = NetworkConfig::single_tier(1e-4, 1e-4, 4.0)?;
    let hi = NetworkConfig::single_tier(1e-4, 1e-3, 4.0)?;
    let o = opts(threads);
    let mut out = Vec::new();
    for n in 1..=3 {
        let a = estimate_ps_can_mc(&lo, eta, n, trials, seed, Ordering::PowerWithFading, &o)?;
        let b = estimate_ps_can_mc(&hi, eta, n, trials, seed ^ 1, Ordering::PowerWithFading, &o)?;
        let joint = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        out.push(CheckResult::new(
            Suite::Can,
            format!("scale_invariance_n{n}"),
            (a.mean - b.mean).abs(),
            3.0 * joint,
        ));
    }
    Ok(out)
}

/// Success with up to N cancellations, N = 0..5, on the 11-point dB grid.
pub fn sic(trials: u64, seed: u64, threads: Option<usize>) -> Result<Vec<CheckResult>> {
    let s = Suite::Sic;
    let clock = Instant::now();
    let cfg = NetworkConfig::single_tier(1e-4, 1e-4, 4.0)?;
    let batch = sic_scene_margins(&cfg, 5, trials, seed, &opts(threads))?;
    let mut pairs = Vec::new();
    let mut monotone = Vec::new();
    let mut diminishing = Vec::new();
    let mut negligible = 0.0f64;
    for db in (-10..=10).step_by(2).map(f64::from) {
        let eta = db_to_linear(db);
        let b = ps_sic(eta, 5, 1e-4, 1e-4, 4.0)?;
        let curve: Vec<f64> = (0..=5).map(|n| b.total_up_to(n)).collect();
        for (n, &exact) in curve.iter().enumerate() {
            let hits = batch.iter().filter(|m| m.power.succeeds(eta, n)).count() as u64;
            pairs.push((Estimate::from_counts(hits, trials, seed), exact));
        }
        monotone.extend(curve.windows(2).map(|w| w[1] - w[0]));
        if db >= 0.0 {
            diminishing.push((curve[1] - curve[0]) - (curve[2] - curve[1]) - f64::EPSILON);
        }
        if db >= 2.0 {
            negligible = negligible.max(curve.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max));
        }
    }
    Ok(vec![
        CheckResult::agreement(s, "mc_vs_closed_form", &pairs, 3.0, 0.02),
        CheckResult::ordering(s, "nondecreasing_in_budget", monotone),
        CheckResult::ordering(s, "second_increment_smaller", diminishing),
        // Strict bound: report equality as a failure.
        CheckResult {
            passed: negligible < 0.02,
            ..CheckResult::new(s, "increments_above_2db", negligible, 0.02)
        },
        runtime(s, clock, 600.0),
    ])
}

/// Cell-load law at `μ_j/λ = 5`: normalisation, mean and the sampled
/// histogram of the cell holding the origin.
pub fn load_model(cells: u64, seed: u64, threads: Option<usize>) -> Result<Vec<CheckResult>> {
    let s = Suite::Minload;
    let (lambda, mu_j) = (1e-5, 5e-5);
    let pmf: Vec<f64> = (0..400).map(|m| load_pmf(m, mu_j, lambda)).collect::<Result<_>>()?;
    let total: f64 = pmf.iter().sum();
    let mean: f64 = pmf.iter().enumerate().map(|(m, p)| m as f64 * p).sum();
    let loads = sample_tagged_cell_loads(lambda, mu_j, cells, seed, &opts(threads))?;
    let mut hist = vec![0.0; pmf.len()];
    let mut overflow = 0.0;
    for &l in &loads {
        match hist.get_mut(l as usize) {
            Some(h) => *h += 1.0,
            None => overflow += 1.0,
        }
    }
    let n = loads.len() as f64;
    let tv = 0.5
        * (hist.iter().zip(&pmf).map(|(h, p)| (h / n - p).abs()).sum::<f64>()
            + overflow / n
            + (1.0 - total).abs());
    Ok(vec![
        CheckResult::new(s, "load_pmf_sums_to_one", (total - 1.0).abs(), 1e-9),
        CheckResult::new(s, "load_pmf_mean", (mean - mu_j / lambda).abs(), 1e-6),
        CheckResult::new(s, "load_histogram_total_variation", tv, 0.02),
    ])
}

/// Rate coverage under nearest-AP and minimum-load association.
pub fn min_load(trials: u64, seed: u64, threads: Option<usize>) -> Result<Vec<CheckResult>> {
    let s = Suite::Minload;
    let clock = Instant::now();
    let (lambda, mu_j, alpha) = (1e-5, 5e-5, 4.0);
    let rhos: Vec<f64> = (1..=10).map(|k| k as f64 / 50.0).collect();
    let batch = simulate_load_policies(lambda, mu_j, alpha, FIG4_RANGE, trials, seed, &opts(threads))?;
    let n = batch.len() as u64;
    let mut order_exact = Vec::new();
    let mut order_mc = Vec::new();
    let mut pairs = Vec::new();
    for &rho in &rhos {
        let max_sir = rate_coverage_max_sir(rho, lambda, mu_j, alpha)?;
        let ml = rate_coverage_min_load(rho, lambda, mu_j, alpha, FIG4_RANGE)?;
        order_exact.push(max_sir - ml - f64::EPSILON);
        let count = |f: &dyn Fn(&crate::montecarlo::LoadPolicySamples) -> bool| batch.iter().filter(|x| f(x)).count() as u64;
        let mc_ml = Estimate::from_counts(count(&|x| x.min_load.covered(rho, 0)), n, seed);
        let mc_ms = Estimate::from_counts(count(&|x| x.nearest.covered(rho, 0)), n, seed);
        order_mc.push(mc_ms.mean - mc_ml.mean - f64::EPSILON);
        pairs.push((mc_ml, ml));
    }
    let mid = rhos[rhos.len() / 2 - 1];
    let gain = rate_coverage_min_load_sic(mid, lambda, mu_j, alpha, FIG4_RANGE, 1)?
        - rate_coverage_min_load(mid, lambda, mu_j, alpha, FIG4_RANGE)?;
    Ok(vec![
        CheckResult::ordering(s, "min_load_below_max_sir", order_exact),
        CheckResult::ordering(s, "min_load_below_max_sir_mc", order_mc),
        CheckResult::ordering(s, "one_cancellation_gain_at_median_rho", [gain - 0.05]),
        CheckResult::agreement(s, "min_load_mc_vs_closed_form", &pairs, 3.0, 0.03),
        runtime(s, clock, 300.0),
    ])
}

/// The two-tier network with a tenfold power ratio.
pub fn two_tier(bias: f64) -> Result<NetworkConfig> {
    NetworkConfig::new(
        vec![TierParams::new(1e-5, 10.0, 10.0), TierParams::new(1e-4, 1.0, 1.0).with_bias(bias)],
        4.0,
        1e-4,
        1e-4,
    )
}

/// Maximum instantaneous SIR association: outage at `η ≥ 0 dB` and the
/// uplift from up to three cancellations.
pub fn max_sir(trials: u64, seed: u64, threads: Option<usize>) -> Result<Vec<CheckResult>> {
    let s = Suite::Maxsir;
    let clock = Instant::now();
    let cfg = two_tier(1.0)?;
    let margins = max_inst_sir_margins(&cfg, 1.0, 0, trials, seed, &opts(threads))?;
    let mut pairs = Vec::new();
    let mut uplift = Vec::new();
    let mut peak = 0.0f64;
    for db in (0..=10).step_by(2).map(f64::from) {
        let eta = db_to_linear(db);
        let out = outage_max_inst_sir(eta, &cfg)?;
        let hits = margins.iter().filter(|m| m[0] < eta).count() as u64;
        pairs.push((Estimate::from_counts(hits, trials, seed), out));
        for n in 1..=3 {
            let u = ps_sic_max_inst_sir(eta, n, &cfg)? - (1.0 - out);
            uplift.push(u - f64::EPSILON);
            peak = peak.max(u);
        }
    }
    Ok(vec![
        CheckResult::agreement(s, "outage_mc_vs_closed_form", &pairs, 3.0, 0.0),
        CheckResult::ordering(s, "positive_uplift", uplift),
        CheckResult::ordering(s, "peak_uplift_in_range", [peak - 0.05, 0.25 - peak]),
        runtime(s, clock, 600.0),
    ])
}

/// Range-expanded users of the small-cell tier at biases 2, 5 and 10.
pub fn rea(trials: u64, seed: u64, threads: Option<usize>) -> Result<Vec<CheckResult>> {
    let s = Suite::Rea;
    let clock = Instant::now();
    let biases = [2.0, 5.0, 10.0];
    let etas: Vec<f64> = (-10..=10).step_by(2).map(|d| db_to_linear(f64::from(d))).collect();
    // exact[b][c][eta], mc likewise.
    let mut exact = Vec::new();
    let mut mc = Vec::new();
    for &b in &biases {
        let cfg = two_tier(b)?;
        let k = rea_tier(&cfg)?;
        let samples = rea_sirs(&cfg, k, trials, seed, &opts(threads))?;
        let mut e = [Vec::new(), Vec::new()];
        let mut m = [Vec::new(), Vec::new()];
        for c in 0..=1u8 {
            for &eta in &etas {
                e[c as usize].push(ps_ic_rea(eta, &cfg, k, c)?);
                let hits = samples.iter().filter(|x| x.succeeds(eta, c)).count() as u64;
                m[c as usize].push(Estimate::from_counts(hits, trials, seed));
            }
        }
        exact.push(e);
        mc.push(m);
    }
    let mut out = Vec::new();
    for (c, label) in [(0usize, "uncancelled"), (1, "cancelled")] {
        let pairs: Vec<(Estimate, f64)> = (0..biases.len())
            .flat_map(|b| mc[b][c].iter().copied().zip(exact[b][c].iter().copied()).collect::<Vec<_>>())
            .collect();
        out.push(CheckResult::agreement(s, format!("{label}_mc_vs_closed_form"), &pairs, 3.0, 0.0));
    }
    let mut dec = Vec::new();
    let mut dec_mc = Vec::new();
    let mut above = Vec::new();
    let mut above_mc = Vec::new();
    for c in 0..2 {
        for i in 0..etas.len() {
            for b in 1..biases.len() {
                dec.push(exact[b - 1][c][i] - exact[b][c][i]);
                dec_mc.push(mc[b - 1][c][i].mean - mc[b][c][i].mean);
            }
        }
    }
    for b in 0..biases.len() {
        for i in 0..etas.len() {
            above.push(exact[b][1][i] - exact[b][0][i]);
            above_mc.push(mc[b][1][i].mean - mc[b][0][i].mean);
        }
    }
    out.push(CheckResult::ordering(s, "decreasing_in_bias", dec));
    out.push(CheckResult::ordering(s, "decreasing_in_bias_mc", dec_mc));
    out.push(CheckResult::ordering(s, "cancelled_above_uncancelled", above));
    out.push(CheckResult::ordering(s, "cancelled_above_uncancelled_mc", above_mc));
    out.push(runtime(s, clock, 600.0));
    Ok(out)
}

/// Runs one suite (or all). `trials` is the per-batch simulation budget and
/// must be at least 1000 for the simulation suites.
pub fn run_suite(suite: Suite, trials: u64, seed: u64, threads: Option<usize>) -> Result<Vec<CheckResult>> {
    if suite != Suite::Numerics && trials < 1000 {
        return Err(Error::config(format!("validation needs at least 1000 trials, got {trials}")));
    }
    let mut out = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Numerics {
        out.extend(numerics()?);
    }
    if all || suite == Suite::Can {
        out.extend(cancellation(trials, seed, threads)?);
        out.extend(scale_invariance(trials, seed, threads)?);
    }
    if all || suite == Suite::Sic {
        out.extend(sic(trials, seed, threads)?);
    }
    if all || suite == Suite::Minload {
        out.extend(load_model(trials, seed, threads)?);
        out.extend(min_load(trials, seed, threads)?);
    }
    if all || suite == Suite::Maxsir {
        out.extend(max_sir(trials, seed, threads)?);
    }
    if all || suite == Suite::Rea {
        out.extend(rea(trials, seed, threads)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("fig".parse::<Suite>().is_err());
    }

    #[test]
    fn numerics_suite_passes() {
        for c in numerics().unwrap() {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn fading_tolerance_interpolates() {
        assert_eq!(fading_tolerance(0.0), 0.05);
        assert!((fading_tolerance(5.0) - 0.03).abs() < 1e-15);
        assert!((fading_tolerance(10.0) - 0.01).abs() < 1e-15);
        assert_eq!(fading_tolerance(-3.0), 0.05);
    }

    #[test]
    fn check_semantics() {
        let c = CheckResult::ordering(Suite::Sic, "x", [0.1, -0.2, 0.0]);
        assert!(!c.passed);
        assert!((c.measured - 0.2).abs() < 1e-15);
        let e = Estimate::from_counts(500, 1000, 1);
        assert!(CheckResult::agreement(Suite::Sic, "y", &[(e, 0.52)], 3.0, 0.0).passed);
        assert!(!CheckResult::agreement(Suite::Sic, "y", &[(e, 0.6)], 3.0, 0.0).passed);
        assert!(run_suite(Suite::Can, 10, 1, None).is_err());
    }
}
