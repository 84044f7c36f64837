//! Cell-load law, its order statistics, and rate coverage under max-SIR and
//! minimum-load association (single tier, downlink).

use std::f64::consts::{LN_2, PI};

use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::numerics::{c_integral, c_zero, integrate, ln_gamma, QuadratureSettings};

use super::sic::ps_can;

const TAIL_MASS: f64 = 1e-12;
const MAX_LOAD: usize = 100_000;

/// `Pr[M = m]` for the users sharing the tagged cell:
/// `3.5^{3.5}/m! · Γ(m+4.5)/Γ(3.5) · c^m · (3.5 + c)^{−(m+4.5)}`, `c = μ_j/λ`.
pub fn load_pmf(m: u64, mu_j: f64, lambda: f64) -> Result<f64> {
    let c = load_ratio(mu_j, lambda)?;
    Ok(ln_load_pmf(m as f64, c).exp())
}

fn load_ratio(mu_j: f64, lambda: f64) -> Result<f64> {
    if !(mu_j.is_finite() && mu_j > 0.0 && lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain(format!(
            "load law needs positive densities, got mu_j={mu_j}, lambda={lambda}"
        )));
    }
    Ok(mu_j / lambda)
}

fn ln_load_pmf(m: f64, c: f64) -> f64 {
    3.5 * 3.5f64.ln() + ln_gamma(m + 4.5) - ln_gamma(m + 1.0) - ln_gamma(3.5) + m * c.ln()
        - (m + 4.5) * (3.5 + c).ln()
}

/// The load pmf on `0..len`, truncated once the cumulative mass exceeds
/// `1 − 1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadTable {
    pub pmf: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl LoadTable {
    pub fn new(mu_j: f64, lambda: f64) -> Result<Self> {
        let c = load_ratio(mu_j, lambda)?;
        let mut pmf = Vec::new();
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        for m in 0..=MAX_LOAD {
            let p = ln_load_pmf(m as f64, c).exp();
            acc += p;
            pmf.push(p);
            cdf.push(acc.min(1.0));
            if acc > 1.0 - TAIL_MASS {
                break;
            }
        }
        Ok(Self { pmf, cdf })
    }

    /// `F(m)`, with `F(−1) = 0` and `F = 1` past the truncation point.
    pub fn cdf_at(&self, m: i64) -> f64 {
        if m < 0 {
            0.0
        } else {
            self.cdf.get(m as usize).copied().unwrap_or(1.0)
        }
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(m, p)| m as f64 * p).sum()
    }

    /// Pmf of the `i`-th smallest of `n_aps` independent loads on the same
    /// support.
    pub fn order_statistic(&self, i: usize, n_aps: usize) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|m| load_order_statistic_pmf(i, m as i64, n_aps, |k| self.cdf_at(k)))
            .collect()
    }
}

/// `I_{F(m)}(i, n−i+1) − I_{F(m−1)}(i, n−i+1)`: the `i`-th order statistic of
/// `n_aps` iid loads with CDF `load_cdf`.
pub fn load_order_statistic_pmf<F: Fn(i64) -> f64>(i: usize, m: i64, n_aps: usize, load_cdf: F) -> Result<f64> {
    if i == 0 || i > n_aps {
        return Err(Error::domain(format!("order statistic rank {i} outside 1..={n_aps}")));
    }
    let (a, b) = (i as f64, (n_aps - i + 1) as f64);
    let reg = |x: f64| {
        let x = x.clamp(0.0, 1.0);
        if x == 0.0 {
            0.0
        } else if x == 1.0 {
            1.0
        } else {
            beta_reg(a, b, x)
        }
    };
    Ok((reg(load_cdf(m)) - reg(load_cdf(m - 1))).max(0.0))
}

/// `ln ς` for `ς = 2^{x} − 1`, stable for tiny and huge `x`.
fn ln_threshold(bits: f64) -> f64 {
    let y = bits * LN_2;
    if y > 40.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().ln()
    }
}

/// `1 / (1 + ς^{2/α} C(ς^{−2/α}, α))` with `ς` given through its logarithm.
fn max_sir_success(ln_s: f64, alpha: f64) -> Result<f64> {
    let d = 2.0 / alpha;
    let sd = (d * ln_s).exp();
    if !sd.is_finite() {
        return Ok(0.0);
    }
    Ok(1.0 / (1.0 + sd * c_integral((-d * ln_s).exp(), alpha)?))
}

fn check_rate(rho: f64, alpha: f64) -> Result<()> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::domain(format!("rate must be positive, got {rho}")));
    }
    if !(alpha.is_finite() && alpha > 2.0) {
        return Err(Error::domain(format!("alpha must exceed 2, got {alpha}")));
    }
    Ok(())
}

/// Rate coverage with nearest-AP association:
/// `Σ_m f_M(m) · P_s(2^{ρ(m+1)} − 1)`. `rho` is in bits per channel use.
pub fn rate_coverage_max_sir(rho: f64, lambda: f64, mu_j: f64, alpha: f64) -> Result<f64> {
    check_rate(rho, alpha)?;
    let table = LoadTable::new(mu_j, lambda)?;
    let mut total = 0.0;
    for (m, &p) in table.pmf.iter().enumerate() {
        let s = max_sir_success(ln_threshold(rho * (m as f64 + 1.0)), alpha)?;
        let term = p * s;
        if term < 1e-300 && s < 1e-300 {
            break;
        }
        total += term;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Number of APs assumed inside the connectivity range: `⌊λπR²⌋`.
pub fn aps_in_range(lambda: f64, r_con: f64) -> Result<usize> {
    if !(r_con.is_finite() && r_con > 0.0) {
        return Err(Error::domain(format!("connectivity range must be positive, got {r_con}")));
    }
    let n = (lambda * PI * r_con * r_con).floor();
    if n < 1.0 {
        return Err(Error::domain(format!(
            "no AP expected within {r_con} m (lambda*pi*R^2 = {:.3})",
            lambda * PI * r_con * r_con
        )));
    }
    Ok(n as usize)
}

/// `(1 − e^{−x})/x`, the coverage of a serving AP uniform in the range disk.
fn disk_average_exp(x: f64) -> f64 {
    if x < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// Rate coverage when the user joins the least-loaded of the `⌊λπR²⌋` APs
/// within `r_con`, serving distance uniform in the disk, no cancellation.
pub fn rate_coverage_min_load(rho: f64, lambda: f64, mu_j: f64, alpha: f64, r_con: f64) -> Result<f64> {
    check_rate(rho, alpha)?;
    let n_aps = aps_in_range(lambda, r_con)?;
    let table = LoadTable::new(mu_j, lambda)?;
    let c0 = c_zero(alpha)?;
    let d = 2.0 / alpha;
    let mut total = 0.0;
    for m in 0..table.len() {
        let w = load_order_statistic_pmf(1, m as i64, n_aps, |k| table.cdf_at(k))?;
        if w == 0.0 {
            continue;
        }
        let sd = (d * ln_threshold(rho * (m as f64 + 1.0))).exp();
        let x = PI * lambda * sd * c0 * r_con * r_con;
        total += w * if x.is_finite() { disk_average_exp(x) } else { 0.0 };
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Minimum-load rate coverage when the receiver may cancel up to `n_max`
/// interfering APs before decoding.
///
/// Conditioned on the serving distance `r`, the chain is
/// `P_s(r) + Σ_i Π_{n<i}(1 − P_IC(n|r)) Π_{n≤i} P_can(n) P_IC(i|r)` with
/// `P_IC(n|r) = exp(−πλς^{2/α}C(R_n²/(ς^{2/α}r²))r²)` and `R_n = √(n/(λπ))`;
/// `r` is uniform in the range disk. Equals [`rate_coverage_min_load`] at
/// `n_max = 0`.
pub fn rate_coverage_min_load_sic(
    rho: f64,
    lambda: f64,
    mu_j: f64,
    alpha: f64,
    r_con: f64,
    n_max: usize,
) -> Result<f64> {
    if n_max == 0 {
        return rate_coverage_min_load(rho, lambda, mu_j, alpha, r_con);
    }
    check_rate(rho, alpha)?;
    let n_aps = aps_in_range(lambda, r_con)?;
    let table = LoadTable::new(mu_j, lambda)?;
    let settings = QuadratureSettings::new(1e-9, 1e-13, 2000)?;
    let d = 2.0 / alpha;
    // Work in w = λπr², uniform on [0, W].
    let w_max = lambda * PI * r_con * r_con;
    let mut total = 0.0;
    for m in 0..table.len() {
        let weight = load_order_statistic_pmf(1, m as i64, n_aps, |k| table.cdf_at(k))?;
        if weight < 1e-300 {
            continue;
        }
        let ln_s = ln_threshold(rho * (m as f64 + 1.0));
        if ln_s > 700.0 {
            continue;
        }
        let sd = (d * ln_s).exp();
        let can1 = ps_can(ln_s.exp(), 1, alpha)?;
        let chain = |w: f64| -> f64 {
            if w <= 0.0 {
                return 1.0;
            }
            let decode = |n: usize| -> f64 {
                let b = n as f64 / (sd * w);
                (-sd * w * c_integral(b, alpha).unwrap_or(f64::NAN)).exp()
            };
            let p0 = decode(0);
            let mut total = p0;
            let mut outage = 1.0 - p0;
            let mut cancel = 1.0;
            for i in 1..=n_max {
                cancel *= can1.powi(i as i32);
                let p = decode(i);
                total += outage * cancel * p;
                outage *= 1.0 - p;
            }
            total
        };
        let avg = integrate(chain, 0.0, w_max, &settings)? / w_max;
        total += weight * avg;
    }
    Ok(total.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gamma;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::Distribution;

    #[test]
    fn load_pmf_zero_example() {
        let v = load_pmf(0, 1.0, 1.0).unwrap();
        let expected = 3.5f64.powf(3.5) * gamma(4.5) / gamma(3.5) * 4.5f64.powf(-4.5);
        assert!((v - expected).abs() < 1e-14);
        assert!((v - (3.5f64 / 4.5).powf(4.5)).abs() < 1e-14);
        assert!((v - 0.322738).abs() < 1e-6);
    }

    #[test]
    fn load_table_normalised() {
        for c in [0.1, 1.0, 5.0, 40.0] {
            let t = LoadTable::new(c, 1.0).unwrap();
            let s: f64 = t.pmf.iter().sum();
            assert!((s - 1.0).abs() < 1e-9, "c={c}");
        }
    }

    #[test]
    fn load_law_is_negative_binomial() {
        // NB(r = 4.5, p = 3.5/(3.5+c)): mean 4.5c/3.5.
        let t = LoadTable::new(5.0, 1.0).unwrap();
        assert!((t.mean() - 4.5 * 5.0 / 3.5).abs() < 1e-8);
        let nb = statrs::distribution::NegativeBinomial::new(4.5, 3.5 / 8.5).unwrap();
        use statrs::distribution::Discrete;
        for m in 0..30 {
            assert!((t.pmf[m] - nb.pmf(m as u64)).abs() < 1e-12);
        }
    }

    #[test]
    fn order_statistic_examples() {
        let t = LoadTable::new(2.0, 1.0).unwrap();
        let parent = t.order_statistic(1, 1).unwrap();
        for (a, b) in parent.iter().zip(&t.pmf) {
            assert!((a - b).abs() < 1e-12);
        }
        let min2 = t.order_statistic(1, 2).unwrap();
        let max2 = t.order_statistic(2, 2).unwrap();
        for m in 0..t.len() as i64 {
            let (f, g) = (t.cdf_at(m), t.cdf_at(m - 1));
            let want_min = (1.0 - g).powi(2) - (1.0 - f).powi(2);
            assert!((min2[m as usize] - want_min).abs() < 1e-12);
            assert!((max2[m as usize] - (f * f - g * g)).abs() < 1e-12);
        }
        for n in [1usize, 3, 7] {
            for i in 1..=n {
                let s: f64 = t.order_statistic(i, n).unwrap().iter().sum();
                assert!((s - 1.0).abs() < 1e-9);
            }
        }
        assert!(load_order_statistic_pmf(0, 1, 3, |k| t.cdf_at(k)).is_err());
        assert!(load_order_statistic_pmf(4, 1, 3, |k| t.cdf_at(k)).is_err());
    }

    #[test]
    fn min_order_statistic_dominated_by_parent() {
        let t = LoadTable::new(5.0, 1.0).unwrap();
        let min = t.order_statistic(1, 4).unwrap();
        let mut a = 0.0;
        for m in 0..t.len() {
            a += min[m];
            assert!(a >= t.cdf[m] - 1e-12);
        }
    }

    #[test]
    fn min_order_statistic_matches_sampling() {
        let t = LoadTable::new(5.0, 1.0).unwrap();
        let nb = rand_distr::Gamma::new(4.5, 5.0 / 3.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n_aps = 3;
        let draws = 1_000_000;
        let mut hist = vec![0u64; t.len() + 1];
        for _ in 0..draws {
            let mut best = u64::MAX;
            for _ in 0..n_aps {
                let rate: f64 = nb.sample(&mut rng);
                let m = rand_distr::Poisson::new(rate.max(1e-300)).unwrap().sample(&mut rng) as u64;
                best = best.min(m);
            }
            let idx = (best as usize).min(t.len());
            hist[idx] += 1;
        }
        let analytic = t.order_statistic(1, n_aps).unwrap();
        let mut tv = 0.0;
        for m in 0..t.len() {
            tv += (hist[m] as f64 / draws as f64 - analytic[m]).abs();
        }
        tv += hist[t.len()] as f64 / draws as f64;
        assert!(0.5 * tv <= 0.01, "tv={}", 0.5 * tv);
    }

    #[test]
    fn max_sir_rate_coverage_properties() {
        let v = rate_coverage_max_sir(1e-9, 1e-5, 5e-5, 4.0).unwrap();
        assert!(v > 0.9999);
        let mut prev = 1.0;
        for i in 1..20 {
            let v = rate_coverage_max_sir(0.05 * i as f64, 1e-5, 5e-5, 4.0).unwrap();
            assert!(v < prev && v > 0.0);
            prev = v;
        }
    }

    #[test]
    fn max_sir_single_term() {
        // With a negligible user density the m = 0 term dominates.
        let rho = 0.7;
        let s: f64 = 2f64.powf(rho) - 1.0;
        let expected = 1.0 / (1.0 + s.sqrt() * s.sqrt().atan());
        let v = rate_coverage_max_sir(rho, 1.0, 1e-12, 4.0).unwrap();
        assert!((v - expected).abs() < 1e-9, "{v} vs {expected}");
        let direct = max_sir_success(ln_threshold(rho), 4.0).unwrap();
        assert!((direct - expected).abs() < 1e-14);
    }

    #[test]
    fn threshold_log_space() {
        assert!((ln_threshold(1.0) - 0.0).abs() < 1e-15);
        assert!((ln_threshold(3.0) - 7f64.ln()).abs() < 1e-14);
        assert!((ln_threshold(2000.0) - 2000.0 * LN_2).abs() < 1e-9);
        assert!((ln_threshold(1e-12) - (1e-12 * LN_2).ln()).abs() < 1e-9);
    }

    #[test]
    fn min_load_limits_and_errors() {
        assert!((disk_average_exp(1e-12) - 1.0).abs() < 1e-12);
        assert!((disk_average_exp(1e-3) - (1.0 - (-1e-3f64).exp()) / 1e-3).abs() < 1e-12);
        assert!(matches!(
            rate_coverage_min_load(0.1, 1e-5, 5e-5, 4.0, 100.0),
            Err(Error::Domain(_))
        ));
        let v = rate_coverage_min_load(0.1, 1e-5, 5e-5, 4.0, 400.0).unwrap();
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn min_load_sic_reduces_and_improves() {
        let (rho, lam, mu, r) = (0.1, 1e-5, 5e-5, 400.0);
        let base = rate_coverage_min_load(rho, lam, mu, 4.0, r).unwrap();
        assert_eq!(rate_coverage_min_load_sic(rho, lam, mu, 4.0, r, 0).unwrap(), base);
        let one = rate_coverage_min_load_sic(rho, lam, mu, 4.0, r, 1).unwrap();
        let two = rate_coverage_min_load_sic(rho, lam, mu, 4.0, r, 2).unwrap();
        assert!(one > base && two >= one, "{base} {one} {two}");
    }

    #[test]
    fn min_load_sic_chain_at_zero_matches_closed_form() {
        // The n = 0 chain integrated numerically equals (1 − e^{−x})/x.
        let (rho, lam, r) = (0.2, 1e-5, 400.0);
        let s = 2f64.powf(rho) - 1.0;
        let x = PI * lam * s.sqrt() * PI / 2.0 * r * r;
        let w_max = lam * PI * r * r;
        let q = integrate(
            |w| (-s.sqrt() * w * c_integral(0.0, 4.0).unwrap()).exp(),
            0.0,
            w_max,
            &QuadratureSettings::default(),
        )
        .unwrap()
            / w_max;
        assert!((q - disk_average_exp(x)).abs() < 1e-12);
    }
}
