//! Formula registry for `hetsic eval`.

use std::path::PathBuf;

use clap::Args;
use hetsic::analytic::{
    kurtosis_after_cancellation, load_pmf, outage_max_inst_sir, ps_can, ps_can_tsd, ps_ic, ps_ic_rea, ps_plain, ps_sic,
    ps_sic_max_inst_sir, rate_coverage_max_sir, rate_coverage_min_load, rate_coverage_min_load_sic,
};
use hetsic::error::{Error, Result};
use hetsic::experiments::{default_network, Preset};
use hetsic::model::{equivalent_density, NetworkConfig};
use hetsic::montecarlo::rea_tier;
use hetsic::numerics::{c_integral, c_zero, db_to_linear, linear_to_db};

pub const REGISTRY: &[(&str, &str)] = &[
    ("ps_plain", "success without cancellation: --eta|--eta-db, --lambda-eq, --mu-j, --alpha"),
    ("ps_ic", "decoding after n cancellations: --eta|--eta-db, --n, --lambda-eq, --mu-j, --alpha"),
    ("ps_can", "probability of cancelling the n-th interferer: --eta|--eta-db, --n, --alpha"),
    ("ps_can_tsd", "same, truncated-stable approximation (alpha = 4): --eta|--eta-db, --n"),
    ("ps_sic", "success with up to n cancellations: --eta|--eta-db, --n, --lambda-eq, --mu-j, --alpha"),
    ("kurtosis", "excess kurtosis after n cancellations: --n, --alpha"),
    ("load_pmf", "probability that the tagged cell holds m users: --m, --mu-j, --lambda"),
    ("rate_coverage_max_sir", "rate coverage, nearest AP: --rho, --lambda, --mu-j, --alpha"),
    ("rate_coverage_min_load", "rate coverage, least-loaded AP in range: --rho, --lambda, --mu-j, --alpha, --r-con"),
    (
        "rate_coverage_min_load_sic",
        "same with n cancellations: --rho, --lambda, --mu-j, --alpha, --r-con, --n",
    ),
    ("outage_max_inst_sir", "outage, best instantaneous SIR over tiers: --eta|--eta-db, network"),
    ("ps_sic_max_inst_sir", "same with up to n cancellations: --eta|--eta-db, --n, network"),
    ("ps_ic_rea", "range-expanded users: --eta|--eta-db, --cancelled 0|1, network with --bias"),
    ("c_integral", "C(b, alpha): --b, --alpha"),
    ("c_zero", "C(0, alpha): --alpha"),
];

pub fn registry_listing() -> String {
    REGISTRY
        .iter()
        .map(|(name, help)| format!("  {name:<28} {help}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Formula name; `hetsic eval list` prints the registry.
    pub formula: String,
    /// SIR threshold in dB.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "eta")]
    pub eta_db: Option<f64>,
    /// SIR threshold, linear.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Cancellation stage or budget.
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<i64>,
    /// Path-loss exponent (> 2).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Lower limit b of C(b, alpha), dimensionless.
    #[arg(long)]
    pub b: Option<f64>,
    /// AP density in m^-2.
    #[arg(long, default_value_t = 1e-4)]
    pub lambda: f64,
    /// Equivalent AP density in m^-2.
    #[arg(long, default_value_t = 1e-4)]
    pub lambda_eq: f64,
    /// Density of co-channel users in m^-2.
    #[arg(long)]
    pub mu_j: Option<f64>,
    /// Rate threshold in bit/s/Hz.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Connectivity range in metres.
    #[arg(long, default_value_t = 400.0)]
    pub r_con: f64,
    /// Number of users in the tagged cell.
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<i64>,
    /// 1 to cancel the strongest AP before decoding.
    #[arg(long, default_value_t = 0)]
    pub cancelled: u8,
    /// Bias of the second tier, linear (>= 1).
    #[arg(long)]
    pub bias: Option<f64>,
    /// Network JSON for the multi-tier formulas; default is the two-tier
    /// network with a tenfold power ratio.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Digits after the decimal point.
    #[arg(long, default_value_t = 6)]
    pub precision: usize,
}

pub struct Evaluation {
    pub echo: String,
    pub values: Vec<(String, f64)>,
}

impl EvalArgs {
    fn eta(&self) -> Result<f64> {
        let eta = match (self.eta, self.eta_db) {
            (Some(e), None) => e,
            (None, Some(db)) => db_to_linear(db),
            (Some(_), Some(_)) => return Err(Error::Config("give either --eta or --eta-db, not both".into())),
            (None, None) => return Err(Error::Config("missing --eta or --eta-db".into())),
        };
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::Config(format!("SIR threshold must be positive, got {eta}")));
        }
        Ok(eta)
    }

    fn n(&self) -> Result<usize> {
        let n = self.n.ok_or_else(|| Error::Config("missing --n".into()))?;
        usize::try_from(n).map_err(|_| Error::Config(format!("--n must be >= 0, got {n}")))
    }

    fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(4.0)
    }

    fn mu_j(&self) -> f64 {
        self.mu_j.unwrap_or(1e-4)
    }

    fn rho(&self) -> Result<f64> {
        self.rho.ok_or_else(|| Error::Config("missing --rho".into()))
    }

    /// Config file or the default two-tier network; flags win.
    fn network(&self) -> Result<NetworkConfig> {
        let mut cfg = match &self.config {
            Some(p) => NetworkConfig::from_json_file(p)?,
            None => default_network(Preset::Fig5)?,
        };
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(m) = self.mu_j {
            cfg.mu_j = m;
            cfg.mu = cfg.mu.max(m);
        }
        if let Some(b) = self.bias {
            let t = cfg
                .tiers
                .get_mut(1)
                .ok_or_else(|| Error::Config("--bias needs a network with at least two tiers".into()))?;
            t.bias = b;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn eta_echo(eta: f64) -> String {
    format!("eta={eta} eta_db={}", linear_to_db(eta))
}

pub fn evaluate(a: &EvalArgs) -> Result<Evaluation> {
    let alpha = a.alpha();
    let one = |echo: String, v: f64| Evaluation {
        echo,
        values: vec![(String::new(), v)],
    };
    let name = a.formula.as_str();
    Ok(match name {
        "ps_plain" => {
            let eta = a.eta()?;
            one(
                format!("{} lambda_eq={} mu_j={} alpha={alpha}", eta_echo(eta), a.lambda_eq, a.mu_j()),
                ps_plain(eta, a.lambda_eq, a.mu_j(), alpha)?,
            )
        }
        "ps_ic" => {
            let (eta, n) = (a.eta()?, a.n()?);
            one(
                format!("{} n={n} lambda_eq={} mu_j={} alpha={alpha}", eta_echo(eta), a.lambda_eq, a.mu_j()),
                ps_ic(eta, n, a.lambda_eq, a.mu_j(), alpha)?,
            )
        }
        "ps_can" => {
            let (eta, n) = (a.eta()?, a.n()?);
            one(format!("{} n={n} alpha={alpha}", eta_echo(eta)), ps_can(eta, n, alpha)?)
        }
        "ps_can_tsd" => {
            let (eta, n) = (a.eta()?, a.n()?);
            if alpha != 4.0 {
                return Err(Error::Domain("the truncated-stable form is defined for alpha = 4 only".into()));
            }
            one(format!("{} n={n} alpha=4", eta_echo(eta)), ps_can_tsd(eta, n)?)
        }
        "ps_sic" => {
            let (eta, n) = (a.eta()?, a.n()?);
            let b = ps_sic(eta, n, a.lambda_eq, a.mu_j(), alpha)?;
            let mut values = vec![(String::new(), b.ps_sic_total), ("ps_no_ic".into(), b.ps_no_ic)];
            for (i, l) in b.per_level.iter().enumerate() {
                values.push((format!("level_{}", i + 1), l.level_contribution));
            }
            Evaluation {
                echo: format!("{} n={n} lambda_eq={} mu_j={} alpha={alpha}", eta_echo(eta), a.lambda_eq, a.mu_j()),
                values,
            }
        }
        "kurtosis" => {
            let n = a.n()?;
            one(format!("n={n} alpha={alpha}"), kurtosis_after_cancellation(alpha, n)?)
        }
        "load_pmf" => {
            let m = a.m.ok_or_else(|| Error::Config("missing --m".into()))?;
            let m = u64::try_from(m).map_err(|_| Error::Config(format!("--m must be >= 0, got {m}")))?;
            one(
                format!("m={m} mu_j={} lambda={}", a.mu_j(), a.lambda),
                load_pmf(m, a.mu_j(), a.lambda)?,
            )
        }
        "rate_coverage_max_sir" => {
            let rho = a.rho()?;
            one(
                format!("rho={rho} lambda={} mu_j={} alpha={alpha}", a.lambda, a.mu_j()),
                rate_coverage_max_sir(rho, a.lambda, a.mu_j(), alpha)?,
            )
        }
        "rate_coverage_min_load" => {
            let rho = a.rho()?;
            one(
                format!("rho={rho} lambda={} mu_j={} alpha={alpha} r_con={}", a.lambda, a.mu_j(), a.r_con),
                rate_coverage_min_load(rho, a.lambda, a.mu_j(), alpha, a.r_con)?,
            )
        }
        "rate_coverage_min_load_sic" => {
            let (rho, n) = (a.rho()?, a.n()?);
            one(
                format!(
                    "rho={rho} lambda={} mu_j={} alpha={alpha} r_con={} n={n}",
                    a.lambda,
                    a.mu_j(),
                    a.r_con
                ),
                rate_coverage_min_load_sic(rho, a.lambda, a.mu_j(), alpha, a.r_con, n)?,
            )
        }
        "outage_max_inst_sir" => {
            let (eta, cfg) = (a.eta()?, a.network()?);
            one(
                format!("{} network={}", eta_echo(eta), compact(&cfg)),
                outage_max_inst_sir(eta, &cfg)?,
            )
        }
        "ps_sic_max_inst_sir" => {
            let (eta, n, cfg) = (a.eta()?, a.n()?, a.network()?);
            one(
                format!("{} n={n} network={}", eta_echo(eta), compact(&cfg)),
                ps_sic_max_inst_sir(eta, n, &cfg)?,
            )
        }
        "ps_ic_rea" => {
            let (eta, cfg) = (a.eta()?, a.network()?);
            if a.cancelled > 1 {
                return Err(Error::Config(format!("--cancelled must be 0 or 1, got {}", a.cancelled)));
            }
            let k = rea_tier(&cfg)?;
            one(
                format!(
                    "{} cancelled={} tier={} lambda_eq={} network={}",
                    eta_echo(eta),
                    a.cancelled,
                    k + 1,
                    equivalent_density(&cfg).lambda_eq,
                    compact(&cfg)
                ),
                ps_ic_rea(eta, &cfg, k, a.cancelled)?,
            )
        }
        "c_integral" => {
            let b = a.b.ok_or_else(|| Error::Config("missing --b".into()))?;
            one(format!("b={b} alpha={alpha}"), c_integral(b, alpha)?)
        }
        "c_zero" => one(format!("alpha={alpha}"), c_zero(alpha)?),
        _ => {
            return Err(Error::Config(format!(
                "unknown formula '{name}'; available:\n{}",
                registry_listing()
            )))
        }
    })
}

fn compact(cfg: &NetworkConfig) -> String {
    serde_json::to_string(cfg).unwrap_or_default()
}
