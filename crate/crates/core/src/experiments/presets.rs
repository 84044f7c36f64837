//! Default networks and grids of the presets and the per-preset evaluation.

use std::time::Instant;

use crate::analytic::{
    outage_max_inst_sir, ps_can, ps_can_tsd, ps_ic_rea, ps_sic, ps_sic_max_inst_sir, rate_coverage_max_sir,
    rate_coverage_min_load, rate_coverage_min_load_sic,
};
use crate::error::{Error, Result};
use crate::model::{equivalent_density, NetworkConfig, TierParams};
use crate::montecarlo::{
    chain_counts, default_window, max_inst_sir_margins, rea_sirs, rea_tier, sic_scene_margins, simulate_load_policies,
    Estimate, McOptions, Ordering, ReaSample,
};
use crate::numerics::db_to_linear;

use super::{GridPoint, Preset, SweepSpec};

/// Connectivity range of the minimum-load preset in metres. With the preset
/// density, `λπR²` is 5.03, so five APs are in range.
pub const FIG4_RANGE: f64 = 400.0;

/// The cancellation preset samples interferers out to this multiple of the
/// default window; deep stages are sensitive to the far interference.
pub const FIG2_WINDOW_SCALE: f64 = 3.0;

pub(super) struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub notes: Vec<String>,
}

fn two_tier() -> Result<NetworkConfig> {
    NetworkConfig::new(
        vec![TierParams::new(1e-5, 10.0, 10.0), TierParams::new(1e-4, 1.0, 1.0)],
        4.0,
        1e-4,
        1e-4,
    )
}

pub fn default_network(preset: Preset) -> Result<NetworkConfig> {
    match preset {
        Preset::Fig2 | Preset::Fig3 | Preset::Custom => NetworkConfig::single_tier(1e-4, 1e-4, 4.0),
        Preset::Fig4 => NetworkConfig::single_tier(1e-5, 5e-5, 4.0),
        Preset::Fig5 | Preset::Fig6 => two_tier(),
    }
}

fn eta_db_grid() -> impl Iterator<Item = f64> + Clone {
    (-10..=10).step_by(2).map(f64::from)
}

pub fn default_grid(preset: Preset) -> Vec<GridPoint> {
    match preset {
        Preset::Fig2 => [0.0, 5.0, 10.0]
            .into_iter()
            .flat_map(|db| (1..=8).map(move |n| GridPoint::eta_n(db, n)))
            .collect(),
        Preset::Fig3 | Preset::Custom => eta_db_grid()
            .flat_map(|db| (0..=5).map(move |n| GridPoint::eta_n(db, n)))
            .collect(),
        Preset::Fig4 => (1..=10)
            .map(|k| GridPoint {
                rho: Some(k as f64 / 50.0),
                ..GridPoint::default()
            })
            .collect(),
        Preset::Fig5 => eta_db_grid()
            .flat_map(|db| (0..=3).map(move |n| GridPoint::eta_n(db, n)))
            .collect(),
        Preset::Fig6 => [2.0, 5.0, 10.0]
            .into_iter()
            .flat_map(|b| {
                eta_db_grid().flat_map(move |db| {
                    (0..=1u8).map(move |c| GridPoint {
                        eta_db: Some(db),
                        b: Some(b),
                        cancelled: Some(c),
                        ..GridPoint::default()
                    })
                })
            })
            .collect(),
    }
}

pub(super) fn run(spec: &SweepSpec) -> Result<Table> {
    match spec.preset {
        Preset::Fig2 => run_cancellation(spec),
        Preset::Fig3 | Preset::Custom => run_sic(spec),
        Preset::Fig4 => run_load(spec),
        Preset::Fig5 => run_max_sir(spec),
        Preset::Fig6 => run_rea(spec),
    }
}

fn mc_options(spec: &SweepSpec) -> McOptions {
    McOptions {
        threads: spec.threads,
        ..McOptions::default()
    }
}

fn cells(e: Option<Estimate>) -> [Option<f64>; 2] {
    match e {
        Some(e) if e.mean.is_finite() => [Some(e.mean), Some(e.stderr)],
        _ => [None, None],
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Batch wall time spread evenly over the rows that share it.
fn share(batch_ms: f64, rows: usize) -> f64 {
    if rows == 0 {
        0.0
    } else {
        batch_ms / rows as f64
    }
}

fn run_cancellation(spec: &SweepSpec) -> Result<Table> {
    let cfg = &spec.network;
    let mut points = Vec::with_capacity(spec.grid.len());
    for g in &spec.grid {
        let n = g.need_n()?;
        if n == 0 {
            return Err(Error::config("cancellation stage n must be >= 1"));
        }
        points.push((n, g.need_eta_db()?));
    }
    let window = FIG2_WINDOW_SCALE * default_window(cfg.mu_j);
    let clock = Instant::now();
    let batch = if spec.trials > 0 {
        let n_max = points.iter().map(|p| p.0).max().unwrap_or(1);
        let opts = McOptions {
            window_radius: Some(window),
            ..mc_options(spec)
        };
        Some(sic_scene_margins(cfg, n_max, spec.trials, spec.seed, &opts)?)
    } else {
        None
    };
    let batch_ms = share(ms(clock), points.len());

    let mut rows = Vec::with_capacity(points.len());
    for &(n, db) in &points {
        let t = Instant::now();
        let eta = db_to_linear(db);
        let pgfl = ps_can(eta, n, cfg.alpha)?;
        let tsd = if cfg.alpha == 4.0 { Some(ps_can_tsd(eta, n)?) } else { None };
        let (mut dist, mut fade, mut chain, mut reached) = (None, None, None, None);
        if let Some(b) = &batch {
            let count = |o: Ordering| b.iter().filter(|s| s.get(o).cancels(eta, n)).count() as u64;
            dist = Some(Estimate::from_counts(count(Ordering::DistanceOnly), spec.trials, spec.seed));
            fade = Some(Estimate::from_counts(count(Ordering::PowerWithFading), spec.trials, spec.seed));
            let (r, ok) = chain_counts(b, eta, n, Ordering::PowerWithFading);
            chain = Some(Estimate::from_counts(ok, r, spec.seed));
            reached = Some(r as f64);
        }
        let mut row = vec![Some(n as f64), Some(db), Some(pgfl), tsd];
        row.extend(cells(dist));
        row.extend(cells(fade));
        row.push(Some(eta));
        row.extend(cells(chain));
        row.push(reached);
        row.push(Some(ms(t) + batch_ms));
        rows.push(row);
    }
    Ok(Table {
        columns: vec![
            "n",
            "eta_db",
            "ps_can_pgfl",
            "ps_can_tsd",
            "mc_dist_mean",
            "mc_dist_stderr",
            "mc_fade_mean",
            "mc_fade_stderr",
            "eta_lin",
            "mc_chain_mean",
            "mc_chain_stderr",
            "mc_chain_reached",
            "runtime_ms",
        ],
        rows,
        notes: vec![
            format!("window_radius_m={window}"),
            "mc_dist/mc_fade: unconditional Pr[X_(n)/I_n >= eta] under nearest-first / strongest-first ordering"
                .into(),
            "mc_chain: strongest-first, among trials whose decode chain attempts stage n".into(),
        ],
    })
}

fn run_sic(spec: &SweepSpec) -> Result<Table> {
    let cfg = &spec.network;
    let lambda_eq = equivalent_density(cfg).lambda_eq;
    let mut points = Vec::with_capacity(spec.grid.len());
    for g in &spec.grid {
        points.push((g.need_eta_db()?, g.need_n()?));
    }
    let clock = Instant::now();
    let batch = if spec.trials > 0 {
        let n_max = points.iter().map(|p| p.1).max().unwrap_or(0);
        Some(sic_scene_margins(cfg, n_max, spec.trials, spec.seed, &mc_options(spec))?)
    } else {
        None
    };
    let batch_ms = share(ms(clock), points.len());

    let mut rows = Vec::with_capacity(points.len());
    for &(db, n) in &points {
        let t = Instant::now();
        let eta = db_to_linear(db);
        let exact = ps_sic(eta, n, lambda_eq, cfg.mu_j, cfg.alpha)?.ps_sic_total;
        let mc = batch.as_ref().map(|b| {
            let hits = b.iter().filter(|s| s.power.succeeds(eta, n)).count() as u64;
            Estimate::from_counts(hits, spec.trials, spec.seed)
        });
        let mut row = vec![Some(db), Some(eta), Some(n as f64), Some(exact)];
        row.extend(cells(mc));
        row.push(Some(ms(t) + batch_ms));
        rows.push(row);
    }
    Ok(Table {
        columns: vec!["eta_db", "eta_lin", "n_max", "ps_sic", "mc_mean", "mc_stderr", "runtime_ms"],
        rows,
        notes: vec![
            format!("lambda_eq={lambda_eq}"),
            "mc: strongest-first decode/cancel chain".into(),
        ],
    })
}

fn run_load(spec: &SweepSpec) -> Result<Table> {
    let cfg = &spec.network;
    if cfg.tiers.len() != 1 {
        return Err(Error::config("the minimum-load preset needs a single-tier network"));
    }
    let lambda = cfg.tiers[0].lambda;
    let (mu_j, alpha) = (cfg.mu_j, cfg.alpha);
    let mut rhos = Vec::with_capacity(spec.grid.len());
    for g in &spec.grid {
        match g.rho {
            Some(r) if r.is_finite() && r > 0.0 => rhos.push(r),
            Some(r) => return Err(Error::config(format!("rho must be positive, got {r}"))),
            None => return Err(Error::config("grid point needs rho")),
        }
    }
    let clock = Instant::now();
    let batch = if spec.trials > 0 {
        Some(simulate_load_policies(
            lambda,
            mu_j,
            alpha,
            FIG4_RANGE,
            spec.trials,
            spec.seed,
            &mc_options(spec),
        )?)
    } else {
        None
    };
    let batch_ms = share(ms(clock), rhos.len());

    let mut rows = Vec::with_capacity(rhos.len());
    for &rho in &rhos {
        let t = Instant::now();
        let mut row = vec![
            Some(rho),
            Some(rate_coverage_max_sir(rho, lambda, mu_j, alpha)?),
            Some(rate_coverage_min_load(rho, lambda, mu_j, alpha, FIG4_RANGE)?),
            Some(rate_coverage_min_load_sic(rho, lambda, mu_j, alpha, FIG4_RANGE, 1)?),
        ];
        let est = |pred: &dyn Fn(&crate::montecarlo::LoadPolicySamples) -> bool| {
            batch.as_ref().map(|b| {
                let hits = b.iter().filter(|s| pred(s)).count() as u64;
                Estimate::from_counts(hits, b.len() as u64, spec.seed)
            })
        };
        row.extend(cells(est(&|s| s.nearest.covered(rho, 0))));
        row.extend(cells(est(&|s| s.min_load.covered(rho, 0))));
        row.extend(cells(est(&|s| s.min_load.covered(rho, 1))));
        row.push(Some(ms(t) + batch_ms));
        rows.push(row);
    }
    Ok(Table {
        columns: vec![
            "rho",
            "rate_max_sir",
            "rate_min_load",
            "rate_min_load_sic1",
            "mc_max_sir_mean",
            "mc_max_sir_stderr",
            "mc_min_load_mean",
            "mc_min_load_stderr",
            "mc_min_load_sic1_mean",
            "mc_min_load_sic1_stderr",
            "runtime_ms",
        ],
        rows,
        notes: vec![
            format!("r_con_m={FIG4_RANGE}"),
            "max_sir: nearest AP; min_load: least-loaded AP within r_con; sic1: strongest interfering AP cancelled"
                .into(),
        ],
    })
}

fn run_max_sir(spec: &SweepSpec) -> Result<Table> {
    let cfg = &spec.network;
    let mut points = Vec::with_capacity(spec.grid.len());
    for g in &spec.grid {
        points.push((g.need_eta_db()?, g.need_n()?));
    }
    let clock = Instant::now();
    let batch = if spec.trials > 0 {
        let n_max = points.iter().map(|p| p.1).max().unwrap_or(0);
        let eta_min = points.iter().map(|p| db_to_linear(p.0)).fold(f64::INFINITY, f64::min);
        Some(max_inst_sir_margins(cfg, eta_min, n_max, spec.trials, spec.seed, &mc_options(spec))?)
    } else {
        None
    };
    let batch_ms = share(ms(clock), points.len());

    let mut rows = Vec::with_capacity(points.len());
    for &(db, n) in &points {
        let t = Instant::now();
        let eta = db_to_linear(db);
        let mc = batch.as_ref().map(|b| {
            let hits = b.iter().filter(|m| m[n] >= eta).count() as u64;
            Estimate::from_counts(hits, spec.trials, spec.seed)
        });
        let mut row = vec![
            Some(db),
            Some(eta),
            Some(n as f64),
            Some(outage_max_inst_sir(eta, cfg)?),
            Some(ps_sic_max_inst_sir(eta, n, cfg)?),
        ];
        row.extend(cells(mc));
        row.push(Some(ms(t) + batch_ms));
        rows.push(row);
    }
    Ok(Table {
        columns: vec!["eta_db", "eta_lin", "n_max", "outage", "ps_sic", "mc_mean", "mc_stderr", "runtime_ms"],
        rows,
        notes: vec!["mc: best AP over all tiers after up to n_max strongest-first cancellations".into()],
    })
}

fn run_rea(spec: &SweepSpec) -> Result<Table> {
    if spec.network.tiers.len() < 2 {
        return Err(Error::config("the range-expansion preset needs at least two tiers"));
    }
    let mut points = Vec::with_capacity(spec.grid.len());
    for g in &spec.grid {
        let b = g.b.ok_or_else(|| Error::config("grid point needs b"))?;
        let c = g.cancelled.ok_or_else(|| Error::config("grid point needs cancelled"))?;
        if c > 1 {
            return Err(Error::config(format!("cancelled must be 0 or 1, got {c}")));
        }
        points.push((b, g.need_eta_db()?, c));
    }
    let with_bias = |b: f64| -> Result<NetworkConfig> {
        let mut cfg = spec.network.clone();
        cfg.tiers[1].bias = b;
        cfg.validate()?;
        Ok(cfg)
    };

    let clock = Instant::now();
    let mut batches: Vec<(f64, Vec<ReaSample>)> = Vec::new();
    if spec.trials > 0 {
        for &(b, _, _) in &points {
            if batches.iter().all(|(bb, _)| *bb != b) {
                let cfg = with_bias(b)?;
                let k = rea_tier(&cfg)?;
                batches.push((b, rea_sirs(&cfg, k, spec.trials, spec.seed, &mc_options(spec))?));
            }
        }
    }
    let batch_ms = share(ms(clock), points.len());

    let mut rows = Vec::with_capacity(points.len());
    for &(b, db, c) in &points {
        let t = Instant::now();
        let cfg = with_bias(b)?;
        let k = rea_tier(&cfg)?;
        let eta = db_to_linear(db);
        let mc = batches.iter().find(|(bb, _)| *bb == b).map(|(_, s)| {
            let hits = s.iter().filter(|x| x.succeeds(eta, c)).count() as u64;
            Estimate::from_counts(hits, spec.trials, spec.seed)
        });
        let mut row = vec![
            Some(b),
            Some(db),
            Some(eta),
            Some(f64::from(c)),
            Some(ps_ic_rea(eta, &cfg, k, c)?),
        ];
        row.extend(cells(mc));
        row.push(Some(ms(t) + batch_ms));
        rows.push(row);
    }
    Ok(Table {
        columns: vec!["b", "eta_db", "eta_lin", "cancelled", "ps_rea", "mc_mean", "mc_stderr", "runtime_ms"],
        rows,
        notes: vec!["b sets the bias of the second tier; one simulation batch per b".into()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids() {
        assert_eq!(default_grid(Preset::Fig2).len(), 24);
        assert_eq!(default_grid(Preset::Fig3).len(), 66);
        assert_eq!(default_grid(Preset::Fig4).len(), 10);
        assert_eq!(default_grid(Preset::Fig5).len(), 44);
        assert_eq!(default_grid(Preset::Fig6).len(), 66);
        let rhos: Vec<f64> = default_grid(Preset::Fig4).iter().map(|g| g.rho.unwrap()).collect();
        assert_eq!(rhos[0], 0.02);
        assert_eq!(rhos[9], 0.2);
        for p in Preset::ALL {
            default_network(p).unwrap();
        }
    }

    #[test]
    fn fig4_range_holds_five_aps() {
        let cfg = default_network(Preset::Fig4).unwrap();
        assert_eq!(crate::analytic::aps_in_range(cfg.tiers[0].lambda, FIG4_RANGE).unwrap(), 5);
    }

    #[test]
    fn analytic_only_presets() {
        for p in [Preset::Fig2, Preset::Fig4, Preset::Fig6] {
            let spec = SweepSpec::preset(p, 0, 1).unwrap();
            let r = super::super::run_preset(&spec).unwrap();
            assert_eq!(r.rows.len(), spec.grid.len());
            assert!(r.rows.iter().all(|row| row.len() == r.columns.len()));
        }
    }
}
