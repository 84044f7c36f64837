//! Parameter sweeps, figure presets and result files.

mod output;
mod presets;
pub mod validate;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::NetworkConfig;

pub use output::{emit_csv, emit_plot_script, format_value, write_result_dir, RESULT_CSV};
pub use presets::{default_grid, default_network, FIG2_WINDOW_SCALE, FIG4_RANGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Fig2,
        Preset::Fig3,
        Preset::Fig4,
        Preset::Fig5,
        Preset::Fig6,
        Preset::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Fig2 => "probability of cancelling the n-th interferer, closed forms vs simulation",
            Preset::Fig3 => "uplink success with up to N cancellations vs SIR threshold",
            Preset::Fig4 => "rate coverage of max-SIR and minimum-load association vs rate",
            Preset::Fig5 => "two-tier uplink with maximum instantaneous SIR association and SIC",
            Preset::Fig6 => "range-expanded users with and without cancelling the strongest AP",
            Preset::Custom => "uplink SIC success for a user-supplied network and grid",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::config(format!("unknown preset '{s}'")))
    }
}

/// One grid point. Each preset reads the fields it needs and rejects points
/// that lack them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    /// SIR threshold in dB.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_db: Option<f64>,
    /// Cancellation stage (fig2) or budget (fig3, fig5, custom).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Bias of the second tier (fig6).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Rate threshold in bit/s/Hz (fig4).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// 0 or 1 (fig6).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cancelled: Option<u8>,
}

impl GridPoint {
    pub fn eta_n(eta_db: f64, n: usize) -> Self {
        Self {
            eta_db: Some(eta_db),
            n: Some(n),
            ..Self::default()
        }
    }

    pub(crate) fn need_eta_db(&self) -> Result<f64> {
        match self.eta_db {
            Some(v) if v.is_finite() => Ok(v),
            Some(v) => Err(Error::config(format!("eta_db must be finite, got {v}"))),
            None => Err(Error::config("grid point needs eta_db")),
        }
    }

    pub(crate) fn need_n(&self) -> Result<usize> {
        self.n.ok_or_else(|| Error::config("grid point needs n"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub preset: Preset,
    pub grid: Vec<GridPoint>,
    /// Monte Carlo trials per batch; 0 skips the simulation columns.
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; does not affect results.
    #[serde(default)]
    pub threads: Option<usize>,
    pub network: NetworkConfig,
}

impl SweepSpec {
    /// A preset with its default network and grid.
    pub fn preset(preset: Preset, trials: u64, seed: u64) -> Result<Self> {
        Ok(Self {
            preset,
            grid: default_grid(preset),
            trials,
            seed,
            output_dir: None,
            threads: None,
            network: default_network(preset)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::config("grid is empty"));
        }
        if self.trials != 0 && self.trials < 1000 {
            return Err(Error::config(format!(
                "simulation needs at least 1000 trials (or 0 to skip it), got {}",
                self.trials
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::config("thread count must be >= 1"));
        }
        self.network.validate()
    }

    /// SHA-256 of the result-determining fields (everything but the output
    /// directory and thread count).
    pub fn config_hash(&self) -> String {
        let key = serde_json::json!({
            "preset": self.preset,
            "grid": self.grid,
            "trials": self.trials,
            "seed": self.seed,
            "network": self.network,
        });
        let digest = Sha256::digest(key.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Run metadata written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMeta {
    pub preset: Preset,
    pub seed: u64,
    pub trials: u64,
    pub threads: Option<usize>,
    pub grid: Vec<GridPoint>,
    pub network: NetworkConfig,
    pub config_hash: String,
    pub tool_version: String,
    pub started_at: String,
    pub wall_clock_ms: f64,
    /// Preset constants and simulation settings not carried by the grid.
    pub notes: Vec<String>,
}

/// A table with named columns. Empty cells are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub preset: Preset,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub meta: SweepMeta,
}

impl SweepResult {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn value(&self, row: usize, column: &str) -> Option<f64> {
        self.rows.get(row)?.get(self.column_index(column)?).copied().flatten()
    }

    /// Rows whose `column` equals `value` exactly.
    pub fn rows_where(&self, column: &str, value: f64) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&r| self.value(r, column) == Some(value))
            .collect()
    }
}

/// Evaluates every grid point of the preset: closed forms always, the
/// simulation columns when `spec.trials > 0`.
pub fn run_preset(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let started_at = chrono::Utc::now().to_rfc3339();
    let clock = Instant::now();
    let table = presets::run(spec)?;
    let meta = SweepMeta {
        preset: spec.preset,
        seed: spec.seed,
        trials: spec.trials,
        threads: spec.threads,
        grid: spec.grid.clone(),
        network: spec.network.clone(),
        config_hash: spec.config_hash(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        wall_clock_ms: clock.elapsed().as_secs_f64() * 1e3,
        notes: table.notes,
    };
    Ok(SweepResult {
        preset: spec.preset,
        columns: table.columns.into_iter().map(String::from).collect(),
        rows: table.rows,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("fig7".parse::<Preset>().is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = SweepSpec::preset(Preset::Fig3, 0, 1).unwrap();
        assert!(s.validate().is_ok());
        s.trials = 999;
        assert!(s.validate().is_err());
        s.trials = 1000;
        s.grid.clear();
        assert!(s.validate().is_err());
    }

    #[test]
    fn hash_ignores_threads_and_output() {
        let a = SweepSpec::preset(Preset::Fig2, 1000, 3).unwrap();
        let mut b = a.clone();
        b.threads = Some(4);
        b.output_dir = Some("/tmp/x".into());
        assert_eq!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
        b.seed = 4;
        assert_ne!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn custom_single_point() {
        let mut s = SweepSpec::preset(Preset::Custom, 0, 1).unwrap();
        s.grid = vec![GridPoint::eta_n(0.0, 1)];
        let r = run_preset(&s).unwrap();
        assert_eq!(r.rows.len(), 1);
        let v = r.value(0, "ps_sic").unwrap();
        assert!((v - 0.4129).abs() < 1e-3);
        assert_eq!(r.value(0, "mc_mean"), None);
    }

    #[test]
    fn missing_grid_field_is_rejected() {
        let mut s = SweepSpec::preset(Preset::Fig4, 0, 1).unwrap();
        s.grid = vec![GridPoint::eta_n(0.0, 1)];
        assert!(matches!(run_preset(&s), Err(Error::Config(_))));
    }
}
