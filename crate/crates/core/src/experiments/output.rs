//! CSV, gnuplot and metadata files of a sweep.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::{Preset, SweepResult};

pub const RESULT_CSV: &str = "result.csv";
const PLOT_SCRIPT: &str = "plot.gp";
const META_JSON: &str = "meta.json";

/// Nine significant digits, shortest form. `None` is an empty field.
pub fn format_value(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(x) if !x.is_finite() => x.to_string(),
        Some(x) => {
            let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
            rounded.to_string()
        }
    }
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(&result.columns).map_err(csv_err)?;
    for row in &result.rows {
        w.write_record(row.iter().map(|v| format_value(*v))).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

struct PlotLayout {
    x: &'static str,
    groups: &'static [&'static str],
    lines: &'static [&'static str],
    points: &'static [&'static str],
    xlabel: &'static str,
    ylabel: &'static str,
}

fn layout(preset: Preset) -> PlotLayout {
    match preset {
        Preset::Fig2 => PlotLayout {
            x: "n",
            groups: &["eta_db"],
            lines: &["ps_can_pgfl", "ps_can_tsd"],
            points: &["mc_dist_mean", "mc_fade_mean"],
            xlabel: "n",
            ylabel: "P(cancel n-th interferer)",
        },
        Preset::Fig3 | Preset::Custom => PlotLayout {
            x: "eta_db",
            groups: &["n_max"],
            lines: &["ps_sic"],
            points: &["mc_mean"],
            xlabel: "SIR threshold (dB)",
            ylabel: "success probability",
        },
        Preset::Fig4 => PlotLayout {
            x: "rho",
            groups: &[],
            lines: &["rate_max_sir", "rate_min_load", "rate_min_load_sic1"],
            points: &["mc_max_sir_mean", "mc_min_load_mean", "mc_min_load_sic1_mean"],
            xlabel: "rate threshold (bit/s/Hz)",
            ylabel: "rate coverage",
        },
        Preset::Fig5 => PlotLayout {
            x: "eta_db",
            groups: &["n_max"],
            lines: &["ps_sic"],
            points: &["mc_mean"],
            xlabel: "SIR threshold (dB)",
            ylabel: "success probability",
        },
        Preset::Fig6 => PlotLayout {
            x: "eta_db",
            groups: &["b", "cancelled"],
            lines: &["ps_rea"],
            points: &["mc_mean"],
            xlabel: "SIR threshold (dB)",
            ylabel: "success probability",
        },
    }
}

/// Distinct combinations of the group columns, in first-seen order.
fn group_keys(result: &SweepResult, groups: &[&str]) -> Vec<Vec<f64>> {
    let mut keys: Vec<Vec<f64>> = Vec::new();
    for r in 0..result.rows.len() {
        let key: Vec<f64> = groups
            .iter()
            .map(|g| result.value(r, g).unwrap_or(f64::NAN))
            .collect();
        if !keys.iter().any(|k| k == &key) {
            keys.push(key);
        }
    }
    keys
}

/// Gnuplot script that reads `result.csv` from its own directory. One curve
/// per group and series; columns that are entirely empty are skipped.
pub fn emit_plot_script(result: &SweepResult, path: &Path) -> Result<()> {
    let l = layout(result.preset);
    let has_data = |c: &str| (0..result.rows.len()).any(|r| result.value(r, c).is_some());
    let mut s = String::new();
    let _ = writeln!(s, "# {} sweep, seed {}, {} trials", result.preset, result.meta.seed, result.meta.trials);
    let _ = writeln!(s, "# external comparison bounds are not drawn");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile columnheaders");
    let _ = writeln!(s, "set key outside right");
    let _ = writeln!(s, "set grid");
    let _ = writeln!(s, "set xlabel '{}'", l.xlabel);
    let _ = writeln!(s, "set ylabel '{}'", l.ylabel);
    let _ = writeln!(s, "set yrange [0:1]");

    let keys = group_keys(result, l.groups);
    let mut curves = Vec::new();
    for key in &keys {
        let filter = l
            .groups
            .iter()
            .zip(key)
            .map(|(g, v)| format!("column('{g}')=={}", format_value(Some(*v))))
            .collect::<Vec<_>>()
            .join(" && ");
        let label = l
            .groups
            .iter()
            .zip(key)
            .map(|(g, v)| {
                if *g == "n_max" && *v == 0.0 {
                    "no SIC".to_string()
                } else {
                    format!("{g}={}", format_value(Some(*v)))
                }
            })
            .collect::<Vec<_>>()
            .join(" ");
        for (cols, style) in [(l.lines, "lines"), (l.points, "points")] {
            for c in cols.iter().filter(|c| has_data(c)) {
                let y = if filter.is_empty() {
                    format!("column('{c}')")
                } else {
                    format!("({filter} ? column('{c}') : 1/0)")
                };
                let title = if label.is_empty() { c.to_string() } else { format!("{c} {label}") };
                curves.push(format!(
                    "'{RESULT_CSV}' using (column('{}')):{y} with {style} title '{title}'",
                    l.x
                ));
            }
        }
    }
    if curves.is_empty() {
        let _ = writeln!(s, "# no data");
    } else {
        let _ = writeln!(s, "plot \\\n  {}", curves.join(", \\\n  "));
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Writes `result.csv`, `plot.gp` and `meta.json` under
/// `<root>/<preset>/<UTC timestamp>-<seed>/` and returns that directory.
pub fn write_result_dir(result: &SweepResult, root: &Path) -> Result<PathBuf> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    let base = root.join(result.preset.name()).join(format!("{stamp}-{}", result.meta.seed));
    let mut dir = base.clone();
    let mut k = 1;
    while dir.exists() {
        dir = PathBuf::from(format!("{}-{k}", base.display()));
        k += 1;
    }
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    emit_csv(result, &dir.join(RESULT_CSV))?;
    emit_plot_script(result, &dir.join(PLOT_SCRIPT))?;
    let meta = dir.join(META_JSON);
    let text = serde_json::to_string_pretty(&result.meta)?;
    fs::write(&meta, text).map_err(|e| Error::io(&meta, e))?;
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::super::{run_preset, SweepSpec};
    use super::*;

    fn fig3() -> SweepResult {
        run_preset(&SweepSpec::preset(Preset::Fig3, 0, 7).unwrap()).unwrap()
    }

    #[test]
    fn value_formatting() {
        assert_eq!(format_value(None), "");
        assert_eq!(format_value(Some(0.5)), "0.5");
        assert_eq!(format_value(Some(1.0 / 3.0)), "0.333333333");
        assert_eq!(format_value(Some(2.0)), "2");
    }

    #[test]
    fn csv_round_trip() {
        let r = fig3();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        emit_csv(&r, &p).unwrap();
        let mut rd = csv::Reader::from_path(&p).unwrap();
        let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(header, r.columns);
        let recs: Vec<csv::StringRecord> = rd.records().map(|x| x.unwrap()).collect();
        assert_eq!(recs.len(), r.rows.len());
        for (rec, row) in recs.iter().zip(&r.rows) {
            for (field, v) in rec.iter().zip(row) {
                match v {
                    None => assert!(field.is_empty()),
                    Some(x) => {
                        let y: f64 = field.parse().unwrap();
                        assert!((x - y).abs() <= 1e-8 * x.abs().max(1e-300));
                    }
                }
            }
        }
    }

    #[test]
    fn empty_result_is_header_only() {
        let mut r = fig3();
        r.rows.clear();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        emit_csv(&r, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("eta_db,"));
    }

    #[test]
    fn plot_script_has_a_curve_per_group() {
        let r = fig3();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("plot.gp");
        emit_plot_script(&r, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        // Six budgets, mc columns empty.
        assert_eq!(text.matches("with lines").count(), 6);
        assert_eq!(text.matches("with points").count(), 0);
        assert!(text.contains("no SIC"));
        assert!(text.contains(RESULT_CSV));
    }

    #[test]
    fn result_dir_layout() {
        let r = fig3();
        let root = tempfile::tempdir().unwrap();
        let a = write_result_dir(&r, root.path()).unwrap();
        let b = write_result_dir(&r, root.path()).unwrap();
        assert_ne!(a, b);
        assert!(a.starts_with(root.path().join("fig3")));
        for f in [RESULT_CSV, PLOT_SCRIPT, META_JSON] {
            assert!(a.join(f).is_file());
        }
        let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join(META_JSON)).unwrap()).unwrap();
        assert_eq!(meta["seed"], 7);
        assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
    }
}
