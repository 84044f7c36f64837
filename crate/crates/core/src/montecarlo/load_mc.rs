//! Downlink association by load: AP and user layouts, Voronoi loads and rate
//! coverage of the nearest-AP and least-loaded policies.

use std::f64::consts::LN_2;

use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::error::{Error, Result};

use super::chain::{fading_key, margins_from_top, ordered_top};
use super::{check_trials, map_trials, path_gain, sample_ppp, trial_rng, Estimate, McOptions, Ordering, Point};

/// Uniform bucket grid over `[-half, half]²` for nearest-point queries.
struct Grid<'a> {
    points: &'a [Point],
    cell: f64,
    side: usize,
    half: f64,
    buckets: Vec<Vec<u32>>,
}

impl<'a> Grid<'a> {
    fn new(points: &'a [Point], half: f64, cell: f64) -> Self {
        let side = ((2.0 * half / cell).ceil() as usize).max(1);
        let mut g = Self {
            points,
            cell,
            side,
            half,
            buckets: vec![Vec::new(); side * side],
        };
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = g.cell_of(p);
            g.buckets[cy * side + cx].push(i as u32);
        }
        g
    }

    fn cell_of(&self, p: &Point) -> (usize, usize) {
        let f = |v: f64| (((v + self.half) / self.cell).floor().max(0.0) as usize).min(self.side - 1);
        (f(p.x), f(p.y))
    }

    /// Index of the point nearest to `q`; lowest index on ties.
    fn nearest(&self, q: &Point) -> Option<usize> {
        let (cx, cy) = self.cell_of(q);
        let (cx, cy) = (cx as i64, cy as i64);
        let mut best: Option<(f64, usize)> = None;
        for k in 0..self.side as i64 {
            for dy in -k..=k {
                for dx in -k..=k {
                    if dx.abs() != k && dy.abs() != k {
                        continue;
                    }
                    let (x, y) = (cx + dx, cy + dy);
                    if x < 0 || y < 0 || x >= self.side as i64 || y >= self.side as i64 {
                        continue;
                    }
                    for &i in &self.buckets[y as usize * self.side + x as usize] {
                        let d = self.points[i as usize].dist2(q);
                        let i = i as usize;
                        if best.is_none_or(|(bd, bi)| d < bd || (d == bd && i < bi)) {
                            best = Some((d, i));
                        }
                    }
                }
            }
            if let Some((bd, _)) = best {
                let reach = k as f64 * self.cell;
                if bd <= reach * reach {
                    break;
                }
            }
        }
        best.map(|(_, i)| i)
    }
}

fn check_inputs(lambda: f64, mu_j: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain(format!("AP density must be positive, got {lambda}")));
    }
    if !(mu_j.is_finite() && mu_j >= 0.0) {
        return Err(Error::domain(format!("user density must be >= 0, got {mu_j}")));
    }
    Ok(())
}

/// APs and other users around a typical user at the origin, with the load of
/// every AP whose cell can reach into `reach` metres of the origin.
struct Layout {
    aps: Vec<Point>,
    /// Other users associated with each AP; exact for APs within `reach`.
    loads: Vec<u64>,
}

fn sample_layout(lambda: f64, mu_j: f64, reach: f64, seed: u64, stream: u64) -> Result<Layout> {
    let spacing = 1.0 / lambda.sqrt();
    let user_radius = reach + 4.0 * spacing;
    let ap_radius = user_radius + 4.0 * spacing;
    let mut rng = trial_rng(seed, stream);
    let aps = sample_ppp(lambda, ap_radius, &mut rng)?;
    let users = sample_ppp(mu_j, user_radius, &mut rng)?;
    let mut loads = vec![0u64; aps.len()];
    if !aps.is_empty() {
        let grid = Grid::new(&aps, ap_radius, spacing);
        for u in &users {
            if let Some(i) = grid.nearest(u) {
                loads[i] += 1;
            }
        }
    }
    Ok(Layout { aps, loads })
}

/// One typical user under both policies: the serving load and the chain
/// margins with 0 and 1 downlink cancellations (strongest interferer first).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolicySample {
    pub load: u64,
    pub theta: [f64; 2],
}

impl PolicySample {
    /// `(1/(m+1))·log₂(1 + Θ) ≥ ρ` with `m` the other users on the AP.
    pub fn covered(&self, rho: f64, cancellations: usize) -> bool {
        let need = (LN_2 * rho * (self.load as f64 + 1.0)).exp_m1();
        self.theta[cancellations.min(1)] >= need
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoadPolicySamples {
    pub nearest: PolicySample,
    pub min_load: PolicySample,
    /// APs inside the connectivity range.
    pub aps_in_range: usize,
}

fn policy_sample(aps: &[Point], loads: &[u64], serving: usize, alpha: f64, h: &[f64]) -> PolicySample {
    let signal = h[serving] * path_gain(aps[serving].norm2(), alpha);
    let powers: Vec<f64> = (0..aps.len())
        .filter(|&i| i != serving)
        .map(|i| h[i] * path_gain(aps[i].norm2(), alpha))
        .collect();
    let (top, rest) = ordered_top(&powers, 1, Ordering::PowerWithFading);
    let m = margins_from_top(signal, &top, rest, 1);
    PolicySample {
        load: loads[serving],
        theta: [m[0], m[1]],
    }
}

/// Samples the typical user under nearest-AP and least-loaded association.
/// The least-loaded policy picks the AP with the fewest users within `r_con`,
/// nearest first on ties, and falls back to the nearest AP when none is in
/// range.
pub fn simulate_load_policies(
    lambda: f64,
    mu_j: f64,
    alpha: f64,
    r_con: f64,
    trials: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<Vec<LoadPolicySamples>> {
    check_inputs(lambda, mu_j)?;
    if !(r_con.is_finite() && r_con > 0.0) {
        return Err(Error::domain(format!("connectivity range must be positive, got {r_con}")));
    }
    check_trials(trials, 1)?;
    let out = map_trials(0, trials, opts.threads, |i| -> Result<Option<LoadPolicySamples>> {
        let layout = sample_layout(lambda, mu_j, r_con, seed, i)?;
        let aps = &layout.aps;
        if aps.is_empty() {
            return Ok(None);
        }
        let mut fading = trial_rng(fading_key(seed), i);
        let h: Vec<f64> = (0..aps.len()).map(|_| Exp1.sample(&mut fading)).collect();
        let d2: Vec<f64> = aps.iter().map(Point::norm2).collect();
        let nearest = (0..aps.len()).min_by(|&a, &b| d2[a].total_cmp(&d2[b])).unwrap();
        let r2 = r_con * r_con;
        let in_range: Vec<usize> = (0..aps.len()).filter(|&j| d2[j] <= r2).collect();
        let chosen = in_range
            .iter()
            .copied()
            .min_by(|&a, &b| layout.loads[a].cmp(&layout.loads[b]).then(d2[a].total_cmp(&d2[b])))
            .unwrap_or(nearest);
        Ok(Some(LoadPolicySamples {
            nearest: policy_sample(aps, &layout.loads, nearest, alpha, &h),
            min_load: policy_sample(aps, &layout.loads, chosen, alpha, &h),
            aps_in_range: in_range.len(),
        }))
    })?;
    let mut samples = Vec::with_capacity(out.len());
    for s in out {
        if let Some(s) = s? {
            samples.push(s);
        }
    }
    if samples.is_empty() {
        return Err(Error::domain("no AP was sampled in any trial"));
    }
    Ok(samples)
}

/// Rate coverage of least-loaded association without cancellation at
/// `α = 4`.
pub fn simulate_min_load(
    lambda: f64,
    mu_j: f64,
    r_con: f64,
    rho: f64,
    trials: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<Estimate> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::domain(format!("rate must be positive, got {rho}")));
    }
    let samples = simulate_load_policies(lambda, mu_j, 4.0, r_con, trials, seed, opts)?;
    let hits = samples.iter().filter(|s| s.min_load.covered(rho, 0)).count() as u64;
    Ok(Estimate::from_counts(hits, samples.len() as u64, seed))
}

/// Other users in the cell of the AP nearest to a typical user, one value per
/// sampled layout.
pub fn sample_tagged_cell_loads(lambda: f64, mu_j: f64, cells: u64, seed: u64, opts: &McOptions) -> Result<Vec<u64>> {
    check_inputs(lambda, mu_j)?;
    let out = map_trials(0, cells, opts.threads, |i| -> Result<Option<u64>> {
        let layout = sample_layout(lambda, mu_j, 0.0, seed, i)?;
        Ok((0..layout.aps.len())
            .min_by(|&a, &b| layout.aps[a].norm2().total_cmp(&layout.aps[b].norm2()))
            .map(|j| layout.loads[j]))
    })?;
    let mut loads = Vec::with_capacity(out.len());
    for l in out {
        if let Some(l) = l? {
            loads.push(l);
        }
    }
    Ok(loads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{load_pmf, rate_coverage_max_sir};

    #[test]
    fn grid_matches_brute_force() {
        let mut rng = trial_rng(1, 0);
        let pts = sample_ppp(1.0, 20.0, &mut rng).unwrap();
        let grid = Grid::new(&pts, 20.0, 1.0);
        let queries = sample_ppp(0.5, 18.0, &mut rng).unwrap();
        for q in &queries {
            let brute = (0..pts.len())
                .min_by(|&a, &b| pts[a].dist2(q).total_cmp(&pts[b].dist2(q)))
                .unwrap();
            assert_eq!(grid.nearest(q), Some(brute));
        }
    }

    #[test]
    fn covered_threshold() {
        let s = PolicySample {
            load: 1,
            theta: [3.0, 8.0],
        };
        // 2 users sharing, rho = 1 needs SIR >= 3.
        assert!(s.covered(1.0, 0));
        assert!(!s.covered(1.01, 0));
        assert!(s.covered(1.5, 1));
    }

    #[test]
    fn tagged_cell_histogram_matches_load_pmf() {
        let loads = sample_tagged_cell_loads(1.0, 5.0, 20_000, 3, &McOptions::default()).unwrap();
        let n = loads.len() as f64;
        let mut tv = 0.0;
        let mut covered = 0.0;
        for m in 0..60u64 {
            let emp = loads.iter().filter(|&&l| l == m).count() as f64 / n;
            let p = load_pmf(m, 5.0, 1.0).unwrap();
            covered += p;
            tv += (emp - p).abs();
        }
        tv = 0.5 * (tv + (1.0 - covered));
        assert!(tv < 0.03, "tv = {tv}");
    }

    #[test]
    fn small_rate_always_covered_and_nearest_matches_analytic() {
        let opts = McOptions::default();
        let e = simulate_min_load(1e-5, 5e-5, 400.0, 1e-9, 2000, 4, &opts).unwrap();
        assert!(e.mean > 0.99);
        let samples = simulate_load_policies(1e-5, 5e-5, 4.0, 400.0, 20_000, 5, &opts).unwrap();
        let hits = samples.iter().filter(|s| s.nearest.covered(0.1, 0)).count() as u64;
        let est = Estimate::from_counts(hits, samples.len() as u64, 5);
        let exact = rate_coverage_max_sir(0.1, 1e-5, 5e-5, 4.0).unwrap();
        assert!(est.agrees_with(exact, 3.0, 0.01), "{est:?} vs {exact}");
    }
}
