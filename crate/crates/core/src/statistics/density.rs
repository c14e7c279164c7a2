//! Monte Carlo estimates of the expected zero density.

use crate::ensembles::EnsembleSpec;
use crate::error::{CoreError, Result};
use crate::rng::trial_rng;
use crate::zeros::{roots_cp1, solve_system_2d, SolveOpts, ZeroSet};
use rayon::prelude::*;
use std::sync::Arc;

/// Rectangular chart grid for density estimation.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_min < self.x_max && self.y_min < self.y_max) {
            return Err(CoreError::Unsupported("grid bounds out of order".into()));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(CoreError::Unsupported("grid needs at least one cell".into()));
        }
        Ok(())
    }

    pub fn cell_area(&self) -> f64 {
        ((self.x_max - self.x_min) / self.nx as f64)
            * ((self.y_max - self.y_min) / self.ny as f64)
    }

    fn cell_of(&self, x: f64, y: f64) -> Option<usize> {
        if x < self.x_min || x >= self.x_max || y < self.y_min || y >= self.y_max {
            return None;
        }
        let i = ((x - self.x_min) / (self.x_max - self.x_min) * self.nx as f64) as usize;
        let j = ((y - self.y_min) / (self.y_max - self.y_min) * self.ny as f64) as usize;
        Some(j.min(self.ny - 1) * self.nx + i.min(self.nx - 1))
    }
}

/// Solver bookkeeping for a density run.
#[derive(Clone, Copy, Debug, Default)]
pub struct SolveStats {
    pub requested: u64,
    pub failed: u64,
}

/// Which zeros a density run counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountingDomain {
    /// Every zero in the affine chart.
    Chart,
    /// Only zeros with all coordinates away from zero. Polytope-constrained
    /// ensembles place structural zeros (a fixed-multiplicity atom) on the
    /// coordinate axes; region statistics must not count them.
    Torus,
}

/// Normalized empirical density: mean zero count per trial, per unit chart
/// area, divided by the degree scale `N^m`.
#[derive(Clone, Debug)]
pub struct DensityMap {
    pub grid: GridSpec,
    pub counts: Vec<f64>,
    pub trials: u64,
    /// The `N^m` divisor applied to the raw per-area counts.
    pub normalization: f64,
}

impl DensityMap {
    /// CSV: `x,y,density` with cell centers.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,density\n");
        let dx = (self.grid.x_max - self.grid.x_min) / self.grid.nx as f64;
        let dy = (self.grid.y_max - self.grid.y_min) / self.grid.ny as f64;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let x = self.grid.x_min + (i as f64 + 0.5) * dx;
                let y = self.grid.y_min + (j as f64 + 0.5) * dy;
                out.push_str(&format!(
                    "{:e},{:e},{:e}\n",
                    x,
                    y,
                    self.counts[j * self.grid.nx + i]
                ));
            }
        }
        out
    }
}

fn solve_one(spec: &Arc<EnsembleSpec>, master_seed: u64, trial: u64) -> Result<ZeroSet> {
    let mut rng = trial_rng(master_seed, trial);
    match spec.dim() {
        1 => {
            let s = spec.sample(&mut rng);
            roots_cp1(&s)
        }
        2 => {
            let f = spec.sample(&mut rng);
            let g = spec.sample(&mut rng);
            solve_system_2d(&f, &g, &SolveOpts::default())
        }
        m => Err(CoreError::Unsupported(format!(
            "density sampling implemented for m = 1, 2, got {m}"
        ))),
    }
}

/// Monte Carlo estimate of the expected zero density over a chart grid,
/// normalized per trial, per unit area and by `N^m`.
///
/// Deterministic given the master seed; aborts when more than 1% of the
/// trials fail to certify.
pub fn empirical_density(
    spec: &Arc<EnsembleSpec>,
    trials: u64,
    grid: GridSpec,
    master_seed: u64,
    domain: CountingDomain,
) -> Result<(DensityMap, SolveStats)> {
    grid.validate()?;
    if trials == 0 {
        return Err(CoreError::Unsupported("need at least one trial".into()));
    }
    let per_trial: Vec<Option<Vec<u32>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            solve_one(spec, master_seed, t).ok().map(|zs| {
                let mut counts = vec![0u32; grid.nx * grid.ny];
                for z in &zs.chart_zeros {
                    if domain == CountingDomain::Torus
                        && z.point.iter().any(|c| c.norm() <= 1e-9)
                    {
                        continue;
                    }
                    // bivariate zeros are binned by the first coordinate
                    let (x, y) = (z.point[0].re, z.point[0].im);
                    if let Some(cell) = grid.cell_of(x, y) {
                        counts[cell] += z.multiplicity;
                    }
                }
                counts
            })
        })
        .collect();
    let stats = SolveStats {
        requested: trials,
        failed: per_trial.iter().filter(|p| p.is_none()).count() as u64,
    };
    if stats.failed as f64 > 0.01 * trials as f64 {
        return Err(CoreError::SolverFailure(format!(
            "{} of {} density trials failed",
            stats.failed, trials
        )));
    }
    let used = trials - stats.failed;
    let mut totals = vec![0.0f64; grid.nx * grid.ny];
    for counts in per_trial.into_iter().flatten() {
        for (acc, c) in totals.iter_mut().zip(counts) {
            *acc += c as f64;
        }
    }
    let scale = (spec.degree() as f64).powi(spec.dim() as i32);
    let denom = used as f64 * grid.cell_area() * scale;
    for v in totals.iter_mut() {
        *v /= denom;
    }
    Ok((
        DensityMap {
            grid,
            counts: totals,
            trials: used,
            normalization: scale,
        },
        stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::fubini_study_density;
    use crate::C64;

    #[test]
    fn one_cell_grid_recovers_total_count() {
        // a single cell covering (almost) everything: density * area = N
        let spec = EnsembleSpec::full(1, 12).unwrap();
        let grid = GridSpec {
            x_min: -60.0,
            x_max: 60.0,
            y_min: -60.0,
            y_max: 60.0,
            nx: 1,
            ny: 1,
        };
        let trials = 400;
        let (map, stats) = empirical_density(&spec, trials, grid, 31, CountingDomain::Chart).unwrap();
        assert_eq!(stats.failed, 0);
        // map.counts[0] = mean count / area / N; multiply back
        let mean_count = map.counts[0] * grid.cell_area() * 12.0;
        // all but ~N * 1/(1+60^2) of the mass lies inside the window
        assert!(
            (mean_count - 12.0).abs() < 0.15,
            "mean count = {mean_count}"
        );
    }

    #[test]
    fn density_tracks_invariant_form_near_origin() {
        let spec = EnsembleSpec::full(1, 30).unwrap();
        let grid = GridSpec {
            x_min: -0.25,
            x_max: 0.25,
            y_min: -0.25,
            y_max: 0.25,
            nx: 1,
            ny: 1,
        };
        let (map, _) = empirical_density(&spec, 4000, grid, 77, CountingDomain::Chart).unwrap();
        // normalized density near 0 is about (1/pi)(1+|z|^2)^{-2} ~ 1/pi
        let expect = fubini_study_density(1, &[C64::new(0.12, 0.0)]);
        let rel = (map.counts[0] - expect).abs() / expect;
        assert!(rel < 0.05, "density {} vs {expect}", map.counts[0]);
    }

    #[test]
    fn torus_domain_excludes_the_origin_atom() {
        // exponents 50*[1,3] in degree 200 leave a multiplicity-50 zero at
        // the origin; the torus domain must not count it
        let poly = crate::polytopes::LatticePolytope::interval(1, 3).unwrap();
        let spec = EnsembleSpec::constrained(1, 200, poly.dilate(50)).unwrap();
        let grid = GridSpec {
            x_min: -0.25,
            x_max: 0.25,
            y_min: -0.25,
            y_max: 0.25,
            nx: 1,
            ny: 1,
        };
        let trials = 30;
        let (chart, _) =
            empirical_density(&spec, trials, grid, 9, CountingDomain::Chart).unwrap();
        let (torus, _) =
            empirical_density(&spec, trials, grid, 9, CountingDomain::Torus).unwrap();
        let chart_count = chart.counts[0] * grid.cell_area() * 200.0;
        let torus_count = torus.counts[0] * grid.cell_area() * 200.0;
        assert!(
            (chart_count - torus_count - 50.0).abs() < 1e-9,
            "chart {chart_count} vs torus {torus_count}"
        );
        // deep in the forbidden region the torus count is essentially zero
        assert!(torus_count < 0.5, "torus count {torus_count}");
    }

    #[test]
    fn grid_validation() {
        let bad = GridSpec {
            x_min: 1.0,
            x_max: -1.0,
            y_min: 0.0,
            y_max: 1.0,
            nx: 4,
            ny: 4,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn bivariate_density_counts_bezout_mass() {
        let spec = EnsembleSpec::full(2, 2).unwrap();
        let grid = GridSpec {
            x_min: -50.0,
            x_max: 50.0,
            y_min: -50.0,
            y_max: 50.0,
            nx: 1,
            ny: 1,
        };
        let (map, stats) = empirical_density(&spec, 150, grid, 5, CountingDomain::Chart).unwrap();
        assert!(stats.failed <= 1);
        let mean_count = map.counts[0] * grid.cell_area() * 4.0;
        // generic pairs of conics meet in 4 points, almost all in-window
        assert!((mean_count - 4.0).abs() < 0.25, "mean = {mean_count}");
    }
}
