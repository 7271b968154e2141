//! `W₁` between an empirical position marginal and a piecewise-constant density.

use alloc::vec::Vec;

use super::{mckv_marginal, DensityFlow, Grid};
use crate::math;
use crate::measures::EmpiricalMeasure;
use crate::stats::median;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalComparison {
    /// Distance between the media-marginalized position laws; circular on a
    /// periodic grid.
    pub w1: f64,
    /// Per media atom, with particles assigned to the nearest atom; present
    /// when there are at most 8 atoms. `NaN` marks an empty bucket.
    pub per_bucket: Option<Vec<f64>>,
}

/// Sub-intervals per cell for locating the optimal circular shift.
const SHIFT_SAMPLES: usize = 8;

/// `∫ |F_emp(x) − G(x) − c| dx` exactly, where `G` is the CDF of the cell
/// density (linear within cells) and `F_emp` steps at the sorted `points`.
/// The integral covers the grid and, off a non-periodic grid, every point.
fn cdf_gap(grid: &Grid, density: &[f64], sorted: &[f64], c: f64) -> f64 {
    let n = sorted.len() as f64;
    let total: f64 = density.iter().sum::<f64>() * grid.dx;
    let mut g_faces = Vec::with_capacity(grid.cells + 1);
    g_faces.push(0.0);
    let mut acc = 0.0;
    for v in density {
        acc += v * grid.dx / total;
        g_faces.push(acc);
    }
    let g_at = |x: f64| -> f64 {
        if x <= grid.lo {
            return 0.0;
        }
        if x >= grid.hi() {
            return 1.0;
        }
        let r = (x - grid.lo) / grid.dx;
        let j = (math::floor(r) as usize).min(grid.cells - 1);
        let frac = r - j as f64;
        g_faces[j] + frac * (g_faces[j + 1] - g_faces[j])
    };
    // breakpoints: faces and sample points, sorted
    let mut xs: Vec<f64> = (0..=grid.cells).map(|j| grid.lo + j as f64 * grid.dx).collect();
    xs.extend_from_slice(sorted);
    xs.sort_by(f64::total_cmp);
    let mut k = 0usize;
    let mut total_gap = 0.0;
    for w in xs.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        while k < sorted.len() && sorted[k] <= u {
            k += 1;
        }
        let f = k as f64 / n;
        let a = f - g_at(u) - c;
        let b = f - g_at(v) - c;
        let len = v - u;
        total_gap += if a * b >= 0.0 {
            0.5 * len * (a.abs() + b.abs())
        } else {
            0.5 * len * (a * a + b * b) / (a.abs() + b.abs())
        };
    }
    total_gap
}

fn wrap_sorted(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = if grid.periodic {
        values
            .iter()
            .map(|&x| math::wrap(x, grid.lo, grid.hi() - grid.lo))
            .collect()
    } else {
        values.to_vec()
    };
    v.sort_by(f64::total_cmp);
    v
}

/// `W₁` between the points and the density; on a periodic grid the circular
/// distance `min_c ∫ |F − G − c|`, with `c` the median of `F − G` over a
/// uniform sub-grid.
pub fn density_w1(grid: &Grid, density: &[f64], points: &[f64]) -> f64 {
    if points.is_empty() {
        return f64::NAN;
    }
    let sorted = wrap_sorted(grid, points);
    if !grid.periodic {
        return cdf_gap(grid, density, &sorted, 0.0);
    }
    let total: f64 = density.iter().sum::<f64>() * grid.dx;
    let m = grid.cells * SHIFT_SAMPLES;
    let h = grid.dx / SHIFT_SAMPLES as f64;
    let mut diffs = Vec::with_capacity(m);
    let mut k = 0usize;
    let mut g = 0.0;
    for s in 0..m {
        let x = grid.lo + (s as f64 + 0.5) * h;
        while k < sorted.len() && sorted[k] <= x {
            k += 1;
        }
        let cell = s / SHIFT_SAMPLES;
        let within = (s % SHIFT_SAMPLES) as f64 + 0.5;
        let gx = g + density[cell] * h * within / total;
        if s % SHIFT_SAMPLES == SHIFT_SAMPLES - 1 {
            g += density[cell] * grid.dx / total;
        }
        diffs.push(k as f64 / sorted.len() as f64 - gx);
    }
    let c = median(&diffs);
    cdf_gap(grid, density, &sorted, c)
}

pub fn compare_to_empirical(
    flow: &DensityFlow,
    emp: &EmpiricalMeasure,
    t: f64,
) -> Result<EmpiricalComparison> {
    let step = emp.step_of(t)?;
    let marginal = mckv_marginal(flow, t)?;
    let positions = emp.theta.at(step);
    let w1 = density_w1(&flow.grid, &marginal.mixture(), positions);
    let per_bucket = if flow.atoms.len() <= 8 && emp.media.dim() == flow.atoms[0].0.len() {
        let mut buckets: Vec<Vec<f64>> = alloc::vec![Vec::new(); flow.atoms.len()];
        for (i, &x) in positions.iter().enumerate() {
            let w = emp.media.get(i);
            let nearest = flow
                .atoms
                .iter()
                .enumerate()
                .map(|(a, (p, _))| {
                    let d: f64 = p.iter().zip(w).map(|(u, v)| (u - v) * (u - v)).sum();
                    (a, d)
                })
                .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
                .0;
            buckets[nearest].push(x);
        }
        Some(
            buckets
                .iter()
                .zip(&marginal.densities)
                .map(|(b, q)| density_w1(&flow.grid, q, b))
                .collect(),
        )
    } else {
        None
    };
    Ok(EmpiricalComparison { w1, per_bucket })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Trajectories;
    use crate::mckv::{solve_mckv, McKvOptions};
    use crate::model::{kuramoto, kuramoto_with, InitialLaw, Media, MediaLaw};
    use core::f64::consts::PI;

    #[test]
    fn exact_against_uniform_cell() {
        let grid = Grid { lo: 0.0, dx: 1.0, cells: 1, periodic: false };
        // W₁(δ_0, U[0,1]) = 1/2
        assert!((density_w1(&grid, &[1.0], &[0.0]) - 0.5).abs() < 1e-15);
        // W₁(δ_2, U[0,1]) = 1.5, outside the grid
        assert!((density_w1(&grid, &[1.0], &[2.0]) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn circular_distance_of_a_rotation() {
        // a point mass against the uniform law on a circle of length 1 is 1/4 away
        let grid = Grid { lo: 0.0, dx: 1.0 / 64.0, cells: 64, periodic: true };
        let dens = alloc::vec![1.0; 64];
        for x in [0.1, 0.37, 0.9] {
            let v = density_w1(&grid, &dens, &[x]);
            assert!((v - 0.25).abs() < 1e-3, "{v}");
        }
    }

    #[test]
    fn quantile_sample_is_close() {
        let m = kuramoto_with(0.5, MediaLaw::Point(alloc::vec![0.0]))
            .unwrap()
            .with_initial(InitialLaw::CosinePerturbed { amplitude: 0.5 })
            .unwrap();
        let g = 256;
        let dx = 2.0 * PI / g as f64;
        let flow = solve_mckv(&m, &McKvOptions::new(1, g, 0.5, dx * dx / 2.0)).unwrap();
        let marginal = mckv_marginal(&flow, 0.5).unwrap();
        let mix = marginal.mixture();
        let mut prev = f64::INFINITY;
        for n in [100, 1000, 10_000] {
            let pts = marginal.quantile_sample(n);
            let d = density_w1(&flow.grid, &mix, &pts);
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 1e-3);
        // i.i.d. inverse-CDF sample
        let mut rng = crate::rng::stream(9, 0);
        let pts: Vec<f64> = (0..10_000)
            .map(|_| marginal.quantile(rand::Rng::gen::<f64>(&mut rng)))
            .collect();
        assert!(density_w1(&flow.grid, &mix, &pts) <= 0.02);
    }

    #[test]
    fn initial_quantiles_match_at_time_zero() {
        let m = kuramoto(1.0).unwrap();
        let g = 128;
        let dx = 2.0 * PI / g as f64;
        let flow = solve_mckv(&m, &McKvOptions::new(4, g, 0.1, dx * dx / 2.0)).unwrap();
        let n = 2000;
        let law = m.initial_law();
        let xi: Vec<f64> = (0..n).map(|k| law.quantile((k as f64 + 0.5) / n as f64)).collect();
        let media = Media::from_scalars((0..n).map(|k| -0.5 + (k % 4) as f64 * 0.25 + 0.125).collect()).unwrap();
        let emp = EmpiricalMeasure::new(Trajectories::from_time_major(n, 0, xi).unwrap(), media, 0.1).unwrap();
        let cmp = compare_to_empirical(&flow, &emp, 0.0).unwrap();
        assert!(cmp.w1 < dx, "{}", cmp.w1);
        let buckets = cmp.per_bucket.unwrap();
        assert_eq!(buckets.len(), 4);
        assert!(buckets.iter().all(|b| *b < 2.0 * dx));
    }
}
