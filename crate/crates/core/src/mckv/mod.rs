//! Finite-volume solver for the nonlinear Fokker–Planck system
//! `∂_t q^ω = −∂_x(β^ω q^ω) + ½ ∂²_x q^ω` with
//! `β^ω(x) = Σ_π μ̂(π) ∫ φ̄(x, y, ω, π) q^π(y) dy + ψ(x, ω)`.
//!
//! Every step advects with first-order upwind fluxes, then applies one
//! explicit diffusion step. The media law is replaced by its quantile atoms.

mod compare;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

pub use compare::{compare_to_empirical, density_w1, EmpiricalComparison};

use crate::math;
use crate::model::{InitialLaw, InteractionModel};
use crate::{Error, Result};

/// Uniform cells `[lo + j dx, lo + (j+1) dx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub dx: f64,
    pub cells: usize,
    /// Periodic with period `cells · dx`; otherwise closed by no-flux walls.
    pub periodic: bool,
}

impl Grid {
    pub fn hi(&self) -> f64 {
        self.lo + self.dx * self.cells as f64
    }

    pub fn center(&self, j: usize) -> f64 {
        self.lo + (j as f64 + 0.5) * self.dx
    }

    /// Right face of cell `j`.
    pub fn face(&self, j: usize) -> f64 {
        self.lo + (j + 1) as f64 * self.dx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McKvOptions {
    pub media_atoms: usize,
    pub grid_points: usize,
    pub horizon: f64,
    pub dt_pde: f64,
    /// Checkpoints are stored at `horizon · k / checkpoints`, `k = 0..=checkpoints`.
    pub checkpoints: usize,
    /// Truncation interval for non-periodic models; chosen from the declared
    /// bounds when absent.
    pub domain: Option<(f64, f64)>,
}

impl McKvOptions {
    pub fn new(media_atoms: usize, grid_points: usize, horizon: f64, dt_pde: f64) -> Self {
        Self {
            media_atoms,
            grid_points,
            horizon,
            dt_pde,
            checkpoints: 1,
            domain: None,
        }
    }

    pub fn checkpoints(mut self, count: usize) -> Self {
        self.checkpoints = count;
        self
    }

    pub fn domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = Some((lo, hi));
        self
    }
}

/// Densities `q_t^ω` over the grid for each media atom at each checkpoint.
#[derive(Debug, Clone)]
pub struct DensityFlow {
    pub grid: Grid,
    /// Media atoms with their weights.
    pub atoms: Vec<(Vec<f64>, f64)>,
    pub times: Vec<f64>,
    /// `q[checkpoint][atom][cell]`, cell averages.
    pub q: Vec<Vec<Vec<f64>>>,
    /// Step actually used within each checkpoint segment.
    pub dt_pde: f64,
    /// Total negative mass removed by clipping.
    pub clipped_mass: f64,
    model: InteractionModel,
}

/// `β` assembly for one model on one grid.
struct DriftOperator<'a> {
    model: &'a InteractionModel,
    grid: Grid,
    atoms: &'a [(Vec<f64>, f64)],
    fourier: Option<FourierTables>,
}

struct FourierTables {
    /// `c · w_k · L_k(x_f, ω_a)`, indexed `[a][f][k]`.
    left: Vec<Vec<Vec<Complex64>>>,
    /// `R_k(y_c, ω_b)`, indexed `[b][c][k]`.
    right: Vec<Vec<Vec<Complex64>>>,
}

impl<'a> DriftOperator<'a> {
    fn new(model: &'a InteractionModel, grid: Grid, atoms: &'a [(Vec<f64>, f64)]) -> Self {
        let fourier = match (model.fourier(), model.kernel().as_constant()) {
            (Some(f), Some(c)) => {
                let k_count = f.atoms().len();
                let left = atoms
                    .iter()
                    .map(|(w, _)| {
                        (0..grid.cells)
                            .map(|j| {
                                (0..k_count)
                                    .map(|k| f.atoms()[k].weight * f.left_factor(k, grid.face(j), w) * c)
                                    .collect()
                            })
                            .collect()
                    })
                    .collect();
                let right = atoms
                    .iter()
                    .map(|(w, _)| {
                        (0..grid.cells)
                            .map(|j| (0..k_count).map(|k| f.right_factor(k, grid.center(j), w)).collect())
                            .collect()
                    })
                    .collect();
                Some(FourierTables { left, right })
            }
            _ => None,
        };
        Self {
            model,
            grid,
            atoms,
            fourier,
        }
    }

    /// `β^a` at the right face of every cell.
    fn assemble(&self, q: &[Vec<f64>], beta: &mut [Vec<f64>]) {
        let g = self.grid;
        match &self.fourier {
            Some(t) => {
                let k_count = t.right.first().map_or(0, |r| r.first().map_or(0, Vec::len));
                let mut s = vec![Complex64::new(0.0, 0.0); k_count];
                for (b, (_, wb)) in self.atoms.iter().enumerate() {
                    for c in 0..g.cells {
                        let mass = wb * q[b][c] * g.dx;
                        for k in 0..k_count {
                            s[k] += t.right[b][c][k] * mass;
                        }
                    }
                }
                for (a, (wa, _)) in self.atoms.iter().enumerate() {
                    for f in 0..g.cells {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..k_count {
                            acc += t.left[a][f][k] * s[k];
                        }
                        beta[a][f] = acc.re + self.model.psi(g.face(f), wa);
                    }
                }
            }
            None if self.model.constants().sup_phi == 0.0 => {
                for (a, (wa, _)) in self.atoms.iter().enumerate() {
                    for f in 0..g.cells {
                        beta[a][f] = self.model.psi(g.face(f), wa);
                    }
                }
            }
            None => {
                for (a, (wa, _)) in self.atoms.iter().enumerate() {
                    for f in 0..g.cells {
                        let x = g.face(f);
                        let mut acc = 0.0;
                        for (b, (wb, weight)) in self.atoms.iter().enumerate() {
                            let mut inner = 0.0;
                            for c in 0..g.cells {
                                inner += self.model.phi_bar(x, g.center(c), wa, wb) * q[b][c];
                            }
                            acc += weight * inner * g.dx;
                        }
                        beta[a][f] = acc + self.model.psi(x, wa);
                    }
                }
            }
        }
    }
}

/// One split step on every atom: upwind advection with `beta`, then diffusion.
/// Returns the negative mass clipped.
fn split_step(grid: &Grid, q: &mut [Vec<f64>], beta: &[Vec<f64>], dt: f64, scratch: &mut Vec<f64>) -> f64 {
    let g = grid.cells;
    let r = dt / grid.dx;
    let nu = 0.5 * dt / (grid.dx * grid.dx);
    let mut clipped = 0.0;
    scratch.resize(g + 1, 0.0);
    for (qa, ba) in q.iter_mut().zip(beta) {
        // flux[j + 1] through the right face of cell j; flux[0] through the left wall
        scratch[0] = 0.0;
        for j in 0..g {
            let right = if j + 1 < g {
                j + 1
            } else if grid.periodic {
                0
            } else {
                usize::MAX
            };
            scratch[j + 1] = if right == usize::MAX {
                0.0
            } else {
                let b = ba[j];
                if b > 0.0 {
                    b * qa[j]
                } else {
                    b * qa[right]
                }
            };
        }
        if grid.periodic {
            scratch[0] = scratch[g];
        }
        for j in 0..g {
            qa[j] -= r * (scratch[j + 1] - scratch[j]);
        }
        // diffusion; walls reflect
        let first = qa[0];
        let last = qa[g - 1];
        let mut prev = if grid.periodic { last } else { first };
        for j in 0..g {
            let next = if j + 1 < g {
                qa[j + 1]
            } else if grid.periodic {
                first
            } else {
                qa[j]
            };
            let cur = qa[j];
            qa[j] = cur + nu * (next - 2.0 * cur + prev);
            prev = cur;
        }
        for v in qa.iter_mut() {
            if *v < 0.0 {
                clipped -= *v * grid.dx;
                *v = 0.0;
            }
        }
    }
    clipped
}

fn initial_cells(law: &InitialLaw, grid: &Grid) -> Vec<f64> {
    let mut q: Vec<f64> = (0..grid.cells)
        .map(|j| {
            let a = grid.lo + j as f64 * grid.dx;
            let b = a + grid.dx;
            (law.cdf(b) - law.cdf(a)) / grid.dx
        })
        .collect();
    let mass: f64 = q.iter().sum::<f64>() * grid.dx;
    if mass > 0.0 {
        q.iter_mut().for_each(|v| *v /= mass);
    }
    q
}

fn choose_grid(model: &InteractionModel, opts: &McKvOptions) -> Result<Grid> {
    if opts.grid_points < 3 {
        return Err(Error::InvalidArgument("need at least 3 grid points".into()));
    }
    if model.is_periodic() {
        return Ok(Grid {
            lo: -PI,
            dx: 2.0 * PI / opts.grid_points as f64,
            cells: opts.grid_points,
            periodic: true,
        });
    }
    let (lo, hi) = match opts.domain {
        Some(d) => d,
        None => {
            let (a, b) = model.initial_law().support();
            let c = model.constants();
            let reach = (model.kernel().sup() * c.sup_phi + c.sup_psi) * opts.horizon
                + 6.0 * math::sqrt(opts.horizon.max(1e-12));
            (a - reach, b + reach)
        }
    };
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("bad domain [{lo}, {hi}]")));
    }
    Ok(Grid {
        lo,
        dx: (hi - lo) / opts.grid_points as f64,
        cells: opts.grid_points,
        periodic: false,
    })
}

/// Checks the diffusive and advective step limits from the declared sups.
fn check_stability(model: &InteractionModel, grid: &Grid, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument("dt_pde must be positive".into()));
    }
    let dx = grid.dx;
    if dt > 0.5 * dx * dx {
        return Err(Error::Stability(format!(
            "dt_pde = {dt} exceeds dx²/2 = {}",
            0.5 * dx * dx
        )));
    }
    let c = model.constants();
    let speed = model.kernel().sup() * c.sup_phi + c.sup_psi;
    if speed * dt / dx > 1.0 {
        return Err(Error::Stability(format!(
            "advective CFL number {} exceeds 1",
            speed * dt / dx
        )));
    }
    Ok(())
}

/// Solves the limit system from `q_0^ω = ρ_λ` for every media atom.
pub fn solve_mckv(model: &InteractionModel, opts: &McKvOptions) -> Result<DensityFlow> {
    let grid = choose_grid(model, opts)?;
    check_stability(model, &grid, opts.dt_pde)?;
    if opts.checkpoints == 0 || !(opts.horizon > 0.0) {
        return Err(Error::InvalidArgument("need T > 0 and at least one checkpoint".into()));
    }
    let atoms = model.media_law().quantile_atoms(opts.media_atoms.max(1));
    let q0 = initial_cells(model.initial_law(), &grid);
    let mut q: Vec<Vec<f64>> = vec![q0; atoms.len()];
    let op = DriftOperator::new(model, grid, &atoms);
    let mut beta = vec![vec![0.0; grid.cells]; atoms.len()];
    let mut scratch = Vec::new();
    let segment = opts.horizon / opts.checkpoints as f64;
    let steps = math::ceil(segment / opts.dt_pde - 1e-9).max(1.0) as usize;
    let dt = segment / steps as f64;
    let mut clipped = 0.0;
    let mut times = vec![0.0];
    let mut stored = vec![q.clone()];
    for c in 1..=opts.checkpoints {
        for _ in 0..steps {
            op.assemble(&q, &mut beta);
            clipped += split_step(&grid, &mut q, &beta, dt, &mut scratch);
        }
        if let Some(v) = q.iter().flatten().find(|v| !v.is_finite()) {
            return Err(Error::Stability(format!("density became {v}")));
        }
        times.push(segment * c as f64);
        stored.push(q.clone());
    }
    Ok(DensityFlow {
        grid,
        atoms,
        times,
        q: stored,
        dt_pde: dt,
        clipped_mass: clipped,
        model: model.clone(),
    })
}

/// `Π_t Q`: per-atom densities with their media weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureMarginal {
    pub grid: Grid,
    pub weights: Vec<f64>,
    pub densities: Vec<Vec<f64>>,
}

impl MixtureMarginal {
    /// `Σ_a μ̂(a) q^a` on the grid.
    pub fn mixture(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.cells];
        for (w, q) in self.weights.iter().zip(&self.densities) {
            for (o, v) in out.iter_mut().zip(q) {
                *o += w * v;
            }
        }
        out
    }

    /// Inverse CDF of the mixture, linear within cells.
    pub fn quantile(&self, u: f64) -> f64 {
        quantile_of(&self.grid, &self.mixture(), u)
    }

    /// The `n` midpoint quantiles `F⁻¹((k + ½)/n)`.
    pub fn quantile_sample(&self, n: usize) -> Vec<f64> {
        let dens = self.mixture();
        (0..n)
            .map(|k| quantile_of(&self.grid, &dens, (k as f64 + 0.5) / n as f64))
            .collect()
    }
}

pub(crate) fn quantile_of(grid: &Grid, density: &[f64], u: f64) -> f64 {
    let total: f64 = density.iter().sum::<f64>() * grid.dx;
    let target = u.clamp(0.0, 1.0) * total;
    let mut acc = 0.0;
    for (j, &v) in density.iter().enumerate() {
        let m = v * grid.dx;
        if acc + m >= target && m > 0.0 {
            return grid.lo + (j as f64 + (target - acc) / m) * grid.dx;
        }
        acc += m;
    }
    grid.hi()
}

impl DensityFlow {
    pub fn checkpoint_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or(Error::OffGrid { t })
    }

    /// `∫ q_t^ω dx` per atom at every checkpoint.
    pub fn masses(&self) -> Vec<Vec<f64>> {
        self.q
            .iter()
            .map(|qs| qs.iter().map(|q| q.iter().sum::<f64>() * self.grid.dx).collect())
            .collect()
    }

    /// Largest `|∫ q − 1|` over atoms and checkpoints.
    pub fn max_mass_error(&self) -> f64 {
        self.masses()
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max((v - 1.0).abs()))
    }

    pub fn model(&self) -> &InteractionModel {
        &self.model
    }
}

pub fn mckv_marginal(flow: &DensityFlow, t: f64) -> Result<MixtureMarginal> {
    let k = flow.checkpoint_index(t)?;
    Ok(MixtureMarginal {
        grid: flow.grid,
        weights: flow.atoms.iter().map(|(_, w)| *w).collect(),
        densities: flow.q[k].clone(),
    })
}

/// `μ̂`-weighted `L¹` change per unit time of one step from the final state
/// with `β` frozen at that state.
pub fn stationarity_residual(flow: &DensityFlow) -> f64 {
    stationarity_residual_at(flow, flow.q.len() - 1)
}

/// As [`stationarity_residual`] from checkpoint `k`.
pub fn stationarity_residual_at(flow: &DensityFlow, k: usize) -> f64 {
    let last = &flow.q[k];
    let op = DriftOperator::new(&flow.model, flow.grid, &flow.atoms);
    let mut beta = vec![vec![0.0; flow.grid.cells]; flow.atoms.len()];
    op.assemble(last, &mut beta);
    let mut next = last.clone();
    split_step(&flow.grid, &mut next, &beta, flow.dt_pde, &mut Vec::new());
    let mut total = 0.0;
    for ((a, b), (_, w)) in last.iter().zip(&next).zip(&flow.atoms) {
        let l1: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * flow.grid.dx;
        total += w * l1;
    }
    total / flow.dt_pde
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{kuramoto, kuramoto_with, Kernel, MediaLaw, ModelConstants};
    use alloc::sync::Arc;

    fn free_model(initial: InitialLaw) -> InteractionModel {
        InteractionModel::builder(
            "free",
            MediaLaw::Point(vec![0.0]),
            Arc::new(|_, _, _, _| 0.0),
            Arc::new(|_, _| 0.0),
            Kernel::constant(1.0),
            ModelConstants {
                lip_phi: 0.0,
                lip_psi: 0.0,
                sup_phi: 0.0,
                sup_psi: 0.0,
                grad_phi: 0.0,
            },
        )
        .initial(initial)
        .build()
        .unwrap()
    }

    fn gaussian_cells(grid: &Grid, var: f64) -> Vec<f64> {
        let s = math::sqrt(2.0 * var);
        (0..grid.cells)
            .map(|j| {
                let a = grid.lo + j as f64 * grid.dx;
                0.5 * (math::erf((a + grid.dx) / s) - math::erf(a / s)) / grid.dx
            })
            .collect()
    }

    #[test]
    fn heat_kernel_oracle() {
        let s0: f64 = 0.01;
        let m = free_model(InitialLaw::Gaussian { mean: 0.0, sd: s0.sqrt() });
        let dx: f64 = 0.02;
        let opts = McKvOptions::new(1, 800, 1.0, dx * dx / 2.0)
            .checkpoints(10)
            .domain(-8.0, 8.0);
        let flow = solve_mckv(&m, &opts).unwrap();
        for (k, &t) in flow.times.iter().enumerate().skip(1) {
            let exact = gaussian_cells(&flow.grid, s0 + t);
            let l1: f64 = flow.q[k][0].iter().zip(&exact).map(|(a, b)| (a - b).abs()).sum::<f64>() * dx;
            assert!(l1 < 1e-3, "t = {t}: L1 = {l1}");
        }
        assert!(flow.max_mass_error() < 1e-12);
    }

    #[test]
    fn uniform_torus_is_fixed() {
        for m in [
            free_model(InitialLaw::Uniform { lo: -PI, hi: PI }),
            kuramoto_with(1.5, MediaLaw::Point(vec![0.0])).unwrap(),
        ] {
            let m = if m.id() == "free" {
                // periodic by declaration for this check
                InteractionModel::builder(
                    "free-periodic",
                    MediaLaw::Point(vec![0.0]),
                    Arc::new(|_, _, _, _| 0.0),
                    Arc::new(|_, _| 0.0),
                    Kernel::constant(1.0),
                    *m.constants(),
                )
                .periodic(true)
                .build()
                .unwrap()
            } else {
                m
            };
            let g = 128;
            let dx = 2.0 * PI / g as f64;
            let flow = solve_mckv(&m, &McKvOptions::new(1, g, 0.5, dx * dx / 2.0)).unwrap();
            let u = 1.0 / (2.0 * PI);
            for v in &flow.q[1][0] {
                assert!((v - u).abs() < 1e-10);
            }
            assert!(stationarity_residual(&flow) <= 1e-8);
        }
    }

    #[test]
    fn transient_state_has_positive_residual() {
        let m = kuramoto_with(0.5, MediaLaw::Point(vec![0.0]))
            .unwrap()
            .with_initial(InitialLaw::CosinePerturbed { amplitude: 0.5 })
            .unwrap();
        let dx = 2.0 * PI / 128.0;
        let flow = solve_mckv(&m, &McKvOptions::new(1, 128, 0.2, dx * dx / 2.0)).unwrap();
        assert!(stationarity_residual(&flow) > 1e-3);
        assert!(flow.max_mass_error() < 1e-12);
    }

    #[test]
    fn symmetric_mixture_stays_symmetric() {
        let m = kuramoto(1.0)
            .unwrap()
            .with_initial(InitialLaw::CosinePerturbed { amplitude: 0.8 })
            .unwrap();
        let g = 128;
        let dx = 2.0 * PI / g as f64;
        let flow = solve_mckv(&m, &McKvOptions::new(4, g, 0.5, dx * dx / 2.0)).unwrap();
        let mix = mckv_marginal(&flow, 0.5).unwrap().mixture();
        // cells j and g-1-j mirror each other about 0
        for j in 0..g {
            assert!((mix[j] - mix[g - 1 - j]).abs() < 1e-8, "{j}");
        }
    }

    #[test]
    fn pairwise_fallback_matches_fourier() {
        let m = kuramoto_with(1.0, MediaLaw::uniform_interval(-0.5, 0.5))
            .unwrap()
            .with_initial(InitialLaw::CosinePerturbed { amplitude: 0.6 })
            .unwrap();
        let black_box = InteractionModel::builder(
            "kuramoto-black-box",
            m.media_law().clone(),
            m.phi_fn().clone(),
            Arc::new(|_, w: &[f64]| w[0]),
            Kernel::constant(1.0),
            *m.constants(),
        )
        .initial(m.initial_law().clone())
        .periodic(true)
        .build()
        .unwrap();
        let g = 64;
        let dx = 2.0 * PI / g as f64;
        let opts = McKvOptions::new(3, g, 0.2, dx * dx / 2.0);
        let a = solve_mckv(&m, &opts).unwrap();
        let b = solve_mckv(&black_box, &opts).unwrap();
        for (x, y) in a.q[1].iter().flatten().zip(b.q[1].iter().flatten()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_unstable_steps() {
        let m = kuramoto(1.0).unwrap();
        let dx = 2.0 * PI / 64.0;
        assert!(matches!(
            solve_mckv(&m, &McKvOptions::new(1, 64, 1.0, dx * dx)),
            Err(Error::Stability(_))
        ));
    }

    #[test]
    fn marginal_lookup() {
        let m = kuramoto(1.0).unwrap();
        let dx = 2.0 * PI / 64.0;
        let flow = solve_mckv(&m, &McKvOptions::new(5, 64, 0.1, dx * dx / 2.0)).unwrap();
        let mm = mckv_marginal(&flow, 0.0).unwrap();
        assert!((mm.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(mckv_marginal(&flow, 0.05).is_err());
        assert_eq!(flow.atoms.len(), 5);
    }
}
