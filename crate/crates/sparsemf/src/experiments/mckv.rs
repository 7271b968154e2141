//! `mckv`: solve the limit equation and compare it with a dense-system run.

use sparsemf_core::dynamics::{integrate_single, Weights};
use sparsemf_core::mckv::{
    compare_to_empirical, density_w1, mckv_marginal, solve_mckv, stationarity_residual_at,
    DensityFlow, McKvOptions,
};
use sparsemf_core::measures::EmpiricalMeasure;

use super::{run_seed, Context, Result};
use crate::format::{self, num, Table};

/// Diagnostics at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct McKvRow {
    pub t: f64,
    /// Largest `|∫ q_t^ω − 1|` over media atoms.
    pub mass_error: f64,
    pub residual: f64,
    /// `W₁` between the dense run's positions and the PDE marginal.
    pub w1_empirical: f64,
    /// `W₁` between `n` exact quantiles of the PDE marginal and itself.
    pub w1_self: f64,
    pub per_bucket: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct McKvReport {
    pub flow: DensityFlow,
    pub rows: Vec<McKvRow>,
    pub compare_n: usize,
    /// `(grid points, dt_pde, L¹ distance at T to the next finer solution)`.
    pub refinement: Vec<(usize, f64, f64)>,
}

fn options(ctx: &Context, grid_points: usize, dt_pde: f64) -> McKvOptions {
    let k = &ctx.config.mckv;
    let mut o = McKvOptions::new(k.media_atoms, grid_points, ctx.config.run.horizon, dt_pde)
        .checkpoints(k.checkpoints);
    if !ctx.model.is_periodic() {
        if let Some((lo, hi)) = ctx.config.mckv_domain(&ctx.model) {
            o = o.domain(lo, hi);
        }
    }
    o
}

fn default_dt(ctx: &Context, grid_points: usize) -> f64 {
    let (lo, hi) = ctx
        .config
        .mckv_domain(&ctx.model)
        .expect("every model has a domain");
    let dx = (hi - lo) / grid_points as f64;
    0.4 * dx * dx
}

/// `L¹` distance at the final checkpoint after averaging `fine` (twice as
/// many cells) onto the cells of `coarse`, weighted by the media atoms.
fn l1_to_finer(coarse: &DensityFlow, fine: &DensityFlow) -> f64 {
    let a = coarse.q.last().expect("checkpoints stored");
    let b = fine.q.last().expect("checkpoints stored");
    let mut total = 0.0;
    for ((qa, qb), (_, w)) in a.iter().zip(b).zip(&coarse.atoms) {
        let l1: f64 = qa
            .iter()
            .enumerate()
            .map(|(j, v)| (v - 0.5 * (qb[2 * j] + qb[2 * j + 1])).abs())
            .sum();
        total += w * l1 * coarse.grid.dx;
    }
    total
}

/// Computes the flow, the comparison rows and the optional refinement study.
pub fn mckv_rows(ctx: &Context) -> Result<McKvReport> {
    let cfg = &ctx.config;
    let g = cfg.mckv.grid_points;
    let dt_pde = cfg.mckv.dt_pde.unwrap_or_else(|| default_dt(ctx, g));
    let compare_n = cfg
        .mckv
        .compare_n
        .unwrap_or_else(|| cfg.sweep.n.iter().copied().max().unwrap_or(1));
    let seed = run_seed(cfg.seed, compare_n, 0);
    let media = ctx.model.sample_media(compare_n, seed);

    let (flow, ensemble, refinement) = ctx.install(|| {
        rayon::join(
            || solve_mckv(&ctx.model, &options(ctx, g, dt_pde)),
            || {
                rayon::join(
                    || integrate_single(&ctx.model, Weights::MeanField(&media), &cfg.run.step_config(seed)),
                    || refine(ctx, g, dt_pde),
                )
            },
        )
    })
    .map(|(a, (b, c))| (a, b, c))?;
    let flow = flow?;
    let emp = EmpiricalMeasure::from_ensemble(&ensemble?);
    let refinement = refinement?;

    let masses = flow.masses();
    let mut rows = Vec::with_capacity(flow.times.len());
    for (k, &t) in flow.times.iter().enumerate() {
        let cmp = compare_to_empirical(&flow, &emp, t)?;
        let marginal = mckv_marginal(&flow, t)?;
        let quantiles = marginal.quantile_sample(compare_n);
        rows.push(McKvRow {
            t,
            mass_error: masses[k].iter().fold(0.0, |m, v| m.max((v - 1.0).abs())),
            residual: stationarity_residual_at(&flow, k),
            w1_empirical: cmp.w1,
            w1_self: density_w1(&flow.grid, &marginal.mixture(), &quantiles),
            per_bucket: cmp.per_bucket,
        });
    }
    Ok(McKvReport {
        flow,
        rows,
        compare_n,
        refinement,
    })
}

fn refine(ctx: &Context, g: usize, dt_pde: f64) -> Result<Vec<(usize, f64, f64)>> {
    if !ctx.config.mckv.refine {
        return Ok(Vec::new());
    }
    let levels = [(g, dt_pde), (2 * g, dt_pde / 4.0), (4 * g, dt_pde / 16.0)];
    let flows = levels
        .iter()
        .map(|&(gp, dt)| solve_mckv(&ctx.model, &options(ctx, gp, dt)))
        .collect::<sparsemf_core::Result<Vec<_>>>()?;
    Ok(levels[..2]
        .iter()
        .zip(flows.windows(2))
        .map(|(&(gp, dt), w)| (gp, dt, l1_to_finer(&w[0], &w[1])))
        .collect())
}

/// Writes `mckv.csv`, `mckv_buckets.csv`, `density.smfd` and, when asked,
/// `refinement.csv` and plot data.
pub fn mckv(ctx: &Context) -> Result<McKvReport> {
    let report = mckv_rows(ctx)?;
    let flow = &report.flow;
    let mut t = Table::new(["t", "mass_error", "residual", "w1_empirical", "w1_self", "n"]);
    for r in &report.rows {
        t.push(vec![
            num(r.t),
            num(r.mass_error),
            num(r.residual),
            num(r.w1_empirical),
            num(r.w1_self),
            report.compare_n.to_string(),
        ]);
    }
    t.save(&ctx.path("mckv.csv"))?;
    let mut b = Table::new(["t", "atom", "weight", "w1"]);
    for r in &report.rows {
        for (a, w1) in r.per_bucket.iter().flatten().enumerate() {
            b.push(vec![num(r.t), a.to_string(), num(flow.atoms[a].1), num(*w1)]);
        }
    }
    b.save(&ctx.path("mckv_buckets.csv"))?;
    format::save_with(&ctx.path("density.smfd"), |w| format::write_density(w, flow))?;
    if !report.refinement.is_empty() {
        let mut r = Table::new(["grid_points", "dt_pde", "l1_to_finer"]);
        for &(g, dt, l1) in &report.refinement {
            r.push(vec![g.to_string(), num(dt), num(l1)]);
        }
        r.save(&ctx.path("refinement.csv"))?;
    }
    if ctx.emit_plot_data {
        for (k, &time) in flow.times.iter().enumerate() {
            let mix = mckv_marginal(flow, time)?.mixture();
            format::write_plot(
                &ctx.path(format!("plot/density_{k}.dat")),
                &format!("x q(t = {time})"),
                mix.iter().enumerate().map(|(j, v)| (flow.grid.center(j), *v)),
            )?;
        }
        format::write_plot(
            &ctx.path("plot/mckv_w1.dat"),
            "t w1_empirical",
            report.rows.iter().map(|r| (r.t, r.w1_empirical)),
        )?;
    }
    Ok(report)
}
