//! `approx`: the `ε × R` ladder of approximated sparse runs against the
//! reference run, with the per-cell bound check.

use sparsemf_core::approx::{rapp_bound, rapp_constant, run_approx_system};

use super::mollify::{mollifier_checks, mollify_table};
use super::{discretization_slack, flag, run_seed, Context, NormCertificates, Result, RunSpec};
use crate::format::{num, Table};

/// One ladder cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxRow {
    pub epsilon: f64,
    pub radius: f64,
    pub exit_fraction: f64,
    pub capped_delta: f64,
    pub delta: f64,
    pub rapp_bound: f64,
    /// `capped_delta ≤ rapp_bound + 10 √dt T`; `None` without a norm.
    pub pass: Option<bool>,
    pub m_constant: f64,
    pub rapp_constant: f64,
    pub norm_d_over_n: f64,
}

/// The run the ladder is evaluated on: `approx.n`, the first sparsity value
/// at that `n`, replicate 0.
pub fn approx_spec(ctx: &Context) -> RunSpec {
    let n = ctx.config.approx.n;
    RunSpec {
        n,
        p: ctx.config.sweep.sparsity.values(n)[0],
        p_index: 0,
        replicate: 0,
        seed: run_seed(ctx.config.seed, n, 0),
    }
}

/// Runs every `(ε, R)` cell on one sampled graph.
pub fn approx_ladder(ctx: &Context) -> Result<Vec<ApproxRow>> {
    let cfg = &ctx.config;
    let spec = approx_spec(ctx);
    let sample = ctx.sample(&spec)?;
    // the lower certificate makes the bound smallest, so passing is conclusive
    let norm = NormCertificates::compute(&sample, &cfg.distances, spec.seed)?.low();
    let norm_d_over_n = norm / spec.n as f64;
    let step = cfg.run.step_config(spec.seed);
    let slack = discretization_slack(cfg.run.dt, cfg.run.horizon);
    let cells: Vec<(f64, f64)> = cfg
        .approx
        .epsilons
        .iter()
        .flat_map(|&e| cfg.approx.radii.iter().map(move |&r| (e, r)))
        .collect();
    ctx.par_map(&cells, |&(epsilon, radius)| {
        let run = run_approx_system(&ctx.model, &sample, epsilon, radius, &step)?;
        let bound = if norm.is_nan() {
            f64::NAN
        } else {
            rapp_bound(&ctx.model, epsilon, run.exit_fraction, norm_d_over_n, cfg.run.horizon)
        };
        Ok(ApproxRow {
            epsilon,
            radius,
            exit_fraction: run.exit_fraction,
            capped_delta: run.distance.delta_t_capped,
            delta: run.distance.delta_t,
            rapp_bound: bound,
            pass: (!bound.is_nan()).then_some(run.distance.delta_t_capped <= bound + slack),
            m_constant: run.m_constant,
            rapp_constant: rapp_constant(&ctx.model),
            norm_d_over_n,
        })
    })
}

/// Writes `approx.csv` and the mollifier checks to `mollify.csv`.
pub fn approx(ctx: &Context) -> Result<Vec<ApproxRow>> {
    let rows = approx_ladder(ctx)?;
    let spec = approx_spec(ctx);
    let mut t = Table::new([
        "epsilon",
        "R",
        "exit_fraction",
        "capped_delta",
        "rapp_bound",
        "pass",
        "delta",
        "m_constant",
        "rapp_constant",
        "norm_D_over_n",
        "n",
        "p",
        "seed",
    ]);
    for r in &rows {
        t.push(vec![
            num(r.epsilon),
            num(r.radius),
            num(r.exit_fraction),
            num(r.capped_delta),
            num(r.rapp_bound),
            flag(r.pass),
            num(r.delta),
            num(r.m_constant),
            num(r.rapp_constant),
            num(r.norm_d_over_n),
            spec.n.to_string(),
            num(spec.p),
            spec.seed.to_string(),
        ]);
    }
    t.save(&ctx.path("approx.csv"))?;
    let a = &ctx.config.approx;
    let checks = ctx.install(|| mollifier_checks(&a.epsilons, &a.radii, a.grid_points, a.tolerance))??;
    mollify_table(&checks).save(&ctx.path("mollify.csv"))?;
    Ok(rows)
}
