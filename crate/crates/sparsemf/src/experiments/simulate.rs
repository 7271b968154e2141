//! `simulate` and `sweep-scaling`: coupled sparse/dense runs over the sweep.

use sparsemf_core::dynamics::{integrate_coupled, TrajectoryPair};
use sparsemf_core::measures::{
    coupling_delta, dbl_lower_bound, gronwall_wasserstein_bound, EmpiricalMeasure,
};
use sparsemf_core::stats::median;

use super::{discretization_slack, flag, write_norms, Context, NormCertificates, NormEntry, Result, RunSpec};
use crate::format::{self, num, Table};

/// One coupled run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateRow {
    pub spec: RunSpec,
    pub edges: usize,
    pub delta_t: f64,
    pub delta_t_capped: f64,
    pub dbl_lower: f64,
    pub w1_at_t: f64,
    pub norm_d_lower: f64,
    pub norm_d_upper: f64,
    pub norm_method: &'static str,
    pub gronwall_bound: f64,
    /// `dbl_lower ≤ Δ∧(T) ≤ Δ(T)`.
    pub sandwich_pass: bool,
    /// `d_W(Π_t L_n, Π_t L̄_n) ≤ Δ(t)` at every grid time.
    pub w1_pass: bool,
    /// `Δ(T) ≤ gronwall_bound + 10 √dt T`; `None` without a norm or atoms.
    pub gronwall_pass: Option<bool>,
    pub per_time_delta: Vec<f64>,
    pub norms: NormCertificates,
}

const SIMULATE_HEADER: [&str; 18] = [
    "n",
    "p",
    "replicate",
    "seed",
    "edges",
    "delta_T",
    "delta_T_capped",
    "dbl_lower",
    "w1_at_T",
    "norm_D_lower",
    "norm_D_upper",
    "norm_method",
    "gronwall_bound",
    "discretization_slack",
    "sandwich_pass",
    "w1_pass",
    "gronwall_pass",
    "model",
];

fn run_one(ctx: &Context, spec: &RunSpec) -> Result<SimulateRow> {
    let cfg = &ctx.config;
    let sample = ctx.sample(spec)?;
    let step = cfg.run.step_config(spec.seed);
    let pair = integrate_coupled(&ctx.model, &sample, &step)?;
    let report = coupling_delta(&pair)?;
    if cfg.output.trajectories {
        let stem = spec.stem();
        format::save_with(&ctx.path(format!("trajectories/{stem}.smft")), |w| {
            format::write_trajectories(w, &pair)
        })?;
        format::save_with(&ctx.path(format!("trajectories/{stem}.csv")), |w| {
            format::write_trajectory_csv(w, &pair, cfg.output.csv_stride, cfg.output.csv_particles)
        })?;
    }
    let TrajectoryPair {
        theta_sparse,
        theta_dense,
        media,
        dt,
        ..
    } = pair;
    let dbl = {
        let sparse = EmpiricalMeasure::new(theta_sparse, media.clone(), dt)?;
        let dense = EmpiricalMeasure::new(theta_dense, media, dt)?;
        dbl_lower_bound(&sparse, &dense, cfg.distances.dictionary_size, spec.seed)?
    };
    let norms = NormCertificates::compute(&sample, &cfg.distances, spec.seed)?;
    // the lower certificate makes the bound smallest, so passing is conclusive
    let gronwall = match ctx.model.fourier() {
        Some(_) if !norms.low().is_nan() => {
            gronwall_wasserstein_bound(&ctx.model, norms.low(), spec.n, cfg.run.horizon)?
        }
        _ => f64::NAN,
    };
    let slack = discretization_slack(cfg.run.dt, cfg.run.horizon);
    let gronwall_pass = (!gronwall.is_nan()).then_some(report.delta_t <= gronwall + slack);
    let w1_pass = report
        .w1_marginals
        .iter()
        .zip(&report.per_time_delta)
        .all(|(w, d)| *w <= d + 1e-12);
    let sandwich_pass = dbl <= report.delta_t_capped + 1e-12 && report.delta_t_capped <= report.delta_t;

    if cfg.output.graphs {
        super::graph_stats::write_graph_files(ctx, spec, &sample)?;
    }
    Ok(SimulateRow {
        spec: *spec,
        edges: sample.edge_count(),
        delta_t: report.delta_t,
        delta_t_capped: report.delta_t_capped,
        dbl_lower: dbl,
        w1_at_t: report.w1_marginals.last().copied().unwrap_or(0.0),
        norm_d_lower: norms.low(),
        norm_d_upper: norms.high(),
        norm_method: norms.method(),
        gronwall_bound: gronwall,
        sandwich_pass,
        w1_pass,
        gronwall_pass,
        per_time_delta: report.per_time_delta,
        norms,
    })
}

/// Computes every run of the sweep in the worker pool.
pub fn simulate_runs(ctx: &Context) -> Result<Vec<SimulateRow>> {
    let runs = ctx.runs();
    ctx.par_map(&runs, |spec| run_one(ctx, spec))
}

fn simulate_table(ctx: &Context, rows: &[SimulateRow]) -> Table {
    let slack = discretization_slack(ctx.config.run.dt, ctx.config.run.horizon);
    let mut t = Table::new(SIMULATE_HEADER);
    for r in rows {
        t.push(vec![
            r.spec.n.to_string(),
            num(r.spec.p),
            r.spec.replicate.to_string(),
            r.spec.seed.to_string(),
            r.edges.to_string(),
            num(r.delta_t),
            num(r.delta_t_capped),
            num(r.dbl_lower),
            num(r.w1_at_t),
            num(r.norm_d_lower),
            num(r.norm_d_upper),
            r.norm_method.to_string(),
            num(r.gronwall_bound),
            num(slack),
            flag(Some(r.sandwich_pass)),
            flag(Some(r.w1_pass)),
            flag(r.gronwall_pass),
            ctx.model.id().to_string(),
        ]);
    }
    t
}

fn write_runs(ctx: &Context, rows: &[SimulateRow], table_name: &str) -> Result<()> {
    simulate_table(ctx, rows).save(&ctx.path(table_name))?;
    let entries: Vec<NormEntry> = rows
        .iter()
        .map(|r| NormEntry {
            n: r.spec.n,
            p: r.spec.p,
            replicate: r.spec.replicate,
            records: r.norms.records(),
        })
        .collect();
    write_norms(ctx, "norms.json", &entries)?;
    if ctx.emit_plot_data {
        let dt = ctx.config.run.dt;
        for r in rows {
            format::write_plot(
                &ctx.path(format!("plot/delta_{}.dat", r.spec.stem())),
                "t delta(t)",
                r.per_time_delta.iter().enumerate().map(|(k, d)| (k as f64 * dt, *d)),
            )?;
        }
    }
    Ok(())
}

/// `simulate`: one row per `(n, p, replicate)` in `simulate.csv`, norm
/// certificates in `norms.json`.
pub fn simulate(ctx: &Context) -> Result<Vec<SimulateRow>> {
    let rows = simulate_runs(ctx)?;
    write_runs(ctx, &rows, "simulate.csv")?;
    Ok(rows)
}

/// Medians over replicates at one `(n, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub p: f64,
    pub replicates: usize,
    pub median_delta_t: f64,
    pub median_delta_t_capped: f64,
    pub median_norm_lower_over_n: f64,
    pub median_norm_upper_over_n: f64,
    /// Compared with the previous row; `None` on the first.
    pub delta_decreasing: Option<bool>,
    pub norm_decreasing: Option<bool>,
}

/// Groups runs by `(n, p)` in sweep order and takes medians.
pub fn scaling_rows(rows: &[SimulateRow]) -> Vec<ScalingRow> {
    let mut out: Vec<ScalingRow> = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let key = (rows[start].spec.n, rows[start].spec.p_index);
        let end = rows[start..]
            .iter()
            .position(|r| (r.spec.n, r.spec.p_index) != key)
            .map_or(rows.len(), |k| start + k);
        let group = &rows[start..end];
        let n = key.0 as f64;
        let pick = |f: fn(&SimulateRow) -> f64| median(&group.iter().map(f).collect::<Vec<_>>());
        let mut row = ScalingRow {
            n: key.0,
            p: group[0].spec.p,
            replicates: group.len(),
            median_delta_t: pick(|r| r.delta_t),
            median_delta_t_capped: pick(|r| r.delta_t_capped),
            median_norm_lower_over_n: pick(|r| r.norm_d_lower) / n,
            median_norm_upper_over_n: pick(|r| r.norm_d_upper) / n,
            delta_decreasing: None,
            norm_decreasing: None,
        };
        if let Some(prev) = out.last() {
            row.delta_decreasing = Some(row.median_delta_t < prev.median_delta_t);
            let (a, b) = (row.median_norm_lower_over_n, prev.median_norm_lower_over_n);
            row.norm_decreasing = (!a.is_nan() && !b.is_nan()).then_some(a < b);
        }
        out.push(row);
        start = end;
    }
    out
}

/// `sweep-scaling`: the runs of `simulate` plus medians per sweep point in
/// `scaling.csv`.
pub fn sweep_scaling(ctx: &Context) -> Result<Vec<ScalingRow>> {
    let rows = simulate_runs(ctx)?;
    write_runs(ctx, &rows, "runs.csv")?;
    let scaling = scaling_rows(&rows);
    let mut t = Table::new([
        "n",
        "p",
        "np",
        "replicates",
        "median_delta_T",
        "median_delta_T_capped",
        "median_norm_D_lower_over_n",
        "median_norm_D_upper_over_n",
        "delta_decreasing",
        "norm_decreasing",
    ]);
    for r in &scaling {
        t.push(vec![
            r.n.to_string(),
            num(r.p),
            num(r.n as f64 * r.p),
            r.replicates.to_string(),
            num(r.median_delta_t),
            num(r.median_delta_t_capped),
            num(r.median_norm_lower_over_n),
            num(r.median_norm_upper_over_n),
            flag(r.delta_decreasing),
            flag(r.norm_decreasing),
        ]);
    }
    t.save(&ctx.path("scaling.csv"))?;
    if ctx.emit_plot_data {
        format::write_plot(
            &ctx.path("plot/scaling_delta.dat"),
            "np median_delta_T",
            scaling.iter().map(|r| (r.n as f64 * r.p, r.median_delta_t)),
        )?;
        format::write_plot(
            &ctx.path("plot/scaling_norm.dat"),
            "np median_norm_D_lower_over_n",
            scaling.iter().map(|r| (r.n as f64 * r.p, r.median_norm_lower_over_n)),
        )?;
    }
    Ok(scaling)
}
