//! `graph-stats`: degree, row-sum and norm statistics of sampled graphs.

use sparsemf_core::graph::{bennett_crossover, row_sum_stats, GraphSample};
use sparsemf_core::stats::median;

use super::{flag, write_norms, Context, NormCertificates, NormEntry, Result, RunSpec};
use crate::format::{self, num, GraphRecord, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct GraphStatsRow {
    pub spec: RunSpec,
    pub edges: usize,
    pub mean_degree: f64,
    pub row_sum_min: f64,
    pub row_sum_max: f64,
    /// `⟨1, P1⟩ / n`.
    pub mean_mass: f64,
    /// `‖W‖∞ + ‖D‖_{∞→1}/n` with the exact norm or the entrywise bound.
    pub mass_bound: f64,
    pub mass_pass: Option<bool>,
    pub norms: NormCertificates,
}

pub(crate) fn write_graph_files(ctx: &Context, spec: &RunSpec, sample: &GraphSample) -> Result<()> {
    let stem = spec.stem();
    format::save_with(&ctx.path(format!("graphs/{stem}.smfg")), |w| format::write_graph(w, sample))?;
    format::save_with(&ctx.path(format!("graphs/{stem}.json")), |w| {
        serde_json::to_writer(&mut *w, &GraphRecord::from_sample(sample)).map_err(std::io::Error::other)
    })?;
    Ok(())
}

fn stats_one(ctx: &Context, spec: &RunSpec) -> Result<GraphStatsRow> {
    let sample = ctx.sample(spec)?;
    let norms = NormCertificates::compute(&sample, &ctx.config.distances, spec.seed)?;
    let high = norms.high();
    let stats = row_sum_stats(&sample, if high.is_nan() { 0.0 } else { high });
    if ctx.config.output.graphs {
        write_graph_files(ctx, spec, &sample)?;
    }
    let mean_degree = (0..sample.n()).map(|i| sample.adjacency().degree(i)).sum::<usize>() as f64
        / sample.n() as f64;
    Ok(GraphStatsRow {
        spec: *spec,
        edges: sample.edge_count(),
        mean_degree,
        row_sum_min: stats.min,
        row_sum_max: stats.max,
        mean_mass: stats.mean_mass,
        mass_bound: if high.is_nan() { f64::NAN } else { stats.mass_bound },
        mass_pass: (!high.is_nan()).then_some(stats.mean_mass <= stats.mass_bound + 1e-12),
        norms,
    })
}

pub fn graph_stats_rows(ctx: &Context) -> Result<Vec<GraphStatsRow>> {
    let runs = ctx.runs();
    ctx.par_map(&runs, |spec| stats_one(ctx, spec))
}

/// Writes `graph_stats.csv` (per sample), `graph_summary.csv` (medians per
/// sweep point) and `norms.json`.
pub fn graph_stats(ctx: &Context) -> Result<Vec<GraphStatsRow>> {
    let rows = graph_stats_rows(ctx)?;
    let mut t = Table::new([
        "n",
        "p",
        "replicate",
        "seed",
        "edges",
        "mean_degree",
        "row_sum_min",
        "row_sum_max",
        "mean_mass",
        "mass_bound",
        "mass_pass",
        "norm_D_lower",
        "norm_D_upper",
        "norm_method",
    ]);
    for r in &rows {
        t.push(vec![
            r.spec.n.to_string(),
            num(r.spec.p),
            r.spec.replicate.to_string(),
            r.spec.seed.to_string(),
            r.edges.to_string(),
            num(r.mean_degree),
            num(r.row_sum_min),
            num(r.row_sum_max),
            num(r.mean_mass),
            num(r.mass_bound),
            flag(r.mass_pass),
            num(r.norms.low()),
            num(r.norms.high()),
            r.norms.method().to_string(),
        ]);
    }
    t.save(&ctx.path("graph_stats.csv"))?;

    let mut summary = Table::new([
        "n",
        "p",
        "np",
        "replicates",
        "median_norm_D_lower_over_n",
        "median_norm_D_upper_over_n",
        "bennett_crossover_eta",
    ]);
    let mut plot = Vec::new();
    for chunk in rows.chunk_by(|a, b| (a.spec.n, a.spec.p_index) == (b.spec.n, b.spec.p_index)) {
        let s = chunk[0].spec;
        let nf = s.n as f64;
        let lower = median(&chunk.iter().map(|r| r.norms.low()).collect::<Vec<_>>()) / nf;
        let upper = median(&chunk.iter().map(|r| r.norms.high()).collect::<Vec<_>>()) / nf;
        summary.push(vec![
            s.n.to_string(),
            num(s.p),
            num(nf * s.p),
            chunk.len().to_string(),
            num(lower),
            num(upper),
            num(bennett_crossover(s.n, s.p)?),
        ]);
        plot.push((nf * s.p, lower));
    }
    summary.save(&ctx.path("graph_summary.csv"))?;
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
        format::write_plot(&ctx.path("plot/norm_lower.dat"), "np median_norm_D_lower_over_n", plot)?;
    }
    Ok(rows)
}
