//! `norm-bench`: the three `‖D‖_{∞→1}` certificates side by side. Timings
//! go to stderr so the table stays reproducible.

use std::time::Instant;

use sparsemf_core::graph::{
    norm_inf_to_one_exact_with_cap, norm_inf_to_one_lower, norm_inf_to_one_upper,
};

use super::{flag, Context, Result, RunSpec};
use crate::format::{num, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct NormBenchRow {
    pub spec: RunSpec,
    pub lower: f64,
    pub exact: Option<f64>,
    pub upper: f64,
    pub lower_ms: f64,
    pub exact_ms: Option<f64>,
}

impl NormBenchRow {
    /// Whether the ascent reached the enumerated optimum.
    pub fn attains_exact(&self) -> Option<bool> {
        self.exact
            .map(|e| self.lower >= e - 1e-9 * e.abs().max(1.0))
    }
}

fn bench_one(ctx: &Context, spec: &RunSpec) -> Result<NormBenchRow> {
    let cfg = &ctx.config.distances;
    let d = ctx.sample(spec)?.d_matrix();
    let t = Instant::now();
    let lower = norm_inf_to_one_lower(&d, cfg.norm_restarts, spec.seed)?.value;
    let lower_ms = t.elapsed().as_secs_f64() * 1e3;
    let (exact, exact_ms) = if spec.n <= cfg.exact_cap {
        let t = Instant::now();
        let v = norm_inf_to_one_exact_with_cap(&d, cfg.exact_cap)?.value;
        (Some(v), Some(t.elapsed().as_secs_f64() * 1e3))
    } else {
        (None, None)
    };
    Ok(NormBenchRow {
        spec: *spec,
        lower,
        exact,
        upper: norm_inf_to_one_upper(&d).value,
        lower_ms,
        exact_ms,
    })
}

pub fn norm_bench_rows(ctx: &Context) -> Result<Vec<NormBenchRow>> {
    let runs = ctx.runs();
    ctx.par_map(&runs, |spec| bench_one(ctx, spec))
}

/// Writes `norm_bench.csv`.
pub fn norm_bench(ctx: &Context) -> Result<Vec<NormBenchRow>> {
    let rows = norm_bench_rows(ctx)?;
    let mut t = Table::new(["n", "p", "replicate", "lower", "exact", "upper", "lower_attains_exact"]);
    for r in &rows {
        t.push(vec![
            r.spec.n.to_string(),
            num(r.spec.p),
            r.spec.replicate.to_string(),
            num(r.lower),
            num(r.exact.unwrap_or(f64::NAN)),
            num(r.upper),
            flag(r.attains_exact()),
        ]);
        eprintln!(
            "n={} p={} replicate={}: lower {:.1} ms, exact {}",
            r.spec.n,
            r.spec.p,
            r.spec.replicate,
            r.lower_ms,
            r.exact_ms.map_or("skipped".to_string(), |ms| format!("{ms:.1} ms")),
        );
    }
    t.save(&ctx.path("norm_bench.csv"))?;
    Ok(rows)
}
