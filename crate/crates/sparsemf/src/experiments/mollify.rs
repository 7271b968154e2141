//! `mollify-check`: grid assertions for the Gaussian mollification `φ_ε`
//! and the cut-off approximation `φ_ε(x) ξ(‖x‖²/R²)`.

use rayon::prelude::*;
use sparsemf_core::approx::{bump, mollify, BUMP_DERIVATIVE_BOUND};
use sparsemf_core::math::chi_mean;

use super::{flag, Context, Result};
use crate::format::{num, Table};

/// Step of the central differences.
const FD_STEP: f64 = 1e-5;
/// Tolerance of the closed-form comparison.
const CLOSED_FORM_TOL: f64 = 1e-10;

/// One assertion `value ≤ bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifyCheck {
    pub case: &'static str,
    pub epsilon: f64,
    /// `NaN` for checks without a cutoff.
    pub radius: f64,
    pub check: &'static str,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// A test function on `ℝᵏ` with its sup, gradient bound and closed-form
/// smoothing.
struct Case {
    name: &'static str,
    dim: usize,
    phi: fn(&[f64]) -> f64,
    sup: f64,
    grad: f64,
    smoothed: fn(f64, &[f64]) -> f64,
}

const CASES: [Case; 2] = [
    Case {
        name: "sin_1d",
        dim: 1,
        phi: |v| v[0].sin(),
        sup: 1.0,
        grad: 1.0,
        smoothed: |eps, v| (-eps * eps / 2.0).exp() * v[0].sin(),
    },
    // Kuramoto `sin(y − x)` in its two active coordinates; `y − x` has
    // variance `2ε²` under the smoothing.
    Case {
        name: "kuramoto_2d",
        dim: 2,
        phi: |v| (v[1] - v[0]).sin(),
        sup: 1.0,
        grad: std::f64::consts::SQRT_2,
        smoothed: |eps, v| (-eps * eps).exp() * (v[1] - v[0]).sin(),
    },
];

fn grid(dim: usize, half_width: f64, points: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..points)
        .map(|k| -half_width + 2.0 * half_width * k as f64 / (points - 1).max(1) as f64)
        .collect();
    match dim {
        1 => axis.iter().map(|&x| vec![x]).collect(),
        _ => axis
            .iter()
            .flat_map(|&x| axis.iter().map(move |&y| vec![x, y]))
            .collect(),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn fd_grad(f: &dyn Fn(&[f64]) -> f64, p: &[f64]) -> f64 {
    let mut q = p.to_vec();
    let mut sq = 0.0;
    for k in 0..p.len() {
        q[k] = p[k] + FD_STEP;
        let up = f(&q);
        q[k] = p[k] - FD_STEP;
        let down = f(&q);
        q[k] = p[k];
        let d = (up - down) / (2.0 * FD_STEP);
        sq += d * d;
    }
    sq.sqrt()
}

fn sup_over<'a>(points: impl Iterator<Item = &'a Vec<f64>>, f: impl Fn(&[f64]) -> f64) -> f64 {
    points.fold(0.0, |m, p| m.max(f(p)))
}

fn check(case: &Case, epsilon: f64, radius: f64, name: &'static str, value: f64, bound: f64) -> MollifyCheck {
    MollifyCheck {
        case: case.name,
        epsilon,
        radius,
        check: name,
        value,
        bound,
        pass: value <= bound,
    }
}

/// Checks of `φ_ε` alone on `[−4, 4]ᵏ`.
fn smoothing_checks(case: &Case, epsilon: f64, points: usize, tol: f64) -> Result<Vec<MollifyCheck>> {
    let phi = case.phi;
    let smooth = |v: &[f64]| mollify(&phi, epsilon, v).expect("epsilon validated");
    mollify(&phi, epsilon, &vec![0.0; case.dim])?;
    let pts = grid(case.dim, 4.0, points);
    let gap_bound = epsilon * case.grad * chi_mean(case.dim);
    let nan = f64::NAN;
    Ok(vec![
        check(case, epsilon, nan, "sup", sup_over(pts.iter(), |p| smooth(p).abs()), case.sup + tol),
        check(
            case,
            epsilon,
            nan,
            "gap",
            sup_over(pts.iter(), |p| (smooth(p) - phi(p)).abs()),
            gap_bound + tol,
        ),
        check(case, epsilon, nan, "grad", sup_over(pts.iter(), |p| fd_grad(&smooth, p)), case.grad + tol),
        check(
            case,
            epsilon,
            nan,
            "closed_form",
            sup_over(pts.iter(), |p| (smooth(p) - (case.smoothed)(epsilon, p)).abs()),
            CLOSED_FORM_TOL,
        ),
    ])
}

/// Checks of `φ_ε(x) ξ(‖x‖²/R²)` on `[−2.5R, 2.5R]ᵏ`.
fn cutoff_checks(case: &Case, epsilon: f64, radius: f64, points: usize, tol: f64) -> Vec<MollifyCheck> {
    let phi = case.phi;
    let r2 = radius * radius;
    let approx = |v: &[f64]| {
        let xi = bump(v.iter().map(|x| x * x).sum::<f64>() / r2);
        if xi == 0.0 {
            0.0
        } else {
            mollify(&phi, epsilon, v).expect("epsilon validated") * xi
        }
    };
    let pts = grid(case.dim, 2.5 * radius, points);
    // points just outside radius 2R along the axes and diagonals
    let edge = 2.0 * radius + 1e-6;
    let mut outside: Vec<Vec<f64>> = pts.iter().filter(|p| norm(p) >= edge).cloned().collect();
    for k in 0..8 {
        let a = std::f64::consts::FRAC_PI_4 * k as f64;
        outside.push(match case.dim {
            1 => vec![if k % 2 == 0 { edge } else { -edge }],
            _ => vec![edge * a.cos(), edge * a.sin()],
        });
    }
    let inner: Vec<&Vec<f64>> = pts.iter().filter(|p| norm(p) <= radius).collect();
    let gap_bound = epsilon * case.grad * chi_mean(case.dim);
    vec![
        check(case, epsilon, radius, "support", sup_over(outside.iter(), |p| approx(p).abs()), 0.0),
        check(case, epsilon, radius, "cutoff_sup", sup_over(pts.iter(), |p| approx(p).abs()), case.sup + tol),
        check(
            case,
            epsilon,
            radius,
            "cutoff_grad",
            sup_over(pts.iter(), |p| fd_grad(&approx, p)),
            case.grad + BUMP_DERIVATIVE_BOUND * case.sup + tol,
        ),
        check(
            case,
            epsilon,
            radius,
            "inner_gap",
            sup_over(inner.into_iter(), |p| (approx(p) - phi(p)).abs()),
            gap_bound + tol,
        ),
    ]
}

/// All checks for both test functions over the `ε × R` ladder, in a fixed
/// order: per case, per `ε`, the smoothing checks then the cutoff checks
/// per `R`.
pub fn mollifier_checks(
    epsilons: &[f64],
    radii: &[f64],
    grid_points: usize,
    tol: f64,
) -> Result<Vec<MollifyCheck>> {
    let jobs: Vec<(&Case, f64, Option<f64>)> = CASES
        .iter()
        .flat_map(|c| {
            epsilons.iter().flat_map(move |&e| {
                std::iter::once((c, e, None)).chain(radii.iter().map(move |&r| (c, e, Some(r))))
            })
        })
        .collect();
    let groups = jobs
        .par_iter()
        .map(|&(c, e, r)| match r {
            None => smoothing_checks(c, e, grid_points, tol),
            Some(r) => Ok(cutoff_checks(c, e, r, grid_points, tol)),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(groups.into_iter().flatten().collect())
}

pub(crate) fn mollify_table(checks: &[MollifyCheck]) -> Table {
    let mut t = Table::new(["case", "epsilon", "R", "check", "value", "bound", "pass"]);
    for c in checks {
        t.push(vec![
            c.case.to_string(),
            num(c.epsilon),
            num(c.radius),
            c.check.to_string(),
            num(c.value),
            num(c.bound),
            flag(Some(c.pass)),
        ]);
    }
    t
}

/// Writes `mollify.csv`.
pub fn mollify_check(ctx: &Context) -> Result<Vec<MollifyCheck>> {
    let a = &ctx.config.approx;
    let checks = ctx.install(|| mollifier_checks(&a.epsilons, &a.radii, a.grid_points, a.tolerance))??;
    mollify_table(&checks).save(&ctx.path("mollify.csv"))?;
    Ok(checks)
}
