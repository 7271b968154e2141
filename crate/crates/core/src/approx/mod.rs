//! Smooth, compactly supported approximations `φ^{ε,R}` of the interaction
//! and the approximated sparse system.

mod quadrature;

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

pub use quadrature::{mollify, GaussHermite, Quadrature};

use crate::dynamics::{integrate_single_with, Ensemble, StepConfig, Weights};
use crate::graph::GraphSample;
use crate::math;
use crate::measures::{coupling_between, CouplingDistanceReport};
use crate::model::{ArgumentStructure, InteractionModel, PairFn};
use crate::{Error, Result};

/// `sup |ξ'|` for [`bump`].
pub const BUMP_DERIVATIVE_BOUND: f64 = 2.0;

#[inline]
fn smooth_zero(t: f64) -> f64 {
    if t > 0.0 {
        math::exp(-1.0 / t)
    } else {
        0.0
    }
}

/// Smooth cutoff: `1` on `[−1, 1]`, `0` outside `(−2, 2)`, monotone between.
pub fn bump(u: f64) -> f64 {
    let a = u.abs();
    if a <= 1.0 {
        return 1.0;
    }
    if a >= 2.0 {
        return 0.0;
    }
    let up = smooth_zero(2.0 - a);
    up / (up + smooth_zero(a - 1.0))
}

/// `φ^{ε,R}(v) = φ_{ε/M}(v) ξ(‖v‖²/R²)` for a model's `φ`, with
/// `v = (x, y, ω, π)`.
#[derive(Clone)]
pub struct MollifiedInteraction {
    phi: PairFn,
    d: usize,
    epsilon: f64,
    radius: f64,
    m: f64,
    structure: ArgumentStructure,
    quadrature: Quadrature,
}

impl core::fmt::Debug for MollifiedInteraction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("MollifiedInteraction")
            .field("epsilon", &self.epsilon)
            .field("radius", &self.radius)
            .field("m", &self.m)
            .field("structure", &self.structure)
            .finish()
    }
}

/// `M = max{‖φ‖∞, ‖∇φ‖ + C₁‖φ‖∞, ‖∇φ‖ E|N_k|}` with `k = 2d + 2`.
pub fn uniform_c1_bound(model: &InteractionModel) -> f64 {
    let c = model.constants();
    let k = 2 * model.media_dim() + 2;
    c.sup_phi
        .max(c.grad_phi + BUMP_DERIVATIVE_BOUND * c.sup_phi)
        .max(c.grad_phi * math::chi_mean(k))
}

impl MollifiedInteraction {
    pub fn new(model: &InteractionModel, epsilon: f64, radius: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!("epsilon = {epsilon}")));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(alloc::format!("R = {radius}")));
        }
        Ok(Self {
            phi: model.phi_fn().clone(),
            d: model.media_dim(),
            epsilon,
            radius,
            m: uniform_c1_bound(model),
            structure: model.structure().clone(),
            quadrature: Quadrature::default(),
        })
    }

    pub fn with_quadrature(mut self, q: Quadrature) -> Self {
        self.quadrature = q;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The constant `M` by which `ε` is divided.
    pub fn m_constant(&self) -> f64 {
        self.m
    }

    /// The Gaussian scale actually used, `ε/M`.
    pub fn scale(&self) -> f64 {
        if self.m > 0.0 {
            self.epsilon / self.m
        } else {
            self.epsilon
        }
    }

    fn as_point_fn(&self) -> impl Fn(&[f64]) -> f64 + '_ {
        let d = self.d;
        move |v: &[f64]| (self.phi)(v[0], v[1], &v[2..2 + d], &v[2 + d..])
    }

    /// `φ_{ε/M}` at `v`, without the cutoff.
    pub fn mollified(&self, v: &[f64]) -> f64 {
        let scale = self.scale();
        let f = self.as_point_fn();
        if scale == 0.0 {
            return f(v);
        }
        self.quadrature
            .smooth(&f, scale, v, &self.structure)
            .expect("dimension and structure checked at construction")
    }

    pub fn eval(&self, x: f64, y: f64, omega: &[f64], pi: &[f64]) -> f64 {
        let mut v = Vec::with_capacity(2 + 2 * self.d);
        v.push(x);
        v.push(y);
        v.extend_from_slice(omega);
        v.extend_from_slice(pi);
        cutoff_apply(self, &v)
    }

    pub fn into_pair_fn(self) -> PairFn {
        let shared = Arc::new(self);
        Arc::new(move |x, y, w, p| shared.eval(x, y, w, p))
    }
}

/// `φ_{ε/M}(v) · ξ(‖v‖₂² / R²)`; exactly zero once `‖v‖₂² ≥ 2R²`.
pub fn cutoff_apply(m: &MollifiedInteraction, point: &[f64]) -> f64 {
    let r2 = m.radius * m.radius;
    let norm2: f64 = point.iter().map(|v| v * v).sum();
    let xi = bump(norm2 / r2);
    if xi == 0.0 {
        return 0.0;
    }
    m.mollified(point) * xi
}

/// Reference and approximated sparse runs on shared `ξ` and increments.
#[derive(Debug, Clone)]
pub struct ApproxRun {
    pub reference: Ensemble,
    pub approx: Ensemble,
    /// `E_i(R) = {sup |θ_i| > R/4 or ‖ω_i‖₂ > R/4}` on the reference run.
    pub exit_flags: Vec<bool>,
    pub exit_fraction: f64,
    pub distance: CouplingDistanceReport,
    pub m_constant: f64,
}

/// Integrates the sparse system with `φ` and with `φ^{ε,R}` on the same seed.
pub fn run_approx_system(
    model: &InteractionModel,
    sample: &GraphSample,
    epsilon: f64,
    radius: f64,
    config: &StepConfig,
) -> Result<ApproxRun> {
    let xi = model.sample_initial(sample.n(), config.seed);
    let reference = integrate_single_with(model, model.phi_fn(), Weights::Sparse(sample), &xi, config)?;
    let mollified = MollifiedInteraction::new(model, epsilon, radius)?;
    let m_constant = mollified.m_constant();
    let approx = integrate_single_with(
        model,
        &mollified.into_pair_fn(),
        Weights::Sparse(sample),
        &xi,
        config,
    )?;
    let quarter = radius / 4.0;
    let exit_flags: Vec<bool> = (0..sample.n())
        .map(|i| {
            let omega = math::sqrt(sample.media().get(i).iter().map(|w| w * w).sum());
            reference.theta.sup_abs(i) > quarter || omega > quarter
        })
        .collect();
    let exit_fraction = exit_flags.iter().filter(|&&e| e).count() as f64 / sample.n() as f64;
    let distance = coupling_between(&reference.theta, &approx.theta)?;
    Ok(ApproxRun {
        reference,
        approx,
        exit_flags,
        exit_fraction,
        distance,
        m_constant,
    })
}

/// `C = 6 max(M, ‖ψ‖∞ + ‖ψ‖_Lip)`.
pub fn rapp_constant(model: &InteractionModel) -> f64 {
    let c = model.constants();
    6.0 * uniform_c1_bound(model).max(c.sup_psi + c.lip_psi)
}

/// `C T exp(C ‖W‖∞ T) (ε + ‖D‖_{∞→1}/n + exit fraction)`.
pub fn rapp_bound(
    model: &InteractionModel,
    epsilon: f64,
    exit_fraction: f64,
    norm_d_over_n: f64,
    horizon: f64,
) -> f64 {
    let c = rapp_constant(model);
    let bracket = epsilon + norm_d_over_n + exit_fraction;
    if bracket == 0.0 {
        return 0.0;
    }
    c * horizon * math::exp(c * model.kernel().sup() * horizon) * bracket
}

/// `⌈a m⌉ ln(e P / a)`, the log of `(e P / a)^{⌈am⌉}`; `−∞` when `P = 0`.
pub fn exit_tail_bound(p_tail: f64, a: f64, m: usize) -> Result<f64> {
    if !(a > 0.0 && a <= 1.0) || !(0.0..=1.0).contains(&p_tail) {
        return Err(Error::InvalidArgument(alloc::format!(
            "need a in (0, 1] and P in [0, 1], got a = {a}, P = {p_tail}"
        )));
    }
    if p_tail == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let k = math::ceil(a * m as f64);
    Ok(k * (1.0 + math::ln(p_tail / a)))
}

/// Grid extrema used by the mollifier checks.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GridExtrema {
    pub sup: f64,
    pub sup_gap: f64,
    pub sup_grad: f64,
}

/// Scans `f`, its smoothing `g` and the gap `|g − f|` over `points`, with
/// central-difference gradients of `g` at step `h` (Euclidean norm).
pub fn grid_extrema(
    f: &dyn Fn(&[f64]) -> f64,
    g: &dyn Fn(&[f64]) -> f64,
    points: &[Vec<f64>],
    h: f64,
) -> GridExtrema {
    let mut out = GridExtrema::default();
    let mut shifted = vec![];
    for p in points {
        let gv = g(p);
        out.sup = out.sup.max(gv.abs());
        out.sup_gap = out.sup_gap.max((gv - f(p)).abs());
        shifted.clear();
        shifted.extend_from_slice(p);
        let mut sq = 0.0;
        for k in 0..p.len() {
            shifted[k] = p[k] + h;
            let up = g(&shifted);
            shifted[k] = p[k] - h;
            let down = g(&shifted);
            shifted[k] = p[k];
            let d = (up - down) / (2.0 * h);
            sq += d * d;
        }
        out.sup_grad = out.sup_grad.max(math::sqrt(sq));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_w_graph;
    use crate::model::{kuramoto, Kernel};

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.5), 1.0);
        assert_eq!(bump(-1.0), 1.0);
        assert_eq!(bump(3.0), 0.0);
        assert_eq!(bump(2.0), 0.0);
        let mut prev = 1.0;
        let mut max_slope: f64 = 0.0;
        let h = 1e-6;
        let mut u = 1.0;
        while u < 2.0 {
            let v = bump(u + h);
            assert!(v <= prev && v <= 1.0);
            max_slope = max_slope.max((prev - v) / h);
            prev = v;
            u += h;
        }
        assert!(max_slope <= BUMP_DERIVATIVE_BOUND + 1e-6, "{max_slope}");
        assert!(max_slope >= BUMP_DERIVATIVE_BOUND - 1e-3);
        assert_eq!(bump(-1.7), bump(1.7));
    }

    #[test]
    fn kuramoto_m_constant() {
        let m = kuramoto(1.0).unwrap();
        let grad = core::f64::consts::SQRT_2;
        let expected = (grad + 2.0).max(grad * math::chi_mean(4));
        assert!((uniform_c1_bound(&m) - expected).abs() < 1e-15);
        assert!((rapp_constant(&m) - 6.0 * expected).abs() < 1e-14);
    }

    #[test]
    fn support_and_inner_ball() {
        let model = kuramoto(1.0).unwrap();
        let r = 3.0;
        let m = MollifiedInteraction::new(&model, 0.1, r).unwrap();
        // ‖v‖ ≥ 2R + 10⁻⁶
        let far = 2.0 * r + 1e-6;
        assert_eq!(m.eval(far, 0.0, &[0.0], &[0.0]), 0.0);
        assert_eq!(m.eval(0.0, 0.0, &[0.0], &[far]), 0.0);
        // inside the ball the cutoff is inactive
        let v = [0.5, 1.2, 0.1, -0.2];
        assert_eq!(cutoff_apply(&m, &v), m.mollified(&v));
    }

    #[test]
    fn rapp_closed_form() {
        let m = kuramoto(1.0).unwrap();
        assert_eq!(rapp_bound(&m, 0.0, 0.0, 0.0, 1.0), 0.0);
        let c = rapp_constant(&m);
        let a = rapp_bound(&m, 0.1, 0.0, 0.0, 0.5);
        let b = rapp_bound(&m, 0.1, 0.0, 0.0, 1.0);
        assert!((b / a - 2.0 * (c * 0.5).exp()).abs() < 1e-9 * b / a);
        let sum = rapp_bound(&m, 0.1, 0.2, 0.3, 0.5);
        let parts = rapp_bound(&m, 0.1, 0.0, 0.0, 0.5)
            + rapp_bound(&m, 0.0, 0.2, 0.0, 0.5)
            + rapp_bound(&m, 0.0, 0.0, 0.3, 0.5);
        assert!((sum - parts).abs() < 1e-12 * sum);
    }

    #[test]
    fn exit_tail_examples() {
        assert_eq!(exit_tail_bound(0.0, 0.5, 10).unwrap(), f64::NEG_INFINITY);
        let a = 0.3;
        assert!(exit_tail_bound(a / core::f64::consts::E, a, 17).unwrap().abs() < 1e-14);
        let v = exit_tail_bound(1e-3, 0.1, 100).unwrap();
        assert!((v - 10.0 * (core::f64::consts::E * 1e-2).ln()).abs() < 1e-12);
        assert!((v + 36.05).abs() < 0.01);
        assert!(exit_tail_bound(0.5, 0.0, 10).is_err());
    }

    #[test]
    fn huge_radius_tiny_epsilon_tracks_reference() {
        let model = kuramoto(1.0).unwrap();
        let n = 32;
        let media = model.sample_media(n, 2);
        let g = sample_w_graph(n, 0.5, &Kernel::constant(1.0), media, 2).unwrap();
        let config = StepConfig::new(0.5, 1e-2, 2);
        let run = run_approx_system(&model, &g, 1e-9, 1e3, &config).unwrap();
        assert_eq!(run.exit_fraction, 0.0);
        assert!(run.distance.delta_t < 1e-8, "{}", run.distance.delta_t);
        let rough = run_approx_system(&model, &g, 1.0, 1.0, &config).unwrap();
        assert!(rough.exit_fraction > 0.0);
        assert!(rough.distance.delta_t > 1e-3);
    }
}
