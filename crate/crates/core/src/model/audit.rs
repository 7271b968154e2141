//! Randomized audits of declared model properties.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::InteractionModel;
use crate::{Error, Result};

/// Largest observed ratio `|Δf| / ‖Δv‖∞` for `φ` and `ψ` against the
/// declared constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzAudit {
    pub pairs: usize,
    pub worst_phi: f64,
    pub worst_psi: f64,
    pub declared_phi: f64,
    pub declared_psi: f64,
    /// Largest `|φ|` seen, checked against the declared supremum.
    pub max_abs_phi: f64,
}

impl LipschitzAudit {
    pub fn passes(&self, margin: f64) -> bool {
        self.worst_phi <= self.declared_phi + margin
            && self.worst_psi <= self.declared_psi + margin
    }
}

struct Point {
    x: f64,
    y: f64,
    w: Vec<f64>,
    p: Vec<f64>,
}

fn random_point(model: &InteractionModel, rng: &mut ChaCha8Rng) -> Point {
    let mut w = Vec::with_capacity(model.media_dim());
    let mut p = Vec::with_capacity(model.media_dim());
    model.media_law().sample_into(rng, &mut w);
    model.media_law().sample_into(rng, &mut p);
    Point {
        x: rng.gen_range(-2.0 * PI..2.0 * PI),
        y: rng.gen_range(-2.0 * PI..2.0 * PI),
        w,
        p,
    }
}

fn perturb(q: &Point, scale: f64, rng: &mut ChaCha8Rng) -> Point {
    let mut jitter = |v: f64| v + scale * rng.gen_range(-1.0..1.0);
    Point {
        x: jitter(q.x),
        y: jitter(q.y),
        w: q.w.iter().map(|&v| jitter(v)).collect(),
        p: q.p.iter().map(|&v| jitter(v)).collect(),
    }
}

fn sup_dist(a: &Point, b: &Point) -> f64 {
    let mut d = (a.x - b.x).abs().max((a.y - b.y).abs());
    for (u, v) in a.w.iter().zip(&b.w).chain(a.p.iter().zip(&b.p)) {
        d = d.max((u - v).abs());
    }
    d
}

/// Samples `pairs` nearby and far-apart argument pairs and records the worst
/// difference quotients of `φ` and `ψ`. Perturbed media may leave the
/// support of `μ`, which the declared constants must tolerate.
pub fn audit_lipschitz(model: &InteractionModel, pairs: usize, seed: u64) -> LipschitzAudit {
    let mut rng = crate::rng::stream(seed, 0xA0D1);
    let c = model.constants();
    let mut worst_phi: f64 = 0.0;
    let mut worst_psi: f64 = 0.0;
    let mut max_abs_phi: f64 = 0.0;
    for k in 0..pairs {
        let a = random_point(model, &mut rng);
        let scale = [1e-4, 1e-2, 0.3, 3.0][k % 4];
        let b = perturb(&a, scale, &mut rng);
        let dist = sup_dist(&a, &b);
        if dist == 0.0 {
            continue;
        }
        let fa = model.phi(a.x, a.y, &a.w, &a.p);
        let fb = model.phi(b.x, b.y, &b.w, &b.p);
        max_abs_phi = max_abs_phi.max(fa.abs());
        worst_phi = worst_phi.max((fa - fb).abs() / dist);

        let dist_psi = (0..a.w.len())
            .map(|j| (a.w[j] - b.w[j]).abs())
            .fold((a.x - b.x).abs(), f64::max);
        if dist_psi > 0.0 {
            let ga = model.psi(a.x, &a.w);
            let gb = model.psi(b.x, &b.w);
            worst_psi = worst_psi.max((ga - gb).abs() / dist_psi);
        }
    }
    LipschitzAudit {
        pairs,
        worst_phi,
        worst_psi,
        declared_phi: c.lip_phi,
        declared_psi: c.lip_psi,
        max_abs_phi,
    }
}

/// Checks `W(a, b) = W(b, a)`, `0 ≤ W ≤ sup_W` on sampled media pairs.
pub fn check_kernel_symmetry(model: &InteractionModel, pairs: usize, seed: u64) -> Result<()> {
    let mut rng = crate::rng::stream(seed, 0xA0D2);
    let kernel = model.kernel();
    for k in 0..pairs {
        let q = random_point(model, &mut rng);
        let ab = kernel.eval(&q.w, &q.p);
        let ba = kernel.eval(&q.p, &q.w);
        if !ab.is_finite() || !ba.is_finite() {
            return Err(Error::NonFiniteKernel { i: k, j: k });
        }
        if ab != ba || ab < 0.0 || ab > kernel.sup() {
            return Err(Error::InvalidArgument(format!(
                "kernel {} fails symmetry or bounds at sample {k}: W(a,b) = {ab}, W(b,a) = {ba}",
                kernel.id()
            )));
        }
    }
    Ok(())
}

/// Largest deviation of the Fourier reconstruction from `φ` over sampled
/// points, counting the imaginary part as error.
pub fn check_fourier_reconstruction(
    model: &InteractionModel,
    points: usize,
    seed: u64,
) -> Result<f64> {
    let measure = model.fourier().ok_or_else(|| Error::MissingCapability {
        model: model.id().into(),
        what: "a Fourier representation",
    })?;
    let mut rng = crate::rng::stream(seed, 0xA0D3);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let q = random_point(model, &mut rng);
        let z = measure.eval_complex(q.x, q.y, &q.w, &q.p);
        let direct = model.phi(q.x, q.y, &q.w, &q.p);
        worst = worst.max((z.re - direct).abs()).max(z.im.abs());
    }
    Ok(worst)
}

/// Largest `|φ̄(x, y, ω, π) + ∂_u f̄(x − y, ω, π)|` over sampled points, with
/// the derivative taken by central differences of step `h`.
pub fn check_hamiltonian_direction(
    model: &InteractionModel,
    points: usize,
    h: f64,
    seed: u64,
) -> Result<f64> {
    let ham = model.hamiltonian().ok_or_else(|| Error::MissingCapability {
        model: model.id().into(),
        what: "a Hamiltonian form",
    })?;
    let mut rng = crate::rng::stream(seed, 0xA0D4);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let q = random_point(model, &mut rng);
        let u = q.x - q.y;
        let deriv = ((ham.f_bar)(u + h, &q.w, &q.p) - (ham.f_bar)(u - h, &q.w, &q.p)) / (2.0 * h);
        let phi_bar = model.phi_bar(q.x, q.y, &q.w, &q.p);
        worst = worst.max((phi_bar + deriv).abs());
    }
    Ok(worst)
}

/// `H̄_n(x) = (1/2n) Σ_{i,j} f̄(x_i − x_j, ω_i, ω_j) + Σ_i g(x_i, ω_i)`.
pub fn hamiltonian_energy(
    model: &InteractionModel,
    x: &[f64],
    media: &super::Media,
) -> Result<f64> {
    let ham = model.hamiltonian().ok_or_else(|| Error::MissingCapability {
        model: model.id().into(),
        what: "a Hamiltonian form",
    })?;
    if media.len() != x.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} positions but {} media vectors",
            x.len(),
            media.len()
        )));
    }
    let n = x.len();
    let mut pair = 0.0;
    for i in 0..n {
        for j in 0..n {
            pair += (ham.f_bar)(x[i] - x[j], media.get(i), media.get(j));
        }
    }
    let single: f64 = (0..n).map(|i| (ham.g)(x[i], media.get(i))).sum();
    Ok(if n == 0 { 0.0 } else { pair / (2.0 * n as f64) + single })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{kuramoto, spatial_kuramoto, Media};

    #[test]
    fn builtin_constants_survive_audit() {
        for m in [
            kuramoto(1.0).unwrap(),
            kuramoto(2.5).unwrap(),
            spatial_kuramoto(1.0, 1.0, 2.0).unwrap(),
        ] {
            let audit = audit_lipschitz(&m, 10_000, 7);
            assert!(audit.passes(1e-9), "{audit:?}");
            assert!(audit.max_abs_phi <= m.constants().sup_phi + 1e-12);
            check_kernel_symmetry(&m, 10_000, 7).unwrap();
        }
    }

    #[test]
    fn fourier_reconstruction_is_exact() {
        for m in [kuramoto(1.0).unwrap(), spatial_kuramoto(0.8, 1.0, 2.0).unwrap()] {
            assert!(check_fourier_reconstruction(&m, 1000, 1).unwrap() < 1e-12);
        }
    }

    #[test]
    fn kuramoto_hamiltonian_direction() {
        let m = kuramoto(1.3).unwrap();
        assert!(check_hamiltonian_direction(&m, 1000, 1e-5, 3).unwrap() < 1e-6);
        let s = spatial_kuramoto(1.3, 2.0, 1.5).unwrap();
        assert!(check_hamiltonian_direction(&s, 1000, 1e-5, 3).unwrap() < 1e-6);
    }

    #[test]
    fn single_particle_energy() {
        let kappa = 0.8;
        let m = kuramoto(kappa).unwrap();
        let media = Media::from_scalars(alloc::vec![0.0]).unwrap();
        let e = hamiltonian_energy(&m, &[0.0], &media).unwrap();
        assert!((e + kappa / 2.0).abs() < 1e-15);
    }

    #[test]
    fn kuramoto_interaction_is_odd() {
        let m = kuramoto(1.0).unwrap();
        let mut rng = crate::rng::stream(5, 0);
        for _ in 0..1000 {
            let u: f64 = rng.gen_range(-10.0..10.0);
            assert_eq!(m.phi(0.0, u, &[0.0], &[0.0]), -m.phi(0.0, -u, &[0.0], &[0.0]));
        }
    }
}
