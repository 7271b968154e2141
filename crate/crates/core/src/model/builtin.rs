//! Built-in models: the stochastic Kuramoto model and its spatially extended variant.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use core::f64::consts::{PI, SQRT_2};

use super::{
    ArgumentStructure, FourierMeasure, Hamiltonian, InitialLaw, InteractionModel, Kernel,
    KernelFn, MediaLaw, ModelConstants, PairFn, SingleFn,
};
use crate::math;
use crate::{Error, Result};

/// Kuramoto with natural frequencies uniform on `[-1/2, 1/2]`.
pub fn kuramoto(kappa: f64) -> Result<InteractionModel> {
    kuramoto_with(kappa, MediaLaw::uniform_interval(-0.5, 0.5))
}

/// `φ = κ sin(y − x)`, `ψ(x, ω) = ω`, `W ≡ 1`, with the given law of the
/// (scalar) natural frequencies.
pub fn kuramoto_with(kappa: f64, frequencies: MediaLaw) -> Result<InteractionModel> {
    if !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!("kappa = {kappa}")));
    }
    if frequencies.dim() != 1 {
        return Err(Error::ShapeMismatch(
            "Kuramoto frequencies are scalar".into(),
        ));
    }
    let sup_psi = frequencies.sup_abs(0);
    let phi: PairFn = Arc::new(move |x, y, _, _| kappa * math::sin(y - x));
    let psi: SingleFn = Arc::new(|_, w| w[0]);
    let constants = ModelConstants {
        // |κ sin(y−x) − κ sin(y'−x')| ≤ κ(|x−x'| + |y−y'|) ≤ 2κ‖·‖∞
        lip_phi: 2.0 * kappa.abs(),
        lip_psi: 1.0,
        sup_phi: kappa.abs(),
        sup_psi,
        grad_phi: SQRT_2 * kappa.abs(),
    };
    InteractionModel::builder(
        format!("kuramoto(kappa={kappa})"),
        frequencies,
        phi,
        psi,
        Kernel::constant(1.0),
        constants,
    )
    .initial(InitialLaw::Uniform { lo: -PI, hi: PI })
    .fourier(FourierMeasure::kuramoto(kappa, 1))
    .hamiltonian(kuramoto_hamiltonian(kappa, None, 0))
    .periodic(true)
    .structure(ArgumentStructure::Ridge(vec![-1.0, 1.0, 0.0, 0.0]))
    .build()
}

/// Spatially extended Kuramoto: `ω = (ω_s, ω_f) ∈ [0,1]^3 × [0,1]`,
/// `W(ω, π) = 1 / (1 + C |ω_s − π_s|^α)`, `ψ(x, ω) = ω_f`.
pub fn spatial_kuramoto(kappa: f64, c: f64, alpha: f64) -> Result<InteractionModel> {
    if !kappa.is_finite() || !(c >= 0.0) || !(alpha >= 0.0) || !c.is_finite() || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "spatial Kuramoto needs finite kappa and C, alpha >= 0 (got {kappa}, {c}, {alpha})"
        )));
    }
    let kernel = if c == 0.0 {
        Kernel::constant(1.0)
    } else {
        let f: KernelFn = Arc::new(move |a, b| spatial_weight(a, b, c, alpha));
        Kernel::new(format!("spatial(C={c},alpha={alpha})"), 1.0, f)
    };
    let phi: PairFn = Arc::new(move |x, y, _, _| kappa * math::sin(y - x));
    let psi: SingleFn = Arc::new(|_, w| w[3]);
    let constants = ModelConstants {
        lip_phi: 2.0 * kappa.abs(),
        lip_psi: 1.0,
        sup_phi: kappa.abs(),
        sup_psi: 1.0,
        grad_phi: SQRT_2 * kappa.abs(),
    };
    let mut ridge = vec![0.0; 10];
    ridge[0] = -1.0;
    ridge[1] = 1.0;
    let kernel_for_h = if c == 0.0 { None } else { Some((c, alpha)) };
    InteractionModel::builder(
        format!("spatial_kuramoto(kappa={kappa},C={c},alpha={alpha})"),
        MediaLaw::UniformBox {
            lo: vec![0.0; 4],
            hi: vec![1.0; 4],
        },
        phi,
        psi,
        kernel,
        constants,
    )
    .initial(InitialLaw::Uniform { lo: -PI, hi: PI })
    .fourier(FourierMeasure::kuramoto(kappa, 4))
    .hamiltonian(kuramoto_hamiltonian(kappa, kernel_for_h, 3))
    .periodic(true)
    .structure(ArgumentStructure::Ridge(ridge))
    .build()
}

fn spatial_weight(a: &[f64], b: &[f64], c: f64, alpha: f64) -> f64 {
    let dist2: f64 = (0..3).map(|k| (a[k] - b[k]) * (a[k] - b[k])).sum();
    let dist = math::sqrt(dist2);
    1.0 / (1.0 + c * math::powf(dist, alpha))
}

/// `f̄(u, ω, π) = −κ cos(u) W(ω, π)` and `g(x, ω) = −ω_k x` where `ω_k` is the
/// frequency coordinate.
fn kuramoto_hamiltonian(kappa: f64, spatial: Option<(f64, f64)>, freq: usize) -> Hamiltonian {
    let f_bar: super::PotentialFn = match spatial {
        None => Arc::new(move |u, _, _| -kappa * math::cos(u)),
        Some((c, alpha)) => {
            Arc::new(move |u, w, p| -kappa * math::cos(u) * spatial_weight(w, p, c, alpha))
        }
    };
    let g: SingleFn = Arc::new(move |x, w| -w[freq] * x);
    Hamiltonian { f_bar, g }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kuramoto_values() {
        let m = kuramoto(1.0).unwrap();
        assert_eq!(m.phi(0.0, 0.0, &[0.0], &[0.0]), 0.0);
        assert!((m.phi(0.0, PI / 2.0, &[0.0], &[0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(m.psi(3.0, &[0.25]), 0.25);
        assert_eq!(m.kernel().as_constant(), Some(1.0));
        assert!(m.is_periodic());
    }

    #[test]
    fn spatial_kernel_values() {
        let m = spatial_kuramoto(1.0, 1.0, 2.0).unwrap();
        let a = [0.2, 0.3, 0.4, 0.9];
        assert_eq!(m.kernel().eval(&a, &a), 1.0);
        let b = [1.2, 0.3, 0.4, 0.1];
        assert!((m.kernel().eval(&a, &b) - 0.5).abs() < 1e-15);
        assert_eq!(m.psi(0.0, &b), 0.1);
        assert_eq!(m.kernel().sup(), 1.0);
        assert_eq!(m.media_dim(), 4);
    }

    #[test]
    fn spatial_with_zero_c_is_plain_kuramoto() {
        let m = spatial_kuramoto(0.7, 0.0, 2.0).unwrap();
        assert_eq!(m.kernel().as_constant(), Some(1.0));
        let a = [0.0, 0.0, 0.0, 0.3];
        let b = [1.0, 1.0, 1.0, 0.6];
        assert_eq!(m.kernel().eval(&a, &b), 1.0);
        assert_eq!(m.phi(0.1, 0.5, &a, &b), 0.7 * math::sin(0.4));
    }

    #[test]
    fn rejects_negative_parameters() {
        assert!(spatial_kuramoto(1.0, -1.0, 2.0).is_err());
        assert!(kuramoto(f64::NAN).is_err());
    }
}
