//! Finite atomic complex measures representing interaction functions.
//!
//! An interaction `φ(x, y, ω, π)` is represented as
//! `Σ_k w_k exp(2πi ⟨(x, y, ω, π), z_k⟩)` for atoms `(z_k, w_k)`.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FourierAtom {
    /// Frequency vector in `ℝ^{2d+2}`, ordered as `(x, y, ω, π)`.
    pub frequency: Vec<f64>,
    pub weight: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierMeasure {
    media_dim: usize,
    atoms: Vec<FourierAtom>,
}

#[inline]
fn cis(theta: f64) -> Complex64 {
    Complex64::new(math::cos(theta), math::sin(theta))
}

impl FourierMeasure {
    pub fn new(media_dim: usize, atoms: Vec<FourierAtom>) -> Result<Self> {
        let dim = 2 * media_dim + 2;
        for (k, a) in atoms.iter().enumerate() {
            if a.frequency.len() != dim {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "atom {k} has {} frequency coordinates, expected {dim}",
                    a.frequency.len()
                )));
            }
            if !a.weight.re.is_finite()
                || !a.weight.im.is_finite()
                || a.frequency.iter().any(|z| !z.is_finite())
            {
                return Err(Error::NonFiniteInput(k));
            }
        }
        Ok(Self { media_dim, atoms })
    }

    /// The two-atom measure of `κ sin(y − x)`: frequencies `±(−1/2π, 1/2π, 0, 0)`
    /// with weights `κ/(2i)` and `−κ/(2i)`.
    pub fn kuramoto(kappa: f64, media_dim: usize) -> Self {
        let dim = 2 * media_dim + 2;
        let f = 1.0 / TAU;
        let mut plus = alloc::vec![0.0; dim];
        plus[0] = -f;
        plus[1] = f;
        let minus: Vec<f64> = plus.iter().map(|z| -z).collect();
        let w = Complex64::new(0.0, -kappa / 2.0);
        Self {
            media_dim,
            atoms: alloc::vec![
                FourierAtom { frequency: plus, weight: w },
                FourierAtom { frequency: minus, weight: -w },
            ],
        }
    }

    pub fn atoms(&self) -> &[FourierAtom] {
        &self.atoms
    }

    pub fn media_dim(&self) -> usize {
        self.media_dim
    }

    /// The complex value of the representation integral at `(x, y, ω, π)`.
    pub fn eval_complex(&self, x: f64, y: f64, omega: &[f64], pi: &[f64]) -> Complex64 {
        let d = self.media_dim;
        self.atoms
            .iter()
            .map(|a| {
                let z = &a.frequency;
                let mut phase = z[0] * x + z[1] * y;
                for k in 0..d {
                    phase += z[2 + k] * omega[k] + z[2 + d + k] * pi[k];
                }
                a.weight * cis(TAU * phase)
            })
            .sum()
    }

    pub fn eval(&self, x: f64, y: f64, omega: &[f64], pi: &[f64]) -> f64 {
        self.eval_complex(x, y, omega, pi).re
    }

    /// `(Re w)⁺ + (Re w)⁻ + (Im w)⁺ + (Im w)⁻` summed over atoms.
    pub fn tv_norm(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight.re.abs() + a.weight.im.abs())
            .sum()
    }

    /// Left factor `exp(2πi (z₁ x + ⟨z₃, ω⟩))` of atom `k`.
    #[inline]
    pub fn left_factor(&self, k: usize, x: f64, omega: &[f64]) -> Complex64 {
        let z = &self.atoms[k].frequency;
        let mut phase = z[0] * x;
        for (j, w) in omega.iter().enumerate() {
            phase += z[2 + j] * w;
        }
        cis(TAU * phase)
    }

    /// Right factor `exp(2πi (z₂ y + ⟨z₄, π⟩))` of atom `k`.
    #[inline]
    pub fn right_factor(&self, k: usize, y: f64, pi: &[f64]) -> Complex64 {
        let z = &self.atoms[k].frequency;
        let d = self.media_dim;
        let mut phase = z[1] * y;
        for (j, w) in pi.iter().enumerate() {
            phase += z[2 + d + j] * w;
        }
        cis(TAU * phase)
    }
}
