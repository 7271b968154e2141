//! Gaussian expectations `E[f(x + εN)]` by Gauss–Hermite quadrature.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math;
use crate::model::ArgumentStructure;
use crate::{Error, Result};

/// Nodes and weights with `Σ w_i f(x_i) ≈ E[f(N)]` for a standard normal `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// The `order`-point rule, exact for polynomials of degree `< 2·order`.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || order > 200 {
            return Err(Error::InvalidArgument(alloc::format!(
                "quadrature order {order} outside 1..=200"
            )));
        }
        // physicists' rule for the weight e^{−t²}, Newton on the orthonormal recurrence
        let n = order;
        let mut t = vec![0.0; n];
        let mut w = vec![0.0; n];
        let pim4 = 1.0 / math::powf(PI, 0.25);
        let nf = n as f64;
        let mut z = 0.0;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => math::sqrt(2.0 * nf + 1.0) - 1.85575 * math::powf(2.0 * nf + 1.0, -1.0 / 6.0),
                1 => z - 1.14 * math::powf(nf, 0.426) / z,
                2 => 1.86 * z - 0.86 * t[0],
                3 => 1.91 * z - 0.91 * t[1],
                _ => 2.0 * z - t[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * math::sqrt(2.0 / (jf + 1.0)) * p2 - math::sqrt(jf / (jf + 1.0)) * p3;
                }
                pp = math::sqrt(2.0 * nf) * p2;
                let step = p1 / pp;
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            t[i] = z;
            t[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        let norm = 1.0 / math::sqrt(PI);
        let nodes = t.iter().rev().map(|v| v * core::f64::consts::SQRT_2).collect();
        let weights: Vec<f64> = w.iter().rev().map(|v| v * norm).collect();
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// Settings for multi-dimensional smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    rule: GaussHermite,
    /// Largest dimension integrated by tensor products.
    pub tensor_cap: usize,
    /// Fixed normal vectors used above the cap; `None` rejects such dimensions.
    mc: Option<(usize, u64)>,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self::new(16).expect("16 is a valid order")
    }
}

impl Quadrature {
    pub fn new(order: usize) -> Result<Self> {
        Ok(Self {
            rule: GaussHermite::new(order)?,
            tensor_cap: 4,
            mc: None,
        })
    }

    /// Enables Monte Carlo above the tensor cap with `samples ≥ 10⁵` draws.
    pub fn with_monte_carlo(mut self, samples: usize, seed: u64) -> Self {
        self.mc = Some((samples.max(100_000), seed));
        self
    }

    pub fn rule(&self) -> &GaussHermite {
        &self.rule
    }

    /// `E[f(point + ε N)]` integrating only the directions in `structure`.
    pub fn smooth(
        &self,
        f: &dyn Fn(&[f64]) -> f64,
        epsilon: f64,
        point: &[f64],
        structure: &ArgumentStructure,
    ) -> Result<f64> {
        let mut scratch = point.to_vec();
        match structure {
            ArgumentStructure::Ridge(a) => {
                let len = math::sqrt(a.iter().map(|v| v * v).sum());
                if a.len() != point.len() {
                    return Err(Error::ShapeMismatch("ridge direction length".into()));
                }
                if len == 0.0 {
                    return Ok(f(point));
                }
                Ok(self.rule.expect(|z| {
                    for (k, s) in scratch.iter_mut().enumerate() {
                        *s = point[k] + epsilon * z * a[k] / len;
                    }
                    f(&scratch)
                }))
            }
            ArgumentStructure::Coordinates(active) => {
                if active.iter().any(|&k| k >= point.len()) {
                    return Err(Error::ShapeMismatch("active coordinate out of range".into()));
                }
                self.tensor(f, epsilon, point, active, &mut scratch)
            }
            ArgumentStructure::Full => {
                let active: Vec<usize> = (0..point.len()).collect();
                self.tensor(f, epsilon, point, &active, &mut scratch)
            }
        }
    }

    fn tensor(
        &self,
        f: &dyn Fn(&[f64]) -> f64,
        epsilon: f64,
        point: &[f64],
        active: &[usize],
        scratch: &mut [f64],
    ) -> Result<f64> {
        let k = active.len();
        if k > self.tensor_cap {
            let (samples, seed) = self.mc.ok_or(Error::QuadratureDimension {
                dim: k,
                cap: self.tensor_cap,
            })?;
            let mut rng = crate::rng::stream(seed, 0x4D43);
            let mut acc = 0.0;
            for _ in 0..samples {
                for &j in active {
                    scratch[j] = point[j] + epsilon * crate::rng::box_muller(&mut rng);
                }
                acc += f(scratch);
            }
            return Ok(acc / samples as f64);
        }
        let m = self.rule.nodes.len();
        let total = m.pow(k as u32);
        let mut acc = 0.0;
        for mut code in 0..total {
            let mut w = 1.0;
            for &j in active {
                let idx = code % m;
                code /= m;
                scratch[j] = point[j] + epsilon * self.rule.nodes[idx];
                w *= self.rule.weights[idx];
            }
            acc += w * f(scratch);
        }
        Ok(acc)
    }
}

/// `φ_ε(x) = E[φ(x + εN)]` with the default 16-point tensor rule.
pub fn mollify(phi: &dyn Fn(&[f64]) -> f64, epsilon: f64, point: &[f64]) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("epsilon = {epsilon} not in (0, 1]")));
    }
    Quadrature::default().smooth(phi, epsilon, point, &ArgumentStructure::Full)
}
