//! Initial-condition and media distributions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::math;
use crate::{Error, Result};

/// Media variables `ω_1..ω_n ∈ ℝ^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Media {
    dim: usize,
    values: Vec<f64>,
}

impl Media {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} media values do not form rows of dimension {dim}",
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(k));
        }
        Ok(Self { dim, values })
    }

    /// `n` copies of the zero vector in `ℝ^dim`.
    pub fn zeros(n: usize, dim: usize) -> Self {
        Self {
            dim,
            values: vec![0.0; n * dim],
        }
    }

    pub fn from_scalars(values: Vec<f64>) -> Result<Self> {
        Self::new(1, values)
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }
}

/// The law `λ` of the initial positions.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialLaw {
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, sd: f64 },
    /// Density `(1 + a cos x) / 2π` on `[-π, π)`, `|a| ≤ 1`.
    CosinePerturbed { amplitude: f64 },
}

impl InitialLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            InitialLaw::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            InitialLaw::Gaussian { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            InitialLaw::CosinePerturbed { amplitude } => amplitude.abs() <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(alloc::format!(
                "invalid initial law {self:?}"
            )))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            InitialLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
            InitialLaw::Gaussian { mean, sd } => mean + sd * crate::rng::box_muller(rng),
            InitialLaw::CosinePerturbed { amplitude } => loop {
                let x = -PI + 2.0 * PI * rng.gen::<f64>();
                let accept = (1.0 + amplitude * math::cos(x)) / (1.0 + amplitude.abs());
                if rng.gen::<f64>() < accept {
                    break x;
                }
            },
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match *self {
            InitialLaw::Uniform { lo, hi } => {
                if (lo..hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            InitialLaw::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                math::exp(-0.5 * z * z) / (sd * math::sqrt(2.0 * PI))
            }
            InitialLaw::CosinePerturbed { amplitude } => {
                if (-PI..PI).contains(&x) {
                    (1.0 + amplitude * math::cos(x)) / (2.0 * PI)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            InitialLaw::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            InitialLaw::Gaussian { mean, sd } => {
                0.5 * (1.0 + math::erf((x - mean) / (sd * core::f64::consts::SQRT_2)))
            }
            InitialLaw::CosinePerturbed { amplitude } => {
                let x = x.clamp(-PI, PI);
                (x + PI + amplitude * math::sin(x)) / (2.0 * PI)
            }
        }
    }

    /// Inverse CDF on `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            InitialLaw::Uniform { lo, hi } => lo + (hi - lo) * u,
            _ => {
                let (mut a, mut b) = self.support();
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if self.cdf(m) < u {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                0.5 * (a + b)
            }
        }
    }

    /// An interval carrying all (or, for the Gaussian, all but 1e-15) of the mass.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            InitialLaw::Uniform { lo, hi } => (lo, hi),
            InitialLaw::Gaussian { mean, sd } => (mean - 8.0 * sd, mean + 8.0 * sd),
            InitialLaw::CosinePerturbed { .. } => (-PI, PI),
        }
    }
}

/// The law `μ` of the media variables.
#[derive(Debug, Clone, PartialEq)]
pub enum MediaLaw {
    /// Every particle carries the same media vector.
    Point(Vec<f64>),
    /// Product of uniform laws on `[lo_k, hi_k]`.
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
}

impl MediaLaw {
    pub fn uniform_interval(lo: f64, hi: f64) -> Self {
        MediaLaw::UniformBox {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MediaLaw::Point(v) => v.len(),
            MediaLaw::UniformBox { lo, .. } => lo.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            MediaLaw::Point(v) => !v.is_empty() && v.iter().all(|x| x.is_finite()),
            MediaLaw::UniformBox { lo, hi } => {
                !lo.is_empty()
                    && lo.len() == hi.len()
                    && lo.iter().zip(hi).all(|(a, b)| a.is_finite() && b.is_finite() && a <= b)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(alloc::format!("invalid media law {self:?}")))
        }
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            MediaLaw::Point(v) => out.extend_from_slice(v),
            MediaLaw::UniformBox { lo, hi } => {
                for (a, b) in lo.iter().zip(hi) {
                    out.push(a + (b - a) * rng.gen::<f64>());
                }
            }
        }
    }

    /// Largest absolute value of coordinate `k` on the support.
    pub fn sup_abs(&self, k: usize) -> f64 {
        match self {
            MediaLaw::Point(v) => v[k].abs(),
            MediaLaw::UniformBox { lo, hi } => lo[k].abs().max(hi[k].abs()),
        }
    }

    /// Deterministic quantile atoms approximating the law.
    ///
    /// A uniform box is replaced by a tensor grid of midpoint quantiles with
    /// `⌊count^{1/d}⌋` (at least one) points per axis and equal weights.
    pub fn quantile_atoms(&self, count: usize) -> Vec<(Vec<f64>, f64)> {
        match self {
            MediaLaw::Point(v) => vec![(v.clone(), 1.0)],
            MediaLaw::UniformBox { lo, hi } => {
                let d = lo.len();
                let mut per_axis = 1usize;
                while (per_axis + 1).checked_pow(d as u32).is_some_and(|c| c <= count.max(1)) {
                    per_axis += 1;
                }
                let total = per_axis.pow(d as u32);
                let weight = 1.0 / total as f64;
                (0..total)
                    .map(|mut code| {
                        let point = (0..d)
                            .map(|k| {
                                let idx = code % per_axis;
                                code /= per_axis;
                                let u = (idx as f64 + 0.5) / per_axis as f64;
                                lo[k] + (hi[k] - lo[k]) * u
                            })
                            .collect();
                        (point, weight)
                    })
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_law_cdf_and_quantile_agree() {
        let law = InitialLaw::CosinePerturbed { amplitude: 0.5 };
        assert!((law.cdf(PI) - 1.0).abs() < 1e-15);
        assert!(law.cdf(-PI).abs() < 1e-15);
        for &u in &[0.1, 0.25, 0.5, 0.9] {
            assert!((law.cdf(law.quantile(u)) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn quantile_atoms_cover_box() {
        let law = MediaLaw::UniformBox {
            lo: vec![0.0, -1.0],
            hi: vec![1.0, 1.0],
        };
        let atoms = law.quantile_atoms(10);
        assert_eq!(atoms.len(), 9);
        let w: f64 = atoms.iter().map(|a| a.1).sum();
        assert!((w - 1.0).abs() < 1e-15);
        let mean0: f64 = atoms.iter().map(|a| a.0[0] * a.1).sum();
        assert!((mean0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn media_rejects_ragged_rows() {
        assert!(Media::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(Media::new(1, vec![f64::NAN]).is_err());
    }
}
