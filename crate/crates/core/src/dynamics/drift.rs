use alloc::vec::Vec;

use num_complex::Complex64;

use crate::graph::GraphSample;
use crate::model::{InteractionModel, Media};
use crate::{Error, Result};

type PairRef<'a> = &'a (dyn Fn(f64, f64, &[f64], &[f64]) -> f64 + Send + Sync);

/// How the mean-field sum `(1/n) Σ_j W φ` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DenseEvaluation {
    /// `O(n)` sum per particle, `j` ascending, with the same pair terms as
    /// the sparse system so that `P = P̄` gives identical trajectories.
    #[default]
    Pairwise,
    /// Through the Fourier atoms when the kernel is constant, `O(K)` per
    /// particle after an `O(nK)` pass; falls back to pairwise otherwise.
    Factorized,
}

fn check_state(state: &[f64], i: usize) -> Result<()> {
    if i >= state.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "index {i} out of range for {} particles",
            state.len()
        )));
    }
    match state.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(Error::NonFiniteInput(k)),
        None => Ok(()),
    }
}

#[inline]
pub(crate) fn sparse_interaction(
    phi: PairRef<'_>,
    sample: &GraphSample,
    state: &[f64],
    i: usize,
) -> f64 {
    let w = sample.edge_weight();
    let media = sample.media();
    let (xi, oi) = (state[i], media.get(i));
    let mut acc = 0.0;
    sample
        .adjacency()
        .for_each_neighbor(i, |j| acc += w * phi(xi, state[j], oi, media.get(j)));
    acc
}

#[inline]
pub(crate) fn dense_interaction(
    phi: PairRef<'_>,
    model: &InteractionModel,
    media: &Media,
    state: &[f64],
    i: usize,
) -> f64 {
    let n = state.len() as f64;
    let kernel = model.kernel();
    let (xi, oi) = (state[i], media.get(i));
    let mut acc = 0.0;
    for (j, &xj) in state.iter().enumerate() {
        let oj = media.get(j);
        acc += kernel.eval(oi, oj) / n * phi(xi, xj, oi, oj);
    }
    acc
}

/// `Σ_j P_ij φ(x_i, x_j, ω_i, ω_j) + ψ(x_i, ω_i)` over the neighbors of `i`.
pub fn drift_sparse(
    model: &InteractionModel,
    sample: &GraphSample,
    state: &[f64],
    i: usize,
) -> Result<f64> {
    check_state(state, i)?;
    if state.len() != sample.n() {
        return Err(Error::ShapeMismatch("state length differs from n".into()));
    }
    Ok(sparse_interaction(model.phi_fn().as_ref(), sample, state, i)
        + model.psi(state[i], sample.media().get(i)))
}

/// `(1/n) Σ_j W(ω_i, ω_j) φ(x_i, x_j, ω_i, ω_j) + ψ(x_i, ω_i)`.
pub fn drift_dense(model: &InteractionModel, media: &Media, state: &[f64], i: usize) -> Result<f64> {
    check_state(state, i)?;
    if state.len() != media.len() {
        return Err(Error::ShapeMismatch("state length differs from media count".into()));
    }
    Ok(dense_interaction(model.phi_fn().as_ref(), model, media, state, i)
        + model.psi(state[i], media.get(i)))
}

/// Per-particle factors of the Fourier atoms, `L_k(i) = a_k l_k(x_i, ω_i)`
/// and `R_k(j) = r_k(x_j, ω_j)`, so that a pair term
/// `φ(x_i, x_j, ω_i, ω_j) = Re Σ_k L_k(i) R_k(j)` costs `K` products.
pub(crate) struct PairFeatures {
    atoms: usize,
    left: Vec<Complex64>,
    right: Vec<Complex64>,
}

impl PairFeatures {
    /// `None` when the model has no atoms.
    pub(crate) fn new(model: &InteractionModel, media: &Media, state: &[f64]) -> Option<Self> {
        let f = model.fourier()?;
        let atoms = f.atoms().len();
        let mut left = Vec::with_capacity(state.len() * atoms);
        let mut right = Vec::with_capacity(state.len() * atoms);
        for (j, &x) in state.iter().enumerate() {
            let omega = media.get(j);
            for (k, a) in f.atoms().iter().enumerate() {
                left.push(a.weight * f.left_factor(k, x, omega));
                right.push(f.right_factor(k, x, omega));
            }
        }
        Some(Self { atoms, left, right })
    }

    #[inline(always)]
    fn pair(&self, i: usize, j: usize) -> f64 {
        let l = &self.left[i * self.atoms..(i + 1) * self.atoms];
        let r = &self.right[j * self.atoms..(j + 1) * self.atoms];
        let mut acc = 0.0;
        for (a, b) in l.iter().zip(r) {
            acc += a.re * b.re - a.im * b.im;
        }
        acc
    }

    /// As `sparse_interaction` with pair terms from the features.
    pub(crate) fn sparse(&self, sample: &GraphSample, i: usize) -> f64 {
        let w = sample.edge_weight();
        let mut acc = 0.0;
        sample
            .adjacency()
            .for_each_neighbor(i, |j| acc += w * self.pair(i, j));
        acc
    }

    /// As `dense_interaction` with pair terms from the features.
    pub(crate) fn dense(&self, model: &InteractionModel, media: &Media, i: usize) -> f64 {
        let n = media.len() as f64;
        let kernel = model.kernel();
        let oi = media.get(i);
        let mut acc = 0.0;
        match kernel.as_constant() {
            Some(c) => {
                let w = c / n;
                for j in 0..media.len() {
                    acc += w * self.pair(i, j);
                }
            }
            None => {
                for j in 0..media.len() {
                    acc += kernel.eval(oi, media.get(j)) / n * self.pair(i, j);
                }
            }
        }
        acc
    }
}

/// Precomputed `B_k = (c/n) Σ_j r_k(x_j, ω_j)` for the factorized mean field.
pub(crate) struct FourierSums {
    sums: Vec<Complex64>,
}

impl FourierSums {
    /// `None` when the model has no atoms or a non-constant kernel.
    pub(crate) fn new(model: &InteractionModel, media: &Media, state: &[f64]) -> Option<Self> {
        let c = model.kernel().as_constant()?;
        let f = model.fourier()?;
        let n = state.len() as f64;
        let sums = (0..f.atoms().len())
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &y) in state.iter().enumerate() {
                    acc += f.right_factor(k, y, media.get(j));
                }
                acc * (c / n)
            })
            .collect();
        Some(Self { sums })
    }

    #[inline]
    pub(crate) fn interaction(&self, model: &InteractionModel, x: f64, omega: &[f64]) -> f64 {
        let f = model.fourier().expect("checked at construction");
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in f.atoms().iter().enumerate() {
            acc += a.weight * f.left_factor(k, x, omega) * self.sums[k];
        }
        acc.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_w_graph;
    use crate::model::{kuramoto, Kernel};
    use crate::math;

    #[test]
    fn two_particle_complete_graph() {
        let kappa = 0.7;
        let m = kuramoto(kappa).unwrap();
        let media = Media::from_scalars(alloc::vec![0.1, -0.3]).unwrap();
        let g = sample_w_graph(2, 1.0, &Kernel::constant(1.0), media.clone(), 1).unwrap();
        let x = [0.4, 1.5];
        let expected = kappa / 2.0 * (math::sin(x[1] - x[0]) + 0.0) + 0.1;
        assert!((drift_sparse(&m, &g, &x, 0).unwrap() - expected).abs() < 1e-15);
        assert!((drift_dense(&m, &media, &x, 0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn equal_positions_leave_only_psi() {
        let m = kuramoto(2.0).unwrap();
        let media = Media::from_scalars(alloc::vec![0.25, -0.1, 0.3]).unwrap();
        let x = [1.0; 3];
        for i in 0..3 {
            assert_eq!(drift_dense(&m, &media, &x, i).unwrap(), media.get(i)[0]);
        }
        let zero = kuramoto(0.0).unwrap();
        assert_eq!(drift_dense(&zero, &media, &[0.3, 2.0, -1.0], 1).unwrap(), -0.1);
    }

    #[test]
    fn dense_matches_kuramoto_formula() {
        let kappa = 1.3;
        let m = kuramoto(kappa).unwrap();
        let n = 50;
        let media = Media::from_scalars((0..n).map(|i| i as f64 / 100.0).collect()).unwrap();
        let x: Vec<f64> = (0..n).map(|i| math::sin(i as f64 * 1.7) * 3.0).collect();
        for i in 0..n {
            let direct: f64 = kappa / n as f64 * x.iter().map(|xj| math::sin(xj - x[i])).sum::<f64>()
                + media.get(i)[0];
            let got = drift_dense(&m, &media, &x, i).unwrap();
            assert!((got - direct).abs() < 1e-13);
            let sums = FourierSums::new(&m, &media, &x).unwrap();
            let fact = sums.interaction(&m, x[i], media.get(i)) + media.get(i)[0];
            assert!((fact - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_features_match_direct_terms() {
        for m in [kuramoto(1.3).unwrap(), crate::model::spatial_kuramoto(0.8, 1.0, 2.0).unwrap()] {
            let n = 40;
            let media = m.sample_media(n, 3);
            let x: Vec<f64> = (0..n).map(|i| math::sin(i as f64 * 1.7) * 3.0).collect();
            let f = PairFeatures::new(&m, &media, &x).unwrap();
            for i in 0..n {
                let direct = dense_interaction(m.phi_fn().as_ref(), &m, &media, &x, i);
                assert!((f.dense(&m, &media, i) - direct).abs() < 1e-12);
            }
            let g = sample_w_graph(n, 0.3, m.kernel(), media, 3).unwrap();
            for i in 0..n {
                let direct = sparse_interaction(m.phi_fn().as_ref(), &g, &x, i);
                assert!((f.sparse(&g, i) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_finite_state() {
        let m = kuramoto(1.0).unwrap();
        let media = Media::from_scalars(alloc::vec![0.0, 0.0]).unwrap();
        assert!(drift_dense(&m, &media, &[0.0, f64::NAN], 0).is_err());
    }
}
