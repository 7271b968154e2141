use alloc::vec::Vec;

use crate::{Error, Result};

/// Finitely many atoms on `ℝ` with nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedSample {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty sample".into()));
        }
        if values.len() != weights.len() {
            return Err(Error::ShapeMismatch("values and weights differ in length".into()));
        }
        if let Some(k) = values
            .iter()
            .zip(&weights)
            .position(|(v, w)| !v.is_finite() || !w.is_finite() || *w < 0.0)
        {
            return Err(Error::NonFiniteInput(k));
        }
        let mass: f64 = weights.iter().sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(alloc::format!("total mass {mass} is not 1")));
        }
        Ok(Self { values, weights })
    }

    /// Equal weights `1/n`.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(values, alloc::vec![1.0 / n.max(1) as f64; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn is_uniform(&self) -> bool {
        let w0 = self.weights[0];
        self.weights.iter().all(|&w| w == w0)
    }

    fn sorted(&self) -> Vec<(f64, f64)> {
        let mut atoms: Vec<(f64, f64)> = self
            .values
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        atoms
    }
}

/// Mean of `|a_(k) − b_(k)|` over sorted copies of two equal-size samples.
pub fn sorted_mean_gap(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// Exact `W₁ = ∫ |F_a − F_b| dx`.
pub fn wasserstein_1d(a: &WeightedSample, b: &WeightedSample) -> f64 {
    if a.values.len() == b.values.len() && a.is_uniform() && b.is_uniform() {
        return sorted_mean_gap(&a.values, &b.values);
    }
    let sa = a.sorted();
    let sb = b.sorted();
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut last = sa[0].0.min(sb[0].0);
    let mut total = 0.0;
    while i < sa.len() || j < sb.len() {
        let next = match (sa.get(i), sb.get(j)) {
            (Some(x), Some(y)) => x.0.min(y.0),
            (Some(x), None) => x.0,
            (None, Some(y)) => y.0,
            (None, None) => unreachable!(),
        };
        total += (fa - fb).abs() * (next - last);
        while i < sa.len() && sa[i].0 == next {
            fa += sa[i].1;
            i += 1;
        }
        while j < sb.len() && sb[j].0 == next {
            fb += sb[j].1;
            j += 1;
        }
        last = next;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::Rng;

    fn lp_oracle(a: &[f64], b: &[f64]) -> f64 {
        // equal weights: an optimal plan is a permutation (Birkhoff), so enumerate them
        fn permute(k: usize, perm: &mut Vec<usize>, a: &[f64], b: &[f64], best: &mut f64) {
            if k == perm.len() {
                let cost: f64 = perm.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).abs()).sum();
                *best = best.min(cost / a.len() as f64);
                return;
            }
            for s in k..perm.len() {
                perm.swap(k, s);
                permute(k + 1, perm, a, b, best);
                perm.swap(k, s);
            }
        }
        let mut best = f64::INFINITY;
        permute(0, &mut (0..a.len()).collect(), a, b, &mut best);
        best
    }

    #[test]
    fn examples() {
        let s = WeightedSample::uniform(vec![0.3, -1.0, 2.0]).unwrap();
        assert_eq!(wasserstein_1d(&s, &s), 0.0);
        let d0 = WeightedSample::uniform(vec![0.0]).unwrap();
        let d1 = WeightedSample::uniform(vec![1.0]).unwrap();
        assert_eq!(wasserstein_1d(&d0, &d1), 1.0);
        let a = WeightedSample::uniform(vec![0.0, 1.0]).unwrap();
        let b = WeightedSample::uniform(vec![1.0, 2.0]).unwrap();
        assert_eq!(wasserstein_1d(&a, &b), 1.0);
    }

    #[test]
    fn agrees_with_permutation_oracle() {
        let mut rng = crate::rng::stream(12, 0);
        for _ in 0..300 {
            let n = rng.gen_range(1..=6);
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let exact = lp_oracle(&a, &b);
            let wa = WeightedSample::uniform(a.clone()).unwrap();
            let wb = WeightedSample::uniform(b.clone()).unwrap();
            assert!((wasserstein_1d(&wa, &wb) - exact).abs() < 1e-12);
            // the general CDF sweep on the same data, via weights perturbed in representation only
            let mut a2 = a.clone();
            a2.push(a[0]);
            let mut w2 = vec![1.0 / n as f64; n];
            w2[0] /= 2.0;
            w2.push(1.0 / (2.0 * n as f64));
            let wa2 = WeightedSample::new(a2, w2).unwrap();
            assert!((wasserstein_1d(&wa2, &wb) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_atoms() {
        let a = WeightedSample::new(vec![0.0, 1.0], vec![0.25, 0.75]).unwrap();
        let b = WeightedSample::uniform(vec![0.0]).unwrap();
        assert!((wasserstein_1d(&a, &b) - 0.75).abs() < 1e-15);
        assert!(WeightedSample::uniform(vec![]).is_err());
        assert!(WeightedSample::new(vec![0.0], vec![0.5]).is_err());
    }
}
