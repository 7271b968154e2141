//! Double-layer empirical measures and the distances between them.

mod bl;
mod wasserstein;

use alloc::vec;
use alloc::vec::Vec;

pub use bl::dbl_lower_bound;
pub use wasserstein::{sorted_mean_gap, wasserstein_1d, WeightedSample};

use crate::dynamics::{Ensemble, TrajectoryPair, Trajectories};
use crate::math;
use crate::model::{InteractionModel, Media};
use crate::{Error, Result};

/// `(1/n) Σ δ_{(θ_i, ω_i)}` over grid paths.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    pub theta: Trajectories,
    pub media: Media,
    pub dt: f64,
}

impl EmpiricalMeasure {
    pub fn new(theta: Trajectories, media: Media, dt: f64) -> Result<Self> {
        if theta.n() != media.len() {
            return Err(Error::ShapeMismatch("trajectory and media counts differ".into()));
        }
        Ok(Self { theta, media, dt })
    }

    pub fn from_ensemble(e: &Ensemble) -> Self {
        Self {
            theta: e.theta.clone(),
            media: e.media.clone(),
            dt: e.dt,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.theta.steps() as f64
    }

    /// Grid index of time `t`, rejecting times off the grid.
    pub fn step_of(&self, t: f64) -> Result<usize> {
        let r = t / self.dt;
        let k = math::round(r);
        if !t.is_finite() || k < 0.0 || k > self.theta.steps() as f64 || (r - k).abs() > 1e-9 * r.abs().max(1.0) {
            return Err(Error::OffGrid { t });
        }
        Ok(k as usize)
    }
}

/// The time-`t` projection: positions paired with their media.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub positions: Vec<f64>,
    pub media: Media,
}

impl Marginal {
    /// The position marginal with equal weights.
    pub fn positions_sample(&self) -> Result<WeightedSample> {
        WeightedSample::uniform(self.positions.clone())
    }
}

pub fn marginal(measure: &EmpiricalMeasure, t: f64) -> Result<Marginal> {
    let k = measure.step_of(t)?;
    Ok(Marginal {
        positions: measure.theta.at(k).to_vec(),
        media: measure.media.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingDistanceReport {
    /// `Δ(T) = (1/n) Σ sup_{s ≤ T} |θ_i(s) − θ̄_i(s)|`.
    pub delta_t: f64,
    /// `(1/n) Σ min(sup_{s ≤ T} |θ_i(s) − θ̄_i(s)|, 1)`.
    pub delta_t_capped: f64,
    pub per_time_delta: Vec<f64>,
    /// Exact `W₁` between the position marginals at each grid time.
    pub w1_marginals: Vec<f64>,
    /// Running sup of `|δ_i|` at `T`, per particle.
    pub per_particle_sup: Vec<f64>,
}

/// Running-sup coupling distances between the two halves of a coupled pair.
pub fn coupling_delta(pair: &TrajectoryPair) -> Result<CouplingDistanceReport> {
    coupling_between(&pair.theta_sparse, &pair.theta_dense)
}

/// As [`coupling_delta`] for any two trajectory arrays on the same grid.
pub fn coupling_between(a: &Trajectories, b: &Trajectories) -> Result<CouplingDistanceReport> {
    if a.n() != b.n() || a.steps() != b.steps() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{}x{} against {}x{} trajectories",
            a.n(),
            a.steps(),
            b.n(),
            b.steps()
        )));
    }
    let n = a.n();
    if n == 0 {
        return Err(Error::InvalidArgument("no particles".into()));
    }
    let mut sup = vec![0.0f64; n];
    let mut per_time = Vec::with_capacity(a.steps() + 1);
    let mut w1 = Vec::with_capacity(a.steps() + 1);
    for k in 0..=a.steps() {
        let (xa, xb) = (a.at(k), b.at(k));
        for i in 0..n {
            sup[i] = sup[i].max((xa[i] - xb[i]).abs());
        }
        per_time.push(sup.iter().sum::<f64>() / n as f64);
        w1.push(sorted_mean_gap(xa, xb));
    }
    Ok(CouplingDistanceReport {
        delta_t: *per_time.last().expect("at least one grid time"),
        delta_t_capped: sup.iter().map(|s| s.min(1.0)).sum::<f64>() / n as f64,
        per_time_delta: per_time,
        w1_marginals: w1,
        per_particle_sup: sup,
    })
}

/// `T exp(‖W‖∞ (2‖φ‖_Lip + ‖ψ‖_Lip) T) · 4 ‖m_φ‖_TV · ‖D‖_{∞→1} / n`.
pub fn gronwall_wasserstein_bound(
    model: &InteractionModel,
    norm_d: f64,
    n: usize,
    horizon: f64,
) -> Result<f64> {
    let m = model.fourier().ok_or_else(|| Error::MissingCapability {
        model: model.id().into(),
        what: "a Fourier representation",
    })?;
    if !(norm_d >= 0.0) || n == 0 || !(horizon >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "need norm_D >= 0, n >= 1, T >= 0 (got {norm_d}, {n}, {horizon})"
        )));
    }
    let c = model.constants();
    Ok(gronwall_closed_form(
        model.kernel().sup(),
        c.lip_phi,
        c.lip_psi,
        m.tv_norm(),
        norm_d / n as f64,
        horizon,
    ))
}

/// The closed form of [`gronwall_wasserstein_bound`] from its scalar inputs.
pub fn gronwall_closed_form(
    sup_w: f64,
    lip_phi: f64,
    lip_psi: f64,
    tv: f64,
    norm_d_over_n: f64,
    horizon: f64,
) -> f64 {
    if norm_d_over_n == 0.0 {
        return 0.0;
    }
    horizon * math::exp(sup_w * (2.0 * lip_phi + lip_psi) * horizon) * 4.0 * tv * norm_d_over_n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate_coupled, StepConfig};
    use crate::graph::sample_w_graph;
    use crate::model::{kuramoto, Kernel};

    fn traj(n: usize, steps: usize, f: impl Fn(usize, usize) -> f64) -> Trajectories {
        let data = (0..=steps).flat_map(|k| (0..n).map(move |i| (k, i))).map(|(k, i)| f(k, i)).collect();
        Trajectories::from_time_major(n, steps, data).unwrap()
    }

    #[test]
    fn ramp_difference() {
        let a = traj(1, 10, |k, _| k as f64 * 0.1);
        let b = traj(1, 10, |_, _| 0.0);
        let r = coupling_between(&a, &b).unwrap();
        assert!((r.delta_t - 1.0).abs() < 1e-15);
        assert_eq!(r.per_time_delta[0], 0.0);
        assert!(r.delta_t_capped <= r.delta_t);
        let same = coupling_between(&a, &a).unwrap();
        assert_eq!(same.delta_t, 0.0);
    }

    #[test]
    fn report_invariants_on_a_run() {
        let m = kuramoto(1.0).unwrap();
        let media = m.sample_media(64, 4);
        let g = sample_w_graph(64, 0.2, &Kernel::constant(1.0), media, 4).unwrap();
        let pair = integrate_coupled(&m, &g, &StepConfig::new(0.5, 1e-2, 4)).unwrap();
        let r = coupling_delta(&pair).unwrap();
        assert_eq!(r.per_time_delta[0], 0.0);
        assert!(r.per_time_delta.windows(2).all(|w| w[0] <= w[1]));
        assert!(r.delta_t_capped <= r.delta_t);
        for (w, d) in r.w1_marginals.iter().zip(&r.per_time_delta) {
            assert!(*w <= d + 1e-12);
        }
        let a = EmpiricalMeasure::from_ensemble(&pair.sparse_ensemble());
        let b = EmpiricalMeasure::from_ensemble(&pair.dense_ensemble());
        assert!(dbl_lower_bound(&a, &b, 300, 1).unwrap() <= r.delta_t_capped);
    }

    #[test]
    fn marginal_selection() {
        let a = traj(3, 10, |k, i| i as f64 + 0.5 * k as f64);
        let media = Media::from_scalars(vec![0.0, 1.0, 2.0]).unwrap();
        let m = EmpiricalMeasure::new(a, media, 0.1).unwrap();
        assert_eq!(marginal(&m, 0.0).unwrap().positions, vec![0.0, 1.0, 2.0]);
        assert_eq!(marginal(&m, 0.3).unwrap().positions, vec![1.5, 2.5, 3.5]);
        assert!(matches!(marginal(&m, 0.25), Err(Error::OffGrid { .. })));
        assert!(marginal(&m, 1.1).is_err());
    }

    #[test]
    fn gronwall_examples() {
        let v = gronwall_closed_form(1.0, 1.0, 0.0, 1.0, 0.1, 1.0);
        assert!((v - 0.4 * 1f64.exp().powi(2)).abs() < 1e-12);
        assert!((v - 2.9556).abs() < 1e-4);
        let m = kuramoto(1.0).unwrap();
        assert_eq!(gronwall_wasserstein_bound(&m, 0.0, 10, 1.0).unwrap(), 0.0);
        for t in [0.1, 0.5, 1.0, 2.0] {
            let a = gronwall_wasserstein_bound(&m, 1.0, 10, t).unwrap();
            let b = gronwall_wasserstein_bound(&m, 1.0, 10, 2.0 * t).unwrap();
            assert!(b > 2.0 * a);
        }
    }
}
