//! Euler–Maruyama integration of the sparse and dense systems on shared
//! initial conditions and shared Brownian increments.

mod drift;

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

pub use drift::{drift_dense, drift_sparse, DenseEvaluation};
use drift::{dense_interaction, sparse_interaction, FourierSums, PairFeatures};

use crate::graph::GraphSample;
use crate::math;
use crate::model::{InteractionModel, Media, PairFn};
use crate::rng::NoiseStreams;
use crate::{Error, Result};

/// Positions on the time grid, stored time-major: `at(k)` is the state after `k` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectories {
    n: usize,
    steps: usize,
    data: Vec<f64>,
}

impl Trajectories {
    pub fn from_time_major(n: usize, steps: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * (steps + 1) {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {n} particles over {} grid times",
                data.len(),
                steps + 1
            )));
        }
        Ok(Self { n, steps, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn at(&self, k: usize) -> &[f64] {
        &self.data[k * self.n..(k + 1) * self.n]
    }

    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.data[k * self.n + i]
    }

    pub fn path(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |k| self.get(k, i))
    }

    pub fn final_state(&self) -> &[f64] {
        self.at(self.steps)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `sup_s |θ_i(s)|` on the grid.
    pub fn sup_abs(&self, i: usize) -> f64 {
        self.path(i).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Step and noise settings shared by every integration call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub horizon: f64,
    pub dt: f64,
    pub seed: u64,
    pub noise_scale: f64,
    /// Each increment aggregates `2^refinement` fine normals.
    pub refinement: u32,
    pub dense_evaluation: DenseEvaluation,
}

impl StepConfig {
    pub fn new(horizon: f64, dt: f64, seed: u64) -> Self {
        Self {
            horizon,
            dt,
            seed,
            noise_scale: 1.0,
            refinement: 0,
            dense_evaluation: DenseEvaluation::Pairwise,
        }
    }

    pub fn noise_scale(mut self, s: f64) -> Self {
        self.noise_scale = s;
        self
    }

    pub fn refinement(mut self, level: u32) -> Self {
        self.refinement = level;
        self
    }

    pub fn dense_evaluation(mut self, e: DenseEvaluation) -> Self {
        self.dense_evaluation = e;
        self
    }

    /// Number of steps, requiring `horizon/dt` to be integral within rounding.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() || !(self.horizon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need dt > 0 and T >= 0, got dt = {}, T = {}",
                self.dt, self.horizon
            )));
        }
        if !(self.noise_scale >= 0.0) {
            return Err(Error::InvalidArgument("noise_scale must be nonnegative".into()));
        }
        let ratio = self.horizon / self.dt;
        let steps = math::round(ratio);
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "T / dt = {ratio} is not an integer"
            )));
        }
        Ok(steps as usize)
    }
}

/// The interaction weights of one system.
#[derive(Debug, Clone, Copy)]
pub enum Weights<'a> {
    /// `P = A/(pn)` of a sampled graph.
    Sparse(&'a GraphSample),
    /// `P̄ = W(ω_i, ω_j)/n`.
    MeanField(&'a Media),
    /// No interaction: `ψ` and noise only.
    Zero(&'a Media),
}

impl<'a> Weights<'a> {
    pub fn media(&self) -> &'a Media {
        match self {
            Weights::Sparse(g) => g.media(),
            Weights::MeanField(m) | Weights::Zero(m) => m,
        }
    }
}

/// One system's trajectories with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub theta: Trajectories,
    pub media: Media,
    pub xi: Vec<f64>,
    pub dt: f64,
    pub seed: u64,
    pub model_id: String,
}

impl Ensemble {
    pub fn horizon(&self) -> f64 {
        self.dt * self.theta.steps() as f64
    }
}

/// Sparse and dense trajectories driven by the same `ξ` and increments.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPair {
    pub theta_sparse: Trajectories,
    pub theta_dense: Trajectories,
    pub media: Media,
    pub xi: Vec<f64>,
    pub dt: f64,
    pub seed: u64,
    pub model_id: String,
    pub graph_id: String,
}

impl TrajectoryPair {
    pub fn n(&self) -> usize {
        self.xi.len()
    }

    pub fn steps(&self) -> usize {
        self.theta_sparse.steps()
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    pub fn sparse_ensemble(&self) -> Ensemble {
        self.ensemble(self.theta_sparse.clone())
    }

    pub fn dense_ensemble(&self) -> Ensemble {
        self.ensemble(self.theta_dense.clone())
    }

    fn ensemble(&self, theta: Trajectories) -> Ensemble {
        Ensemble {
            theta,
            media: self.media.clone(),
            xi: self.xi.clone(),
            dt: self.dt,
            seed: self.seed,
            model_id: self.model_id.clone(),
        }
    }
}

pub fn graph_id(sample: &GraphSample) -> String {
    format!(
        "{}:n={}:p={}:seed={}",
        sample.kernel_id(),
        sample.n(),
        sample.p(),
        sample.seed()
    )
}

/// One system being advanced.
struct System<'a> {
    model: &'a InteractionModel,
    phi: &'a PairFn,
    weights: Weights<'a>,
    evaluation: DenseEvaluation,
    state: Vec<f64>,
    drift: Vec<f64>,
    record: Vec<f64>,
}

impl<'a> System<'a> {
    fn new(
        model: &'a InteractionModel,
        phi: &'a PairFn,
        weights: Weights<'a>,
        evaluation: DenseEvaluation,
        xi: &[f64],
        steps: usize,
    ) -> Self {
        let mut record = Vec::with_capacity(xi.len() * (steps + 1));
        record.extend_from_slice(xi);
        Self {
            model,
            phi,
            weights,
            evaluation,
            state: xi.to_vec(),
            drift: vec![0.0; xi.len()],
            record,
        }
    }

    fn compute_drift(&mut self) {
        let model = self.model;
        let phi = self.phi.as_ref();
        let state = &self.state;
        let media = self.weights.media();
        let sums = match (self.weights, self.evaluation) {
            (Weights::MeanField(_), DenseEvaluation::Factorized) => {
                FourierSums::new(model, media, state)
            }
            _ => None,
        };
        // pair terms through the atoms, only for the model's own `φ`
        let features = match self.weights {
            Weights::Zero(_) => None,
            _ if sums.is_some() || !Arc::ptr_eq(self.phi, model.phi_fn()) => None,
            _ => PairFeatures::new(model, media, state),
        };
        let one = |i: usize| -> f64 {
            let interaction = match (self.weights, &features) {
                (Weights::Sparse(g), Some(f)) => f.sparse(g, i),
                (Weights::Sparse(g), None) => sparse_interaction(phi, g, state, i),
                (Weights::MeanField(m), Some(f)) => f.dense(model, m, i),
                (Weights::MeanField(m), None) => match &sums {
                    Some(s) => s.interaction(model, state[i], m.get(i)),
                    None => dense_interaction(phi, model, m, state, i),
                },
                (Weights::Zero(_), _) => 0.0,
            };
            interaction + model.psi(state[i], media.get(i))
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            self.drift
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, d)| *d = one(i));
        }
        #[cfg(not(feature = "parallel"))]
        for (i, d) in self.drift.iter_mut().enumerate() {
            *d = one(i);
        }
    }

    fn advance(&mut self, dt: f64, noise: &[f64], step: usize) -> Result<()> {
        self.compute_drift();
        for (i, x) in self.state.iter_mut().enumerate() {
            *x += self.drift[i] * dt + noise[i];
            if !x.is_finite() {
                return Err(Error::NonFiniteState { step, particle: i });
            }
        }
        self.record.extend_from_slice(&self.state);
        Ok(())
    }
}

fn check_sizes(n: usize, xi: &[f64], weights: &Weights<'_>, model: &InteractionModel) -> Result<()> {
    if xi.len() != n || weights.media().len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} initial values and {} media vectors for n = {n}",
            xi.len(),
            weights.media().len()
        )));
    }
    if weights.media().dim() != model.media_dim() {
        return Err(Error::ShapeMismatch("media dimension differs from the model".into()));
    }
    if let Some(k) = xi.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput(k));
    }
    Ok(())
}

/// Advances several systems in lockstep on one increment stream.
fn run_lockstep(systems: &mut [System<'_>], n: usize, config: &StepConfig) -> Result<usize> {
    let steps = config.steps()?;
    let mut noise = NoiseStreams::new(config.seed, n, config.refinement);
    let mut z = vec![0.0; n];
    let scale = config.noise_scale * math::sqrt(config.dt);
    for step in 1..=steps {
        noise.next_step(&mut z);
        for v in z.iter_mut() {
            *v *= scale;
        }
        for s in systems.iter_mut() {
            s.advance(config.dt, &z, step)?;
        }
    }
    Ok(steps)
}

/// Integrates the sparse system on `sample` and the dense system on the same
/// media, from `ξ ~ λ` drawn with `config.seed`, on shared increments.
pub fn integrate_coupled(
    model: &InteractionModel,
    sample: &GraphSample,
    config: &StepConfig,
) -> Result<TrajectoryPair> {
    let xi = model.sample_initial(sample.n(), config.seed);
    integrate_coupled_from(model, sample, &xi, config)
}

/// As [`integrate_coupled`] with given initial conditions.
pub fn integrate_coupled_from(
    model: &InteractionModel,
    sample: &GraphSample,
    xi: &[f64],
    config: &StepConfig,
) -> Result<TrajectoryPair> {
    let n = sample.n();
    let sparse_w = Weights::Sparse(sample);
    let dense_w = Weights::MeanField(sample.media());
    check_sizes(n, xi, &sparse_w, model)?;
    let steps = config.steps()?;
    let phi = model.phi_fn();
    let mut systems = [
        System::new(model, phi, sparse_w, config.dense_evaluation, xi, steps),
        System::new(model, phi, dense_w, config.dense_evaluation, xi, steps),
    ];
    run_lockstep(&mut systems, n, config)?;
    let [sparse, dense] = systems;
    Ok(TrajectoryPair {
        theta_sparse: Trajectories::from_time_major(n, steps, sparse.record)?,
        theta_dense: Trajectories::from_time_major(n, steps, dense.record)?,
        media: sample.media().clone(),
        xi: xi.to_vec(),
        dt: config.dt,
        seed: config.seed,
        model_id: model.id().into(),
        graph_id: graph_id(sample),
    })
}

/// Integrates one system; with `Weights::MeanField` and the same seed this
/// reproduces the dense half of [`integrate_coupled`].
pub fn integrate_single(
    model: &InteractionModel,
    weights: Weights<'_>,
    config: &StepConfig,
) -> Result<Ensemble> {
    let xi = model.sample_initial(weights.media().len(), config.seed);
    integrate_single_with(model, model.phi_fn(), weights, &xi, config)
}

/// Integrates one system with `φ` replaced by `phi` and given `ξ`.
pub fn integrate_single_with(
    model: &InteractionModel,
    phi: &PairFn,
    weights: Weights<'_>,
    xi: &[f64],
    config: &StepConfig,
) -> Result<Ensemble> {
    let n = weights.media().len();
    check_sizes(n, xi, &weights, model)?;
    let steps = config.steps()?;
    let mut systems = [System::new(model, phi, weights, config.dense_evaluation, xi, steps)];
    run_lockstep(&mut systems, n, config)?;
    let [system] = systems;
    Ok(Ensemble {
        theta: Trajectories::from_time_major(n, steps, system.record)?,
        media: weights.media().clone(),
        xi: xi.to_vec(),
        dt: config.dt,
        seed: config.seed,
        model_id: model.id().into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_w_graph;
    use crate::model::{kuramoto, Kernel};

    fn setup(n: usize, p: f64, seed: u64) -> (InteractionModel, GraphSample) {
        let m = kuramoto(1.0).unwrap();
        let media = m.sample_media(n, seed);
        let g = sample_w_graph(n, p, &Kernel::constant(1.0), media, seed).unwrap();
        (m, g)
    }

    #[test]
    fn complete_graph_couples_exactly() {
        let (m, g) = setup(40, 1.0, 3);
        let pair = integrate_coupled(&m, &g, &StepConfig::new(0.2, 1e-3, 3)).unwrap();
        assert_eq!(pair.theta_sparse, pair.theta_dense);
        assert_eq!(pair.theta_sparse.at(0), &pair.xi[..]);
    }

    #[test]
    fn drift_only_is_linear() {
        let m = kuramoto(0.0).unwrap();
        let media = m.sample_media(10, 1);
        let g = sample_w_graph(10, 0.5, &Kernel::constant(1.0), media, 1).unwrap();
        let config = StepConfig::new(1.0, 1e-3, 1).noise_scale(0.0);
        let pair = integrate_coupled(&m, &g, &config).unwrap();
        for i in 0..10 {
            let w = g.media().get(i)[0];
            let end = pair.theta_sparse.final_state()[i];
            assert!((end - (pair.xi[i] + w)).abs() < 1e-12);
            assert_eq!(pair.theta_dense.final_state()[i], end);
        }
    }

    #[test]
    fn frozen_without_drift_or_noise() {
        let m = kuramoto(0.0).unwrap();
        let media = Media::from_scalars(vec![0.0; 5]).unwrap();
        let g = sample_w_graph(5, 0.5, &Kernel::constant(1.0), media, 1).unwrap();
        let pair = integrate_coupled(&m, &g, &StepConfig::new(0.1, 0.01, 9).noise_scale(0.0)).unwrap();
        for k in 0..=pair.steps() {
            assert_eq!(pair.theta_sparse.at(k), &pair.xi[..]);
            assert_eq!(pair.theta_dense.at(k), &pair.xi[..]);
        }
    }

    #[test]
    fn single_dense_matches_coupled_half() {
        let (m, g) = setup(30, 0.3, 5);
        let config = StepConfig::new(0.1, 1e-3, 5);
        let pair = integrate_coupled(&m, &g, &config).unwrap();
        let dense = integrate_single(&m, Weights::MeanField(g.media()), &config).unwrap();
        assert_eq!(dense.theta, pair.theta_dense);
        let sparse = integrate_single(&m, Weights::Sparse(&g), &config).unwrap();
        assert_eq!(sparse.theta, pair.theta_sparse);
    }

    #[test]
    fn zero_weights_give_free_dynamics() {
        let m = kuramoto(3.0).unwrap();
        let media = Media::from_scalars(vec![0.5]).unwrap();
        let e = integrate_single(&m, Weights::Zero(&media), &StepConfig::new(1.0, 0.01, 2).noise_scale(0.0)).unwrap();
        assert!((e.theta.final_state()[0] - (e.xi[0] + 0.5)).abs() < 1e-12);
        let single = integrate_single(&m, Weights::MeanField(&media), &StepConfig::new(1.0, 0.01, 2).noise_scale(0.0)).unwrap();
        assert!((single.theta.final_state()[0] - (single.xi[0] + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn factorized_tracks_pairwise() {
        let (m, g) = setup(64, 1.0, 8);
        let base = StepConfig::new(0.5, 1e-2, 8);
        let a = integrate_single(&m, Weights::MeanField(g.media()), &base).unwrap();
        let b = integrate_single(
            &m,
            Weights::MeanField(g.media()),
            &base.dense_evaluation(DenseEvaluation::Factorized),
        )
        .unwrap();
        let worst = a
            .theta
            .as_slice()
            .iter()
            .zip(b.theta.as_slice())
            .fold(0.0f64, |w, (x, y)| w.max((x - y).abs()));
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn rejects_fractional_step_count() {
        let (m, g) = setup(4, 1.0, 1);
        assert!(integrate_coupled(&m, &g, &StepConfig::new(1.0, 0.3, 1)).is_err());
        assert!(integrate_coupled(&m, &g, &StepConfig::new(1.0, 0.0, 1)).is_err());
    }

    #[test]
    fn reports_blow_up() {
        let psi: crate::model::SingleFn = alloc::sync::Arc::new(|x, _| 1e200 * x * x);
        let m = InteractionModel::builder(
            "explosive",
            crate::model::MediaLaw::Point(vec![0.0]),
            alloc::sync::Arc::new(|_, _, _, _| 0.0),
            psi,
            Kernel::constant(1.0),
            crate::model::ModelConstants {
                lip_phi: 0.0,
                lip_psi: 0.0,
                sup_phi: 0.0,
                sup_psi: 0.0,
                grad_phi: 0.0,
            },
        )
        .build()
        .unwrap();
        let media = Media::from_scalars(vec![0.0; 3]).unwrap();
        let err = integrate_single(&m, Weights::Zero(&media), &StepConfig::new(1.0, 0.1, 1));
        assert!(matches!(err, Err(Error::NonFiniteState { .. })));
    }
}
