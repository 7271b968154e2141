//! End-to-end use of the public API: sample, integrate, measure, solve.

use sparsemf_core::dynamics::{integrate_coupled, integrate_single, DenseEvaluation, StepConfig, Weights};
use sparsemf_core::graph::{
    norm_inf_to_one_exact, norm_inf_to_one_lower, norm_inf_to_one_upper, sample_w_graph,
};
use sparsemf_core::measures::{
    coupling_delta, dbl_lower_bound, gronwall_wasserstein_bound, EmpiricalMeasure,
};
use sparsemf_core::mckv::{compare_to_empirical, solve_mckv, McKvOptions};
use sparsemf_core::model::{kuramoto, kuramoto_with, spatial_kuramoto, InitialLaw, MediaLaw};

#[test]
fn coupled_run_respects_its_bounds() {
    let model = kuramoto_with(1.0, MediaLaw::uniform_interval(-0.5, 0.5)).unwrap();
    let n = 16;
    for seed in 0..5 {
        let media = model.sample_media(n, seed);
        let g = sample_w_graph(n, 0.25, model.kernel(), media, seed).unwrap();
        let cfg = StepConfig::new(0.5, 1e-3, seed).dense_evaluation(DenseEvaluation::Factorized);
        let pair = integrate_coupled(&model, &g, &cfg).unwrap();
        let report = coupling_delta(&pair).unwrap();
        assert!(report.delta_t_capped <= report.delta_t);

        let sparse = EmpiricalMeasure::new(pair.theta_sparse.clone(), pair.media.clone(), pair.dt).unwrap();
        let dense = EmpiricalMeasure::new(pair.theta_dense.clone(), pair.media.clone(), pair.dt).unwrap();
        let lower = dbl_lower_bound(&sparse, &dense, 64, seed).unwrap();
        assert!(lower <= report.delta_t_capped + 1e-12);

        let d = g.d_matrix();
        let exact = norm_inf_to_one_exact(&d).unwrap().value;
        assert!(norm_inf_to_one_lower(&d, 8, seed).unwrap().value <= exact + 1e-12);
        assert!(exact <= norm_inf_to_one_upper(&d).value + 1e-12);
        let bound = gronwall_wasserstein_bound(&model, exact, n, 0.5).unwrap();
        assert!(report.delta_t <= bound + 10.0 * 1e-3f64.sqrt() * 0.5);
    }
}

#[test]
fn dense_run_tracks_the_limit_density() {
    let model = kuramoto_with(0.5, MediaLaw::Point(vec![0.0]))
        .unwrap()
        .with_initial(InitialLaw::CosinePerturbed { amplitude: 0.5 })
        .unwrap();
    let n = 1000;
    let media = model.sample_media(n, 3);
    let cfg = StepConfig::new(0.5, 1e-3, 3).dense_evaluation(DenseEvaluation::Factorized);
    let run = integrate_single(&model, Weights::MeanField(&media), &cfg).unwrap();
    let emp = EmpiricalMeasure::from_ensemble(&run);
    let dx = 2.0 * std::f64::consts::PI / 256.0;
    let flow = solve_mckv(&model, &McKvOptions::new(1, 256, 0.5, 0.4 * dx * dx).checkpoints(1)).unwrap();
    assert!(flow.max_mass_error() < 1e-10);
    let cmp = compare_to_empirical(&flow, &emp, 0.5).unwrap();
    assert!(cmp.w1 < 0.1, "{}", cmp.w1);
}

#[test]
fn builtin_models_run_on_sparse_graphs() {
    for model in [kuramoto(2.0).unwrap(), spatial_kuramoto(1.0, 1.0, 2.0).unwrap()] {
        let media = model.sample_media(64, 1);
        let g = sample_w_graph(64, 0.2, model.kernel(), media, 1).unwrap();
        let run = integrate_single(&model, Weights::Sparse(&g), &StepConfig::new(0.2, 1e-2, 1)).unwrap();
        assert_eq!(run.theta.n(), 64);
        assert!(run.theta.as_slice().iter().all(|v| v.is_finite()));
    }
}
