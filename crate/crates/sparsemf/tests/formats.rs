use sparsemf::config::ExperimentConfig;
use sparsemf::format::{
    read_density, read_graph, read_table, read_trajectories, write_density, write_graph,
    write_trajectories, write_trajectory_csv, GraphRecord,
};
use sparsemf_core::dynamics::{integrate_coupled, StepConfig};
use sparsemf_core::graph::sample_w_graph;
use sparsemf_core::mckv::{solve_mckv, McKvOptions};
use sparsemf_core::model::kuramoto;

#[test]
fn trajectories_round_trip() {
    let model = kuramoto(1.0).unwrap();
    let media = model.sample_media(12, 4);
    let g = sample_w_graph(12, 0.5, model.kernel(), media, 4).unwrap();
    let pair = integrate_coupled(&model, &g, &StepConfig::new(0.1, 0.01, 4)).unwrap();
    let mut buf = Vec::new();
    write_trajectories(&mut buf, &pair).unwrap();
    let back = read_trajectories(buf.as_slice()).unwrap();
    assert_eq!(back.systems, vec![pair.theta_sparse.clone(), pair.theta_dense.clone()]);
    assert_eq!(back.xi, pair.xi);
    assert_eq!(back.media, pair.media);
    assert_eq!((back.dt, back.seed), (pair.dt, pair.seed));
    assert_eq!(back.graph_id, pair.graph_id);

    let mut csv = Vec::new();
    write_trajectory_csv(&mut csv, &pair, 5, 3).unwrap();
    let (header, rows) = read_table(csv.as_slice()).unwrap();
    assert_eq!(header, ["t", "particle", "sparse", "dense"]);
    // steps 0, 5, 10 for 3 particles
    assert_eq!(rows.len(), 9);
}

#[test]
fn graphs_round_trip_in_both_encodings() {
    let model = kuramoto(1.0).unwrap();
    let media = model.sample_media(40, 9);
    let g = sample_w_graph(40, 0.3, model.kernel(), media, 9).unwrap();

    let mut bin = Vec::new();
    write_graph(&mut bin, &g).unwrap();
    let record = read_graph(bin.as_slice()).unwrap();
    assert_eq!(record, GraphRecord::from_sample(&g));

    let json = serde_json::to_string(&record).unwrap();
    let parsed: GraphRecord = serde_json::from_str(&json).unwrap();
    let rebuilt = parsed.into_sample(model.kernel()).unwrap();
    assert_eq!(rebuilt.edges(), g.edges());
    assert_eq!(rebuilt.d_matrix(), g.d_matrix());
}

#[test]
fn densities_round_trip() {
    let model = kuramoto(0.5).unwrap();
    let flow = solve_mckv(&model, &McKvOptions::new(2, 32, 0.1, 1e-3).checkpoints(2)).unwrap();
    let mut buf = Vec::new();
    write_density(&mut buf, &flow).unwrap();
    let back = read_density(buf.as_slice()).unwrap();
    assert_eq!(back.grid, flow.grid);
    assert_eq!(back.times, flow.times);
    assert_eq!(back.q, flow.q);
    assert_eq!(back.atoms, flow.atoms);
}

#[test]
fn shipped_configs_round_trip() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let a = ExperimentConfig::load(&path).unwrap();
        let text = a.to_toml();
        let b = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(a, b, "{}", path.display());
        assert_eq!(text, b.to_toml());
        seen += 1;
    }
    assert!(seen >= 5);
}
