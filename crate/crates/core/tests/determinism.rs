use specgap::harness::{run, Experiment, ExperimentConfig, GridCell, Model, THREADS_ENV};

fn csv_with_threads(cfg: &ExperimentConfig, threads: &str) -> Vec<u8> {
    std::env::set_var(THREADS_ENV, threads);
    let mut out = Vec::new();
    run(cfg).unwrap().write_csv(&mut out, false).unwrap();
    out
}

#[test]
fn records_do_not_depend_on_worker_count() {
    let grid = vec![
        GridCell { n: 40, d: 6, model: Model::Directed },
        GridCell { n: 30, d: 5, model: Model::Undirected },
    ];
    for experiment in [Experiment::Spectral, Experiment::Heavy, Experiment::Codegree] {
        let mut cfg = ExperimentConfig::new(experiment, grid.clone(), 9, 77);
        cfg.parameters.samples_per_chain = 2;
        cfg.parameters.c0 = vec![0.1];
        let one = csv_with_threads(&cfg, "1");
        let four = csv_with_threads(&cfg, "4");
        assert_eq!(one, four, "{experiment}");
        assert_eq!(String::from_utf8(one).unwrap().lines().count(), 1 + 18);
    }
}
