use std::fs;

use normdyn::abm::{self, ShockSchedule, SimConfig, Topology};
use normdyn::config::GameConfig;
use normdyn::dynamics::{self, DynamicsParams};
use normdyn::equilibria;
use normdyn::game::GameSpec;
use normdyn::harness::{self, BaseConfig, Experiment, OdeConfig};

#[test]
fn raw_config_through_analysis_and_dynamics() {
    let cfg = GameConfig::parse("a_c = 1.0\nb_c = 1.15\na_f = 0.6\nb_f = 0.75\nc = 0.75\n").unwrap();
    let g = cfg.resolve().unwrap();
    let report = equilibria::analyze(&g).unwrap();
    let q = report.mixed.as_ref().unwrap().q.q();

    // Starting on either side of the mixed equilibrium decides the outcome.
    let p = DynamicsParams::replicator(0.01, 400.0);
    let above = dynamics::integrate(&g, q + 0.01, &p).unwrap().final_state();
    let below = dynamics::integrate(&g, q - 0.01, &p).unwrap().final_state();
    assert!(above.x_a() > 0.999);
    assert!(below.x_a() < 0.001);

    let spec = cfg.spec().unwrap();
    assert_eq!(spec, GameSpec::new(1.0, 1.15, 0.6, 0.75, 0.75).unwrap());
}

#[test]
fn ode_sweep_matches_direct_integration() {
    let dir = tempfile::tempdir().unwrap();
    let g = GameConfig::parse("a = 0.4\nb = 0.6\nc = 0.05").unwrap().resolve().unwrap();
    let params = DynamicsParams::mutator(0.0, 0.05, 20.0);
    let e = Experiment::new(
        "rm",
        BaseConfig::Ode(OdeConfig {
            game: g,
            x0: 0.95,
            params,
        }),
    )
    .sweeping("mu", &[0.0, 0.2])
    .with_output_dir(dir.path());
    let results = harness::run_experiment(&e).unwrap();
    assert_eq!(results.len(), 2);

    let direct = dynamics::integrate(&g, 0.95, &DynamicsParams::mutator(0.2, 0.05, 20.0)).unwrap();
    let mut expected = Vec::new();
    direct.write_csv(&mut expected).unwrap();
    let written = fs::read(dir.path().join("rm/mu=0.2/mean.csv")).unwrap();
    assert_eq!(written, expected);
}

#[test]
fn kept_replicates_match_single_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SimConfig::new(
        GameConfig::parse("a = 1.0\nb = 1.15\nc = 0.5").unwrap().resolve().unwrap(),
        Topology::torus(10, 10),
        50,
    );
    cfg.shocks = ShockSchedule::At(vec![25]);
    cfg.replicates = 3;
    cfg.base_seed = 99;
    let mut e = Experiment::new("keep", BaseConfig::Abm(cfg.clone())).with_output_dir(dir.path());
    e.keep_replicates = true;
    harness::run_experiment(&e).unwrap();

    for k in 0..3u64 {
        let mut expected = Vec::new();
        abm::write_records_csv(&cfg, &abm::run_replicate(&cfg, k).unwrap(), &mut expected).unwrap();
        let written = fs::read(dir.path().join(format!("keep/base/rep_{k}.csv"))).unwrap();
        assert_eq!(written, expected, "replicate {k}");
    }
}

#[test]
fn changing_seed_changes_results() {
    let mut cfg = SimConfig::new(
        GameConfig::parse("a = 1.0\nb = 1.15\nc = 0.5").unwrap().resolve().unwrap(),
        Topology::torus(10, 10),
        30,
    );
    cfg.base_seed = 1;
    let a = abm::run_replicate(&cfg, 0).unwrap();
    cfg.base_seed = 2;
    let b = abm::run_replicate(&cfg, 0).unwrap();
    assert_ne!(a, b);
}
