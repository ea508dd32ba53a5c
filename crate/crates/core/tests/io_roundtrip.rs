use std::path::{Path, PathBuf};

use heleshaw_core::io::output::{
    self, read_diagnostics, read_msweep_report, read_profile, read_series, read_snapshots,
    write_snapshots,
};
use heleshaw_core::io::{read_config, run_experiment, Command, ExperimentSpec};
use heleshaw_core::mesh::{Field, Mesh};
use heleshaw_core::solver::{BoundsLog, SimState, SnapshotSeries};
use heleshaw_core::Error;
use proptest::prelude::*;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn execute(command: Command, config: PathBuf, out: &Path) {
    let spec = ExperimentSpec {
        command,
        config,
        out_dir: out.to_path_buf(),
        jobs: 2,
        check: false,
    };
    run_experiment(&spec).unwrap();
}

fn series_of(snapshots: Vec<SimState>) -> SnapshotSeries {
    SnapshotSeries {
        snapshots,
        dt_history: Vec::new(),
        bounds: BoundsLog::default(),
        diagnostics: Vec::new(),
        warnings: Vec::new(),
    }
}

fn arb_value() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
        0.0f64..1.0,
        1e-300f64..1e300,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn snapshots_round_trip_exactly(
        rho in prop::collection::vec(arb_value(), 24),
        p in prop::collection::vec(arb_value(), 24),
        c in prop::option::of(prop::collection::vec(arb_value(), 24)),
        t in 0.0f64..100.0,
    ) {
        let dir = tempfile::tempdir().unwrap();
        let mesh = Mesh::radial(2, 1.7, 24).unwrap();
        let state = SimState {
            t,
            rho: Field::new(mesh, rho).unwrap(),
            p: Field::new(mesh, p).unwrap(),
            c: c.map(|v| Field::new(mesh, v).unwrap()),
        };
        write_snapshots(&series_of(vec![state.clone(), SimState { t: t + 1.0, ..state.clone() }]), dir.path()).unwrap();
        let back = read_snapshots(&dir.path().join(output::SNAPSHOTS), &mesh).unwrap();
        prop_assert_eq!(back.len(), 2);
        prop_assert_eq!(&back[0], &state);
        prop_assert_eq!(back[1].t, t + 1.0);
    }
}

#[test]
fn simulate_outputs_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    execute(Command::Simulate, config_path("nutrient.toml"), dir.path());
    let sim = read_config(&config_path("nutrient.toml"))
        .unwrap()
        .sim
        .unwrap();
    let states = read_snapshots(&dir.path().join(output::SNAPSHOTS), &sim.mesh).unwrap();
    assert_eq!(states.len(), sim.snapshot_times.len());
    assert!(states.iter().all(|s| s.c.is_some()));
    let records = read_diagnostics(&dir.path().join(output::DIAGNOSTICS)).unwrap();
    assert_eq!(records.len(), states.len());
    assert!(records.iter().all(|r| r.nutrient_l1_margin.is_some()));
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join(output::RUN_JSON)).unwrap()).unwrap();
    assert_eq!(json["command"], "simulate");
}

#[test]
fn diagnose_reproduces_the_simulation_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    execute(
        Command::Simulate,
        config_path("mushy_jump.toml"),
        dir.path(),
    );
    let path = dir.path().join(output::DIAGNOSTICS);
    let original = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    execute(
        Command::Diagnose,
        config_path("mushy_jump.toml"),
        dir.path(),
    );
    assert_eq!(std::fs::read(&path).unwrap(), original);
}

#[test]
fn front_outputs_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    execute(
        Command::Spheroid,
        config_path("spheroid.toml"),
        &dir.path().join("ball"),
    );
    let ball = read_series(&dir.path().join("ball").join(output::SERIES)).unwrap();
    assert!(ball.windows(2).all(|w| w[1].t > w[0].t && w[1].r >= w[0].r));
    assert!(ball.iter().all(|s| s.q == 0.0));

    execute(
        Command::Twophase,
        config_path("twophase.toml"),
        &dir.path().join("mushy"),
    );
    let mushy = read_series(&dir.path().join("mushy").join(output::SERIES)).unwrap();
    assert!(mushy[0].q > 0.0);
    // samples are duplicated at an event time
    assert!(mushy.windows(2).any(|w| w[1].t == w[0].t));
}

#[test]
fn wave_profile_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("wave.toml");
    std::fs::write(
        &config,
        "[model]\nm = 40\nlaw = \"linear\"\na = 5.0\np_M = 1.0\n\n[wave]\ns_min = -4.0\nn = 400\n",
    )
    .unwrap();
    execute(Command::Travelingwave, config, dir.path());
    let profile = read_profile(&dir.path().join(output::PROFILE)).unwrap();
    assert_eq!(profile.len(), 401);
    let ends = [profile[0].0, profile.last().unwrap().0];
    assert!(ends.contains(&0.0) && ends.contains(&-4.0), "{ends:?}");
    assert!(profile.iter().all(|&(_, p)| (0.0..=1.0).contains(&p)));
}

#[test]
fn msweep_outputs_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    execute(Command::Msweep, config_path("msweep.toml"), dir.path());
    let rows = read_msweep_report(&dir.path().join(output::MSWEEP_REPORT)).unwrap();
    let ms: Vec<f64> = rows.iter().map(|r| r.m).collect();
    assert_eq!(ms, [5.0, 10.0, 20.0, 40.0, 80.0]);
    assert!(rows.last().unwrap().l1_rho_vs_next.is_none());
    let sim = read_config(&config_path("msweep.toml"))
        .unwrap()
        .sim
        .unwrap();
    for m in ms {
        let sub = dir.path().join(format!("m_{m}"));
        assert_eq!(
            read_snapshots(&sub.join(output::SNAPSHOTS), &sim.mesh)
                .unwrap()
                .len(),
            11
        );
        assert_eq!(
            read_diagnostics(&sub.join(output::DIAGNOSTICS))
                .unwrap()
                .len(),
            11
        );
    }
    let reference = read_snapshots(
        &dir.path().join("reference").join(output::SNAPSHOTS),
        &sim.mesh,
    )
    .unwrap();
    assert_eq!(reference.len(), 11);
}

#[test]
fn snapshots_on_the_wrong_mesh_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = Mesh::cartesian(1.0, 16).unwrap();
    let state = SimState {
        t: 0.0,
        rho: Field::zeros(mesh),
        p: Field::zeros(mesh),
        c: None,
    };
    write_snapshots(&series_of(vec![state]), dir.path()).unwrap();
    let path = dir.path().join(output::SNAPSHOTS);
    assert!(matches!(
        read_snapshots(&path, &Mesh::cartesian(2.0, 16).unwrap()),
        Err(Error::Format { .. })
    ));
    assert!(matches!(
        read_snapshots(&path, &Mesh::cartesian(1.0, 12).unwrap()),
        Err(Error::Format { .. })
    ));
}

#[test]
fn missing_config_is_an_io_error() {
    let err = read_config(Path::new("/nonexistent/config.toml")).unwrap_err();
    assert!(!err.is_numerical());
}
