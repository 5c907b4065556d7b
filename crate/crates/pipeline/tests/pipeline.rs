use std::path::{Path, PathBuf};
use std::process::Command;

use vitalrates_core::domain::{AgeGrid, Sex};
use vitalrates_core::life_table::e0_from_rates;
use vitalrates_pipeline::io::{load_mortality, load_trajectories};
use vitalrates_pipeline::output::QuantileTable;
use vitalrates_pipeline::run::{global_pattern, project_country};
use vitalrates_pipeline::sample::{generate, write_sample, SampleOptions, DEFAULT_SEED};
use vitalrates_pipeline::{run_pipeline, PipelineError, RunConfig};

fn sample(dir: &Path, trajectories: usize) -> RunConfig {
    let conf = write_sample(dir, SampleOptions { seed: DEFAULT_SEED, trajectories }).unwrap();
    RunConfig::from_file(&conf).unwrap()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn negative_rate_reports_file_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mx.csv");
    std::fs::write(
        &path,
        "country,sex,period,age_start,age_width,mx\nA,F,2005-2010,0,1,0.01\nA,F,2005-2010,1,4,-0.001\n",
    )
    .unwrap();
    let err = load_mortality(&path).unwrap_err();
    assert!(matches!(&err, PipelineError::Row { line: 3, column, .. } if column == "mx"), "{err}");
    let text = err.to_string();
    assert!(text.contains("mx.csv") && text.contains("line 3") && text.contains("column mx"), "{text}");
}

#[test]
fn trajectory_gap_is_a_contiguity_error() {
    let dir = tempfile::tempdir().unwrap();
    let e0 = dir.path().join("e0.csv");
    let tfr = dir.path().join("tfr.csv");
    std::fs::write(&e0, "country,trajectory,period,e0_f,e0_m\nA,1,2010-2015,80,75\nA,1,2020-2025,81,76\n").unwrap();
    std::fs::write(&tfr, "country,trajectory,period,tfr\nA,1,2010-2015,1.8\nA,1,2020-2025,1.8\n").unwrap();
    let err = load_trajectories(&e0, &tfr).unwrap_err().to_string();
    assert!(err.contains("not contiguous"), "{err}");
}

#[test]
fn committed_sample_matches_generator() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sample");
    let data = generate(SampleOptions::default()).unwrap();
    for (name, text) in [
        ("mortality.csv", &data.mortality),
        ("e0.csv", &data.e0),
        ("tfr.csv", &data.tfr),
        ("pasfr.csv", &data.pasfr),
        ("run.conf", &data.config),
    ] {
        let committed = std::fs::read_to_string(root.join(name)).unwrap();
        assert!(committed == *text, "{name} differs from the generator output");
    }
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = sample(dir.path(), 40);
    cfg.emit_trajectories = true;
    let mut outputs = Vec::new();
    for workers in [1, 3, 8] {
        cfg.workers = workers;
        cfg.out = dir.path().join(format!("out{workers}"));
        let report = run_pipeline(&cfg).unwrap();
        assert!(report.success());
        outputs.push(read_dir_sorted(&cfg.out));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    assert!(outputs[0].iter().any(|(n, _)| n == "trajectory_mx.csv"));
}

#[test]
fn quantile_files_read_back_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = sample(dir.path(), 30);
    cfg.out = dir.path().join("out");
    run_pipeline(&cfg).unwrap();
    for name in ["quantiles_mx.csv", "quantiles_e0.csv", "quantiles_asfr.csv", "quantiles_pasfr.csv", "quantiles_mac.csv"] {
        let t = QuantileTable::read(&cfg.out.join(name)).unwrap();
        assert_eq!(t.levels, cfg.quantiles, "{name}");
        assert!(t.is_monotone() && !t.rows.is_empty(), "{name}");
    }
    // 2 sexes x 18 periods x 28 ages
    assert_eq!(QuantileTable::read(&cfg.out.join("quantiles_mx.csv")).unwrap().rows.len(), 2 * 18 * 28);
}

#[test]
fn emitted_female_rates_reproduce_input_e0() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sample(dir.path(), 10);
    let inputs = vitalrates_pipeline::io::load_inputs(&cfg).unwrap();
    let global = global_pattern(&cfg, &inputs).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
    let c = project_country("SYN", &inputs, &cfg, global, &pool).unwrap();
    let bundle = &inputs.trajectories["SYN"];
    let grid = AgeGrid::canonical();
    for (t, traj) in c.mortality.iter().zip(bundle.e0()) {
        for (i, target) in traj.female.iter().enumerate() {
            let e0 = e0_from_rates(&grid, &t.projection.female[i], Sex::Female);
            assert!((e0 - target).abs() <= 0.01, "{e0} vs {target}");
            assert_eq!(e0, t.e0_female[i]);
        }
    }
}

#[test]
fn global_pattern_from_selected_countries() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = sample(dir.path(), 2);
    cfg.global_pattern_countries = vec!["G1".into()];
    let inputs = vitalrates_pipeline::io::load_inputs(&cfg).unwrap();
    let g1 = inputs.pasfr["G1"][0].1;
    let global = global_pattern(&cfg, &inputs).unwrap();
    for (a, b) in global.proportions().iter().zip(g1.proportions()) {
        assert!((a - b).abs() < 1e-15);
    }
    cfg.global_pattern_countries = vec!["NOPE".into()];
    assert!(global_pattern(&cfg, &inputs).is_err());
}

#[test]
fn country_failure_is_isolated() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = sample(dir.path(), 5);
    cfg.countries = vec!["SYN".into(), "G1".into()];
    cfg.out = dir.path().join("out");
    let report = run_pipeline(&cfg).unwrap();
    assert_eq!(report.completed, vec!["SYN".to_string()]);
    assert_eq!(report.failed.len(), 1);
    assert!(report.failed[0].1.contains("G1"), "{:?}", report.failed);
    let manifest = std::fs::read_to_string(cfg.out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"countries.failed\": \"G1\""), "{manifest}");
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_vitalrates");
    let status = Command::new(bin)
        .args(["sample-data", "--trajectories", "5", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let conf = dir.path().join("run.conf");
    let run = |extra: &[&str]| {
        Command::new(bin)
            .arg("run")
            .env("VITALRATES_CONFIG", &conf)
            .args(extra)
            .env("RUST_LOG", "error")
            .status()
            .unwrap()
            .code()
    };
    assert_eq!(run(&["--workers", "2", "--quantiles", "0.1,0.5,0.9"]), Some(0));
    assert_eq!(run(&["--countries", "SYN,G2"]), Some(1));
    assert_eq!(run(&["--workers", "0"]), Some(2));

    let out = Command::new(bin)
        .args(["life-table", "--country", "SYN", "--sex", "F", "--period", "2005-2010", "--extend", "--mortality"])
        .arg(dir.path().join("mortality.csv"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 28);
    assert!(text.lines().last().unwrap().starts_with("130,"));
}
