use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use colsync::SyncKind;
use colsync_cli::{execute, parse_config, to_toml, Mode, RunOptions};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn read_config(name: &str) -> String {
    fs::read_to_string(configs_dir().join(name)).unwrap()
}

const PAIR: &str = r#"
mode = "simulate"

[model]
[[model.atoms]]
omega = 1.0
theta = "pi/4"
[[model.atoms]]
omega = 1.0
theta = "pi/4"
phi = "-pi/3"
[model.couplings]
a = [[1.0, A12], [A12, 1.0]]
"#;

#[test]
fn every_shipped_config_round_trips() {
    let mut seen = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let cfg = parse_config(&fs::read_to_string(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        let again = parse_config(&to_toml(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
        assert_eq!(to_toml(&again).unwrap(), to_toml(&cfg).unwrap());
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn defaults_are_materialized() {
    let cfg = parse_config(&PAIR.replace("A12", "1.0")).unwrap();
    let text = to_toml(&cfg).unwrap();
    for key in ["window = 9.0", "overlap = 6.0", "final_time = 400.0", "method = \"adaptive\"", "g = 0.05"] {
        assert!(text.contains(key), "missing `{key}` in\n{text}");
    }
    let sweep = parse_config(&read_config("thermal_map.toml")).unwrap();
    assert!(to_toml(&sweep).unwrap().contains("method = \"spectral\""));
}

#[test]
fn missing_mode_is_rejected() {
    let text = PAIR.replace("A12", "1.0").replace("mode = \"simulate\"", "");
    let err = parse_config(&text).unwrap_err();
    assert!(format!("{err:#}").contains("mode"), "{err:#}");
}

#[test]
fn unknown_keys_are_rejected() {
    let text = PAIR.replace("A12", "1.0").replace("[model]", "[model]\ntemperature = 3.0");
    assert!(parse_config(&text).is_err());
    let text = format!("{}\n[analysis]\nwindow_length = 9.0\n", PAIR.replace("A12", "1.0"));
    assert!(parse_config(&text).is_err());
    let text = format!(
        "{}\n[sweep]\naxis1 = {{ path = \"atoms[1].mass\", values = [1.0] }}\n",
        PAIR.replace("A12", "1.0").replace("\"simulate\"", "\"sweep\"")
    );
    let err = parse_config(&text).unwrap_err();
    assert!(format!("{err:#}").contains("atoms[1].mass"), "{err:#}");
}

#[test]
fn semantic_errors_carry_the_model_message() {
    let err = parse_config(&PAIR.replace("A12", "1.2")).unwrap_err();
    let msg = format!("{err:#}");
    assert!(msg.contains("exceeds 1"), "{msg}");
}

#[test]
fn identical_pair_config_runs_and_anti_synchronizes() {
    let cfg = parse_config(&read_config("identical_pair.toml")).unwrap();
    assert_eq!(cfg.mode, Mode::Simulate);
    assert_eq!(cfg.analysis.final_time, 400.0);
    let dir = tempfile::tempdir().unwrap();
    let report = execute(
        &cfg,
        &RunOptions {
            out: Some(dir.path().to_path_buf()),
            seed: None,
        },
    )
    .unwrap();
    assert!(report.summary.contains(&SyncKind::AntiSynchronized.to_string()));
    for f in ["trajectory.csv", "pearson.csv", "manifest.toml", "trajectory.gp", "pearson.gp"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,re<sx_1>,re<sy_1>,re<sz_1>,re<sx_2>"));
    assert!(traj.lines().next().unwrap().ends_with("purity,coherence_l1"));
    let pearson = fs::read_to_string(dir.path().join("pearson.csv")).unwrap();
    assert_eq!(pearson.lines().count(), 1 + 131);
}

#[test]
fn collinear_geometry_config_is_a_valid_three_atom_run() {
    let cfg = parse_config(&read_config("collinear_geometry.toml")).unwrap();
    let model = cfg.three_atom_model().unwrap();
    let a = model.couplings().a();
    assert!((a[(0, 1)] - 0.8).abs() < 1e-12);
    assert!((a[(0, 2)] - 0.8).abs() < 1e-12);
    assert!(a[(1, 2)] < 0.4);
    assert!(model.couplings().f().iter().all(|&f| f == 0.0));
}

#[test]
fn manifest_reproduces_the_run() {
    let cfg = parse_config(&read_config("chain_three.toml")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    execute(
        &cfg,
        &RunOptions {
            out: Some(dir.path().to_path_buf()),
            seed: None,
        },
    )
    .unwrap();
    let manifest: toml::Table = fs::read_to_string(dir.path().join("manifest.toml"))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(manifest["tool"].as_str(), Some("colsync"));
    assert_eq!(manifest["version"].as_str(), Some(env!("CARGO_PKG_VERSION")));
    let echoed = toml::to_string(manifest["config"].as_table().unwrap()).unwrap();
    assert_eq!(parse_config(&echoed).unwrap(), cfg);
}

const SMALL_MAP: &str = r#"
mode = "coherence-map"

[model]
[[model.atoms]]
omega = 1.0
[[model.atoms]]
omega = 1.0
[model.couplings]
a = [[1.0, 1.0], [1.0, 1.0]]

[analysis]
final_time = 50.0

[sweep]
axis1 = { path = "atoms[2].omega", values = [1.0, 1.07] }
axis2 = { path = "couplings.f[1][2]", values = [0.0, 0.05] }

[ensemble]
samples = 64
seed = 5
"#;

fn run_into(cfg: &colsync_cli::RunConfig, seed: Option<u64>) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    execute(
        cfg,
        &RunOptions {
            out: Some(dir.path().to_path_buf()),
            seed,
        },
    )
    .unwrap();
    dir
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = parse_config(SMALL_MAP).unwrap();
    let (a, b) = (run_into(&cfg, None), run_into(&cfg, None));
    for f in ["coherence.csv", "coherence_std_error.csv", "coherence.gp", "manifest.toml"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let c = run_into(&cfg, Some(6));
    assert_ne!(
        fs::read(a.path().join("coherence.csv")).unwrap(),
        fs::read(c.path().join("coherence.csv")).unwrap()
    );
    let manifest = fs::read_to_string(c.path().join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 6"));
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_colsync"))
}

#[test]
fn coefficients_subcommand_prints_values() {
    let out = bin()
        .args(["coefficients", "--config"])
        .arg(configs_dir().join("coefficients.toml"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("a=-0.151982"), "{stdout}");
    assert!(stdout.contains("f/gamma0=0.214544"), "{stdout}");
}

#[test]
fn mode_mismatch_fails_with_diagnostic() {
    let out = bin()
        .args(["sweep", "--config"])
        .arg(configs_dir().join("identical_pair.toml"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("mode"), "{stderr}");
}

#[test]
fn simulate_subcommand_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["simulate", "--quiet", "--workers", "2", "--config"])
        .arg(configs_dir().join("detuned_pair.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    assert!(dir.path().join("verdicts.txt").exists());
}

#[test]
fn missing_file_fails_cleanly() {
    let out = bin()
        .args(["simulate", "--config", "/nonexistent/run.toml"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error:"));
}
