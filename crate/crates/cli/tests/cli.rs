use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_ris-decoy");

fn reference_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/reference.toml")
}

fn cli(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// The reference scene with sweeps shrunk so the whole run takes well under a second.
fn small_scenario(dir: &Path, extra_scene: &str) -> PathBuf {
    let text = format!(
        "name = \"small\"\n\
         [scene]\ntheta_true_deg = 20.0\n{extra_scene}\n\
         [sweeps]\n\
         beampattern_deg = {{ start = -90.0, stop = 90.0, step = 1.0 }}\n\
         estimator_deg = {{ start = -80.0, stop = 80.0, step = 0.5 }}\n\
         peb_x_m = {{ start = 0.0, stop = 100.0, count = 20 }}\n\
         peb_y_m = {{ start = -80.0, stop = 80.0, count = 20 }}\n\
         trials = 20\n\
         shortlist_size = 3\n"
    );
    let p = dir.join("small.toml");
    fs::write(&p, text).unwrap();
    p
}

fn read_table(path: &Path) -> (String, Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let comment = lines.next().unwrap().to_string();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (comment, header, rows)
}

#[test]
fn validate_reports_both_true_angles() {
    let o = cli(&["validate", reference_path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(
        out.starts_with("feasible; derived θ_true = 19.50°, pinned θ_true = 20.00° (pinned wins)"),
        "{out}"
    );
}

#[test]
fn validate_names_violated_conditions() {
    let dir = TempDir::new().unwrap();
    let few = small_scenario(dir.path(), "ris_elements = 16");
    let o = cli(&["validate", few.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("M ≥ 2K"), "{}", stderr(&o));

    let inside = small_scenario(dir.path(), "theta_fake_deg = 20.0");
    let o = cli(&["validate", inside.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("w ∉ span(V)"), "{}", stderr(&o));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let unknown = dir.path().join("unknown.toml");
    fs::write(&unknown, "[scene]\nwavelength = 1.0\n").unwrap();
    assert_eq!(code(&cli(&["validate", unknown.to_str().unwrap()])), 3);
    assert_eq!(code(&cli(&["run", unknown.to_str().unwrap()])), 3);

    let broken = dir.path().join("broken.toml");
    fs::write(&broken, "[scene\n").unwrap();
    assert_eq!(code(&cli(&["validate", broken.to_str().unwrap()])), 3);

    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&cli(&["validate", missing.to_str().unwrap()])), 1);

    assert_eq!(code(&cli(&["run"])), 2);
    assert_eq!(code(&cli(&["run", "x.toml", "--experiment", "beam"])), 2);
    assert_eq!(code(&cli(&["frobnicate"])), 2);

    let v = cli(&["--version"]);
    assert_eq!(code(&v), 0);
    assert!(String::from_utf8_lossy(&v.stdout).contains(env!("CARGO_PKG_VERSION")));
    let help = cli(&["--help"]);
    assert!(String::from_utf8_lossy(&help.stdout).contains("Exit codes"));
}

#[test]
fn infeasible_run_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let few = small_scenario(dir.path(), "ris_elements = 16");
    let out = dir.path().join("out");
    let o = cli(&["run", few.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(!out.exists());
}

#[test]
fn empty_experiment_list_writes_manifest_only() {
    let dir = TempDir::new().unwrap();
    let scen = small_scenario(dir.path(), "");
    let out = dir.path().join("out");
    let o = cli(&[
        "--quiet",
        "run",
        scen.to_str().unwrap(),
        "--experiment",
        "none",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stderr.is_empty());
    let names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec!["manifest.txt"]);
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("\nseed=0\n") && manifest.contains("config_hash="));
    assert!(manifest.contains("experiments=\n"));

    let via_file = dir.path().join("empty.toml");
    fs::write(&via_file, "[output]\nexperiments = []\n").unwrap();
    let out2 = dir.path().join("out2");
    let o = cli(&[
        "--quiet",
        "run",
        via_file.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_dir(&out2).unwrap().count(), 1);
}

#[test]
fn reruns_are_byte_identical_and_seed_sensitive() {
    let dir = TempDir::new().unwrap();
    let scen = small_scenario(dir.path(), "");
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = cli(&[
            "--quiet",
            "run",
            scen.to_str().unwrap(),
            "--experiment",
            "all",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        out
    };
    let a = run("a", "7");
    let b = run("b", "7");
    let c = run("c", "8");
    let mut names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 8, "{names:?}");
    for n in &names {
        assert_eq!(
            fs::read(a.join(n)).unwrap(),
            fs::read(b.join(n)).unwrap(),
            "{n} differs"
        );
    }
    assert_ne!(
        fs::read(a.join("trials.csv")).unwrap(),
        fs::read(c.join("trials.csv")).unwrap()
    );

    let manifest = fs::read_to_string(a.join("manifest.txt")).unwrap();
    let hash = manifest.lines().find_map(|l| l.strip_prefix("config_hash=")).unwrap();
    assert!(manifest.contains("seed=7\n"));
    assert!(manifest.contains("timestamp_unix=1700000000\n"));
    for n in names.iter().filter(|n| n.ends_with(".csv")) {
        let (comment, header, rows) = read_table(&a.join(n));
        assert_eq!(comment, format!("# config_hash={hash} seed=7"));
        assert!(rows.iter().all(|r| r.len() == header.len()), "{n}");
        assert!(manifest.contains(&format!("file.{n}.sha256=")));
    }
}

#[test]
fn beampattern_and_rho_ub_tables() {
    let dir = TempDir::new().unwrap();
    let scen = small_scenario(dir.path(), "");
    let out = dir.path().join("out");
    let o = cli(&[
        "--quiet",
        "run",
        scen.to_str().unwrap(),
        "--experiment",
        "Beampattern,RhoUbSweep",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let (_, header, rows) = read_table(&out.join("beampattern.csv"));
    assert_eq!(
        header,
        [
            "angle_deg",
            "uniform_normalized_gain_db",
            "optimized_normalized_gain_db"
        ]
    );
    assert_eq!(rows.len(), 181);
    let at = |deg: &str, col: usize| -> f64 { rows.iter().find(|r| r[0] == deg).unwrap()[col].parse().unwrap() };
    // uniform profile peaks at θ_true with full gain M
    assert!(at("20.0000", 1).abs() < 1e-9);
    assert!(at("20.0000", 2) < -50.0);
    assert!(at("-48.0000", 2) > -2.0);

    let (_, header, rows) = read_table(&out.join("rho_ub_sweep.csv"));
    assert_eq!(&header[4..], ["rho_ub_cap_0.1", "rho_ub_cap_1", "rho_ub_cap_10"]);
    let argmax = |col: usize| {
        rows.iter()
            .filter(|r| r[1] == "false")
            .max_by(|a, b| {
                a[col]
                    .parse::<f64>()
                    .unwrap()
                    .total_cmp(&b[col].parse::<f64>().unwrap())
            })
            .unwrap()[0]
            .clone()
    };
    assert_eq!(argmax(4), argmax(5));
    assert_eq!(argmax(5), argmax(6));
}

#[test]
fn canonical_form_round_trips_through_the_binary() {
    let dir = TempDir::new().unwrap();
    let o = cli(&["validate", "--canonical", reference_path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let canonical = &out[out.find("name = ").unwrap()..];
    let p = dir.path().join("canonical.toml");
    fs::write(&p, canonical).unwrap();
    let again = cli(&["validate", "--canonical", p.to_str().unwrap()]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), out);
}
