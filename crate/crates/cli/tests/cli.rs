use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fessi(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fessi"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn fessi_env(args: &[&str], cwd: &Path, key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fessi"))
        .args(args)
        .current_dir(cwd)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL: &str = r#"
name = "small"
seed = 7
[pulse]
sigma_e = 0.425
count = 2048
phase = { c2 = 0.34, c3 = 1.05 }
[measurement]
tau = 30.0
delta_e = 0.1
resolution = 0.01
jitter_fraction = 1e-5
shots = 200
"#;

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn presets_lists_every_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let o = fessi(&["presets"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["fig3", "fig3-pulse", "transform-limited", "fig-s2", "fig-s4a", "fig-s4b", "fig-s5a", "fig-s5b", "fig-s6", "fig-s6-atto"] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name} missing");
    }
}

#[test]
fn run_is_byte_identical_under_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    for out in ["a", "b"] {
        let o = fessi(&["run", "--config", &cfg, "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = files(&dir.path().join("a"));
    let b = files(&dir.path().join("b"));
    let names: Vec<_> = a.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "dense_phase.txt",
            "interferogram_calibration.txt",
            "interferogram_signal.txt",
            "original_spectral.txt",
            "original_temporal.txt",
            "phase_lattice.txt",
            "reconstructed_temporal.txt",
            "summary.txt"
        ]
    );
    assert_eq!(a, b);

    let o = fessi(&["run", "--config", &cfg, "--out", "c", "--seed", "8"], dir.path());
    assert!(o.status.success());
    let c = fs::read(dir.path().join("c/interferogram_signal.txt")).unwrap();
    assert_ne!(c, fs::read(dir.path().join("a/interferogram_signal.txt")).unwrap());

    let summary = fs::read_to_string(dir.path().join("a/summary.txt")).unwrap();
    assert!(summary.contains("fidelity=") && summary.contains("tau_min_fs="));
    assert!(!summary.contains("time"), "runtimes stay out of the files");
    assert!(stdout(&o).contains("time "));
}

#[test]
fn config_errors_exit_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &SMALL.replace("tau = 30.0", "tau = 30.0\ntua = 1.0"));
    let o = fessi(&["run", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 10"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "neg.toml", &SMALL.replace("resolution = 0.01", "resolution = -0.01"));
    let o = fessi(&["run", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 11"), "{}", stderr(&o));

    assert_eq!(fessi(&["run", "--preset", "nope"], dir.path()).status.code(), Some(2));
    assert_eq!(fessi(&["run"], dir.path()).status.code(), Some(2));
    assert_eq!(fessi(&["sweep", "--preset", "fig3"], dir.path()).status.code(), Some(2));
    let o = fessi_env(&["presets"], dir.path(), "FESSI_THREADS", "many");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn strict_mode_and_reconstruction_failure() {
    let dir = tempfile::tempdir().unwrap();
    // beyond the resolution limit: reconstructs, but violates the window
    let cfg = write_config(dir.path(), "long.toml", &SMALL.replace("tau = 30.0", "tau = 450.0").replace("count = 2048", "count = 8192"));
    let o = fessi(&["run", "--config", &cfg, "--out", "long"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = fessi(&["run", "--config", &cfg, "--out", "long", "--strict"], dir.path());
    assert_eq!(o.status.code(), Some(3));

    let cfg = write_config(dir.path(), "short.toml", &SMALL.replace("tau = 30.0", "tau = 3.0"));
    let o = fessi(&["run", "--config", &cfg, "--out", "short"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn strict_passes_inside_the_window() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let o = fessi(&["run", "--config", &cfg, "--out", "ok", "--strict"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn sweep_output_does_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{SMALL}\n[sweep]\nparameter = \"jitter_fraction\"\nvalues = [0.0, 7e-5]\nreplicates = 3\n");
    let cfg = write_config(dir.path(), "sweep.toml", &body);
    let one = fessi_env(&["sweep", "--config", &cfg, "--out", "one"], dir.path(), "FESSI_THREADS", "1");
    let four = fessi_env(&["sweep", "--config", &cfg, "--out", "four"], dir.path(), "FESSI_THREADS", "4");
    assert!(one.status.success() && four.status.success(), "{}", stderr(&one));
    let a = fs::read_to_string(dir.path().join("one/sweep.txt")).unwrap();
    let b = fs::read_to_string(dir.path().join("four/sweep.txt")).unwrap();
    assert_eq!(a, b);
    let rows: Vec<_> = a.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2 * 3 * 5 + 2);
    assert!(rows[0].starts_with("jitter_fraction, 0, 7, fidelity, "));
    assert!(rows.last().unwrap().starts_with("jitter_fraction, 0.00007, all, fidelity_median, "));

    let empty = write_config(dir.path(), "empty.toml", &body.replace("[0.0, 7e-5]", "[]"));
    assert_eq!(fessi(&["sweep", "--config", &empty], dir.path()).status.code(), Some(2));
}

#[test]
fn synth_and_diagram_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = fessi(&["synth", "--preset", "fig-s6-atto", "--out", "s"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("fwhm duration  0.25"));
    for f in ["spectral.txt", "temporal.txt", "moments.txt"] {
        assert!(dir.path().join("s").join(f).exists(), "{f}");
    }
    let o = fessi(&["diagram", "--preset", "fig-s5a", "--out", "d"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("level T/4      8.6143 fs"));
    let contour = fs::read_to_string(dir.path().join("d/diagram_contour.txt")).unwrap();
    assert!(contour.contains("# polyline=0"));
}

#[test]
fn field_profile_is_read_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("cfg");
    fs::create_dir(&sub).unwrap();
    let mut profile = String::from("# z_nm, F_V_per_nm\n");
    for i in 0..=50 {
        profile.push_str(&format!("{}, 0.0021\n", i as f64));
    }
    fs::write(sub.join("field.txt"), profile).unwrap();
    let body = SMALL
        .replace("delta_e = 0.1\n", "")
        .replace("[measurement]", "[lem]\nmodel = \"pinem\"\nfield_profile = \"field.txt\"\n[measurement]");
    let cfg = write_config(&sub, "pinem.toml", &body);
    let o = fessi(&["run", "--config", &cfg, "--out", "p"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = fs::read_to_string(dir.path().join("p/summary.txt")).unwrap();
    assert!(summary.contains("lem_model=pinem"));
}
