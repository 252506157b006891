use std::fs;
use std::process::Command;

fn rgbdt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rgbdt"))
}

#[test]
fn synth_run_eval() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq");
    let out = dir.path().join("out");

    let status = rgbdt()
        .args(["synth", "--preset", "moving-square", "--seed", "4", "--output"])
        .arg(&seq)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(seq.join("config.toml").is_file());

    let status = rgbdt()
        .args(["run", "--threads", "2", "--mask-format", "pgm", "--config"])
        .arg(seq.join("config.toml"))
        .arg("--input")
        .arg(&seq)
        .arg("--output")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("masks/000000.pgm").is_file());
    assert!(out.join("rois.jsonl").is_file());

    let output = rgbdt()
        .arg("eval")
        .arg("--pred")
        .arg(&out)
        .arg("--gt")
        .arg(&seq)
        .output()
        .unwrap();
    assert!(output.status.success());
    let csv = String::from_utf8(output.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "frame_index,precision,recall,f_measure");
    assert_eq!(lines.len(), 302);
    let summary: Vec<&str> = lines[301].split(',').collect();
    assert_eq!(summary[0], "mean");
    let mean_f: f64 = summary[3].parse().unwrap();
    assert!(mean_f > 0.9, "{mean_f}");
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "window_n = 1\n").unwrap();
    let output = rgbdt()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--input")
        .arg(dir.path())
        .arg("--output")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("window_n ≥ 2"));
}

#[test]
fn flag_overrides_file_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ok.toml");
    fs::write(&cfg, "window_n = 10\n").unwrap();
    let output = rgbdt()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--sigma-floor=-1")
        .arg("--input")
        .arg(dir.path())
        .arg("--output")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("sigma_floor"));
}

#[test]
fn missing_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let status = rgbdt()
        .arg("run")
        .arg("--input")
        .arg(dir.path().join("nope"))
        .arg("--output")
        .arg(dir.path().join("o"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_preset_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let status = rgbdt()
        .args(["synth", "--preset", "bogus", "--output"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}
