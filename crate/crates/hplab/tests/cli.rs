use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hplab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hplab")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn presets_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let o = hplab(&["presets"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["markov_sqrt", "kalyagin_markov", "ang1", "nik1", "pade10", "bus210a", "bus205c"] {
        assert!(text.contains(name), "{name} missing");
    }
    let o = hplab(&["presets", "--json"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.as_array().unwrap().len() >= 28);
}

#[test]
fn markov_run_writes_roots_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = hplab(&["run", "--preset", "markov_sqrt", "--degrees", "1,2", "--digits", "80", "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let csv = fs::read_to_string(out.join("markov_sqrt_1_roots.csv")).unwrap();
    assert!(csv.starts_with("family,n,re,im,residual\n"));
    // zero -3/4 and pole -1/4
    assert!(csv.lines().any(|l| l.starts_with("1,1,-2.5e-1,")), "{csv}");
    assert!(csv.lines().any(|l| l.starts_with("0,1,-7.5e-1,")), "{csv}");
    let m = manifest(&out);
    assert_eq!(m["degrees"], serde_json::json!([1, 2]));
    for run in m["runs"].as_array().unwrap() {
        assert!(run["failure"].is_null());
        for a in run["artifacts"].as_array().unwrap() {
            let bytes = fs::read(out.join(a["path"].as_str().unwrap())).unwrap();
            assert_eq!(hplab::cache::sha256_hex(&bytes), a["sha256"].as_str().unwrap());
        }
    }
    assert!(out.join("markov_sqrt_2_solution.json").exists());
    assert!(fs::read_dir(&out).unwrap().any(|e| e.unwrap().path().extension().is_some_and(|x| x == "svg")));
}

#[test]
fn hermite_pade_degree_zero_gives_empty_clouds() {
    let dir = tempfile::tempdir().unwrap();
    let o = hplab(&["run", "--preset", "ang1", "--degrees", "0", "--digits", "64", "--out", "out", "--no-plots"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/ang1_0_roots.csv")).unwrap();
    assert_eq!(csv, "family,n,re,im,residual\n");
    let sol: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/ang1_0_solution.json")).unwrap()).unwrap();
    let polys = sol["polys"].as_array().unwrap();
    assert_eq!(polys.len(), 3);
    assert!(polys.iter().all(|p| p.as_array().unwrap().len() == 1));
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"preset": "no_such_preset"}"#).unwrap();
    assert_eq!(hplab(&["run", "bad.json"], dir.path()).status.code(), Some(1));
    fs::write(dir.path().join("typo.json"), r#"{"preset": "ang1", "degres": [3]}"#).unwrap();
    assert_eq!(hplab(&["run", "typo.json"], dir.path()).status.code(), Some(1));
    assert_eq!(hplab(&["run", "missing.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn failed_degrees_exit_two_and_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    // w^-1 (1 - 2w)^{1/2} has no Laurent-free expansion at infinity
    let cfg = r#"{
        "label": "bad_shift",
        "mode": "pade",
        "functions": [{"expansion_point": "infinity", "w_power": -1,
                       "factors": [{"a": "2", "alpha": "1/2"}], "label": "f"}],
        "degrees": [2, 3],
        "digits": 64,
        "out": "out"
    }"#;
    fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    let o = hplab(&["run", "cfg.json"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&dir.path().join("out"));
    let runs = m["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert!(runs.iter().all(|r| r["failure"]["stage"] == "series"), "{m}");
}

#[test]
fn plot_and_detect_work_from_a_stored_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = hplab(&["run", "--preset", "nik1", "--degrees", "12", "--digits", "400", "--out", "out", "--no-plots"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = "out/nik1_12_roots.csv";
    let o = hplab(&["plot", csv, "--out", "p.svg", "--families", "0,2", "--title", "nik1"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = fs::read_to_string(dir.path().join("p.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.contains("<circle"));

    let o = hplab(&["detect", csv, "--out", "d.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let reports: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    assert_eq!(reports[0]["n"], 12);
    // the stored report uses the same detectors on the same points
    let stored: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/nik1_12_spurious.json")).unwrap()).unwrap();
    for key in ["doublets", "singlets", "triplets"] {
        assert_eq!(reports[0][key].as_array().unwrap().len(), stored[key].as_array().unwrap().len(), "{key}");
    }
    assert_eq!(hplab(&["detect", "missing.csv"], dir.path()).status.code(), Some(1));
}

#[test]
fn worker_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut trees = Vec::new();
    for (w, out) in [("1", "a"), ("2", "b")] {
        let o = hplab(&["run", "--preset", "bus205c", "--degrees", "4..7", "--digits", "150", "--workers", w, "--out", out], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir.path().join(out))
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.is_file() && p.file_name().unwrap() != "manifest.json")
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
            .collect();
        files.sort();
        trees.push(files);
    }
    assert!(!trees[0].is_empty());
    assert_eq!(trees[0], trees[1]);
    // manifests differ only in the recorded out dir and worker count
    let (ma, mb) = (manifest(&dir.path().join("a")), manifest(&dir.path().join("b")));
    assert_eq!(ma["runs"], mb["runs"]);
    assert_eq!(ma["series"], mb["series"]);
}
