use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn flowkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowkit"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn ok_json(dir: &Path, args: &[&str]) -> Value {
    let out = flowkit(dir, args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(dir: &Path, args: &[&str]) -> Option<i32> {
    flowkit(dir, args).status.code()
}

fn write_lines(dir: &Path, name: &str, lines: &[String]) -> String {
    let path = dir.join(name);
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    path.to_str().unwrap().to_owned()
}

fn votes_line(id: usize, votes: &[i8]) -> String {
    serde_json::json!({ "item_id": format!("p{id}"), "model_a": "a", "model_b": "b", "votes": votes }).to_string()
}

#[test]
fn tokens_counts() {
    let dir = TempDir::new().unwrap();
    let r = ok_json(
        dir.path(),
        &["tokens", "--frames", "256", "--height", "768", "--width", "768", "--tae-factor", "8", "--patch", "1,2,2"],
    );
    assert_eq!(r["tokens"], 73728);
    assert_eq!(r["seed"], 0);
    assert_eq!(r["config"]["command"]["tokens"]["patch"], "1,2,2");

    let r = ok_json(dir.path(), &["tokens", "--frames", "1", "--height", "8", "--width", "8", "--patch", "1,1,1"]);
    assert_eq!(r["tokens"], 1);

    let out = flowkit(dir.path(), &["tokens", "--frames", "256", "--height", "100", "--width", "768"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("divisible"));
    assert_eq!(code(dir.path(), &["tokens", "--frames", "8", "--height", "16", "--width", "16", "--patch", "1,3,1"]), Some(2));
}

#[test]
fn csv_has_header_and_lf_lines() {
    let dir = TempDir::new().unwrap();
    let out = flowkit(dir.path(), &["--format", "csv", "tokens", "--frames", "256", "--height", "768", "--width", "768"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "tokens,latent_frames,latent_height,latent_width\n73728,32,96,96\n");
}

#[test]
fn out_dir_is_created() {
    let dir = TempDir::new().unwrap();
    let nested = dir.path().join("a/b");
    ok_json(&nested, &["tokens", "--frames", "8", "--height", "16", "--width", "16"]);
    assert!(nested.is_dir());
}

#[test]
fn config_file_mirrors_flags_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"frames": 256, "height": 768, "width": 768, "patch": "1,1,1", "seed": 9}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let r = ok_json(dir.path(), &["tokens", "--config", cfg]);
    assert_eq!(r["tokens"], 32 * 96 * 96);
    assert_eq!(r["seed"], 9);
    let r = ok_json(dir.path(), &["tokens", "--config", cfg, "--patch", "1,2,2", "--seed", "4"]);
    assert_eq!(r["tokens"], 73728);
    assert_eq!(r["seed"], 4);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"frames": 8, "height": 16, "width": 16, "bogus": 1}"#).unwrap();
    assert_eq!(code(dir.path(), &["tokens", "--config", bad.to_str().unwrap()]), Some(2));
}

#[test]
fn train_config_errors_and_divergence() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(dir.path(), &["train", "--steps", "0"]), Some(2));
    assert_eq!(code(dir.path(), &["train", "--steps", "10", "--lr", "-1"]), Some(2));
    // Decoupled decay with lr·wd far above one blows the weights up.
    assert_eq!(code(dir.path(), &["train", "--steps", "200", "--lr", "1e6"]), Some(3));
}

#[test]
fn train_is_deterministic_per_seed() {
    let runs: Vec<String> = (0..2)
        .map(|_| {
            let dir = TempDir::new().unwrap();
            ok_json(dir.path(), &["train", "--steps", "300", "--seed", "7"]);
            std::fs::read_to_string(dir.path().join("loss.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert!(runs[0].starts_with("step,loss\n100,"));
}

#[test]
fn default_training_then_sampling() {
    let dir = TempDir::new().unwrap();
    let r = ok_json(dir.path(), &["train"]);
    let ckpt = dir.path().join("checkpoint.json");
    assert!(ckpt.is_file());
    assert_eq!(r["config"]["command"]["train"]["steps"], 10_000);
    let ckpt = ckpt.to_str().unwrap();

    let r = ok_json(dir.path(), &["sample", "--ckpt", ckpt, "--n", "400"]);
    let pts = r["samples"].as_array().unwrap();
    assert_eq!(pts.len(), 400);
    let right = pts.iter().filter(|p| p[0].as_f64().unwrap() > 0.0).count();
    assert!((150..=250).contains(&right), "{right}");
    let from_file: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("samples.json")).unwrap()).unwrap();
    assert_eq!(&from_file, &r["samples"]);
}

#[test]
fn sampling_contract() {
    let dir = TempDir::new().unwrap();
    ok_json(dir.path(), &["train", "--steps", "100"]);
    let ckpt = dir.path().join("checkpoint.json");
    let ckpt_s = ckpt.to_str().unwrap();

    let r = ok_json(dir.path(), &["sample", "--ckpt", ckpt_s, "--n", "2", "--schedule", "linquad:50,1000"]);
    assert_eq!(r["schedule"][1].as_f64(), Some(0.001));
    assert_eq!(r["schedule"].as_array().unwrap().len(), 51);
    assert_eq!(r["config"]["command"]["sample"]["schedule"], "linquad:50,1000");

    let r = ok_json(dir.path(), &["sample", "--ckpt", ckpt_s]);
    assert_eq!(r["config"]["command"]["sample"]["schedule"], "linquad:50,250");

    let r = ok_json(dir.path(), &["sample", "--ckpt", ckpt_s, "--n", "0"]);
    assert_eq!(r["samples"], serde_json::json!([]));
    assert_eq!(std::fs::read_to_string(dir.path().join("samples.json")).unwrap(), "[]\n");

    let a = ok_json(dir.path(), &["sample", "--ckpt", ckpt_s, "--n", "5", "--seed", "3"]);
    let b = ok_json(dir.path(), &["sample", "--ckpt", ckpt_s, "--n", "5", "--seed", "3"]);
    let c = ok_json(dir.path(), &["sample", "--ckpt", ckpt_s, "--n", "5", "--seed", "4"]);
    assert_eq!(a["samples"], b["samples"]);
    assert_ne!(a["samples"], c["samples"]);

    // Unconditional checkpoints reject class labels and guidance.
    assert_eq!(code(dir.path(), &["sample", "--ckpt", ckpt_s, "--class", "0"]), Some(2));
    assert_eq!(code(dir.path(), &["sample", "--ckpt", ckpt_s, "--guidance", "3"]), Some(2));

    let mut json: Value = serde_json::from_str(&std::fs::read_to_string(&ckpt).unwrap()).unwrap();
    json["format_version"] = 99.into();
    let bad = dir.path().join("future.json");
    std::fs::write(&bad, json.to_string()).unwrap();
    assert_eq!(code(dir.path(), &["sample", "--ckpt", bad.to_str().unwrap()]), Some(2));
    assert_eq!(code(dir.path(), &["sample", "--ckpt", "/nonexistent/ckpt.json"]), Some(2));
    assert_eq!(code(dir.path(), &["sample", "--ckpt", ckpt_s, "--schedule", "cosine:10"]), Some(2));
}

#[test]
fn conditional_guided_sampling() {
    let dir = TempDir::new().unwrap();
    ok_json(dir.path(), &["train", "--steps", "300", "--conditional"]);
    let ckpt = dir.path().join("checkpoint.json");
    let r = ok_json(
        dir.path(),
        &["sample", "--ckpt", ckpt.to_str().unwrap(), "--n", "4", "--class", "1", "--guidance", "3", "--solver", "midpoint"],
    );
    assert_eq!(r["samples"].as_array().unwrap().len(), 4);
    assert_eq!(code(dir.path(), &["sample", "--ckpt", ckpt.to_str().unwrap(), "--class", "2"]), Some(2));
}

#[test]
fn extend_reports_spans_and_partition() {
    let dir = TempDir::new().unwrap();
    let r = ok_json(dir.path(), &["extend", "--mode", "md", "--n", "30", "--hop", "15", "--ctx", "5"]);
    assert_eq!(r["spans"], serde_json::json!([[0, 15], [10, 30]]));
    for window in ["uniform", "triangle"] {
        let r = ok_json(dir.path(), &["extend", "--n", "97", "--hop", "20", "--ctx", "7", "--window", window]);
        for s in r["mask_sums"].as_array().unwrap() {
            assert!((s.as_f64().unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(r["sequence"].as_array().unwrap().len(), 97);
    }
    assert!(dir.path().join("sequence.csv").is_file());
    assert_eq!(code(dir.path(), &["extend", "--hop", "0"]), Some(2));
}

#[test]
fn extend_single_segment_agrees_across_modes() {
    let dir = TempDir::new().unwrap();
    let seqs: Vec<Value> = ["md", "ar", "beam"]
        .iter()
        .map(|m| ok_json(dir.path(), &["extend", "--mode", m, "--n", "20", "--hop", "30", "--seed", "5"])["sequence"].clone())
        .collect();
    assert_eq!(seqs[0], seqs[1]);
    assert_eq!(seqs[1], seqs[2]);
}

#[test]
fn extend_modes_are_deterministic() {
    let dir = TempDir::new().unwrap();
    for mode in ["md", "ar", "beam"] {
        let args = ["extend", "--mode", mode, "--n", "50", "--hop", "15", "--ctx", "5", "--candidates", "3", "--beam", "2"];
        assert_eq!(ok_json(dir.path(), &args)["sequence"], ok_json(dir.path(), &args)["sequence"]);
    }
}

#[test]
fn eval_nwt_all_wins() {
    let dir = TempDir::new().unwrap();
    let lines: Vec<String> = (0..20).map(|i| votes_line(i, &[1, 1, 1])).collect();
    let f = write_lines(dir.path(), "wins.jsonl", &lines);
    let r = ok_json(dir.path(), &["eval", "nwt", "--in", &f, "--sigma", "49.9"]);
    assert_eq!(r["nwt"].as_f64(), Some(100.0));
    assert_eq!(r["band"], "significant");
    assert_eq!(r["ci95"], serde_json::json!([100.0, 100.0]));
}

#[test]
fn eval_nwt_band_and_reproducible_bootstrap() {
    let dir = TempDir::new().unwrap();
    // 1100 wins, 891 losses, 9 ties: net win rate 10.45%.
    let lines: Vec<String> = (0..2000)
        .map(|i| votes_line(i, &[if i < 1100 { 1 } else if i < 1991 { -1 } else { 0 }]))
        .collect();
    let f = write_lines(dir.path(), "votes.jsonl", &lines);
    let args = ["eval", "nwt", "--in", &f, "--sigma", "3.74", "--bootstrap", "200"];
    let r = ok_json(dir.path(), &args);
    assert!((r["nwt"].as_f64().unwrap() - 10.45).abs() < 1e-9);
    assert_eq!(r["band"], "significant");
    assert_eq!(flowkit(dir.path(), &args).stdout, flowkit(dir.path(), &args).stdout);

    let r = ok_json(dir.path(), &["eval", "nwt", "--in", &f, "--sigma", "6", "--bootstrap", "0"]);
    assert_eq!(r["band"], "moderate");
    assert!(r["ci95"].is_null());
    assert_eq!(code(dir.path(), &["eval", "nwt", "--in", &f, "--sigma", "0"]), Some(2));
}

#[test]
fn eval_input_errors() {
    let dir = TempDir::new().unwrap();
    let f = write_lines(dir.path(), "bad.jsonl", &[votes_line(0, &[1]), "{oops".into()]);
    let out = flowkit(dir.path(), &["eval", "nwt", "--in", &f]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(code(dir.path(), &["eval", "nwt", "--in", "/nonexistent.jsonl"]), Some(2));
}

#[test]
fn eval_elo_symmetric_and_csv() {
    let dir = TempDir::new().unwrap();
    let mut lines = vec![];
    for (a, b) in [("x", "y"), ("y", "z"), ("z", "x")] {
        for outcome in ["win_a", "win_b", "tie"] {
            lines.push(serde_json::json!({ "model_a": a, "model_b": b, "outcome": outcome }).to_string());
        }
    }
    let f = write_lines(dir.path(), "battles.jsonl", &lines);
    let r = ok_json(dir.path(), &["eval", "elo", "--in", &f]);
    for entry in r["ratings"].as_array().unwrap() {
        assert!((entry["rating"].as_f64().unwrap() - 1000.0).abs() < 1e-9);
    }
    let out = flowkit(dir.path(), &["--format", "csv", "eval", "elo", "--in", &f]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("model,rating\n"));
    assert_eq!(text.lines().count(), 4);

    let seq = ok_json(dir.path(), &["eval", "elo", "--in", &f, "--sequential-k", "4"]);
    let total: f64 = seq["ratings"].as_array().unwrap().iter().map(|e| e["rating"].as_f64().unwrap()).sum();
    assert!((total - 3000.0).abs() < 1e-9);
    assert_eq!(code(dir.path(), &["eval", "elo", "--in", &f, "--sequential-k", "0"]), Some(2));

    let split = write_lines(
        dir.path(),
        "split.jsonl",
        &[
            r#"{"model_a": "p", "model_b": "q", "outcome": "tie"}"#.into(),
            r#"{"model_a": "r", "model_b": "s", "outcome": "tie"}"#.into(),
        ],
    );
    let out = flowkit(dir.path(), &["eval", "elo", "--in", &split]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("disconnected"));
}

#[test]
fn eval_bt_fits_and_flags_separation() {
    let dir = TempDir::new().unwrap();
    let mut lines = vec![];
    for i in 0..40 {
        let (ba, bb) = if i % 2 == 0 { (0, 1) } else { (1, 0) };
        let votes: &[i8] = if i % 4 < 3 { &[1, -1, 1] } else { &[-1] };
        lines.push(
            serde_json::json!({ "item_id": i, "model_a": "a", "model_b": "b", "votes": votes, "bin_a": ba, "bin_b": bb })
                .to_string()
                .replace(&format!("\"item_id\":{i}"), &format!("\"item_id\":\"{i}\"")),
        );
    }
    let f = write_lines(dir.path(), "bt.jsonl", &lines);
    let r = ok_json(dir.path(), &["eval", "bt", "--in", &f]);
    assert_eq!(r["models"], serde_json::json!(["a", "b"]));
    assert_eq!(r["groups"], serde_json::json!(["all"]));
    assert_eq!(r["coefs"][0][0].as_f64(), Some(0.0));

    let sweep: Vec<String> = (0..10).map(|i| votes_line(i, &[1])).collect();
    let f = write_lines(dir.path(), "sweep.jsonl", &sweep);
    assert_eq!(code(dir.path(), &["eval", "bt", "--in", &f, "--max-iter", "30"]), Some(3));
}
