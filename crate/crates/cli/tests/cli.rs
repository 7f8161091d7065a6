use std::path::{Path, PathBuf};
use std::process::Command;

use mono3dt::io;
use mono3dt_core::geometry::Vec3;
use mono3dt_core::{Box2D, Box3D, Dimensions, TrackRecord, TrackStatus};
use sha2::{Digest, Sha256};

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn mono3dt(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_mono3dt"))
        .args(args)
        .env("MONO3DT_LOG", "error")
        .output()
        .unwrap();
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn digest(p: &Path) -> Vec<u8> {
    Sha256::digest(std::fs::read(p).unwrap()).to_vec()
}

fn simulate(dir: &Path, preset: &str, seed: u64, extra: &[&str]) {
    let seed = seed.to_string();
    let mut args = vec![
        "simulate",
        "--preset",
        preset,
        "--seed",
        &seed,
        "--out",
        s(dir),
    ];
    args.extend_from_slice(extra);
    let o = mono3dt(&args);
    assert_eq!(o.code, 0, "{}", o.stderr);
}

fn track(dir: &Path, out: &Path, extra: &[&str]) -> Output {
    let det = dir.join("detections.jsonl");
    let poses = dir.join("poses.json");
    let mut args = vec![
        "track",
        "--detections",
        s(&det),
        "--poses",
        s(&poses),
        "--out",
        s(out),
    ];
    args.extend_from_slice(extra);
    mono3dt(&args)
}

fn evaluate(gt: &Path, pred: &Path, extra: &[&str]) -> serde_json::Value {
    let report = pred.with_extension("report.json");
    let mut args = vec![
        "evaluate",
        "--gt",
        s(gt),
        "--pred",
        s(pred),
        "--out",
        s(&report),
    ];
    args.extend_from_slice(extra);
    let o = mono3dt(&args);
    assert_eq!(o.code, 0, "{}", o.stderr);
    serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap()
}

fn scenario_files(dir: &Path) -> [PathBuf; 4] {
    ["detections.jsonl", "poses.json", "calib.json", "gt.jsonl"].map(|f| dir.join(f))
}

#[test]
fn simulate_writes_scenario_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("runs/s7");
    simulate(&dir, "crossing_occlusion", 7, &["--frames", "100"]);
    for f in scenario_files(&dir) {
        assert!(f.is_file(), "{}", f.display());
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config"]["frames"], 100);
    assert!(manifest["timings_s"]["simulate"].as_f64().unwrap() >= 0.0);
}

#[test]
fn simulate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    simulate(&a, "dense", 3, &[]);
    simulate(&b, "dense", 3, &[]);
    for (fa, fb) in scenario_files(&a).iter().zip(&scenario_files(&b)) {
        assert_eq!(digest(fa), digest(fb), "{}", fa.display());
    }
    let c = tmp.path().join("c");
    simulate(&c, "dense", 4, &[]);
    assert_ne!(
        digest(&a.join("detections.jsonl")),
        digest(&c.join("detections.jsonl"))
    );
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    assert_eq!(
        mono3dt(&["simulate", "--frames", "0", "--out", s(&out)]).code,
        2
    );
    assert_eq!(
        mono3dt(&["simulate", "--preset", "highway", "--out", s(&out)]).code,
        2
    );
    assert_eq!(
        mono3dt(&["train-motion", "--epochs", "0", "--out", s(&out)]).code,
        2
    );
    assert_eq!(mono3dt(&["frobnicate"]).code, 2);

    let dir = tmp.path().join("s");
    simulate(&dir, "open_road", 0, &["--frames", "5"]);
    let tracks = tmp.path().join("t.jsonl");
    assert_eq!(track(&dir, &tracks, &["--motion", "lstm"]).code, 2);
    let config = tmp.path().join("c.toml");
    std::fs::write(&config, "w_3D = 2.0\n").unwrap();
    assert_eq!(track(&dir, &tracks, &["--config", s(&config)]).code, 2);
    std::fs::write(&config, "max_speed = 3\n").unwrap();
    let o = track(&dir, &tracks, &["--config", s(&config)]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("max_speed"), "{}", o.stderr);

    let det = dir.join("detections.jsonl");
    let text = std::fs::read_to_string(&det).unwrap().replacen(
        "\"format_version\":1",
        "\"format_version\":9",
        1,
    );
    std::fs::write(&det, text).unwrap();
    assert_eq!(track(&dir, &tracks, &[]).code, 2);
}

#[test]
fn missing_input_is_a_runtime_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let o = track(
        &tmp.path().join("nowhere"),
        &tmp.path().join("t.jsonl"),
        &[],
    );
    assert_eq!(o.code, 1, "{}", o.stderr);
}

#[test]
fn track_writes_manifest_with_stage_timings() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("s");
    simulate(&dir, "open_road", 1, &["--frames", "20"]);
    let tracks = tmp.path().join("out/tracks.jsonl");
    let o = track(&dir, &tracks, &["--calib", s(&dir.join("calib.json"))]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("out/tracks.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "track");
    assert_eq!(manifest["config"]["w_3d"], 0.7);
    for stage in ["load", "tracking", "write"] {
        assert!(manifest["timings_s"][stage].is_number(), "{stage}");
    }
}

#[test]
fn noiseless_open_road_tracks_perfectly() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("s");
    simulate(&dir, "open_road", 2, &["--noiseless"]);
    let tracks = tmp.path().join("t.jsonl");
    assert_eq!(track(&dir, &tracks, &["--motion", "kf3d"]).code, 0);
    let r = evaluate(&dir.join("gt.jsonl"), &tracks, &[]);
    let c = &r["ranges"][0]["clear"];
    assert_eq!(c["mota"], 1.0);
    assert_eq!(
        (
            c["mismatches"].as_u64(),
            c["false_positives"].as_u64(),
            c["false_negatives"].as_u64()
        ),
        (Some(0), Some(0), Some(0))
    );
}

#[test]
fn kf3d_beats_static_motion_through_occlusion() {
    let tmp = tempfile::tempdir().unwrap();
    let mut mm = [0, 0];
    for seed in 0..3 {
        let dir = tmp.path().join(format!("s{seed}"));
        simulate(&dir, "crossing_occlusion", seed, &[]);
        for (k, motion) in ["none", "kf3d"].into_iter().enumerate() {
            let tracks = dir.join(format!("{motion}.jsonl"));
            assert_eq!(track(&dir, &tracks, &["--motion", motion]).code, 0);
            mm[k] += evaluate(&dir.join("gt.jsonl"), &tracks, &[])["ranges"][0]["clear"]
                ["mismatches"]
                .as_u64()
                .unwrap();
        }
    }
    assert!(mm[1] < mm[0], "kf3d {} vs none {}", mm[1], mm[0]);
}

#[test]
fn tracking_is_causal() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("s");
    simulate(&dir, "dense", 5, &[]);
    let seq =
        io::load_sequence(&dir.join("detections.jsonl"), &dir.join("poses.json"), None).unwrap();
    let full = tmp.path().join("full.jsonl");
    assert_eq!(track(&dir, &full, &[]).code, 0);
    let full_lines: Vec<String> = std::fs::read_to_string(&full)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    for k in [1, 17, 60] {
        let cut = tmp.path().join(format!("cut{k}"));
        let prefix = seq.truncated(k);
        io::write_sequence(
            &prefix,
            &cut.join("detections.jsonl"),
            &cut.join("poses.json"),
            &cut.join("calib.json"),
        )
        .unwrap();
        let out = cut.join("tracks.jsonl");
        assert_eq!(track(&cut, &out, &[]).code, 0);
        let cut_text = std::fs::read_to_string(&out).unwrap();
        let n = io::load_tracks(&out).unwrap().len();
        assert_eq!(
            cut_text.lines().collect::<Vec<_>>(),
            full_lines[..n + 1]
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>(),
            "k = {k}"
        );
        let expected = io::load_tracks(&full)
            .unwrap()
            .iter()
            .filter(|r| r.frame < k as u64)
            .count();
        assert_eq!(n, expected);
    }
}

#[test]
fn tracking_is_repeatable() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("s");
    simulate(&dir, "reappearance", 1, &[]);
    let (a, b) = (tmp.path().join("a.jsonl"), tmp.path().join("b.jsonl"));
    assert_eq!(track(&dir, &a, &[]).code, 0);
    assert_eq!(track(&dir, &b, &[]).code, 0);
    assert_eq!(digest(&a), digest(&b));
}

#[test]
fn ground_truth_scores_perfectly_at_every_range() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("s");
    simulate(&dir, "open_road", 4, &[]);
    let gt = dir.join("gt.jsonl");
    let poses = dir.join("poses.json");
    let r = evaluate(&gt, &gt, &["--ranges", "30,50,100", "--poses", s(&poses)]);
    let ranges = r["ranges"].as_array().unwrap();
    assert_eq!(ranges.len(), 3);
    for rr in ranges {
        assert_eq!(rr["clear"]["mota"], 1.0);
    }
    assert!(ranges[0]["clear"]["gt_objects"].as_u64() < ranges[2]["clear"]["gt_objects"].as_u64());
    let o = mono3dt(&[
        "evaluate",
        "--gt",
        s(&gt),
        "--pred",
        s(&gt),
        "--ranges",
        "30",
    ]);
    assert_eq!(o.code, 2);
}

#[test]
fn empty_prediction_misses_everything() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("s");
    simulate(&dir, "crossing_occlusion", 0, &[]);
    let empty = tmp.path().join("empty.jsonl");
    io::write_tracks(&empty, &[]).unwrap();
    let r = evaluate(&dir.join("gt.jsonl"), &empty, &["--mode", "2d"]);
    let c = &r["ranges"][0]["clear"];
    let gt = c["gt_objects"].as_f64().unwrap();
    assert!(gt > 0.0);
    assert_eq!(c["false_positives"], 0);
    assert_eq!(c["false_negatives"].as_f64().unwrap(), gt);
    assert_eq!(c["mota"].as_f64().unwrap(), 1.0 - gt / gt);
}

fn record(frame: u64, id: u64, x: f64) -> TrackRecord {
    TrackRecord {
        frame,
        track_id: id,
        box3d: Box3D::new(Vec3::new(x, 0.0, 0.75), Dimensions::new(4.0, 1.8, 1.5), 0.0).unwrap(),
        velocity: Vec3::zeros(),
        box2d: Box2D::new(x, 0.0, x + 10.0, 10.0).unwrap(),
        status: TrackStatus::Tracked,
    }
}

#[test]
fn hand_counted_micro_case() {
    // one object over 10 frames: a false positive at frame 3, a miss at
    // frame 6 and an id switch at frame 8
    let gt: Vec<TrackRecord> = (0..10).map(|t| record(t, 1, 0.0)).collect();
    let mut pred = Vec::new();
    for t in 0..10 {
        match t {
            6 => {}
            8.. => pred.push(record(t, 2, 0.0)),
            _ => pred.push(record(t, 1, 0.0)),
        }
        if t == 3 {
            pred.push(record(t, 5, 200.0));
        }
    }
    let tmp = tempfile::tempdir().unwrap();
    let (g, p) = (tmp.path().join("gt.jsonl"), tmp.path().join("pred.jsonl"));
    io::write_tracks(&g, &gt).unwrap();
    io::write_tracks(&p, &pred).unwrap();
    for mode in ["2d", "3d"] {
        let c = evaluate(&g, &p, &["--mode", mode])["ranges"][0]["clear"].clone();
        assert!((c["mota"].as_f64().unwrap() - 0.7).abs() < 1e-12, "{mode}");
        assert_eq!(
            (
                c["false_positives"].as_u64(),
                c["false_negatives"].as_u64(),
                c["mismatches"].as_u64()
            ),
            (Some(1), Some(1), Some(1))
        );
    }
    let o = mono3dt(&["evaluate", "--gt", s(&g), "--pred", s(&p)]);
    assert!(o.stdout.contains("MOTA 0.7000"), "{}", o.stdout);
}

#[test]
fn train_motion_overfits_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a/w.json"), tmp.path().join("b/w.json"));
    let args = |out: &Path| {
        [
            "train-motion",
            "--scenarios",
            "1",
            "--seed",
            "3",
            "--noiseless",
            "--vehicles",
            "1",
            "--frames",
            "40",
            "--epochs",
            "20",
            "--steps-per-epoch",
            "100",
            "--batch",
            "1",
            "--out",
        ]
        .into_iter()
        .map(String::from)
        .chain([s(out).to_string()])
        .collect::<Vec<_>>()
    };
    for out in [&a, &b] {
        let argv = args(out);
        let o = mono3dt(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(o.code, 0, "{}", o.stderr);
    }
    assert_eq!(digest(&a), digest(&b));
    let curve = std::fs::read_to_string(a.with_extension("loss.csv")).unwrap();
    let losses: Vec<f64> = curve
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(losses.len(), 2000);
    assert!(
        *losses.last().unwrap() < 1e-3,
        "final loss {}",
        losses.last().unwrap()
    );
    assert!(io::load_weights(&a).is_ok());
}

#[test]
fn lstm_backend_runs_with_trained_weights() {
    let tmp = tempfile::tempdir().unwrap();
    let w = tmp.path().join("w.json");
    let o = mono3dt(&[
        "train-motion",
        "--scenarios",
        "2",
        "--epochs",
        "1",
        "--steps-per-epoch",
        "20",
        "--out",
        s(&w),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let dir = tmp.path().join("s");
    simulate(&dir, "open_road", 9, &["--frames", "30"]);
    let tracks = tmp.path().join("t.jsonl");
    let o = track(&dir, &tracks, &["--motion", "lstm", "--weights", s(&w)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(!io::load_tracks(&tracks).unwrap().is_empty());
}

#[test]
fn demo_fans_out_over_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("demo");
    let o = mono3dt(&[
        "demo",
        "--sequences",
        "3",
        "--jobs",
        "2",
        "--frames",
        "40",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    for seed in 0..3 {
        assert!(out.join(format!("seed_{seed}/report.json")).is_file());
        assert!(
            o.stdout.contains(&format!("seed {seed} 3d all: MOTA")),
            "{}",
            o.stdout
        );
    }
    assert!(out.join("manifest.json").is_file());
    // workers do not share state: a single-worker run gives the same tracks
    let serial = tmp.path().join("serial");
    assert_eq!(
        mono3dt(&[
            "demo",
            "--sequences",
            "3",
            "--jobs",
            "1",
            "--frames",
            "40",
            "--out",
            s(&serial)
        ])
        .code,
        0
    );
    for seed in 0..3 {
        let f = format!("seed_{seed}/tracks.jsonl");
        assert_eq!(digest(&out.join(&f)), digest(&serial.join(&f)));
    }
}
