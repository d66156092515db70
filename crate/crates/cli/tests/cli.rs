mod common;

use std::path::PathBuf;

use common::*;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Compares stdout with `tests/golden/<name>.txt`; `UPDATE_GOLDEN=1` rewrites it.
fn check_golden(name: &str, args: &[&str]) -> Vec<(String, String)> {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = run_in(dir.path(), args);
    assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let path = golden_dir().join(format!("{name}.txt"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(text, expected, "{name} differs from its golden file");
    if name == "mix_stream" {
        Vec::new()
    } else {
        parse_report(&text)
    }
}

#[test]
fn golden_eval_identity() {
    let r = check_golden("eval_identity", &["eval", "--pred", "pred.pfm", "--gt", "pred.pfm"]);
    assert_eq!((value(&r, "epe"), value(&r, "d1"), value(&r, "bad2")), (0.0, 0.0, 0.0));
}

#[test]
fn golden_eval_hand_example() {
    let r = check_golden("eval_hand", &["eval", "--pred", "hand_pred.pfm", "--gt", "hand_gt.pfm"]);
    assert_eq!(value(&r, "epe"), 0.75);
    assert_eq!(value(&r, "bad2"), 0.0);
    assert_eq!(value(&r, "d1"), 0.0);
    assert_eq!(value(&r, "pixels"), 4.0);
}

#[test]
fn golden_loss_exact_affine() {
    let r = check_golden("loss_affine", &["loss", "--pred", "pred.pfm", "--mono", "mono.pfm", "--gt", "gt.pfm"]);
    assert!((value(&r, "scale_refined") - 2.0).abs() < 1e-12);
    assert!((value(&r, "shift_refined") - 1.0).abs() < 1e-12);
    assert!(value(&r, "dssi") < 1e-20);
    // gt differs from pred by 1 on every third pixel.
    assert!((value(&r, "sparse") - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(value(&r, "total"), value(&r, "sparse") + value(&r, "dssi"));
}

#[test]
fn golden_align() {
    let r = check_golden("align", &["align", "--pred", "pred.pfm", "--mono", "mono.pfm", "--q", "0.5"]);
    assert!((value(&r, "scale") - 2.0).abs() < 1e-12);
    assert!((value(&r, "shift") - 1.0).abs() < 1e-12);
    assert_eq!(value(&r, "pixels"), 24.0);
}

#[test]
fn golden_edge_mask() {
    let r = check_golden("edge_mask", &["edge-mask", "--disp", "steps.pfm", "--out", "edges.png"]);
    // Drops of 4 at columns 1 and 4 of row 0 and column 3 of row 1.
    assert_eq!(value(&r, "edge_pixels"), 3.0);
}

#[test]
fn golden_inpaint() {
    let r = check_golden(
        "inpaint",
        &["inpaint", "--image", "image.png", "--mask", "holes.png", "--out", "filled.png"],
    );
    assert_eq!(value(&r, "holes"), 2.0 + 3.0 + 4.0);
}

#[test]
fn golden_mix_stream() {
    check_golden("mix_stream", &["mix", "--count", "16", "--seed", "3"]);
    let r = check_golden(
        "mix_counts",
        &["mix", "--count", "50", "--seed", "3", "--source", "a=1", "--source", "b=3", "--out", "ids.txt"],
    );
    assert_eq!(value(&r, "count.a") + value(&r, "count.b"), 50.0);
}

#[test]
fn mix_counts_match_stream() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["mix", "--count", "300", "--seed", "9", "--out", "ids.txt", "--json-out", "r.json"]);
    assert!(out.status.success());
    let ids = std::fs::read_to_string(dir.path().join("ids.txt")).unwrap();
    let r = parse_report(&stdout(&out));
    for (key, id) in [("count.synthetic", "synthetic"), ("count.generated_mono", "generated-mono"), ("count.real", "real")] {
        assert_eq!(value(&r, key) as usize, ids.lines().filter(|l| *l == id).count());
    }
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(json["draws"], 300);
}

#[test]
fn json_out_mirrors_text_report() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = run_in(
        dir.path(),
        &["loss", "--pred", "pred.pfm", "--mono", "mono.pfm", "--gt", "gt.pfm", "--json-out", "r.json"],
    );
    assert!(out.status.success());
    let text = parse_report(&stdout(&out));
    let json: serde_json::Map<String, serde_json::Value> =
        serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    let keys: Vec<&String> = json.keys().collect();
    assert_eq!(keys, text.iter().map(|(k, _)| k).collect::<Vec<_>>());
    for (k, v) in &text {
        assert_eq!(&json[k].to_string(), v, "{k}");
    }
}

#[test]
fn loss_gradient_file() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = run_in(dir.path(), &["loss", "--pred", "pred.pfm", "--mono", "mono.pfm", "--grad-out", "g.pfm"]);
    assert!(out.status.success());
    let g: stereosynth::Disparity = stereosynth::io::read_pfm(&dir.path().join("g.pfm")).unwrap();
    assert_eq!(g.shape(), (6, 4));
    assert!(g.values().iter().all(|v| v.abs() < 1e-9));
}

#[test]
fn external_backend_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = bin()
        .current_dir(dir.path())
        .env("STEREOSYNTH_INPAINT_CMD", "cp {image} {output} # {mask}")
        .args(["inpaint", "--image", "image.png", "--mask", "holes.png", "--out", "f.png"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("backend=external"));
    // An explicit flag beats the environment.
    let out = bin()
        .current_dir(dir.path())
        .env("STEREOSYNTH_INPAINT_CMD", "false {image} {mask} {output}")
        .args(["inpaint", "--backend", "builtin", "--image", "image.png", "--mask", "holes.png", "--out", "f.png"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("backend=builtin"));
}

#[test]
fn backend_failure_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = run_in(
        dir.path(),
        &[
            "inpaint", "--image", "image.png", "--mask", "holes.png", "--out", "f.png",
            "--inpaint-cmd", "echo broken >&2; exit 3 # {image} {mask} {output}",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error.kind=backend"), "{err}");
    assert!(err.contains("broken"), "{err}");
}

/// Every subcommand: a good call exits 0, an operational failure 1, a usage error 2.
#[test]
fn exit_code_matrix() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let img = std::path::Path::new("img");
    std::fs::create_dir(dir.path().join(img)).unwrap();
    stereosynth::io::write_image(&texture(10, 2, 1), &dir.path().join("img/a.png")).unwrap();
    stereosynth::io::write_relative_png(
        &stereosynth::RelativeDepth::new(field(10, 2, &[0.5; 20])).unwrap(),
        &dir.path().join("img/a_rel.png"),
    )
    .unwrap();
    std::fs::write(
        dir.path().join("m.jsonl"),
        "{\"version\":1}\n{\"id\":\"a\",\"left_path\":\"img/a.png\",\"rel_depth_path\":\"img/a_rel.png\",\"dataset_id\":\"g\"}\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("bad.jsonl"),
        "{\"version\":1}\n{\"id\":\"a\",\"left_path\":\"img/missing.png\",\"dataset_id\":\"g\"}\n",
    )
    .unwrap();

    let cases: &[(&[&str], i32)] = &[
        (&["generate", "--manifest", "m.jsonl", "--out", "o", "--quiet", "--d-min", "2", "--d-max", "3"], 0),
        (&["generate", "--manifest", "bad.jsonl", "--out", "o2", "--quiet"], 1),
        (&["generate", "--manifest", "m.jsonl"], 2),
        (&["generate", "--manifest", "m.jsonl", "--out", "o3", "--d-min", "50", "--d-max", "10"], 2),
        (&["generate", "--manifest", "m.jsonl", "--out", "o3", "--jobs", "0"], 2),
        (&["generate", "--manifest", "m.jsonl", "--out", "o3", "--backend", "external"], 2),
        (&["edge-mask", "--disp", "steps.pfm", "--out", "e.png"], 0),
        (&["edge-mask", "--disp", "absent.pfm", "--out", "e.png"], 1),
        (&["edge-mask", "--disp", "steps.pfm", "--out", "e.png", "--tau", "x"], 2),
        (&["inpaint", "--image", "image.png", "--mask", "holes.png", "--out", "f.png"], 0),
        (&["inpaint", "--image", "image.png", "--mask", "steps.pfm", "--out", "f.png"], 1),
        (&["inpaint", "--image", "image.png", "--out", "f.png"], 2),
        (&["inpaint", "--image", "image.png", "--mask", "holes.png", "--out", "f.png", "--inpaint-cmd", "cp {image} {output}"], 2),
        (&["align", "--pred", "pred.pfm", "--mono", "mono.pfm"], 0),
        (&["align", "--pred", "pred.pfm", "--mono", "hand_gt.pfm"], 1),
        (&["align", "--pred", "pred.pfm", "--mono", "mono.pfm", "--q", "1.5"], 2),
        (&["loss", "--pred", "pred.pfm", "--mono", "mono.pfm", "--gt", "gt.pfm"], 0),
        (&["loss", "--pred", "pred.pfm", "--mono", "mono.pfm", "--gt", "gt.txt"], 1),
        (&["loss", "--pred", "pred.pfm", "--mono", "mono.pfm", "--beta", "-1"], 2),
        (&["eval", "--pred", "hand_pred.pfm", "--gt", "hand_gt.pfm"], 0),
        (&["eval", "--pred", "pred.pfm", "--gt", "hand_gt.pfm"], 1),
        (&["eval", "--pred", "pred.pfm"], 2),
        (&["mix", "--count", "10"], 0),
        (&["mix", "--count", "10", "--out", "no/such/dir/ids.txt"], 1),
        (&["mix", "--count", "10", "--source", "a=-1"], 2),
        (&["mix", "--count", "ten"], 2),
        (&["frobnicate"], 2),
        (&[], 2),
    ];
    for (args, code) in cases {
        let out = run_in(dir.path(), args);
        assert_eq!(
            out.status.code(),
            Some(*code),
            "{args:?}\nstderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        if *code == 1 {
            assert!(String::from_utf8_lossy(&out.stderr).contains("error.kind="), "{args:?}");
        }
    }
}
