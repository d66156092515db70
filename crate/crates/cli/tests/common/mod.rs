#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use stereosynth::io::{write_image, write_mask_png, write_pfm};
use stereosynth::{BitMask, DisparityField, RasterImage};

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_stereosynth"));
    cmd.env_remove("STEREOSYNTH_INPAINT_CMD").env("RUST_LOG", "off");
    cmd
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Parses `key=value` report lines.
pub fn parse_report(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap_or_else(|| panic!("not a report line: {l:?}"));
            assert!(
                !k.is_empty() && k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.'),
                "bad key {k:?}"
            );
            (k.to_string(), v.to_string())
        })
        .collect()
}

pub fn value(report: &[(String, String)], key: &str) -> f64 {
    report
        .iter()
        .find(|(k, _)| k == key)
        .unwrap_or_else(|| panic!("no key {key}"))
        .1
        .parse()
        .unwrap()
}

pub fn field(width: usize, height: usize, values: &[f64]) -> DisparityField<f64> {
    DisparityField::dense(width, height, values.to_vec()).unwrap()
}

pub fn pfm(dir: &Path, name: &str, f: &DisparityField<f64>) {
    write_pfm(f, &dir.join(name)).unwrap();
}

pub fn texture(width: usize, height: usize, salt: usize) -> RasterImage<f64> {
    RasterImage::from_fn(width, height, |r, c| {
        [
            ((r * 37 + c * 11 + salt * 5) % 256) as f64 / 255.0,
            ((r * c + salt) % 256) as f64 / 255.0,
            ((c * 29 + salt * 3) % 256) as f64 / 255.0,
        ]
    })
    .unwrap()
}

/// Files used by the golden and exit-code tests.
pub fn write_fixtures(dir: &Path) {
    pfm(dir, "hand_pred.pfm", &field(2, 2, &[1.0, 2.0, 3.0, 4.0]));
    pfm(dir, "hand_gt.pfm", &field(2, 2, &[1.0, 1.0, 5.0, 4.0]));

    let pred: Vec<f64> = (0..24).map(|i| ((i * 7) % 11) as f64).collect();
    let mono: Vec<f64> = pred.iter().map(|p| 2.0 * p + 1.0).collect();
    pfm(dir, "pred.pfm", &field(6, 4, &pred));
    pfm(dir, "mono.pfm", &field(6, 4, &mono));
    let gt: Vec<f64> = pred.iter().enumerate().map(|(i, p)| p + if i % 3 == 0 { 1.0 } else { 0.0 }).collect();
    pfm(dir, "gt.pfm", &field(6, 4, &gt));

    pfm(dir, "steps.pfm", &field(8, 2, &[9.0, 9.0, 5.0, 5.0, 5.0, 1.0, 1.0, 1.0, 4.0, 4.0, 4.0, 4.0, 0.0, 0.0, 0.0, 0.0]));

    write_image(&texture(8, 3, 0), &dir.join("image.png")).unwrap();
    let holes = BitMask::from_fn(8, 3, |r, c| (2..4 + r).contains(&c));
    write_mask_png(&holes, &dir.join("holes.png")).unwrap();
}
