//! Manifest-driven generation into an output tree:
//!
//! ```text
//! out/manifest.jsonl
//! out/samples/<id>/{left.png, right.png, disparity.pfm, holes.png, meta.json}
//! ```
//!
//! Samples are independent and run on a bounded worker pool. Each sample's
//! seed depends only on the global seed and its manifest position, so the
//! tree is byte-identical for any number of workers.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::image::{read_image, write_image, write_mask_png};
use crate::io::manifest::{Manifest, SampleRecord};
use crate::io::pfm::write_pfm;
use crate::io::read_relative_depth;
use crate::pipeline::{generate_sample, GenerationConfig, StereoSample};

pub const SAMPLES_DIR: &str = "samples";
pub const OUTPUT_MANIFEST: &str = "manifest.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchOptions {
    pub jobs: usize,
    /// Print one line per finished sample on stderr.
    pub progress: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self {
            jobs: 1,
            progress: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub source_id: String,
    pub sample_index: u64,
    pub global_seed: u64,
    pub sample_seed: u64,
    pub alpha_used: f64,
    pub warp_hole_pixels: usize,
    pub hole_pixels_pre_inpaint: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleFailure {
    pub id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatchSummary {
    pub generated: Vec<String>,
    /// Records without a relative depth map.
    pub skipped: Vec<String>,
    pub failures: Vec<SampleFailure>,
    pub manifest_path: PathBuf,
}

fn relative(id: &str, file: &str) -> PathBuf {
    Path::new(SAMPLES_DIR).join(id).join(file)
}

fn write_sample(sample: &StereoSample<f64>, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_image(&sample.left, &dir.join("left.png"))?;
    write_image(&sample.right, &dir.join("right.png"))?;
    write_pfm(&sample.disparity_gt, &dir.join("disparity.pfm"))?;
    write_mask_png(&sample.hole_mask_pre_inpaint, &dir.join("holes.png"))?;
    let meta = SampleMeta {
        source_id: sample.provenance.source_id.clone(),
        sample_index: sample.provenance.sample_index,
        global_seed: sample.provenance.global_seed,
        sample_seed: sample.provenance.sample_seed,
        alpha_used: sample.alpha_used,
        warp_hole_pixels: sample.warp_hole_mask.count_ones(),
        hole_pixels_pre_inpaint: sample.hole_mask_pre_inpaint.count_ones(),
        warnings: sample.warnings.clone(),
    };
    let mut json = serde_json::to_string_pretty(&meta).expect("meta serializes");
    json.push('\n');
    let path = dir.join("meta.json");
    std::fs::write(&path, json).map_err(|e| Error::io(path, e))
}

fn run_one(rec: &SampleRecord, index: u64, rel_path: &Path, cfg: &GenerationConfig, out_dir: &Path) -> Result<()> {
    let image = read_image::<f64>(&rec.left_path)?;
    let rel = read_relative_depth::<f64>(rel_path)?;
    let sample = generate_sample(&image, &rel, cfg, &rec.id, index, None)?;
    write_sample(&sample, &out_dir.join(SAMPLES_DIR).join(&rec.id))
}

pub fn generate_batch(
    manifest: &Manifest,
    cfg: &GenerationConfig,
    out_dir: &Path,
    opts: BatchOptions,
) -> Result<BatchSummary> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| Error::param(format!("cannot start worker pool: {e}")))?;

    let todo: Vec<(u64, &SampleRecord, &Path)> = manifest
        .samples
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.rel_depth_path.as_deref().map(|p| (i as u64, r, p)))
        .collect();
    let total = todo.len();
    let done = AtomicUsize::new(0);

    let results: Vec<Result<()>> = pool.install(|| {
        todo.par_iter()
            .map(|&(index, rec, rel)| {
                let res = run_one(rec, index, rel, cfg, out_dir);
                if opts.progress {
                    let k = done.fetch_add(1, Ordering::Relaxed) + 1;
                    match &res {
                        Ok(()) => eprintln!("[{k}/{total}] {}", rec.id),
                        Err(e) => eprintln!("[{k}/{total}] {} FAILED: {}", rec.id, e.full_message()),
                    }
                }
                res
            })
            .collect()
    });

    let mut summary = BatchSummary {
        skipped: manifest
            .samples
            .iter()
            .filter(|r| r.rel_depth_path.is_none())
            .map(|r| r.id.clone())
            .collect(),
        ..Default::default()
    };
    let mut records = Vec::new();
    for ((_, rec, _), res) in todo.iter().zip(results) {
        match res {
            Ok(()) => {
                summary.generated.push(rec.id.clone());
                records.push(SampleRecord {
                    id: rec.id.clone(),
                    left_path: relative(&rec.id, "left.png"),
                    right_path: Some(relative(&rec.id, "right.png")),
                    rel_depth_path: None,
                    gt_disp_path: Some(relative(&rec.id, "disparity.pfm")),
                    dataset_id: rec.dataset_id.clone(),
                });
            }
            Err(e) => summary.failures.push(SampleFailure {
                id: rec.id.clone(),
                error: e.full_message(),
            }),
        }
    }
    let out_manifest = Manifest::new(Some(cfg.clone()), records);
    summary.manifest_path = out_dir.join(OUTPUT_MANIFEST);
    out_manifest.save(&summary.manifest_path)?;
    Ok(summary)
}
