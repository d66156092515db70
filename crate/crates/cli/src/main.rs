//! `stereosynth` command-line tool.
//!
//! Exit status: 0 on success, 1 when the work itself fails (I/O, bad data,
//! backend failure), 2 on a malformed invocation.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use stereosynth::dssi::{DEFAULT_BETA, DEFAULT_QUANTILE};
use stereosynth::edge::{DEFAULT_STRIP_WIDTH, DEFAULT_TAU};
use stereosynth::inpaint::DEFAULT_TIMEOUT;
use stereosynth::io::{read_disparity, read_image, read_mask_png, write_image, write_mask_png, write_pfm, Manifest};
use stereosynth::pipeline::{generate_batch, BatchOptions, DEFAULT_D_MAX, DEFAULT_D_MIN};
use stereosynth::{
    combined_loss, dssi_loss, dssi_loss_grad, edge_mask, evaluate, mask_and, mix_stream, BitMask, Disparity,
    DssiReport, ExternalCommand, GenerationConfig, InpaintBackend, InpaintRequest, MixSpec,
};

use report::Report;

const INPAINT_CMD_ENV: &str = "STEREOSYNTH_INPAINT_CMD";

#[derive(Parser, Debug)]
#[command(name = "stereosynth", version, about = "Synthesize stereo training pairs and score disparity maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate stereo pairs for every manifest record with a relative depth map.
    Generate(GenerateArgs),
    /// Write the mask of depth-discontinuity pixels of a disparity map.
    EdgeMask(EdgeMaskArgs),
    /// Fill the masked pixels of an image.
    Inpaint(InpaintArgs),
    /// Robust affine alignment of a prediction to a monocular disparity map.
    Align(AlignArgs),
    /// Sparse, DSSI and combined losses of a prediction.
    Loss(LossArgs),
    /// EPE, D1 and >2px error of a prediction against ground truth.
    Eval(EvalArgs),
    /// Sample a stream of dataset ids from weighted sources.
    Mix(MixArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Also write the report as one JSON object.
    #[arg(long, value_name = "PATH")]
    json_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendKind {
    Builtin,
    External,
}

#[derive(Args, Debug)]
struct BackendArgs {
    /// Inpainting backend [default: external if a command template is set, else builtin].
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    /// Shell template for the external backend, with {image}, {mask} and {output}.
    #[arg(long, env = INPAINT_CMD_ENV, value_name = "TEMPLATE")]
    inpaint_cmd: Option<String>,
    /// Seconds before the external backend is killed.
    #[arg(long, value_name = "SECS", default_value_t = DEFAULT_TIMEOUT.as_secs_f64(), value_parser = positive)]
    inpaint_timeout: f64,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Lower bound of the disparity scale.
    #[arg(long, default_value_t = DEFAULT_D_MIN, value_parser = positive)]
    d_min: f64,
    /// Upper bound of the disparity scale.
    #[arg(long, default_value_t = DEFAULT_D_MAX, value_parser = positive)]
    d_max: f64,
    /// Edge threshold in pixels.
    #[arg(long, default_value_t = DEFAULT_TAU, value_parser = positive)]
    tau: f64,
    #[arg(long, default_value_t = DEFAULT_STRIP_WIDTH, value_parser = at_least_one)]
    strip_width: usize,
    /// Recorded in the output manifest for training.
    #[arg(long, default_value_t = DEFAULT_QUANTILE, value_parser = quantile)]
    q: f64,
    /// Recorded in the output manifest for training.
    #[arg(long, default_value_t = DEFAULT_BETA, value_parser = non_negative)]
    beta: f64,
    /// Worker threads [default: available cores].
    #[arg(long, value_parser = at_least_one)]
    jobs: Option<usize>,
    /// No progress lines on stderr.
    #[arg(long)]
    quiet: bool,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct EdgeMaskArgs {
    /// Disparity map (.pfm or KITTI .png).
    #[arg(long)]
    disp: PathBuf,
    /// Mask PNG to write (255 = edge).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TAU, value_parser = positive)]
    tau: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct InpaintArgs {
    #[arg(long)]
    image: PathBuf,
    /// Mask PNG, pixels >= 128 are holes.
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct AlignArgs {
    /// Predicted disparity (.pfm or KITTI .png).
    #[arg(long)]
    pred: PathBuf,
    /// Monocular relative disparity (.pfm or KITTI .png).
    #[arg(long)]
    mono: PathBuf,
    /// Optional mask PNG restricting the pixels used.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_QUANTILE, value_parser = quantile)]
    q: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct LossArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    mono: PathBuf,
    /// Sparse ground truth; without it only the DSSI term is reported.
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_QUANTILE, value_parser = quantile)]
    q: f64,
    #[arg(long, default_value_t = DEFAULT_BETA, value_parser = non_negative)]
    beta: f64,
    /// Write d(dssi)/d(pred) as PFM.
    #[arg(long, value_name = "PATH")]
    grad_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// Optional mask PNG further restricting the evaluated pixels.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct MixArgs {
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `id=weight`, repeatable [default: synthetic=5 generated-mono=6 real=1].
    #[arg(long = "source", value_name = "ID=WEIGHT", value_parser = source)]
    sources: Vec<(String, f64)>,
    /// Write the ids here and print per-source counts instead.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}

fn positive(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|v| if v > 0.0 { Ok(v) } else { Err("must be positive".into()) })
}

fn non_negative(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|v| if v >= 0.0 { Ok(v) } else { Err("must not be negative".into()) })
}

fn quantile(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|v| if v > 0.0 && v < 1.0 { Ok(v) } else { Err("must lie in (0, 1)".into()) })
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn source(s: &str) -> Result<(String, f64), String> {
    let (id, w) = s.split_once('=').ok_or("expected ID=WEIGHT")?;
    if id.is_empty() {
        return Err("empty source id".into());
    }
    Ok((id.to_string(), positive(w)?))
}

fn usage_error(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

impl BackendArgs {
    fn resolve(&self) -> InpaintBackend {
        let kind = self.backend.unwrap_or(match self.inpaint_cmd {
            Some(_) => BackendKind::External,
            None => BackendKind::Builtin,
        });
        match kind {
            BackendKind::Builtin => InpaintBackend::Builtin,
            BackendKind::External => {
                let Some(template) = &self.inpaint_cmd else {
                    usage_error(
                        ErrorKind::MissingRequiredArgument,
                        format!("--backend external needs --inpaint-cmd or {INPAINT_CMD_ENV}"),
                    )
                };
                match ExternalCommand::new(template.clone()) {
                    Ok(cmd) => InpaintBackend::External(cmd.with_timeout(Duration::from_secs_f64(self.inpaint_timeout))),
                    Err(e) => usage_error(ErrorKind::InvalidValue, e),
                }
            }
        }
    }
}

/// Pixels valid in every field, further restricted by an optional mask file.
fn joint_mask(fields: &[&Disparity], extra: Option<&Path>) -> anyhow::Result<BitMask> {
    let mut mask = fields[0].valid().clone();
    for f in &fields[1..] {
        mask = mask_and(&mask, f.valid())?;
    }
    if let Some(path) = extra {
        mask = mask_and(&mask, &read_mask_png(path)?)?;
    }
    Ok(mask)
}

fn put_alignment(r: &mut Report, rep: &DssiReport<f64>, pixels: usize) {
    r.float("scale", rep.alignment_initial.scale)
        .float("shift", rep.alignment_initial.shift)
        .float("scale_refined", rep.alignment_refined.scale)
        .float("shift_refined", rep.alignment_refined.shift)
        .float("threshold", rep.threshold)
        .put("pixels", pixels)
        .put("inliers", rep.inlier_count)
        .put("fallback", rep.fallback);
}

fn generate(a: &GenerateArgs) -> anyhow::Result<(Report, bool)> {
    let cfg = GenerationConfig {
        d_min: a.d_min,
        d_max: a.d_max,
        tau: a.tau,
        strip_width: a.strip_width,
        q: a.q,
        beta: a.beta,
        seed: a.seed,
        inpaint_backend: a.backend.resolve(),
    };
    if let Err(e) = cfg.validate() {
        usage_error(ErrorKind::ValueValidation, e);
    }
    let manifest = Manifest::load(&a.manifest)?;
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let summary = generate_batch(&manifest, &cfg, &a.out, BatchOptions { jobs, progress: !a.quiet })?;

    let mut r = Report::new();
    r.put("generated", summary.generated.len())
        .put("skipped", summary.skipped.len())
        .put("failed", summary.failures.len())
        .put("manifest", summary.manifest_path.display().to_string());
    for f in &summary.failures {
        eprintln!("failed sample {}: {}", f.id, f.error);
        r.put(format!("failure.{}", report_key(&f.id)), f.error.clone());
    }
    Ok((r, summary.failures.is_empty()))
}

fn edge_mask_cmd(a: &EdgeMaskArgs) -> anyhow::Result<Report> {
    let disp: Disparity = read_disparity(&a.disp)?;
    let mask = edge_mask(&disp, a.tau)?;
    write_mask_png(&mask, &a.out)?;
    let mut r = Report::new();
    r.put("width", disp.width())
        .put("height", disp.height())
        .put("edge_pixels", mask.count_ones());
    Ok(r)
}

fn inpaint_cmd(a: &InpaintArgs) -> anyhow::Result<Report> {
    let backend = a.backend.resolve();
    let image = read_image::<f64>(&a.image)?;
    let holes = read_mask_png(&a.mask)?;
    let filled = InpaintRequest::new(image, holes.clone(), backend.clone())?.run(None)?;
    write_image(&filled.image, &a.out)?;
    let mut r = Report::new();
    r.put(
        "backend",
        match backend {
            InpaintBackend::Builtin => "builtin",
            InpaintBackend::External(_) => "external",
        },
    )
    .put("holes", holes.count_ones())
    .put("warnings", filled.warnings.len());
    for (i, w) in filled.warnings.iter().enumerate() {
        r.put(format!("warning.{i}"), w.clone());
    }
    Ok(r)
}

fn align_cmd(a: &AlignArgs) -> anyhow::Result<Report> {
    let pred: Disparity = read_disparity(&a.pred)?;
    let mono: Disparity = read_disparity(&a.mono)?;
    let mask = joint_mask(&[&pred, &mono], a.mask.as_deref())?;
    let rep = dssi_loss(&pred, &mono, &mask, a.q)?;
    let mut r = Report::new();
    put_alignment(&mut r, &rep, mask.count_ones());
    r.float("dssi", rep.loss);
    Ok(r)
}

fn loss_cmd(a: &LossArgs) -> anyhow::Result<Report> {
    let pred: Disparity = read_disparity(&a.pred)?;
    let mono: Disparity = read_disparity(&a.mono)?;
    let mono_mask = joint_mask(&[&pred, &mono], a.mask.as_deref())?;
    let mut r = Report::new();
    match &a.gt {
        Some(gt_path) => {
            let gt: Disparity = read_disparity(gt_path)?;
            let valid = joint_mask(&[&pred, &gt], None)?;
            let b = combined_loss(&pred, &gt, &valid, &mono, &mono_mask, a.q, a.beta)?;
            put_alignment(&mut r, &b.dssi_report, mono_mask.count_ones());
            r.put("gt_pixels", valid.count_ones())
                .float("sparse", b.sparse)
                .float("dssi", b.dssi)
                .float("beta", b.beta)
                .float("total", b.total);
        }
        None => {
            let rep = dssi_loss(&pred, &mono, &mono_mask, a.q)?;
            put_alignment(&mut r, &rep, mono_mask.count_ones());
            r.float("dssi", rep.loss);
        }
    }
    if let Some(path) = &a.grad_out {
        let g = dssi_loss_grad(&pred, &mono, &mono_mask, a.q)?;
        write_pfm(&g.gradient, path)?;
    }
    Ok(r)
}

fn eval_cmd(a: &EvalArgs) -> anyhow::Result<Report> {
    let pred: Disparity = read_disparity(&a.pred)?;
    let gt: Disparity = read_disparity(&a.gt)?;
    let mask = joint_mask(&[&gt, &pred], a.mask.as_deref())?;
    let e = evaluate(&pred, &gt, &mask)?;
    let mut r = Report::new();
    r.float("epe", e.epe)
        .float("d1", e.d1)
        .float("bad2", e.bad2)
        .put("pixels", e.evaluated_pixels);
    Ok(r)
}

fn mix_cmd(a: &MixArgs) -> anyhow::Result<Option<Report>> {
    let spec = if a.sources.is_empty() {
        MixSpec::default()
    } else {
        MixSpec::new(a.sources.clone()).unwrap_or_else(|e| usage_error(ErrorKind::InvalidValue, e))
    };
    let mut stream = mix_stream(&spec, a.seed)?;
    let mut counts = vec![0usize; spec.sources().len()];
    let mut text = String::new();
    for _ in 0..a.count {
        let i = stream.next_index();
        counts[i] += 1;
        text.push_str(&spec.sources()[i].0);
        text.push('\n');
    }
    let mut r = Report::new();
    r.put("draws", a.count).put("seed", a.seed);
    for ((id, _), n) in spec.sources().iter().zip(&counts) {
        r.put(format!("count.{}", report_key(id)), *n);
    }
    match &a.out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            Ok(Some(r))
        }
        None => {
            print!("{text}");
            if let Some(j) = &a.output.json_out {
                r.write_json(j)?;
            }
            Ok(None)
        }
    }
}

/// Maps a free-form id onto the report key alphabet.
fn report_key(id: &str) -> String {
    id.chars()
        .map(|c| match c.to_ascii_lowercase() {
            c @ ('a'..='z' | '0'..='9' | '_' | '.') => c,
            _ => '_',
        })
        .collect()
}

fn emit(r: &Report, out: &Output) -> anyhow::Result<()> {
    print!("{}", r.to_text());
    if let Some(path) = &out.json_out {
        r.write_json(path)?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Generate(a) => {
            let (r, ok) = generate(a)?;
            emit(&r, &a.output)?;
            return Ok(ok);
        }
        Command::EdgeMask(a) => emit(&edge_mask_cmd(a)?, &a.output)?,
        Command::Inpaint(a) => emit(&inpaint_cmd(a)?, &a.output)?,
        Command::Align(a) => emit(&align_cmd(a)?, &a.output)?,
        Command::Loss(a) => emit(&loss_cmd(a)?, &a.output)?,
        Command::Eval(a) => emit(&eval_cmd(a)?, &a.output)?,
        Command::Mix(a) => {
            if let Some(r) = mix_cmd(a)? {
                emit(&r, &a.output)?;
            }
        }
    }
    Ok(true)
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    if let Some(e) = e.downcast_ref::<stereosynth::Error>() {
        e.kind()
    } else if e.downcast_ref::<std::io::Error>().is_some() {
        "io"
    } else {
        "other"
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error.kind={}", error_kind(&e));
            eprintln!("error.message={}", format!("{e:#}").replace('\n', "\\n"));
            ExitCode::from(1)
        }
    }
}
