//! Hole filling for warped right views.
//!
//! Two backends: a deterministic built-in filler, and an external program
//! driven through files (`{image}`, `{mask}`, `{output}` placeholders in a
//! shell command template). Whatever the backend returns, pixels outside the
//! hole mask are copied back from the input.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use crate::error::{Error, Result};
use crate::io::image::{read_image, write_image, write_mask_png};
use crate::raster::{BitMask, RasterImage, CHANNELS};
use crate::scalar::Scalar;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);

const IMAGE_FILE: &str = "image.png";
const MASK_FILE: &str = "mask.png";
const OUTPUT_FILE: &str = "output.png";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalCommand {
    /// Shell command containing `{image}`, `{mask}` and `{output}`.
    pub template: String,
    #[serde(with = "secs")]
    pub timeout: Duration,
}

impl ExternalCommand {
    pub fn new(template: impl Into<String>) -> Result<Self> {
        let cmd = Self {
            template: template.into(),
            timeout: DEFAULT_TIMEOUT,
        };
        cmd.validate()?;
        Ok(cmd)
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for p in ["{image}", "{mask}", "{output}"] {
            if !self.template.contains(p) {
                return Err(Error::param(format!("command template lacks the {p} placeholder")));
            }
        }
        Ok(())
    }

    fn render(&self, image: &Path, mask: &Path, output: &Path) -> String {
        self.template
            .replace("{image}", &image.to_string_lossy())
            .replace("{mask}", &mask.to_string_lossy())
            .replace("{output}", &output.to_string_lossy())
    }
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InpaintBackend {
    #[default]
    Builtin,
    External(ExternalCommand),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inpainted<T> {
    pub image: RasterImage<T>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct InpaintRequest<T> {
    image: RasterImage<T>,
    holes: BitMask,
    backend: InpaintBackend,
}

impl<T: Scalar> InpaintRequest<T> {
    pub fn new(image: RasterImage<T>, holes: BitMask, backend: InpaintBackend) -> Result<Self> {
        holes.ensure_shape(image.width(), image.height())?;
        if let InpaintBackend::External(cmd) = &backend {
            cmd.validate()?;
        }
        Ok(Self {
            image,
            holes,
            backend,
        })
    }

    /// Runs the request. External backends use `workdir` when given,
    /// otherwise a fresh temporary directory.
    pub fn run(&self, workdir: Option<&Path>) -> Result<Inpainted<T>> {
        match &self.backend {
            InpaintBackend::Builtin => inpaint_builtin(&self.image, &self.holes),
            InpaintBackend::External(cmd) => {
                let image = match workdir {
                    Some(dir) => inpaint_external(&self.image, &self.holes, cmd, dir)?,
                    None => {
                        let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
                        inpaint_external(&self.image, &self.holes, cmd, dir.path())?
                    }
                };
                Ok(Inpainted {
                    image,
                    warnings: Vec::new(),
                })
            }
        }
    }
}

/// Fills each hole from the nearest known pixel to its right in the same
/// row, else the nearest to its left. Rows without any known pixel take the
/// mean color of all known pixels and produce a warning.
pub fn inpaint_builtin<T: Scalar>(image: &RasterImage<T>, holes: &BitMask) -> Result<Inpainted<T>> {
    holes.ensure_shape(image.width(), image.height())?;
    if holes.none() {
        return Ok(Inpainted {
            image: image.clone(),
            warnings: Vec::new(),
        });
    }
    let (width, height) = image.shape();
    let known = width * height - holes.count_ones();
    if known == 0 {
        return Err(Error::empty("every pixel is a hole; nothing to propagate"));
    }

    let mut sum = [T::zero(); CHANNELS];
    for r in 0..height {
        for c in 0..width {
            if !holes.get(r, c) {
                for (s, v) in sum.iter_mut().zip(image.pixel(r, c)) {
                    *s = *s + v;
                }
            }
        }
    }
    let n = T::from_usize_exact(known);
    let mean = sum.map(|s| (s / n).max(T::zero()).min(T::one()));

    let mut out = image.clone();
    let mut warnings = Vec::new();
    let mut right_of: Vec<Option<usize>> = vec![None; width];
    for r in 0..height {
        let mut next = None;
        for c in (0..width).rev() {
            if !holes.get(r, c) {
                next = Some(c);
            }
            right_of[c] = next;
        }
        if next.is_none() {
            warnings.push(format!("row {r} has no known pixels; filled with the image mean"));
            log::warn!("inpaint: row {r} is entirely holes, using image mean");
        }
        let mut left = None;
        for c in 0..width {
            if !holes.get(r, c) {
                left = Some(c);
                continue;
            }
            let color = match right_of[c].or(left) {
                Some(src) => image.pixel(r, src),
                None => mean,
            };
            out.set_pixel(r, c, color);
        }
    }
    Ok(Inpainted { image: out, warnings })
}

/// Hands the image and hole mask to an external program and composites its
/// output back over the known pixels.
///
/// Files written to `workdir`: `image.png` (8-bit RGB), `mask.png` (8-bit
/// gray, 255 = hole); the program must write `output.png` of the same size.
/// The command runs through `sh -c` with `workdir` as current directory.
pub fn inpaint_external<T: Scalar>(
    image: &RasterImage<T>,
    holes: &BitMask,
    cmd: &ExternalCommand,
    workdir: &Path,
) -> Result<RasterImage<T>> {
    holes.ensure_shape(image.width(), image.height())?;
    cmd.validate()?;
    let workdir = workdir
        .canonicalize()
        .map_err(|e| Error::io(workdir, e))?;
    let image_path = workdir.join(IMAGE_FILE);
    let mask_path = workdir.join(MASK_FILE);
    let output_path = workdir.join(OUTPUT_FILE);
    write_image(image, &image_path)?;
    write_mask_png(holes, &mask_path)?;
    if output_path.exists() {
        std::fs::remove_file(&output_path).map_err(|e| Error::io(&output_path, e))?;
    }

    let line = cmd.render(&image_path, &mask_path, &output_path);
    run_with_timeout(&line, &workdir, cmd.timeout)?;

    if !output_path.exists() {
        return Err(Error::Protocol(format!(
            "backend did not write {}",
            output_path.display()
        )));
    }
    let produced: RasterImage<T> = read_image(&output_path)
        .map_err(|e| Error::Protocol(format!("unreadable backend output: {e}")))?;
    if produced.shape() != image.shape() {
        return Err(Error::Protocol(format!(
            "backend output is {}x{}, expected {}x{}",
            produced.width(),
            produced.height(),
            image.width(),
            image.height()
        )));
    }
    Ok(composite(image, &produced, holes))
}

/// Takes hole pixels from `filled` and every other pixel from `original`.
pub fn composite<T: Scalar>(original: &RasterImage<T>, filled: &RasterImage<T>, holes: &BitMask) -> RasterImage<T> {
    let mut out = original.clone();
    for r in 0..original.height() {
        for c in 0..original.width() {
            if holes.get(r, c) {
                out.set_pixel(r, c, filled.pixel(r, c));
            }
        }
    }
    out
}

fn run_with_timeout(line: &str, workdir: &Path, timeout: Duration) -> Result<()> {
    let stdout_path = workdir.join("backend.stdout");
    let stderr_path = workdir.join("backend.stderr");
    let open = |p: &PathBuf| File::create(p).map_err(|e| Error::io(p, e));
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(line)
        .current_dir(workdir)
        .stdin(Stdio::null())
        .stdout(open(&stdout_path)?)
        .stderr(open(&stderr_path)?)
        .spawn()
        .map_err(|e| Error::io("sh", e))?;
    let status = match child.wait_timeout(timeout).map_err(|e| Error::io("sh", e))? {
        Some(status) => status,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Error::Timeout(timeout));
        }
    };
    if !status.success() {
        let stderr = std::fs::read_to_string(&stderr_path).unwrap_or_default();
        let lines: Vec<&str> = stderr.lines().collect();
        return Err(Error::Backend {
            status: status.to_string(),
            stderr: lines[lines.len().saturating_sub(20)..].join("\n"),
        });
    }
    Ok(())
}
