//! JSON-lines dataset manifest.
//!
//! The first non-blank line is a header object `{"version": 1, "config": ...}`;
//! every following line is one sample record. Relative paths are resolved
//! against the manifest's directory.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::GenerationConfig;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<GenerationConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub id: String,
    pub left_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_depth_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_disp_path: Option<PathBuf>,
    pub dataset_id: String,
}

impl SampleRecord {
    pub fn paths(&self) -> impl Iterator<Item = &PathBuf> {
        std::iter::once(&self.left_path)
            .chain(self.right_path.as_ref())
            .chain(self.rel_depth_path.as_ref())
            .chain(self.gt_disp_path.as_ref())
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.left_path);
        for p in [&mut self.right_path, &mut self.rel_depth_path, &mut self.gt_disp_path]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub version: u32,
    pub config: Option<GenerationConfig>,
    pub samples: Vec<SampleRecord>,
}

/// Ids double as directory names, so they stay within a portable alphabet.
fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id != "."
        && id != ".."
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::Manifest(format!(
            "sample id {id:?} must be non-empty and use only [A-Za-z0-9._-]"
        )))
    }
}

impl Manifest {
    pub fn new(config: Option<GenerationConfig>, samples: Vec<SampleRecord>) -> Self {
        Self {
            version: MANIFEST_VERSION,
            config,
            samples,
        }
    }

    /// Parses manifest text without touching the filesystem.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::Manifest("empty manifest".into()))?;
        let header: Header = serde_json::from_str(first)
            .map_err(|e| Error::Manifest(format!("line 1: bad header: {e}")))?;
        if header.version != MANIFEST_VERSION {
            return Err(Error::Manifest(format!(
                "unsupported manifest version {}",
                header.version
            )));
        }
        let mut samples = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in lines {
            let rec: SampleRecord = serde_json::from_str(line)
                .map_err(|e| Error::Manifest(format!("line {}: {e}", i + 1)))?;
            check_id(&rec.id)?;
            if !seen.insert(rec.id.clone()) {
                return Err(Error::Manifest(format!("duplicate sample id {:?}", rec.id)));
            }
            samples.push(rec);
        }
        Ok(Self {
            version: header.version,
            config: header.config,
            samples,
        })
    }

    /// Loads, resolves relative paths and checks every referenced file exists.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest = Self::parse(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        for rec in &mut manifest.samples {
            rec.resolve(base);
        }
        let missing: Vec<String> = manifest
            .samples
            .iter()
            .flat_map(|r| r.paths().filter(|p| !p.exists()).map(move |p| format!("{}: {}", r.id, p.display())))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Manifest(format!(
                "{} referenced file(s) missing:\n  {}",
                missing.len(),
                missing.join("\n  ")
            )));
        }
        Ok(manifest)
    }

    pub fn to_jsonl(&self) -> String {
        let header = Header {
            version: self.version,
            config: self.config.clone(),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for rec in &self.samples {
            out.push_str(&serde_json::to_string(rec).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl()).map_err(|e| Error::io(path, e))
    }
}
