use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weighted list of training sources. The default mixes synthetic,
/// generated-mono and real data at 5:6:1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixSpec {
    sources: Vec<(String, f64)>,
}

impl Default for MixSpec {
    fn default() -> Self {
        Self {
            sources: vec![
                ("synthetic".into(), 5.0),
                ("generated-mono".into(), 6.0),
                ("real".into(), 1.0),
            ],
        }
    }
}

impl MixSpec {
    pub fn new(sources: Vec<(String, f64)>) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::param("mix needs at least one source"));
        }
        for (id, w) in &sources {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::param(format!("weight of {id:?} must be positive, got {w}")));
            }
        }
        Ok(Self { sources })
    }

    pub fn sources(&self) -> &[(String, f64)] {
        &self.sources
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total: f64 = self.sources.iter().map(|(_, w)| w).sum();
        self.sources.iter().map(|(_, w)| w / total).collect()
    }
}

/// Endless i.i.d. stream of dataset ids.
#[derive(Debug, Clone)]
pub struct MixStream {
    ids: Vec<String>,
    dist: WeightedIndex<f64>,
    rng: ChaCha8Rng,
}

impl MixStream {
    /// Index into the spec's sources of the next draw.
    pub fn next_index(&mut self) -> usize {
        self.dist.sample(&mut self.rng)
    }
}

impl Iterator for MixStream {
    type Item = String;

    fn next(&mut self) -> Option<String> {
        let i = self.next_index();
        Some(self.ids[i].clone())
    }
}

pub fn mix_stream(spec: &MixSpec, seed: u64) -> Result<MixStream> {
    let spec = MixSpec::new(spec.sources.clone())?;
    let dist = WeightedIndex::new(spec.sources.iter().map(|(_, w)| *w))
        .map_err(|e| Error::param(e.to_string()))?;
    Ok(MixStream {
        ids: spec.sources.into_iter().map(|(id, _)| id).collect(),
        dist,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}
