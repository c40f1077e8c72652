//! Per-hour cost normalization.
//!
//! Raw costs are dominated by the hour's UE count, so each hour gets its own
//! affine map calibrated from a sweep of every arm over a sample of that
//! hour's snapshots. Normalized costs land in [0, 1] (clipped), which both
//! bounds the learner's losses and keeps within-hour arm differences visible.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::heuristic::CostNormalizer;
use crate::{Error, Result};

pub const NORMALIZER_VERSION: u32 = 1;

/// The 24 per-hour normalizers plus the corpus digest they were fit on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostNormalizerSet {
    pub version: u32,
    pub corpus_digest: String,
    pub per_hour: Vec<CostNormalizer>,
}

impl CostNormalizerSet {
    pub fn new(corpus_digest: String, per_hour: Vec<CostNormalizer>) -> Result<Self> {
        if per_hour.len() != 24 {
            return Err(Error::config("normalizer set must cover 24 hours"));
        }
        Ok(CostNormalizerSet {
            version: NORMALIZER_VERSION,
            corpus_digest,
            per_hour,
        })
    }

    /// Pass-through normalizers for all hours (raw costs clipped to [0,1]).
    pub fn identity() -> Self {
        CostNormalizerSet {
            version: NORMALIZER_VERSION,
            corpus_digest: String::new(),
            per_hour: vec![CostNormalizer::identity(); 24],
        }
    }

    pub fn hour(&self, hour: u8) -> &CostNormalizer {
        &self.per_hour[hour as usize]
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::format(path, e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let set: CostNormalizerSet =
            serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        if set.version != NORMALIZER_VERSION {
            return Err(Error::format(
                path,
                format!("normalizer version {} unsupported", set.version),
            ));
        }
        if set.per_hour.len() != 24 {
            return Err(Error::format(path, "normalizer set must cover 24 hours"));
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_round_trip() {
        let per_hour = (0..24)
            .map(|h| CostNormalizer {
                min: -10.0 - f64::from(h),
                max: 5.0,
            })
            .collect();
        let set = CostNormalizerSet::new("digest".into(), per_hour).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("normalizer.json");
        set.save(&path).unwrap();
        let back = CostNormalizerSet::load(&path).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn wrong_hour_count_is_rejected() {
        assert!(CostNormalizerSet::new(String::new(), vec![CostNormalizer::identity(); 23])
            .is_err());
    }
}
