use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lesion::components::Connectivity;

/// Settings for lesion-wise evaluation. `Default` gives the challenge settings.
///
/// Serialized as a flat `key = value` text file; `#` starts a comment and
/// missing keys keep their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    /// Number of 3x3x3 dilation passes that define a lesion's catchment.
    pub dilation_iterations: usize,
    pub connectivity: Connectivity,
    /// Components smaller than this are dropped.
    pub min_lesion_voxels: usize,
    /// Also drop prediction components under `min_lesion_voxels`.
    pub cutoff_applies_to_pred: bool,
    /// HD95 assigned when a region is missing on exactly one side.
    pub missing_region_hd95_mm: f64,
    /// HD95 contributed by each unmatched (FN or FP) lesion.
    pub unmatched_lesion_hd95_mm: f64,
    pub hd_percentile: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            dilation_iterations: 3,
            connectivity: Connectivity::TwentySix,
            min_lesion_voxels: 50,
            cutoff_applies_to_pred: true,
            missing_region_hd95_mm: 374.0,
            unmatched_lesion_hd95_mm: 374.0,
            hd_percentile: 0.95,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.hd_percentile) {
            return Err(Error::Config(format!(
                "hd_percentile {} outside [0, 1]",
                self.hd_percentile
            )));
        }
        for (name, v) in [
            ("missing_region_hd95_mm", self.missing_region_hd95_mm),
            ("unmatched_lesion_hd95_mm", self.unmatched_lesion_hd95_mm),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = EvalConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Config(format!("line {}: {key}: {what} {value:?}", lineno + 1));
            match key {
                "dilation_iterations" => {
                    cfg.dilation_iterations = value.parse().map_err(|_| bad("expected integer, got"))?
                }
                "connectivity" => cfg.connectivity = value.parse()?,
                "min_lesion_voxels" => {
                    cfg.min_lesion_voxels = value.parse().map_err(|_| bad("expected integer, got"))?
                }
                "cutoff_applies_to_pred" => {
                    cfg.cutoff_applies_to_pred = value.parse().map_err(|_| bad("expected true/false, got"))?
                }
                "missing_region_hd95_mm" => {
                    cfg.missing_region_hd95_mm = value.parse().map_err(|_| bad("expected number, got"))?
                }
                "unmatched_lesion_hd95_mm" => {
                    cfg.unmatched_lesion_hd95_mm = value.parse().map_err(|_| bad("expected number, got"))?
                }
                "hd_percentile" => {
                    cfg.hd_percentile = value.parse().map_err(|_| bad("expected number, got"))?
                }
                other => {
                    return Err(Error::Config(format!("line {}: unknown key {other:?}", lineno + 1)))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        EvalConfig::parse(&text)
    }
}

impl fmt::Display for EvalConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dilation_iterations = {}", self.dilation_iterations)?;
        writeln!(f, "connectivity = {}", self.connectivity)?;
        writeln!(f, "min_lesion_voxels = {}", self.min_lesion_voxels)?;
        writeln!(f, "cutoff_applies_to_pred = {}", self.cutoff_applies_to_pred)?;
        writeln!(f, "missing_region_hd95_mm = {:?}", self.missing_region_hd95_mm)?;
        writeln!(f, "unmatched_lesion_hd95_mm = {:?}", self.unmatched_lesion_hd95_mm)?;
        writeln!(f, "hd_percentile = {:?}", self.hd_percentile)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(EvalConfig::parse("").unwrap(), EvalConfig::default());
        assert_eq!(EvalConfig::parse("# nothing\n\n").unwrap(), EvalConfig::default());
    }

    #[test]
    fn display_round_trips() {
        let cfg = EvalConfig {
            dilation_iterations: 1,
            connectivity: Connectivity::Six,
            min_lesion_voxels: 0,
            cutoff_applies_to_pred: false,
            missing_region_hd95_mm: 373.13,
            unmatched_lesion_hd95_mm: 0.1,
            hd_percentile: 1.0,
        };
        assert_eq!(EvalConfig::parse(&cfg.to_string()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(EvalConfig::parse("connectivity = 18").is_err());
        assert!(EvalConfig::parse("hd_percentile = 1.5").is_err());
        assert!(EvalConfig::parse("unmatched_lesion_hd95_mm = -1").is_err());
        assert!(EvalConfig::parse("nonsense = 1").is_err());
        assert!(EvalConfig::parse("min_lesion_voxels").is_err());
        assert!(EvalConfig::parse("min_lesion_voxels = many").is_err());
    }

    #[test]
    fn partial_override() {
        let cfg = EvalConfig::parse("dilation_iterations = 1 # weaker reading\n").unwrap();
        assert_eq!(cfg.dilation_iterations, 1);
        assert_eq!(cfg.min_lesion_voxels, 50);
    }
}
