//! Evaluation regions built from the three tumor labels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{GridGeometry, LabelVolume, LABEL_ED, LABEL_ET, LABEL_NC};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionKind {
    /// Enhancing tumor: label 3.
    #[serde(rename = "ET")]
    Et,
    /// Tumor core: labels 1 and 3.
    #[serde(rename = "TC")]
    Tc,
    /// Whole tumor: labels 1, 2 and 3.
    #[serde(rename = "WT")]
    Wt,
}

impl RegionKind {
    pub const ALL: [RegionKind; 3] = [RegionKind::Et, RegionKind::Tc, RegionKind::Wt];

    pub fn labels(self) -> &'static [u8] {
        match self {
            RegionKind::Et => &[LABEL_ET],
            RegionKind::Tc => &[LABEL_NC, LABEL_ET],
            RegionKind::Wt => &[LABEL_NC, LABEL_ED, LABEL_ET],
        }
    }

    #[inline]
    pub fn contains(self, label: u8) -> bool {
        match self {
            RegionKind::Et => label == LABEL_ET,
            RegionKind::Tc => label == LABEL_NC || label == LABEL_ET,
            RegionKind::Wt => label != 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegionKind::Et => "ET",
            RegionKind::Tc => "TC",
            RegionKind::Wt => "WT",
        }
    }
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ET" => Ok(RegionKind::Et),
            "TC" => Ok(RegionKind::Tc),
            "WT" => Ok(RegionKind::Wt),
            _ => Err(Error::Usage(format!("unknown region {s:?}, expected ET, TC or WT"))),
        }
    }
}

/// A boolean grid. `region` is `None` for masks that did not come from a label volume.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    geometry: GridGeometry,
    region: Option<RegionKind>,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(geometry: GridGeometry, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != geometry.len() {
            return Err(Error::InvalidVolume(format!(
                "{} mask bits for grid {geometry}",
                bits.len()
            )));
        }
        Ok(BinaryMask {
            geometry,
            region: None,
            bits,
        })
    }

    pub fn empty(geometry: GridGeometry) -> Self {
        BinaryMask {
            bits: vec![false; geometry.len()],
            geometry,
            region: None,
        }
    }

    /// Mask with exactly the given linear indices set.
    pub fn from_indices(geometry: GridGeometry, indices: &[usize]) -> Self {
        let mut mask = BinaryMask::empty(geometry);
        for &i in indices {
            mask.bits[i] = true;
        }
        mask
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn region(&self) -> Option<RegionKind> {
        self.region
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.bits[self.geometry.index(x, y, z)]
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let i = self.geometry.index(x, y, z);
        self.bits[i] = value;
    }

    pub fn count(&self) -> usize {
        mask_volume_voxels(self)
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Linear indices of set voxels, ascending.
    pub fn indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}

pub fn compose_region(vol: &LabelVolume, region: RegionKind) -> BinaryMask {
    let bits = vol.voxels().iter().map(|&l| region.contains(l)).collect();
    BinaryMask {
        geometry: *vol.geometry(),
        region: Some(region),
        bits,
    }
}

pub fn mask_volume_voxels(mask: &BinaryMask) -> usize {
    mask.bits.iter().filter(|&&b| b).count()
}
