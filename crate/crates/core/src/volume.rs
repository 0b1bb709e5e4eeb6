//! Label volumes and the grid they live on.

use std::fmt;

use crate::error::{Error, Result};

/// Largest per-axis spacing difference, in mm, for two grids to be considered equal.
pub const SPACING_TOLERANCE_MM: f64 = 1e-6;

pub const BACKGROUND: u8 = 0;
/// Non-enhancing component.
pub const LABEL_NC: u8 = 1;
/// Peritumoral edema.
pub const LABEL_ED: u8 = 2;
/// Enhancing tumor.
pub const LABEL_ET: u8 = 3;
pub const MAX_LABEL: u8 = LABEL_ET;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
}

impl GridGeometry {
    pub fn new(dims: [usize; 3], spacing: [f64; 3]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidVolume(format!("dims must be >= 1, got {dims:?}")));
        }
        if spacing.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::InvalidVolume(format!(
                "spacing must be finite and > 0, got {spacing:?}"
            )));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidVolume(format!("dims {dims:?} overflow")))?;
        Ok(GridGeometry { dims, spacing })
    }

    /// Unit-spaced grid. Panics on zero dims; meant for tests and generators.
    pub fn isotropic(dims: [usize; 3]) -> Self {
        GridGeometry::new(dims, [1.0; 3]).expect("valid dims")
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    /// Same dims and spacing within [`SPACING_TOLERANCE_MM`] per axis.
    pub fn compatible_with(&self, other: &GridGeometry) -> bool {
        self.dims == other.dims
            && self
                .spacing
                .iter()
                .zip(other.spacing.iter())
                .all(|(a, b)| (a - b).abs() <= SPACING_TOLERANCE_MM)
    }

    pub fn ensure_compatible(&self, other: &GridGeometry) -> Result<()> {
        if self.compatible_with(other) {
            Ok(())
        } else {
            Err(Error::GeometryMismatch {
                left: *self,
                right: *other,
            })
        }
    }

    /// Distance in mm between the centers of the two most distant voxels.
    pub fn corner_distance_mm(&self) -> f64 {
        (0..3)
            .map(|a| ((self.dims[a] - 1) as f64 * self.spacing[a]).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

impl fmt::Display for GridGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [nx, ny, nz] = self.dims;
        let [sx, sy, sz] = self.spacing;
        write!(f, "({nx}x{ny}x{nz} @ {sx}x{sy}x{sz} mm)")
    }
}

/// A dense 3-D grid of tumor labels in x-fastest order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelVolume {
    geometry: GridGeometry,
    voxels: Vec<u8>,
}

impl LabelVolume {
    pub fn new(geometry: GridGeometry, voxels: Vec<u8>) -> Result<Self> {
        if voxels.len() != geometry.len() {
            return Err(Error::InvalidVolume(format!(
                "{} voxels for grid {geometry}, expected {}",
                voxels.len(),
                geometry.len()
            )));
        }
        if let Some(index) = voxels.iter().position(|&v| v > MAX_LABEL) {
            return Err(Error::LabelDomain {
                value: f64::from(voxels[index]),
                index,
            });
        }
        Ok(LabelVolume { geometry, voxels })
    }

    pub fn zeros(geometry: GridGeometry) -> Self {
        LabelVolume {
            voxels: vec![BACKGROUND; geometry.len()],
            geometry,
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn dims(&self) -> [usize; 3] {
        self.geometry.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.geometry.spacing
    }

    pub fn voxels(&self) -> &[u8] {
        &self.voxels
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> u8 {
        self.voxels[self.geometry.index(x, y, z)]
    }

    /// Sets one voxel. Labels above 3 are rejected.
    pub fn set(&mut self, x: usize, y: usize, z: usize, label: u8) -> Result<()> {
        if label > MAX_LABEL {
            let index = self.geometry.index(x, y, z);
            return Err(Error::LabelDomain {
                value: f64::from(label),
                index,
            });
        }
        let index = self.geometry.index(x, y, z);
        self.voxels[index] = label;
        Ok(())
    }

    pub fn into_voxels(self) -> Vec<u8> {
        self.voxels
    }
}

/// Checks that two volumes share a grid and returns it.
pub fn validate_pair(gt: &LabelVolume, pred: &LabelVolume) -> Result<GridGeometry> {
    gt.geometry.ensure_compatible(&pred.geometry)?;
    Ok(gt.geometry)
}
