//! Connected-component labeling on binary voxel grids.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::region::BinaryMask;
use crate::volume::GridGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    /// Face neighbors only.
    Six,
    /// Face, edge and corner neighbors.
    #[default]
    TwentySix,
}

impl Connectivity {
    pub fn from_count(n: u32) -> Result<Self> {
        match n {
            6 => Ok(Connectivity::Six),
            26 => Ok(Connectivity::TwentySix),
            other => Err(Error::Config(format!("connectivity must be 6 or 26, got {other}"))),
        }
    }

    pub fn count(self) -> u32 {
        match self {
            Connectivity::Six => 6,
            Connectivity::TwentySix => 26,
        }
    }

    /// Neighbor offsets as (dx, dy, dz).
    pub fn offsets(self) -> Vec<[isize; 3]> {
        let mut out = Vec::with_capacity(26);
        for dz in -1isize..=1 {
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let manhattan = dx.abs() + dy.abs() + dz.abs();
                    let keep = match self {
                        Connectivity::Six => manhattan == 1,
                        Connectivity::TwentySix => manhattan > 0,
                    };
                    if keep {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.count())
    }
}

impl FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n: u32 = s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("connectivity must be 6 or 26, got {s:?}")))?;
        Connectivity::from_count(n)
    }
}

/// One connected lesion. `voxels` holds ascending linear indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LesionComponent {
    pub id: u32,
    pub voxels: Vec<usize>,
}

impl LesionComponent {
    pub fn voxel_count(&self) -> usize {
        self.voxels.len()
    }
}

/// Components plus a per-voxel label grid (0 = background, otherwise the component id).
#[derive(Debug, Clone)]
pub struct ComponentLabels {
    pub labels: Vec<u32>,
    pub components: Vec<LesionComponent>,
}

/// Labels components of `mask`. Ids start at 1 and follow the smallest linear
/// index of each component.
pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> ComponentLabels {
    let geometry = *mask.geometry();
    let bits = mask.bits();
    let [nx, ny, nz] = geometry.dims;
    let offsets = connectivity.offsets();
    let mut labels = vec![0u32; bits.len()];
    let mut components = Vec::new();
    let mut stack = Vec::new();

    for seed in 0..bits.len() {
        if !bits[seed] || labels[seed] != 0 {
            continue;
        }
        let id = components.len() as u32 + 1;
        labels[seed] = id;
        stack.push(seed);
        let mut voxels = Vec::new();
        while let Some(i) = stack.pop() {
            voxels.push(i);
            let [x, y, z] = geometry.coords(i);
            for &[dx, dy, dz] in &offsets {
                let (Some(qx), Some(qy), Some(qz)) = (
                    step(x, dx, nx),
                    step(y, dy, ny),
                    step(z, dz, nz),
                ) else {
                    continue;
                };
                let q = geometry.index(qx, qy, qz);
                if bits[q] && labels[q] == 0 {
                    labels[q] = id;
                    stack.push(q);
                }
            }
        }
        voxels.sort_unstable();
        components.push(LesionComponent { id, voxels });
    }

    ComponentLabels { labels, components }
}

pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> Vec<LesionComponent> {
    label_components(mask, connectivity).components
}

#[inline]
pub(crate) fn step(c: usize, d: isize, n: usize) -> Option<usize> {
    let v = c as isize + d;
    (v >= 0 && (v as usize) < n).then_some(v as usize)
}

/// Bounding box of a set of linear indices as inclusive (min, max) corners.
pub(crate) fn bounding_box(geometry: &GridGeometry, indices: &[usize]) -> Option<([usize; 3], [usize; 3])> {
    let mut iter = indices.iter();
    let first = geometry.coords(*iter.next()?);
    let (mut lo, mut hi) = (first, first);
    for &i in iter {
        let c = geometry.coords(i);
        for a in 0..3 {
            lo[a] = lo[a].min(c[a]);
            hi[a] = hi[a].max(c[a]);
        }
    }
    Some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(dims: [usize; 3], set: &[[usize; 3]]) -> BinaryMask {
        let g = GridGeometry::isotropic(dims);
        let idx: Vec<usize> = set.iter().map(|c| g.index(c[0], c[1], c[2])).collect();
        BinaryMask::from_indices(g, &idx)
    }

    #[test]
    fn diagonal_pair() {
        let m = mask([3, 3, 1], &[[0, 0, 0], [1, 1, 0]]);
        assert_eq!(connected_components(&m, Connectivity::TwentySix).len(), 1);
        assert_eq!(connected_components(&m, Connectivity::Six).len(), 2);
    }

    #[test]
    fn corner_diagonal_needs_26() {
        let m = mask([2, 2, 2], &[[0, 0, 0], [1, 1, 1]]);
        assert_eq!(connected_components(&m, Connectivity::TwentySix).len(), 1);
        assert_eq!(connected_components(&m, Connectivity::Six).len(), 2);
    }

    #[test]
    fn ids_follow_first_voxel() {
        // Component B starts at a lower linear index than A's deepest voxel.
        let m = mask([4, 4, 2], &[[0, 0, 1], [3, 0, 0], [3, 1, 0]]);
        let comps = connected_components(&m, Connectivity::Six);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].id, 1);
        assert_eq!(comps[0].voxels, vec![3, 7]);
        assert_eq!(comps[1].id, 2);
        assert_eq!(comps[1].voxel_count(), 1);
    }

    #[test]
    fn empty_mask() {
        let m = BinaryMask::empty(GridGeometry::isotropic([5, 5, 5]));
        assert!(connected_components(&m, Connectivity::TwentySix).is_empty());
    }

    #[test]
    fn no_wraparound_across_rows() {
        // (3,0,0) and (0,1,0) are adjacent in memory but not in space.
        let m = mask([4, 2, 1], &[[3, 0, 0], [0, 1, 0]]);
        assert_eq!(connected_components(&m, Connectivity::TwentySix).len(), 2);
    }

    #[test]
    fn offsets_counts() {
        assert_eq!(Connectivity::Six.offsets().len(), 6);
        assert_eq!(Connectivity::TwentySix.offsets().len(), 26);
        assert!("18".parse::<Connectivity>().is_err());
        assert_eq!("6".parse::<Connectivity>().unwrap(), Connectivity::Six);
    }
}
