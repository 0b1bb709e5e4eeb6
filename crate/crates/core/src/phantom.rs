//! Deterministic synthetic ground-truth / prediction pairs.
//!
//! Ground truth holds `n_lesions` axis-aligned ellipsoids per label, placed
//! with at least one empty voxel between bounding boxes. The prediction is the
//! ground truth after one perturbation. All randomness comes from ChaCha8
//! keyed by the seed, and only integer arithmetic decides voxel membership,
//! so output is identical on every platform.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::region::RegionKind;
use crate::volume::{GridGeometry, LabelVolume, LABEL_ED, LABEL_ET, LABEL_NC};

const MAX_ATTEMPTS: usize = 2000;
/// Minimum lo/hi offset between lesion bounding boxes (one empty voxel).
const LESION_GAP: usize = 2;
/// False blobs keep four empty voxels from every lesion, outside a radius-3 catchment.
const FALSE_BLOB_GAP: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    None,
    /// Clears foreground voxels that touch background (6-neighborhood) or the grid edge.
    Erode,
    /// Grows foreground by one voxel (6-neighborhood), taking the largest neighboring label.
    Dilate,
    Shift([isize; 3]),
    DropRegion(RegionKind),
    AddFalseBlob { count: usize, size: usize },
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::None => f.write_str("none"),
            Perturbation::Erode => f.write_str("erode"),
            Perturbation::Dilate => f.write_str("dilate"),
            Perturbation::Shift([x, y, z]) => write!(f, "shift:{x},{y},{z}"),
            Perturbation::DropRegion(r) => write!(f, "drop:{r}"),
            Perturbation::AddFalseBlob { count, size } => write!(f, "false-blob:{count},{size}"),
        }
    }
}

impl FromStr for Perturbation {
    type Err = Error;

    /// `none`, `erode`, `dilate`, `shift:dx,dy,dz`, `drop:ET|TC|WT`, `false-blob:count,size`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("bad perturbation {s:?}"));
        let (kind, args) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let ints = |a: &str| -> Result<Vec<i64>> {
            a.split(',').map(|t| t.trim().parse::<i64>().map_err(|_| bad())).collect()
        };
        match (kind, args) {
            ("none", None) => Ok(Perturbation::None),
            ("erode", None) => Ok(Perturbation::Erode),
            ("dilate", None) => Ok(Perturbation::Dilate),
            ("shift", Some(a)) => match ints(a)?.as_slice() {
                &[x, y, z] => Ok(Perturbation::Shift([x as isize, y as isize, z as isize])),
                _ => Err(bad()),
            },
            ("drop", Some(a)) => Ok(Perturbation::DropRegion(a.parse()?)),
            ("false-blob", Some(a)) => match ints(a)?.as_slice() {
                &[count, size] if count >= 0 && size >= 1 => Ok(Perturbation::AddFalseBlob {
                    count: count as usize,
                    size: size as usize,
                }),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub seed: u64,
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    /// Lesions per label.
    pub n_lesions: usize,
    /// Inclusive bounds on each ellipsoid semi-axis, in voxels.
    pub radius_range: (usize, usize),
    pub perturbation: Perturbation,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            seed: 0,
            dims: [64, 64, 64],
            spacing: [1.0; 3],
            n_lesions: 1,
            radius_range: (3, 6),
            perturbation: Perturbation::None,
        }
    }
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<GridGeometry> {
        let geometry = GridGeometry::new(self.dims, self.spacing).map_err(|e| Error::Usage(e.to_string()))?;
        let (lo, hi) = self.radius_range;
        if lo < 1 || lo > hi {
            return Err(Error::Usage(format!("radius range {lo}..={hi} must satisfy 1 <= min <= max")));
        }
        if let Perturbation::Shift(d) = self.perturbation {
            for (a, (&step, &dim)) in d.iter().zip(&self.dims).enumerate() {
                if step.unsigned_abs() >= dim {
                    return Err(Error::Usage(format!(
                        "shift {step} on axis {a} must be smaller than the dimension {dim}"
                    )));
                }
            }
        }
        Ok(geometry)
    }

    /// SHA-256 of the canonical spec text.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_string().as_bytes()))
    }
}

impl fmt::Display for PhantomSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [nx, ny, nz] = self.dims;
        let [sx, sy, sz] = self.spacing;
        write!(
            f,
            "seed={};dims={nx},{ny},{nz};spacing={sx:?},{sy:?},{sz:?};lesions={};radius={},{};perturbation={}",
            self.seed, self.n_lesions, self.radius_range.0, self.radius_range.1, self.perturbation
        )
    }
}

type Bbox = ([usize; 3], [usize; 3]);

fn separated(a: &Bbox, b: &Bbox, gap: usize) -> bool {
    (0..3).any(|ax| a.0[ax] >= b.1[ax] + gap || b.0[ax] >= a.1[ax] + gap)
}

struct Draw(ChaCha8Rng);

impl Draw {
    fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(b"phantom\0");
        Draw(ChaCha8Rng::from_seed(key))
    }

    /// Uniform integer in lo..=hi (modulo bias is irrelevant at these ranges).
    fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as usize
    }
}

fn paint_ellipsoid(vol: &mut [u8], g: &GridGeometry, center: [usize; 3], radii: [usize; 3], label: u8) {
    let r2: [i64; 3] = radii.map(|r| (r * r) as i64);
    let rhs = r2[0] * r2[1] * r2[2];
    for z in center[2] - radii[2]..=center[2] + radii[2] {
        let dz = z as i64 - center[2] as i64;
        for y in center[1] - radii[1]..=center[1] + radii[1] {
            let dy = y as i64 - center[1] as i64;
            for x in center[0] - radii[0]..=center[0] + radii[0] {
                let dx = x as i64 - center[0] as i64;
                let lhs = dx * dx * r2[1] * r2[2] + dy * dy * r2[0] * r2[2] + dz * dz * r2[0] * r2[1];
                if lhs <= rhs {
                    vol[g.index(x, y, z)] = label;
                }
            }
        }
    }
}

/// Ground truth and perturbed prediction for `spec`.
pub fn generate_phantom(spec: &PhantomSpec) -> Result<(LabelVolume, LabelVolume)> {
    let g = spec.validate()?;
    let mut draw = Draw::new(spec.seed);
    let mut voxels = vec![0u8; g.len()];
    let mut boxes: Vec<Bbox> = Vec::new();
    let (rmin, rmax) = spec.radius_range;

    for label in [LABEL_NC, LABEL_ED, LABEL_ET] {
        for _ in 0..spec.n_lesions {
            let mut placed = false;
            for _ in 0..MAX_ATTEMPTS {
                let radii = [0, 1, 2].map(|_| draw.range(rmin, rmax));
                if (0..3).any(|a| 2 * radii[a] + 1 > g.dims[a]) {
                    continue;
                }
                let center: [usize; 3] = [0, 1, 2].map(|a| draw.range(radii[a], g.dims[a] - 1 - radii[a]));
                let bbox: Bbox = (
                    [0, 1, 2].map(|a| center[a] - radii[a]),
                    [0, 1, 2].map(|a| center[a] + radii[a]),
                );
                if boxes.iter().all(|b| separated(b, &bbox, LESION_GAP)) {
                    paint_ellipsoid(&mut voxels, &g, center, radii, label);
                    boxes.push(bbox);
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(Error::Generation(format!(
                    "could not place lesion {} of label {label} in {} after {MAX_ATTEMPTS} attempts",
                    boxes.len() + 1,
                    g
                )));
            }
        }
    }

    let pred = match spec.perturbation {
        Perturbation::None => voxels.clone(),
        Perturbation::Erode => erode(&voxels, &g),
        Perturbation::Dilate => grow(&voxels, &g),
        Perturbation::Shift(d) => shift(&voxels, &g, d),
        Perturbation::DropRegion(region) => voxels
            .iter()
            .map(|&l| if region.contains(l) { 0 } else { l })
            .collect(),
        Perturbation::AddFalseBlob { count, size } => {
            let mut out = voxels.clone();
            for k in 0..count {
                let mut placed = false;
                for _ in 0..MAX_ATTEMPTS {
                    if (0..3).any(|a| size > g.dims[a]) {
                        break;
                    }
                    let lo: [usize; 3] = [0, 1, 2].map(|a| draw.range(0, g.dims[a] - size));
                    let bbox: Bbox = (lo, lo.map(|c| c + size - 1));
                    if boxes.iter().all(|b| separated(b, &bbox, FALSE_BLOB_GAP)) {
                        let label = draw.range(1, 3) as u8;
                        for z in bbox.0[2]..=bbox.1[2] {
                            for y in bbox.0[1]..=bbox.1[1] {
                                for x in bbox.0[0]..=bbox.1[0] {
                                    out[g.index(x, y, z)] = label;
                                }
                            }
                        }
                        boxes.push(bbox);
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    return Err(Error::Generation(format!(
                        "could not place false blob {} of size {size} in {g}",
                        k + 1
                    )));
                }
            }
            out
        }
    };

    Ok((LabelVolume::new(g, voxels)?, LabelVolume::new(g, pred)?))
}

fn face_neighbors(g: &GridGeometry, i: usize) -> impl Iterator<Item = Option<usize>> + '_ {
    let c = g.coords(i);
    const OFFS: [[isize; 3]; 6] = [[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0], [0, 0, -1], [0, 0, 1]];
    OFFS.iter().map(move |o| {
        let q: Option<Vec<usize>> = (0..3)
            .map(|a| {
                let v = c[a] as isize + o[a];
                (v >= 0 && (v as usize) < g.dims[a]).then_some(v as usize)
            })
            .collect();
        q.map(|q| g.index(q[0], q[1], q[2]))
    })
}

fn erode(src: &[u8], g: &GridGeometry) -> Vec<u8> {
    (0..src.len())
        .map(|i| {
            if src[i] == 0 {
                return 0;
            }
            let exposed = face_neighbors(g, i).any(|n| n.is_none_or(|j| src[j] == 0));
            if exposed {
                0
            } else {
                src[i]
            }
        })
        .collect()
}

fn grow(src: &[u8], g: &GridGeometry) -> Vec<u8> {
    (0..src.len())
        .map(|i| {
            if src[i] != 0 {
                return src[i];
            }
            face_neighbors(g, i).flatten().map(|j| src[j]).max().unwrap_or(0)
        })
        .collect()
}

fn shift(src: &[u8], g: &GridGeometry, d: [isize; 3]) -> Vec<u8> {
    let mut out = vec![0u8; src.len()];
    for (i, &l) in src.iter().enumerate() {
        if l == 0 {
            continue;
        }
        let c = g.coords(i);
        let t: Vec<isize> = (0..3).map(|a| c[a] as isize + d[a]).collect();
        if (0..3).all(|a| t[a] >= 0 && (t[a] as usize) < g.dims[a]) {
            out[g.index(t[0] as usize, t[1] as usize, t[2] as usize)] = l;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{compose_region, mask_volume_voxels};

    #[test]
    fn deterministic() {
        let spec = PhantomSpec {
            seed: 9,
            n_lesions: 2,
            perturbation: Perturbation::AddFalseBlob { count: 2, size: 4 },
            ..Default::default()
        };
        assert_eq!(generate_phantom(&spec).unwrap(), generate_phantom(&spec).unwrap());
        let other = PhantomSpec { seed: 10, ..spec.clone() };
        assert_ne!(generate_phantom(&spec).unwrap().0, generate_phantom(&other).unwrap().0);
        assert_eq!(spec.digest(), spec.clone().digest());
        assert_ne!(spec.digest(), other.digest());
    }

    #[test]
    fn lesion_counts_per_label() {
        let spec = PhantomSpec {
            seed: 3,
            n_lesions: 2,
            ..Default::default()
        };
        let (gt, pred) = generate_phantom(&spec).unwrap();
        assert_eq!(gt, pred);
        for label in 1..=3u8 {
            assert!(gt.voxels().contains(&label));
        }
    }

    #[test]
    fn zero_lesions_is_background() {
        let spec = PhantomSpec {
            n_lesions: 0,
            ..Default::default()
        };
        let (gt, pred) = generate_phantom(&spec).unwrap();
        assert!(gt.voxels().iter().all(|&v| v == 0));
        assert!(pred.voxels().iter().all(|&v| v == 0));
    }

    #[test]
    fn perturbations_change_the_right_voxels() {
        let base = PhantomSpec {
            seed: 1,
            dims: [40, 40, 40],
            n_lesions: 1,
            radius_range: (4, 6),
            ..Default::default()
        };
        let (gt, _) = generate_phantom(&base).unwrap();
        let wt = |v: &LabelVolume| mask_volume_voxels(&compose_region(v, RegionKind::Wt));

        let (_, eroded) = generate_phantom(&PhantomSpec { perturbation: Perturbation::Erode, ..base.clone() }).unwrap();
        assert!(wt(&eroded) < wt(&gt));
        let (_, grown) = generate_phantom(&PhantomSpec { perturbation: Perturbation::Dilate, ..base.clone() }).unwrap();
        assert!(wt(&grown) > wt(&gt));
        let (_, dropped) =
            generate_phantom(&PhantomSpec { perturbation: Perturbation::DropRegion(RegionKind::Et), ..base.clone() })
                .unwrap();
        assert!(!dropped.voxels().contains(&3));
        assert_eq!(wt(&dropped), wt(&gt) - mask_volume_voxels(&compose_region(&gt, RegionKind::Et)));
        let (_, shifted) =
            generate_phantom(&PhantomSpec { perturbation: Perturbation::Shift([1, 0, 0]), ..base.clone() }).unwrap();
        for z in 0..40 {
            for y in 0..40 {
                for x in 0..39 {
                    assert_eq!(shifted.get(x + 1, y, z), gt.get(x, y, z));
                }
            }
        }
    }

    #[test]
    fn infeasible_placement_errors() {
        let spec = PhantomSpec {
            dims: [10, 10, 10],
            n_lesions: 20,
            radius_range: (3, 4),
            ..Default::default()
        };
        assert!(matches!(generate_phantom(&spec), Err(Error::Generation(_))));
    }

    #[test]
    fn spec_validation() {
        let bad_radius = PhantomSpec {
            radius_range: (0, 2),
            ..Default::default()
        };
        assert!(generate_phantom(&bad_radius).is_err());
        let bad_shift = PhantomSpec {
            perturbation: Perturbation::Shift([64, 0, 0]),
            ..Default::default()
        };
        assert!(generate_phantom(&bad_shift).is_err());
    }

    #[test]
    fn perturbation_syntax() {
        for p in [
            Perturbation::None,
            Perturbation::Erode,
            Perturbation::Dilate,
            Perturbation::Shift([2, -1, 0]),
            Perturbation::DropRegion(RegionKind::Tc),
            Perturbation::AddFalseBlob { count: 3, size: 5 },
        ] {
            assert_eq!(p.to_string().parse::<Perturbation>().unwrap(), p);
        }
        assert!("shift:1,2".parse::<Perturbation>().is_err());
        assert!("explode".parse::<Perturbation>().is_err());
        assert!("false-blob:1,0".parse::<Perturbation>().is_err());
    }
}
