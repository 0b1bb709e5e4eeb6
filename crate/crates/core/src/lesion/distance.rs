//! Surface extraction and the percentile Hausdorff distance.
//!
//! Directed distances are read off an exact Euclidean distance transform of
//! the target surface, computed on the bounding box of both sets with the
//! Felzenszwalb-Huttenlocher lower-envelope pass along each axis.

use crate::error::{Error, Result};
use crate::lesion::components::bounding_box;
use crate::volume::GridGeometry;

/// A box-shaped window onto the full grid.
struct Window {
    origin: [usize; 3],
    local: GridGeometry,
}

impl Window {
    fn covering(geometry: &GridGeometry, a: &[usize], b: &[usize]) -> Option<Window> {
        let (lo_a, hi_a) = bounding_box(geometry, a)?;
        let (lo_b, hi_b) = bounding_box(geometry, b)?;
        let mut dims = [0usize; 3];
        let mut origin = [0usize; 3];
        for ax in 0..3 {
            origin[ax] = lo_a[ax].min(lo_b[ax]);
            dims[ax] = hi_a[ax].max(hi_b[ax]) - origin[ax] + 1;
        }
        let local = GridGeometry::new(dims, geometry.spacing).ok()?;
        Some(Window { origin, local })
    }

    fn rasterize(&self, geometry: &GridGeometry, indices: &[usize]) -> Vec<bool> {
        let mut bits = vec![false; self.local.len()];
        for &i in indices {
            let [x, y, z] = geometry.coords(i);
            bits[self
                .local
                .index(x - self.origin[0], y - self.origin[1], z - self.origin[2])] = true;
        }
        bits
    }
}

/// Voxels of `bits` with at least one face neighbor outside the set. Voxels on
/// the edge of `dims` count as surface.
fn surface_of(bits: &[bool], dims: [usize; 3]) -> Vec<usize> {
    let [nx, ny, nz] = dims;
    let sy = nx;
    let sz = nx * ny;
    let mut out = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let i = x + sy * y + sz * z;
                if !bits[i] {
                    continue;
                }
                let interior = x > 0
                    && x + 1 < nx
                    && y > 0
                    && y + 1 < ny
                    && z > 0
                    && z + 1 < nz
                    && bits[i - 1]
                    && bits[i + 1]
                    && bits[i - sy]
                    && bits[i + sy]
                    && bits[i - sz]
                    && bits[i + sz];
                if !interior {
                    out.push(i);
                }
            }
        }
    }
    out
}

/// Surface voxels of an index set on the full grid (grid-boundary voxels are surface).
pub fn surface(geometry: &GridGeometry, indices: &[usize]) -> Vec<usize> {
    let mut bits = vec![false; geometry.len()];
    for &i in indices {
        bits[i] = true;
    }
    surface_of(&bits, geometry.dims)
}

/// Squared Euclidean distance (mm^2) from every window voxel to the nearest seed.
fn squared_edt(seeds: &[usize], geometry: &GridGeometry) -> Vec<f64> {
    let dims = geometry.dims;
    let mut field = vec![f64::INFINITY; geometry.len()];
    for &s in seeds {
        field[s] = 0.0;
    }
    let strides = [1, dims[0], dims[0] * dims[1]];
    let longest = *dims.iter().max().unwrap();
    let mut f = vec![0f64; longest];
    let mut d = vec![0f64; longest];
    let mut v = vec![0usize; longest];
    let mut z = vec![0f64; longest + 1];

    for axis in 0..3 {
        let n = dims[axis];
        let w2 = geometry.spacing[axis] * geometry.spacing[axis];
        let stride = strides[axis];
        let (oa, ob) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for b in 0..dims[ob] {
            for a in 0..dims[oa] {
                let start = a * strides[oa] + b * strides[ob];
                for i in 0..n {
                    f[i] = field[start + i * stride];
                }
                if envelope_1d(&f[..n], w2, &mut d[..n], &mut v, &mut z) {
                    for i in 0..n {
                        field[start + i * stride] = d[i];
                    }
                }
            }
        }
    }
    field
}

/// d[p] = min_q f[q] + w2 (p - q)^2. Returns false (and leaves `d` untouched)
/// when `f` is infinite everywhere.
fn envelope_1d(f: &[f64], w2: f64, d: &mut [f64], v: &mut [usize], z: &mut [f64]) -> bool {
    let intersect = |q: usize, p: usize| -> f64 {
        let (qf, pf) = (q as f64, p as f64);
        ((f[q] + w2 * qf * qf) - (f[p] + w2 * pf * pf)) / (2.0 * w2 * (qf - pf))
    };
    let mut k = 0usize;
    let mut any = false;
    for (q, fq) in f.iter().enumerate() {
        if !fq.is_finite() {
            continue;
        }
        if !any {
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            any = true;
            continue;
        }
        let mut s = intersect(q, v[k]);
        while s <= z[k] {
            // The first parabola always has z[0] = -inf, so k never underflows here.
            k -= 1;
            s = intersect(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    if !any {
        return false;
    }
    let mut j = 0usize;
    for (p, out) in d.iter_mut().enumerate() {
        while z[j + 1] < p as f64 {
            j += 1;
        }
        let q = v[j];
        let delta = p as f64 - q as f64;
        *out = f[q] + w2 * delta * delta;
    }
    true
}

/// Nearest-rank percentile with the ceiling convention: the ceil(p * n)-th
/// smallest value (1-based), at least the first.
pub fn nearest_rank(values: &mut [f64], percentile: f64) -> f64 {
    let n = values.len();
    assert!(n > 0, "nearest_rank of an empty sample");
    // A small slack keeps products like 0.95 * 20 from rounding up past 19.
    let rank = ((percentile * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    let (_, value, _) = values.select_nth_unstable_by(rank - 1, |a, b| a.total_cmp(b));
    *value
}

fn directed(from_surface: &[usize], to_field: &[f64], percentile: f64) -> f64 {
    let mut dists: Vec<f64> = from_surface.iter().map(|&i| to_field[i].sqrt()).collect();
    nearest_rank(&mut dists, percentile)
}

/// Symmetric percentile Hausdorff distance in mm between two nonempty voxel sets.
pub fn hd95(a: &[usize], b: &[usize], geometry: &GridGeometry, percentile: f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Contract("hd95 requires two nonempty voxel sets".into()));
    }
    if !(0.0..=1.0).contains(&percentile) {
        return Err(Error::Contract(format!("percentile {percentile} outside [0, 1]")));
    }
    if let Some(&bad) = a.iter().chain(b).find(|&&i| i >= geometry.len()) {
        return Err(Error::Contract(format!("voxel index {bad} outside grid {geometry}")));
    }
    let window = Window::covering(geometry, a, b).expect("nonempty sets");
    let bits_a = window.rasterize(geometry, a);
    let bits_b = window.rasterize(geometry, b);
    if bits_a == bits_b {
        return Ok(0.0);
    }
    // Window edges that are not grid edges still mark surface: every voxel
    // outside the window is outside both sets.
    let surf_a = surface_of(&bits_a, window.local.dims);
    let surf_b = surface_of(&bits_b, window.local.dims);
    let field_a = squared_edt(&surf_a, &window.local);
    let field_b = squared_edt(&surf_b, &window.local);
    let ab = directed(&surf_a, &field_b, percentile);
    let ba = directed(&surf_b, &field_a, percentile);
    Ok(ab.max(ba))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sets() {
        let g = GridGeometry::isotropic([6, 6, 6]);
        let a = vec![g.index(1, 1, 1), g.index(2, 1, 1)];
        assert_eq!(hd95(&a, &a, &g, 0.95).unwrap(), 0.0);
    }

    #[test]
    fn single_points() {
        let g = GridGeometry::isotropic([10, 3, 3]);
        let a = [g.index(1, 1, 1)];
        let b = [g.index(6, 1, 1)];
        assert_eq!(hd95(&a, &b, &g, 0.95).unwrap(), 5.0);
    }

    #[test]
    fn anisotropic_spacing() {
        let g = GridGeometry::new([4, 4, 4], [1.0, 2.0, 3.0]).unwrap();
        let a = [g.index(0, 0, 0)];
        let b = [g.index(1, 1, 1)];
        let expected = (1.0f64 + 4.0 + 9.0).sqrt();
        assert!((hd95(&a, &b, &g, 0.95).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn empty_is_contract_violation() {
        let g = GridGeometry::isotropic([3, 3, 3]);
        assert!(matches!(hd95(&[], &[0], &g, 0.95), Err(Error::Contract(_))));
        assert!(matches!(hd95(&[0], &[], &g, 0.95), Err(Error::Contract(_))));
    }

    #[test]
    fn nearest_rank_convention() {
        let mut v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(nearest_rank(&mut v, 0.95), 19.0);
        let mut v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(nearest_rank(&mut v, 0.95), 10.0);
        assert_eq!(nearest_rank(&mut v, 0.0), 1.0);
        assert_eq!(nearest_rank(&mut v, 1.0), 10.0);
        assert_eq!(nearest_rank(&mut v, 0.5), 5.0);
    }

    #[test]
    fn solid_cube_surface() {
        let g = GridGeometry::isotropic([5, 5, 5]);
        let cube: Vec<usize> = (0..g.len())
            .filter(|&i| g.coords(i).iter().all(|&c| (1..=3).contains(&c)))
            .collect();
        // 27 voxels, only the center is interior.
        assert_eq!(surface(&g, &cube).len(), 26);
        let full: Vec<usize> = (0..g.len()).collect();
        assert_eq!(surface(&g, &full).len(), 125 - 27);
    }
}
