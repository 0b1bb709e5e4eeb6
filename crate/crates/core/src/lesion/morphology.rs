//! Binary dilation with the full 3x3x3 structuring element.
//!
//! `k` successive dilations with the 3x3x3 cube equal a single dilation with a
//! (2k+1)^3 cube, which is separable into three 1-D max filters. Both the full
//! grid and bounding-box-local variants use that decomposition.

use crate::lesion::components::bounding_box;
use crate::region::BinaryMask;
use crate::volume::GridGeometry;

pub fn dilate(mask: &BinaryMask, iterations: usize) -> BinaryMask {
    if iterations == 0 {
        return mask.clone();
    }
    let mut out = mask.clone();
    let dims = mask.geometry().dims;
    dilate_in_place(out.bits_mut(), dims, iterations);
    out
}

/// Dilates a set of voxels by `iterations` and returns the ascending linear
/// indices of the result. Works inside the set's bounding box grown by
/// `iterations`, clipped to the grid.
pub fn dilate_indices(geometry: &GridGeometry, voxels: &[usize], iterations: usize) -> Vec<usize> {
    let Some((lo, hi)) = bounding_box(geometry, voxels) else {
        return Vec::new();
    };
    let mut origin = [0usize; 3];
    let mut dims = [0usize; 3];
    for a in 0..3 {
        origin[a] = lo[a].saturating_sub(iterations);
        let end = (hi[a] + iterations).min(geometry.dims[a] - 1);
        dims[a] = end - origin[a] + 1;
    }
    let local = GridGeometry::isotropic(dims);
    let mut bits = vec![false; local.len()];
    for &i in voxels {
        let [x, y, z] = geometry.coords(i);
        bits[local.index(x - origin[0], y - origin[1], z - origin[2])] = true;
    }
    dilate_in_place(&mut bits, dims, iterations);

    let mut out = Vec::new();
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            let row = local.index(0, y, z);
            for x in 0..dims[0] {
                if bits[row + x] {
                    out.push(geometry.index(x + origin[0], y + origin[1], z + origin[2]));
                }
            }
        }
    }
    out
}

pub(crate) fn dilate_in_place(bits: &mut [bool], dims: [usize; 3], radius: usize) {
    if radius == 0 {
        return;
    }
    let strides = [1, dims[0], dims[0] * dims[1]];
    let mut line = Vec::new();
    for axis in 0..3 {
        let n = dims[axis];
        if n == 1 {
            continue;
        }
        let stride = strides[axis];
        let (oa, ob) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for b in 0..dims[ob] {
            for a in 0..dims[oa] {
                let start = a * strides[oa] + b * strides[ob];
                line.clear();
                line.extend((0..n).map(|i| bits[start + i * stride]));
                let dilated = dilate_line(&line, radius);
                for (i, v) in dilated.into_iter().enumerate() {
                    bits[start + i * stride] = v;
                }
            }
        }
    }
}

/// out[i] = any(line[i-r ..= i+r]), clipped at both ends.
fn dilate_line(line: &[bool], radius: usize) -> Vec<bool> {
    let n = line.len();
    let mut out = vec![false; n];
    // Distance to the nearest set element on the left, then on the right.
    let mut last: Option<usize> = None;
    for i in 0..n {
        if line[i] {
            last = Some(i);
        }
        if let Some(j) = last {
            out[i] = i - j <= radius;
        }
    }
    let mut next: Option<usize> = None;
    for i in (0..n).rev() {
        if line[i] {
            next = Some(i);
        }
        if let Some(j) = next {
            out[i] |= j - i <= radius;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(dims: [usize; 3], at: [usize; 3]) -> BinaryMask {
        let g = GridGeometry::isotropic(dims);
        BinaryMask::from_indices(g, &[g.index(at[0], at[1], at[2])])
    }

    /// Brute-force dilation: every voxel within Chebyshev distance `r` of a set voxel.
    fn chebyshev_ball(mask: &BinaryMask, r: usize) -> Vec<bool> {
        let g = *mask.geometry();
        let set = mask.indices();
        (0..g.len())
            .map(|i| {
                let p = g.coords(i);
                set.iter().any(|&j| {
                    let q = g.coords(j);
                    (0..3).all(|a| p[a].abs_diff(q[a]) <= r)
                })
            })
            .collect()
    }

    #[test]
    fn one_iteration_is_a_cube() {
        assert_eq!(dilate(&single([7, 7, 7], [3, 3, 3]), 1).count(), 27);
    }

    #[test]
    fn three_iterations_centered() {
        let m = single([9, 9, 9], [4, 4, 4]);
        let d = dilate(&m, 3);
        assert_eq!(d.count(), 343);
        assert_eq!(d.bits(), chebyshev_ball(&m, 3).as_slice());
    }

    #[test]
    fn corner_is_clipped() {
        assert_eq!(dilate(&single([7, 7, 7], [0, 0, 0]), 1).count(), 8);
        assert_eq!(dilate(&single([7, 7, 7], [6, 6, 6]), 1).count(), 8);
    }

    #[test]
    fn zero_iterations_is_identity() {
        let m = single([4, 4, 4], [1, 2, 3]);
        assert_eq!(dilate(&m, 0), m);
    }

    #[test]
    fn local_matches_full_grid() {
        let g = GridGeometry::isotropic([12, 10, 8]);
        let idx = vec![g.index(0, 0, 0), g.index(5, 4, 3), g.index(6, 4, 3), g.index(11, 9, 7)];
        let m = BinaryMask::from_indices(g, &idx);
        for k in 0..4 {
            assert_eq!(dilate_indices(&g, &idx, k), dilate(&m, k).indices());
        }
        assert!(dilate_indices(&g, &[], 3).is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matches_chebyshev_oracle(
            bits in proptest::collection::vec(proptest::bool::weighted(0.03), 9 * 8 * 7),
            k in 0usize..4,
        ) {
            let m = BinaryMask::new(GridGeometry::isotropic([9, 8, 7]), bits).unwrap();
            let d = dilate(&m, k);
            let oracle = chebyshev_ball(&m, k);
            prop_assert_eq!(d.bits(), oracle.as_slice());
            let local = dilate_indices(m.geometry(), &m.indices(), k);
            prop_assert_eq!(local, d.indices());
        }

        #[test]
        fn containment_and_composition(
            bits in proptest::collection::vec(proptest::bool::weighted(0.05), 8 * 8 * 8),
        ) {
            let m = BinaryMask::new(GridGeometry::isotropic([8, 8, 8]), bits).unwrap();
            let d1 = dilate(&m, 1);
            for (a, b) in m.bits().iter().zip(d1.bits()) {
                prop_assert!(!a || *b);
            }
            prop_assert_eq!(dilate(&d1, 1), dilate(&m, 2));
        }
    }
}
