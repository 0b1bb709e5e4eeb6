//! Brute-force reference implementations used to check the optimized code.
//!
//! Everything here works on plain coordinate lists and avoids the library's
//! own helpers, so a shared bug cannot hide on both sides.

#![allow(dead_code)]

pub type Dims = [usize; 3];

pub fn coords(dims: Dims, i: usize) -> [usize; 3] {
    [i % dims[0], (i / dims[0]) % dims[1], i / (dims[0] * dims[1])]
}

pub fn index(dims: Dims, c: [usize; 3]) -> usize {
    c[0] + dims[0] * (c[1] + dims[1] * c[2])
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Union-find over neighboring set voxels; components ordered by smallest index,
/// voxels ascending inside each.
pub fn components(bits: &[bool], dims: Dims, connectivity: usize) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..bits.len()).collect();
    for i in (0..bits.len()).filter(|&i| bits[i]) {
        let c = coords(dims, i);
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let moved = [dx, dy, dz].iter().filter(|&&d| d != 0).count();
                    if moved == 0 || (connectivity == 6 && moved > 1) {
                        continue;
                    }
                    let n = [c[0] as i64 + dx, c[1] as i64 + dy, c[2] as i64 + dz];
                    if (0..3).any(|k| n[k] < 0 || n[k] >= dims[k] as i64) {
                        continue;
                    }
                    let j = index(dims, n.map(|v| v as usize));
                    if bits[j] {
                        let (ra, rb) = (find(&mut parent, i), find(&mut parent, j));
                        if ra != rb {
                            parent[ra.max(rb)] = ra.min(rb);
                        }
                    }
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in (0..bits.len()).filter(|&i| bits[i]) {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}

/// Voxels of `set` with a 6-neighbor outside the set or outside the grid.
pub fn surface(set: &[usize], dims: Dims) -> Vec<usize> {
    let members: std::collections::HashSet<usize> = set.iter().copied().collect();
    let mut out = Vec::new();
    for &i in set {
        let c = coords(dims, i);
        let mut exposed = false;
        for ax in 0..3 {
            for step in [-1i64, 1] {
                let n = c[ax] as i64 + step;
                if n < 0 || n >= dims[ax] as i64 {
                    exposed = true;
                } else {
                    let mut nc = c;
                    nc[ax] = n as usize;
                    if !members.contains(&index(dims, nc)) {
                        exposed = true;
                    }
                }
            }
        }
        if exposed {
            out.push(i);
        }
    }
    out
}

fn dist_mm(dims: Dims, spacing: [f64; 3], a: usize, b: usize) -> f64 {
    let (ca, cb) = (coords(dims, a), coords(dims, b));
    (0..3)
        .map(|k| {
            let d = (ca[k] as f64 - cb[k] as f64) * spacing[k];
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Sorted ascending, element at 1-based rank ceil(percent * n / 100).
fn nearest_rank(mut values: Vec<f64>, percent: usize) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let rank = ((percent * n).div_ceil(100)).max(1);
    values[rank - 1]
}

/// All-pairs surface distances, symmetric percentile Hausdorff distance.
pub fn hd(a: &[usize], b: &[usize], dims: Dims, spacing: [f64; 3], percent: usize) -> f64 {
    let (sa, sb) = (surface(a, dims), surface(b, dims));
    let directed = |from: &[usize], to: &[usize]| {
        let d: Vec<f64> = from
            .iter()
            .map(|&p| to.iter().map(|&q| dist_mm(dims, spacing, p, q)).fold(f64::INFINITY, f64::min))
            .collect();
        nearest_rank(d, percent)
    };
    directed(&sa, &sb).max(directed(&sb, &sa))
}

fn dice(a: &[usize], b: &[usize]) -> f64 {
    let sb: std::collections::HashSet<usize> = b.iter().copied().collect();
    let inter = a.iter().filter(|i| sb.contains(i)).count();
    2.0 * inter as f64 / (a.len() + b.len()) as f64
}

/// Every grid voxel within Chebyshev distance `k` of some voxel of `set`.
pub fn chebyshev_grow(set: &[usize], dims: Dims, k: usize) -> Vec<bool> {
    let mut out = vec![false; dims[0] * dims[1] * dims[2]];
    for &i in set {
        let c = coords(dims, i);
        for z in c[2].saturating_sub(k)..=(c[2] + k).min(dims[2] - 1) {
            for y in c[1].saturating_sub(k)..=(c[1] + k).min(dims[1] - 1) {
                for x in c[0].saturating_sub(k)..=(c[0] + k).min(dims[0] - 1) {
                    out[index(dims, [x, y, z])] = true;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub connectivity: usize,
    pub dilation: usize,
    pub min_voxels: usize,
    pub penalty: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            connectivity: 26,
            dilation: 3,
            min_voxels: 50,
            penalty: 374.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub dice: f64,
    pub hd95: f64,
    pub tp: usize,
    pub fn_: usize,
    pub fp: usize,
}

/// Lesion-wise Dice and HD95 of one binary region.
pub fn lesionwise(gt: &[bool], pred: &[bool], dims: Dims, spacing: [f64; 3], s: Settings) -> Reference {
    let gt_any = gt.iter().any(|&b| b);
    let pred_any = pred.iter().any(|&b| b);
    let lesions: Vec<Vec<usize>> = components(gt, dims, s.connectivity)
        .into_iter()
        .filter(|c| c.len() >= s.min_voxels)
        .collect();
    let preds: Vec<Vec<usize>> = components(pred, dims, s.connectivity)
        .into_iter()
        .filter(|c| c.len() >= s.min_voxels)
        .collect();

    let mut used = vec![false; preds.len()];
    let (mut tp, mut fn_) = (0, 0);
    let (mut dice_sum, mut hd_sum) = (0.0, 0.0);
    for lesion in &lesions {
        let zone = chebyshev_grow(lesion, dims, s.dilation);
        let mut assigned: Vec<usize> = Vec::new();
        for (k, p) in preds.iter().enumerate() {
            if p.iter().any(|&i| zone[i]) {
                used[k] = true;
                assigned.extend(p);
            }
        }
        if assigned.is_empty() {
            fn_ += 1;
            continue;
        }
        tp += 1;
        dice_sum += dice(lesion, &assigned);
        hd_sum += hd(lesion, &assigned, dims, spacing, 95);
    }
    let fp = used.iter().filter(|&&u| !u).count();

    let (dice_lw, hd_lw) = match (gt_any, pred_any) {
        (false, false) => (1.0, 0.0),
        (true, false) | (false, true) => (0.0, s.penalty),
        (true, true) => {
            let total = tp + fn_ + fp;
            if total == 0 {
                (1.0, 0.0)
            } else {
                (
                    dice_sum / total as f64,
                    (hd_sum + s.penalty * (fn_ + fp) as f64) / total as f64,
                )
            }
        }
    };
    Reference {
        dice: dice_lw,
        hd95: hd_lw,
        tp,
        fn_,
        fp,
    }
}

/// Region membership by label: ET = {3}, TC = {1, 3}, WT = {1, 2, 3}.
pub fn region_bits(labels: &[u8], region: &str) -> Vec<bool> {
    labels
        .iter()
        .map(|&l| match region {
            "ET" => l == 3,
            "TC" => l == 1 || l == 3,
            "WT" => l != 0,
            _ => unreachable!(),
        })
        .collect()
}

use lesioneval::lesion::{connected_components, Connectivity};
use lesioneval::phantom::{generate_phantom, Perturbation, PhantomSpec};
use lesioneval::{compose_region, evaluate_case, EvalConfig, RegionKind};

/// A deterministic phantom spec on a grid of at most 32^3, cycling through
/// every perturbation kind.
pub fn oracle_spec(i: u64) -> PhantomSpec {
    let perturbations = [
        Perturbation::None,
        Perturbation::Erode,
        Perturbation::Dilate,
        Perturbation::Shift([2, -1, 1]),
        Perturbation::Shift([0, 4, 0]),
        Perturbation::DropRegion(RegionKind::Et),
        Perturbation::DropRegion(RegionKind::Tc),
        Perturbation::DropRegion(RegionKind::Wt),
        Perturbation::AddFalseBlob { count: 1, size: 4 },
        Perturbation::AddFalseBlob { count: 2, size: 3 },
    ];
    let sizes = [[32, 32, 32], [28, 30, 24], [24, 24, 32]];
    let spacings = [[1.0, 1.0, 1.0], [1.0, 1.25, 2.0], [0.5, 0.5, 1.5]];
    let k = i as usize;
    PhantomSpec {
        seed: i,
        dims: sizes[k % 3],
        spacing: spacings[(k / 3) % 3],
        n_lesions: 1 + (k / 7) % 2,
        radius_range: (2, 5),
        perturbation: perturbations[k % perturbations.len()],
    }
}

/// Runs the library and the reference on one phantom, returning a description
/// of the first disagreement.
pub fn check_phantom(spec: &PhantomSpec) -> Result<(), String> {
    let (gt, pred) = generate_phantom(spec).map_err(|e| format!("{spec}: {e}"))?;
    let dims = gt.dims();
    let spacing = gt.spacing();
    let cfg = EvalConfig::default();
    let metrics = evaluate_case(&gt, &pred, &cfg).map_err(|e| format!("{spec}: {e}"))?;
    for region in RegionKind::ALL {
        let name = region.as_str();
        let gt_bits = region_bits(gt.voxels(), name);
        let pred_bits = region_bits(pred.voxels(), name);

        for (label, bits, vol) in [("gt", &gt_bits, &gt), ("pred", &pred_bits, &pred)] {
            let mask = compose_region(vol, region);
            for conn in [Connectivity::Six, Connectivity::TwentySix] {
                let got: Vec<Vec<usize>> = connected_components(&mask, conn).into_iter().map(|c| c.voxels).collect();
                let want = components(bits, dims, conn.count() as usize);
                if got != want {
                    return Err(format!("{spec}: {name} {label} components differ at {conn}"));
                }
            }
        }

        let want = lesionwise(&gt_bits, &pred_bits, dims, spacing, Settings::default());
        let got = metrics.region(region);
        if (got.counts.tp, got.counts.fn_, got.counts.fp) != (want.tp, want.fn_, want.fp) {
            return Err(format!(
                "{spec}: {name} counts {:?} vs reference ({}, {}, {})",
                got.counts, want.tp, want.fn_, want.fp
            ));
        }
        if (got.lesionwise_dice - want.dice).abs() > 1e-9 {
            return Err(format!("{spec}: {name} dice {} vs {}", got.lesionwise_dice, want.dice));
        }
        if (got.lesionwise_hd95_mm - want.hd95).abs() > 1e-6 {
            return Err(format!("{spec}: {name} hd95 {} vs {}", got.lesionwise_hd95_mm, want.hd95));
        }
    }
    Ok(())
}

/// Aggregate statistics showing that a corpus exercises every branch.
#[derive(Debug, Default)]
pub struct Coverage {
    pub tp: usize,
    pub fn_: usize,
    pub fp: usize,
    pub partial_hd: usize,
    pub penalty_regions: usize,
    pub dropped_small: usize,
}

pub fn coverage(specs: impl IntoIterator<Item = PhantomSpec>) -> Coverage {
    let mut c = Coverage::default();
    let cfg = EvalConfig::default();
    for spec in specs {
        let (gt, pred) = generate_phantom(&spec).unwrap();
        let m = evaluate_case(&gt, &pred, &cfg).unwrap();
        for region in RegionKind::ALL {
            let r = m.region(region);
            c.tp += r.counts.tp;
            c.fn_ += r.counts.fn_;
            c.fp += r.counts.fp;
            if r.lesionwise_hd95_mm > 0.0 && r.lesionwise_hd95_mm < 374.0 {
                c.partial_hd += 1;
            }
            if r.gt_empty != r.pred_empty {
                c.penalty_regions += 1;
            }
            let mask = compose_region(&gt, region);
            c.dropped_small += connected_components(&mask, Connectivity::TwentySix)
                .iter()
                .filter(|l| l.voxel_count() < cfg.min_lesion_voxels)
                .count();
        }
    }
    c
}
