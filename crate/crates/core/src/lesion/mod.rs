//! Lesion-wise Dice and HD95.
//!
//! Ground-truth lesions are the connected components of a region mask that
//! reach `min_lesion_voxels`. Each lesion is dilated to form a catchment, and
//! every surviving prediction component that touches the catchment is
//! assigned to it. Per-lesion scores compare the undilated lesion with the
//! union of its assigned components. The case score divides the sum of the
//! per-lesion scores by TP + FN + FP, with each unmatched lesion adding the
//! HD95 penalty to the numerator.

pub mod components;
pub mod config;
pub mod distance;
pub mod morphology;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use components::{connected_components, label_components, Connectivity, LesionComponent};
pub use config::EvalConfig;
pub use distance::{hd95, surface};
pub use morphology::{dilate, dilate_indices};

use crate::error::Result;
use crate::region::{compose_region, BinaryMask, RegionKind};
use crate::volume::{validate_pair, LabelVolume};

/// Scores for one ground-truth lesion. `pred_ids` is empty for a missed lesion.
#[derive(Debug, Clone, PartialEq)]
pub struct LesionMatch {
    pub gt_id: u32,
    pub pred_ids: Vec<u32>,
    pub dice: f64,
    pub hd95_mm: f64,
}

impl LesionMatch {
    pub fn is_detected(&self) -> bool {
        !self.pred_ids.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LesionCounts {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
}

impl LesionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LesionDecomposition {
    /// Ground-truth components that survived the size cutoff.
    pub gt_lesions: Vec<LesionComponent>,
    /// Prediction components that survived the size cutoff.
    pub pred_components: Vec<LesionComponent>,
    /// One entry per ground-truth lesion, in `gt_lesions` order.
    pub matches: Vec<LesionMatch>,
    pub counts: LesionCounts,
}

/// 2|a ∩ b| / (|a| + |b|) on ascending index lists; 1 when both are empty.
pub fn dice(a: &[usize], b: &[usize]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let common = intersection_count(a, b);
    2.0 * common as f64 / (a.len() + b.len()) as f64
}

/// Dice over two masks on the same grid.
pub fn dice_masks(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.geometry().ensure_compatible(b.geometry())?;
    let (mut common, mut na, mut nb) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        na += x as usize;
        nb += y as usize;
        common += (x && y) as usize;
    }
    if na + nb == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * common as f64 / (na + nb) as f64)
}

fn intersection_count(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Voxel-wise recall |gt ∩ pred| / |gt|; 1 when the ground truth is empty.
pub fn sensitivity(gt: &BinaryMask, pred: &BinaryMask) -> Result<f64> {
    gt.geometry().ensure_compatible(pred.geometry())?;
    let (mut hit, mut total) = (0usize, 0usize);
    for (&g, &p) in gt.bits().iter().zip(pred.bits()) {
        total += g as usize;
        hit += (g && p) as usize;
    }
    if total == 0 {
        return Ok(1.0);
    }
    Ok(hit as f64 / total as f64)
}

pub fn decompose_lesions(
    gt: &BinaryMask,
    pred: &BinaryMask,
    cfg: &EvalConfig,
) -> Result<LesionDecomposition> {
    let geometry = *gt.geometry();
    geometry.ensure_compatible(pred.geometry())?;

    let gt_lesions: Vec<LesionComponent> = connected_components(gt, cfg.connectivity)
        .into_iter()
        .filter(|c| c.voxel_count() >= cfg.min_lesion_voxels)
        .collect();

    let pred_labels = label_components(pred, cfg.connectivity);
    // kept[id] tells whether prediction component `id` survived the cutoff.
    let mut kept = vec![false; pred_labels.components.len() + 1];
    for c in &pred_labels.components {
        kept[c.id as usize] = !cfg.cutoff_applies_to_pred || c.voxel_count() >= cfg.min_lesion_voxels;
    }
    let mut used = vec![false; kept.len()];

    let mut matches = Vec::with_capacity(gt_lesions.len());
    for lesion in &gt_lesions {
        let catchment = dilate_indices(&geometry, &lesion.voxels, cfg.dilation_iterations);
        let mut pred_ids: Vec<u32> = catchment
            .iter()
            .map(|&i| pred_labels.labels[i])
            .filter(|&id| id != 0 && kept[id as usize])
            .collect();
        pred_ids.sort_unstable();
        pred_ids.dedup();

        if pred_ids.is_empty() {
            matches.push(LesionMatch {
                gt_id: lesion.id,
                pred_ids,
                dice: 0.0,
                hd95_mm: cfg.unmatched_lesion_hd95_mm,
            });
            continue;
        }
        for &id in &pred_ids {
            used[id as usize] = true;
        }
        let mut assigned: Vec<usize> = pred_ids
            .iter()
            .flat_map(|&id| pred_labels.components[id as usize - 1].voxels.iter().copied())
            .collect();
        assigned.sort_unstable();
        let lesion_dice = dice(&lesion.voxels, &assigned);
        let lesion_hd = hd95(&lesion.voxels, &assigned, &geometry, cfg.hd_percentile)?;
        matches.push(LesionMatch {
            gt_id: lesion.id,
            pred_ids,
            dice: lesion_dice,
            hd95_mm: lesion_hd,
        });
    }

    let pred_components: Vec<LesionComponent> = pred_labels
        .components
        .into_iter()
        .filter(|c| kept[c.id as usize])
        .collect();
    let tp = matches.iter().filter(|m| m.is_detected()).count();
    let fn_ = matches.len() - tp;
    let fp = pred_components.iter().filter(|c| !used[c.id as usize]).count();

    Ok(LesionDecomposition {
        gt_lesions,
        pred_components,
        matches,
        counts: LesionCounts { tp, fn_, fp },
    })
}

/// Sum of per-lesion Dice over TP + FN + FP; 1 when there is nothing to count.
pub fn lesionwise_dice(d: &LesionDecomposition) -> f64 {
    let total = d.counts.total();
    if total == 0 {
        return 1.0;
    }
    let sum: f64 = d.matches.iter().filter(|m| m.is_detected()).map(|m| m.dice).sum();
    sum / total as f64
}

/// Sum of per-lesion HD95 plus the unmatched penalty per FN and FP, over
/// TP + FN + FP; 0 when there is nothing to count.
pub fn lesionwise_hd95(d: &LesionDecomposition, cfg: &EvalConfig) -> f64 {
    let total = d.counts.total();
    if total == 0 {
        return 0.0;
    }
    let matched: f64 = d.matches.iter().filter(|m| m.is_detected()).map(|m| m.hd95_mm).sum();
    let penalty = cfg.unmatched_lesion_hd95_mm * (d.counts.fn_ + d.counts.fp) as f64;
    (matched + penalty) / total as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMetrics {
    pub lesionwise_dice: f64,
    pub lesionwise_hd95_mm: f64,
    pub volumewise_dice: f64,
    pub sensitivity: f64,
    #[serde(flatten)]
    pub counts: LesionCounts,
    pub gt_empty: bool,
    pub pred_empty: bool,
}

/// Per-region results for one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CaseMetrics {
    pub regions: BTreeMap<RegionKind, RegionMetrics>,
}

impl CaseMetrics {
    pub fn region(&self, region: RegionKind) -> &RegionMetrics {
        &self.regions[&region]
    }
}

pub fn evaluate_region(gt: &BinaryMask, pred: &BinaryMask, cfg: &EvalConfig) -> Result<RegionMetrics> {
    gt.geometry().ensure_compatible(pred.geometry())?;
    let gt_empty = gt.is_empty();
    let pred_empty = pred.is_empty();
    let volumewise_dice = dice_masks(gt, pred)?;
    let sens = sensitivity(gt, pred)?;

    if gt_empty && pred_empty {
        return Ok(RegionMetrics {
            lesionwise_dice: 1.0,
            lesionwise_hd95_mm: 0.0,
            volumewise_dice,
            sensitivity: sens,
            counts: LesionCounts::default(),
            gt_empty,
            pred_empty,
        });
    }

    let decomposition = decompose_lesions(gt, pred, cfg)?;
    let (lw_dice, lw_hd) = if gt_empty || pred_empty {
        (0.0, cfg.missing_region_hd95_mm)
    } else {
        (lesionwise_dice(&decomposition), lesionwise_hd95(&decomposition, cfg))
    };
    Ok(RegionMetrics {
        lesionwise_dice: lw_dice,
        lesionwise_hd95_mm: lw_hd,
        volumewise_dice,
        sensitivity: sens,
        counts: decomposition.counts,
        gt_empty,
        pred_empty,
    })
}

pub fn evaluate_case(gt_vol: &LabelVolume, pred_vol: &LabelVolume, cfg: &EvalConfig) -> Result<CaseMetrics> {
    cfg.validate()?;
    validate_pair(gt_vol, pred_vol)?;
    let mut regions = BTreeMap::new();
    for region in RegionKind::ALL {
        let gt = compose_region(gt_vol, region);
        let pred = compose_region(pred_vol, region);
        regions.insert(region, evaluate_region(&gt, &pred, cfg)?);
    }
    Ok(CaseMetrics { regions })
}
