//! Evaluating every team against every ground-truth case.
//!
//! Layout: `gt_dir/<case>` holds the reference volumes and
//! `teams_dir/<team>/<case>` the predictions, with identical file names.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{read_label_volume, subject_stem, VolumeFormat};
use crate::lesion::{evaluate_case, CaseMetrics, EvalConfig};
use crate::ranking::{MetricKind, MetricRecord};
use crate::region::RegionKind;
use crate::volume::LabelVolume;

#[derive(Debug, Clone, Default)]
pub struct BatchOptions {
    pub config: EvalConfig,
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
    pub with_sensitivity: bool,
}

/// A prediction that was absent and scored as empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingPrediction {
    pub team: String,
    pub subject: String,
    pub expected_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    /// Sorted by team, subject, region, metric.
    pub records: Vec<MetricRecord>,
    pub missing: Vec<MissingPrediction>,
}

/// Metric rows for one evaluated case.
pub fn case_records(team: &str, subject: &str, m: &CaseMetrics, with_sensitivity: bool) -> Vec<MetricRecord> {
    let mut out = Vec::new();
    for region in RegionKind::ALL {
        let r = m.region(region);
        let mut push = |metric, value| {
            out.push(MetricRecord {
                team: team.to_string(),
                subject: subject.to_string(),
                region,
                metric,
                value,
            })
        };
        push(MetricKind::Dice, r.lesionwise_dice);
        push(MetricKind::Hd95, r.lesionwise_hd95_mm);
        if with_sensitivity {
            push(MetricKind::Sensitivity, r.sensitivity);
        }
    }
    out
}

fn sorted_entries(dir: &Path, want_dirs: bool) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if want_dirs == path.is_dir() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn evaluate_subject(
    gt_path: &Path,
    teams: &[PathBuf],
    opts: &BatchOptions,
) -> Result<(Vec<MetricRecord>, Vec<MissingPrediction>)> {
    let subject = subject_stem(gt_path).unwrap_or_else(|| file_name(gt_path));
    let gt = read_label_volume(gt_path)?;
    let mut records = Vec::new();
    let mut missing = Vec::new();
    for team_dir in teams {
        let team = file_name(team_dir);
        let pred_path = team_dir.join(gt_path.file_name().unwrap_or_default());
        let pred = if pred_path.is_file() {
            read_label_volume(&pred_path)?
        } else {
            missing.push(MissingPrediction {
                team: team.clone(),
                subject: subject.clone(),
                expected_path: pred_path.clone(),
            });
            LabelVolume::zeros(*gt.geometry())
        };
        let metrics = evaluate_case(&gt, &pred, &opts.config)?;
        records.extend(case_records(&team, &subject, &metrics, opts.with_sensitivity));
    }
    Ok((records, missing))
}

pub fn run_batch(gt_dir: &Path, teams_dir: &Path, opts: &BatchOptions) -> Result<BatchOutcome> {
    opts.config.validate()?;
    let gt_files: Vec<PathBuf> = sorted_entries(gt_dir, false)?
        .into_iter()
        .filter(|p| VolumeFormat::from_path(p).is_some())
        .collect();
    if gt_files.is_empty() {
        return Err(Error::Usage(format!("no volumes found in {}", gt_dir.display())));
    }
    let teams = sorted_entries(teams_dir, true)?;
    if teams.is_empty() {
        return Err(Error::Usage(format!("no team directories in {}", teams_dir.display())));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let per_subject: Vec<_> = pool.install(|| {
        use rayon::prelude::*;
        gt_files
            .par_iter()
            .map(|gt| evaluate_subject(gt, &teams, opts))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut records = Vec::new();
    let mut missing = Vec::new();
    for (r, m) in per_subject {
        records.extend(r);
        missing.extend(m);
    }
    records.sort_by(|a, b| {
        (&a.team, &a.subject, a.region, a.metric).cmp(&(&b.team, &b.subject, b.region, b.metric))
    });
    missing.sort_by(|a, b| (&a.team, &a.subject).cmp(&(&b.team, &b.subject)));
    Ok(BatchOutcome { records, missing })
}

/// One line per missing prediction.
pub fn render_missing_log(missing: &[MissingPrediction]) -> String {
    missing
        .iter()
        .map(|m| format!("missing prediction: team={} subject={} path={}\n", m.team, m.subject, m.expected_path.display()))
        .collect()
}
