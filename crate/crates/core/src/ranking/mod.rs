//! Per-subject rank aggregation into final ranking scores.
//!
//! Every (subject, region, metric) tuple ranks the teams against each other,
//! with ties sharing the average of the ranks they span. A team's cumulative
//! rank for a subject combines its six individual ranks, and its final
//! ranking score (FRS) is the mean cumulative rank over subjects. Lower is
//! better throughout.

pub mod permutation;
pub mod table_io;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use permutation::{pairwise_matrix, permutation_test, PairwiseMatrix, PermutationOptions, PermutationResult};

use crate::error::{Error, Result};
use crate::region::RegionKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Dice,
    Hd95,
    /// Reported in summaries only; never ranked.
    Sensitivity,
}

impl MetricKind {
    pub const RANKED: [MetricKind; 2] = [MetricKind::Dice, MetricKind::Hd95];

    pub fn higher_is_better(self) -> bool {
        !matches!(self, MetricKind::Hd95)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Dice => "dice",
            MetricKind::Hd95 => "hd95",
            MetricKind::Sensitivity => "sensitivity",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dice" => Ok(MetricKind::Dice),
            "hd95" => Ok(MetricKind::Hd95),
            "sensitivity" => Ok(MetricKind::Sensitivity),
            _ => Err(Error::Usage(format!(
                "unknown metric {s:?}, expected dice, hd95 or sensitivity"
            ))),
        }
    }
}

/// One row of the metrics CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub team: String,
    pub subject: String,
    pub region: RegionKind,
    pub metric: MetricKind,
    pub value: f64,
}

const SLOTS: usize = 6;

#[inline]
fn slot(region: RegionKind, metric: MetricKind) -> usize {
    let r = RegionKind::ALL.iter().position(|&x| x == region).unwrap();
    let m = MetricKind::RANKED.iter().position(|&x| x == metric).unwrap();
    r * 2 + m
}

/// Dice and HD95 for every (team, subject, region). Teams and subjects are
/// kept in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    teams: Vec<String>,
    subjects: Vec<String>,
    /// [team][subject][slot]
    values: Vec<f64>,
}

impl MetricTable {
    /// Builds a complete table. Sensitivity rows are ignored.
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a MetricRecord>) -> Result<Self> {
        let mut cells: BTreeMap<(&str, &str, usize), f64> = BTreeMap::new();
        let mut teams = BTreeSet::new();
        let mut subjects = BTreeSet::new();
        for r in records {
            if r.metric == MetricKind::Sensitivity {
                continue;
            }
            if !r.value.is_finite() {
                return Err(Error::Contract(format!(
                    "non-finite value {} for ({}, {}, {}, {})",
                    r.value, r.team, r.subject, r.region, r.metric
                )));
            }
            teams.insert(r.team.as_str());
            subjects.insert(r.subject.as_str());
            let key = (r.team.as_str(), r.subject.as_str(), slot(r.region, r.metric));
            if cells.insert(key, r.value).is_some() {
                return Err(Error::DuplicateEntry(format!(
                    "({}, {}, {}, {})",
                    r.team, r.subject, r.region, r.metric
                )));
            }
        }
        if teams.is_empty() {
            return Err(Error::Usage("metric table has no dice/hd95 rows".into()));
        }

        let mut values = Vec::with_capacity(teams.len() * subjects.len() * SLOTS);
        let mut missing = Vec::new();
        for &team in &teams {
            for &subject in &subjects {
                for region in RegionKind::ALL {
                    for metric in MetricKind::RANKED {
                        match cells.get(&(team, subject, slot(region, metric))) {
                            Some(&v) => values.push(v),
                            None => {
                                missing.push(format!("({team}, {subject}, {region}, {metric})"));
                                values.push(f64::NAN);
                            }
                        }
                    }
                }
            }
        }
        if !missing.is_empty() {
            let shown = missing.iter().take(10).cloned().collect::<Vec<_>>().join(", ");
            let more = if missing.len() > 10 {
                format!(" and {} more", missing.len() - 10)
            } else {
                String::new()
            };
            return Err(Error::IncompleteTable(format!("{shown}{more}")));
        }
        Ok(MetricTable {
            teams: teams.into_iter().map(str::to_string).collect(),
            subjects: subjects.into_iter().map(str::to_string).collect(),
            values,
        })
    }

    pub fn teams(&self) -> &[String] {
        &self.teams
    }

    pub fn subjects(&self) -> &[String] {
        &self.subjects
    }

    pub fn value(&self, team: usize, subject: usize, region: RegionKind, metric: MetricKind) -> f64 {
        self.values[(team * self.subjects.len() + subject) * SLOTS + slot(region, metric)]
    }

    /// Applies `f` to every value of one metric; used to probe rank invariance.
    pub fn map_metric(&self, metric: MetricKind, f: impl Fn(f64) -> f64) -> MetricTable {
        let mut out = self.clone();
        let Some(m) = MetricKind::RANKED.iter().position(|&k| k == metric) else {
            return out;
        };
        // slot = region * 2 + metric
        for (i, v) in out.values.iter_mut().enumerate() {
            if i % 2 == m {
                *v = f(*v);
            }
        }
        out
    }
}

/// Fractional ranks, 1 = best, ties averaged.
pub fn rank_values(values: &[f64], higher_is_better: bool) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Contract("cannot rank an empty list".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Contract(format!("cannot rank non-finite value {v}")));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let c = values[a].total_cmp(&values[b]);
        if higher_is_better {
            c.reverse()
        } else {
            c
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end share their mean.
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    Ok(ranks)
}

/// How the six individual ranks of a subject become one cumulative rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingMode {
    /// Mean of all six ranks.
    MeanOf6,
    /// Sum of all six ranks.
    SumOf6,
    /// Mean over the two metrics, summed over the three regions.
    #[default]
    RegionSumMetricMean,
}

impl ScalingMode {
    pub const ALL: [ScalingMode; 3] = [
        ScalingMode::MeanOf6,
        ScalingMode::SumOf6,
        ScalingMode::RegionSumMetricMean,
    ];

    fn divisor(self) -> f64 {
        match self {
            ScalingMode::MeanOf6 => 6.0,
            ScalingMode::SumOf6 => 1.0,
            ScalingMode::RegionSumMetricMean => 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScalingMode::MeanOf6 => "mean-of-6",
            ScalingMode::SumOf6 => "sum-of-6",
            ScalingMode::RegionSumMetricMean => "region-sum-metric-mean",
        }
    }
}

impl FromStr for ScalingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScalingMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown scaling mode {s:?}, expected mean-of-6, sum-of-6 or region-sum-metric-mean"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    teams: Vec<String>,
    subjects: Vec<String>,
    /// [team][subject][slot]; empty when built from cumulative ranks directly.
    individual: Vec<f64>,
    /// [team][subject]
    cumulative: Vec<Vec<f64>>,
    frs: Vec<f64>,
    order: Vec<usize>,
    scaling: ScalingMode,
}

impl RankTable {
    /// Builds a table from per-subject cumulative ranks, e.g. to re-score
    /// known totals. `cumulative[t][s]` belongs to `teams[t]`, `subjects[s]`.
    pub fn from_cumulative(
        teams: Vec<String>,
        subjects: Vec<String>,
        cumulative: Vec<Vec<f64>>,
        scaling: ScalingMode,
    ) -> Result<Self> {
        if teams.is_empty() || subjects.is_empty() {
            return Err(Error::Contract("rank table needs at least one team and subject".into()));
        }
        if cumulative.len() != teams.len() || cumulative.iter().any(|c| c.len() != subjects.len()) {
            return Err(Error::Contract("cumulative rank matrix does not match teams x subjects".into()));
        }
        if cumulative.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Contract("non-finite cumulative rank".into()));
        }
        let n = subjects.len() as f64;
        let frs: Vec<f64> = cumulative.iter().map(|c| c.iter().sum::<f64>() / n).collect();
        Ok(Self::assemble(teams, subjects, cumulative, frs, scaling))
    }

    fn assemble(
        teams: Vec<String>,
        subjects: Vec<String>,
        cumulative: Vec<Vec<f64>>,
        frs: Vec<f64>,
        scaling: ScalingMode,
    ) -> Self {
        let mut order: Vec<usize> = (0..teams.len()).collect();
        order.sort_by(|&a, &b| frs[a].total_cmp(&frs[b]).then(teams[a].cmp(&teams[b])));
        RankTable {
            teams,
            subjects,
            individual: Vec::new(),
            cumulative,
            frs,
            order,
            scaling,
        }
    }

    pub fn teams(&self) -> &[String] {
        &self.teams
    }

    pub fn subjects(&self) -> &[String] {
        &self.subjects
    }

    pub fn scaling(&self) -> ScalingMode {
        self.scaling
    }

    pub fn team_index(&self, team: &str) -> Result<usize> {
        self.teams
            .iter()
            .position(|t| t == team)
            .ok_or_else(|| Error::UnknownTeam(team.to_string()))
    }

    pub fn individual_rank(&self, team: usize, subject: usize, region: RegionKind, metric: MetricKind) -> Option<f64> {
        self.individual
            .get((team * self.subjects.len() + subject) * SLOTS + slot(region, metric))
            .copied()
    }

    pub fn cumulative(&self, team: usize) -> &[f64] {
        &self.cumulative[team]
    }

    pub fn frs(&self, team: usize) -> f64 {
        self.frs[team]
    }

    /// Team indices by ascending FRS (name breaks exact ties).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// (team, FRS, place) by ascending FRS. Equal scores share the better place.
    pub fn leaderboard(&self) -> Vec<(String, f64, usize)> {
        let mut out: Vec<(String, f64, usize)> = Vec::with_capacity(self.teams.len());
        for (pos, &t) in self.order.iter().enumerate() {
            let place = match out.last() {
                Some((_, prev, place)) if *prev == self.frs[t] => *place,
                _ => pos + 1,
            };
            out.push((self.teams[t].clone(), self.frs[t], place));
        }
        out
    }
}

pub fn build_rank_table(m: &MetricTable, scaling: ScalingMode) -> Result<RankTable> {
    let nt = m.teams.len();
    let ns = m.subjects.len();
    let mut individual = vec![0.0; nt * ns * SLOTS];
    let mut column = vec![0.0; nt];
    for s in 0..ns {
        for region in RegionKind::ALL {
            for metric in MetricKind::RANKED {
                for (t, v) in column.iter_mut().enumerate() {
                    *v = m.value(t, s, region, metric);
                }
                let ranks = rank_values(&column, metric.higher_is_better())?;
                for (t, r) in ranks.into_iter().enumerate() {
                    individual[(t * ns + s) * SLOTS + slot(region, metric)] = r;
                }
            }
        }
    }
    // Unscaled sums are multiples of 0.5 and add exactly, so equal totals
    // give equal scores under every scaling mode.
    let raw: Vec<Vec<f64>> = (0..nt)
        .map(|t| {
            (0..ns)
                .map(|s| {
                    let base = (t * ns + s) * SLOTS;
                    individual[base..base + SLOTS].iter().sum::<f64>()
                })
                .collect()
        })
        .collect();
    let frs = raw
        .iter()
        .map(|c| c.iter().sum::<f64>() / (scaling.divisor() * ns as f64))
        .collect();
    let cumulative = raw
        .into_iter()
        .map(|c| c.into_iter().map(|v| v / scaling.divisor()).collect())
        .collect();
    let mut table = RankTable::assemble(m.teams.clone(), m.subjects.clone(), cumulative, frs, scaling);
    table.individual = individual;
    Ok(table)
}

/// Fixed two-decimal rendering that truncates toward zero, the convention of
/// reference leaderboards (286.5 / 24 = 11.9375 is shown as 11.93).
pub fn format_frs(frs: f64) -> String {
    let scaled = (frs * 100.0).abs();
    // Absorb representation error such as 12.1 * 100 = 1209.9999999999998.
    let cents = (scaled + 1e-7).trunc() as u64;
    let sign = if frs < 0.0 && cents > 0 { "-" } else { "" };
    format!("{sign}{}.{:02}", cents / 100, cents % 100)
}
