//! Per-team `mean ± std (median)` summaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ranking::{MetricKind, MetricRecord};
use crate::region::RegionKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StdMode {
    /// Divide by N.
    #[default]
    Population,
    /// Divide by N - 1 (0 for a single value).
    Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub team: String,
    pub region: RegionKind,
    pub metric: MetricKind,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub n: usize,
}

impl SummaryRow {
    /// `M ± S (Md)` with two decimals, half-up.
    pub fn render(&self) -> String {
        format!(
            "{} ± {} ({})",
            format_half_up(self.mean, 2),
            format_half_up(self.std, 2),
            format_half_up(self.median, 2)
        )
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn std_dev(values: &[f64], mode: StdMode) -> f64 {
    let n = values.len();
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    match mode {
        StdMode::Population => (ss / n as f64).sqrt(),
        StdMode::Sample if n > 1 => (ss / (n - 1) as f64).sqrt(),
        StdMode::Sample => 0.0,
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// One row per (team, region, metric), sorted by those keys.
pub fn summarize(records: &[MetricRecord], mode: StdMode) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::Usage("no metric rows to summarize".into()));
    }
    let mut groups: BTreeMap<(&str, RegionKind, MetricKind), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.team.as_str(), r.region, r.metric))
            .or_default()
            .push(r.value);
    }
    Ok(groups
        .into_iter()
        .map(|((team, region, metric), values)| SummaryRow {
            team: team.to_string(),
            region,
            metric,
            mean: mean(&values),
            std: std_dev(&values, mode),
            median: median(&values),
            n: values.len(),
        })
        .collect())
}

/// Rounds half away from zero on the shortest decimal form of `x`, so
/// 0.125 renders as 0.13 and 1.005 as 1.01.
pub fn format_half_up(x: f64, decimals: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let text = format!("{}", x.abs());
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    let mut digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
    let frac: Vec<u8> = frac_part.bytes().map(|b| b - b'0').collect();
    for k in 0..decimals {
        digits.push(frac.get(k).copied().unwrap_or(0));
    }
    if frac.get(decimals).is_some_and(|&d| d >= 5) {
        let mut k = digits.len();
        loop {
            if k == 0 {
                digits.insert(0, 1);
                break;
            }
            k -= 1;
            if digits[k] == 9 {
                digits[k] = 0;
            } else {
                digits[k] += 1;
                break;
            }
        }
    }
    let (i, f) = digits.split_at(digits.len() - decimals);
    let mut out = String::new();
    if x < 0.0 && digits.iter().any(|&d| d != 0) {
        out.push('-');
    }
    for d in i {
        out.push(char::from(b'0' + d));
    }
    if decimals > 0 {
        out.push('.');
        for d in f {
            out.push(char::from(b'0' + d));
        }
    }
    out
}

/// Markdown tables, one per region, with Dice / HD95 / Sensitivity columns per team.
pub fn render_markdown(rows: &[SummaryRow]) -> String {
    let mut cells: BTreeMap<(RegionKind, &str, MetricKind), String> = BTreeMap::new();
    let mut teams: Vec<&str> = Vec::new();
    for r in rows {
        if !teams.contains(&r.team.as_str()) {
            teams.push(&r.team);
        }
        cells.insert((r.region, r.team.as_str(), r.metric), r.render());
    }
    let mut out = String::new();
    for region in RegionKind::ALL {
        if !cells.keys().any(|k| k.0 == region) {
            continue;
        }
        if !out.is_empty() {
            out.push('\n');
        }
        writeln!(out, "### {region}\n").unwrap();
        out.push_str("| Team | Dice Similarity Coefficient | 95% Hausdorff Distance | Sensitivity |\n");
        out.push_str("|---|---|---|---|\n");
        for team in &teams {
            let cell = |m| cells.get(&(region, *team, m)).map(String::as_str).unwrap_or("n/a");
            writeln!(
                out,
                "| {team} | {} | {} | {} |",
                cell(MetricKind::Dice),
                cell(MetricKind::Hd95),
                cell(MetricKind::Sensitivity)
            )
            .unwrap();
        }
    }
    out
}

pub fn write_summary_csv<W: Write>(writer: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["team", "region", "metric", "mean", "std", "median", "n", "formatted"])?;
    for r in rows {
        w.write_record([
            r.team.clone(),
            r.region.to_string(),
            r.metric.to_string(),
            r.mean.to_string(),
            r.std.to_string(),
            r.median.to_string(),
            r.n.to_string(),
            r.render(),
        ])?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(values: &[f64]) -> SummaryRow {
        SummaryRow {
            team: "t".into(),
            region: RegionKind::Et,
            metric: MetricKind::Dice,
            mean: mean(values),
            std: std_dev(values, StdMode::Population),
            median: median(values),
            n: values.len(),
        }
    }

    #[test]
    fn rendering_examples() {
        assert_eq!(row(&[1.0, 1.0, 1.0]).render(), "1.00 ± 0.00 (1.00)");
        assert_eq!(row(&[0.0, 0.5, 1.0]).render(), "0.50 ± 0.41 (0.50)");
        assert!((std_dev(&[0.0, 0.5, 1.0], StdMode::Population) - (1.0f64 / 6.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sample_std() {
        assert!((std_dev(&[0.0, 0.5, 1.0], StdMode::Sample) - 0.5).abs() < 1e-15);
        assert_eq!(std_dev(&[3.0], StdMode::Sample), 0.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn half_up() {
        assert_eq!(format_half_up(0.125, 2), "0.13");
        assert_eq!(format_half_up(1.005, 2), "1.01");
        assert_eq!(format_half_up(0.994, 2), "0.99");
        assert_eq!(format_half_up(0.995, 2), "1.00");
        assert_eq!(format_half_up(99.999, 2), "100.00");
        assert_eq!(format_half_up(374.0, 2), "374.00");
        assert_eq!(format_half_up(-2.345, 2), "-2.35");
        assert_eq!(format_half_up(-0.001, 2), "0.00");
        assert_eq!(format_half_up(0.0, 2), "0.00");
        assert_eq!(format_half_up(2.5, 0), "3");
        assert_eq!(format_half_up(1e-7, 2), "0.00");
    }

    #[test]
    fn markdown_layout() {
        let recs = vec![
            MetricRecord { team: "A".into(), subject: "s".into(), region: RegionKind::Et, metric: MetricKind::Dice, value: 0.5 },
            MetricRecord { team: "A".into(), subject: "s".into(), region: RegionKind::Et, metric: MetricKind::Hd95, value: 4.0 },
        ];
        let md = render_markdown(&summarize(&recs, StdMode::Population).unwrap());
        assert!(md.contains("| Team | Dice Similarity Coefficient | 95% Hausdorff Distance | Sensitivity |"));
        assert!(md.contains("| A | 0.50 ± 0.00 (0.50) | 4.00 ± 0.00 (4.00) | n/a |"), "{md}");
        assert!(summarize(&[], StdMode::Population).is_err());
    }
}
