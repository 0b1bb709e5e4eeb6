//! Per-team box plots rendered as standalone SVG.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ranking::{MetricKind, MetricRecord};
use crate::region::RegionKind;

#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Most extreme values within 1.5 IQR of the box.
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub outliers: Vec<f64>,
}

/// Linear interpolation between order statistics (h = (n - 1) p).
pub fn quantile_linear(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn box_stats(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::Contract("box statistics need at least one value".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q1 = quantile_linear(&v, 0.25);
    let q3 = quantile_linear(&v, 0.75);
    let fence = 1.5 * (q3 - q1);
    let (lo_fence, hi_fence) = (q1 - fence, q3 + fence);
    let inside: Vec<f64> = v.iter().copied().filter(|x| (lo_fence..=hi_fence).contains(x)).collect();
    Ok(BoxStats {
        q1,
        median: quantile_linear(&v, 0.5),
        q3,
        whisker_lo: inside.first().copied().unwrap_or(q1),
        whisker_hi: inside.last().copied().unwrap_or(q3),
        outliers: v.iter().copied().filter(|x| !(lo_fence..=hi_fence).contains(x)).collect(),
    })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const WIDTH_PER_BOX: f64 = 60.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_TOP: f64 = 30.0;
const PLOT_HEIGHT: f64 = 300.0;

/// One `<g class="box">` per team, in the given order.
pub fn render_svg(title: &str, groups: &[(String, BoxStats)]) -> String {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, b) in groups {
        for x in [b.whisker_lo, b.whisker_hi, b.q1, b.q3].iter().chain(&b.outliers) {
            lo = lo.min(*x);
            hi = hi.max(*x);
        }
    }
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 1.0;
        hi += 1.0;
    }
    let y = |v: f64| MARGIN_TOP + PLOT_HEIGHT * (hi - v) / (hi - lo);
    let width = MARGIN_LEFT + WIDTH_PER_BOX * groups.len() as f64 + 20.0;
    let height = MARGIN_TOP + PLOT_HEIGHT + 50.0;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    writeln!(s, r#"<title>{}</title>"#, escape(title)).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        width / 2.0,
        escape(title)
    )
    .unwrap();
    writeln!(
        s,
        r#"<line class="axis" x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{}" stroke="black"/>"#,
        MARGIN_TOP + PLOT_HEIGHT
    )
    .unwrap();
    for (v, label) in [(hi, hi), (lo, lo)] {
        writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="10">{label:.3}</text>"#,
            MARGIN_LEFT - 4.0,
            y(v) + 3.0
        )
        .unwrap();
    }
    for (k, (team, b)) in groups.iter().enumerate() {
        let cx = MARGIN_LEFT + WIDTH_PER_BOX * (k as f64 + 0.5);
        let half = WIDTH_PER_BOX * 0.3;
        writeln!(
            s,
            r#"<g class="box" data-team="{}" data-q1="{}" data-median="{}" data-q3="{}" data-whisker-lo="{}" data-whisker-hi="{}">"#,
            escape(team),
            b.q1,
            b.median,
            b.q3,
            b.whisker_lo,
            b.whisker_hi
        )
        .unwrap();
        writeln!(
            s,
            r#"<line class="whisker" x1="{cx}" y1="{:.2}" x2="{cx}" y2="{:.2}" stroke="black"/>"#,
            y(b.whisker_hi),
            y(b.q3)
        )
        .unwrap();
        writeln!(
            s,
            r#"<line class="whisker" x1="{cx}" y1="{:.2}" x2="{cx}" y2="{:.2}" stroke="black"/>"#,
            y(b.q1),
            y(b.whisker_lo)
        )
        .unwrap();
        writeln!(
            s,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#cfe2f3" stroke="black"/>"##,
            cx - half,
            y(b.q3),
            2.0 * half,
            (y(b.q1) - y(b.q3)).max(0.0)
        )
        .unwrap();
        writeln!(
            s,
            r#"<line class="median" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            y(b.median),
            cx + half,
            y(b.median)
        )
        .unwrap();
        for o in &b.outliers {
            writeln!(
                s,
                r#"<circle class="outlier" cx="{cx}" cy="{:.2}" r="2.5" data-value="{o}" fill="none" stroke="black"/>"#,
                y(*o)
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{cx}" y="{}" text-anchor="middle" font-size="10">{}</text>"#,
            MARGIN_TOP + PLOT_HEIGHT + 16.0,
            escape(team)
        )
        .unwrap();
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

/// Box plot of one region/metric with one box per team, teams sorted by name.
pub fn boxplot_svg(records: &[MetricRecord], region: RegionKind, metric: MetricKind) -> Result<String> {
    let mut per_team: std::collections::BTreeMap<&str, Vec<f64>> = Default::default();
    for r in records.iter().filter(|r| r.region == region && r.metric == metric) {
        per_team.entry(&r.team).or_default().push(r.value);
    }
    if per_team.is_empty() {
        return Err(Error::Usage(format!("no {metric} values for region {region}")));
    }
    let groups = per_team
        .into_iter()
        .map(|(team, values)| Ok((team.to_string(), box_stats(&values)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(render_svg(&format!("{region} {metric}"), &groups))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_linear(&v, 0.25), 1.75);
        assert_eq!(quantile_linear(&v, 0.5), 2.5);
        assert_eq!(quantile_linear(&v, 0.75), 3.25);
        assert_eq!(quantile_linear(&[7.0], 0.5), 7.0);
    }

    #[test]
    fn outliers_beyond_fences() {
        let b = box_stats(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (2.0, 3.0, 4.0));
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!((b.whisker_lo, b.whisker_hi), (1.0, 4.0));
        assert!(box_stats(&[]).is_err());
    }

    #[test]
    fn svg_groups_and_determinism() {
        let recs: Vec<MetricRecord> = ["b", "a<&>"]
            .iter()
            .flat_map(|t| {
                (0..5).map(move |i| MetricRecord {
                    team: t.to_string(),
                    subject: format!("s{i}"),
                    region: RegionKind::Wt,
                    metric: MetricKind::Dice,
                    value: i as f64 / 4.0,
                })
            })
            .collect();
        let svg = boxplot_svg(&recs, RegionKind::Wt, MetricKind::Dice).unwrap();
        assert_eq!(svg.matches(r#"<g class="box""#).count(), 2);
        assert!(svg.contains("a&lt;&amp;&gt;"));
        assert_eq!(svg, boxplot_svg(&recs, RegionKind::Wt, MetricKind::Dice).unwrap());
        assert!(boxplot_svg(&recs, RegionKind::Et, MetricKind::Dice).is_err());
    }
}
