//! CSV interchange for metric tables, ranks and p-value matrices.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`; rounding happens only when rendering reports.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ranking::{MetricRecord, PairwiseMatrix, RankTable};

pub const METRICS_HEADER: [&str; 5] = ["team", "subject", "region", "metric", "value"];

pub fn read_metrics<R: Read>(reader: R) -> Result<Vec<MetricRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != METRICS_HEADER {
        return Err(Error::Format(format!(
            "metrics CSV header must be {}, got {}",
            METRICS_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn read_metrics_file(path: impl AsRef<Path>) -> Result<Vec<MetricRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_metrics(std::io::BufReader::new(file))
}

pub fn write_metrics<W: Write>(writer: W, records: &[MetricRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(METRICS_HEADER)?;
    for r in records {
        w.write_record([
            r.team.as_str(),
            r.subject.as_str(),
            r.region.as_str(),
            r.metric.as_str(),
            &r.value.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

/// `team,subject,cumulative_rank`, teams in FRS order.
pub fn write_ranks<W: Write>(writer: W, table: &RankTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["team", "subject", "cumulative_rank"])?;
    for &t in table.order() {
        for (s, subject) in table.subjects().iter().enumerate() {
            w.write_record([
                table.teams()[t].as_str(),
                subject.as_str(),
                &table.cumulative(t)[s].to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

/// `team,frs,rank`, ascending FRS.
pub fn write_frs<W: Write>(writer: W, table: &RankTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["team", "frs", "rank"])?;
    for (team, frs, place) in table.leaderboard() {
        w.write_record([team, frs.to_string(), place.to_string()])?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

/// Teams label both the header row and the first column; only cells above
/// the diagonal are filled.
pub fn write_pvalue_matrix<W: Write>(writer: W, teams: &[String], matrix: Option<&PairwiseMatrix>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![String::new()];
    header.extend(teams.iter().cloned());
    w.write_record(&header)?;
    for (i, team) in teams.iter().enumerate() {
        let mut row = vec![team.clone()];
        for j in 0..teams.len() {
            row.push(
                matrix
                    .and_then(|m| m.p_value(i, j))
                    .map(|p| p.to_string())
                    .unwrap_or_default(),
            );
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}
