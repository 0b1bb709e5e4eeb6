//! Plain-text debug volumes: `RAWVOL nx ny nz sx sy sz` followed by the labels.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::volume::{GridGeometry, LabelVolume};

pub const MAGIC: &str = "RAWVOL";

pub fn parse(text: &str) -> Result<LabelVolume> {
    let mut tokens = text.split_ascii_whitespace();
    match tokens.next() {
        Some(MAGIC) => {}
        other => {
            return Err(Error::Format(format!(
                "expected {MAGIC} header, found {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        let tok = tokens
            .next()
            .ok_or_else(|| Error::Format("truncated RAWVOL header".into()))?;
        *d = tok
            .parse()
            .map_err(|_| Error::Format(format!("bad dimension {tok:?}")))?;
    }
    let mut spacing = [0f64; 3];
    for s in spacing.iter_mut() {
        let tok = tokens
            .next()
            .ok_or_else(|| Error::Format("truncated RAWVOL header".into()))?;
        *s = tok
            .parse()
            .map_err(|_| Error::Format(format!("bad spacing {tok:?}")))?;
    }
    let geometry = GridGeometry::new(dims, spacing).map_err(|e| Error::Format(e.to_string()))?;

    let mut voxels = Vec::with_capacity(geometry.len());
    for tok in tokens {
        let index = voxels.len();
        if index >= geometry.len() {
            return Err(Error::Format(format!(
                "more than {} voxel values",
                geometry.len()
            )));
        }
        let value: i64 = tok.parse().map_err(|_| {
            match tok.parse::<f64>() {
                Ok(v) if !v.is_finite() => Error::Format(format!("non-finite value at voxel {index}")),
                Ok(v) => Error::LabelDomain { value: v, index },
                Err(_) => Error::Format(format!("bad voxel value {tok:?} at voxel {index}")),
            }
        })?;
        if !(0..=3).contains(&value) {
            return Err(Error::LabelDomain {
                value: value as f64,
                index,
            });
        }
        voxels.push(value as u8);
    }
    if voxels.len() != geometry.len() {
        return Err(Error::Format(format!(
            "{} voxel values, expected {}",
            voxels.len(),
            geometry.len()
        )));
    }
    LabelVolume::new(geometry, voxels)
}

/// One x-row per line. Spacing uses the shortest round-trip representation.
pub fn render(vol: &LabelVolume) -> String {
    let [nx, ny, nz] = vol.dims();
    let [sx, sy, sz] = vol.spacing();
    let mut out = String::with_capacity(vol.voxels().len() * 2 + 64);
    writeln!(out, "{MAGIC} {nx} {ny} {nz} {sx:?} {sy:?} {sz:?}").unwrap();
    for row in vol.voxels().chunks(nx) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push(char::from(b'0' + v));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fixture() {
        let vol = parse("RAWVOL 2 2 1 1 1 2.5\n0 1\n2 3\n").unwrap();
        assert_eq!(vol.dims(), [2, 2, 1]);
        assert_eq!(vol.spacing(), [1.0, 1.0, 2.5]);
        assert_eq!(vol.voxels(), &[0, 1, 2, 3]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse("RAWVOL 1 1 1 1 1 1\n4\n"), Err(Error::LabelDomain { index: 0, .. })));
        assert!(matches!(parse("RAWVOL 1 1 1 1 1 1\n0.5\n"), Err(Error::LabelDomain { .. })));
        assert!(matches!(parse("RAWVOL 1 1 1 1 1 1\nnan\n"), Err(Error::Format(_))));
        assert!(matches!(parse("RAWVOL 2 1 1 1 1 1\n0\n"), Err(Error::Format(_))));
        assert!(matches!(parse("RAWVOL 1 1 1 1 1 1\n0 0\n"), Err(Error::Format(_))));
        assert!(matches!(parse("NIFTI 1 1 1 1 1 1\n0\n"), Err(Error::Format(_))));
        assert!(matches!(parse("RAWVOL 1 1 1 1 0 1\n0\n"), Err(Error::Format(_))));
    }

    #[test]
    fn render_round_trips_odd_spacing() {
        let g = GridGeometry::new([3, 1, 2], [0.1, 1.0 / 3.0, 7.25]).unwrap();
        let vol = LabelVolume::new(g, vec![0, 1, 2, 3, 2, 1]).unwrap();
        assert_eq!(parse(&render(&vol)).unwrap(), vol);
    }
}
