//! Text format for point sets.
//!
//! One vector per line, `d` whitespace-separated element indices in `[0, q)`.
//! Lines whose first non-blank character is `#` and blank lines are skipped.
//! Duplicate vectors are allowed and collapse when the set is built.

use std::path::Path;
use std::sync::Arc;

use crate::distance::PointSet;
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::geometry::GridDomain;

/// Parses raw bytes; invalid UTF-8 is reported against the line it occurs on.
pub fn parse_bytes(data: &[u8], d: usize, q: u32) -> Result<Vec<Vec<u32>>> {
    match std::str::from_utf8(data) {
        Ok(text) => parse_vectors(text, d, q),
        Err(e) => {
            let line = data[..e.valid_up_to()]
                .iter()
                .filter(|&&b| b == b'\n')
                .count()
                + 1;
            Err(Error::Parse {
                line,
                message: "invalid UTF-8".into(),
            })
        }
    }
}

/// Parses coordinate vectors without building a grid.
pub fn parse_vectors(text: &str, d: usize, q: u32) -> Result<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut v = Vec::with_capacity(d);
        for tok in body.split_whitespace() {
            let c: u32 = tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("expected an element index, found {tok:?}"),
            })?;
            if c >= q {
                return Err(Error::Parse {
                    line,
                    message: format!("coordinate {c} out of range [0, {q})"),
                });
            }
            v.push(c);
        }
        if v.len() != d {
            return Err(Error::Parse {
                line,
                message: format!("expected {d} coordinates, found {}", v.len()),
            });
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(out)
}

pub fn parse_point_set(text: &str, domain: Arc<GridDomain>) -> Result<PointSet> {
    let vectors = parse_vectors(text, domain.d(), domain.q() as u32)?;
    let idx = vectors.iter().map(|v| {
        v.iter()
            .enumerate()
            .map(|(axis, &c)| c as usize * domain.stride(axis))
            .sum::<usize>()
    });
    PointSet::from_indices(domain.clone(), idx)
}

pub fn read_point_set(path: &Path, domain: Arc<GridDomain>) -> Result<PointSet> {
    let data = std::fs::read(path)?;
    let vectors = parse_bytes(&data, domain.d(), domain.q() as u32)?;
    let as_elements: Vec<Vec<FieldElement>> = vectors
        .into_iter()
        .map(|v| v.into_iter().map(FieldElement).collect())
        .collect();
    PointSet::from_vectors(domain, &as_elements)
}

/// Renders a set in the text format, one point per line in index order.
pub fn write_point_set(set: &PointSet) -> String {
    let dm = set.domain();
    let mut out = format!(
        "# {} points in F_{}^{}\n",
        set.cardinality(),
        dm.q(),
        dm.d()
    );
    for &idx in set.points() {
        let line: Vec<String> = (0..dm.d()).map(|a| dm.coord(idx, a).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
