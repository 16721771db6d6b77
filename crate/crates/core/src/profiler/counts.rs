//! Dense per-case operation counts and the count-file (CSV) format.
//!
//! Count files are plain CSV with `#`-prefixed metadata comment lines, a
//! header row in catalog order plus `duration_s`, and one row per case.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::ops::{catalog, OpId};

/// Execution counts N_e per catalog operation, plus the case duration.
/// Missing key ≡ 0: storage is dense over the catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct CountVector {
    counts: Vec<u64>,
    pub duration_s: f64,
}

impl Default for CountVector {
    fn default() -> Self {
        Self::new()
    }
}

impl CountVector {
    pub fn new() -> Self {
        CountVector {
            counts: vec![0; catalog().len()],
            duration_s: 0.0,
        }
    }

    pub fn from_dense(counts: Vec<u64>, duration_s: f64) -> Self {
        assert_eq!(counts.len(), catalog().len());
        CountVector { counts, duration_s }
    }

    pub fn get(&self, op: OpId) -> u64 {
        self.counts[op.index()]
    }

    pub fn set(&mut self, op: OpId, n: u64) {
        self.counts[op.index()] = n;
    }

    pub fn add(&mut self, op: OpId, n: u64) {
        self.counts[op.index()] += n;
    }

    pub fn dense(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn iter_nonzero(&self) -> impl Iterator<Item = (OpId, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, n)| **n > 0)
            .map(|(i, n)| (OpId(i as u16), *n))
    }

    /// Name → count map of the nonzero entries.
    pub fn named(&self) -> BTreeMap<String, u64> {
        let cat = catalog();
        self.iter_nonzero()
            .map(|(op, n)| (cat.name(op).to_string(), n))
            .collect()
    }

    pub fn merge(&mut self, other: &CountVector) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += *b;
        }
    }
}

/// Serialize count vectors as a CSV document. `meta` lines are embedded as
/// leading `# key=value` comments.
pub fn counts_to_csv(rows: &[CountVector], meta: &[(String, String)]) -> String {
    let cat = catalog();
    let mut out = String::new();
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
    let header: Vec<&str> = cat.entries().iter().map(|e| e.name.as_str()).collect();
    let _ = writeln!(out, "{},duration_s", header.join(","));
    for row in rows {
        let mut line = String::new();
        for n in row.dense() {
            let _ = write!(line, "{n},");
        }
        let _ = writeln!(out, "{}{}", line, row.duration_s);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum CountFileError {
    MissingHeader,
    HeaderMismatch { column: usize, found: String, expected: String },
    BadRow { line: usize, message: String },
}

impl std::fmt::Display for CountFileError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CountFileError::MissingHeader => write!(f, "count file has no header row"),
            CountFileError::HeaderMismatch {
                column,
                found,
                expected,
            } => write!(
                f,
                "count file header column {column} is `{found}`, expected `{expected}` (catalog order)"
            ),
            CountFileError::BadRow { line, message } => {
                write!(f, "count file line {line}: {message}")
            }
        }
    }
}

impl std::error::Error for CountFileError {}

/// Parse a count-file document produced by [`counts_to_csv`].
pub fn counts_from_csv(text: &str) -> Result<Vec<CountVector>, CountFileError> {
    let cat = catalog();
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(CountFileError::MissingHeader)?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() != cat.len() + 1 || cols[cat.len()] != "duration_s" {
        return Err(CountFileError::MissingHeader);
    }
    for (i, (col, entry)) in cols.iter().zip(cat.entries()).enumerate() {
        if *col != entry.name {
            return Err(CountFileError::HeaderMismatch {
                column: i,
                found: col.to_string(),
                expected: entry.name.clone(),
            });
        }
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != cat.len() + 1 {
            return Err(CountFileError::BadRow {
                line: lineno + 1,
                message: format!("expected {} fields, found {}", cat.len() + 1, parts.len()),
            });
        }
        let mut counts = Vec::with_capacity(cat.len());
        for p in &parts[..cat.len()] {
            counts.push(p.parse::<u64>().map_err(|_| CountFileError::BadRow {
                line: lineno + 1,
                message: format!("bad count `{p}`"),
            })?);
        }
        let duration_s = parts[cat.len()]
            .parse::<f64>()
            .map_err(|_| CountFileError::BadRow {
                line: lineno + 1,
                message: format!("bad duration `{}`", parts[cat.len()]),
            })?;
        rows.push(CountVector::from_dense(counts, duration_s));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_preserves_rows() {
        let cat = catalog();
        let mut a = CountVector::new();
        a.set(OpId(0), 3);
        a.set(cat.method_invocation, 17);
        a.duration_s = 1.3;
        let mut b = CountVector::new();
        b.set(OpId(5), 1);
        b.duration_s = 2.0;
        let text = counts_to_csv(&[a.clone(), b.clone()], &[("config".into(), "abc".into())]);
        let rows = counts_from_csv(&text).unwrap();
        assert_eq!(rows, vec![a, b]);
    }

    #[test]
    fn header_mismatch_is_detected() {
        let text = counts_to_csv(&[], &[]);
        let tampered = text.replacen("Addition_int_int", "Bogus_op", 1);
        assert!(matches!(
            counts_from_csv(&tampered),
            Err(CountFileError::HeaderMismatch { column: 0, .. })
        ));
    }
}
