//! Boundary-condition CSV ingestion and emission. The format is a strict,
//! bit-exact contract: UTF-8, LF line endings, a `time_s,left,right` header,
//! optional `# ...` comment lines, decimal values with a `.` separator.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::BoundarySignal;

/// One measured row: seconds from start and the two surface values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcRow {
    pub time_s: f64,
    pub left: f64,
    pub right: f64,
}

/// An hourly (or otherwise sampled) boundary-condition table.
#[derive(Debug, Clone, PartialEq)]
pub struct BcCsv {
    /// Unit note carried in the `# units:` comment, if any.
    pub units: Option<String>,
    pub rows: Vec<BcRow>,
}

impl BcCsv {
    pub fn new(units: Option<String>, rows: Vec<BcRow>) -> Self {
        Self { units, rows }
    }

    /// Parse and validate a file. Timestamps must be strictly increasing and
    /// gaps may not exceed `max_gap_factor` times the median spacing
    /// (default 2 when `None`).
    pub fn read(path: &Path, max_gap_factor: Option<f64>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string(), max_gap_factor)
    }

    pub fn parse(text: &str, origin: &str, max_gap_factor: Option<f64>) -> Result<Self> {
        let fail = |row: usize, reason: String| Error::Ingestion {
            path: origin.to_string(),
            row,
            reason,
        };
        let mut units = None;
        let mut rows = Vec::new();
        let mut header_seen = false;
        for (idx, line) in text.lines().enumerate() {
            let row_no = idx + 1;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(u) = comment.trim().strip_prefix("units:") {
                    units = Some(u.trim().to_string());
                }
                continue;
            }
            if !header_seen {
                if line != "time_s,left,right" {
                    return Err(fail(
                        row_no,
                        format!("expected header `time_s,left,right`, found `{line}`"),
                    ));
                }
                header_seen = true;
                continue;
            }
            let mut parts = line.split(',');
            let mut next_field = |name: &str| -> Result<f64> {
                let raw = parts
                    .next()
                    .ok_or_else(|| fail(row_no, format!("missing field `{name}`")))?;
                raw.trim()
                    .parse::<f64>()
                    .map_err(|_| fail(row_no, format!("field `{name}` is not a number: `{raw}`")))
            };
            let row = BcRow {
                time_s: next_field("time_s")?,
                left: next_field("left")?,
                right: next_field("right")?,
            };
            if parts.next().is_some() {
                return Err(fail(row_no, "too many fields".into()));
            }
            if let Some(prev) = rows.last() {
                let prev: &BcRow = prev;
                if row.time_s <= prev.time_s {
                    return Err(fail(
                        row_no,
                        format!(
                            "time {} does not increase over previous {}",
                            row.time_s, prev.time_s
                        ),
                    ));
                }
            }
            rows.push(row);
        }
        if !header_seen {
            return Err(fail(1, "missing header".into()));
        }
        if rows.len() < 2 {
            return Err(fail(rows.len() + 1, "need at least two data rows".into()));
        }
        // gap check against the median spacing
        let mut gaps: Vec<f64> = rows.windows(2).map(|w| w[1].time_s - w[0].time_s).collect();
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = gaps[gaps.len() / 2];
        let max_gap = max_gap_factor.unwrap_or(2.0) * median;
        for (i, w) in rows.windows(2).enumerate() {
            let gap = w[1].time_s - w[0].time_s;
            if gap > max_gap + 1e-9 {
                return Err(fail(
                    i + 3, // 1-based line of the row ending the gap (header on line 1)
                    format!("gap {gap} s exceeds the allowed {max_gap} s"),
                ));
            }
        }
        Ok(Self { units, rows })
    }

    /// Serialize with the exact wire format; parsing the output reproduces
    /// the file byte for byte.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(u) = &self.units {
            let _ = writeln!(out, "# units: {u}");
        }
        out.push_str("time_s,left,right\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.time_s, r.left, r.right);
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.render())?;
        Ok(())
    }

    /// Convert to a pair of sampled boundary signals. When
    /// `discard_first_days > 0`, leading rows inside that span are dropped
    /// and the remaining timestamps re-based to zero.
    pub fn to_signals(&self, discard_first_days: f64) -> Result<(BoundarySignal, BoundarySignal)> {
        let cutoff = self.rows[0].time_s + discard_first_days * 86_400.0;
        let kept: Vec<&BcRow> = if discard_first_days > 0.0 {
            self.rows.iter().filter(|r| r.time_s >= cutoff).collect()
        } else {
            self.rows.iter().collect()
        };
        if kept.len() < 2 {
            return Err(Error::Ingestion {
                path: "<bc table>".into(),
                row: self.rows.len(),
                reason: "discarding the warm-up span leaves fewer than two rows".into(),
            });
        }
        let t0 = kept[0].time_s;
        let times: Vec<f64> = kept.iter().map(|r| r.time_s - t0).collect();
        let left = BoundarySignal::sampled(times.clone(), kept.iter().map(|r| r.left).collect())?;
        let right = BoundarySignal::sampled(times, kept.iter().map(|r| r.right).collect())?;
        Ok((left, right))
    }
}

/// Read a boundary CSV into a pair of sampled signals.
pub fn ingest_bc_csv(
    path: &Path,
    discard_first_days: f64,
    max_gap_factor: Option<f64>,
) -> Result<(BoundarySignal, BoundarySignal)> {
    BcCsv::read(path, max_gap_factor)?.to_signals(discard_first_days)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed_file_round_trips() {
        let text = "# units: s, C, C\ntime_s,left,right\n0,5,21\n3600,5.5,21.1\n7200,6,21.05\n";
        let table = BcCsv::parse(text, "test", None).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert_eq!(table.render(), text);
    }

    #[test]
    fn three_rows_become_signals() {
        let text = "time_s,left,right\n0,5,21\n3600,7,22\n7200,6,23\n";
        let table = BcCsv::parse(text, "test", None).unwrap();
        let (left, right) = table.to_signals(0.0).unwrap();
        assert_eq!(left.sample(1800.0).unwrap(), 6.0);
        assert_eq!(right.sample(7200.0).unwrap(), 23.0);
    }

    #[test]
    fn non_monotone_time_names_the_row() {
        let text = "time_s,left,right\n0,5,21\n3600,7,22\n3600,6,23\n";
        let err = BcCsv::parse(text, "test", None).unwrap_err();
        match err {
            Error::Ingestion { row, .. } => assert_eq!(row, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn oversized_gap_rejected() {
        let text = "time_s,left,right\n0,1,1\n3600,1,1\n7200,1,1\n36000,1,1\n";
        let err = BcCsv::parse(text, "test", None).unwrap_err();
        assert!(matches!(err, Error::Ingestion { .. }));
        // a permissive factor admits the same file
        assert!(BcCsv::parse(text, "test", Some(10.0)).is_ok());
    }

    #[test]
    fn malformed_number_names_the_row() {
        let text = "time_s,left,right\n0,5,21\n3600,abc,22\n";
        let err = BcCsv::parse(text, "test", None).unwrap_err();
        match err {
            Error::Ingestion { row, reason, .. } => {
                assert_eq!(row, 3);
                assert!(reason.contains("left"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn discard_rebases_time() {
        let rows: Vec<BcRow> = (0..24 * 9)
            .map(|h| BcRow {
                time_s: h as f64 * 3600.0,
                left: h as f64,
                right: -(h as f64),
            })
            .collect();
        let table = BcCsv::new(None, rows);
        let (left, _) = table.to_signals(7.0).unwrap();
        let (start, end) = left.span();
        assert_eq!(start, 0.0);
        assert_eq!(end, (24.0 * 9.0 - 1.0 - 24.0 * 7.0) * 3600.0);
        // first retained sample was hour 168
        assert_eq!(left.sample(0.0).unwrap(), 168.0);
    }
}
