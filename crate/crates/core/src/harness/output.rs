//! CSV and JSON persistence.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Error, Result};

/// The comment line at the top of every CSV file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub seed: u64,
    /// Seconds since the Unix epoch; `None` keeps output byte-reproducible.
    pub timestamp: Option<u64>,
}

impl Provenance {
    pub fn new(seed: u64, with_timestamp: bool) -> Self {
        let timestamp = with_timestamp.then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        });
        Provenance { seed, timestamp }
    }

    pub fn line(&self) -> String {
        let mut s = format!("# isat {} seed={}", env!("CARGO_PKG_VERSION"), self.seed);
        if let Some(t) = self.timestamp {
            s.push_str(&format!(" timestamp={t}"));
        }
        s
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidParameter(format!("csv: {e}"))
}

/// Provenance line, header row and one row per record.
pub fn csv_string<T: Serialize>(rows: &[T], provenance: &Provenance) -> Result<String> {
    let mut out = provenance.line().into_bytes();
    out.push(b'\n');
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row).map_err(csv_error)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::InvalidParameter(format!("csv: {}", e.error())))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T], provenance: &Provenance) -> Result<()> {
    let text = csv_string(rows, provenance)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        c: f64,
        ok: bool,
    }

    #[test]
    fn header_and_provenance() {
        let rows = [Row { c: 2.0, ok: true }, Row { c: 0.1, ok: false }];
        let text = csv_string(&rows, &Provenance::new(7, false)).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert!(lines[0].starts_with("# isat ") && lines[0].ends_with("seed=7"));
        assert_eq!(&lines[1..], ["c,ok", "2.0,true", "0.1,false"]);
    }

    #[test]
    fn timestamp_is_optional() {
        assert!(Provenance::new(1, true).line().contains("timestamp="));
        assert!(!Provenance::new(1, false).line().contains("timestamp"));
    }
}
