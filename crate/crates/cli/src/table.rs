//! CSV result tables with a leading `#` JSON metadata line.

use std::io::Write;

use serde::Serialize;

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub command: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub timestamp_unix: u64,
    pub rows: usize,
    pub flagged: usize,
}

impl Metadata {
    pub fn new(command: &str, config_sha256: String, seed: u64, table: &ResultTable) -> Self {
        let timestamp_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256,
            seed,
            timestamp_unix,
            rows: table.rows.len(),
            flagged: table.flagged(),
        }
    }
}

/// Rows of formatted cells; the last column is a status that reads `ok`
/// for clean rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub const STATUS_OK: &str = "ok";

impl ResultTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn flagged(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.last().is_some_and(|s| s != STATUS_OK))
            .count()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write<W: Write>(&self, meta: &Metadata, mut out: W) -> CliResult<()> {
        writeln!(out, "# {}", serde_json::to_string(meta).expect("metadata serializes"))?;
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(&self.header)?;
        for row in &self.rows {
            csv.write_record(row)?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// Shortest round-trip scientific form.
pub fn number(v: f64) -> String {
    format!("{v:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_metadata_then_csv() {
        let mut table = ResultTable::new(["index", "x", "status"]);
        table.push(vec!["0".into(), number(0.25), STATUS_OK.into()]);
        table.push(vec!["1".into(), String::new(), "error: bad, really".into()]);
        assert_eq!(table.flagged(), 1);
        let meta = Metadata::new("run", "abc".into(), 7, &table);
        let mut buf = Vec::new();
        table.write(&meta, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let first = lines.next().unwrap();
        assert!(first.starts_with("# {"));
        let parsed: serde_json::Value = serde_json::from_str(&first[2..]).unwrap();
        assert_eq!(parsed["rows"], 2);
        assert_eq!(parsed["flagged"], 1);
        assert_eq!(lines.next(), Some("index,x,status"));
        assert_eq!(lines.next(), Some("0,2.5e-1,ok"));
        assert_eq!(lines.next(), Some("1,,\"error: bad, really\""));
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 4.0] {
            assert_eq!(number(v).parse::<f64>().unwrap(), v);
        }
    }
}
