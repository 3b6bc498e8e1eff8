//! Record files: a CSV with one metadata comment line, and a JSON manifest.
//!
//! ```text
//! # system=fock_xp,kind=joint,chi=1,seed=42,N=3
//! a1,a2
//! 0.25,-1.5
//! ...
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back reproduces the record bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MeasurementRecord, RecordKind, System};
use crate::error::{KqpdError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordManifest {
    pub system: System,
    pub kind: RecordKind,
    pub chi: f64,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    /// Seconds since the Unix epoch.
    pub created_unix: u64,
    pub code_version: String,
}

impl RecordManifest {
    pub fn for_record(record: &MeasurementRecord) -> Self {
        RecordManifest {
            system: record.system,
            kind: record.kind,
            chi: record.chi,
            seed: record.seed,
            n: record.len(),
            created_unix: crate::unix_now(),
            code_version: crate::CODE_VERSION.to_string(),
        }
    }
}

pub fn record_to_csv(record: &MeasurementRecord) -> String {
    let mut out = String::with_capacity(24 * record.values.len() + 128);
    let _ = writeln!(
        out,
        "# system={},kind={},chi={},seed={},N={}",
        record.system,
        record.kind,
        record.chi,
        record.seed,
        record.len()
    );
    match record.kind.arity() {
        2 => {
            out.push_str("a1,a2\n");
            for pair in record.values.chunks_exact(2) {
                let _ = writeln!(out, "{},{}", pair[0], pair[1]);
            }
        }
        _ => {
            out.push_str("a1\n");
            for v in &record.values {
                let _ = writeln!(out, "{v}");
            }
        }
    }
    out
}

pub fn write_record_csv(record: &MeasurementRecord, path: &Path) -> Result<()> {
    fs::write(path, record_to_csv(record))?;
    Ok(())
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`, creating it if needed.
pub fn write_record(record: &MeasurementRecord, dir: &Path, stem: &str) -> Result<Vec<std::path::PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    write_record_csv(record, &csv)?;
    fs::write(&json, serde_json::to_string_pretty(&RecordManifest::for_record(record))?)?;
    Ok(vec![csv, json])
}

pub fn parse_record_csv(text: &str) -> Result<MeasurementRecord> {
    let mut lines = text.lines();
    let meta = lines
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .ok_or_else(|| KqpdError::Format("missing '# system=...' metadata line".into()))?;
    let (mut system, mut kind, mut chi, mut seed, mut n) = (None, None, None, None, None);
    for field in meta.trim().split(',') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| KqpdError::Format(format!("metadata field '{field}' is not key=value")))?;
        let bad = |what: &str| KqpdError::Format(format!("bad {what} '{value}'"));
        match key.trim() {
            "system" => system = Some(value.parse::<System>().map_err(|_| bad("system"))?),
            "kind" => kind = Some(value.parse::<RecordKind>()?),
            "chi" => chi = Some(value.parse::<f64>().map_err(|_| bad("chi"))?),
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
            "N" => n = Some(value.parse::<usize>().map_err(|_| bad("N"))?),
            other => return Err(KqpdError::Format(format!("unknown metadata key '{other}'"))),
        }
    }
    let missing = |k: &str| KqpdError::Format(format!("metadata lacks '{k}'"));
    let system = system.ok_or_else(|| missing("system"))?;
    let kind = kind.ok_or_else(|| missing("kind"))?;
    let chi = chi.ok_or_else(|| missing("chi"))?;
    let seed = seed.ok_or_else(|| missing("seed"))?;
    let n = n.ok_or_else(|| missing("N"))?;

    let expected_header = if kind.arity() == 2 { "a1,a2" } else { "a1" };
    match lines.next() {
        Some(h) if h.trim() == expected_header => {}
        other => {
            return Err(KqpdError::Format(format!("expected header '{expected_header}', found {other:?}")));
        }
    }
    let mut values = Vec::with_capacity(n * kind.arity());
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != kind.arity() {
            return Err(KqpdError::Format(format!("row {} has {} columns", row + 1, cells.len())));
        }
        for cell in cells {
            values.push(
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| KqpdError::Format(format!("row {}: '{cell}' is not a number", row + 1)))?,
            );
        }
    }
    let record = MeasurementRecord::new(system, kind, chi, seed, values)?;
    if record.len() != n {
        return Err(KqpdError::Format(format!("metadata says N={n}, file has {} rows", record.len())));
    }
    Ok(record)
}

pub fn read_record_csv(path: &Path) -> Result<MeasurementRecord> {
    parse_record_csv(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_spin_joint, sample_x_single};
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let rec = MeasurementRecord::new(System::Spin, RecordKind::Joint, 1.5, 7, vec![0.25, 1.0, -0.5, -1.0]).unwrap();
        assert_eq!(record_to_csv(&rec), "# system=spin,kind=joint,chi=1.5,seed=7,N=2\na1,a2\n0.25,1\n-0.5,-1\n");
    }

    #[test]
    fn sampled_records_round_trip() {
        for rec in [sample_spin_joint(0.8, 200, 1).unwrap(), sample_x_single(2.0, 200, 2).unwrap()] {
            assert_eq!(parse_record_csv(&record_to_csv(&rec)).unwrap(), rec);
        }
    }

    #[test]
    fn malformed_files_rejected() {
        assert!(parse_record_csv("a1\n1\n").is_err());
        assert!(parse_record_csv("# system=spin,kind=single_1,chi=1,seed=1,N=2\na1\n1\n").is_err());
        assert!(parse_record_csv("# system=spin,kind=single_1,chi=1,seed=1,N=1\na1,a2\n1,2\n").is_err());
        assert!(parse_record_csv("# system=spin,kind=single_1,chi=1,seed=1,N=1,extra=2\na1\n1\n").is_err());
        assert!(parse_record_csv("# system=qubit,kind=single_1,chi=1,seed=1,N=1\na1\n1\n").is_err());
    }

    #[test]
    fn manifest_fields() {
        let dir = tempfile::tempdir().unwrap();
        let rec = sample_x_single(1.0, 10, 3).unwrap();
        let files = write_record(&rec, dir.path(), "x").unwrap();
        let manifest: RecordManifest = serde_json::from_str(&fs::read_to_string(&files[1]).unwrap()).unwrap();
        assert_eq!(manifest.n, 10);
        assert_eq!(manifest.seed, 3);
        assert_eq!(manifest.kind, RecordKind::Single1);
        assert_eq!(read_record_csv(&files[0]).unwrap(), rec);
    }

    proptest! {
        #[test]
        fn arbitrary_values_round_trip(values in proptest::collection::vec(-1e6f64..1e6, 1..50), seed: u64, chi in 0.01f64..10.0) {
            let rec = MeasurementRecord::new(System::FockXp, RecordKind::Single2, chi, seed, values).unwrap();
            prop_assert_eq!(parse_record_csv(&record_to_csv(&rec)).unwrap(), rec);
        }
    }
}
