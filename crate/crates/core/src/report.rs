//! CSV and manifest output for sweep records.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::config::RunConfig;
use crate::engine::SweepRecord;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "relay-secrecy-sweep/v1";

/// Header row, in column order.
pub const COLUMNS: [&str; 21] = [
    "protocol",
    "axis",
    "value",
    "replicates",
    "throughput_mean",
    "throughput_stderr",
    "analytic_throughput",
    "analytic_mu_max",
    "analytic_outage_sd",
    "analytic_outage_sr",
    "analytic_outage_rd",
    "analytic_approximate",
    "empirical_outage_sd",
    "empirical_outage_sr",
    "empirical_outage_rd",
    "mean_battery",
    "frac_battery_ge_et",
    "drops_mean",
    "saturation_condition",
    "seed",
    "n_slots",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn row(r: &SweepRecord) -> String {
    let fields = [
        r.protocol.to_string(),
        r.axis.to_string(),
        r.value.to_string(),
        r.replicates.to_string(),
        r.throughput_mean.to_string(),
        opt(r.throughput_stderr),
        opt(r.analytic_throughput),
        opt(r.analytic_mu_max),
        r.analytic_outage[0].to_string(),
        r.analytic_outage[1].to_string(),
        r.analytic_outage[2].to_string(),
        r.analytic_approximate.to_string(),
        r.empirical_outage[0].to_string(),
        r.empirical_outage[1].to_string(),
        r.empirical_outage[2].to_string(),
        r.mean_battery.to_string(),
        r.frac_battery_ge_et.to_string(),
        r.drops_mean.to_string(),
        r.saturation_condition.to_string(),
        r.seed.to_string(),
        r.n_slots.to_string(),
    ];
    fields.join(",")
}

/// Writes a `# schema=...` comment line, the header row and one row per
/// record. Floats use Rust's shortest round-trip formatting, which does
/// not depend on locale; absent optional values are empty fields.
pub fn write_csv<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::param("records", "nothing to write"));
    }
    writeln!(out, "# schema={SCHEMA_VERSION}")?;
    writeln!(out, "{}", COLUMNS.join(","))?;
    for r in records {
        writeln!(out, "{}", row(r))?;
    }
    out.flush()?;
    Ok(())
}

pub fn csv_string(records: &[SweepRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ascii"))
}

/// Writes the CSV to `csv_path` and the manifest next to it.
pub fn write_outputs(records: &[SweepRecord], cfg: &RunConfig, csv_path: &Path, manifest_path: &Path) -> Result<()> {
    fs::write(csv_path, csv_string(records)?)?;
    fs::write(manifest_path, cfg.to_manifest())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{sweep, SimConfig, SweepAxis};

    fn records(values: &[f64]) -> Vec<SweepRecord> {
        let base = SimConfig { n_slots: 500, ..Default::default() };
        sweep(&base, SweepAxis::Rate, values, 1).unwrap()
    }

    #[test]
    fn layout() {
        let text = csv_string(&records(&[0.5, 1.0])).unwrap();
        assert!(text.ends_with('\n'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# schema={SCHEMA_VERSION}"));
        let data: Vec<&str> = lines.iter().copied().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 3);
        assert_eq!(data[0], COLUMNS.join(","));
        for l in &data[1..] {
            assert_eq!(l.split(',').count(), COLUMNS.len());
            assert!(l.starts_with("fixed,R,"));
        }
        // One replicate: empty stderr column.
        assert_eq!(data[1].split(',').nth(5), Some(""));
    }

    #[test]
    fn deterministic_bytes() {
        assert_eq!(csv_string(&records(&[1.0])).unwrap(), csv_string(&records(&[1.0])).unwrap());
    }

    #[test]
    fn empty_is_error() {
        assert!(csv_string(&[]).is_err());
    }

    #[test]
    fn unwritable_destination() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("missing").join("out.csv");
        let err = write_outputs(&records(&[1.0]), &RunConfig::default(), &bad, &dir.path().join("m.txt"));
        assert!(matches!(err, Err(Error::Io(_))));
    }
}
