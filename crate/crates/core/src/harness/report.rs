use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::run::MetricsRow;
use crate::error::{invalid, DroError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = DroError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(invalid(format!("unknown report format {s:?}"))),
        }
    }
}

/// CSV column order.
pub const CSV_COLUMNS: [&str; 12] = [
    "method",
    "adversary",
    "epsilon",
    "seed",
    "excess_clean_objective",
    "param_error",
    "w_star_norm",
    "wallclock",
    "oracle_calls",
    "max_abs_dual",
    "max_abs_extrapolation",
    "error",
];

fn sig9(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.8e}")
    }
}

/// Writes rows as CSV (floats at 9 significant digits, columns as in
/// [`CSV_COLUMNS`]) or as a JSON array at full precision.
pub fn emit_report<W: Write>(rows: &[MetricsRow], format: ReportFormat, mut out: W) -> Result<()> {
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n")?;
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_COLUMNS)?;
            for r in rows {
                w.write_record([
                    r.method.clone(),
                    r.adversary.clone(),
                    sig9(r.epsilon),
                    r.seed.to_string(),
                    sig9(r.excess_clean_objective),
                    sig9(r.param_error),
                    sig9(r.w_star_norm),
                    sig9(r.wallclock),
                    r.oracle_calls.to_string(),
                    sig9(r.max_abs_dual),
                    sig9(r.max_abs_extrapolation),
                    r.error.clone().unwrap_or_default(),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_report(rows: &[MetricsRow], format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    emit_report(rows, format, file)
}

pub fn read_report_json<R: Read>(reader: R) -> Result<Vec<MetricsRow>> {
    Ok(serde_json::from_reader(reader)?)
}

/// Strict reader for the CSV schema: exact header, fixed field count.
pub fn read_report_csv<R: Read>(reader: R) -> Result<Vec<MetricsRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(DroError::Format(format!("unexpected report header {header:?}")));
    }
    let num = |s: &str| -> Result<f64> { s.parse::<f64>().map_err(|_| DroError::Format(format!("bad number {s:?}"))) };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(MetricsRow {
            method: rec[0].to_string(),
            adversary: rec[1].to_string(),
            epsilon: num(&rec[2])?,
            seed: rec[3].parse().map_err(|_| DroError::Format(format!("bad seed {:?}", &rec[3])))?,
            excess_clean_objective: num(&rec[4])?,
            param_error: num(&rec[5])?,
            w_star_norm: num(&rec[6])?,
            wallclock: num(&rec[7])?,
            oracle_calls: rec[8].parse().map_err(|_| DroError::Format(format!("bad count {:?}", &rec[8])))?,
            max_abs_dual: num(&rec[9])?,
            max_abs_extrapolation: num(&rec[10])?,
            error: if rec[11].is_empty() { None } else { Some(rec[11].to_string()) },
        });
    }
    Ok(rows)
}

/// Median statistics over seeds for one (method, adversary, ε) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub adversary: String,
    pub epsilon: f64,
    pub runs: usize,
    pub failures: usize,
    pub median_excess: f64,
    pub median_param_error: f64,
    pub median_w_star_norm: f64,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// Groups successful rows by (method, adversary, ε) in first-seen order.
pub fn summarize(rows: &[MetricsRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, String, u64)> = Vec::new();
    let mut groups: BTreeMap<(String, String, u64), Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows {
        let key = (r.method.clone(), r.adversary.clone(), r.epsilon.to_bits());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let group = &groups[&key];
            let ok: Vec<&&MetricsRow> = group.iter().filter(|r| r.succeeded()).collect();
            let pick = |f: fn(&MetricsRow) -> f64| median(&mut ok.iter().map(|r| f(r)).collect::<Vec<_>>());
            SummaryRow {
                method: key.0.clone(),
                adversary: key.1.clone(),
                epsilon: f64::from_bits(key.2),
                runs: group.len(),
                failures: group.len() - ok.len(),
                median_excess: pick(|r| r.excess_clean_objective),
                median_param_error: pick(|r| r.param_error),
                median_w_star_norm: pick(|r| r.w_star_norm),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: &str, eps: f64, seed: u64, excess: f64) -> MetricsRow {
        MetricsRow {
            method: method.into(),
            adversary: "far_cluster".into(),
            epsilon: eps,
            seed,
            excess_clean_objective: excess,
            param_error: 0.25,
            w_star_norm: 1.0 / 3.0,
            wallclock: 0.5,
            oracle_calls: 7,
            max_abs_dual: 1.0,
            max_abs_extrapolation: 2.5,
            error: None,
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        emit_report(&[], ReportFormat::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", CSV_COLUMNS.join(",")));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut failed = row("erm", 0.1, 3, f64::NAN);
        failed.error = Some("boom".into());
        let rows = vec![row("pdhg", 0.1, 1, 0.1 + 0.2), failed];
        let mut buf = Vec::new();
        emit_report(&rows, ReportFormat::Json, &mut buf).unwrap();
        let back = read_report_json(buf.as_slice()).unwrap();
        assert_eq!(back[0], rows[0]);
        assert!(back[1].excess_clean_objective.is_nan());
        assert_eq!(back[1].error.as_deref(), Some("boom"));
    }

    #[test]
    fn csv_is_strictly_parseable() {
        let rows = vec![row("pdhg", 0.05, 1, 1.0 / 7.0)];
        let mut buf = Vec::new();
        emit_report(&rows, ReportFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("1.42857143e-1"), "{text}");
        let back = read_report_csv(buf.as_slice()).unwrap();
        assert!((back[0].excess_clean_objective - 1.0 / 7.0).abs() < 1e-9);
        assert_eq!(back[0].oracle_calls, 7);
    }

    #[test]
    fn summary_takes_medians() {
        let rows = vec![row("pdhg", 0.1, 1, 1.0), row("pdhg", 0.1, 2, 3.0), row("pdhg", 0.1, 3, 2.0), row("erm", 0.1, 1, 9.0)];
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].method, "pdhg");
        assert_eq!(s[0].median_excess, 2.0);
        assert_eq!(s[1].runs, 1);
    }
}
