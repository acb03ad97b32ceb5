use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::config::Model;
use super::rate::fit_rate;
use super::run::{mean_stderr, RateReport, ReplicateResult};
use crate::error::{Error, Result};
use crate::odeflow::io::fmt_f64;

/// Results CSV `model,n,replicate,error,failures`; failed replicates carry `NaN`.
pub fn write_results<W: Write>(writer: W, model: Model, results: &[ReplicateResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "n", "replicate", "error", "failures"])?;
    for r in results {
        w.write_record([
            model.name().to_string(),
            r.n.to_string(),
            r.replicate.to_string(),
            fmt_f64(r.error.unwrap_or(f64::NAN)),
            r.failures.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub model: String,
    pub n: usize,
    pub replicate: usize,
    pub error: f64,
    pub failures: usize,
}

pub fn read_results<R: Read>(reader: R) -> Result<Vec<ResultRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

/// Per-model slope over the finite errors of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedRate {
    pub model: String,
    /// `(n, mean, stderr)` sorted by `n`.
    pub rows: Vec<(usize, f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
}

/// Groups records by model and `n` (replicates in index order) and fits one slope per model.
pub fn fit_results(records: &[ResultRecord]) -> Result<Vec<FittedRate>> {
    let mut groups: BTreeMap<&str, BTreeMap<usize, BTreeMap<usize, f64>>> = BTreeMap::new();
    for r in records {
        if r.error.is_finite() {
            groups.entry(r.model.as_str()).or_default().entry(r.n).or_default().insert(r.replicate, r.error);
        }
    }
    if groups.is_empty() {
        return Err(Error::InvalidInput("no finite errors in results".into()));
    }
    groups
        .into_iter()
        .map(|(model, by_n)| {
            let rows: Vec<(usize, f64, f64)> = by_n
                .into_iter()
                .map(|(n, reps)| {
                    let v: Vec<f64> = reps.into_values().collect();
                    let (m, s) = mean_stderr(&v);
                    (n, m, s)
                })
                .collect();
            let ns: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
            let ms: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let (slope, intercept) = fit_rate(&ns, &ms)?;
            Ok(FittedRate { model: model.to_string(), rows, slope, intercept })
        })
        .collect()
}

pub fn write_report<W: Write>(mut writer: W, report: &RateReport) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, report)?;
    writeln!(writer)?;
    Ok(())
}

/// Plot CSV `n,mean,stderr,reference`; the reference curve is the rate shape
/// anchored at the first row's mean.
pub fn write_plot<W: Write>(writer: W, report: &RateReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["n", "mean", "stderr", "reference"])?;
    let anchor = report.rows.first().map(|r| (r.n_eff as f64, r.mean));
    for row in &report.rows {
        let reference = match anchor {
            Some((n0, m0)) => m0 * report.reference.rmse_shape(row.n_eff as f64) / report.reference.rmse_shape(n0),
            None => f64::NAN,
        };
        w.write_record([row.n_eff.to_string(), fmt_f64(row.mean), fmt_f64(row.stderr), fmt_f64(reference)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_round_trip_and_fit() {
        let ns = [100usize, 200, 400, 800];
        let mut results = Vec::new();
        for &n in &ns {
            for r in 0..3 {
                results.push(ReplicateResult {
                    n,
                    replicate: r,
                    error: Some((n as f64).powf(-0.25)),
                    failures: 0,
                    fallbacks: 0,
                });
            }
        }
        results.push(ReplicateResult { n: 800, replicate: 3, error: None, failures: 2, fallbacks: 0 });
        let mut buf = Vec::new();
        write_results(&mut buf, Model::SnakeLip, &results).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("model,n,replicate,error,failures\n"));
        assert!(text.contains("snake-lip,800,3,NaN,2"));
        let back = read_results(&buf[..]).unwrap();
        assert_eq!(back.len(), results.len());
        let fit = fit_results(&back).unwrap();
        assert_eq!(fit.len(), 1);
        assert!((fit[0].slope + 0.25).abs() < 1e-12);
    }
}
