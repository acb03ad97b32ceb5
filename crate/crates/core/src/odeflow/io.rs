use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::noise::{NoiseKind, Observation};
use crate::error::{Error, Result};

/// Sidecar record describing an observation CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    /// `stubble` or `snake`.
    pub model: String,
    pub field: String,
    pub d: usize,
    pub beta: usize,
    pub dt: f64,
    pub sigma: f64,
    pub noise: NoiseKind,
    pub seed: u64,
    /// Known initial conditions, indexed by `traj_id`.
    pub initials: Vec<Vec<f64>>,
}

pub fn write_observations<W: Write>(writer: W, d: usize, obs: &[Observation]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["traj_id".to_string(), "obs_idx".to_string(), "t".to_string()];
    header.extend((1..=d).map(|k| format!("y_{k}")));
    w.write_record(&header)?;
    for o in obs {
        if o.y.len() != d {
            return Err(Error::InvalidInput("observation dimension mismatch".into()));
        }
        let mut row = vec![o.traj_id.to_string(), o.obs_idx.to_string(), fmt_f64(o.t)];
        row.extend(o.y.iter().map(|v| fmt_f64(*v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_observations<R: Read>(reader: R) -> Result<(usize, Vec<Observation>)> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.len() < 4 || &header[0] != "traj_id" || &header[1] != "obs_idx" || &header[2] != "t" {
        return Err(Error::Parse("expected columns traj_id,obs_idx,t,y_1..y_d".into()));
    }
    let d = header.len() - 3;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let p = |i: usize| -> Result<f64> {
            rec[i].trim().parse::<f64>().map_err(|e| Error::Parse(format!("column {i}: {e}")))
        };
        let traj_id = rec[0].trim().parse::<u64>().map_err(|e| Error::Parse(e.to_string()))?;
        let obs_idx = rec[1].trim().parse::<u64>().map_err(|e| Error::Parse(e.to_string()))?;
        let t = p(2)?;
        let y = (0..d).map(|k| p(3 + k)).collect::<Result<Vec<f64>>>()?;
        out.push(Observation { traj_id, obs_idx, t, y });
    }
    Ok((d, out))
}

pub fn write_meta(path: &Path, meta: &DatasetMeta) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, meta)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_meta(path: &Path) -> Result<DatasetMeta> {
    let f = File::open(path)?;
    Ok(serde_json::from_reader(f)?)
}

/// Shortest representation that round-trips exactly.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
