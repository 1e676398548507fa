use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Acquisition, RicianDataset};
use crate::error::{Error, Result};

/// Sidecar metadata stored next to a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub eta2: f64,
    pub rho: f64,
    /// Ground-truth vec(D) in (D11, D22, D33, D12, D13, D23) order.
    pub d_bar: Vec<f64>,
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    b: f64,
    ux: f64,
    uy: f64,
    uz: f64,
    #[serde(rename = "Y")]
    y: f64,
}

fn data_err(path: &Path, e: impl ToString) -> Error {
    Error::Data {
        file: path.display().to_string(),
        reason: e.to_string(),
    }
}

/// Writes `b,ux,uy,uz,Y` rows and the JSON sidecar.
pub fn write_dataset(ds: &RicianDataset, csv_path: &Path, json_path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(csv_path).map_err(|e| data_err(csv_path, e))?;
    for a in &ds.acquisitions {
        w.serialize(Row {
            b: a.b,
            ux: a.u[0],
            uy: a.u[1],
            uz: a.u[2],
            y: a.y,
        })
        .map_err(|e| data_err(csv_path, e))?;
    }
    w.flush().map_err(|e| data_err(csv_path, e))?;
    let meta = ds.meta.clone().unwrap_or(DatasetMeta {
        eta2: ds.eta2,
        rho: f64::NAN,
        d_bar: vec![],
        seed: None,
    });
    let f = File::create(json_path).map_err(|e| data_err(json_path, e))?;
    serde_json::to_writer_pretty(
        f,
        &DatasetMeta {
            eta2: ds.eta2,
            ..meta
        },
    )
    .map_err(|e| data_err(json_path, e))
}

/// Reads a dataset; η² comes from the sidecar.
pub fn read_dataset(csv_path: &Path, json_path: &Path) -> Result<RicianDataset> {
    let f = File::open(json_path).map_err(|e| data_err(json_path, e))?;
    let meta: DatasetMeta = serde_json::from_reader(f).map_err(|e| data_err(json_path, e))?;
    let mut rdr = csv::Reader::from_path(csv_path).map_err(|e| data_err(csv_path, e))?;
    let mut acquisitions = Vec::new();
    for r in rdr.deserialize::<Row>() {
        let r = r.map_err(|e| data_err(csv_path, e))?;
        acquisitions.push(Acquisition {
            b: r.b,
            u: [r.ux, r.uy, r.uz],
            y: r.y,
        });
    }
    let ds = RicianDataset {
        acquisitions,
        eta2: meta.eta2,
        meta: Some(meta),
    };
    ds.validate()?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::builtin_scheme;
    use crate::rician::simulate_dataset;
    use crate::rng::stream;
    use crate::symmat::SymMat;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let scheme = builtin_scheme("design1").unwrap();
        let mut ds = simulate_dataset(
            &scheme,
            &SymMat::scaled_identity(3, 6.622e-4),
            110.046,
            64.056,
            &mut stream(71, 0),
        )
        .unwrap();
        ds.meta.as_mut().unwrap().seed = Some(71);
        let (c, j) = (dir.path().join("d.csv"), dir.path().join("d.json"));
        write_dataset(&ds, &c, &j).unwrap();
        let back = read_dataset(&c, &j).unwrap();
        assert_eq!(back, ds);
        let text = std::fs::read_to_string(&c).unwrap();
        assert!(text.starts_with("b,ux,uy,uz,Y\n"));
    }
}
