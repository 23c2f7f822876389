//! Parameter checkpoints: a JSON header (version, caller metadata, named
//! shapes) followed by the raw little-endian f64 data in header order.

use super::params::ParamSet;
use super::tensor::Tensor;
use super::NnError;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    version: u32,
    meta: serde_json::Value,
    params: Vec<ParamHeader>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ParamHeader {
    name: String,
    rows: usize,
    cols: usize,
}

/// Write all parameters plus caller metadata to one binary file.
pub fn save(path: &Path, params: &ParamSet, meta: serde_json::Value) -> Result<(), NnError> {
    let header = Header {
        version: CHECKPOINT_VERSION,
        meta,
        params: params
            .iter()
            .map(|p| ParamHeader {
                name: p.name.clone(),
                rows: p.value.rows(),
                cols: p.value.cols(),
            })
            .collect(),
    };
    let header_bytes = serde_json::to_vec(&header)
        .map_err(|e| NnError::Checkpoint(format!("header encode: {e}")))?;
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
    file.write_all(&header_bytes)?;
    for p in params.iter() {
        for &v in p.value.data() {
            file.write_all(&v.to_le_bytes())?;
        }
    }
    file.flush()?;
    Ok(())
}

/// Read a checkpoint back into a fresh [`ParamSet`] and its metadata.
pub fn load(path: &Path) -> Result<(ParamSet, serde_json::Value), NnError> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut len_bytes = [0u8; 4];
    file.read_exact(&mut len_bytes)?;
    let header_len = u32::from_le_bytes(len_bytes) as usize;
    let mut header_bytes = vec![0u8; header_len];
    file.read_exact(&mut header_bytes)?;
    let header: Header = serde_json::from_slice(&header_bytes)
        .map_err(|e| NnError::Checkpoint(format!("header decode: {e}")))?;
    if header.version != CHECKPOINT_VERSION {
        return Err(NnError::Checkpoint(format!(
            "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
            header.version
        )));
    }
    let mut params = ParamSet::new();
    for ph in &header.params {
        let mut data = vec![0.0f64; ph.rows * ph.cols];
        let mut buf = [0u8; 8];
        for slot in &mut data {
            file.read_exact(&mut buf)?;
            *slot = f64::from_le_bytes(buf);
        }
        params.add(&ph.name, Tensor::from_vec(ph.rows, ph.cols, data));
    }
    Ok((params, header.meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trip_preserves_values_and_meta() {
        let mut params = ParamSet::new();
        params.add(
            "layer.weight",
            Tensor::from_vec(2, 3, vec![1.5, -2.0, 0.0, 3.25, 4.0, -0.5]),
        );
        params.add("layer.bias", Tensor::row(vec![0.125]));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save(&path, &params, json!({"dim": 64})).unwrap();
        let (loaded, meta) = load(&path).unwrap();
        assert_eq!(meta["dim"], 64);
        assert_eq!(loaded.len(), 2);
        let w = loaded.id_of("layer.weight").unwrap();
        assert_eq!(
            loaded.get(w).value,
            params.get(params.id_of("layer.weight").unwrap()).value
        );
    }

    #[test]
    fn rejects_future_versions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");
        let header = serde_json::to_vec(&json!({"version": 99, "meta": {}, "params": []})).unwrap();
        let mut bytes = (header.len() as u32).to_le_bytes().to_vec();
        bytes.extend_from_slice(&header);
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(load(&path), Err(NnError::Checkpoint(_))));
    }
}
