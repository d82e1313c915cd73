//! Checkpoint format: magic "CNF1", u32-LE header length, JSON header
//! (backbone, grid, mlp, parameter count), then parameters as
//! little-endian f32 in the stable flat order.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CnfError, Result};
use crate::field::{FieldConfig, FieldModel};

const MAGIC: &[u8; 4] = b"CNF1";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    version: u32,
    config: FieldConfig,
    param_count: usize,
}

pub fn encode(model: &FieldModel) -> Vec<u8> {
    let header = Header {
        version: 1,
        config: model.config.clone(),
        param_count: model.params.len(),
    };
    let header_json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(8 + header_json.len() + model.params.len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&header_json);
    for p in &model.params {
        out.extend_from_slice(&(*p as f32).to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<FieldModel> {
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(CnfError::data("checkpoint: bad magic"));
    }
    let header_len = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let body = 8 + header_len;
    if bytes.len() < body {
        return Err(CnfError::data("checkpoint: truncated header"));
    }
    let header: Header = serde_json::from_slice(&bytes[8..body])
        .map_err(|e| CnfError::data(format!("checkpoint: header parse: {e}")))?;
    let mut model = FieldModel::new(header.config)?;
    if model.params.len() != header.param_count {
        return Err(CnfError::data(format!(
            "checkpoint: param count {} does not match config ({})",
            header.param_count,
            model.params.len()
        )));
    }
    let expected = body + header.param_count * 4;
    if bytes.len() != expected {
        return Err(CnfError::data(format!(
            "checkpoint: expected {} bytes, got {}",
            expected,
            bytes.len()
        )));
    }
    for (i, chunk) in bytes[body..].chunks_exact(4).enumerate() {
        model.params[i] = f32::from_le_bytes(chunk.try_into().unwrap()) as f64;
    }
    Ok(model)
}

pub fn save(model: &FieldModel, path: &Path) -> Result<()> {
    let bytes = encode(model);
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| CnfError::io(&tmp, e))?;
    f.write_all(&bytes).map_err(|e| CnfError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CnfError::io(path, e))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<FieldModel> {
    let bytes = fs::read(path).map_err(|e| CnfError::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldConfig, FieldModel, GridConfig};

    #[test]
    fn round_trip_is_bit_exact() {
        let grid = GridConfig::new(3, 1 << 8, 2, 2, 8, 2).unwrap();
        let mut cfg = FieldConfig::hash(2, grid, 42);
        cfg.view_dependent = false;
        let model = FieldModel::new(cfg).unwrap();
        let bytes = encode(&model);
        let restored = decode(&bytes).unwrap();
        assert_eq!(encode(&restored), bytes);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode(b"NOPE....").is_err());
        assert!(decode(b"CNF1").is_err());
    }
}
