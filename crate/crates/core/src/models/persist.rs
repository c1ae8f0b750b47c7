//! Versioned JSON model files. Floats use the shortest representation that
//! parses back to the same bits.

use serde::{Deserialize, Serialize};

use super::{Fitted, ModelSpec, TrainedModel};
use crate::error::{Error, Result};
use crate::features::Column;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize)]
struct FileRef<'a> {
    format_version: u64,
    spec: &'a ModelSpec,
    columns: &'a [Column],
    parameters: &'a Fitted,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileOwned {
    #[allow(dead_code)]
    format_version: u64,
    spec: ModelSpec,
    columns: Vec<Column>,
    parameters: Fitted,
}

#[derive(Deserialize)]
struct VersionOnly {
    format_version: u64,
}

pub fn save_model(model: &TrainedModel) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(&FileRef {
        format_version: FORMAT_VERSION,
        spec: &model.spec,
        columns: &model.columns,
        parameters: &model.fitted,
    })?;
    out.push(b'\n');
    Ok(out)
}

pub fn load_model(bytes: &[u8]) -> Result<TrainedModel> {
    let corrupt = |e: serde_json::Error| Error::CorruptPayload(e.to_string());
    let version: VersionOnly = serde_json::from_slice(bytes).map_err(corrupt)?;
    if version.format_version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version.format_version));
    }
    let file: FileOwned = serde_json::from_slice(bytes).map_err(corrupt)?;
    file.spec
        .params()
        .map_err(|e| Error::CorruptPayload(format!("invalid spec: {e}")))?;
    Ok(TrainedModel {
        spec: file.spec,
        columns: file.columns,
        fitted: file.parameters,
    })
}
