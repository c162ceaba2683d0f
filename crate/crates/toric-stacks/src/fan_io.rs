//! JSON fan files: serialization of stacky fans for the CLI and fixtures.

use crate::exact_math::Int;
use crate::stacky_fan::{FanError, Ray, StackyFan};
use num::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FanIoError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed fan JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("fan structure error: {0}")]
    Fan(#[from] FanError),
}

/// On-disk fan description.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FanFile {
    pub name: String,
    pub rig_rank: usize,
    #[serde(default)]
    pub torsion_orders: Vec<u32>,
    pub rays: Vec<RayFile>,
    /// Maximal cones as lists of ray ids.
    pub max_cones: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RayFile {
    pub id: String,
    pub b: Vec<i64>,
}

impl FanFile {
    pub fn to_fan(&self) -> Result<StackyFan, FanError> {
        let rays = self
            .rays
            .iter()
            .map(|r| Ray {
                id: r.id.clone(),
                b: r.b.iter().map(|&v| Int::from(v)).collect(),
            })
            .collect();
        StackyFan::new(
            self.rig_rank,
            self.torsion_orders.clone(),
            rays,
            self.max_cones.clone(),
        )
    }

    pub fn from_fan(name: &str, fan: &StackyFan) -> FanFile {
        FanFile {
            name: name.to_string(),
            rig_rank: fan.rig_rank(),
            torsion_orders: fan.torsion_orders().to_vec(),
            rays: fan
                .rays()
                .iter()
                .map(|r| RayFile {
                    id: r.id.clone(),
                    b: r.b.iter().map(|v| v.to_i64().expect("small entries")).collect(),
                })
                .collect(),
            max_cones: fan
                .max_cones()
                .iter()
                .map(|c| c.iter().map(|&ri| fan.rays()[ri].id.clone()).collect())
                .collect(),
        }
    }
}

/// Load and parse a fan file (structure errors only; call validate for the
/// geometric checks).
pub fn load_fan_file(path: &str) -> Result<FanFile, FanIoError> {
    let text = std::fs::read_to_string(path).map_err(|source| FanIoError::Io {
        path: path.to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Load a fan file and build the fan.
pub fn load_fan(path: &str) -> Result<(FanFile, StackyFan), FanIoError> {
    let file = load_fan_file(path)?;
    let fan = file.to_fan()?;
    Ok((file, fan))
}

/// Canonical JSON emission (pretty, stable field order).
pub fn emit_fan_file(file: &FanFile) -> String {
    serde_json::to_string_pretty(file).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stacky_fan::known_fans::*;

    #[test]
    fn round_trip_bundled() {
        for (name, fan) in [
            ("p1", p1()),
            ("p12", p12()),
            ("p23", p23()),
            ("p2", p2()),
            ("p1xbmu2", p1xbmu2()),
        ] {
            let file = FanFile::from_fan(name, &fan);
            let text = emit_fan_file(&file);
            let parsed: FanFile = serde_json::from_str(&text).unwrap();
            assert_eq!(parsed, file);
            let rebuilt = parsed.to_fan().unwrap();
            assert!(rebuilt.validate().all_pass());
            assert_eq!(rebuilt.rays().len(), fan.rays().len());
            assert_eq!(rebuilt.max_cones(), fan.max_cones());
        }
    }

    #[test]
    fn malformed_json_is_reported() {
        let err = serde_json::from_str::<FanFile>("{\"name\": \"x\", ").unwrap_err();
        assert!(err.to_string().contains("EOF") || !err.to_string().is_empty());
    }

    #[test]
    fn missing_torsion_defaults_empty() {
        let text = r#"{
            "name": "p1",
            "rig_rank": 1,
            "rays": [{"id": "plus", "b": [1]}, {"id": "minus", "b": [-1]}],
            "max_cones": [["plus"], ["minus"]]
        }"#;
        let file: FanFile = serde_json::from_str(text).unwrap();
        assert!(file.torsion_orders.is_empty());
        assert!(file.to_fan().unwrap().validate().all_pass());
    }

    #[test]
    fn unknown_ray_id_fails() {
        let text = r#"{
            "name": "bad",
            "rig_rank": 1,
            "rays": [{"id": "plus", "b": [1]}],
            "max_cones": [["nope"]]
        }"#;
        let file: FanFile = serde_json::from_str(text).unwrap();
        assert!(file.to_fan().is_err());
    }
}
