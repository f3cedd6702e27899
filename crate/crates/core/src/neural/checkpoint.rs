use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NetworkConfig, NetworkParams, NeuralError, Tensor};

pub const CHECKPOINT_FORMAT: &str = "cocreate-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub tensor: Tensor,
}

/// Serialized network weights plus an echo of the configuration that
/// produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub network: NetworkConfig,
    /// Free-form run configuration (environment, training settings).
    #[serde(default)]
    pub config: serde_json::Value,
    pub tensors: Vec<NamedTensor>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl Checkpoint {
    pub fn from_params(params: &NetworkParams, config: serde_json::Value) -> Self {
        let tensors = params
            .layout()
            .blocks
            .iter()
            .map(|b| NamedTensor {
                name: b.name.clone(),
                tensor: Tensor::new(b.shape.clone(), params.values[b.range()].to_vec())
                    .expect("layout block shapes match their ranges"),
            })
            .collect();
        Self {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            network: params.config().clone(),
            config,
            tensors,
            metadata: BTreeMap::new(),
        }
    }

    /// Rebuilds the network, checking every tensor against the layout implied
    /// by the stored network config.
    pub fn to_params(&self) -> Result<NetworkParams, NeuralError> {
        self.validate_header()?;
        let layout = self
            .network
            .layout()
            .map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
        if layout.blocks.len() != self.tensors.len() {
            return Err(NeuralError::Checkpoint(format!(
                "expected {} tensors, found {}",
                layout.blocks.len(),
                self.tensors.len()
            )));
        }
        let mut values = Vec::with_capacity(layout.total);
        for (block, nt) in layout.blocks.iter().zip(&self.tensors) {
            if block.name != nt.name || block.shape != nt.tensor.shape() {
                return Err(NeuralError::Checkpoint(format!(
                    "tensor {} {:?} does not match expected {} {:?}",
                    nt.name,
                    nt.tensor.shape(),
                    block.name,
                    block.shape
                )));
            }
            nt.tensor
                .check()
                .map_err(|e| NeuralError::Checkpoint(format!("{}: {e}", nt.name)))?;
            values.extend_from_slice(nt.tensor.values());
        }
        NetworkParams::from_values(self.network.clone(), values)
            .map_err(|e| NeuralError::Checkpoint(e.to_string()))
    }

    fn validate_header(&self) -> Result<(), NeuralError> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(NeuralError::Checkpoint(format!(
                "unknown format {:?}",
                self.format
            )));
        }
        if self.version != CHECKPOINT_VERSION {
            return Err(NeuralError::Checkpoint(format!(
                "unsupported version {}",
                self.version
            )));
        }
        self.network
            .validate()
            .map_err(|e| NeuralError::Checkpoint(e.to_string()))
    }

    pub fn to_json_bytes(&self) -> Result<Vec<u8>, NeuralError> {
        serde_json::to_vec_pretty(self).map_err(|e| NeuralError::Checkpoint(e.to_string()))
    }

    /// Parses and validates a checkpoint; the network is rebuilt once to
    /// catch inconsistent tensors early.
    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, NeuralError> {
        let ck: Checkpoint =
            serde_json::from_slice(bytes).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
        ck.to_params()?;
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<(), NeuralError> {
        std::fs::write(path, self.to_json_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, NeuralError> {
        Self::from_json_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net() -> NetworkParams {
        let cfg = NetworkConfig {
            input_dim: 3,
            lstm_hidden: 4,
            actor_hidden: vec![5],
            critic_hidden: vec![2, 2],
            actor_outputs: 3,
            layer_norm_eps: 1e-5,
        };
        NetworkParams::init(cfg, 11).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut p = net();
        // awkward values that need all 17 significant digits
        p.values[0] = 0.1 + 0.2;
        p.values[1] = 1e-300;
        p.values[2] = -std::f64::consts::PI / 7.0;
        let mut ck = Checkpoint::from_params(&p, serde_json::json!({"seed": 1}));
        ck.metadata.insert("note".into(), "x".into());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        ck.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, ck);
        let q = back.to_params().unwrap();
        assert!(p
            .values
            .iter()
            .zip(&q.values)
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn rejects_tampering() {
        let ck = Checkpoint::from_params(&net(), serde_json::Value::Null);
        let mut bad = ck.clone();
        bad.version = 2;
        assert!(bad.to_params().is_err());
        let mut bad = ck.clone();
        bad.format = "other".into();
        assert!(bad.to_params().is_err());
        let mut bad = ck.clone();
        bad.tensors.pop();
        assert!(bad.to_params().is_err());
        let mut bad = ck.clone();
        bad.tensors[0].name = "lstm.w_hh".into();
        assert!(bad.to_params().is_err());
        let mut bad = ck.clone();
        bad.network.lstm_hidden = 5;
        assert!(bad.to_params().is_err());
        assert!(Checkpoint::from_json_bytes(b"{").is_err());
        assert!(Checkpoint::from_json_bytes(b"[]").is_err());
    }
}
