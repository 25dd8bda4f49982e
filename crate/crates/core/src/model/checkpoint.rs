//! Model checkpoint file.
//!
//! A checkpoint is a single JSON object:
//!
//! ```json
//! {"format": "rjm-mlp-checkpoint", "version": 1,
//!  "config": {"layer_sizes": [2, 16, 3], "activation": "relu", "init_seed": 0, "init_scale": 1.0},
//!  "theta": [ ...flattened parameters... ]}
//! ```
//!
//! `theta` uses the layout of [`Mlp::flatten`]. Floats are written in shortest
//! round-trip form and parsed back exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Mlp, MlpConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const CHECKPOINT_FORMAT: &str = "rjm-mlp-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Checkpoint<T> {
    pub format: String,
    pub version: u32,
    pub config: MlpConfig,
    pub theta: Vec<T>,
}

impl<T: Scalar> Checkpoint<T> {
    pub fn from_model(model: &Mlp<T>) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            config: model.config().clone(),
            theta: model.flatten().into_vec(),
        }
    }

    pub fn into_model(self) -> Result<Mlp<T>> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(Error::Config(format!(
                "not a model checkpoint (format '{}')",
                self.format
            )));
        }
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!(
                "unsupported checkpoint version {}",
                self.version
            )));
        }
        let mut m = Mlp::init(self.config)?;
        m.set_params(&self.theta)?;
        Ok(m)
    }
}

pub fn save_checkpoint<T: Scalar>(model: &Mlp<T>, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(&Checkpoint::from_model(model)).expect("serializable");
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<Mlp<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ck: Checkpoint<T> = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    ck.into_model()
}
