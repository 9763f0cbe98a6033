//! On-disk model description.
//!
//! TOML with complex numbers written as `[re, im]` pairs and matrices as
//! row-major nested arrays:
//!
//! ```toml
//! dimension = 2
//! hamiltonian = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]
//! diffusive_ops = [[[[0.0, 0.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]]
//! dissipative_ops = []
//!
//! [[jump_channels]]
//! label = "count"
//! weight = 1.0
//! kraus = [[[[0.0, 0.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]]
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// Row-major matrix of `[re, im]` pairs.
pub type MatrixRepr = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_repr(m: &ComplexMatrix) -> MatrixRepr {
    m.to_rows().into_iter().map(|row| row.into_iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn matrix_from_repr(repr: &MatrixRepr) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = repr.iter().map(|row| row.iter().map(|&[re, im]| C64::new(re, im)).collect()).collect();
    ComplexMatrix::from_rows(&rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpChannelConfig {
    pub label: String,
    pub weight: f64,
    pub kraus: Vec<MatrixRepr>,
}

/// Serializable model description. Field order matters for TOML output:
/// plain arrays precede the array of tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub dimension: usize,
    pub hamiltonian: MatrixRepr,
    #[serde(default)]
    pub diffusive_ops: Vec<MatrixRepr>,
    #[serde(default)]
    pub dissipative_ops: Vec<MatrixRepr>,
    #[serde(default)]
    pub jump_channels: Vec<JumpChannelConfig>,
}

impl ModelConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}
