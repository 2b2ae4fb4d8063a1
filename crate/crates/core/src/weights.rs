//! Weights file: `{d, w, trained_on, config, created_at}` as JSON.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsf::WeightVector;
use crate::error::{Error, Result};
use crate::trainer::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsFile {
    pub d: usize,
    pub w: WeightVector,
    #[serde(default)]
    pub trained_on: String,
    #[serde(default)]
    pub config: Option<TrainConfig>,
    #[serde(default)]
    pub created_at: Option<String>,
}

impl WeightsFile {
    pub fn new(
        w: WeightVector,
        trained_on: impl Into<String>,
        config: Option<TrainConfig>,
    ) -> Self {
        WeightsFile {
            d: w.dim(),
            w,
            trained_on: trained_on.into(),
            config,
            created_at: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: WeightsFile = serde_json::from_str(text)
            .map_err(|e| Error::validation(format!("invalid weights file: {e}")))?;
        if file.d != file.w.dim() {
            return Err(Error::validation(format!(
                "weights file declares d={} but holds {} weights",
                file.d,
                file.w.dim()
            )));
        }
        Ok(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        WeightsFile::parse(&text)
    }

    /// Fails unless the weights match embedding dimension `d`.
    pub fn expect_dim(&self, d: usize) -> Result<&WeightVector> {
        if self.d != d {
            return Err(Error::validation(format!(
                "weights have dimension {}, documents have {d}",
                self.d
            )));
        }
        Ok(&self.w)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("weights serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let f = WeightsFile::new(
            WeightVector::new(vec![0.1, 0.2, 1.0 / 3.0]).unwrap(),
            "train.jsonl",
            Some(TrainConfig::default()),
        );
        assert_eq!(WeightsFile::parse(&f.to_json()).unwrap(), f);
    }

    #[test]
    fn rejects_dimension_mismatch_and_negatives() {
        assert!(WeightsFile::parse(r#"{"d":3,"w":[0.5,0.5]}"#).is_err());
        assert!(WeightsFile::parse(r#"{"d":2,"w":[0.5,-0.5]}"#).is_err());
        let f = WeightsFile::parse(r#"{"d":2,"w":[0.5,0.5]}"#).unwrap();
        assert!(f.expect_dim(2).is_ok());
        assert!(f.expect_dim(3).is_err());
    }
}
