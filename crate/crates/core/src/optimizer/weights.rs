use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostWeights {
    pub lambda_t: f64,
    pub lambda_s: f64,
    pub lambda_r: f64,
    /// Added to the recomputed transition cost when no edge exists.
    /// `None` means ten times the graph's sigma.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub missing_edge_penalty: Option<f64>,
    /// `M`: semantic cost of a node whose tag does not match the phrase.
    pub semantic_mismatch_penalty: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights {
            lambda_t: 1.0,
            lambda_s: 10.0,
            lambda_r: 1.0,
            missing_edge_penalty: None,
            semantic_mismatch_penalty: 1e6,
        }
    }
}

impl CostWeights {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
    }

    pub fn missing_edge_penalty(&self, sigma: f64) -> f64 {
        self.missing_edge_penalty.unwrap_or(10.0 * sigma)
    }

    /// Checks signs and that `M` outweighs any non-semantic path cost of
    /// `n_phrases` phrases: `M > n * (lambda_t * missing + 2 * lambda_r)`.
    pub fn validate(&self, n_phrases: usize, sigma: f64) -> Result<()> {
        let missing = self.missing_edge_penalty(sigma);
        for (name, v) in [
            ("lambda_t", self.lambda_t),
            ("lambda_s", self.lambda_s),
            ("lambda_r", self.lambda_r),
            ("missing_edge_penalty", missing),
            ("semantic_mismatch_penalty", self.semantic_mismatch_penalty),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Value(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        let bound = n_phrases as f64 * (self.lambda_t * missing + 2.0 * self.lambda_r);
        if self.semantic_mismatch_penalty <= bound {
            return Err(Error::Value(format!(
                "semantic_mismatch_penalty {} must exceed {bound} for {n_phrases} phrases",
                self.semantic_mismatch_penalty
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_bound() {
        let w = CostWeights::default();
        assert_eq!(w.missing_edge_penalty(0.2), 2.0);
        assert!(w.validate(8, 0.2).is_ok());
        let tight = CostWeights {
            semantic_mismatch_penalty: 8.0,
            ..w
        };
        assert!(matches!(tight.validate(2, 0.2), Err(Error::Value(_))));
        let parsed: CostWeights = serde_json::from_str(r#"{"lambda_t": 2}"#).unwrap();
        assert_eq!(parsed.lambda_t, 2.0);
        assert_eq!(parsed.lambda_s, 10.0);
    }
}
