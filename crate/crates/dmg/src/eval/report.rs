use crate::error::Result;
use serde::{Deserialize, Serialize};

/// Summary emitted by the `eval` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub tonality: f64,
    pub pitch_histogram: Vec<u64>,
    pub style_divergence: f64,
    pub alignment_rate: f64,
    pub posterior_accuracy: f64,
}

impl MetricReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Scalar metrics only; the histogram has its own CSV form.
    pub fn to_csv(&self) -> String {
        format!(
            "metric,value\ntonality,{:.6}\nstyle_divergence,{:.6}\nalignment_rate,{:.6}\nposterior_accuracy,{:.6}\n",
            self.tonality, self.style_divergence, self.alignment_rate, self.posterior_accuracy
        )
    }
}
