//! Posterior estimators Q: classify which style id produced an expected
//! rollout. Each variant sits behind a common trait and is picked by name at
//! runtime.

use crate::error::{DmgError, Result};
use crate::model::config::QVariant;
use crate::model::params::DmgParams;
use crate::numcore::{gru_cell, CellWeights, NodeId, Tape, Tensor};

pub trait PosteriorEstimator: Send + Sync {
    fn name(&self) -> &'static str;

    /// Log-probability vector over the K styles (1 x K) for an expected
    /// embedding sequence.
    fn log_posterior(&self, tape: &mut Tape, params: &DmgParams, seq: &[NodeId])
        -> Result<NodeId>;
}

/// Runs a GRU over the sequence and projects its final state: order matters.
pub struct GruPosterior;

impl PosteriorEstimator for GruPosterior {
    fn name(&self) -> &'static str {
        "gru"
    }

    fn log_posterior(
        &self,
        tape: &mut Tape,
        params: &DmgParams,
        seq: &[NodeId],
    ) -> Result<NodeId> {
        if seq.is_empty() {
            return Err(DmgError::invalid("posterior input sequence is empty"));
        }
        let w = CellWeights {
            w_ih: tape.param(&params.store, params.idx.q_gru.w_ih),
            w_hh: tape.param(&params.store, params.idx.q_gru.w_hh),
            bias: tape.param(&params.store, params.idx.q_gru.bias),
        };
        let mut h = tape.leaf(&Tensor::zeros(vec![1, params.cfg.hidden]));
        for &e in seq {
            h = gru_cell(tape, e, h, &w)?;
        }
        let q_w = tape.param(&params.store, params.idx.q_out_w);
        let q_b = tape.param(&params.store, params.idx.q_out_b);
        let proj = tape.matmul(h, q_w)?;
        let logits = tape.add(proj, q_b)?;
        tape.log_softmax_rows(logits)
    }
}

/// Time-averages the sequence then applies a linear projection: order is
/// discarded.
pub struct LpPosterior;

impl PosteriorEstimator for LpPosterior {
    fn name(&self) -> &'static str {
        "lp"
    }

    fn log_posterior(
        &self,
        tape: &mut Tape,
        params: &DmgParams,
        seq: &[NodeId],
    ) -> Result<NodeId> {
        if seq.is_empty() {
            return Err(DmgError::invalid("posterior input sequence is empty"));
        }
        let stacked = tape.concat_rows(seq)?;
        let mean = tape.mean_rows(stacked)?;
        let q_w = tape.param(&params.store, params.idx.q_lp_w);
        let q_b = tape.param(&params.store, params.idx.q_lp_b);
        let proj = tape.matmul(mean, q_w)?;
        let logits = tape.add(proj, q_b)?;
        tape.log_softmax_rows(logits)
    }
}

/// Every registered estimator.
pub fn registry() -> Vec<Box<dyn PosteriorEstimator>> {
    vec![Box::new(GruPosterior), Box::new(LpPosterior)]
}

pub fn by_name(name: &str) -> Result<Box<dyn PosteriorEstimator>> {
    registry()
        .into_iter()
        .find(|q| q.name() == name)
        .ok_or_else(|| DmgError::Config(format!("unknown posterior estimator {name:?}")))
}

pub fn for_variant(variant: QVariant) -> Box<dyn PosteriorEstimator> {
    by_name(variant.name()).expect("registry covers every variant")
}
