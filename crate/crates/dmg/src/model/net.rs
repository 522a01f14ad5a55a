//! Forward graph construction: style-conditioned bidirectional encoder,
//! additive attention, decoder steps, and the expected-embedding rollout.

use crate::error::{DmgError, Result};
use crate::model::params::DmgParams;
use crate::numcore::{lstm_cell, CellWeights, NodeId, Tape};

/// Encoder states plus the style-augmented context vector and the decoder's
/// initial state derived from it.
#[derive(Debug, Clone, Copy)]
pub struct EncoderOutput {
    /// T_src x 2H concatenated bidirectional states.
    pub states: NodeId,
    /// 1 x (2H + S): final forward state, final backward state, style row.
    pub v: NodeId,
    pub h0: NodeId,
    pub c0: NodeId,
    /// states @ att_enc, shared by every attention query.
    pub att_proj: NodeId,
    pub len: usize,
}

fn cell_weights(tape: &mut Tape, params: &DmgParams, idx: crate::model::params::CellIndex) -> CellWeights {
    CellWeights {
        w_ih: tape.param(&params.store, idx.w_ih),
        w_hh: tape.param(&params.store, idx.w_hh),
        bias: tape.param(&params.store, idx.bias),
    }
}

pub fn encode(
    tape: &mut Tape,
    params: &DmgParams,
    src: &[usize],
    style_id: usize,
) -> Result<EncoderOutput> {
    if src.is_empty() {
        return Err(DmgError::invalid("empty source sequence"));
    }
    if style_id >= params.cfg.n_styles {
        return Err(DmgError::invalid(format!(
            "style id {style_id} out of range (K={})",
            params.cfg.n_styles
        )));
    }
    let h = params.cfg.hidden;
    let src_embed = tape.param(&params.store, params.idx.src_embed);
    let embeds: Vec<NodeId> = src
        .iter()
        .map(|&i| tape.row(src_embed, i))
        .collect::<Result<_>>()?;

    let zero = tape.leaf(&crate::numcore::Tensor::zeros(vec![1, h]));
    let fwd_w = cell_weights(tape, params, params.idx.enc_fwd);
    let bwd_w = cell_weights(tape, params, params.idx.enc_bwd);

    let mut fwd_states = Vec::with_capacity(src.len());
    let (mut fh, mut fc) = (zero, zero);
    for &e in &embeds {
        let (nh, nc) = lstm_cell(tape, e, fh, fc, &fwd_w)?;
        fwd_states.push(nh);
        fh = nh;
        fc = nc;
    }

    let mut bwd_states = vec![zero; src.len()];
    let (mut bh, mut bc) = (zero, zero);
    for (t, &e) in embeds.iter().enumerate().rev() {
        let (nh, nc) = lstm_cell(tape, e, bh, bc, &bwd_w)?;
        bwd_states[t] = nh;
        bh = nh;
        bc = nc;
    }

    let rows: Vec<NodeId> = fwd_states
        .iter()
        .zip(&bwd_states)
        .map(|(&f, &b)| tape.concat_cols(&[f, b]))
        .collect::<Result<_>>()?;
    let states = tape.concat_rows(&rows)?;

    let style_embed = tape.param(&params.store, params.idx.style_embed);
    let style = tape.row(style_embed, style_id)?;
    let v = tape.concat_cols(&[fh, bh, style])?;

    let w_init_h = tape.param(&params.store, params.idx.w_init_h);
    let w_init_c = tape.param(&params.store, params.idx.w_init_c);
    let h0_pre = tape.matmul(v, w_init_h)?;
    let h0 = tape.tanh(h0_pre);
    let c0_pre = tape.matmul(v, w_init_c)?;
    let c0 = tape.tanh(c0_pre);

    let att_enc = tape.param(&params.store, params.idx.att_enc);
    let att_proj = tape.matmul(states, att_enc)?;

    Ok(EncoderOutput {
        states,
        v,
        h0,
        c0,
        att_proj,
        len: src.len(),
    })
}

/// Additive attention: weights over source positions and their weighted sum.
pub fn attend(
    tape: &mut Tape,
    params: &DmgParams,
    state: NodeId,
    enc: &EncoderOutput,
) -> Result<(NodeId, NodeId)> {
    let att_dec = tape.param(&params.store, params.idx.att_dec);
    let att_bias = tape.param(&params.store, params.idx.att_bias);
    let att_v = tape.param(&params.store, params.idx.att_v);

    let query = tape.matmul(state, att_dec)?;
    let qb = tape.add(query, att_bias)?;
    let qrows = tape.broadcast_rows(qb, enc.len)?;
    let pre = tape.add(enc.att_proj, qrows)?;
    let act = tape.tanh(pre);
    let scores = tape.matmul(act, att_v)?; // T x 1
    let scores_row = tape.transpose(scores); // 1 x T
    let weights = tape.softmax_rows(scores_row)?;
    let context = tape.matmul(weights, enc.states)?; // 1 x 2H
    Ok((context, weights))
}

/// One decoder step.
#[derive(Debug, Clone, Copy)]
pub struct StepOutput {
    /// Probability distribution over the decode vocabulary, 1 x V_tgt.
    pub p: NodeId,
    /// Log of the same distribution.
    pub logp: NodeId,
    pub h: NodeId,
    pub c: NodeId,
    pub attn: NodeId,
}

pub fn decode_step(
    tape: &mut Tape,
    params: &DmgParams,
    prev_embed: NodeId,
    h: NodeId,
    c: NodeId,
    enc: &EncoderOutput,
) -> Result<StepOutput> {
    let (context, attn) = attend(tape, params, h, enc)?;
    let input = tape.concat_cols(&[prev_embed, context])?;
    let dec_w = cell_weights(tape, params, params.idx.dec);
    let (nh, nc) = lstm_cell(tape, input, h, c, &dec_w)?;
    let w_out = tape.param(&params.store, params.idx.w_out);
    let b_out = tape.param(&params.store, params.idx.b_out);
    let proj = tape.matmul(nh, w_out)?;
    let logits = tape.add(proj, b_out)?;
    let p = tape.softmax_rows(logits)?;
    let logp = tape.log_softmax_rows(logits)?;
    Ok(StepOutput {
        p,
        logp,
        h: nh,
        c: nc,
        attn,
    })
}

/// Probability-weighted average of decoder embedding rows (1 x E).
pub fn expected_embedding(tape: &mut Tape, params: &DmgParams, p: NodeId) -> Result<NodeId> {
    let w_embed = tape.param(&params.store, params.idx.tgt_embed);
    tape.matmul(p, w_embed)
}

/// Feed each step's expected embedding back as the next input, starting from
/// the `_START_` embedding. Returns one expected embedding per decode step;
/// fully differentiable, no sampling.
pub fn rollout_expected(
    tape: &mut Tape,
    params: &DmgParams,
    enc: &EncoderOutput,
    steps: usize,
) -> Result<Vec<NodeId>> {
    if steps == 0 {
        return Err(DmgError::invalid("rollout needs at least one step"));
    }
    let w_embed = tape.param(&params.store, params.idx.tgt_embed);
    let mut prev = tape.row(w_embed, crate::model::START_IDX)?;
    let mut h = enc.h0;
    let mut c = enc.c0;
    let mut seq = Vec::with_capacity(steps);
    for _ in 0..steps {
        let step = decode_step(tape, params, prev, h, c, enc)?;
        let e = expected_embedding(tape, params, step.p)?;
        seq.push(e);
        prev = e;
        h = step.h;
        c = step.c;
    }
    Ok(seq)
}
