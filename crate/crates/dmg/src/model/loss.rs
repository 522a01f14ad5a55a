//! Token cross-entropy, the mutual-information regularizer, and the combined
//! training objective.

use crate::error::{DmgError, Result};
use crate::model::net::{decode_step, encode, rollout_expected, EncoderOutput};
use crate::model::params::DmgParams;
use crate::model::posterior::PosteriorEstimator;
use crate::model::START_IDX;
use crate::numcore::{NodeId, Tape};

pub struct CeOutput {
    /// Mean negative log-likelihood per token.
    pub loss: NodeId,
    pub correct: usize,
    pub tokens: usize,
}

/// Decode against a target sequence, accumulating cross-entropy. The next
/// input token is chosen by `pick_next(j, P_j)`, which lets the caller plug
/// in teacher forcing, scheduled sampling, or force decoding.
pub fn ce_decode(
    tape: &mut Tape,
    params: &DmgParams,
    enc: &EncoderOutput,
    tgt: &[usize],
    mut pick_next: impl FnMut(usize, &[f64]) -> usize,
) -> Result<CeOutput> {
    if tgt.is_empty() {
        return Err(DmgError::invalid("empty target sequence"));
    }
    let w_embed = tape.param(&params.store, params.idx.tgt_embed);
    let mut prev_token = START_IDX;
    let mut h = enc.h0;
    let mut c = enc.c0;
    let mut nll_sum: Option<NodeId> = None;
    let mut correct = 0;

    for (j, &target) in tgt.iter().enumerate() {
        let prev = tape.row(w_embed, prev_token)?;
        let step = decode_step(tape, params, prev, h, c, enc)?;
        let picked = tape.pick(step.logp, 0, target)?;
        let nll = tape.scale(picked, -1.0);
        nll_sum = Some(match nll_sum {
            Some(acc) => tape.add(acc, nll)?,
            None => nll,
        });
        let dist = tape.value(step.p);
        let argmax = dist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        if argmax == target {
            correct += 1;
        }
        prev_token = pick_next(j, dist);
        h = step.h;
        c = step.c;
    }

    let loss = tape.scale(nll_sum.unwrap(), 1.0 / tgt.len() as f64);
    Ok(CeOutput {
        loss,
        correct,
        tokens: tgt.len(),
    })
}

/// Sum over styles k of log Q(k | expected rollout conditioned on k).
/// Zero when the posterior is perfect; always nonpositive.
pub fn mim_sum(
    tape: &mut Tape,
    params: &DmgParams,
    src: &[usize],
    steps: usize,
    q: &dyn PosteriorEstimator,
) -> Result<NodeId> {
    let mut acc: Option<NodeId> = None;
    for k in 0..params.cfg.n_styles {
        let enc = encode(tape, params, src, k)?;
        let seq = rollout_expected(tape, params, &enc, steps)?;
        let logq = q.log_posterior(tape, params, &seq)?;
        let term = tape.pick(logq, 0, k)?;
        acc = Some(match acc {
            Some(a) => tape.add(a, term)?,
            None => term,
        });
    }
    Ok(acc.unwrap())
}

pub struct LossParts {
    pub total: NodeId,
    /// Mean teacher-forced cross-entropy over the batch.
    pub ce: NodeId,
    /// Mean MIM sum over the batch (before the lambda/K weighting).
    pub mim: Option<NodeId>,
    pub correct: usize,
    pub tokens: usize,
}

/// Minimization objective over a batch: `(1-lambda) * CE - (lambda/K) * MIM`.
/// With `lambda = 0` the style rollouts are skipped entirely, so no gradient
/// reaches the posterior parameters.
pub fn total_loss(
    tape: &mut Tape,
    params: &DmgParams,
    batch: &[(Vec<usize>, Vec<usize>)],
    style_ids: &[usize],
    lambda: f64,
    q: &dyn PosteriorEstimator,
) -> Result<LossParts> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(DmgError::invalid(format!(
            "lambda must be in [0, 1), got {lambda}"
        )));
    }
    if batch.is_empty() || batch.len() != style_ids.len() {
        return Err(DmgError::invalid("batch and style ids must be nonempty and equal length"));
    }

    let mut ce_acc: Option<NodeId> = None;
    let mut mim_acc: Option<NodeId> = None;
    let mut correct = 0;
    let mut tokens = 0;

    for ((src, tgt), &style) in batch.iter().zip(style_ids) {
        let enc = encode(tape, params, src, style)?;
        let ce = ce_decode(tape, params, &enc, tgt, |j, _| tgt[j])?;
        correct += ce.correct;
        tokens += ce.tokens;
        ce_acc = Some(match ce_acc {
            Some(a) => tape.add(a, ce.loss)?,
            None => ce.loss,
        });
        if lambda > 0.0 {
            let m = mim_sum(tape, params, src, tgt.len(), q)?;
            mim_acc = Some(match mim_acc {
                Some(a) => tape.add(a, m)?,
                None => m,
            });
        }
    }

    let inv_n = 1.0 / batch.len() as f64;
    let ce_mean = tape.scale(ce_acc.unwrap(), inv_n);
    let ce_part = tape.scale(ce_mean, 1.0 - lambda);
    let (total, mim_mean) = match mim_acc {
        Some(m) => {
            let mim_mean = tape.scale(m, inv_n);
            let weighted = tape.scale(mim_mean, lambda / params.cfg.n_styles as f64);
            (tape.sub(ce_part, weighted)?, Some(mim_mean))
        }
        None => (ce_part, None),
    };
    Ok(LossParts {
        total,
        ce: ce_mean,
        mim: mim_mean,
        correct,
        tokens,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::config::ModelConfig;
    use crate::model::posterior::{GruPosterior, LpPosterior};
    use crate::numcore::gradcheck::{finite_difference_gradient, max_relative_error};
    use crate::numcore::Rng;

    fn cfg() -> ModelConfig {
        ModelConfig {
            vocab_src: 8,
            vocab_tgt: 8,
            embed: 4,
            hidden: 4,
            style_dim: 3,
            n_styles: 2,
        }
    }

    fn batch() -> (Vec<(Vec<usize>, Vec<usize>)>, Vec<usize>) {
        (
            vec![
                (vec![4, 5, 2, 6, 1], vec![5, 7, 2, 4, 1]),
                (vec![6, 7, 1], vec![4, 5, 1]),
            ],
            vec![0, 1],
        )
    }

    #[test]
    fn lambda_zero_is_exactly_cross_entropy() {
        let params = DmgParams::init(cfg(), &mut Rng::new(3));
        let (b, ids) = batch();
        let mut tape = Tape::new();
        let parts = total_loss(&mut tape, &params, &b, &ids, 0.0, &GruPosterior).unwrap();
        assert_eq!(tape.value(parts.total), tape.value(parts.ce));
        assert!(parts.mim.is_none());
    }

    #[test]
    fn lambda_half_composes_from_exposed_sub_terms() {
        let params = DmgParams::init(cfg(), &mut Rng::new(3));
        let (b, ids) = batch();
        let mut tape = Tape::new();
        let parts = total_loss(&mut tape, &params, &b, &ids, 0.5, &GruPosterior).unwrap();
        let ce = tape.value(parts.ce)[0];
        let mim = tape.value(parts.mim.unwrap())[0];
        let expect = 0.5 * ce - (0.5 / 2.0) * mim;
        assert!((tape.value(parts.total)[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn perfect_posterior_contributes_zero() {
        // With a single style, log Q(0|..) is exactly 0, the regularizer's
        // minimum, so the total is just the weighted CE.
        let mut c = cfg();
        c.n_styles = 1;
        let params = DmgParams::init(c, &mut Rng::new(3));
        let (b, _) = batch();
        let ids = vec![0, 0];
        let mut tape = Tape::new();
        let parts = total_loss(&mut tape, &params, &b, &ids, 0.5, &GruPosterior).unwrap();
        assert_eq!(tape.value(parts.mim.unwrap()), &[0.0]);
        let ce = tape.value(parts.ce)[0];
        assert!((tape.value(parts.total)[0] - 0.5 * ce).abs() < 1e-12);
    }

    #[test]
    fn invalid_lambda_is_error() {
        let params = DmgParams::init(cfg(), &mut Rng::new(3));
        let (b, ids) = batch();
        let mut tape = Tape::new();
        assert!(total_loss(&mut tape, &params, &b, &ids, 1.0, &GruPosterior).is_err());
        let mut tape = Tape::new();
        assert!(total_loss(&mut tape, &params, &b, &ids, -0.1, &GruPosterior).is_err());
    }

    #[test]
    fn lambda_zero_gives_zero_gradient_into_q_params() {
        let params = DmgParams::init(cfg(), &mut Rng::new(3));
        let (b, ids) = batch();
        let mut tape = Tape::new();
        let parts = total_loss(&mut tape, &params, &b, &ids, 0.0, &GruPosterior).unwrap();
        let grads = tape.backward(parts.total).unwrap();
        for q_idx in params.q_param_indices() {
            assert!(grads.get(&params.store, q_idx).data.iter().all(|&g| g == 0.0));
        }
    }

    // Spot gradient check on a few representative parameters; the acceptance
    // suite sweeps every parameter.
    #[test]
    fn spot_gradient_check_against_finite_differences() {
        for (variant, q) in [
            ("gru", Box::new(GruPosterior) as Box<dyn PosteriorEstimator>),
            ("lp", Box::new(LpPosterior) as Box<dyn PosteriorEstimator>),
        ] {
            let mut params = DmgParams::init(cfg(), &mut Rng::new(3));
            let (b, ids) = batch();

            let mut tape = Tape::new();
            let parts = total_loss(&mut tape, &params, &b, &ids, 0.5, q.as_ref()).unwrap();
            let grads = tape.backward(parts.total).unwrap();

            for idx in [
                params.idx.style_embed,
                params.idx.tgt_embed,
                params.idx.att_v,
                params.idx.dec.w_hh,
            ] {
                let analytic = grads.get(&params.store, idx).data;
                let (b2, ids2) = batch();
                let numeric = finite_difference_gradient(&mut params.store.clone(), idx, 1e-5, |s| {
                    let p = DmgParams {
                        cfg: cfg(),
                        store: s.clone(),
                        idx: params.idx.clone(),
                    };
                    let mut t = Tape::new();
                    let parts = total_loss(&mut t, &p, &b2, &ids2, 0.5, q.as_ref()).unwrap();
                    t.value(parts.total)[0]
                });
                let err = max_relative_error(&analytic, &numeric);
                assert!(err < 1e-4, "{variant} param {idx} rel err {err}");
            }
        }
    }

    #[test]
    fn rollout_gradient_reaches_style_embedding() {
        let params = DmgParams::init(cfg(), &mut Rng::new(5));
        let (b, ids) = batch();
        let mut tape = Tape::new();
        let parts = total_loss(&mut tape, &params, &b, &ids, 0.5, &GruPosterior).unwrap();
        let grads = tape.backward(parts.total).unwrap();
        let g = grads.get(&params.store, params.idx.style_embed);
        assert!(g.data.iter().any(|&v| v != 0.0));
    }
}
