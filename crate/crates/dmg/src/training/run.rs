//! The training loop: scheduled sampling with force decoding on the feedback
//! path, one optimizer step per batch, best-validation checkpointing.

use std::path::{Path, PathBuf};

use crate::corpus::tokens::TokenVocab;
use crate::corpus::CorpusSplit;
use crate::error::{DmgError, Result};
use crate::model::loss::{ce_decode, mim_sum};
use crate::model::net::encode;
use crate::model::posterior::PosteriorEstimator;
use crate::model::{save_checkpoint, DmgParams, ModelConfig};
use crate::numcore::{adam_step, AdamState, Rng, Tape, Tensor};
use crate::training::config::TrainConfig;
use crate::training::data::{
    build_src_vocab, build_tgt_vocab, encode_pairs, EncodedPair, TargetStream,
};
use crate::training::force::{force_decode_filter, has_non_structural};
use crate::training::schedule::{choose_input_token, ScheduleState};

#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub p: f64,
    /// Nats per token over the training set.
    pub ce: f64,
    /// Mean MIM sum per pair (zero when lambda is zero).
    pub mim: f64,
    pub token_acc: f64,
    /// Teacher-forced nats per token on validation (NaN when no split).
    pub val_ce: f64,
}

impl EpochMetrics {
    pub fn csv_header() -> &'static str {
        "epoch,p,ce,mim,token_acc,val_ce"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.epoch, self.p, self.ce, self.mim, self.token_acc, self.val_ce
        )
    }
}

/// One pass over the training pairs. Feedback tokens go through the force
/// filter, then scheduled sampling picks ground truth or the filtered
/// prediction. Gradients step once per batch.
pub fn train_epoch(
    params: &mut DmgParams,
    q: &dyn PosteriorEstimator,
    train: &[EncodedPair],
    vocab_tgt: &TokenVocab,
    schedule: ScheduleState,
    cfg: &TrainConfig,
    rng: &mut Rng,
    adam: &mut AdamState,
) -> Result<EpochMetrics> {
    if train.is_empty() {
        return Err(DmgError::invalid("empty training set"));
    }
    if !has_non_structural(vocab_tgt) {
        return Err(DmgError::invalid("target vocabulary is all structural tokens"));
    }

    let mut order: Vec<usize> = (0..train.len()).collect();
    rng.shuffle(&mut order);

    let mut nll_total = 0.0;
    let mut mim_total = 0.0;
    let mut tokens = 0usize;
    let mut correct = 0usize;
    let lambda = cfg.lambda;
    let k = cfg.k_styles as f64;

    for chunk in order.chunks(cfg.batch_size) {
        let mut tape = Tape::new();
        let mut terms = Vec::with_capacity(chunk.len());
        for &pi in chunk {
            let pair = &train[pi];
            let style = rng.below(cfg.k_styles);
            let enc = encode(&mut tape, params, &pair.src, style)?;
            let p_keep = schedule.p;
            let src_tokens = &pair.src_tokens;
            let tgt = &pair.tgt;
            let ce = ce_decode(&mut tape, params, &enc, tgt, |j, dist| {
                let pred = force_decode_filter(&src_tokens[j], dist, vocab_tgt)
                    .expect("vocab checked above");
                choose_input_token(tgt[j], pred, p_keep, rng)
            })?;
            nll_total += tape.value(ce.loss)[0] * ce.tokens as f64;
            tokens += ce.tokens;
            correct += ce.correct;

            let ce_part = tape.scale(ce.loss, 1.0 - lambda);
            let term = if lambda > 0.0 {
                let m = mim_sum(&mut tape, params, &pair.src, tgt.len(), q)?;
                mim_total += tape.value(m)[0];
                let weighted = tape.scale(m, lambda / k);
                tape.sub(ce_part, weighted)?
            } else {
                ce_part
            };
            terms.push(term);
        }
        let mut sum = terms[0];
        for &t in &terms[1..] {
            sum = tape.add(sum, t)?;
        }
        let loss = tape.scale(sum, 1.0 / chunk.len() as f64);
        let grads = tape.backward(loss)?;
        let gvec: Vec<Tensor> = (0..params.store.len())
            .map(|i| grads.get(&params.store, i))
            .collect();
        adam_step(&mut params.store, &gvec, adam, cfg.learning_rate)?;
    }

    Ok(EpochMetrics {
        epoch: schedule.epoch,
        p: schedule.p,
        ce: nll_total / tokens as f64,
        mim: mim_total / train.len() as f64,
        token_acc: correct as f64 / tokens as f64,
        val_ce: f64::NAN,
    })
}

/// Teacher-forced nats per token over a set, no parameter updates.
pub fn validation_ce(params: &DmgParams, pairs: &[EncodedPair]) -> Result<f64> {
    let mut nll = 0.0;
    let mut tokens = 0usize;
    for pair in pairs {
        let mut tape = Tape::new();
        // validation style is immaterial for teacher-forced CE conditioning
        // consistency; style 0 keeps it deterministic
        let enc = encode(&mut tape, params, &pair.src, 0)?;
        let tgt = &pair.tgt;
        let ce = ce_decode(&mut tape, params, &enc, tgt, |j, _| tgt[j])?;
        nll += tape.value(ce.loss)[0] * ce.tokens as f64;
        tokens += ce.tokens;
    }
    if tokens == 0 {
        return Ok(f64::NAN);
    }
    Ok(nll / tokens as f64)
}

pub struct TrainOutcome {
    pub metrics: Vec<EpochMetrics>,
    pub best_val_ce: f64,
    pub checkpoint_base: PathBuf,
    pub metrics_path: PathBuf,
}

/// Train one network (pitch or duration) end to end and keep the
/// best-validation checkpoint at `<out_dir>/<stream>`.
#[allow(clippy::too_many_arguments)]
pub fn train_network(
    train: &[EncodedPair],
    valid: &[EncodedPair],
    vocab_src: &TokenVocab,
    vocab_tgt: &TokenVocab,
    stream: TargetStream,
    cfg: &TrainConfig,
    out_dir: &Path,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(DmgError::invalid("empty training split"));
    }
    std::fs::create_dir_all(out_dir)?;

    let model_cfg = ModelConfig {
        vocab_src: vocab_src.len(),
        vocab_tgt: vocab_tgt.len(),
        embed: cfg.embed,
        hidden: cfg.hidden,
        style_dim: cfg.style_dim,
        n_styles: cfg.k_styles,
    };
    model_cfg.validate()?;

    let stream_tag = match stream {
        TargetStream::Pitch => 1u64,
        TargetStream::Duration => 2u64,
    };
    let mut rng = Rng::new(cfg.seed).fork(stream_tag);
    let mut params = DmgParams::init(model_cfg, &mut rng);
    let mut adam = AdamState::for_store(&params.store);
    let q = crate::model::posterior::for_variant(cfg.q_variant);

    let base = out_dir.join(stream.name());
    let extra = serde_json::json!({
        "train_config": cfg,
        "stream": stream.name(),
    });

    let mut metrics = Vec::with_capacity(cfg.epochs);
    let mut best = f64::INFINITY;
    for epoch in 0..cfg.epochs {
        let schedule = ScheduleState::at(cfg.mu, epoch)?;
        let mut m = train_epoch(
            &mut params,
            q.as_ref(),
            train,
            vocab_tgt,
            schedule,
            cfg,
            &mut rng,
            &mut adam,
        )?;
        m.val_ce = if valid.is_empty() {
            m.ce
        } else {
            validation_ce(&params, valid)?
        };
        if !m.ce.is_finite() || !m.val_ce.is_finite() {
            return Err(DmgError::invalid(format!(
                "non-finite metrics at epoch {epoch}"
            )));
        }
        log::info!(
            "{} epoch {epoch}: p={:.4} ce={:.4} mim={:.4} acc={:.4} val={:.4}",
            stream.name(),
            m.p,
            m.ce,
            m.mim,
            m.token_acc,
            m.val_ce
        );
        if m.val_ce < best {
            best = m.val_ce;
            save_checkpoint(&base, &params, vocab_src, vocab_tgt, Some(extra.clone()))?;
        }
        metrics.push(m);
    }

    let metrics_path = out_dir.join(format!("{}_metrics.csv", stream.name()));
    let mut csv = String::from(EpochMetrics::csv_header());
    csv.push('\n');
    for m in &metrics {
        csv.push_str(&m.csv_row());
        csv.push('\n');
    }
    crate::corpus::write_atomic(&metrics_path, csv.as_bytes())?;

    Ok(TrainOutcome {
        metrics,
        best_val_ce: best,
        checkpoint_base: base,
        metrics_path,
    })
}

pub struct FitReport {
    pub pitch: TrainOutcome,
    pub duration: TrainOutcome,
}

/// Train the pitch and duration networks on the same source sequences with
/// their own target streams and vocabularies.
pub fn fit(split: &CorpusSplit, cfg: &TrainConfig, out_dir: &Path, parallel: bool) -> Result<FitReport> {
    if split.train.is_empty() {
        return Err(DmgError::invalid("empty corpus split"));
    }
    let sets: [&[_]; 3] = [&split.train, &split.valid, &split.test];
    let vocab_src = build_src_vocab(&sets);

    let run = |stream: TargetStream| -> Result<TrainOutcome> {
        let vocab_tgt = build_tgt_vocab(&sets, stream);
        let train = encode_pairs(&split.train, stream, &vocab_src, &vocab_tgt, cfg.max_len);
        let valid = encode_pairs(&split.valid, stream, &vocab_src, &vocab_tgt, cfg.max_len);
        train_network(&train, &valid, &vocab_src, &vocab_tgt, stream, cfg, out_dir)
    };

    let (pitch, duration) = if parallel {
        std::thread::scope(|scope| {
            let p = scope.spawn(|| run(TargetStream::Pitch));
            let d = run(TargetStream::Duration);
            (p.join().expect("pitch training thread panicked"), d)
        })
    } else {
        (run(TargetStream::Pitch), run(TargetStream::Duration))
    };
    Ok(FitReport {
        pitch: pitch?,
        duration: duration?,
    })
}
