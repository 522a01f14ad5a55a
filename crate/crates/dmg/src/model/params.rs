use crate::model::config::ModelConfig;
use crate::numcore::{ParamStore, Rng, Tensor};

/// Indices of every named tensor in the parameter store. Creation order is
/// fixed so a seed fully determines the initial weights.
#[derive(Debug, Clone)]
pub struct ParamIndex {
    pub src_embed: usize,
    pub tgt_embed: usize,
    pub style_embed: usize,
    pub enc_fwd: CellIndex,
    pub enc_bwd: CellIndex,
    pub dec: CellIndex,
    pub w_init_h: usize,
    pub w_init_c: usize,
    pub att_enc: usize,
    pub att_dec: usize,
    pub att_bias: usize,
    pub att_v: usize,
    pub w_out: usize,
    pub b_out: usize,
    pub q_gru: CellIndex,
    pub q_out_w: usize,
    pub q_out_b: usize,
    pub q_lp_w: usize,
    pub q_lp_b: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct CellIndex {
    pub w_ih: usize,
    pub w_hh: usize,
    pub bias: usize,
}

/// All learnable weights of one network (pitch or duration).
#[derive(Debug, Clone)]
pub struct DmgParams {
    pub cfg: ModelConfig,
    pub store: ParamStore,
    pub idx: ParamIndex,
}

pub const INIT_RANGE: f64 = 0.08;

fn init(store: &mut ParamStore, rng: &mut Rng, name: &str, shape: Vec<usize>) -> usize {
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.uniform(-INIT_RANGE, INIT_RANGE)).collect();
    store.add(name, Tensor::new(shape, data).unwrap())
}

fn init_cell(
    store: &mut ParamStore,
    rng: &mut Rng,
    prefix: &str,
    in_dim: usize,
    hidden: usize,
    gates: usize,
) -> CellIndex {
    CellIndex {
        w_ih: init(store, rng, &format!("{prefix}.w_ih"), vec![in_dim, gates * hidden]),
        w_hh: init(store, rng, &format!("{prefix}.w_hh"), vec![hidden, gates * hidden]),
        bias: init(store, rng, &format!("{prefix}.bias"), vec![1, gates * hidden]),
    }
}

impl DmgParams {
    pub fn init(cfg: ModelConfig, rng: &mut Rng) -> DmgParams {
        let mut s = ParamStore::new();
        let h = cfg.hidden;
        let e = cfg.embed;
        let ctx = 2 * h + cfg.style_dim; // v = [fwd; bwd; style]

        let idx = ParamIndex {
            src_embed: init(&mut s, rng, "src_embed", vec![cfg.vocab_src, e]),
            tgt_embed: init(&mut s, rng, "tgt_embed", vec![cfg.vocab_tgt, e]),
            style_embed: init(&mut s, rng, "style_embed", vec![cfg.n_styles, cfg.style_dim]),
            enc_fwd: init_cell(&mut s, rng, "enc_fwd", e, h, 4),
            enc_bwd: init_cell(&mut s, rng, "enc_bwd", e, h, 4),
            dec: init_cell(&mut s, rng, "dec", e + 2 * h, h, 4),
            w_init_h: init(&mut s, rng, "w_init_h", vec![ctx, h]),
            w_init_c: init(&mut s, rng, "w_init_c", vec![ctx, h]),
            att_enc: init(&mut s, rng, "att_enc", vec![2 * h, h]),
            att_dec: init(&mut s, rng, "att_dec", vec![h, h]),
            att_bias: init(&mut s, rng, "att_bias", vec![1, h]),
            att_v: init(&mut s, rng, "att_v", vec![h, 1]),
            w_out: init(&mut s, rng, "w_out", vec![h, cfg.vocab_tgt]),
            b_out: init(&mut s, rng, "b_out", vec![1, cfg.vocab_tgt]),
            q_gru: init_cell(&mut s, rng, "q_gru", e, h, 3),
            q_out_w: init(&mut s, rng, "q_out_w", vec![h, cfg.n_styles]),
            q_out_b: init(&mut s, rng, "q_out_b", vec![1, cfg.n_styles]),
            q_lp_w: init(&mut s, rng, "q_lp_w", vec![e, cfg.n_styles]),
            q_lp_b: init(&mut s, rng, "q_lp_b", vec![1, cfg.n_styles]),
        };
        DmgParams { cfg, store: s, idx }
    }

    /// Parameter indices belonging to either posterior estimator.
    pub fn q_param_indices(&self) -> Vec<usize> {
        vec![
            self.idx.q_gru.w_ih,
            self.idx.q_gru.w_hh,
            self.idx.q_gru.bias,
            self.idx.q_out_w,
            self.idx.q_out_b,
            self.idx.q_lp_w,
            self.idx.q_lp_b,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn same_seed_same_init() {
        let a = DmgParams::init(cfg(), &mut Rng::new(1));
        let b = DmgParams::init(cfg(), &mut Rng::new(1));
        for i in 0..a.store.len() {
            assert_eq!(a.store.get(i).data, b.store.get(i).data);
        }
    }

    #[test]
    fn init_values_in_range() {
        let p = DmgParams::init(cfg(), &mut Rng::new(2));
        for (_, t) in p.store.iter() {
            assert!(t.data.iter().all(|v| v.abs() <= INIT_RANGE));
        }
    }
}
