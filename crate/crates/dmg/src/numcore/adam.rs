use crate::error::{DmgError, Result};
use crate::numcore::tensor::{ParamStore, Tensor};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPS: f64 = 1e-8;

/// First/second moment estimates, aligned with a [`ParamStore`].
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
    pub step: u64,
}

impl AdamState {
    pub fn for_store(store: &ParamStore) -> Self {
        let zeros: Vec<Tensor> = (0..store.len())
            .map(|i| Tensor::zeros(store.get(i).shape.clone()))
            .collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }
}

/// One bias-corrected adaptive-moment update over every parameter.
pub fn adam_step(
    store: &mut ParamStore,
    grads: &[Tensor],
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if lr <= 0.0 {
        return Err(DmgError::invalid("learning rate must be positive"));
    }
    state.step += 1;
    let t = state.step as f64;
    let bc1 = 1.0 - BETA1.powf(t);
    let bc2 = 1.0 - BETA2.powf(t);
    for idx in 0..store.len() {
        let g = &grads[idx];
        if !g.is_finite() {
            return Err(DmgError::NonFiniteGradient(store.name(idx).to_string()));
        }
        let m = &mut state.m[idx].data;
        let v = &mut state.v[idx].data;
        let p = &mut store.get_mut(idx).data;
        for i in 0..p.len() {
            m[i] = BETA1 * m[i] + (1.0 - BETA1) * g.data[i];
            v[i] = BETA2 * v[i] + (1.0 - BETA2) * g.data[i] * g.data[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + EPS);
        }
    }
    Ok(())
}
