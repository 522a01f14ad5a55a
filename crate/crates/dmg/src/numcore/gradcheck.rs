//! Central finite-difference gradient checking. Only runs forward passes, so
//! it stays independent of the tape's reverse sweep.

use crate::numcore::tensor::ParamStore;

pub const DEFAULT_STEP: f64 = 1e-5;

/// Central-difference gradient of `loss` with respect to every element of
/// parameter `idx`.
pub fn finite_difference_gradient<F>(
    store: &mut ParamStore,
    idx: usize,
    step: f64,
    mut loss: F,
) -> Vec<f64>
where
    F: FnMut(&ParamStore) -> f64,
{
    let n = store.get(idx).numel();
    let mut grad = vec![0.0; n];
    for i in 0..n {
        let orig = store.get(idx).data[i];
        store.get_mut(idx).data[i] = orig + step;
        let up = loss(store);
        store.get_mut(idx).data[i] = orig - step;
        let down = loss(store);
        store.get_mut(idx).data[i] = orig;
        grad[i] = (up - down) / (2.0 * step);
    }
    grad
}

/// Largest relative error between analytic and finite-difference gradients,
/// with an absolute floor so near-zero entries do not blow up the ratio.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::cells::{gru_cell, lstm_cell, CellWeights};
    use crate::numcore::tape::Tape;
    use crate::numcore::tensor::{ParamStore, Tensor};
    use crate::numcore::Rng;

    fn random_store(rng: &mut Rng, specs: &[(&str, Vec<usize>)]) -> ParamStore {
        let mut s = ParamStore::new();
        for (name, shape) in specs {
            let n: usize = shape.iter().product();
            let data = (0..n).map(|_| rng.uniform(-0.5, 0.5)).collect();
            s.add(*name, Tensor::new(shape.clone(), data).unwrap());
        }
        s
    }

    fn lstm_loss(store: &ParamStore) -> f64 {
        let mut t = Tape::new();
        let w = CellWeights {
            w_ih: t.param(store, 0),
            w_hh: t.param(store, 1),
            bias: t.param(store, 2),
        };
        let x = t.param(store, 3);
        let h = t.param(store, 4);
        let c = t.param(store, 5);
        let (h1, _c1) = lstm_cell(&mut t, x, h, c, &w).unwrap();
        let ones = t.leaf(&Tensor::new(vec![2, 1], vec![1.0, 1.0]).unwrap());
        let s = t.matmul(h1, ones).unwrap();
        t.value(s)[0]
    }

    #[test]
    fn lstm_gradients_match_finite_differences() {
        let mut rng = Rng::new(3);
        let h = 2usize;
        let mut store = random_store(
            &mut rng,
            &[
                ("w_ih", vec![3, 4 * h]),
                ("w_hh", vec![h, 4 * h]),
                ("bias", vec![1, 4 * h]),
                ("x", vec![1, 3]),
                ("h0", vec![1, h]),
                ("c0", vec![1, h]),
            ],
        );

        let mut tape = Tape::new();
        let w = CellWeights {
            w_ih: tape.param(&store, 0),
            w_hh: tape.param(&store, 1),
            bias: tape.param(&store, 2),
        };
        let x = tape.param(&store, 3);
        let h0 = tape.param(&store, 4);
        let c0 = tape.param(&store, 5);
        let (h1, _) = lstm_cell(&mut tape, x, h0, c0, &w).unwrap();
        let ones = tape.leaf(&Tensor::new(vec![2, 1], vec![1.0, 1.0]).unwrap());
        let loss = tape.matmul(h1, ones).unwrap();
        let grads = tape.backward(loss).unwrap();

        for idx in 0..store.len() {
            let analytic = grads.get(&store, idx).data;
            let numeric =
                finite_difference_gradient(&mut store, idx, DEFAULT_STEP, lstm_loss);
            let err = max_relative_error(&analytic, &numeric);
            assert!(err < 1e-4, "param {} rel err {err}", store.name(idx));
        }
    }

    fn gru_loss(store: &ParamStore) -> f64 {
        let mut t = Tape::new();
        let w = CellWeights {
            w_ih: t.param(store, 0),
            w_hh: t.param(store, 1),
            bias: t.param(store, 2),
        };
        let x = t.param(store, 3);
        let h = t.param(store, 4);
        let h1 = gru_cell(&mut t, x, h, &w).unwrap();
        let ones = t.leaf(&Tensor::new(vec![2, 1], vec![1.0, 1.0]).unwrap());
        let s = t.matmul(h1, ones).unwrap();
        t.value(s)[0]
    }

    #[test]
    fn gru_gradients_match_finite_differences() {
        let mut rng = Rng::new(8);
        let h = 2usize;
        let mut store = random_store(
            &mut rng,
            &[
                ("w_ih", vec![3, 3 * h]),
                ("w_hh", vec![h, 3 * h]),
                ("bias", vec![1, 3 * h]),
                ("x", vec![1, 3]),
                ("h0", vec![1, h]),
            ],
        );

        let mut tape = Tape::new();
        let w = CellWeights {
            w_ih: tape.param(&store, 0),
            w_hh: tape.param(&store, 1),
            bias: tape.param(&store, 2),
        };
        let x = tape.param(&store, 3);
        let h0 = tape.param(&store, 4);
        let h1 = gru_cell(&mut tape, x, h0, &w).unwrap();
        let ones = tape.leaf(&Tensor::new(vec![2, 1], vec![1.0, 1.0]).unwrap());
        let loss = tape.matmul(h1, ones).unwrap();
        let grads = tape.backward(loss).unwrap();

        for idx in 0..store.len() {
            let analytic = grads.get(&store, idx).data;
            let numeric = finite_difference_gradient(&mut store, idx, DEFAULT_STEP, gru_loss);
            let err = max_relative_error(&analytic, &numeric);
            assert!(err < 1e-4, "param {} rel err {err}", store.name(idx));
        }
    }
}
