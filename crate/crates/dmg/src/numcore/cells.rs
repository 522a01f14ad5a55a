use crate::error::Result;
use crate::numcore::tape::{NodeId, Tape};

/// Weight node ids for one recurrent cell: input-to-hidden, hidden-to-hidden
/// and bias, with gates packed along columns (4H for LSTM, 3H for GRU).
#[derive(Debug, Clone, Copy)]
pub struct CellWeights {
    pub w_ih: NodeId,
    pub w_hh: NodeId,
    pub bias: NodeId,
}

/// One LSTM step. Gate layout along columns: input, forget, candidate, output.
pub fn lstm_cell(
    tape: &mut Tape,
    x: NodeId,
    h_prev: NodeId,
    c_prev: NodeId,
    w: &CellWeights,
) -> Result<(NodeId, NodeId)> {
    let hidden = tape.dims(h_prev).1;
    let xi = tape.matmul(x, w.w_ih)?;
    let hi = tape.matmul(h_prev, w.w_hh)?;
    let pre0 = tape.add(xi, hi)?;
    let pre = tape.add(pre0, w.bias)?;

    let i_pre = tape.slice_cols(pre, 0, hidden)?;
    let f_pre = tape.slice_cols(pre, hidden, hidden)?;
    let g_pre = tape.slice_cols(pre, 2 * hidden, hidden)?;
    let o_pre = tape.slice_cols(pre, 3 * hidden, hidden)?;

    let i = tape.sigmoid(i_pre);
    let f = tape.sigmoid(f_pre);
    let g = tape.tanh(g_pre);
    let o = tape.sigmoid(o_pre);

    let fc = tape.mul(f, c_prev)?;
    let ig = tape.mul(i, g)?;
    let c = tape.add(fc, ig)?;
    let ct = tape.tanh(c);
    let h = tape.mul(o, ct)?;
    Ok((h, c))
}

/// One GRU step. Gate layout along columns: reset, update, candidate.
pub fn gru_cell(tape: &mut Tape, x: NodeId, h_prev: NodeId, w: &CellWeights) -> Result<NodeId> {
    let hidden = tape.dims(h_prev).1;
    let xi = tape.matmul(x, w.w_ih)?;
    let hi = tape.matmul(h_prev, w.w_hh)?;

    let xr = tape.slice_cols(xi, 0, hidden)?;
    let xz = tape.slice_cols(xi, hidden, hidden)?;
    let xn = tape.slice_cols(xi, 2 * hidden, hidden)?;
    let hr = tape.slice_cols(hi, 0, hidden)?;
    let hz = tape.slice_cols(hi, hidden, hidden)?;
    let hn = tape.slice_cols(hi, 2 * hidden, hidden)?;
    let br = tape.slice_cols(w.bias, 0, hidden)?;
    let bz = tape.slice_cols(w.bias, hidden, hidden)?;
    let bn = tape.slice_cols(w.bias, 2 * hidden, hidden)?;

    let r_pre0 = tape.add(xr, hr)?;
    let r_pre = tape.add(r_pre0, br)?;
    let r = tape.sigmoid(r_pre);

    let z_pre0 = tape.add(xz, hz)?;
    let z_pre = tape.add(z_pre0, bz)?;
    let z = tape.sigmoid(z_pre);

    let rhn = tape.mul(r, hn)?;
    let n_pre0 = tape.add(xn, rhn)?;
    let n_pre = tape.add(n_pre0, bn)?;
    let n = tape.tanh(n_pre);

    // h' = n + z * (h_prev - n)
    let diff = tape.sub(h_prev, n)?;
    let zd = tape.mul(z, diff)?;
    tape.add(n, zd)
}
