use super::{check_len, NeuralError};

/// Dot product with four independent accumulators.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// `out[r] += sum_c w[r, c] * x[c]` for row-major `w`.
#[inline]
pub(crate) fn matvec_acc(w: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (row, o) in w.chunks_exact(cols).zip(out.iter_mut()) {
        *o += dot(row, x);
    }
}

/// `out[c] += sum_r w[r, c] * d[r]`.
#[inline]
pub(crate) fn matvec_t_acc(w: &[f64], d: &[f64], out: &mut [f64]) {
    let cols = out.len();
    for (row, dr) in w.chunks_exact(cols).zip(d) {
        if *dr == 0.0 {
            continue;
        }
        for (o, wv) in out.iter_mut().zip(row) {
            *o += wv * dr;
        }
    }
}

/// `g[r, c] += d[r] * x[c]`.
#[inline]
pub(crate) fn outer_acc(g: &mut [f64], d: &[f64], x: &[f64]) {
    let cols = x.len();
    for (row, dr) in g.chunks_exact_mut(cols).zip(d) {
        if *dr == 0.0 {
            continue;
        }
        for (gv, xv) in row.iter_mut().zip(x) {
            *gv += dr * xv;
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Borrowed LSTM parameters. Gate rows are stacked as input, forget,
/// candidate, output; `w_ih` is `4H x D`, `w_hh` is `4H x H`, `bias` is `4H`.
#[derive(Debug, Clone, Copy)]
pub struct LstmWeights<'a> {
    pub w_ih: &'a [f64],
    pub w_hh: &'a [f64],
    pub bias: &'a [f64],
    pub input_size: usize,
    pub hidden_size: usize,
}

impl LstmWeights<'_> {
    fn check(&self, input: &[f64], hidden: &[f64], cell: &[f64]) -> Result<(), NeuralError> {
        let (d, h) = (self.input_size, self.hidden_size);
        check_len("lstm w_ih", self.w_ih.len(), 4 * h * d)?;
        check_len("lstm w_hh", self.w_hh.len(), 4 * h * h)?;
        check_len("lstm bias", self.bias.len(), 4 * h)?;
        check_len("lstm input", input.len(), d)?;
        check_len("lstm hidden", hidden.len(), h)?;
        check_len("lstm cell", cell.len(), h)
    }
}

/// Activated gates `[i, f, g, o]` (each of width H) for one step.
pub(crate) fn lstm_gates(w: &LstmWeights<'_>, input: &[f64], hidden: &[f64]) -> Vec<f64> {
    let h = w.hidden_size;
    let mut a = w.bias.to_vec();
    matvec_acc(w.w_ih, input, &mut a);
    matvec_acc(w.w_hh, hidden, &mut a);
    for v in &mut a[..2 * h] {
        *v = sigmoid(*v);
    }
    for v in &mut a[2 * h..3 * h] {
        *v = v.tanh();
    }
    for v in &mut a[3 * h..] {
        *v = sigmoid(*v);
    }
    a
}

/// New cell state from gates and the previous cell.
pub(crate) fn lstm_cell(gates: &[f64], cell: &[f64]) -> Vec<f64> {
    let h = cell.len();
    (0..h)
        .map(|j| gates[h + j] * cell[j] + gates[j] * gates[2 * h + j])
        .collect()
}

/// One LSTM step: returns `(hidden', cell')`.
pub fn lstm_step(
    weights: &LstmWeights<'_>,
    input: &[f64],
    hidden: &[f64],
    cell: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), NeuralError> {
    weights.check(input, hidden, cell)?;
    let h = weights.hidden_size;
    let gates = lstm_gates(weights, input, hidden);
    let c = lstm_cell(&gates, cell);
    let hid = (0..h).map(|j| gates[3 * h + j] * c[j].tanh()).collect();
    Ok((hid, c))
}

/// Normalized values and the inverse standard deviation.
pub(crate) fn normalize(x: &[f64], eps: f64) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let inv_std = 1.0 / (var + eps).sqrt();
    (x.iter().map(|v| (v - mean) * inv_std).collect(), inv_std)
}

/// Layer normalization across features followed by a per-feature affine map.
pub fn layer_norm(
    x: &[f64],
    gain: &[f64],
    bias: &[f64],
    eps: f64,
) -> Result<Vec<f64>, NeuralError> {
    check_len("layer_norm gain", gain.len(), x.len())?;
    check_len("layer_norm bias", bias.len(), x.len())?;
    if x.is_empty() {
        return Err(NeuralError::Dimension(
            "layer_norm of an empty vector".into(),
        ));
    }
    if !(eps > 0.0) {
        return Err(NeuralError::Config("layer_norm epsilon must be > 0".into()));
    }
    let (xhat, _) = normalize(x, eps);
    Ok(xhat
        .iter()
        .zip(gain.iter().zip(bias))
        .map(|(v, (g, b))| g * v + b)
        .collect())
}

/// Borrowed dense layer: `weight` is `outputs x inputs`, row-major.
#[derive(Debug, Clone, Copy)]
pub struct DenseLayer<'a> {
    pub weight: &'a [f64],
    pub bias: &'a [f64],
    pub inputs: usize,
    pub outputs: usize,
}

impl DenseLayer<'_> {
    pub(crate) fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.bias.to_vec();
        matvec_acc(self.weight, x, &mut out);
        out
    }
}

/// Affine layers with ReLU between them; the last layer stays linear.
pub fn mlp_forward(layers: &[DenseLayer<'_>], x: &[f64]) -> Result<Vec<f64>, NeuralError> {
    let mut act = x.to_vec();
    for (k, layer) in layers.iter().enumerate() {
        check_len(
            "dense weight",
            layer.weight.len(),
            layer.inputs * layer.outputs,
        )?;
        check_len("dense bias", layer.bias.len(), layer.outputs)?;
        check_len("dense input", act.len(), layer.inputs)?;
        act = layer.forward(&act);
        if k + 1 < layers.len() {
            act.iter_mut().for_each(|v| *v = v.max(0.0));
        }
    }
    Ok(act)
}
