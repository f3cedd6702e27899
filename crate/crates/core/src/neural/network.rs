use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ops::{
    lstm_cell, lstm_gates, matvec_t_acc, normalize, outer_acc, DenseLayer, LstmWeights,
};
use super::{check_len, NeuralError};

/// Initial forget-gate bias.
const FORGET_BIAS: f64 = 1.0;
/// Weights start uniform in `[-k, k]` with `k = INIT_GAIN / sqrt(fan_in)`.
const INIT_GAIN: f64 = 1.0;
/// Extra factor on the actor output layer so the initial policy is close to
/// uniform.
const ACTOR_OUTPUT_GAIN: f64 = 0.01;

fn default_eps() -> f64 {
    1e-5
}

/// Widths of the shared trunk and the two heads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub input_dim: usize,
    pub lstm_hidden: usize,
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub actor_outputs: usize,
    #[serde(default = "default_eps")]
    pub layer_norm_eps: f64,
}

impl NetworkConfig {
    /// LSTM 64, actor 64-64, critic 64-64-64.
    pub fn new(input_dim: usize, actor_outputs: usize) -> Self {
        Self {
            input_dim,
            lstm_hidden: 64,
            actor_hidden: vec![64, 64],
            critic_hidden: vec![64, 64, 64],
            actor_outputs,
            layer_norm_eps: default_eps(),
        }
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |m: &str| Err(NeuralError::Config(m.to_string()));
        if self.input_dim == 0 || self.lstm_hidden == 0 || self.actor_outputs == 0 {
            return bad("input_dim, lstm_hidden and actor_outputs must be positive");
        }
        if self
            .actor_hidden
            .iter()
            .chain(&self.critic_hidden)
            .any(|w| *w == 0)
        {
            return bad("hidden widths must be positive");
        }
        if !(self.layer_norm_eps > 0.0 && self.layer_norm_eps.is_finite()) {
            return bad("layer_norm_eps must be > 0");
        }
        self.layout().map(|_| ())
    }

    /// Parameter layout; fails if the parameter count overflows.
    pub fn layout(&self) -> Result<ParamLayout, NeuralError> {
        let mut layout = ParamLayout::default();
        let (d, h) = (self.input_dim, self.lstm_hidden);
        layout.push("lstm.w_ih", vec![4 * h, d])?;
        layout.push("lstm.w_hh", vec![4 * h, h])?;
        layout.push("lstm.bias", vec![4 * h])?;
        layout.push("norm.gain", vec![h])?;
        layout.push("norm.bias", vec![h])?;
        for (head, hidden, out) in [
            ("actor", &self.actor_hidden, self.actor_outputs),
            ("critic", &self.critic_hidden, 1),
        ] {
            let mut fan_in = h;
            for (k, w) in hidden.iter().chain(std::iter::once(&out)).enumerate() {
                let tag = if k == hidden.len() {
                    "out".to_string()
                } else {
                    k.to_string()
                };
                layout.push(&format!("{head}.{tag}.weight"), vec![*w, fan_in])?;
                layout.push(&format!("{head}.{tag}.bias"), vec![*w])?;
                fan_in = *w;
            }
        }
        Ok(layout)
    }
}

/// A named slice of the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamBlock {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl ParamBlock {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParamLayout {
    pub blocks: Vec<ParamBlock>,
    pub total: usize,
}

impl ParamLayout {
    fn push(&mut self, name: &str, shape: Vec<usize>) -> Result<(), NeuralError> {
        let len = shape
            .iter()
            .try_fold(1usize, |a, d| a.checked_mul(*d))
            .ok_or_else(|| NeuralError::Config("parameter count overflows".into()))?;
        let offset = self.total;
        self.total = offset
            .checked_add(len)
            .ok_or_else(|| NeuralError::Config("parameter count overflows".into()))?;
        self.blocks.push(ParamBlock {
            name: name.to_string(),
            shape,
            offset,
        });
        Ok(())
    }

    pub fn block(&self, name: &str) -> Option<&ParamBlock> {
        self.blocks.iter().find(|b| b.name == name)
    }

    /// Offset where the critic head begins; everything after it belongs to
    /// the critic.
    pub fn critic_offset(&self) -> usize {
        self.blocks
            .iter()
            .find(|b| b.name.starts_with("critic."))
            .map_or(self.total, |b| b.offset)
    }
}

#[derive(Debug, Clone, Copy)]
struct DenseSpec {
    w: usize,
    b: usize,
    inputs: usize,
    outputs: usize,
}

#[derive(Debug, Clone)]
struct Offsets {
    w_ih: usize,
    w_hh: usize,
    lstm_b: usize,
    gain: usize,
    nbias: usize,
    actor: Vec<DenseSpec>,
    critic: Vec<DenseSpec>,
}

impl Offsets {
    fn from_layout(layout: &ParamLayout) -> Self {
        let off = |name: &str| layout.block(name).map(|b| b.offset).unwrap_or(0);
        let head = |prefix: &str| -> Vec<DenseSpec> {
            layout
                .blocks
                .iter()
                .filter(|b| b.name.starts_with(prefix) && b.name.ends_with(".weight"))
                .map(|wb| {
                    let bias_name = wb.name.replace(".weight", ".bias");
                    DenseSpec {
                        w: wb.offset,
                        b: off(&bias_name),
                        inputs: wb.shape[1],
                        outputs: wb.shape[0],
                    }
                })
                .collect()
        };
        Self {
            w_ih: off("lstm.w_ih"),
            w_hh: off("lstm.w_hh"),
            lstm_b: off("lstm.bias"),
            gain: off("norm.gain"),
            nbias: off("norm.bias"),
            actor: head("actor."),
            critic: head("critic."),
        }
    }
}

/// Hidden and cell state carried across an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentState {
    pub hidden: Vec<f64>,
    pub cell: Vec<f64>,
}

impl RecurrentState {
    pub fn zeros(width: usize) -> Self {
        Self {
            hidden: vec![0.0; width],
            cell: vec![0.0; width],
        }
    }
}

/// Raw actor outputs and the critic's value for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct NetOutput {
    pub actor: Vec<f64>,
    pub value: f64,
}

/// Loss gradient with respect to one step's outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputGrad {
    pub actor: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone)]
struct StepCache {
    input: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
    xhat: Vec<f64>,
    inv_std: f64,
    actor_acts: Vec<Vec<f64>>,
    critic_acts: Vec<Vec<f64>>,
}

/// Intermediate values recorded by [`NetworkParams::forward_sequence`].
#[derive(Debug, Clone, Default)]
pub struct SequenceTrace {
    steps: Vec<StepCache>,
}

impl SequenceTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Gradient buffer laid out like [`NetworkParams::values`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub values: Vec<f64>,
}

impl Gradients {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
        }
    }

    pub fn zero(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Weights of the hybrid network: LSTM and layer-norm trunk feeding an actor
/// MLP and a critic MLP.
#[derive(Debug, Clone)]
pub struct NetworkParams {
    config: NetworkConfig,
    layout: ParamLayout,
    offsets: Offsets,
    pub values: Vec<f64>,
}

impl PartialEq for NetworkParams {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.values == other.values
    }
}

impl NetworkParams {
    /// Seeded initialization.
    pub fn init(config: NetworkConfig, seed: u64) -> Result<Self, NeuralError> {
        config.validate()?;
        let layout = config.layout()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = vec![0.0; layout.total];
        let h = config.lstm_hidden;
        for block in &layout.blocks {
            let slice = &mut values[block.range()];
            let name = block.name.as_str();
            if name == "norm.gain" {
                slice.iter_mut().for_each(|v| *v = 1.0);
            } else if name == "lstm.bias" {
                slice[h..2 * h].iter_mut().for_each(|v| *v = FORGET_BIAS);
            } else if block.shape.len() == 2 {
                let fan_in = if name.starts_with("lstm.") {
                    h
                } else {
                    block.shape[1]
                };
                let mut k = INIT_GAIN / (fan_in as f64).sqrt();
                if name == "actor.out.weight" {
                    k *= ACTOR_OUTPUT_GAIN;
                }
                slice.iter_mut().for_each(|v| *v = rng.gen_range(-k..=k));
            }
        }
        Ok(Self::assemble(config, layout, values))
    }

    fn assemble(config: NetworkConfig, layout: ParamLayout, values: Vec<f64>) -> Self {
        let offsets = Offsets::from_layout(&layout);
        Self {
            config,
            layout,
            offsets,
            values,
        }
    }

    /// Rebuilds a network from a flat value vector.
    pub fn from_values(config: NetworkConfig, values: Vec<f64>) -> Result<Self, NeuralError> {
        config.validate()?;
        let layout = config.layout()?;
        check_len("parameter vector", values.len(), layout.total)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(NeuralError::NonFinite("parameters".into()));
        }
        Ok(Self::assemble(config, layout, values))
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn zero_grads(&self) -> Gradients {
        Gradients::zeros(self.values.len())
    }

    pub fn initial_state(&self) -> RecurrentState {
        RecurrentState::zeros(self.config.lstm_hidden)
    }

    fn lstm(&self) -> LstmWeights<'_> {
        let (d, h) = (self.config.input_dim, self.config.lstm_hidden);
        let o = &self.offsets;
        LstmWeights {
            w_ih: &self.values[o.w_ih..o.w_ih + 4 * h * d],
            w_hh: &self.values[o.w_hh..o.w_hh + 4 * h * h],
            bias: &self.values[o.lstm_b..o.lstm_b + 4 * h],
            input_size: d,
            hidden_size: h,
        }
    }

    fn dense(&self, s: &DenseSpec) -> DenseLayer<'_> {
        DenseLayer {
            weight: &self.values[s.w..s.w + s.inputs * s.outputs],
            bias: &self.values[s.b..s.b + s.outputs],
            inputs: s.inputs,
            outputs: s.outputs,
        }
    }

    fn head_forward(
        &self,
        specs: &[DenseSpec],
        y: &[f64],
        acts: Option<&mut Vec<Vec<f64>>>,
    ) -> Vec<f64> {
        let mut a = y.to_vec();
        let mut record = acts;
        for (k, s) in specs.iter().enumerate() {
            let mut z = self.dense(s).forward(&a);
            if k + 1 < specs.len() {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            let prev = std::mem::replace(&mut a, z);
            if let Some(r) = record.as_deref_mut() {
                r.push(prev);
            }
        }
        a
    }

    fn step_inner(
        &self,
        input: &[f64],
        state: &mut RecurrentState,
        cache: bool,
    ) -> Result<(NetOutput, Option<StepCache>), NeuralError> {
        check_len("network input", input.len(), self.config.input_dim)?;
        let h = self.config.lstm_hidden;
        let lstm = self.lstm();
        let gates = lstm_gates(&lstm, input, &state.hidden);
        let c = lstm_cell(&gates, &state.cell);
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let hid: Vec<f64> = (0..h).map(|j| gates[3 * h + j] * tanh_c[j]).collect();

        let (xhat, inv_std) = normalize(&hid, self.config.layer_norm_eps);
        let o = &self.offsets;
        let gain = &self.values[o.gain..o.gain + h];
        let nb = &self.values[o.nbias..o.nbias + h];
        let y: Vec<f64> = (0..h).map(|j| gain[j] * xhat[j] + nb[j]).collect();

        let mut actor_acts = Vec::new();
        let mut critic_acts = Vec::new();
        let actor = self.head_forward(&o.actor, &y, cache.then_some(&mut actor_acts));
        let value = self.head_forward(&o.critic, &y, cache.then_some(&mut critic_acts))[0];
        if !value.is_finite() || actor.iter().any(|v| !v.is_finite()) {
            return Err(NeuralError::NonFinite("network output".into()));
        }

        let h_prev = std::mem::replace(&mut state.hidden, hid);
        let c_prev = std::mem::replace(&mut state.cell, c);
        let trace = cache.then(|| StepCache {
            input: input.to_vec(),
            h_prev,
            c_prev,
            gates,
            tanh_c,
            xhat,
            inv_std,
            actor_acts,
            critic_acts,
        });
        Ok((NetOutput { actor, value }, trace))
    }

    /// One inference step; updates `state` in place.
    pub fn step(
        &self,
        input: &[f64],
        state: &mut RecurrentState,
    ) -> Result<NetOutput, NeuralError> {
        self.step_inner(input, state, false).map(|(o, _)| o)
    }

    /// Runs a whole sequence from the zero state, recording what the backward
    /// pass needs.
    pub fn forward_sequence(
        &self,
        inputs: &[Vec<f64>],
    ) -> Result<(Vec<NetOutput>, SequenceTrace), NeuralError> {
        let mut state = self.initial_state();
        let mut outs = Vec::with_capacity(inputs.len());
        let mut trace = SequenceTrace {
            steps: Vec::with_capacity(inputs.len()),
        };
        for x in inputs {
            let (o, c) = self.step_inner(x, &mut state, true)?;
            outs.push(o);
            trace.steps.extend(c);
        }
        Ok((outs, trace))
    }

    fn head_backward(
        &self,
        specs: &[DenseSpec],
        acts: &[Vec<f64>],
        dout: &[f64],
        grads: &mut [f64],
        dy: &mut [f64],
    ) {
        let mut d = dout.to_vec();
        for k in (0..specs.len()).rev() {
            let s = &specs[k];
            let input = &acts[k];
            outer_acc(&mut grads[s.w..s.w + s.inputs * s.outputs], &d, input);
            for (g, dv) in grads[s.b..s.b + s.outputs].iter_mut().zip(&d) {
                *g += dv;
            }
            if k == 0 {
                matvec_t_acc(&self.values[s.w..s.w + s.inputs * s.outputs], &d, dy);
            } else {
                let mut din = vec![0.0; s.inputs];
                matvec_t_acc(&self.values[s.w..s.w + s.inputs * s.outputs], &d, &mut din);
                for (v, a) in din.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *v = 0.0;
                    }
                }
                d = din;
            }
        }
    }

    /// Back-propagates output gradients through time and accumulates parameter
    /// gradients into `grads`.
    pub fn backward_sequence(
        &self,
        trace: &SequenceTrace,
        output_grads: &[OutputGrad],
        grads: &mut Gradients,
    ) -> Result<(), NeuralError> {
        check_len("output gradients", output_grads.len(), trace.steps.len())?;
        check_len("gradient buffer", grads.values.len(), self.values.len())?;
        let (d, h) = (self.config.input_dim, self.config.lstm_hidden);
        let o = &self.offsets;
        let g = &mut grads.values;
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut da = vec![0.0; 4 * h];
        for (s, og) in trace.steps.iter().zip(output_grads).rev() {
            check_len("actor gradient", og.actor.len(), self.config.actor_outputs)?;
            if !og.value.is_finite() || og.actor.iter().any(|v| !v.is_finite()) {
                return Err(NeuralError::NonFinite("output gradient".into()));
            }
            let mut dy = vec![0.0; h];
            self.head_backward(&o.actor, &s.actor_acts, &og.actor, g, &mut dy);
            self.head_backward(&o.critic, &s.critic_acts, &[og.value], g, &mut dy);

            // layer norm
            let gain = &self.values[o.gain..o.gain + h];
            let mut dxhat = vec![0.0; h];
            for j in 0..h {
                g[o.gain + j] += dy[j] * s.xhat[j];
                g[o.nbias + j] += dy[j];
                dxhat[j] = dy[j] * gain[j];
            }
            let m1 = dxhat.iter().sum::<f64>() / h as f64;
            let m2 = dxhat.iter().zip(&s.xhat).map(|(a, b)| a * b).sum::<f64>() / h as f64;

            // lstm
            let gates = &s.gates;
            for j in 0..h {
                let dh = s.inv_std * (dxhat[j] - m1 - s.xhat[j] * m2) + dh_next[j];
                let (i, f, gg, og_) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
                let tc = s.tanh_c[j];
                let d_o = dh * tc;
                let dc = dc_next[j] + dh * og_ * (1.0 - tc * tc);
                da[j] = dc * gg * i * (1.0 - i);
                da[h + j] = dc * s.c_prev[j] * f * (1.0 - f);
                da[2 * h + j] = dc * i * (1.0 - gg * gg);
                da[3 * h + j] = d_o * og_ * (1.0 - og_);
                dc_next[j] = dc * f;
            }
            outer_acc(&mut g[o.w_ih..o.w_ih + 4 * h * d], &da, &s.input);
            outer_acc(&mut g[o.w_hh..o.w_hh + 4 * h * h], &da, &s.h_prev);
            for (gb, dv) in g[o.lstm_b..o.lstm_b + 4 * h].iter_mut().zip(&da) {
                *gb += dv;
            }
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            matvec_t_acc(&self.values[o.w_hh..o.w_hh + 4 * h * h], &da, &mut dh_next);
        }
        Ok(())
    }

    /// Value predictions for a whole sequence, without recording a trace.
    pub fn values_for(&self, inputs: &[Vec<f64>]) -> Result<Vec<f64>, NeuralError> {
        let mut state = self.initial_state();
        inputs
            .iter()
            .map(|x| self.step(x, &mut state).map(|o| o.value))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> NetworkConfig {
        NetworkConfig {
            input_dim: 5,
            lstm_hidden: 4,
            actor_hidden: vec![3, 3],
            critic_hidden: vec![3, 2, 3],
            actor_outputs: 6,
            layer_norm_eps: 1e-5,
        }
    }

    fn seq(len: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn layout_is_stable_and_counted() {
        let cfg = small();
        let layout = cfg.layout().unwrap();
        let names: Vec<&str> = layout.blocks.iter().map(|b| b.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "lstm.w_ih",
                "lstm.w_hh",
                "lstm.bias",
                "norm.gain",
                "norm.bias",
                "actor.0.weight",
                "actor.0.bias",
                "actor.1.weight",
                "actor.1.bias",
                "actor.out.weight",
                "actor.out.bias",
                "critic.0.weight",
                "critic.0.bias",
                "critic.1.weight",
                "critic.1.bias",
                "critic.2.weight",
                "critic.2.bias",
                "critic.out.weight",
                "critic.out.bias",
            ]
        );
        let lstm = 16 * 5 + 16 * 4 + 16;
        let norm = 8;
        let actor = (4 * 3 + 3) + (3 * 3 + 3) + (3 * 6 + 6);
        let critic = (4 * 3 + 3) + (3 * 2 + 2) + (2 * 3 + 3) + (3 + 1);
        assert_eq!(layout.total, lstm + norm + actor + critic);
        assert_eq!(layout.critic_offset(), lstm + norm + actor);
    }

    #[test]
    fn init_is_seeded() {
        let a = NetworkParams::init(small(), 3).unwrap();
        let b = NetworkParams::init(small(), 3).unwrap();
        let c = NetworkParams::init(small(), 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn stepwise_equals_sequence() {
        let net = NetworkParams::init(small(), 1).unwrap();
        let xs = seq(7, 5, 2);
        let (outs, trace) = net.forward_sequence(&xs).unwrap();
        assert_eq!(trace.len(), 7);
        let mut state = net.initial_state();
        for (x, o) in xs.iter().zip(&outs) {
            assert_eq!(&net.step(x, &mut state).unwrap(), o);
        }
        assert_eq!(
            net.values_for(&xs).unwrap(),
            outs.iter().map(|o| o.value).collect::<Vec<_>>()
        );
    }

    #[test]
    fn independent_parameter_gets_zero_gradient() {
        let net = NetworkParams::init(small(), 1).unwrap();
        let xs = seq(3, 5, 2);
        let (_, trace) = net.forward_sequence(&xs).unwrap();
        // loss depends on the value only: actor head gradients must vanish
        let og: Vec<OutputGrad> = (0..3)
            .map(|_| OutputGrad {
                actor: vec![0.0; 6],
                value: 1.0,
            })
            .collect();
        let mut grads = net.zero_grads();
        net.backward_sequence(&trace, &og, &mut grads).unwrap();
        for b in net
            .layout()
            .blocks
            .iter()
            .filter(|b| b.name.starts_with("actor."))
        {
            assert!(
                grads.values[b.range()].iter().all(|g| *g == 0.0),
                "{}",
                b.name
            );
        }
        assert!(grads.values.iter().any(|g| *g != 0.0));
    }

    #[test]
    fn backward_matches_central_differences() {
        let net = NetworkParams::init(small(), 5).unwrap();
        let xs = seq(4, 5, 6);
        let weights = seq(4, 7, 7);
        let loss = |values: &[f64]| -> f64 {
            let n = NetworkParams::from_values(small(), values.to_vec()).unwrap();
            let (outs, _) = n.forward_sequence(&xs).unwrap();
            outs.iter()
                .zip(&weights)
                .map(|(o, w)| {
                    o.actor.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()
                        + w[6] * o.value * o.value
                })
                .sum()
        };
        let (outs, trace) = net.forward_sequence(&xs).unwrap();
        let og: Vec<OutputGrad> = outs
            .iter()
            .zip(&weights)
            .map(|(o, w)| OutputGrad {
                actor: w[..6].to_vec(),
                value: 2.0 * w[6] * o.value,
            })
            .collect();
        let mut grads = net.zero_grads();
        net.backward_sequence(&trace, &og, &mut grads).unwrap();
        let report =
            crate::neural::gradient_check(loss, &net.values, &grads.values, 1e-5, 1e-5).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn rejects_wrong_input_width() {
        let net = NetworkParams::init(small(), 1).unwrap();
        assert!(matches!(
            net.step(&[0.0; 4], &mut net.initial_state()),
            Err(NeuralError::Dimension(_))
        ));
    }
}
